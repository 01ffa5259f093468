use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Coarse role of a file inside a submission package.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileClass {
    Tex,
    Graphic,
    Bib,
    Style,
    Data,
    Code,
    Log,
    Pdf,
    Other,
}

impl FileClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FileClass::Tex => "tex",
            FileClass::Graphic => "graphic",
            FileClass::Bib => "bib",
            FileClass::Style => "style",
            FileClass::Data => "data",
            FileClass::Code => "code",
            FileClass::Log => "log",
            FileClass::Pdf => "pdf",
            FileClass::Other => "other",
        }
    }
}

impl fmt::Display for FileClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const DEFAULT_CLASSES: &[(&str, FileClass)] = &[
    ("tex", FileClass::Tex),
    ("ltx", FileClass::Tex),
    ("latex", FileClass::Tex),
    ("tikz", FileClass::Tex),
    ("eps", FileClass::Graphic),
    ("ps", FileClass::Graphic),
    ("png", FileClass::Graphic),
    ("jpg", FileClass::Graphic),
    ("jpeg", FileClass::Graphic),
    ("gif", FileClass::Graphic),
    ("tif", FileClass::Graphic),
    ("tiff", FileClass::Graphic),
    ("bmp", FileClass::Graphic),
    ("svg", FileClass::Graphic),
    ("pgf", FileClass::Graphic),
    ("mps", FileClass::Graphic),
    ("bib", FileClass::Bib),
    ("bbl", FileClass::Bib),
    ("sty", FileClass::Style),
    ("cls", FileClass::Style),
    ("bst", FileClass::Style),
    ("clo", FileClass::Style),
    ("pygtex", FileClass::Style),
    ("pygstyle", FileClass::Style),
    ("xml", FileClass::Data),
    ("json", FileClass::Data),
    ("csv", FileClass::Data),
    ("tsv", FileClass::Data),
    ("html", FileClass::Data),
    ("htm", FileClass::Data),
    ("yaml", FileClass::Data),
    ("yml", FileClass::Data),
    ("toml", FileClass::Data),
    ("dat", FileClass::Data),
    ("db", FileClass::Data),
    ("sqlite", FileClass::Data),
    ("txt", FileClass::Data),
    ("md", FileClass::Data),
    ("list", FileClass::Data),
    ("py", FileClass::Code),
    ("js", FileClass::Code),
    ("ts", FileClass::Code),
    ("ipynb", FileClass::Code),
    ("m", FileClass::Code),
    ("r", FileClass::Code),
    ("c", FileClass::Code),
    ("h", FileClass::Code),
    ("cpp", FileClass::Code),
    ("java", FileClass::Code),
    ("sh", FileClass::Code),
    ("log", FileClass::Log),
    ("bkp", FileClass::Log),
    ("bak", FileClass::Log),
    ("aux", FileClass::Log),
    ("blg", FileClass::Log),
    ("out", FileClass::Log),
    ("pdf", FileClass::Pdf),
];

/// Extension → class lookup. Keys are lowercase extensions without the dot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FileClassTable {
    map: BTreeMap<String, FileClass>,
}

impl Default for FileClassTable {
    fn default() -> Self {
        FileClassTable { map: DEFAULT_CLASSES.iter().map(|(e, c)| (e.to_string(), *c)).collect() }
    }
}

impl FileClassTable {
    /// Defaults with `overrides` layered on top.
    pub fn with_overrides(overrides: &BTreeMap<String, FileClass>) -> Self {
        let mut table = FileClassTable::default();
        for (ext, class) in overrides {
            table.map.insert(ext.trim_start_matches('.').to_ascii_lowercase(), *class);
        }
        table
    }

    pub fn classify(&self, path: &Path) -> FileClass {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(|e| self.map.get(&e.to_ascii_lowercase()))
            .copied()
            .unwrap_or(FileClass::Other)
    }
}
