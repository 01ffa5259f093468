//! Native EXIF reader for JPEG (APP1), PNG (eXIf) and bare TIFF, and the
//! image findings derived from it.
//!
//! Every read is bounds-checked against the containing segment; malformed
//! metadata yields absent fields plus a warning.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::categories;
use crate::patterns::{Locus, Origin};
use crate::report::{Finding, Method, SeverityMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Jpeg,
    Png,
    Tiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsCoordinate {
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMeta {
    pub path: String,
    pub format: ImageFormat,
    pub gps: Option<GpsCoordinate>,
    pub make: Option<String>,
    pub model: Option<String>,
    pub software: Option<String>,
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a JPEG, PNG or TIFF image")]
pub struct UnrecognizedImage;

const TAG_MAKE: u16 = 0x010f;
const TAG_MODEL: u16 = 0x0110;
const TAG_SOFTWARE: u16 = 0x0131;
const TAG_DATETIME: u16 = 0x0132;
const TAG_EXIF_IFD: u16 = 0x8769;
const TAG_GPS_IFD: u16 = 0x8825;
const TAG_DATETIME_ORIGINAL: u16 = 0x9003;

const MAX_IFD_ENTRIES: usize = 1024;

pub fn sniff(bytes: &[u8]) -> Option<ImageFormat> {
    if bytes.starts_with(&[0xff, 0xd8]) {
        Some(ImageFormat::Jpeg)
    } else if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        Some(ImageFormat::Png)
    } else if bytes.starts_with(b"II*\0") || bytes.starts_with(b"MM\0*") {
        Some(ImageFormat::Tiff)
    } else {
        None
    }
}

fn jpeg_exif<'a>(bytes: &'a [u8], warnings: &mut Vec<String>) -> Option<&'a [u8]> {
    let mut i = 2;
    loop {
        if i + 4 > bytes.len() {
            warnings.push("JPEG ended before any EXIF segment".into());
            return None;
        }
        if bytes[i] != 0xff {
            warnings.push(format!("JPEG marker expected at byte {i}"));
            return None;
        }
        let marker = bytes[i + 1];
        if marker == 0xff {
            i += 1;
            continue;
        }
        if marker == 0xd8 || marker == 0x01 || (0xd0..=0xd7).contains(&marker) {
            i += 2;
            continue;
        }
        if marker == 0xd9 || marker == 0xda {
            return None;
        }
        let len = u16::from_be_bytes([bytes[i + 2], bytes[i + 3]]) as usize;
        if len < 2 || i + 2 + len > bytes.len() {
            warnings.push(format!("JPEG segment at byte {i} overruns the file"));
            return None;
        }
        let body = &bytes[i + 4..i + 2 + len];
        if marker == 0xe1 && body.starts_with(b"Exif\0\0") {
            return Some(&body[6..]);
        }
        i += 2 + len;
    }
}

fn png_exif<'a>(bytes: &'a [u8], warnings: &mut Vec<String>) -> Option<&'a [u8]> {
    let mut i = 8;
    while i + 8 <= bytes.len() {
        let len = u32::from_be_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
        let kind = &bytes[i + 4..i + 8];
        let Some(end) = (i + 8).checked_add(len).filter(|e| *e <= bytes.len()) else {
            warnings.push(format!("PNG chunk at byte {i} overruns the file"));
            return None;
        };
        if kind == b"eXIf" {
            return Some(&bytes[i + 8..end]);
        }
        if kind == b"IEND" {
            return None;
        }
        i = end + 4;
    }
    None
}

struct Tiff<'a> {
    data: &'a [u8],
    little: bool,
}

#[derive(Clone, Copy)]
struct Entry {
    tag: u16,
    kind: u16,
    count: u32,
    /// Offset of the value bytes within the TIFF block.
    value_at: usize,
}

fn type_size(kind: u16) -> Option<usize> {
    match kind {
        1 | 2 | 6 | 7 => Some(1),
        3 | 8 => Some(2),
        4 | 9 | 11 => Some(4),
        5 | 10 | 12 => Some(8),
        _ => None,
    }
}

impl<'a> Tiff<'a> {
    fn new(data: &'a [u8]) -> Option<Self> {
        let little = match data.get(..4)? {
            b"II*\0" => true,
            b"MM\0*" => false,
            _ => return None,
        };
        Some(Tiff { data, little })
    }

    fn u16_at(&self, at: usize) -> Option<u16> {
        let b: [u8; 2] = self.data.get(at..at.checked_add(2)?)?.try_into().ok()?;
        Some(if self.little { u16::from_le_bytes(b) } else { u16::from_be_bytes(b) })
    }

    fn u32_at(&self, at: usize) -> Option<u32> {
        let b: [u8; 4] = self.data.get(at..at.checked_add(4)?)?.try_into().ok()?;
        Some(if self.little { u32::from_le_bytes(b) } else { u32::from_be_bytes(b) })
    }

    fn entries(&self, offset: usize, warnings: &mut Vec<String>) -> Vec<Entry> {
        let Some(n) = self.u16_at(offset) else {
            warnings.push(format!("IFD offset {offset} outside the EXIF block"));
            return Vec::new();
        };
        let n = n as usize;
        if n > MAX_IFD_ENTRIES {
            warnings.push(format!("IFD at {offset} claims {n} entries"));
            return Vec::new();
        }
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let at = offset + 2 + 12 * k;
            let (Some(tag), Some(kind), Some(count)) = (self.u16_at(at), self.u16_at(at + 2), self.u32_at(at + 4))
            else {
                warnings.push(format!("IFD at {offset} truncated after {k} entries"));
                break;
            };
            let Some(size) = type_size(kind).and_then(|s| s.checked_mul(count as usize)) else { continue };
            let value_at = if size <= 4 {
                at + 8
            } else {
                match self.u32_at(at + 8) {
                    Some(o) => o as usize,
                    None => continue,
                }
            };
            if value_at.checked_add(size).is_none_or(|e| e > self.data.len()) {
                warnings.push(format!("tag 0x{tag:04x} value outside the EXIF block"));
                continue;
            }
            out.push(Entry { tag, kind, count, value_at });
        }
        out
    }

    fn ascii(&self, e: &Entry) -> Option<String> {
        if e.kind != 2 {
            return None;
        }
        let raw = &self.data[e.value_at..e.value_at + e.count as usize];
        let s = String::from_utf8_lossy(raw);
        let s = s.trim_end_matches('\0').trim();
        (!s.is_empty()).then(|| s.to_string())
    }

    fn offset_value(&self, e: &Entry) -> Option<usize> {
        match e.kind {
            4 => self.u32_at(e.value_at).map(|v| v as usize),
            3 => self.u16_at(e.value_at).map(|v| v as usize),
            _ => None,
        }
    }

    fn rationals(&self, e: &Entry) -> Option<Vec<(u32, u32)>> {
        if e.kind != 5 {
            return None;
        }
        (0..e.count as usize)
            .map(|k| Some((self.u32_at(e.value_at + 8 * k)?, self.u32_at(e.value_at + 8 * k + 4)?)))
            .collect()
    }
}

/// Degrees + minutes/60 + seconds/3600, or `None` on a zero denominator or
/// fewer than three components.
pub fn dms_to_decimal(parts: &[(u32, u32)]) -> Option<f64> {
    if parts.len() < 3 || parts[..3].iter().any(|(_, d)| *d == 0) {
        return None;
    }
    let v = |(n, d): (u32, u32)| n as f64 / d as f64;
    Some(v(parts[0]) + v(parts[1]) / 60.0 + v(parts[2]) / 3600.0)
}

#[derive(Default)]
struct Raw {
    make: Option<String>,
    model: Option<String>,
    software: Option<String>,
    datetime: Option<String>,
    original: Option<String>,
    gps: Option<GpsCoordinate>,
}

fn parse_gps(t: &Tiff<'_>, entries: &[Entry]) -> Option<GpsCoordinate> {
    let find = |tag| entries.iter().find(|e| e.tag == tag);
    let sign = |tag, neg: &str| match find(tag).and_then(|e| t.ascii(e)) {
        Some(r) if r.eq_ignore_ascii_case(neg) => -1.0,
        _ => 1.0,
    };
    let lat = dms_to_decimal(&t.rationals(find(2)?)?)? * sign(1, "S");
    let lon = dms_to_decimal(&t.rationals(find(4)?)?)? * sign(3, "W");
    ((-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)).then_some(GpsCoordinate { lat, lon })
}

fn walk(block: &[u8], warnings: &mut Vec<String>) -> Raw {
    let mut raw = Raw::default();
    let Some(t) = Tiff::new(block) else {
        warnings.push("EXIF block lacks a TIFF header".into());
        return raw;
    };
    let Some(ifd0) = t.u32_at(4) else {
        warnings.push("TIFF header truncated".into());
        return raw;
    };
    let mut seen = HashSet::new();
    let mut queue = vec![(ifd0 as usize, false)];
    while let Some((off, is_gps)) = queue.pop() {
        if !seen.insert(off) {
            warnings.push(format!("IFD loop at offset {off}"));
            continue;
        }
        let entries = t.entries(off, warnings);
        if is_gps {
            raw.gps = parse_gps(&t, &entries);
            continue;
        }
        for e in &entries {
            match e.tag {
                TAG_MAKE => raw.make = t.ascii(e),
                TAG_MODEL => raw.model = t.ascii(e),
                TAG_SOFTWARE => raw.software = t.ascii(e),
                TAG_DATETIME => raw.datetime = t.ascii(e),
                TAG_DATETIME_ORIGINAL => raw.original = t.ascii(e),
                TAG_EXIF_IFD => queue.extend(t.offset_value(e).map(|o| (o, false))),
                TAG_GPS_IFD => queue.extend(t.offset_value(e).map(|o| (o, true))),
                _ => {}
            }
        }
    }
    raw
}

pub fn read_exif(bytes: &[u8], path: &str) -> Result<ImageMeta, UnrecognizedImage> {
    let format = sniff(bytes).ok_or(UnrecognizedImage)?;
    let mut warnings = Vec::new();
    let block = match format {
        ImageFormat::Jpeg => jpeg_exif(bytes, &mut warnings),
        ImageFormat::Png => png_exif(bytes, &mut warnings),
        ImageFormat::Tiff => Some(bytes),
    };
    let raw = block.map(|b| walk(b, &mut warnings)).unwrap_or_default();
    for w in &warnings {
        log::warn!("{path}: {w}");
    }
    Ok(ImageMeta {
        path: path.to_string(),
        format,
        gps: raw.gps,
        make: raw.make,
        model: raw.model,
        software: raw.software,
        timestamp: raw.original.or(raw.datetime),
        warnings,
    })
}

pub fn read_exif_file(path: &Path, display: &str) -> std::io::Result<Option<ImageMeta>> {
    let bytes = std::fs::read(path)?;
    Ok(read_exif(&bytes, display).ok())
}

/// Rounded to four decimals (about 11 m) for presentation.
pub fn format_gps(g: &GpsCoordinate) -> String {
    format!("lat={:.4}, lon={:.4}", g.lat, g.lon)
}

fn device_evidence(meta: &ImageMeta) -> Option<String> {
    let parts: Vec<String> =
        [("make", &meta.make), ("model", &meta.model), ("software", &meta.software), ("timestamp", &meta.timestamp)]
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}")))
            .collect();
    (!parts.is_empty()).then(|| parts.join(", "))
}

/// One location finding when GPS is present, otherwise one device finding
/// when make, model, software or a timestamp is present.
pub fn flag_image(meta: &ImageMeta, paper_id: &str, severities: &SeverityMap) -> Vec<Finding> {
    let locus = Locus { paper_id: paper_id.to_string(), file: meta.path.clone(), line: 0, origin: Origin::File };
    let (category, evidence) = match (&meta.gps, device_evidence(meta)) {
        (Some(g), _) => (categories::IMAGE_LOCATION, format_gps(g)),
        (None, Some(dev)) => (categories::IMAGE_DEVICE, dev),
        (None, None) => return Vec::new(),
    };
    vec![Finding::new(paper_id, Method::LF, category, locus, evidence, "exif", severities)]
}
