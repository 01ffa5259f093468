//! Corpus ingestion: download planning over bulk-archive manifests and
//! unpacking of individual submission packages.

mod classes;
mod extract;
mod manifest;
mod plan;

pub use classes::{FileClass, FileClassTable};
pub use extract::{
    classify_submission, extract_bulk, extract_submission, inventory, normalize_member_path, paper_id_from_member,
    submission_dir_name, ExtractConfig, FileEntry, SubmissionKind, SubmissionRecord,
};
pub use manifest::{ArchiveEntry, ArchiveManifest, ManifestError};
pub use plan::{parse_wanted, plan_downloads, DownloadPlan, PlannedArchive};
