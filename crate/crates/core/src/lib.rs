//! Detection of sensitive information left behind in LaTeX preprint sources.

pub mod bench;
pub mod categories;
pub mod classify;
pub mod clean;
pub mod comments;
pub mod exif;
pub mod ingest;
pub mod jsonl;
pub mod labels;
pub mod patterns;
pub mod pipeline;
pub mod refgraph;
pub mod report;
