//! URL classification: cloud-share links, token-bearing links, CASA tokens,
//! git remotes.

use serde::{Deserialize, Serialize};

use super::entropy::TokenHeuristic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudProvider {
    Gdrive,
    Dropbox,
    Sharepoint,
    Proton,
    Mega,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlRecord {
    pub url: String,
    /// `None` when the URL does not parse.
    pub host: Option<String>,
    pub scheme: Option<String>,
    pub port: Option<u16>,
    pub token_like: bool,
    pub cloud_provider: Option<CloudProvider>,
    pub casa_token: bool,
    pub has_userinfo: bool,
    /// Segments of the path, for downstream git and share-link checks.
    #[serde(skip)]
    pub path_segments: Vec<String>,
}

const PROVIDERS: &[(&str, CloudProvider)] = &[
    ("drive.google.com", CloudProvider::Gdrive),
    ("docs.google.com", CloudProvider::Gdrive),
    ("dropbox.com", CloudProvider::Dropbox),
    ("dropboxusercontent.com", CloudProvider::Dropbox),
    ("db.tt", CloudProvider::Dropbox),
    ("sharepoint.com", CloudProvider::Sharepoint),
    ("1drv.ms", CloudProvider::Sharepoint),
    ("onedrive.live.com", CloudProvider::Sharepoint),
    ("proton.me", CloudProvider::Proton),
    ("mega.nz", CloudProvider::Mega),
    ("mega.io", CloudProvider::Mega),
    ("box.com", CloudProvider::Other),
    ("wetransfer.com", CloudProvider::Other),
    ("we.tl", CloudProvider::Other),
    ("icloud.com", CloudProvider::Other),
];

pub fn host_matches(host: &str, suffix: &str) -> bool {
    host == suffix || host.strip_suffix(suffix).is_some_and(|p| p.ends_with('.'))
}

pub fn provider_for(host: &str) -> Option<CloudProvider> {
    PROVIDERS.iter().find(|(s, _)| host_matches(host, s)).map(|(_, p)| *p)
}

pub fn classify_url(text: &str, heuristic: &TokenHeuristic) -> UrlRecord {
    let mut rec = UrlRecord {
        url: text.to_string(),
        host: None,
        scheme: None,
        port: None,
        token_like: false,
        cloud_provider: None,
        casa_token: false,
        has_userinfo: false,
        path_segments: Vec::new(),
    };
    let Ok(parsed) = url::Url::parse(text) else { return rec };
    let Some(host) = parsed.host_str() else { return rec };
    let host = host.trim_start_matches('[').trim_end_matches(']').to_ascii_lowercase();
    rec.scheme = Some(parsed.scheme().to_string());
    rec.port = parsed.port();
    rec.has_userinfo = !parsed.username().is_empty() || parsed.password().is_some();
    rec.path_segments =
        parsed.path_segments().map(|s| s.filter(|x| !x.is_empty()).map(str::to_string).collect()).unwrap_or_default();
    let query: Vec<(String, String)> = parsed.query_pairs().map(|(k, v)| (k.into_owned(), v.into_owned())).collect();
    rec.casa_token = query.iter().any(|(k, _)| k.eq_ignore_ascii_case("casa_token"));
    rec.token_like =
        rec.path_segments.iter().any(|s| heuristic.is_token(s)) || query.iter().any(|(_, v)| heuristic.is_token(v));
    rec.cloud_provider = provider_for(&host);
    rec.host = Some(host);
    rec
}

const PUBLIC_FORGES: &[&str] = &["github.com", "gitlab.com", "bitbucket.org", "codeberg.org", "sr.ht", "git.sr.ht"];

/// A git remote that is not a plain public-forge project page: scp-style
/// `git@host:path`, a `git://`/`ssh://` remote, credentials in the URL, or a
/// `.git` path on a self-hosted forge.
pub fn is_private_git(rec: &UrlRecord) -> bool {
    let Some(host) = rec.host.as_deref() else { return false };
    let public = PUBLIC_FORGES.iter().any(|f| host_matches(host, f));
    let scheme = rec.scheme.as_deref().unwrap_or("");
    let git_scheme = matches!(scheme, "git" | "ssh" | "git+ssh");
    let dot_git = rec.path_segments.last().is_some_and(|s| s.ends_with(".git"));
    let self_hosted = !public && host.split('.').any(|l| l.starts_with("git") || l == "forge" || l == "gitea");
    if public {
        rec.has_userinfo || git_scheme
    } else {
        (git_scheme && (dot_git || self_hosted))
            || (self_hosted && (dot_git || rec.has_userinfo || rec.path_segments.len() >= 2))
    }
}
