//! Finding category keys. The severity attached to each lives in the
//! severity map data file, not here.

pub const LOGIN_CREDENTIALS: &str = "login-credentials";
pub const AGGREGATED_PII: &str = "aggregated-pii";
pub const SURVEY_PII: &str = "survey-pii";
pub const AWS_ACCESS_KEYS: &str = "aws-access-keys";
pub const SECRET_TOKEN: &str = "secret-token";
pub const PII_EXPOSURE: &str = "pii-exposure";
pub const AUTHOR_CONFLICTS: &str = "author-conflicts";
pub const IMAGE_LOCATION: &str = "image-location-exif";
pub const PRIVATE_DOCUMENTS: &str = "private-documents";
pub const JWT_WITHOUT_EXPIRY: &str = "jwt-without-expiry";
pub const PEER_REVIEW: &str = "peer-review-disputes";
pub const PRIVATE_SOURCE_CODE: &str = "private-source-code";
pub const PRIVATE_GIT: &str = "private-git-repository";
pub const PUBLIC_IP: &str = "public-ip-address";
pub const PHONE_NUMBERS: &str = "phone-numbers";
pub const CASA_TOKENS: &str = "casa-tokens";
pub const MODEL_WEIGHTS: &str = "private-model-weights";
pub const SSN: &str = "social-security-numbers";
pub const SQLITE_DATABASES: &str = "sqlite-databases";
pub const UNIQUE_EMAILS: &str = "unique-emails";
pub const CONFIG_FILES: &str = "config-files";
pub const HASHES: &str = "hashes";
pub const NETWORK_IDENTIFIERS: &str = "network-identifiers";
pub const VALIDATED_IBANS: &str = "validated-ibans";
pub const PO_BOXES: &str = "po-box-addresses";
pub const IMAGE_DEVICE: &str = "image-device-metadata";
pub const TOKEN_LIKE_URL: &str = "token-like-url";
pub const SECRET_PATTERN_LOW: &str = "secret-pattern-low";

/// Every key with a human title, in report order.
pub const ALL: &[(&str, &str)] = &[
    (LOGIN_CREDENTIALS, "Login credentials"),
    (AGGREGATED_PII, "Aggregated personal data"),
    (SURVEY_PII, "Survey participant data"),
    (AWS_ACCESS_KEYS, "AWS access keys"),
    (SECRET_TOKEN, "API keys and secret tokens"),
    (PII_EXPOSURE, "Personal information"),
    (AUTHOR_CONFLICTS, "Conflicts between authors"),
    (IMAGE_LOCATION, "GPS location in image metadata"),
    (PRIVATE_DOCUMENTS, "Links to private documents"),
    (JWT_WITHOUT_EXPIRY, "JWTs with no expiry"),
    (PEER_REVIEW, "Peer-review disputes"),
    (PRIVATE_SOURCE_CODE, "Unreferenced source code"),
    (PRIVATE_GIT, "Private git repositories"),
    (PUBLIC_IP, "Public IP addresses"),
    (PHONE_NUMBERS, "Phone numbers"),
    (CASA_TOKENS, "CASA access tokens"),
    (MODEL_WEIGHTS, "Unreferenced model weights"),
    (SSN, "Social security numbers"),
    (SQLITE_DATABASES, "SQLite databases"),
    (UNIQUE_EMAILS, "Email addresses"),
    (CONFIG_FILES, "Configuration files"),
    (HASHES, "Hash strings"),
    (NETWORK_IDENTIFIERS, "Network and account identifiers"),
    (VALIDATED_IBANS, "Checksum-valid IBANs"),
    (PO_BOXES, "PO box addresses"),
    (IMAGE_DEVICE, "Device or software in image metadata"),
    (TOKEN_LIKE_URL, "Token-bearing URLs"),
    (SECRET_PATTERN_LOW, "Low-confidence secret patterns"),
];

pub fn title(key: &str) -> &str {
    ALL.iter().find(|(k, _)| *k == key).map_or(key, |(_, t)| t)
}
