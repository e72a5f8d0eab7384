//! Interfaces to the outside world: git histories, advisory feeds and
//! oracles, each with a hermetic backend for tests.

pub mod advisory;
pub mod git;
pub mod http;
pub mod oracle;

use thiserror::Error;

pub use advisory::{fetch_advisories, parse_nvd_response, read_directory, Advisory, AdvisoryFeed, AdvisorySource, CpeMatch, NvdClient};
pub use git::{open_repo, CommitMeta, FixtureRepo, GitRepoHandle, ManifestCommit, ManifestTag, RepoManifest, RepoMode, SubprocessRepo, TagInfo};
pub use http::{Backoff, HttpRequest, HttpResponse, HttpTransport, Method, OfflineTransport, Recording, RecordingTransport, ReplayTransport, ReqwestTransport};
pub use oracle::{
    ChatOracle, ChatSettings, DescriptionOracle, OracleRequest, OracleResponse, RelevanceOracle, RuleOracle,
    VulnerableElements, WithFallback,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClientError {
    #[error("repository unavailable: {0}")]
    RepoUnavailable(String),
    #[error("unknown revision `{0}`")]
    UnknownRevision(String),
    #[error("invalid repository manifest: {0}")]
    BadManifest(String),
    #[error("git failed: {0}")]
    Git(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("rate limited after {0} attempts")]
    RateLimited(u32),
    #[error("network access refused in offline mode: {0}")]
    Offline(String),
    #[error("malformed advisory: {0}")]
    BadAdvisory(String),
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),
}
