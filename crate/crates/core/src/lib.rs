pub mod code_model;
pub mod tlsh;
pub mod diff;
pub mod union_find;
pub mod version;
pub mod clients;
pub mod component_db;
pub mod vuln_db;
pub mod flaw_detect;
pub mod reuse_id;
pub mod pipeline;
