#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::clients::{FixtureRepo, GitRepoHandle, RepoManifest};

fuzz_target!(|data: &[u8]| {
    let Ok(manifest) = serde_json::from_slice::<RepoManifest>(data) else { return };
    if let Ok(repo) = FixtureRepo::new(manifest) {
        if let Ok(tags) = repo.list_tags() {
            for t in tags.iter().take(4) {
                let _ = repo.files_at(&t.name);
            }
        }
    }
});
