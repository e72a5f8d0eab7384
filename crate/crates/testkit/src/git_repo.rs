//! Replay a fixture manifest into a real repository with the `git` binary.

use std::collections::HashMap;
use std::io;
use std::path::Path;
use std::process::Command;

use vulture::clients::RepoManifest;

fn git(dir: &Path, args: &[&str], date: Option<&str>) -> io::Result<()> {
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(dir).args(args).env("GIT_CONFIG_NOSYSTEM", "1").env("HOME", dir);
    if let Some(d) = date {
        cmd.env("GIT_AUTHOR_DATE", d).env("GIT_COMMITTER_DATE", d);
    }
    let out = cmd.output()?;
    if !out.status.success() {
        return Err(io::Error::other(format!("git {args:?}: {}", String::from_utf8_lossy(&out.stderr))));
    }
    Ok(())
}

pub fn git_available() -> bool {
    Command::new("git").arg("--version").output().is_ok_and(|o| o.status.success())
}

/// Create a repository at `dir` whose first-parent history mirrors
/// `manifest`. Commit hashes differ from the manifest's.
pub fn materialize(manifest: &RepoManifest, dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    git(dir, &["init", "-q", "-b", "main"], None)?;
    git(dir, &["config", "user.name", "Fixture"], None)?;
    git(dir, &["config", "user.email", "fixture@example.invalid"], None)?;
    git(dir, &["config", "commit.gpgsign", "false"], None)?;
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, c) in manifest.commits.iter().enumerate() {
        index.insert(&c.hash, i);
        for (path, content) in &c.files {
            let p = dir.join(path);
            match content {
                Some(text) => {
                    if let Some(parent) = p.parent() {
                        std::fs::create_dir_all(parent)?;
                    }
                    std::fs::write(&p, text)?;
                }
                None => {
                    if p.exists() {
                        std::fs::remove_file(&p)?;
                    }
                }
            }
        }
        let date = c.time.to_rfc3339();
        git(dir, &["add", "-A"], None)?;
        let message = if c.message.is_empty() { "(no message)" } else { c.message.as_str() };
        git(dir, &["commit", "-q", "--allow-empty", "-m", message], Some(&date))?;
        let tags: Vec<&str> = manifest.tags.iter().filter(|t| index.get(t.commit.as_str()) == Some(&i)).map(|t| t.name.as_str()).collect();
        for t in tags {
            git(dir, &["tag", t], None)?;
        }
    }
    Ok(())
}
