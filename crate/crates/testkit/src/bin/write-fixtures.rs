//! Write the demo fixtures used in the README to a directory.

use std::path::PathBuf;

use vulture_testkit::wireshark::{self, R3Fix};

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "vulture-fixtures".into()));
    let paths = wireshark::write_fixture(&dir.join("wireshark"))?;
    wireshark::write_target(&dir.join("targets/vulnerable"), R3Fix::None)?;
    wireshark::write_target(&dir.join("targets/custom-patched"), R3Fix::Custom)?;
    println!("repository list: {}", paths.repos.display());
    println!("advisories:      {}", paths.advisories.display());
    println!("targets:         {}", dir.join("targets").display());
    Ok(())
}
