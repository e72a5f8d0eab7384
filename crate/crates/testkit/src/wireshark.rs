//! A wireshark-like history around the 1.8.7 → 1.8.8 release window, with
//! the fix for CVE-2013-4080 planted among 348 unrelated commits.

use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use vulture::clients::{Advisory, CpeMatch, RepoManifest};

use crate::{ts, write_json, write_tree, HistoryBuilder};

pub const NAME: &str = "wireshark";
pub const CVE_ID: &str = "CVE-2013-4080";
pub const DESCRIPTION: &str = "The dissect_r3_upstreamcommand_queryconfig function in epan/dissectors/packet-assa_r3.c in the Assa Abloy R3 dissector in Wireshark 1.8.x before 1.8.8 does not properly handle a zero-length item, which allows remote attackers to cause a denial of service (infinite loop, and CPU and memory consumption) via a crafted packet.";
pub const PATCH_COMMIT: &str = "779d28d39039ada8970c910d8350fc2eb05cf00a";
pub const REPO_URL: &str = "https://github.com/wireshark/wireshark";
pub const WINDOW_START: &str = "2013-05-17T16:41:42Z";
pub const WINDOW_END: &str = "2013-06-07T15:49:07Z";
pub const WINDOW_COMMITS: usize = 348;
/// Zero-based position of the fix inside the window: the 7th commit of the
/// third slice of 20.
pub const PATCH_INDEX: usize = 46;
pub const R3_PATH: &str = "epan/dissectors/packet-assa_r3.c";

const FILLER: [&str; 12] = ["dns", "http", "smb", "tcp", "udp", "ip", "arp", "icmp", "dhcp", "ntp", "snmp", "sip"];

const R3_HEAD: &str = r#"#include "config.h"
#include <epan/packet.h>
#include <epan/expert.h>

static int proto_r3 = -1;
static gint ett_r3upstreamfield = -1;

static void
dissect_r3_upstreamcommand_getversion (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  proto_item *pi;

  pi = proto_tree_add_item (tree, hf_r3_version, tvb, start_offset, length, ENC_ASCII|ENC_NA);
  proto_item_append_text (pi, " (firmware)");
  col_append_str (pinfo->cinfo, COL_INFO, " getversion");
}

static void
dissect_r3_upstreamcommand_queryconfig (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  proto_item *upstreamfield_item = NULL;
  proto_tree *upstreamfield_tree = NULL;
  guint32 offset = 0;

  upstreamfield_item = proto_tree_add_text (tree, tvb, start_offset, length, "Upstream Field (Query Config)");
  upstreamfield_tree = proto_item_add_subtree (upstreamfield_item, ett_r3upstreamfield);

  while (offset < length)
  {
    guint32 item_length = tvb_get_guint8 (tvb, start_offset + offset);
    guint32 item_type = tvb_get_guint8 (tvb, start_offset + offset + 1);
    proto_item *pi;
"#;

const R3_FIX: &str = r#"
    if (item_length == 0)
    {
      expert_add_info_format (pinfo, upstreamfield_item, PI_MALFORMED, PI_WARN, "Invalid item length");
      return;
    }
"#;

const R3_FIX_CUSTOM: &str = r#"
    if(item_length==0) {
      expert_add_info_format(pinfo, upstreamfield_item, PI_MALFORMED, PI_WARN, "zero-length config item");
      return;
    }
"#;

const R3_TAIL: &str = r#"
    pi = proto_tree_add_item (upstreamfield_tree, hf_r3_configitem, tvb, start_offset + offset + 1, 1, ENC_LITTLE_ENDIAN);
    proto_item_append_text (pi, " (%u)", item_type);
    proto_item_set_len (pi, item_length);
    offset += item_length;
  }
  col_append_str (pinfo->cinfo, COL_INFO, " queryconfig");
}

static void
dissect_r3_upstreamcommand_dumpevent (tvbuff_t *tvb, guint32 start_offset, guint32 length, packet_info *pinfo, proto_tree *tree)
{
  guint32 event = tvb_get_letohl (tvb, start_offset);

  proto_tree_add_uint (tree, hf_r3_eventlog_event, tvb, start_offset, 4, event);
  if (length > 4)
    proto_tree_add_item (tree, hf_r3_eventlog_data, tvb, start_offset + 4, length - 4, ENC_NA);
  col_append_fstr (pinfo->cinfo, COL_INFO, " event %u", event);
}
"#;

/// Text of the R3 dissector file, with the upstream fix, a reformatted
/// variant of it, or neither.
pub fn r3_source(fix: R3Fix) -> String {
    let fix = match fix {
        R3Fix::None => "",
        R3Fix::Upstream => R3_FIX,
        R3Fix::Custom => R3_FIX_CUSTOM,
    };
    format!("{R3_HEAD}{fix}{R3_TAIL}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R3Fix {
    None,
    Upstream,
    Custom,
}

pub fn filler_path(name: &str) -> String {
    format!("epan/dissectors/packet-{name}.c")
}

/// A small dissector whose header parser returns a revision-dependent
/// offset, so every revision differs.
pub fn filler_source(name: &str, rev: usize) -> String {
    let upper = name.to_uppercase();
    format!(
        r#"#include "config.h"
#include <epan/packet.h>

static int proto_{name} = -1;

static int
dissect_{name}_header (tvbuff_t *tvb, packet_info *pinfo, proto_tree *tree, int offset)
{{
  guint16 flags = tvb_get_ntohs (tvb, offset);

  proto_tree_add_uint (tree, hf_{name}_flags, tvb, offset, 2, flags);
  col_set_str (pinfo->cinfo, COL_PROTOCOL, "{upper}");
  if (flags & 0x8000)
    col_append_str (pinfo->cinfo, COL_INFO, " response");
  return offset + {step};
}}

void
proto_register_{name} (void)
{{
  proto_{name} = proto_register_protocol ("{upper} Protocol", "{upper}", "{name}");
  register_dissector ("{name}", dissect_{name}_header, proto_{name});
  prefs_register_protocol (proto_{name}, NULL);
  proto_register_field_array (proto_{name}, hf_{name}, array_length (hf_{name}));
}}
"#,
        step = 2 + rev
    )
}

fn version_header(version: &str) -> String {
    format!("#define VERSION \"{version}\"\n#define VERSION_MAJOR 1\n#define VERSION_MINOR 8\n")
}

/// Commit times inside the window: evenly spread, the last one exactly at
/// the end.
fn window_times() -> Vec<DateTime<Utc>> {
    let (start, end) = (ts(WINDOW_START), ts(WINDOW_END));
    let span = (end - start).num_seconds();
    (1..=WINDOW_COMMITS as i64).map(|i| start + Duration::seconds(span * i / WINDOW_COMMITS as i64)).collect()
}

pub fn manifest() -> RepoManifest {
    let mut h = HistoryBuilder::new(NAME);
    let mut revs = [0usize; FILLER.len()];
    let mut initial: Vec<(String, String)> = FILLER.iter().map(|n| (filler_path(n), filler_source(n, 0))).collect();
    initial.push((R3_PATH.into(), r3_source(R3Fix::None)));
    initial.push(("version.h".into(), version_header("1.8.5")));
    let files: Vec<(&str, Option<&str>)> = initial.iter().map(|(p, c)| (p.as_str(), Some(c.as_str()))).collect();
    h.commit(None, ts("2013-01-30T12:00:00Z"), "Import the 1.8 branch.", &files);

    let bump = |h: &mut HistoryBuilder, revs: &mut [usize; FILLER.len()], k: usize, time, message: &str| {
        let name = FILLER[k % FILLER.len()];
        revs[k % FILLER.len()] += 1;
        let text = filler_source(name, revs[k % FILLER.len()]);
        h.commit(None, time, message, &[(&filler_path(name), Some(&text))])
    };
    bump(&mut h, &mut revs, 0, ts("2013-02-14T09:30:00Z"), "Fix the DNS response flag.");
    let v6 = version_header("1.8.6");
    let c = h.commit(None, ts("2013-03-07T19:21:11Z"), "Build 1.8.6.", &[("version.h", Some(&v6))]);
    h.tag("wireshark-1.8.6", &c);
    bump(&mut h, &mut revs, 1, ts("2013-04-02T10:00:00Z"), "Backport an HTTP chunking fix.");
    let v7 = version_header("1.8.7");
    let c = h.commit(None, ts(WINDOW_START), "Build 1.8.7.", &[("version.h", Some(&v7))]);
    h.tag("wireshark-1.8.7", &c);

    let patched = r3_source(R3Fix::Upstream);
    let v8 = version_header("1.8.8");
    for (i, time) in window_times().into_iter().enumerate() {
        if i == PATCH_INDEX {
            h.commit(
                Some(PATCH_COMMIT),
                time,
                "Copy over r49802 from the trunk:\n\nFix an infinite loop on zero-length items in dissect_r3_upstreamcommand_queryconfig (bug 8764).",
                &[(R3_PATH, Some(&patched))],
            );
        } else if i == WINDOW_COMMITS - 1 {
            let c = h.commit(None, time, "Build 1.8.8.", &[("version.h", Some(&v8))]);
            h.tag("wireshark-1.8.8", &c);
        } else {
            let msg = format!("Backport r{}: tidy the {} dissector.", 49000 + i, FILLER[i % FILLER.len()].to_uppercase());
            bump(&mut h, &mut revs, i, time, &msg);
        }
    }
    h.build()
}

pub fn advisory() -> Advisory {
    let cpe = (0..=7).map(|p| CpeMatch::new(format!("cpe:2.3:a:wireshark:wireshark:1.8.{p}:*:*:*:*:*:*:*"))).collect();
    Advisory {
        id: CVE_ID.into(),
        description: DESCRIPTION.into(),
        cpe,
        references: vec!["https://bugs.wireshark.org/bugzilla/show_bug.cgi?id=8764".into()],
        fixed_version: None,
    }
}

/// Files written by [`write_fixture`].
#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub repos: PathBuf,
    pub advisories: PathBuf,
}

/// Manifest, repository list and advisory directory below `dir`.
pub fn write_fixture(dir: &Path) -> io::Result<FixturePaths> {
    write_json(&dir.join("wireshark.json"), &manifest())?;
    let repos = dir.join("repos.json");
    write_json(
        &repos,
        &serde_json::json!([{ "name": NAME, "location": "wireshark.json", "mode": "fixture", "url": REPO_URL }]),
    )?;
    let advisories = dir.join("advisories");
    write_json(&advisories.join(format!("{CVE_ID}.json")), &advisory())?;
    Ok(FixturePaths { repos, advisories })
}

/// A product embedding the R3 dissector and two neighbours.
pub fn write_target(root: &Path, fix: R3Fix) -> io::Result<()> {
    let base = "plugins/wireshark/epan/dissectors";
    write_tree(
        root,
        &[
            (format!("{base}/packet-assa_r3.c"), r3_source(fix)),
            (format!("{base}/packet-dns.c"), filler_source("dns", 1)),
            (format!("{base}/packet-sip.c"), filler_source("sip", 0)),
            ("src/main.c".into(), "int\nmain (int argc, char **argv)\n{\n  return run_capture (argc, argv);\n}\n".into()),
        ],
    )
}
