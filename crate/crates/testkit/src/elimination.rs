//! A 500-fingerprint component segment with planted cross-library copies.

use chrono::{Duration, TimeZone, Utc};
use vulture::code_model::digest;
use vulture::component_db::{ComponentSegment, FunctionFingerprint, TplVersionRecord};

pub const LIBRARIES: usize = 5;
pub const PER_LIBRARY: usize = 100;
pub const PLANTED: usize = 60;

/// A distinct, TLSH-sized function body.
pub fn body(i: usize) -> String {
    format!(
        "static int op_{i}(struct ctx_{m} *c, int x)\n{{\nint acc = {i};\nfor (int k = 0; k < x; k++)\nacc = acc * {a} + c->w[k % {b}];\nif (acc > {lim})\nreturn -{i};\nreturn acc ^ 0x{i:04x};\n}}",
        m = i % 7,
        a = 31 + i % 13,
        b = 3 + i % 5,
        lim = 1000 + 17 * i,
    )
}

/// Library `l` owns bodies `l*100 ..`, except that its last twelve slots
/// copy bodies from other libraries. Births are spread so that some copies
/// predate their source.
pub fn corpus() -> ComponentSegment {
    let base = Utc.with_ymd_and_hms(2000, 1, 1, 0, 0, 0).unwrap();
    let per_lib_copies = PLANTED / LIBRARIES;
    let mut records = Vec::new();
    for l in 0..LIBRARIES {
        let tpl = format!("lib{l}");
        let fc = (0..PER_LIBRARY)
            .map(|slot| {
                let source = if slot >= PER_LIBRARY - per_lib_copies {
                    let k = slot - (PER_LIBRARY - per_lib_copies);
                    ((l + 1 + k % (LIBRARIES - 1)) % LIBRARIES) * PER_LIBRARY + 3 * k
                } else {
                    l * PER_LIBRARY + slot
                };
                FunctionFingerprint {
                    h: digest(&body(source)),
                    birth: base + Duration::days(((l * 37 + slot * 11) % 400) as i64),
                    origin_tpl: tpl.clone(),
                    origin_path: format!("src/f{slot}.c"),
                }
            })
            .collect();
        records.push(TplVersionRecord { tpl_name: tpl, version_tag: "1.0".into(), publish_time: base + Duration::days(500), fc });
    }
    ComponentSegment::from_records(records)
}
