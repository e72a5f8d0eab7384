//! CPE applicability statements and their resolution against a library's
//! version tags.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::clients::CpeMatch;
use crate::version::compare_segments;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionBound {
    pub version: String,
    pub inclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpeForm {
    Enumeration(Vec<String>),
    Interval { start: Option<VersionBound>, end: Option<VersionBound> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpeConstraint {
    pub vendor: String,
    pub product: String,
    pub form: CpeForm,
}

/// Part of a tag that carries the version number: everything from the first
/// digit on, so `wireshark-1.8.7` and `v1.8.7` both compare as `1.8.7`.
pub fn version_core(tag: &str) -> &str {
    match tag.find(|c: char| c.is_ascii_digit()) {
        Some(i) => &tag[i..],
        None => tag,
    }
}

fn cmp_tag(tag: &str, version: &str) -> Ordering {
    compare_segments(version_core(tag), version_core(version))
}

fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Split a formatted CPE string, honoring backslash escapes.
fn split_fields(s: &str) -> Vec<&str> {
    let mut fields = Vec::new();
    let bytes = s.as_bytes();
    let (mut start, mut i) = (0, 0);
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b':' => {
                fields.push(&s[start..i]);
                start = i + 1;
                i += 1;
            }
            _ => i += 1,
        }
    }
    fields.push(&s[start.min(s.len())..]);
    fields
}

/// `(vendor, product, version)` of a CPE 2.3 formatted string or a CPE 2.2
/// URI. The version is `None` for `*`, `-` or an empty field.
pub fn parse_cpe_name(criteria: &str) -> Option<(String, String, Option<String>)> {
    let fields: Vec<String> = if let Some(rest) = criteria.strip_prefix("cpe:2.3:") {
        let f = split_fields(rest);
        if f.len() < 4 {
            return None;
        }
        f.into_iter().map(unescape).collect()
    } else if let Some(rest) = criteria.strip_prefix("cpe:/") {
        rest.split(':').map(|p| p.replace("%2e", ".").replace("%2d", "-")).collect()
    } else {
        return None;
    };
    if fields.len() < 3 || !matches!(fields[0].as_str(), "a" | "o" | "h") {
        return None;
    }
    let (vendor, product) = (fields[1].to_lowercase(), fields[2].to_lowercase());
    if vendor.is_empty() || product.is_empty() || product == "*" {
        return None;
    }
    let version = fields.get(3).filter(|v| !matches!(v.as_str(), "" | "*" | "-")).cloned();
    Some((vendor, product, version))
}

impl CpeConstraint {
    /// Interpret one applicability entry.
    pub fn from_match(m: &CpeMatch) -> Option<Self> {
        let (vendor, product, version) = parse_cpe_name(&m.criteria)?;
        let bound = |v: &Option<String>, inclusive| v.as_ref().filter(|s| !s.is_empty()).map(|s| VersionBound { version: s.clone(), inclusive });
        let start = bound(&m.version_start_including, true).or_else(|| bound(&m.version_start_excluding, false));
        let end = bound(&m.version_end_including, true).or_else(|| bound(&m.version_end_excluding, false));
        let form = match version {
            Some(v) if start.is_none() && end.is_none() => CpeForm::Enumeration(vec![v]),
            Some(_) => return None,
            None => CpeForm::Interval { start, end },
        };
        let c = CpeConstraint { vendor, product, form };
        c.is_well_formed().then_some(c)
    }

    pub fn is_well_formed(&self) -> bool {
        match &self.form {
            CpeForm::Enumeration(v) => !v.is_empty(),
            CpeForm::Interval { start: Some(s), end: Some(e) } => match compare_segments(version_core(&s.version), version_core(&e.version)) {
                Ordering::Less => true,
                Ordering::Equal => s.inclusive && e.inclusive,
                Ordering::Greater => false,
            },
            CpeForm::Interval { .. } => true,
        }
    }

    /// Whether a single tag satisfies the constraint.
    pub fn contains(&self, tag: &str) -> bool {
        match &self.form {
            CpeForm::Enumeration(list) => list.iter().any(|v| cmp_tag(tag, v) == Ordering::Equal),
            CpeForm::Interval { start, end } => {
                let above = start.as_ref().is_none_or(|s| match cmp_tag(tag, &s.version) {
                    Ordering::Greater => true,
                    Ordering::Equal => s.inclusive,
                    Ordering::Less => false,
                });
                let below = end.as_ref().is_none_or(|e| match cmp_tag(tag, &e.version) {
                    Ordering::Less => true,
                    Ordering::Equal => e.inclusive,
                    Ordering::Greater => false,
                });
                above && below
            }
        }
    }

    /// Tags of `versions` (ascending) satisfying the constraint. Interval
    /// ends are located by binary search over the sorted list.
    pub fn resolve<'a>(&self, versions: &'a [String]) -> Vec<&'a String> {
        match &self.form {
            CpeForm::Enumeration(_) => versions.iter().filter(|v| self.contains(v)).collect(),
            CpeForm::Interval { start, end } => {
                let lo = match start {
                    None => 0,
                    Some(s) => versions.partition_point(|v| match cmp_tag(v, &s.version) {
                        Ordering::Less => true,
                        Ordering::Equal => !s.inclusive,
                        Ordering::Greater => false,
                    }),
                };
                let hi = match end {
                    None => versions.len(),
                    Some(e) => versions.partition_point(|v| match cmp_tag(v, &e.version) {
                        Ordering::Less => true,
                        Ordering::Equal => e.inclusive,
                        Ordering::Greater => false,
                    }),
                };
                if lo >= hi {
                    Vec::new()
                } else {
                    versions[lo..hi].iter().collect()
                }
            }
        }
    }
}

/// Sort tags ascending by their version cores.
pub fn sort_tags(tags: &mut [String]) {
    tags.sort_by(|a, b| cmp_tag(a, b).then_with(|| a.cmp(b)));
}
