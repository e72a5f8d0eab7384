//! Version-tag ordering.
//!
//! Tags are split on `.`, `-` and `_` (and on digit/letter boundaries);
//! numeric segments compare numerically, others lexically, and a numeric
//! segment sorts after an alphanumeric one. A common textual prefix such as
//! `v` or `wireshark-` is compared like any other segment.

use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment<'a> {
    Num(u64, &'a str),
    Text(&'a str),
}

fn segments(tag: &str) -> Vec<Segment<'_>> {
    let mut out = Vec::new();
    for part in tag.split(['.', '-', '_']).filter(|p| !p.is_empty()) {
        let bytes = part.as_bytes();
        let mut start = 0;
        while start < bytes.len() {
            let digit = bytes[start].is_ascii_digit();
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() == digit {
                end += 1;
            }
            let s = &part[start..end];
            out.push(match s.parse::<u64>() {
                Ok(n) if digit => Segment::Num(n, s),
                _ => Segment::Text(s),
            });
            start = end;
        }
    }
    out
}

fn cmp_segment(a: &Segment<'_>, b: &Segment<'_>) -> Ordering {
    match (a, b) {
        (Segment::Num(x, xs), Segment::Num(y, ys)) => x.cmp(y).then_with(|| xs.len().cmp(&ys.len())),
        (Segment::Text(x), Segment::Text(y)) => x.cmp(y),
        (Segment::Num(..), Segment::Text(_)) => Ordering::Greater,
        (Segment::Text(_), Segment::Num(..)) => Ordering::Less,
    }
}

/// Order by segments alone, so `7_64_0` and `7.64.0` are equal.
pub fn compare_segments(a: &str, b: &str) -> Ordering {
    let (sa, sb) = (segments(a), segments(b));
    for (x, y) in sa.iter().zip(sb.iter()) {
        let o = cmp_segment(x, y);
        if o != Ordering::Equal {
            return o;
        }
    }
    sa.len().cmp(&sb.len())
}

/// Total order over version tags.
pub fn compare_versions(a: &str, b: &str) -> Ordering {
    compare_segments(a, b).then_with(|| a.cmp(b))
}

pub fn sort_versions<S: AsRef<str>>(versions: &mut [S]) {
    versions.sort_by(|a, b| compare_versions(a.as_ref(), b.as_ref()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn numeric_segments_compare_numerically() {
        assert_eq!(compare_versions("1.8.10", "1.8.9"), Ordering::Greater);
        assert_eq!(compare_versions("1.8", "1.8.0"), Ordering::Less);
        assert_eq!(compare_versions("v2.1.0", "v10.0"), Ordering::Less);
        assert_eq!(compare_versions("wireshark-1.8.7", "wireshark-1.8.8"), Ordering::Less);
        assert_eq!(compare_versions("1.2.11", "1.2.11"), Ordering::Equal);
    }

    #[test]
    fn alphanumeric_segments() {
        assert_eq!(compare_versions("1.0rc1", "1.0"), Ordering::Greater);
        assert_eq!(compare_versions("1.0a", "1.0b"), Ordering::Less);
    }

    #[test]
    fn sorting() {
        let mut v = vec!["1.10", "1.2", "1.9.1", "0.9"];
        sort_versions(&mut v);
        assert_eq!(v, vec!["0.9", "1.2", "1.9.1", "1.10"]);
    }

    proptest! {
        #[test]
        fn order_is_total_and_consistent(a in "[0-9a-c.\\-]{0,8}", b in "[0-9a-c.\\-]{0,8}", c in "[0-9a-c.\\-]{0,8}") {
            prop_assert_eq!(compare_versions(&a, &b), compare_versions(&b, &a).reverse());
            prop_assert_eq!(compare_versions(&a, &b) == Ordering::Equal, a == b);
            if compare_versions(&a, &b) != Ordering::Greater && compare_versions(&b, &c) != Ordering::Greater {
                prop_assert_ne!(compare_versions(&a, &c), Ordering::Greater);
            }
        }
    }
}
