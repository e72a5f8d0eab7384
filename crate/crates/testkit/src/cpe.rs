//! Random CPE applicability instances with a numeric description of each
//! constraint, for checking resolution against direct containment.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vulture::clients::{Advisory, CpeMatch};

pub const PRODUCT: &str = "zlib";

/// A version as plain numbers; `Vec` ordering is the reference order.
pub type Num = Vec<u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Exact(Num),
    Range { start: Option<(Num, bool)>, end: Option<(Num, bool)> },
    /// Another product, or a non-vulnerable entry: matches nothing here.
    Ignored,
}

#[derive(Debug, Clone)]
pub struct Instance {
    /// Ascending, paired with the tag strings.
    pub versions: Vec<Num>,
    pub tags: Vec<String>,
    pub shapes: Vec<Shape>,
    pub advisory: Advisory,
}

fn dotted(v: &Num) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(".")
}

fn random_num(rng: &mut ChaCha8Rng) -> Num {
    let len = rng.gen_range(1..=3);
    (0..len).map(|_| rng.gen_range(0..6)).collect()
}

fn criteria(product: &str, version: &str) -> String {
    format!("cpe:2.3:a:{product}:{product}:{version}:*:*:*:*:*:*:*")
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut versions: Vec<Num> = (0..rng.gen_range(1..=12)).map(|_| random_num(&mut rng)).collect();
    versions.sort();
    versions.dedup();
    let (prefix, sep) = *[("", "."), ("v", "."), ("zlib-", "."), ("rel_", "_")].choose(&mut rng).unwrap();
    let tags = versions
        .iter()
        .map(|v| format!("{prefix}{}", v.iter().map(u32::to_string).collect::<Vec<_>>().join(sep)))
        .collect();

    let pick = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.7) { versions.choose(rng).unwrap().clone() } else { random_num(rng) };
    let mut shapes = Vec::new();
    let mut cpe = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        match rng.gen_range(0..10) {
            0..=3 => {
                let v = pick(&mut rng);
                cpe.push(CpeMatch::new(criteria(PRODUCT, &dotted(&v))));
                shapes.push(Shape::Exact(v));
            }
            4..=8 => {
                let mut m = CpeMatch::new(criteria(PRODUCT, "*"));
                let start = rng.gen_bool(0.6).then(|| (pick(&mut rng), rng.gen_bool(0.5)));
                let end = rng.gen_bool(0.7).then(|| (pick(&mut rng), rng.gen_bool(0.5)));
                if let Some((v, inc)) = &start {
                    *if *inc { &mut m.version_start_including } else { &mut m.version_start_excluding } = Some(dotted(v));
                }
                if let Some((v, inc)) = &end {
                    *if *inc { &mut m.version_end_including } else { &mut m.version_end_excluding } = Some(dotted(v));
                }
                cpe.push(m);
                shapes.push(Shape::Range { start, end });
            }
            _ => {
                let v = dotted(&pick(&mut rng));
                let mut m = if rng.gen_bool(0.5) { CpeMatch::new(criteria("libpng", &v)) } else { CpeMatch::new(criteria(PRODUCT, &v)) };
                if m.criteria.contains(PRODUCT) {
                    m.vulnerable = false;
                }
                cpe.push(m);
                shapes.push(Shape::Ignored);
            }
        }
    }
    let advisory = Advisory {
        id: format!("CVE-2099-{:05}", seed),
        description: "Heap overflow in inflate.".into(),
        cpe,
        references: Vec::new(),
        fixed_version: None,
    };
    Instance { versions, tags, shapes, advisory }
}
