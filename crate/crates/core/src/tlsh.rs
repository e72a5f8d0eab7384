//! Trend Micro Locality Sensitive Hash (TLSH), 128-bucket / 1-byte checksum
//! variant.
//!
//! The digest is the 35-byte body rendered as 70 upper-case hex characters
//! (the `T1` version prefix of the reference tool is not part of it).
//! Inputs shorter than [`MIN_DATA_LENGTH`] bytes, or with too little byte
//! variety to fill at least half of the effective buckets, have no digest.

use std::fmt;

pub const MIN_DATA_LENGTH: usize = 50;

const BUCKETS: usize = 256;
const EFF_BUCKETS: usize = 128;
const CODE_SIZE: usize = 32;
const WINDOW: usize = 5;

/// Length of the hex rendering.
pub const HEX_LEN: usize = 2 * (3 + CODE_SIZE);

const PEARSON: [u8; 256] = [
    0x01, 0x57, 0x31, 0x0c, 0xb0, 0xb2, 0x66, 0xa6, 0x79, 0xc1, 0x06, 0x54, 0xf9, 0xe6, 0x2c, 0xa3,
    0x0e, 0xc5, 0xd5, 0xb5, 0xa1, 0x55, 0xda, 0x50, 0x40, 0xef, 0x18, 0xe2, 0xec, 0x8e, 0x26, 0xc8,
    0x6e, 0xb1, 0x68, 0x67, 0x8d, 0xfd, 0xff, 0x32, 0x4d, 0x65, 0x51, 0x12, 0x2d, 0x60, 0x1f, 0xde,
    0x19, 0x6b, 0xbe, 0x46, 0x56, 0xed, 0xf0, 0x22, 0x48, 0xf2, 0x14, 0xd6, 0xf4, 0xe3, 0x95, 0xeb,
    0x61, 0xea, 0x39, 0x16, 0x3c, 0xfa, 0x52, 0xaf, 0xd0, 0x05, 0x7f, 0xc7, 0x6f, 0x3e, 0x87, 0xf8,
    0xae, 0xa9, 0xd3, 0x3a, 0x42, 0x9a, 0x6a, 0xc3, 0xf5, 0xab, 0x11, 0xbb, 0xb6, 0xb3, 0x00, 0xf3,
    0x84, 0x38, 0x94, 0x4b, 0x80, 0x85, 0x9e, 0x64, 0x82, 0x7e, 0x5b, 0x0d, 0x99, 0xf6, 0xd8, 0xdb,
    0x77, 0x44, 0xdf, 0x4e, 0x53, 0x58, 0xc9, 0x63, 0x7a, 0x0b, 0x5c, 0x20, 0x88, 0x72, 0x34, 0x0a,
    0x8a, 0x1e, 0x30, 0xb7, 0x9c, 0x23, 0x3d, 0x1a, 0x8f, 0x4a, 0xfb, 0x5e, 0x81, 0xa2, 0x3f, 0x98,
    0xaa, 0x07, 0x73, 0xa7, 0xf1, 0xce, 0x03, 0x96, 0x37, 0x3b, 0x97, 0xdc, 0x5a, 0x35, 0x17, 0x83,
    0x7d, 0xad, 0x0f, 0xee, 0x4f, 0x5f, 0x59, 0x10, 0x69, 0x89, 0xe1, 0xe0, 0xd9, 0xa0, 0x25, 0x7b,
    0x76, 0x49, 0x02, 0x9d, 0x2e, 0x74, 0x09, 0x91, 0x86, 0xe4, 0xcf, 0xd4, 0xca, 0xd7, 0x45, 0xe5,
    0x1b, 0xbc, 0x43, 0x7c, 0xa8, 0xfc, 0x2a, 0x04, 0x1d, 0x6c, 0x15, 0xf7, 0x13, 0xcd, 0x27, 0xcb,
    0xe9, 0x28, 0xba, 0x93, 0xc6, 0xc0, 0x9b, 0x21, 0xa4, 0xbf, 0x62, 0xcc, 0xa5, 0xb4, 0x75, 0x4c,
    0x8c, 0x24, 0xd2, 0xac, 0x29, 0x36, 0x9f, 0x08, 0xb9, 0xe8, 0x71, 0xc4, 0xe7, 0x2f, 0x92, 0x78,
    0x33, 0x41, 0x1c, 0x90, 0xfe, 0xdd, 0x5d, 0xbd, 0xc2, 0x8b, 0x70, 0x2b, 0x47, 0x6d, 0xb8, 0xd1,
];

#[inline]
fn b_mapping(salt: u8, i: u8, j: u8, k: u8) -> u8 {
    let mut h = PEARSON[salt as usize];
    h = PEARSON[(h ^ i) as usize];
    h = PEARSON[(h ^ j) as usize];
    PEARSON[(h ^ k) as usize]
}

/// A decoded TLSH digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tlsh {
    checksum: u8,
    lvalue: u8,
    q1_ratio: u8,
    q2_ratio: u8,
    code: [u8; CODE_SIZE],
}

impl Tlsh {
    /// Hash `data`, or `None` when the input is too short or too uniform.
    pub fn from_data(data: &[u8]) -> Option<Self> {
        if data.len() < MIN_DATA_LENGTH {
            return None;
        }
        let mut buckets = [0u32; BUCKETS];
        let mut window = [0u8; WINDOW];
        let mut checksum = 0u8;
        for (fed, &byte) in data.iter().enumerate() {
            let j = fed % WINDOW;
            window[j] = byte;
            if fed < 4 {
                continue;
            }
            let back = |n: usize| window[(j + WINDOW - n) % WINDOW];
            let (w0, w1, w2, w3, w4) = (byte, back(1), back(2), back(3), back(4));
            checksum = b_mapping(0, w0, w1, checksum);
            buckets[b_mapping(2, w0, w1, w2) as usize] += 1;
            buckets[b_mapping(3, w0, w1, w3) as usize] += 1;
            buckets[b_mapping(5, w0, w2, w3) as usize] += 1;
            buckets[b_mapping(7, w0, w2, w4) as usize] += 1;
            buckets[b_mapping(11, w0, w1, w4) as usize] += 1;
            buckets[b_mapping(13, w0, w3, w4) as usize] += 1;
        }

        let effective = &buckets[..EFF_BUCKETS];
        let mut sorted = effective.to_vec();
        sorted.sort_unstable();
        let q1 = sorted[EFF_BUCKETS / 4 - 1];
        let q2 = sorted[EFF_BUCKETS / 2 - 1];
        let q3 = sorted[3 * EFF_BUCKETS / 4 - 1];

        let nonzero = effective.iter().filter(|&&c| c > 0).count();
        if nonzero <= 4 * CODE_SIZE / 2 {
            return None;
        }

        let mut code = [0u8; CODE_SIZE];
        for (i, slot) in code.iter_mut().enumerate() {
            let mut h = 0u8;
            for j in 0..4 {
                let k = effective[4 * i + j];
                let v = if q3 < k {
                    3
                } else if q2 < k {
                    2
                } else if q1 < k {
                    1
                } else {
                    0
                };
                h |= v << (j * 2);
            }
            *slot = h;
        }

        let ratio = |q: u32| (((q as f32 * 100.0) / q3 as f32) as u32 % 16) as u8;
        Some(Tlsh {
            checksum,
            lvalue: l_capturing(data.len()),
            q1_ratio: ratio(q1),
            q2_ratio: ratio(q2),
            code,
        })
    }

    /// Parse the 70-character hex body (an optional `T1` prefix is accepted).
    pub fn from_hex(hex: &str) -> Option<Self> {
        let hex = hex.strip_prefix("T1").unwrap_or(hex);
        if hex.len() != HEX_LEN || !hex.is_ascii() {
            return None;
        }
        let mut bytes = [0u8; HEX_LEN / 2];
        for (i, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).ok()?;
        }
        let swap = |b: u8| b.rotate_left(4);
        let qr = swap(bytes[2]);
        let mut code = [0u8; CODE_SIZE];
        for i in 0..CODE_SIZE {
            code[i] = bytes[3 + CODE_SIZE - 1 - i];
        }
        Some(Tlsh {
            checksum: swap(bytes[0]),
            lvalue: swap(bytes[1]),
            q1_ratio: qr & 0x0f,
            q2_ratio: qr >> 4,
            code,
        })
    }

    pub fn to_hex(&self) -> String {
        let swap = |b: u8| b.rotate_left(4);
        let mut out = String::with_capacity(HEX_LEN);
        let mut push = |b: u8| out.push_str(&format!("{b:02X}"));
        push(swap(self.checksum));
        push(swap(self.lvalue));
        push(swap(self.q1_ratio | (self.q2_ratio << 4)));
        for i in (0..CODE_SIZE).rev() {
            push(self.code[i]);
        }
        out
    }

    /// Reference TLSH distance, including the length component.
    pub fn diff(&self, other: &Tlsh) -> u32 {
        let mut diff = 0u32;

        let ldiff = mod_diff(self.lvalue as u32, other.lvalue as u32, 256);
        diff += match ldiff {
            0 => 0,
            1 => 1,
            d => d * 12,
        };

        for (a, b) in [
            (self.q1_ratio, other.q1_ratio),
            (self.q2_ratio, other.q2_ratio),
        ] {
            let q = mod_diff(a as u32, b as u32, 16);
            diff += if q <= 1 { q } else { (q - 1) * 12 };
        }

        if self.checksum != other.checksum {
            diff += 1;
        }

        diff + self
            .code
            .iter()
            .zip(other.code.iter())
            .map(|(&x, &y)| byte_distance(x, y))
            .sum::<u32>()
    }
}

impl fmt::Debug for Tlsh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tlsh({})", self.to_hex())
    }
}

fn mod_diff(x: u32, y: u32, range: u32) -> u32 {
    let (dl, dr) = if y > x {
        (y - x, x + range - y)
    } else {
        (x - y, y + range - x)
    };
    dl.min(dr)
}

fn byte_distance(x: u8, y: u8) -> u32 {
    (0..4)
        .map(|j| {
            let a = (x >> (2 * j)) & 3;
            let b = (y >> (2 * j)) & 3;
            match a.abs_diff(b) {
                3 => 6,
                d => d as u32,
            }
        })
        .sum()
}

fn l_capturing(len: usize) -> u8 {
    const LOG_1_5: f64 = 0.405_465_1;
    const LOG_1_3: f64 = 0.262_364_26;
    const LOG_1_1: f64 = 0.095_310_180;
    let l = (len as f32).ln() as f64;
    let i = if len <= 656 {
        (l / LOG_1_5).floor()
    } else if len <= 3199 {
        (l / LOG_1_3 - 8.72777).floor()
    } else {
        (l / LOG_1_1 - 62.5472).floor()
    };
    (i as i64 & 0xff) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_input_has_no_digest() {
        assert!(Tlsh::from_data(&[b'a'; 49]).is_none());
    }

    #[test]
    fn uniform_input_has_no_digest() {
        assert!(Tlsh::from_data(&[b'a'; 4096]).is_none());
    }

    #[test]
    fn hex_round_trip() {
        let data: Vec<u8> = (0..2000u32).map(|i| (i * 7 % 251) as u8 ^ (i >> 3) as u8).collect();
        let h = Tlsh::from_data(&data).unwrap();
        let hex = h.to_hex();
        assert_eq!(hex.len(), HEX_LEN);
        assert_eq!(Tlsh::from_hex(&hex), Some(h));
        assert_eq!(Tlsh::from_hex(&format!("T1{hex}")), Some(h));
        assert_eq!(h.diff(&h), 0);
    }

    #[test]
    fn bad_hex_is_rejected() {
        assert!(Tlsh::from_hex("").is_none());
        assert!(Tlsh::from_hex(&"Z".repeat(HEX_LEN)).is_none());
    }

    #[test]
    fn byte_distance_penalizes_opposite_quartiles() {
        assert_eq!(byte_distance(0b00, 0b11), 6);
        assert_eq!(byte_distance(0b01, 0b10), 1);
        assert_eq!(byte_distance(0xff, 0xff), 0);
    }
}
