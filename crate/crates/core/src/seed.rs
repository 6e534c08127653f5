//! Deterministic seed derivation.
//!
//! Every random stream in the crate is seeded from a master seed and a key
//! (a list of 64-bit words naming a copy, vertex or sample). The algorithm is
//! SplitMix64 chaining so other implementations can reproduce it:
//!
//! ```text
//! h = mix(master)
//! for w in key: h = mix(h ^ w)
//! mix(z): z += 0x9E3779B97F4A7C15
//!         z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!         z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!         return z ^ (z >> 31)
//! ```
//!
//! All arithmetic wraps modulo 2^64. Key layouts:
//!
//! * copy `path`: `[1, len(path), path...]`
//! * vertex address: `[2, 0]` for s, `[2, 1]` for t,
//!   `[2, 2, len(path), path..., vertex]` for inner vertices
//! * sample `i`: `[3, i]`

use crate::graph::VertexAddress;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, key: &[u64]) -> u64 {
    key.iter()
        .fold(splitmix64(master), |h, &w| splitmix64(h ^ w))
}

/// Stream seed for the base-cut draw of the copy selected by `path`.
pub fn copy_seed(master: u64, path: &[u32]) -> u64 {
    let mut key = Vec::with_capacity(path.len() + 2);
    key.push(1);
    key.push(path.len() as u64);
    key.extend(path.iter().map(|&e| e as u64));
    derive_seed(master, &key)
}

pub fn vertex_seed(master: u64, address: &VertexAddress) -> u64 {
    let key = match address {
        VertexAddress::S => vec![2, 0],
        VertexAddress::T => vec![2, 1],
        VertexAddress::Inner { path, vertex } => {
            let mut key = vec![2, 2, path.len() as u64];
            key.extend(path.iter().map(|&e| e as u64));
            key.push(*vertex as u64);
            key
        }
    };
    derive_seed(master, &key)
}

/// Master seed of the `index`-th independent sample in a batch.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, &[3, index])
}
