use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{CutError, Metric};
use crate::graph::{DistanceMatrix, VertexId};
use crate::scalar::{Scalar, Q};

pub type VertexSet = FixedBitSet;

/// One weighted cut. `side` never contains vertex 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub side: VertexSet,
    pub weight: T,
}

impl<T> Atom<T> {
    /// `|1_S(u) - 1_S(v)|` as a boolean.
    pub fn separates(&self, u: VertexId, v: VertexId) -> bool {
        self.side.contains(u) != self.side.contains(v)
    }
}

/// A finite cut measure: positive weights on cuts of a ground set `0..n`,
/// stored once per cut `{S, complement(S)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutMeasure<T = Q> {
    n: usize,
    atoms: Vec<Atom<T>>,
    index: HashMap<VertexSet, usize>,
}

impl<T: Scalar> CutMeasure<T> {
    pub fn new(n: usize) -> Self {
        CutMeasure {
            n,
            atoms: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Adds `weight` to the cut `{side, complement}`. Sides are canonicalised
    /// to exclude vertex 0 and merged with existing atoms.
    pub fn add(&mut self, side: &VertexSet, weight: T) -> Result<(), CutError> {
        if !weight.is_positive() {
            return Err(CutError::NonPositiveWeight);
        }
        let canon = self.canonical_side(side)?;
        let count = canon.count_ones(..);
        if count == 0 || count == self.n {
            return Err(CutError::TrivialSide);
        }
        match self.index.get(&canon) {
            Some(&i) => {
                let w = self.atoms[i].weight.clone() + weight;
                self.atoms[i].weight = w;
            }
            None => {
                self.index.insert(canon.clone(), self.atoms.len());
                self.atoms.push(Atom {
                    side: canon,
                    weight,
                });
            }
        }
        Ok(())
    }

    /// Convenience wrapper around [`CutMeasure::add`] taking vertex ids.
    pub fn add_vertices(
        &mut self,
        side: impl IntoIterator<Item = VertexId>,
        weight: T,
    ) -> Result<(), CutError> {
        let mut set = FixedBitSet::with_capacity(self.n);
        for v in side {
            if v >= self.n {
                return Err(CutError::VertexOutOfRange { vertex: v, n: self.n });
            }
            set.insert(v);
        }
        self.add(&set, weight)
    }

    pub fn weight_of(&self, side: &VertexSet) -> Option<&T> {
        let canon = self.canonical_side(side).ok()?;
        self.index.get(&canon).map(|&i| &self.atoms[i].weight)
    }

    /// Copy of `side` with capacity exactly `n`, complemented if it holds 0.
    fn canonical_side(&self, side: &VertexSet) -> Result<VertexSet, CutError> {
        let mut canon = FixedBitSet::with_capacity(self.n);
        for v in side.ones() {
            if v >= self.n {
                return Err(CutError::VertexOutOfRange { vertex: v, n: self.n });
            }
            canon.insert(v);
        }
        if canon.contains(0) {
            canon.toggle_range(..);
        }
        Ok(canon)
    }

    pub fn total_mass(&self) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    /// `sum_S mu(S) |1_S(u) - 1_S(v)|`.
    pub fn cut_distance(&self, u: VertexId, v: VertexId) -> T {
        self.atoms
            .iter()
            .filter(|a| a.separates(u, v))
            .fold(T::zero(), |acc, a| acc + a.weight.clone())
    }

    pub fn distance_matrix(&self) -> DistanceMatrix<T> {
        self.to_matrix()
    }

    /// `mu^{x|y}`: the atoms separating `x` from `y`, weights unchanged.
    pub fn separation_measure(&self, x: VertexId, y: VertexId) -> CutMeasure<T> {
        let mut out = CutMeasure::new(self.n);
        for a in self.atoms.iter().filter(|a| a.separates(x, y)) {
            out.index.insert(a.side.clone(), out.atoms.len());
            out.atoms.push(a.clone());
        }
        out
    }

    /// Keeps the atoms satisfying `keep`.
    pub fn filter(&self, keep: impl Fn(&Atom<T>) -> bool) -> CutMeasure<T> {
        let mut out = CutMeasure::new(self.n);
        for a in self.atoms.iter().filter(|a| keep(a)) {
            out.index.insert(a.side.clone(), out.atoms.len());
            out.atoms.push(a.clone());
        }
        out
    }

    pub fn scaled(&self, factor: &T) -> CutMeasure<T> {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight = a.weight.clone() * factor.clone();
        }
        out
    }

    pub fn to_f64(&self) -> CutMeasure<f64> {
        let mut out = CutMeasure::new(self.n);
        for a in &self.atoms {
            out.index.insert(a.side.clone(), out.atoms.len());
            out.atoms.push(Atom {
                side: a.side.clone(),
                weight: a.weight.to_f64(),
            });
        }
        out
    }

    /// Explicit finite-dimensional L1 realisation: one coordinate per atom,
    /// `x_j(v) = weight_j * 1_{S_j}(v)`.
    pub fn to_coordinates(&self) -> Embedding<T> {
        let coords = (0..self.n)
            .map(|v| {
                self.atoms
                    .iter()
                    .map(|a| {
                        if a.side.contains(v) {
                            a.weight.clone()
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Embedding { coords }
    }
}

impl<T: Scalar> Metric<T> for CutMeasure<T> {
    fn point_count(&self) -> usize {
        self.n
    }

    fn dist(&self, u: VertexId, v: VertexId) -> T {
        self.cut_distance(u, v)
    }
}

/// Per-vertex coordinate vectors in L1.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding<T = Q> {
    pub coords: Vec<Vec<T>>,
}

impl<T: Scalar> Embedding<T> {
    pub fn dimension(&self) -> usize {
        self.coords.first().map_or(0, Vec::len)
    }

    pub fn l1_distance(&self, u: VertexId, v: VertexId) -> T {
        self.coords[u]
            .iter()
            .zip(&self.coords[v])
            .fold(T::zero(), |acc, (a, b)| acc + a.abs_diff(b))
    }
}

impl<T: Scalar> Metric<T> for Embedding<T> {
    fn point_count(&self) -> usize {
        self.coords.len()
    }

    fn dist(&self, u: VertexId, v: VertexId) -> T {
        self.l1_distance(u, v)
    }
}

/// Lower-case hexadecimal of the bitset read as an integer (bit `i` is vertex
/// `i`), without leading zeros.
pub fn bitset_to_hex(set: &VertexSet) -> String {
    let top = match set.ones().next_back() {
        Some(t) => t,
        None => return "0".into(),
    };
    let digits = top / 4 + 1;
    (0..digits)
        .rev()
        .map(|d| {
            let nibble = (0..4).fold(0u32, |acc, b| {
                acc | ((set.contains(d * 4 + b) as u32) << b)
            });
            char::from_digit(nibble, 16).expect("nibble")
        })
        .collect()
}

pub fn bitset_from_hex(text: &str, n: usize) -> Result<VertexSet, CutError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CutError::BadBitset("empty".into()));
    }
    let mut set = FixedBitSet::with_capacity(n);
    for (d, ch) in text.chars().rev().enumerate() {
        let nibble = ch
            .to_digit(16)
            .ok_or_else(|| CutError::BadBitset(format!("bad digit `{ch}` in `{text}`")))?;
        for b in 0..4 {
            if nibble & (1 << b) != 0 {
                let v = d * 4 + b;
                if v >= n {
                    return Err(CutError::VertexOutOfRange { vertex: v, n });
                }
                set.insert(v);
            }
        }
    }
    Ok(set)
}
