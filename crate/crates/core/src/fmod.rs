//! Absolutely Q-graded, relatively Z-graded modules over F₂[U].
//!
//! A module is a direct sum of towers `T⁺_d = F[U,U⁻¹]/U·F[U]` and truncated
//! towers `τ_d(N)`. `d` is always the grading of the element killed by `U`,
//! and `U` lowers grading by two. Finite-dimensional modules are carried
//! concretely by [`FiniteUPresentation`]; [`GradedModule`] is the decomposed
//! form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::f2::{Echelon, F2Matrix, F2Vec};
use crate::rational::{format_rational, int, parse_rational, to_i64, Rational};

/// Homological degree. Exact rational.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Grading(Rational);

impl Grading {
    pub fn new(value: Rational) -> Self {
        Self(value)
    }

    pub fn zero() -> Self {
        Self(Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self(int(n))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_value(self) -> Rational {
        self.0
    }

    /// `self + n`.
    pub fn shifted(&self, n: i64) -> Self {
        Self(&self.0 + int(n))
    }

    /// `self - other` when it is an integer.
    pub fn int_offset_from(&self, other: &Grading) -> Option<i64> {
        to_i64(&(&self.0 - &other.0))
    }
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grading({self})")
    }
}

impl FromStr for Grading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Grading)
    }
}

impl From<Rational> for Grading {
    fn from(r: Rational) -> Self {
        Self(r)
    }
}

impl Serialize for Grading {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::rational::serde_str::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Grading {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::rational::serde_str::deserialize(d).map(Grading)
    }
}

/// Z/2 grading. Towers sit in `Even`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_offset(offset: i64) -> Self {
        if offset.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

impl TryFrom<u8> for Parity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Parity::Even),
            1 => Ok(Parity::Odd),
            _ => Err(format!("parity must be 0 or 1, got {v}")),
        }
    }
}

impl From<Parity> for u8 {
    fn from(p: Parity) -> u8 {
        match p {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FmodError {
    #[error("U maps generator {from} (grading {from_grading}) to generator {to} (grading {to_grading}); U must lower grading by 2")]
    NonHomogeneousU { from: usize, to: usize, from_grading: Grading, to_grading: Grading },
    #[error("U is not nilpotent")]
    NotNilpotent,
    #[error("parity mismatch: {0}")]
    ParityMismatch(String),
    #[error("Euler characteristic of a module with towers is undefined")]
    InfiniteModule,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// `T⁺_d`, recorded by the grading of its bottom element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tower {
    pub bottom: Grading,
}

/// `τ_d(N)`: `N` elements at gradings `d, d+2, …, d+2(N-1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bar {
    pub bottom: Grading,
    pub length: usize,
    pub parity: Parity,
}

impl Bar {
    pub fn new(bottom: Grading, length: usize, parity: Parity) -> Self {
        assert!(length > 0, "empty bar");
        Self { bottom, length, parity }
    }

    pub fn top(&self) -> Grading {
        self.bottom.shifted(2 * (self.length as i64 - 1))
    }
}

/// Finite sum of towers and bars.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedModule {
    pub towers: Vec<Tower>,
    pub bars: Vec<Bar>,
}

impl GradedModule {
    pub fn new(towers: Vec<Tower>, bars: Vec<Bar>) -> Result<Self, FmodError> {
        let m = Self { towers, bars };
        m.check()?;
        Ok(m)
    }

    pub fn zero() -> Self {
        Self { towers: Vec::new(), bars: Vec::new() }
    }

    fn check(&self) -> Result<(), FmodError> {
        if let Some(anchor) = self.towers.first() {
            for t in &self.towers[1..] {
                match t.bottom.int_offset_from(&anchor.bottom) {
                    Some(off) if off % 2 == 0 => {}
                    _ => {
                        return Err(FmodError::ParityMismatch(format!(
                            "tower bottoms {} and {} do not differ by an even integer",
                            t.bottom, anchor.bottom
                        )))
                    }
                }
            }
            for b in &self.bars {
                if let Some(off) = b.bottom.int_offset_from(&anchor.bottom) {
                    if Parity::of_offset(off) != b.parity {
                        return Err(FmodError::ParityMismatch(format!(
                            "bar at {} declared {:?} but sits at offset {off} from the tower",
                            b.bottom, b.parity
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Total dimension of the bars.
    pub fn reduced_dim(&self) -> usize {
        self.bars.iter().map(|b| b.length).sum()
    }

    /// `(even, odd)` dimensions of the bars.
    pub fn parity_dims(&self) -> (usize, usize) {
        self.bars.iter().fold((0, 0), |(e, o), b| match b.parity {
            Parity::Even => (e + b.length, o),
            Parity::Odd => (e, o + b.length),
        })
    }

    pub fn euler_z2(&self) -> Result<i64, FmodError> {
        if !self.towers.is_empty() {
            return Err(FmodError::InfiniteModule);
        }
        let (e, o) = self.parity_dims();
        Ok(e as i64 - o as i64)
    }

    /// Identical multisets of towers and bars.
    pub fn iso_check(&self, other: &GradedModule) -> bool {
        let (mut t1, mut t2) = (self.towers.clone(), other.towers.clone());
        let (mut b1, mut b2) = (self.bars.clone(), other.bars.clone());
        t1.sort();
        t2.sort();
        b1.sort();
        b2.sort();
        t1 == t2 && b1 == b2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(default)]
    pub label: String,
    pub grading: Grading,
    pub parity: Parity,
}

impl Generator {
    pub fn new(label: impl Into<String>, grading: Grading, parity: Parity) -> Self {
        Self { label: label.into(), grading, parity }
    }
}

/// A finite-dimensional graded F₂[U]-module given by a basis and the matrix
/// of `U` in that basis (column `j` is `U` applied to generator `j`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteUPresentation {
    basis: Vec<Generator>,
    u: F2Matrix,
}

impl FiniteUPresentation {
    pub fn new(basis: Vec<Generator>, u: F2Matrix) -> Result<Self, FmodError> {
        if u.rows() != basis.len() || u.cols() != basis.len() {
            return Err(FmodError::DimensionMismatch(format!(
                "{} generators but U is {}x{}",
                basis.len(),
                u.rows(),
                u.cols()
            )));
        }
        Ok(Self { basis, u })
    }

    pub fn zero() -> Self {
        Self { basis: Vec::new(), u: F2Matrix::zeros(0, 0) }
    }

    /// Concrete realization of a sum of bars, one chain per bar.
    pub fn from_bars(bars: &[Bar]) -> Self {
        let mut basis = Vec::new();
        let mut links = Vec::new();
        for (b, bar) in bars.iter().enumerate() {
            let start = basis.len();
            for j in 0..bar.length {
                basis.push(Generator::new(
                    format!("b{b}.{j}"),
                    bar.bottom.shifted(2 * j as i64),
                    bar.parity,
                ));
                if j > 0 {
                    links.push((start + j, start + j - 1));
                }
            }
        }
        let mut u = F2Matrix::zeros(basis.len(), basis.len());
        for (from, to) in links {
            u.set(to, from, true);
        }
        Self { basis, u }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Generator] {
        &self.basis
    }

    pub fn u_matrix(&self) -> &F2Matrix {
        &self.u
    }

    /// Checks nilpotency, degree −2 homogeneity of `U`, and that parities
    /// agree with integral grading differences. All violations are reported.
    pub fn validate(&self) -> Result<(), Vec<FmodError>> {
        let mut errors = Vec::new();
        if !self.is_nilpotent() {
            errors.push(FmodError::NotNilpotent);
        }
        for c in 0..self.dim() {
            for r in 0..self.dim() {
                if self.u.get(r, c) && self.basis[r].grading != self.basis[c].grading.shifted(-2) {
                    errors.push(FmodError::NonHomogeneousU {
                        from: c,
                        to: r,
                        from_grading: self.basis[c].grading.clone(),
                        to_grading: self.basis[r].grading.clone(),
                    });
                }
            }
        }
        errors.extend(self.parity_errors(None));
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Like [`validate`](Self::validate), additionally pinning parities to
    /// `(grading − anchor) mod 2` for generators at integral offset from `anchor`.
    pub fn validate_with_anchor(&self, anchor: &Grading) -> Result<(), Vec<FmodError>> {
        let mut errors = match self.validate() {
            Ok(()) => Vec::new(),
            Err(e) => e,
        };
        errors.extend(self.parity_errors(Some(anchor)));
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    fn parity_errors(&self, anchor: Option<&Grading>) -> Vec<FmodError> {
        let mut errors = Vec::new();
        match anchor {
            Some(a) => {
                for (i, g) in self.basis.iter().enumerate() {
                    if let Some(off) = g.grading.int_offset_from(a) {
                        if Parity::of_offset(off) != g.parity {
                            errors.push(FmodError::ParityMismatch(format!(
                                "generator {i} at grading {} has parity {:?}, expected {:?} relative to {a}",
                                g.grading,
                                g.parity,
                                Parity::of_offset(off)
                            )));
                        }
                    }
                }
            }
            None => {
                for i in 0..self.dim() {
                    for j in i + 1..self.dim() {
                        let (a, b) = (&self.basis[i], &self.basis[j]);
                        if let Some(off) = a.grading.int_offset_from(&b.grading) {
                            if (Parity::of_offset(off) == Parity::Even) != (a.parity == b.parity) {
                                errors.push(FmodError::ParityMismatch(format!(
                                    "generators {i} and {j} differ in grading by {off} but have parities {:?}, {:?}",
                                    a.parity, b.parity
                                )));
                            }
                        }
                    }
                }
            }
        }
        errors
    }

    fn is_nilpotent(&self) -> bool {
        let n = self.dim();
        if n == 0 {
            return true;
        }
        // Repeated squaring: U^(2^k) with 2^k >= n.
        let mut p = self.u.clone();
        let mut reach = 1;
        while reach < n {
            p = p.mul(&p);
            reach *= 2;
        }
        p.is_zero()
    }

    /// (dim of parity-0 part) − (dim of parity-1 part).
    pub fn euler_z2(&self) -> i64 {
        self.basis.iter().map(|g| g.parity.sign()).sum()
    }

    /// `(even, odd)` dimensions.
    pub fn parity_dims(&self) -> (usize, usize) {
        let odd = self.basis.iter().filter(|g| g.parity == Parity::Odd).count();
        (self.dim() - odd, odd)
    }

    /// Decomposition into truncated towers.
    ///
    /// Gradings are swept from the top down. At each grading the images of
    /// the surviving chains are reduced oldest-first; a chain whose image
    /// becomes dependent on older chains ends there. Generators not in the
    /// span of the incoming images open new chains. Assumes a valid module.
    pub fn barcode(&self) -> Vec<Bar> {
        let n = self.dim();
        let mut by_grading: BTreeMap<Grading, Vec<usize>> = BTreeMap::new();
        for (i, g) in self.basis.iter().enumerate() {
            by_grading.entry(g.grading.clone()).or_default().push(i);
        }

        struct Chain {
            top: Grading,
            parity: Parity,
            vec: F2Vec,
        }

        let mut bars = Vec::new();
        let mut carried: BTreeMap<Grading, Vec<Chain>> = BTreeMap::new();
        for (grading, members) in by_grading.iter().rev() {
            let mut echelon = Echelon::new(n);
            let mut alive = Vec::new();
            for chain in carried.remove(grading).unwrap_or_default() {
                if echelon.insert(chain.vec.clone()) {
                    alive.push(chain);
                } else {
                    bars.push(close(chain.top, grading.shifted(2), chain.parity));
                }
            }
            for &i in members {
                let e = F2Vec::unit(n, i);
                if echelon.insert(e.clone()) {
                    alive.push(Chain { top: grading.clone(), parity: self.basis[i].parity, vec: e });
                }
            }
            let below = grading.shifted(-2);
            let has_below = by_grading.contains_key(&below);
            for chain in alive {
                let image = self.u.mul_vec(&chain.vec);
                if has_below {
                    carried.entry(below.clone()).or_default().push(Chain { vec: image, ..chain });
                } else {
                    debug_assert!(image.is_zero(), "U leaves the graded support");
                    bars.push(close(chain.top, grading.clone(), chain.parity));
                }
            }
        }
        debug_assert!(carried.is_empty());
        bars.sort();
        bars
    }

    /// `rank(U^j)` for `j = 0..=dim`.
    pub fn rank_profile(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        let mut p = F2Matrix::identity(self.dim());
        for _ in 0..=self.dim() {
            out.push(p.rank());
            p = p.mul(&self.u);
        }
        out
    }

    /// Re-expresses the module in a new basis: column `j` of `change` gives
    /// new generator `j` in old coordinates. `change` must be invertible and
    /// grading-preserving; the caller supplies the new generator metadata.
    pub fn change_basis(&self, change: &F2Matrix, basis: Vec<Generator>) -> Option<Self> {
        let inv = change.inverse()?;
        let u = inv.mul(&self.u).mul(change);
        Self::new(basis, u).ok()
    }

    pub fn as_graded_module(&self) -> GradedModule {
        GradedModule { towers: Vec::new(), bars: self.barcode() }
    }
}

fn close(top: Grading, bottom: Grading, parity: Parity) -> Bar {
    let span = top.int_offset_from(&bottom).expect("chain spans integral gradings");
    debug_assert!(span >= 0 && span % 2 == 0);
    Bar::new(bottom, (span / 2 + 1) as usize, parity)
}

/// `Σ_i max(N_i − j, 0)` for `j = 0..=max_len`: the rank profile a bar multiset forces.
pub fn bar_rank_profile(bars: &[Bar], upto: usize) -> Vec<usize> {
    (0..=upto)
        .map(|j| bars.iter().map(|b| b.length.saturating_sub(j)).sum())
        .collect()
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ_{}({})", self.bottom, self.length)?;
        if self.parity == Parity::Odd {
            f.write_str("[odd]")?;
        }
        Ok(())
    }
}

impl fmt::Display for GradedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.towers.iter().map(|t| format!("T⁺_{}", t.bottom)).collect();
        parts.extend(self.bars.iter().map(|b| b.to_string()));
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" ⊕ "))
        }
    }
}
