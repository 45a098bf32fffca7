//! Dense linear algebra over the two-element field.
//!
//! Vectors are packed into `u64` words. Matrices are stored row-major; the
//! column `j` of a matrix is the image of the `j`-th basis vector.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct F2Vec {
    words: Vec<u64>,
    len: usize,
}

impl F2Vec {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; len.div_ceil(WORD)], len }
    }

    pub fn unit(len: usize, idx: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(idx, true);
        v
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, idx: usize) -> bool {
        debug_assert!(idx < self.len);
        (self.words[idx / WORD] >> (idx % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, idx: usize, bit: bool) {
        debug_assert!(idx < self.len);
        let mask = 1u64 << (idx % WORD);
        if bit {
            self.words[idx / WORD] |= mask;
        } else {
            self.words[idx / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.words[idx / WORD] ^= 1u64 << (idx % WORD);
    }

    pub fn xor_assign(&mut self, other: &F2Vec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Index of the lowest set bit.
    pub fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn dot(&self, other: &F2Vec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }
}

impl fmt::Debug for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<F2Vec>,
}

impl F2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F2Vec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 rows. All rows must have length `cols`.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Vec<u8>]) -> Option<Self> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = entries.iter().map(|r| F2Vec::from_bits(r)).collect();
        Some(Self { rows, cols, data })
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        self.data
            .iter()
            .map(|r| (0..self.cols).map(|c| u8::from(r.get(c))).collect())
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        self.data[r].set(c, bit)
    }

    pub fn row(&self, r: usize) -> &F2Vec {
        &self.data[r]
    }

    pub fn column(&self, c: usize) -> F2Vec {
        let mut v = F2Vec::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F2Vec::is_zero)
    }

    pub fn mul_vec(&self, v: &F2Vec) -> F2Vec {
        assert_eq!(v.len(), self.cols, "dimension mismatch in mul_vec");
        let mut out = F2Vec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            if row.dot(v) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = F2Matrix::zeros(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            for k in row.ones() {
                out.data[r].xor_assign(&other.data[k]);
            }
        }
        out
    }

    pub fn transpose(&self) -> F2Matrix {
        let mut out = F2Matrix::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                out.set(c, r, true);
            }
        }
        out
    }

    pub fn pow(&self, exp: usize) -> F2Matrix {
        assert_eq!(self.rows, self.cols);
        let mut acc = F2Matrix::identity(self.rows);
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(self.cols);
        self.data.iter().filter(|r| ech.insert((*r).clone())).count()
    }

    pub fn inverse(&self) -> Option<F2Matrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a: Vec<F2Vec> = self.data.clone();
        let mut inv: Vec<F2Vec> = F2Matrix::identity(n).data;
        for c in 0..n {
            let pivot = (c..n).find(|&r| a[r].get(c))?;
            a.swap(c, pivot);
            inv.swap(c, pivot);
            for r in 0..n {
                if r != c && a[r].get(c) {
                    let (ar, ir) = (a[c].clone(), inv[c].clone());
                    a[r].xor_assign(&ar);
                    inv[r].xor_assign(&ir);
                }
            }
        }
        Some(F2Matrix { rows: n, cols: n, data: inv })
    }
}

impl fmt::Debug for F2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "F2Matrix {}x{}", self.rows, self.cols)?;
        for row in &self.data {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

/// Incrementally built echelon basis. Each stored vector owns a distinct
/// pivot, its lowest set bit.
#[derive(Clone, Debug)]
pub struct Echelon {
    len: usize,
    // pivot index -> basis vector
    pivots: Vec<Option<F2Vec>>,
    rank: usize,
}

impl Echelon {
    pub fn new(len: usize) -> Self {
        Self { len, pivots: vec![None; len], rank: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_pivot(&self, idx: usize) -> bool {
        self.pivots[idx].is_some()
    }

    /// Reduces `v` against the basis; the result has no set bit at any pivot.
    pub fn reduce(&self, mut v: F2Vec) -> F2Vec {
        debug_assert_eq!(v.len(), self.len);
        let mut from = 0;
        while let Some(idx) = next_one_from(&v, from) {
            if let Some(b) = &self.pivots[idx] {
                v.xor_assign(b);
            }
            from = idx + 1;
        }
        v
    }

    /// Adds `v` to the span. Returns false if it was already there.
    pub fn insert(&mut self, v: F2Vec) -> bool {
        let r = self.reduce(v);
        match r.lowest_one() {
            None => false,
            Some(p) => {
                self.pivots[p] = Some(r);
                self.rank += 1;
                true
            }
        }
    }
}

fn next_one_from(v: &F2Vec, from: usize) -> Option<usize> {
    if from >= v.len {
        return None;
    }
    let mut wi = from / WORD;
    let mut w = v.words[wi] & (!0u64 << (from % WORD));
    loop {
        if w != 0 {
            return Some(wi * WORD + w.trailing_zeros() as usize);
        }
        wi += 1;
        if wi >= v.words.len() {
            return None;
        }
        w = v.words[wi];
    }
}

/// Kernel of the linear map whose columns are `columns` (each of length
/// `target_dim`), as vectors over the source.
///
/// Every returned vector `x_j` is tagged by a free column `j`: `x_j` has a 1 at
/// `j` and 0 at every other free column. Hence the coordinates of a kernel
/// element in this basis are its entries at the free columns.
pub fn kernel(columns: &[F2Vec], target_dim: usize) -> Vec<(usize, F2Vec)> {
    let n = columns.len();
    // pivot row -> (reduced column, combination of source columns)
    let mut table: Vec<Option<(F2Vec, F2Vec)>> = vec![None; target_dim];
    let mut out = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        debug_assert_eq!(col.len(), target_dim);
        let mut v = col.clone();
        let mut comb = F2Vec::unit(n, j);
        let mut from = 0;
        while let Some(idx) = next_one_from(&v, from) {
            if let Some((b, bc)) = &table[idx] {
                v.xor_assign(b);
                comb.xor_assign(bc);
            }
            from = idx + 1;
        }
        match v.lowest_one() {
            None => out.push((j, comb)),
            Some(p) => table[p] = Some((v, comb)),
        }
    }
    out
}
