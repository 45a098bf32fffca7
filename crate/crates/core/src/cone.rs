//! The truncated mapping cone for `p/q` surgery and its homology.
//!
//! Column `n` of the cone carries `A_{k_n}` and `B`, with `k_n = ⌊(i+pn)/q⌋`.
//! `D` sends `(n, A)` to `(n, B)` by `v` and to `(n+1, B)` by `h`. Gradings are
//! kept as integer offsets from the anchor `d(Y) + d(L(p,q), i)`, with the
//! tower generator of `(0, B)` at `−1`.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f2::{kernel, Echelon, F2Matrix, F2Vec};
use crate::fmod::{Bar, FiniteUPresentation, Generator, Grading, Parity};
use crate::knotmodel::{KnotModel, ReducedPiece};
use crate::numth::{lens_d, NumthError};
use crate::rational::Rational;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("V_0 = {0} must vanish for the reduced cone")]
    V0NonZero(i64),
    #[error("invalid surgery: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Numth(#[from] NumthError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurgerySpec {
    pub p: i64,
    pub q: i64,
    pub i: i64,
}

impl SurgerySpec {
    pub fn new(p: i64, q: i64, i: i64) -> Result<Self, ConeError> {
        if p <= 0 || q <= 0 {
            return Err(ConeError::InvalidSpec(format!("slope {p}/{q} must have p, q > 0")));
        }
        if p.gcd(&q) != 1 {
            return Err(ConeError::InvalidSpec(format!("{p} and {q} are not coprime")));
        }
        if !(0..p).contains(&i) {
            return Err(ConeError::InvalidSpec(format!("Spin^c index {i} outside 0..{p}")));
        }
        Ok(Self { p, q, i })
    }

    /// `⌊(i + pn)/q⌋`.
    pub fn k(&self, n: i64) -> i64 {
        (self.i + self.p * n).div_euclid(self.q)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowColumn {
    pub n: i64,
    pub k: i64,
    pub v: i64,
    pub h: i64,
    /// Tower generator of `(n, A)`.
    pub grading_a: i64,
    /// Tower generator of `(n, B)`.
    pub grading_b: i64,
}

/// Columns retained after truncation: `A` for `−G < k_n < G`, `B` for the
/// same range with the first label dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeWindow {
    pub big_g: i64,
    pub a_columns: Vec<WindowColumn>,
    pub b_columns: Vec<i64>,
}

impl ConeWindow {
    pub fn new(m: &KnotModel, s: &SurgerySpec) -> Self {
        let ceil_pq = (s.p + s.q - 1) / s.q;
        let big_g = (m.genus as i64).max(1).max((ceil_pq + 2) / 2);
        // k_n is non-decreasing in n, so the retained labels form an interval.
        let mut n = (-big_g * s.q - s.i).div_euclid(s.p);
        while s.k(n) > -big_g {
            n -= 1;
        }
        while s.k(n) <= -big_g {
            n += 1;
        }
        let lo = n;
        let mut hi = lo;
        while s.k(hi + 1) < big_g {
            hi += 1;
        }

        // Tower gradings of (n, B), telescoped from (0, B) at −1.
        let mut g_b: BTreeMap<i64, i64> = BTreeMap::new();
        g_b.insert(0, -1);
        for n in 0..=hi.max(0) {
            let next = g_b[&n] + 2 * s.k(n);
            g_b.insert(n + 1, next);
        }
        for n in (lo.min(0)..0).rev() {
            let prev = g_b[&(n + 1)] - 2 * s.k(n);
            g_b.insert(n, prev);
        }

        let a_columns = (lo..=hi)
            .map(|n| {
                let k = s.k(n);
                let (v, h) = m.vh_value(k);
                debug_assert_eq!(g_b[&(n + 1)] - g_b[&n], 2 * k);
                WindowColumn { n, k, v, h, grading_a: g_b[&n] + 1 - 2 * v, grading_b: g_b[&n] }
            })
            .collect();
        Self { big_g, a_columns, b_columns: (lo + 1..=hi).collect() }
    }

    pub fn retains_b(&self, n: i64) -> bool {
        self.b_columns.first().is_some_and(|&lo| lo <= n) && self.b_columns.last().is_some_and(|&hi| n <= hi)
    }

    fn column(&self, n: i64) -> &WindowColumn {
        let lo = self.a_columns[0].n;
        &self.a_columns[(n - lo) as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Part {
    /// `U^{-j}` times the tower generator.
    Tower(i64),
    Red(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Cell {
    n: i64,
    part: Part,
}

/// Cells of one side of the cone, grouped by grading.
#[derive(Clone, Debug, Default)]
struct Side {
    by_grading: BTreeMap<i64, Vec<Cell>>,
    index: HashMap<Cell, (i64, usize)>,
}

impl Side {
    fn push(&mut self, grading: i64, cell: Cell) {
        let list = self.by_grading.entry(grading).or_default();
        self.index.insert(cell, (grading, list.len()));
        list.push(cell);
    }

    fn at(&self, grading: i64) -> &[Cell] {
        self.by_grading.get(&grading).map(Vec::as_slice).unwrap_or(&[])
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    fn vector(&self, grading: i64, cells: impl IntoIterator<Item = Cell>) -> F2Vec {
        let mut v = F2Vec::zeros(self.at(grading).len());
        for c in cells {
            let (g, idx) = self.index[&c];
            debug_assert_eq!(g, grading, "map is not homogeneous");
            v.flip(idx);
        }
        v
    }
}

/// The cone truncated to the window and to gradings at most `ceiling`
/// (on `B`; one more on `A`).
#[derive(Clone, Debug)]
pub struct TruncatedCone {
    pub spec: SurgerySpec,
    pub window: ConeWindow,
    pub depth: usize,
    pub ceiling: i64,
    pub anchor: Grading,
    pieces: BTreeMap<i64, ReducedPiece>,
    b_red: FiniteUPresentation,
    a: Side,
    b: Side,
}

fn int_grading(g: &Grading) -> i64 {
    crate::rational::to_i64(g.value()).expect("validated models have integral relative gradings")
}

/// Default truncation depth for `(m, s)`.
pub fn default_depth(m: &KnotModel, s: &SurgerySpec) -> usize {
    let w = ConeWindow::new(m, s);
    let vh = w.a_columns.iter().map(|c| c.v + c.h).max().unwrap_or(0) as usize;
    2 * (vh + m.longest_bar()) + 4
}

pub fn build_cone(m: &KnotModel, s: &SurgerySpec, depth: usize) -> Result<TruncatedCone, ConeError> {
    let window = ConeWindow::new(m, s);
    let d_lens = lens_d(s.p, s.q)?;
    let anchor = Grading::new(m.ambient.d.value() + &d_lens[s.i as usize]);
    let b_red = m.ambient.b_relative();
    let pieces: BTreeMap<i64, ReducedPiece> = window
        .a_columns
        .iter()
        .map(|c| (c.k, m.reduced_piece(c.k)))
        .collect();

    let mut top = i64::MIN;
    for c in &window.a_columns {
        top = top.max(c.grading_a).max(c.grading_b);
        for g in pieces[&c.k].module.basis() {
            top = top.max(c.grading_a + int_grading(&g.grading));
        }
        for g in b_red.basis() {
            top = top.max(c.grading_b + int_grading(&g.grading));
        }
    }
    let ceiling = top + 2 * depth as i64;

    let mut a = Side::default();
    for c in &window.a_columns {
        let mut j = 0;
        while c.grading_a + 2 * j <= ceiling + 1 {
            a.push(c.grading_a + 2 * j, Cell { n: c.n, part: Part::Tower(j) });
            j += 1;
        }
        for (idx, g) in pieces[&c.k].module.basis().iter().enumerate() {
            a.push(c.grading_a + int_grading(&g.grading), Cell { n: c.n, part: Part::Red(idx) });
        }
    }
    let mut b = Side::default();
    for &n in &window.b_columns {
        let base = window.column(n).grading_b;
        let mut j = 0;
        while base + 2 * j <= ceiling {
            b.push(base + 2 * j, Cell { n, part: Part::Tower(j) });
            j += 1;
        }
        for (idx, g) in b_red.basis().iter().enumerate() {
            b.push(base + int_grading(&g.grading), Cell { n, part: Part::Red(idx) });
        }
    }

    Ok(TruncatedCone { spec: *s, window, depth, ceiling, anchor, pieces, b_red, a, b })
}

impl TruncatedCone {
    /// `(dim A, dim B)` of the truncated complex.
    pub fn dims(&self) -> (usize, usize) {
        (self.a.len(), self.b.len())
    }

    fn d_cell(&self, cell: Cell) -> Vec<Cell> {
        let col = self.window.column(cell.n);
        let mut out = Vec::new();
        let here = self.window.retains_b(cell.n);
        let next = self.window.retains_b(cell.n + 1);
        match cell.part {
            Part::Tower(j) => {
                if here && j >= col.v {
                    out.push(Cell { n: cell.n, part: Part::Tower(j - col.v) });
                }
                if next && j >= col.h {
                    out.push(Cell { n: cell.n + 1, part: Part::Tower(j - col.h) });
                }
            }
            Part::Red(z) => {
                let piece = &self.pieces[&col.k];
                if here {
                    out.extend(piece.v.column(z).ones().map(|r| Cell { n: cell.n, part: Part::Red(r) }));
                }
                if next {
                    out.extend(piece.h.column(z).ones().map(|r| Cell { n: cell.n + 1, part: Part::Red(r) }));
                }
            }
        }
        out
    }

    fn u_cell(&self, cell: Cell, module: &FiniteUPresentation) -> Vec<Cell> {
        match cell.part {
            Part::Tower(0) => Vec::new(),
            Part::Tower(j) => vec![Cell { n: cell.n, part: Part::Tower(j - 1) }],
            Part::Red(z) => module.u_matrix().column(z).ones().map(|r| Cell { n: cell.n, part: Part::Red(r) }).collect(),
        }
    }

    fn u_a(&self, cell: Cell) -> Vec<Cell> {
        let k = self.window.column(cell.n).k;
        self.u_cell(cell, &self.pieces[&k].module)
    }

    fn u_b(&self, cell: Cell) -> Vec<Cell> {
        self.u_cell(cell, &self.b_red)
    }

    /// Matrix of `D` from gradings `x` on `A` to `x − 1` on `B`.
    fn d_columns(&self, x: i64) -> Vec<F2Vec> {
        self.a
            .at(x)
            .iter()
            .map(|&c| self.b.vector(x - 1, self.d_cell(c)))
            .collect()
    }

    fn apply(&self, side: &Side, grading: i64, v: &F2Vec, u: impl Fn(Cell) -> Vec<Cell>) -> F2Vec {
        let cells = side.at(grading);
        side.vector(grading - 2, v.ones().flat_map(|i| u(cells[i])))
    }

    /// `ker D` and `coker D` as finite U-modules, gradings relative to the anchor.
    pub fn kernel_and_cokernel(&self) -> (FiniteUPresentation, FiniteUPresentation) {
        struct KerBlock {
            vectors: Vec<(usize, F2Vec)>,
        }
        struct CokerBlock {
            echelon: Echelon,
            free_rows: Vec<usize>,
        }

        let mut ker: BTreeMap<i64, KerBlock> = BTreeMap::new();
        for &x in self.a.by_grading.keys() {
            let cols = self.d_columns(x);
            let vectors = kernel(&cols, self.b.at(x - 1).len());
            ker.insert(x, KerBlock { vectors });
        }
        let mut coker: BTreeMap<i64, CokerBlock> = BTreeMap::new();
        for &y in self.b.by_grading.keys() {
            let dim = self.b.at(y).len();
            let mut echelon = Echelon::new(dim);
            for col in self.d_columns(y + 1) {
                echelon.insert(col);
            }
            let free_rows = (0..dim).filter(|&r| !echelon.is_pivot(r)).collect();
            coker.insert(y, CokerBlock { echelon, free_rows });
        }

        let parity = |g: i64| Parity::of_offset(g);

        // Kernel module.
        let mut basis = Vec::new();
        let mut offset = HashMap::new();
        for (&x, blk) in &ker {
            offset.insert(x, basis.len());
            for (free, _) in &blk.vectors {
                basis.push(Generator::new(format!("a{x}.{free}"), Grading::from_int(x), parity(x)));
            }
        }
        let mut u = F2Matrix::zeros(basis.len(), basis.len());
        for (&x, blk) in &ker {
            let Some(below) = ker.get(&(x - 2)) else { continue };
            let position: HashMap<usize, usize> =
                below.vectors.iter().enumerate().map(|(i, (f, _))| (*f, i)).collect();
            for (col, (_, v)) in blk.vectors.iter().enumerate() {
                let image = self.apply(&self.a, x, v, |c| self.u_a(c));
                for idx in image.ones() {
                    if let Some(&row) = position.get(&idx) {
                        u.set(offset[&(x - 2)] + row, offset[&x] + col, true);
                    }
                }
            }
        }
        let ker_module = FiniteUPresentation::new(basis, u).expect("square");

        // Cokernel module.
        let mut basis = Vec::new();
        let mut offset = HashMap::new();
        for (&y, blk) in &coker {
            offset.insert(y, basis.len());
            for r in &blk.free_rows {
                basis.push(Generator::new(format!("b{y}.{r}"), Grading::from_int(y), parity(y)));
            }
        }
        let mut u = F2Matrix::zeros(basis.len(), basis.len());
        for (&y, blk) in &coker {
            let Some(below) = coker.get(&(y - 2)) else { continue };
            let position: HashMap<usize, usize> =
                below.free_rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
            for (col, &r) in blk.free_rows.iter().enumerate() {
                let unit = F2Vec::unit(self.b.at(y).len(), r);
                let image = below.echelon.reduce(self.apply(&self.b, y, &unit, |c| self.u_b(c)));
                for idx in image.ones() {
                    u.set(offset[&(y - 2)] + position[&idx], offset[&y] + col, true);
                }
            }
        }
        let coker_module = FiniteUPresentation::new(basis, u).expect("square");
        (ker_module, coker_module)
    }

    /// Splits off the tower and returns `(tower bottom, reduced bars)` in
    /// absolute gradings.
    pub fn homology(&self) -> Result<(Grading, Vec<Bar>), ConeError> {
        let (ker, coker) = self.kernel_and_cokernel();
        let ker_bars = ker.barcode();
        let coker_bars = coker.barcode();
        let reaches = |b: &Bar, ceiling: i64| int_grading(&b.top()) + 2 > ceiling;

        let (towers, mut red): (Vec<Bar>, Vec<Bar>) = ker_bars.into_iter().partition(|b| reaches(b, self.ceiling + 1));
        if towers.len() != 1 {
            return Err(ConeError::TruncationTooSmall(format!(
                "{} kernel chains reach the ceiling at depth {}",
                towers.len(),
                self.depth
            )));
        }
        if let Some(b) = coker_bars.iter().find(|b| reaches(b, self.ceiling)) {
            return Err(ConeError::TruncationTooSmall(format!(
                "cokernel chain {b} reaches the ceiling at depth {}",
                self.depth
            )));
        }
        red.extend(coker_bars);
        let shift = |g: &Grading| Grading::new(self.anchor.value() + g.value());
        let tower = &towers[0];
        let mut red: Vec<Bar> = red
            .into_iter()
            .map(|b| {
                let parity = Parity::of_offset(int_grading(&b.bottom) - int_grading(&tower.bottom));
                Bar::new(shift(&b.bottom), b.length, parity)
            })
            .collect();
        red.sort();
        Ok((shift(&tower.bottom), red))
    }
}

/// `HF⁺(Y_{p/q}(K), i) = T⁺_d ⊕ red`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeResult {
    pub spec: SurgerySpec,
    pub d: Grading,
    pub red: Vec<Bar>,
    /// `(even, odd)` dimensions of the reduced part.
    pub dims: (usize, usize),
    pub depth: usize,
}

impl ConeResult {
    pub fn dim_red(&self) -> usize {
        self.dims.0 + self.dims.1
    }

    pub fn chi_red(&self) -> i64 {
        self.dims.0 as i64 - self.dims.1 as i64
    }

    /// Same invariants without the depth used to get them.
    pub fn same_homology(&self, other: &ConeResult) -> bool {
        self.spec == other.spec && self.d == other.d && self.red == other.red && self.dims == other.dims
    }

    /// `HF⁺` of the orientation reverse: `d ↦ −d`, and each bar `τ_b(N)`
    /// becomes `τ_{−b−2N+1}(N)` with the opposite parity.
    pub fn reversed(&self) -> ConeResult {
        let mut red: Vec<Bar> = self
            .red
            .iter()
            .map(|b| {
                let bottom = Grading::new(-b.bottom.value()).shifted(1 - 2 * b.length as i64);
                Bar::new(bottom, b.length, b.parity.flipped())
            })
            .collect();
        red.sort();
        ConeResult {
            spec: self.spec,
            d: Grading::new(-self.d.value()),
            red,
            dims: (self.dims.1, self.dims.0),
            depth: self.depth,
        }
    }
}

pub fn cone_homology_at(m: &KnotModel, s: &SurgerySpec, depth: usize) -> Result<ConeResult, ConeError> {
    let (d, red) = build_cone(m, s, depth)?.homology()?;
    let dims = red.iter().fold((0, 0), |(e, o), b| match b.parity {
        Parity::Even => (e + b.length, o),
        Parity::Odd => (e, o + b.length),
    });
    Ok(ConeResult { spec: *s, d, red, dims, depth })
}

/// Homology at `depth` (default when `None`), confirmed at `depth + 2`.
pub fn cone_homology_with(m: &KnotModel, s: &SurgerySpec, depth: Option<usize>) -> Result<ConeResult, ConeError> {
    let depth = depth.unwrap_or_else(|| default_depth(m, s));
    let first = cone_homology_at(m, s, depth)?;
    let second = cone_homology_at(m, s, depth + 2)?;
    if !first.same_homology(&second) {
        return Err(ConeError::TruncationTooSmall(format!(
            "results at depth {depth} and {} differ",
            depth + 2
        )));
    }
    Ok(first)
}

pub fn cone_homology(m: &KnotModel, s: &SurgerySpec) -> Result<ConeResult, ConeError> {
    cone_homology_with(m, s, None)
}

/// All Spin^c structures of one surgery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryResult {
    pub model: String,
    pub p: i64,
    pub q: i64,
    /// True when this is `HF⁺(−Y_{p/q}(K))`.
    #[serde(default)]
    pub reversed: bool,
    pub results: Vec<ConeResult>,
    pub dim_red: usize,
    pub chi_red: i64,
    #[serde(with = "crate::rational::serde_str")]
    pub d_sum: Rational,
}

impl SurgeryResult {
    fn assemble(model: String, p: i64, q: i64, reversed: bool, results: Vec<ConeResult>) -> Self {
        let dim_red = results.iter().map(ConeResult::dim_red).sum();
        let chi_red = results.iter().map(ConeResult::chi_red).sum();
        let d_sum = results.iter().map(|r| r.d.value().clone()).sum();
        Self { model, p, q, reversed, results, dim_red, chi_red, d_sum }
    }

    pub fn d_table(&self) -> Vec<Grading> {
        self.results.iter().map(|r| r.d.clone()).collect()
    }

    pub fn reversed(&self) -> SurgeryResult {
        let results = self.results.iter().map(ConeResult::reversed).collect();
        Self::assemble(self.model.clone(), self.p, self.q, !self.reversed, results)
    }
}

pub fn surgery(m: &KnotModel, p: i64, q: i64, depth: Option<usize>) -> Result<SurgeryResult, ConeError> {
    SurgerySpec::new(p, q, 0)?;
    let results = (0..p)
        .map(|i| cone_homology_with(m, &SurgerySpec::new(p, q, i)?, depth))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SurgeryResult::assemble(m.name.clone(), p, q, false, results))
}

/// `(lower, upper)` bounds on `d(Y_{p/q}(K), i)`.
pub fn d_invariant_bounds(m: &KnotModel, s: &SurgerySpec) -> Result<(Grading, Grading), ConeError> {
    let d_lens = lens_d(s.p, s.q)?;
    let (v, _) = m.vh_value(s.k(0));
    let (_, h) = m.vh_value(s.k(-1));
    let upper = Grading::new(m.ambient.d.value() + &d_lens[s.i as usize]).shifted(-2 * v.max(h));
    let lower = upper.shifted(-2 * m.ambient.max_odd_bar() as i64);
    Ok((lower, upper))
}

/// `(dim ker, dim coker)` of the reduced part `D̃` of the windowed cone.
pub fn reduced_cone(m: &KnotModel, s: &SurgerySpec) -> Result<(usize, usize), ConeError> {
    if m.v0() != 0 {
        return Err(ConeError::V0NonZero(m.v0()));
    }
    let window = ConeWindow::new(m, s);
    let nb = m.ambient.dim_red();
    let b_lo = window.b_columns.first().copied().unwrap_or(0);
    let rows = nb * window.b_columns.len();
    let mut columns = Vec::new();
    for c in &window.a_columns {
        let piece = m.reduced_piece(c.k);
        for z in 0..piece.module.dim() {
            let mut col = F2Vec::zeros(rows);
            for (target, map) in [(c.n, &piece.v), (c.n + 1, &piece.h)] {
                if window.retains_b(target) {
                    let base = (target - b_lo) as usize * nb;
                    for r in map.column(z).ones() {
                        col.flip(base + r);
                    }
                }
            }
            columns.push(col);
        }
    }
    let ker = kernel(&columns, rows).len();
    let rank = columns.len() - ker;
    Ok((ker, rows - rank))
}
