//! Executable surgery obstructions.
//!
//! Each check returns a [`Verdict`] carrying the inputs it used. `Fail`
//! always means the hypothesised surgery cannot exist (or, for `D_SANDWICH`,
//! that a computed value contradicts the bounds).

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cone::{d_invariant_bounds, surgery, ConeError, ConeResult, SurgeryResult, SurgerySpec};
use crate::fmod::Grading;
use crate::knotmodel::{AmbientSummary, KnotModel};
use crate::numth::{dedekind, totient};
use crate::rational::{format_rational, int, Rational};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ObstructError {
    #[error("V_0 = 0: the bound needs V_0 > 0")]
    V0Zero,
    #[error("missing gradings: {0}")]
    MissingGradings(String),
    #[error("invalid target summary: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    ZSpecial,
    ChiDivis,
    ChiEq,
    KSpecial,
    V0Bound,
    GenusBound,
    DSandwich,
    LensComplement,
    DedekindNecessary,
    CosmeticScan,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inapplicable,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inapplicable => "INAPPLICABLE",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub rule: Rule,
    pub outcome: Outcome,
    pub note: String,
    pub witness: BTreeMap<String, Value>,
}

impl Verdict {
    fn new(rule: Rule, outcome: Outcome, note: impl Into<String>) -> Self {
        Self { rule, outcome, note: note.into(), witness: BTreeMap::new() }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.witness.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub verdicts: Vec<Verdict>,
}

impl ObstructionReport {
    pub fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn any_fail(&self) -> bool {
        self.verdicts.iter().any(|v| v.outcome == Outcome::Fail)
    }
}

fn rat_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

/// What is known about a candidate surgery result `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub h1_order: i64,
    pub dim_red: usize,
    pub chi_red: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_table: Option<Vec<Grading>>,
    /// `max{gr(z) − d(Z, s)}` over reduced elements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_z: Option<Grading>,
}

impl TargetSummary {
    pub fn new(h1_order: i64, dim_red: usize, chi_red: i64) -> Result<Self, ObstructError> {
        let t = Self { h1_order, dim_red, chi_red, d_table: None, d_z: None };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), ObstructError> {
        if self.h1_order < 1 {
            return Err(ObstructError::InvalidTarget(format!("|H1| = {} must be positive", self.h1_order)));
        }
        if self.chi_red.unsigned_abs() as usize > self.dim_red {
            return Err(ObstructError::InvalidTarget(format!(
                "|chi| = {} exceeds dim = {}",
                self.chi_red.abs(),
                self.dim_red
            )));
        }
        if (self.chi_red - self.dim_red as i64).rem_euclid(2) != 0 {
            return Err(ObstructError::InvalidTarget(format!(
                "chi = {} and dim = {} differ in parity",
                self.chi_red, self.dim_red
            )));
        }
        Ok(())
    }

    pub fn from_surgery(r: &SurgeryResult) -> Self {
        let d_z = r
            .results
            .iter()
            .flat_map(|c| c.red.iter().map(move |b| Grading::new(b.top().value() - c.d.value())))
            .max();
        Self {
            h1_order: r.p,
            dim_red: r.dim_red,
            chi_red: r.chi_red,
            d_table: Some(r.d_table()),
            d_z,
        }
    }
}

/// Whether some multiple of `p` lies strictly between `a` and `b`.
pub fn straddles(p: i64, a: i64, b: i64) -> bool {
    let (lo, hi) = (a.min(b), a.max(b));
    // first multiple of p above lo
    let m = (lo.div_euclid(p) + 1) * p;
    m < hi
}

/// At most `φ(|H₁(Z)|)` slopes `p/q` give `Z`, and no two of them straddle a
/// multiple of `p`, unless `|H₁(Z)|` divides `χ(HF_red(Z))`.
pub fn z_special(z: &TargetSummary, p: i64, q_list: &[i64]) -> Verdict {
    let mut qs = q_list.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let base = |v: Verdict| {
        v.with("p", json!(p))
            .with("q_list", json!(qs))
            .with("h1_order", json!(z.h1_order))
            .with("chi_red", json!(z.chi_red))
    };
    if let Some(q) = qs.iter().find(|q| q.gcd(&p) != 1) {
        return base(Verdict::new(Rule::ZSpecial, Outcome::Inapplicable, format!("{q} is not coprime to {p}")));
    }
    if p == 1 {
        return base(Verdict::new(Rule::ZSpecial, Outcome::Inapplicable, "p = 1 is vacuous"));
    }
    if z.chi_red.rem_euclid(z.h1_order) == 0 {
        return base(Verdict::new(Rule::ZSpecial, Outcome::Inapplicable, "|H1(Z)| divides chi(HF_red(Z))"));
    }
    let phi = totient(z.h1_order as u64);
    let pair = qs
        .iter()
        .enumerate()
        .flat_map(|(a, &x)| qs[a + 1..].iter().map(move |&y| (x, y)))
        .find(|&(x, y)| straddles(p, x, y));
    let v = base(Verdict::new(Rule::ZSpecial, Outcome::Pass, "")).with("totient", json!(phi));
    if let Some((x, y)) = pair {
        let mut v = v.with("straddling_pair", json!([x, y]));
        v.outcome = Outcome::Fail;
        v.note = format!("{x} and {y} straddle a multiple of {p}");
        v
    } else if qs.len() as u64 > phi {
        let mut v = v;
        v.outcome = Outcome::Fail;
        v.note = format!("{} slopes exceed phi({}) = {phi}", qs.len(), z.h1_order);
        v
    } else {
        let mut v = v;
        v.note = "no contradiction".into();
        v
    }
}

/// `CHI_EQ`: `χ(HF_red(Z)) = p·χ(HF_red(Y))`; `CHI_DIVIS`: `p | χ(HF_red(Z))`.
pub fn chi_relation(y_chi: i64, z: &TargetSummary, p: i64) -> [Verdict; 2] {
    let wit = |v: Verdict| v.with("y_chi", json!(y_chi)).with("z_chi", json!(z.chi_red)).with("p", json!(p));
    let eq = if z.chi_red == p * y_chi {
        Verdict::new(Rule::ChiEq, Outcome::Pass, format!("{} = {p}·{y_chi}", z.chi_red))
    } else {
        Verdict::new(Rule::ChiEq, Outcome::Fail, format!("{} ≠ {p}·{y_chi}", z.chi_red))
    };
    let divis = if p != 0 && z.chi_red.rem_euclid(p) == 0 {
        Verdict::new(Rule::ChiDivis, Outcome::Pass, format!("{p} divides {}", z.chi_red))
    } else {
        Verdict::new(Rule::ChiDivis, Outcome::Fail, format!("{p} does not divide {}", z.chi_red))
    };
    [wit(eq), wit(divis)]
}

/// `Y_{p/q₁}(K) = Y_{−p/q₂}(K)` forces `s(q₁,p) = s(−q₂,p)`.
pub fn dedekind_necessary(p: i64, q1: i64, q2: i64) -> Verdict {
    let base = |v: Verdict| v.with("p", json!(p)).with("q1", json!(q1)).with("q2", json!(q2));
    match (dedekind(q1, p), dedekind(-q2, p)) {
        (Ok(a), Ok(b)) => {
            let outcome = if a == b { Outcome::Pass } else { Outcome::Fail };
            let note = if a == b { "s(q1,p) = s(-q2,p)" } else { "s(q1,p) ≠ s(-q2,p)" };
            base(Verdict::new(Rule::DedekindNecessary, outcome, note))
                .with("s_q1", rat_json(&a))
                .with("s_minus_q2", rat_json(&b))
        }
        (Err(e), _) | (_, Err(e)) => base(Verdict::new(Rule::DedekindNecessary, Outcome::Inapplicable, e.to_string())),
    }
}

/// The constraints on `K` forced when `|q|` exceeds `N(Y,Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    V0Zero,
    AlexanderTrivial,
    EvenDimsMatch,
    OddDimsMatch,
}

impl Conclusion {
    pub const ALL: [Conclusion; 4] =
        [Conclusion::V0Zero, Conclusion::AlexanderTrivial, Conclusion::EvenDimsMatch, Conclusion::OddDimsMatch];

    fn describe(self) -> &'static str {
        match self {
            Conclusion::V0Zero => "V_0 = 0",
            Conclusion::AlexanderTrivial => "Alexander polynomial is 1",
            Conclusion::EvenDimsMatch => "even dims of every A_red[k] equal those of B_red",
            Conclusion::OddDimsMatch => "odd dims of every A_red[k] equal those of B_red",
        }
    }
}

/// `N(Y,Z) = 2|H₁(Z)|·dim HF_red(Y) + dim HF_red(Z)`.
pub fn n_bound(y: &AmbientSummary, z: &TargetSummary) -> i64 {
    2 * z.h1_order * y.dim_red() as i64 + z.dim_red as i64
}

/// `Some(N)` when the large-`q` theorem applies to `(y, z, q)`.
pub fn k_special_trigger(y: &AmbientSummary, z: &TargetSummary, q: i64) -> Option<i64> {
    let n = n_bound(y, z);
    (!y.is_l_space() && q.abs() > n).then_some(n)
}

/// One verdict per forced conclusion; with a model, each is checked.
pub fn k_special(y: &AmbientSummary, z: &TargetSummary, p: i64, q: i64, model: Option<&KnotModel>) -> Vec<Verdict> {
    let base = |v: Verdict| {
        v.with("p", json!(p))
            .with("q", json!(q))
            .with("n_bound", json!(n_bound(y, z)))
            .with("y_dim_red", json!(y.dim_red()))
            .with("z_dim_red", json!(z.dim_red))
            .with("h1_order", json!(z.h1_order))
    };
    if y.is_l_space() {
        return vec![base(Verdict::new(Rule::KSpecial, Outcome::Inapplicable, "ambient is an L-space"))];
    }
    if k_special_trigger(y, z, q).is_none() {
        return vec![base(Verdict::new(Rule::KSpecial, Outcome::Inapplicable, "|q| ≤ N(Y,Z)"))];
    }
    Conclusion::ALL
        .iter()
        .map(|&c| {
            let v = base(Verdict::new(Rule::KSpecial, Outcome::Pass, c.describe()))
                .with("conclusion", json!(c));
            match model {
                None => v.with("forced", json!(true)),
                Some(m) => check_conclusion(m, c, v),
            }
        })
        .collect()
}

fn check_conclusion(m: &KnotModel, c: Conclusion, v: Verdict) -> Verdict {
    let b = m.ambient.parity_dims();
    let (ok, v) = match c {
        Conclusion::V0Zero => (m.v0() == 0, v.with("v0", json!(m.v0()))),
        Conclusion::AlexanderTrivial => {
            let t = m.torsion_coefficients();
            (t.t.iter().all(|&x| x == 0), v.with("torsion", json!(t.t)))
        }
        Conclusion::EvenDimsMatch | Conclusion::OddDimsMatch => {
            let pick = |d: (usize, usize)| if c == Conclusion::EvenDimsMatch { d.0 } else { d.1 };
            let dims: Vec<usize> = (0..m.genus as i64).map(|k| pick(m.reduced_piece(k).module.parity_dims())).collect();
            (dims.iter().all(|&d| d == pick(b)), v.with("a_red_dims", json!(dims)).with("b_red_dim", json!(pick(b))))
        }
    };
    let mut v = v;
    if !ok {
        v.outcome = Outcome::Fail;
    }
    v
}

/// `n_i = #{j | 0 ≤ j < q, j ≡ i mod p} − 1`.
pub fn residue_counts(p: i64, q: i64) -> Vec<i64> {
    (0..p).map(|i| (0..q).filter(|j| j % p == i).count() as i64 - 1).collect()
}

/// `q ≤ p + dim HF_red(Z)/V₀`.
pub fn v0_bound(m: &KnotModel, z: &TargetSummary, p: i64, q: i64) -> Result<Verdict, ObstructError> {
    let v0 = m.v0();
    if v0 == 0 {
        return Err(ObstructError::V0Zero);
    }
    let n = residue_counts(p, q);
    let lower: i64 = v0 * n.iter().map(|&x| x.max(0)).sum::<i64>();
    let bound = int(p) + Rational::new(z.dim_red.into(), v0.into());
    let fail = v0 * (q - p) > z.dim_red as i64;
    let v = Verdict::new(
        Rule::V0Bound,
        if fail { Outcome::Fail } else { Outcome::Pass },
        if fail { format!("q = {q} exceeds p + dim/V0") } else { format!("q = {q} within p + dim/V0") },
    );
    Ok(v.with("p", json!(p))
        .with("q", json!(q))
        .with("v0", json!(v0))
        .with("z_dim_red", json!(z.dim_red))
        .with("q_max", rat_json(&bound))
        .with("n_i", json!(n))
        .with("dim_lower_bound", json!(lower)))
}

/// `⌊q/p⌋ ≤ (D(Z) − D(Y))/2`.
pub fn genus_bound(y: &AmbientSummary, z: &TargetSummary, p: i64, q: i64) -> Result<Verdict, ObstructError> {
    let d_y = y
        .d_min_excess()
        .ok_or_else(|| ObstructError::MissingGradings("ambient has no reduced elements".into()))?;
    let d_z = z.d_z.clone().ok_or_else(|| ObstructError::MissingGradings("target D(Z) not supplied".into()))?;
    let rhs = (d_z.value() - d_y.value()) / int(2);
    let lhs = q.div_euclid(p);
    let fail = int(lhs) > rhs;
    let v = Verdict::new(
        Rule::GenusBound,
        if fail { Outcome::Fail } else { Outcome::Pass },
        format!("floor(q/p) = {lhs} vs (D(Z) - D(Y))/2 = {}", format_rational(&rhs)),
    );
    Ok(v.with("p", json!(p))
        .with("q", json!(q))
        .with("d_y", rat_json(d_y.value()))
        .with("d_z", rat_json(d_z.value()))
        .with("k_special_triggered", json!(k_special_trigger(y, z, q).is_some())))
}

/// Computed `d(Y_{p/q}(K), i)` against both bounds, for every `i`.
pub fn d_sandwich(m: &KnotModel, p: i64, q: i64, depth: Option<usize>) -> Result<Verdict, ObstructError> {
    let r = surgery(m, p, q, depth)?;
    d_sandwich_on(m, &r.results)
}

pub fn d_sandwich_on(m: &KnotModel, results: &[ConeResult]) -> Result<Verdict, ObstructError> {
    let equality = m.ambient.max_odd_bar() == 0;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for r in results {
        let (lo, hi) = d_invariant_bounds(m, &r.spec)?;
        let inside = lo <= r.d && r.d <= hi && (!equality || r.d == hi);
        if !inside {
            bad.push(r.spec.i);
        }
        rows.push(json!({"i": r.spec.i, "d": r.d, "lower": lo, "upper": hi}));
    }
    let (outcome, note) = if bad.is_empty() {
        (Outcome::Pass, if equality { "d equals the upper bound" } else { "d within bounds" }.to_string())
    } else {
        (Outcome::Fail, format!("out of bounds at i = {bad:?}"))
    };
    let (p, q) = results.first().map(|r| (r.spec.p, r.spec.q)).unwrap_or((0, 0));
    Ok(Verdict::new(Rule::DSandwich, outcome, note)
        .with("p", json!(p))
        .with("q", json!(q))
        .with("equality_branch", json!(equality))
        .with("table", Value::Array(rows)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensComplement {
    pub p: i64,
    pub q: i64,
    pub w: i64,
    pub divisible: bool,
    pub candidates: Vec<i64>,
}

/// Integral slopes `n = −q·w²/p ± 1` that could return a lens space `L(p,q)`
/// from the complement of a knot with winding `w`; empty when `p ∤ w²`.
pub fn lens_complement(p: i64, q: i64, w: i64) -> Result<LensComplement, ObstructError> {
    if p < 1 || p.gcd(&q) != 1 || w < 0 {
        return Err(ObstructError::InvalidTarget(format!("need gcd(p,q) = 1, p ≥ 1, w ≥ 0; got ({p},{q},{w})")));
    }
    let w2 = (w as i128) * (w as i128);
    let divisible = w2 % p as i128 == 0;
    let candidates = if divisible {
        let base = -(q as i128) * (w2 / p as i128);
        let mut c = vec![(base - 1) as i64, (base + 1) as i64];
        c.sort_unstable();
        c
    } else {
        Vec::new()
    };
    Ok(LensComplement { p, q, w, divisible, candidates })
}

pub fn lens_complement_verdict(p: i64, q: i64, w: i64) -> Verdict {
    match lens_complement(p, q, w) {
        Ok(lc) => {
            let note = if lc.divisible {
                "at most one of the candidates can give the lens space"
            } else {
                "p does not divide w^2: no non-trivial slope"
            };
            let outcome = if lc.divisible { Outcome::Pass } else { Outcome::Fail };
            Verdict::new(Rule::LensComplement, outcome, note)
                .with("p", json!(p))
                .with("q", json!(q))
                .with("w", json!(w))
                .with("candidates", json!(lc.candidates))
        }
        Err(e) => Verdict::new(Rule::LensComplement, Outcome::Inapplicable, e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosmeticPair {
    pub q1: i64,
    pub q2: i64,
    /// `i ↦ a·i + b mod p` aligning the two results.
    pub matching: (i64, i64),
    pub straddles: bool,
    /// `p | χ(HF_red)`, required whenever the slopes straddle a multiple of `p`.
    pub chi_divisible: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosmeticScan {
    pub p: i64,
    pub scanned: Vec<i64>,
    pub skipped: Vec<i64>,
    pub pairs: Vec<CosmeticPair>,
}

fn same_block(a: &ConeResult, b: &ConeResult) -> bool {
    a.d == b.d && a.red == b.red
}

fn affine_match(p: i64, a: &SurgeryResult, b: &SurgeryResult) -> Option<(i64, i64)> {
    for mult in (1..=p.max(1)).filter(|m| m.gcd(&p) == 1) {
        for shift in 0..p {
            let ok = (0..p).all(|i| {
                let j = (mult * i + shift).rem_euclid(p);
                same_block(&a.results[i as usize], &b.results[j as usize])
            });
            if ok {
                return Some((mult % p.max(1), shift));
            }
        }
    }
    None
}

/// Pairs `q₁ < q₂` with `HF⁺(Y_{p/q₁}(K)) ≅ HF⁺(Y_{p/q₂}(K))` under some
/// affine relabelling of Spin^c structures.
pub fn cosmetic_pair_scan(m: &KnotModel, p: i64, qs: &[i64], depth: Option<usize>) -> Result<CosmeticScan, ObstructError> {
    let mut scanned: Vec<i64> = qs.iter().copied().filter(|&q| q > 0 && q.gcd(&p) == 1).collect();
    scanned.sort_unstable();
    scanned.dedup();
    let skipped = qs.iter().copied().filter(|q| !scanned.contains(q)).collect();
    let results = scanned
        .iter()
        .map(|&q| surgery(m, p, q, depth))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::new();
    for a in 0..results.len() {
        for b in a + 1..results.len() {
            let (ra, rb) = (&results[a], &results[b]);
            if ra.dim_red != rb.dim_red || ra.chi_red != rb.chi_red || ra.d_sum != rb.d_sum {
                continue;
            }
            if let Some(matching) = affine_match(p, ra, rb) {
                let st = straddles(p, ra.q, rb.q);
                let chi_divisible = ra.chi_red.rem_euclid(p) == 0;
                debug_assert!(!st || chi_divisible, "straddling pair with p ∤ χ");
                pairs.push(CosmeticPair { q1: ra.q, q2: rb.q, matching, straddles: st, chi_divisible });
            }
        }
    }
    Ok(CosmeticScan { p, scanned, skipped, pairs })
}

pub fn cosmetic_scan_verdict(scan: &CosmeticScan) -> Verdict {
    let consistent = scan.pairs.iter().all(|c| !c.straddles || c.chi_divisible);
    let (outcome, note) = if !consistent {
        (Outcome::Fail, "a straddling pair has p not dividing chi".to_string())
    } else if scan.pairs.is_empty() {
        (Outcome::Pass, "no slopes with isomorphic HF+".to_string())
    } else {
        (Outcome::Pass, format!("{} slope pair(s) with isomorphic HF+", scan.pairs.len()))
    };
    Verdict::new(Rule::CosmeticScan, outcome, note)
        .with("p", json!(scan.p))
        .with("scanned", json!(scan.scanned))
        .with("skipped", json!(scan.skipped))
        .with("pairs", serde_json::to_value(&scan.pairs).expect("serializable"))
}

/// Convenience: the summary of `Y_{p/q}(K)` computed from a model.
pub fn target_from_model(m: &KnotModel, p: i64, q: i64, depth: Option<usize>) -> Result<TargetSummary, ObstructError> {
    SurgerySpec::new(p, q, 0)?;
    Ok(TargetSummary::from_surgery(&surgery(m, p, q, depth)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shipped;

    fn model(name: &str) -> KnotModel {
        shipped::model(name).unwrap().unwrap()
    }

    fn sigma() -> AmbientSummary {
        shipped::ambient("sigma237_ambient").unwrap().unwrap()
    }

    #[test]
    fn straddle_helper() {
        assert!(straddles(2, 3, 7));
        assert!(straddles(2, 3, 1));
        assert!(!straddles(2, 3, 3));
        assert!(!straddles(5, 1, 4));
        assert!(straddles(5, 4, 6));
        assert!(straddles(3, -1, 1));
    }

    #[test]
    fn target_summary_invariants() {
        assert!(TargetSummary::new(2, 1, 1).is_ok());
        assert!(TargetSummary::new(2, 1, 3).is_err());
        assert!(TargetSummary::new(2, 2, 1).is_err());
        assert!(TargetSummary::new(0, 0, 0).is_err());
    }

    #[test]
    fn z_special_examples() {
        let z = target_from_model(&model("trefoil_rh_s3"), 2, 3, None).unwrap();
        assert_eq!((z.h1_order, z.dim_red, z.chi_red.abs()), (2, 1, 1));
        for pair in [[3, 5], [3, 7], [1, 3], [5, 9]] {
            assert_eq!(z_special(&z, 2, &pair).outcome, Outcome::Fail);
        }
        assert_eq!(z_special(&z, 2, &[3]).outcome, Outcome::Pass);
        let even = TargetSummary::new(2, 2, 0).unwrap();
        assert_eq!(z_special(&even, 2, &[3, 5]).outcome, Outcome::Inapplicable);
        let unit = TargetSummary::new(1, 1, 1).unwrap();
        assert_eq!(z_special(&unit, 1, &[1, 2]).outcome, Outcome::Inapplicable);
        let straddle = TargetSummary::new(2, 1, 1).unwrap();
        let v = z_special(&straddle, 2, &[3, 7]);
        assert_eq!(v.witness["straddling_pair"], json!([3, 7]));
    }

    #[test]
    fn chi_relation_examples() {
        let z0 = TargetSummary::new(5, 0, 0).unwrap();
        assert!(chi_relation(0, &z0, 5).iter().all(|v| v.outcome == Outcome::Pass));
        let z3 = TargetSummary::new(3, 3, 3).unwrap();
        assert!(chi_relation(1, &z3, 3).iter().all(|v| v.outcome == Outcome::Pass));
        let z1 = TargetSummary::new(2, 1, 1).unwrap();
        let [eq, div] = chi_relation(0, &z1, 2);
        assert_eq!((eq.outcome, div.outcome), (Outcome::Fail, Outcome::Fail));
    }

    #[test]
    fn chi_and_z_special_agree() {
        for chi in -5i64..=5 {
            for h1 in 2..7 {
                let z = TargetSummary::new(h1, chi.unsigned_abs() as usize, chi).unwrap();
                let [_, div] = chi_relation(0, &z, h1);
                let zs = z_special(&z, h1, &[1, h1 + 1]);
                if div.outcome == Outcome::Fail {
                    assert_eq!(zs.outcome, Outcome::Fail);
                }
            }
        }
    }

    #[test]
    fn dedekind_necessary_examples() {
        assert_eq!(dedekind_necessary(2, 1, 1).outcome, Outcome::Pass);
        assert_eq!(dedekind_necessary(5, 1, 1).outcome, Outcome::Fail);
        assert_eq!(dedekind_necessary(3, 1, 2).outcome, Outcome::Pass);
        assert_eq!(dedekind_necessary(4, 2, 1).outcome, Outcome::Inapplicable);
    }

    #[test]
    fn k_special_trigger_arithmetic() {
        let y = sigma();
        let z = TargetSummary::new(2, 3, 1).unwrap();
        assert_eq!(n_bound(&y, &z), 7);
        assert_eq!(k_special(&y, &z, 2, 9, None).len(), 4);
        let quiet = k_special(&y, &z, 2, 7, None);
        assert_eq!(quiet.len(), 1);
        assert_eq!(quiet[0].outcome, Outcome::Inapplicable);
        let s3 = model("unknot_s3").ambient;
        assert_eq!(k_special(&s3, &z, 2, 99, None)[0].outcome, Outcome::Inapplicable);
    }

    #[test]
    fn k_special_model_check() {
        let m = model("sigma237_g1_synthetic");
        let z = TargetSummary::new(2, 3, 1).unwrap();
        let vs = k_special(&m.ambient, &z, 2, 9, Some(&m));
        assert!(vs.iter().all(|v| v.outcome == Outcome::Pass));
    }

    /// At genus 1, `t_0 = V_0 + χ(A_red[0]) − χ(B_red)`, so the Alexander
    /// conclusion is tied to the other three.
    #[test]
    fn k_special_conclusions_are_coupled() {
        let base = model("sigma237_g1_synthetic");
        let z = TargetSummary::new(2, 3, 1).unwrap();
        let fails = |m: &KnotModel| -> Vec<Conclusion> {
            k_special(&m.ambient, &z, 2, 9, Some(m))
                .into_iter()
                .filter(|v| v.outcome == Outcome::Fail)
                .map(|v| serde_json::from_value(v.witness["conclusion"].clone()).unwrap())
                .collect()
        };
        let mut doc = base.document().clone();
        doc.v = vec![1, 0];
        doc.a_red.get_mut("0").unwrap().tower_offset = None;
        let m = KnotModel::from_document(doc).unwrap();
        assert_eq!(fails(&m), vec![Conclusion::V0Zero, Conclusion::AlexanderTrivial]);
    }

    #[test]
    fn v0_bound_examples() {
        let t = model("trefoil_rh_s3");
        let z = TargetSummary::new(2, 5, 5).unwrap();
        assert_eq!(v0_bound(&t, &z, 2, 7).unwrap().outcome, Outcome::Pass);
        let z = TargetSummary::new(2, 3, 3).unwrap();
        assert_eq!(v0_bound(&t, &z, 2, 7).unwrap().outcome, Outcome::Fail);
        assert_eq!(v0_bound(&model("figure8_s3"), &z, 2, 7), Err(ObstructError::V0Zero));
        assert_eq!(residue_counts(2, 7), vec![3, 2]);
        // the computed trefoil surgeries always satisfy the bound
        for m in [3, 5, 7, 9, 11] {
            let z = target_from_model(&t, 2, m, None).unwrap();
            assert_eq!(v0_bound(&t, &z, 2, m).unwrap().outcome, Outcome::Pass);
        }
    }

    #[test]
    fn v0_bound_monotone_in_dim() {
        let t = model("trefoil_rh_s3");
        for q in 1..15 {
            let mut last = Outcome::Fail;
            for dim in 0..15 {
                let z = TargetSummary { h1_order: 3, dim_red: dim, chi_red: dim as i64, d_table: None, d_z: None };
                let o = v0_bound(&t, &z, 3, q).unwrap().outcome;
                assert!(!(last == Outcome::Pass && o == Outcome::Fail));
                last = o;
            }
        }
    }

    #[test]
    fn genus_bound_examples() {
        let y = sigma();
        let mut z = TargetSummary::new(1, 1, 1).unwrap();
        z.d_z = Some(Grading::from_int(4));
        assert_eq!(genus_bound(&y, &z, 1, 3).unwrap().outcome, Outcome::Fail);
        assert_eq!(genus_bound(&y, &z, 1, 2).unwrap().outcome, Outcome::Pass);
        // D(Z) = D(Y): only floor(q/p) = 0 survives
        z.d_z = y.d_min_excess();
        assert_eq!(genus_bound(&y, &z, 3, 2).unwrap().outcome, Outcome::Pass);
        assert_eq!(genus_bound(&y, &z, 1, 1).unwrap().outcome, Outcome::Fail);
        z.d_z = Some(Grading::from_int(1));
        assert_eq!(genus_bound(&y, &z, 1, 1).unwrap().outcome, Outcome::Pass);
        z.d_z = None;
        assert!(matches!(genus_bound(&y, &z, 1, 1), Err(ObstructError::MissingGradings(_))));
    }

    #[test]
    fn d_sandwich_examples() {
        for name in shipped::MODEL_NAMES {
            let v = d_sandwich(&model(name), 3, 2, None).unwrap();
            assert_eq!(v.outcome, Outcome::Pass, "{name}");
        }
        let v = d_sandwich(&model("unknot_s3"), 5, 2, None).unwrap();
        assert_eq!(v.witness["equality_branch"], json!(true));
        let v = d_sandwich(&model("sigma237_g1_synthetic"), 5, 2, None).unwrap();
        assert_eq!(v.witness["equality_branch"], json!(false));
    }

    #[test]
    fn lens_complement_examples() {
        assert_eq!(lens_complement(4, 1, 2).unwrap().candidates, vec![-2, 0]);
        assert_eq!(lens_complement(5, 2, 0).unwrap().candidates, vec![-1, 1]);
        assert!(lens_complement(6, 1, 4).unwrap().candidates.is_empty());
        assert!(lens_complement(4, 2, 2).is_err());
    }

    #[test]
    fn cosmetic_scan_examples() {
        let scan = cosmetic_pair_scan(&model("trefoil_rh_s3"), 2, &[1, 3, 5, 7], None).unwrap();
        assert!(scan.pairs.is_empty());
        let scan = cosmetic_pair_scan(&model("figure8_s3"), 2, &[1, 2, 3, 5], None).unwrap();
        assert!(scan.pairs.is_empty());
        assert_eq!(scan.skipped, vec![2]);
        // L(2,1) and L(2,3) are the same oriented manifold.
        let scan = cosmetic_pair_scan(&model("unknot_s3"), 2, &[1, 3], None).unwrap();
        assert_eq!(scan.pairs.len(), 1);
        let pair = &scan.pairs[0];
        assert!(pair.straddles && pair.chi_divisible);
        assert_eq!(cosmetic_scan_verdict(&scan).outcome, Outcome::Pass);
    }

    #[test]
    fn report_round_trips() {
        let mut r = ObstructionReport::default();
        r.push(lens_complement_verdict(4, 1, 2));
        r.push(dedekind_necessary(5, 1, 1));
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: ObstructionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
        assert!(r.any_fail());
    }
}
