//! Knot models: the finite data of a knot in an integer homology sphere
//! needed by the mapping cone.
//!
//! Gradings in a model file are absolute, in the frame where `v_k` preserves
//! grading and `h_k` lowers it by `2k`. In that frame the tower generator of
//! `A_k` sits at `d(Y) − 2V_k`. Internally every reduced piece is stored with
//! gradings relative to its own tower generator.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::f2::F2Matrix;
use crate::fmod::{FiniteUPresentation, FmodError, Generator, Grading, Parity};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("V is not non-increasing: V_{k} = {v_k} < V_{next} = {v_next}", next = k + 1)]
    MonotonicityViolation { k: usize, v_k: i64, v_next: i64 },
    #[error("genus: {0}")]
    GenusViolation(String),
    #[error("{map}_{k} does not commute with U")]
    MapNotEquivariant { k: i64, map: &'static str },
    #[error("{map}_{k} sends a generator at grading {from} to grading {to}; expected a shift of {shift}")]
    MapNotHomogeneous { k: i64, map: &'static str, from: Grading, to: Grading, shift: i64 },
    #[error("symmetry: {0}")]
    SymmetryViolation(String),
    #[error("A_red[{k}]: tower offset {found} but V_{k} forces {expected}")]
    TowerOffsetMismatch { k: i64, expected: Grading, found: Grading },
    #[error("grading {grading} in {context} is not an integer distance from d(Y) = {d}")]
    GradingNotIntegral { context: String, grading: Grading, d: Grading },
    #[error("{context}: {error}")]
    Module { context: String, error: FmodError },
}

/// Every problem found while loading one document.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub struct ModelErrors(pub Vec<ModelError>);

impl fmt::Display for ModelErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        f.write_str(&lines.join("; "))
    }
}

impl From<ModelError> for ModelErrors {
    fn from(e: ModelError) -> Self {
        ModelErrors(vec![e])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientDocument {
    pub name: String,
    pub d: Grading,
    #[serde(default)]
    pub b_red: Vec<Generator>,
    #[serde(default)]
    pub u_matrix: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDocument {
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub u_matrix: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_matrix: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_matrix: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower_offset: Option<Grading>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub name: String,
    pub ambient: AmbientDocument,
    pub genus: usize,
    #[serde(rename = "V")]
    pub v: Vec<i64>,
    #[serde(default)]
    pub a_red: BTreeMap<String, PieceDocument>,
}

/// `HF⁺(Y) = T⁺_{d(Y)} ⊕ B_red`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientSummary {
    pub name: String,
    pub d: Grading,
    /// `HF_red(Y)` with absolute gradings.
    pub b_red: FiniteUPresentation,
}

impl AmbientSummary {
    pub fn from_document(doc: &AmbientDocument) -> Result<Self, ModelErrors> {
        let mut errors = Vec::new();
        let n = doc.b_red.len();
        let u = if doc.u_matrix.is_empty() {
            F2Matrix::zeros(n, n)
        } else {
            F2Matrix::from_rows(n, n, &doc.u_matrix)
                .ok_or_else(|| ModelError::Syntax(format!("ambient u_matrix must be {n}x{n}")))?
        };
        let b_red = FiniteUPresentation::new(doc.b_red.clone(), u)
            .map_err(|e| ModelError::Module { context: "B_red".into(), error: e })?;
        for g in b_red.basis() {
            if g.grading.int_offset_from(&doc.d).is_none() {
                errors.push(ModelError::GradingNotIntegral {
                    context: "B_red".into(),
                    grading: g.grading.clone(),
                    d: doc.d.clone(),
                });
            }
        }
        if let Err(es) = b_red.validate_with_anchor(&doc.d) {
            errors.extend(es.into_iter().map(|e| ModelError::Module { context: "B_red".into(), error: e }));
        }
        if errors.is_empty() {
            Ok(Self { name: doc.name.clone(), d: doc.d.clone(), b_red })
        } else {
            Err(ModelErrors(errors))
        }
    }

    pub fn to_document(&self) -> AmbientDocument {
        AmbientDocument {
            name: self.name.clone(),
            d: self.d.clone(),
            b_red: self.b_red.basis().to_vec(),
            u_matrix: self.b_red.u_matrix().to_rows(),
        }
    }

    pub fn dim_red(&self) -> usize {
        self.b_red.dim()
    }

    /// `(even, odd)` dimensions of `B_red`.
    pub fn parity_dims(&self) -> (usize, usize) {
        self.b_red.parity_dims()
    }

    pub fn chi_red(&self) -> i64 {
        self.b_red.euler_z2()
    }

    pub fn is_l_space(&self) -> bool {
        self.b_red.dim() == 0
    }

    /// `B_red` with gradings measured from the tower bottom `d(Y)`.
    pub fn b_relative(&self) -> FiniteUPresentation {
        relative(&self.b_red, &self.d)
    }

    /// Longest parity-1 bar of `B_red`.
    pub fn max_odd_bar(&self) -> usize {
        self.b_red
            .barcode()
            .iter()
            .filter(|b| b.parity == Parity::Odd)
            .map(|b| b.length)
            .max()
            .unwrap_or(0)
    }

    /// `min{gr(y) − d(Y)}` over reduced elements, when there are any.
    pub fn d_min_excess(&self) -> Option<Grading> {
        self.b_red
            .basis()
            .iter()
            .map(|g| Grading::new(g.grading.value() - self.d.value()))
            .min()
    }
}

fn relative(m: &FiniteUPresentation, origin: &Grading) -> FiniteUPresentation {
    let basis = m
        .basis()
        .iter()
        .map(|g| Generator::new(g.label.clone(), Grading::new(g.grading.value() - origin.value()), g.parity))
        .collect();
    FiniteUPresentation::new(basis, m.u_matrix().clone()).expect("same dimensions")
}

/// `A_k^red` together with `ṽ_k, h̃_k : A_k^red → B_red`.
///
/// Gradings are relative to the tower generator of `A_k`. With `B_red`
/// measured from `d(Y)`, `ṽ_k` lowers grading by `2V_k` and `h̃_k` by `2H_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedPiece {
    pub k: i64,
    pub module: FiniteUPresentation,
    pub v: F2Matrix,
    pub h: F2Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnotModel {
    pub name: String,
    pub ambient: AmbientSummary,
    pub genus: usize,
    v: Vec<i64>,
    pieces: BTreeMap<usize, ReducedPiece>,
    document: ModelDocument,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionProfile {
    pub t: Vec<i64>,
    pub delta2: i64,
}

impl KnotModel {
    pub fn from_json(text: &str) -> Result<Self, ModelErrors> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Syntax(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self, ModelErrors> {
        let ambient = AmbientSummary::from_document(&doc.ambient)?;
        let g = doc.genus;
        let mut errors = Vec::new();

        if doc.v.len() != g + 1 {
            return Err(ModelError::Syntax(format!(
                "V must list V_0..V_{g} ({} entries), got {}",
                g + 1,
                doc.v.len()
            ))
            .into());
        }
        if let Some(&neg) = doc.v.iter().find(|&&x| x < 0) {
            errors.push(ModelError::Syntax(format!("V entries must be non-negative, got {neg}")));
        }
        for k in 0..g {
            if doc.v[k] < doc.v[k + 1] {
                errors.push(ModelError::MonotonicityViolation { k, v_k: doc.v[k], v_next: doc.v[k + 1] });
            }
        }
        if doc.v[g] != 0 {
            errors.push(ModelError::GenusViolation(format!("V_{g} = {} must vanish", doc.v[g])));
        }

        let b_rel = ambient.b_relative();
        let mut pieces = BTreeMap::new();
        for (key, piece) in &doc.a_red {
            let k: i64 = match key.trim().parse() {
                Ok(k) => k,
                Err(_) => {
                    errors.push(ModelError::Syntax(format!("a_red key `{key}` is not an integer")));
                    continue;
                }
            };
            if k < 0 {
                errors.push(ModelError::SymmetryViolation(format!(
                    "A_red[{k}] is determined by A_red[{}] and must not be given",
                    -k
                )));
                continue;
            }
            if k as usize >= g {
                errors.push(ModelError::GenusViolation(format!(
                    "A_red[{k}] given but k >= genus {g}; it is fixed to B_red"
                )));
                continue;
            }
            match load_piece(k, piece, &ambient, &b_rel, doc.v[k as usize]) {
                Ok(p) => {
                    pieces.insert(k as usize, p);
                }
                Err(es) => errors.extend(es),
            }
        }
        if let Some(p0) = pieces.get(&0) {
            if graded_ranks(&p0.v, &p0.module) != graded_ranks(&p0.h, &p0.module) {
                errors.push(ModelError::SymmetryViolation(
                    "ṽ_0 and h̃_0 have different graded ranks".into(),
                ));
            }
        }

        if !errors.is_empty() {
            return Err(ModelErrors(errors));
        }
        Ok(Self { name: doc.name.clone(), ambient, genus: g, v: doc.v.clone(), pieces, document: doc })
    }

    pub fn document(&self) -> &ModelDocument {
        &self.document
    }

    pub fn v_sequence(&self) -> &[i64] {
        &self.v
    }

    pub fn v0(&self) -> i64 {
        self.v[0]
    }

    /// `(V_k, H_k)` for any integer `k`.
    pub fn vh_value(&self, k: i64) -> (i64, i64) {
        let v = if k >= 0 {
            self.v.get(k as usize).copied().unwrap_or(0)
        } else {
            let j = -k;
            self.v.get(j as usize).copied().unwrap_or(0) + j
        };
        (v, v + k)
    }

    /// `A_k^red` with its maps, for any integer `k`.
    pub fn reduced_piece(&self, k: i64) -> ReducedPiece {
        let g = self.genus as i64;
        if k >= g || k <= -g {
            let b = self.ambient.b_relative();
            let n = b.dim();
            let (vk, hk) = self.vh_value(k);
            let (v, h) = if k >= g {
                (F2Matrix::identity(n), b.u_matrix().pow(hk as usize))
            } else {
                (b.u_matrix().pow(vk as usize), F2Matrix::identity(n))
            };
            return ReducedPiece { k, module: b, v, h };
        }
        let stored = &self.pieces_or_empty(k.unsigned_abs() as usize);
        if k >= 0 {
            ReducedPiece { k, ..stored.clone() }
        } else {
            ReducedPiece { k, module: stored.module.clone(), v: stored.h.clone(), h: stored.v.clone() }
        }
    }

    fn pieces_or_empty(&self, k: usize) -> ReducedPiece {
        self.pieces.get(&k).cloned().unwrap_or_else(|| ReducedPiece {
            k: k as i64,
            module: FiniteUPresentation::zero(),
            v: F2Matrix::zeros(self.ambient.dim_red(), 0),
            h: F2Matrix::zeros(self.ambient.dim_red(), 0),
        })
    }

    /// Longest bar among `B_red` and every `A_red[k]`.
    pub fn longest_bar(&self) -> usize {
        let mut best = self.ambient.b_red.barcode().iter().map(|b| b.length).max().unwrap_or(0);
        for p in self.pieces.values() {
            best = best.max(p.module.barcode().iter().map(|b| b.length).max().unwrap_or(0));
        }
        best
    }

    pub fn torsion_coefficients(&self) -> TorsionProfile {
        let chi_b = self.ambient.chi_red();
        let t: Vec<i64> = (0..self.genus)
            .map(|k| self.v[k] + self.pieces_or_empty(k).module.euler_z2() - chi_b)
            .collect();
        let delta2 = t
            .iter()
            .enumerate()
            .map(|(i, &ti)| if i == 0 { 2 * ti } else { 4 * ti })
            .sum();
        TorsionProfile { t, delta2 }
    }

    pub fn alexander_trivial(&self) -> bool {
        self.torsion_coefficients().t.iter().all(|&t| t == 0)
    }
}

fn graded_ranks(map: &F2Matrix, module: &FiniteUPresentation) -> BTreeMap<Grading, usize> {
    let mut by: BTreeMap<Grading, Vec<usize>> = BTreeMap::new();
    for (i, g) in module.basis().iter().enumerate() {
        by.entry(g.grading.clone()).or_default().push(i);
    }
    by.into_iter()
        .map(|(gr, cols)| {
            let mut sub = F2Matrix::zeros(map.rows(), cols.len());
            for (j, &c) in cols.iter().enumerate() {
                for r in 0..map.rows() {
                    sub.set(r, j, map.get(r, c));
                }
            }
            (gr, sub.rank())
        })
        .collect()
}

fn load_piece(
    k: i64,
    doc: &PieceDocument,
    ambient: &AmbientSummary,
    b_rel: &FiniteUPresentation,
    vk: i64,
) -> Result<ReducedPiece, Vec<ModelError>> {
    let ctx = format!("A_red[{k}]");
    let n = doc.generators.len();
    let nb = ambient.dim_red();
    let mut errors = Vec::new();

    let expected_offset = Grading::from_int(-2 * vk);
    if let Some(found) = &doc.tower_offset {
        if *found != expected_offset {
            errors.push(ModelError::TowerOffsetMismatch { k, expected: expected_offset.clone(), found: found.clone() });
        }
    }

    let parse = |rows: &[Vec<u8>], r: usize, c: usize, what: &str| {
        F2Matrix::from_rows(r, c, rows)
            .ok_or_else(|| ModelError::Syntax(format!("{ctx}: {what} must be {r}x{c}")))
    };
    let u = if doc.u_matrix.is_empty() {
        Ok(F2Matrix::zeros(n, n))
    } else {
        parse(&doc.u_matrix, n, n, "u_matrix")
    };
    let v = match &doc.v_matrix {
        Some(rows) => parse(rows, nb, n, "v_matrix"),
        None => Ok(F2Matrix::zeros(nb, n)),
    };
    let h = match &doc.h_matrix {
        Some(rows) => parse(rows, nb, n, "h_matrix"),
        None => Ok(F2Matrix::zeros(nb, n)),
    };
    let (u, v, h) = match (u, v, h) {
        (Ok(u), Ok(v), Ok(h)) => (u, v, h),
        (u, v, h) => {
            errors.extend([u.err(), v.err(), h.err()].into_iter().flatten());
            return Err(errors);
        }
    };

    let absolute = FiniteUPresentation::new(doc.generators.clone(), u.clone())
        .map_err(|e| vec![ModelError::Module { context: ctx.clone(), error: e }])?;
    for g in absolute.basis() {
        if g.grading.int_offset_from(&ambient.d).is_none() {
            errors.push(ModelError::GradingNotIntegral {
                context: ctx.clone(),
                grading: g.grading.clone(),
                d: ambient.d.clone(),
            });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    if let Err(es) = absolute.validate_with_anchor(&ambient.d) {
        errors.extend(es.into_iter().map(|e| ModelError::Module { context: ctx.clone(), error: e }));
    }

    let bu = ambient.b_red.u_matrix();
    for (name, map, shift) in [("ṽ", &v, 0i64), ("h̃", &h, -2 * k)] {
        if map.mul(&u) != bu.mul(map) {
            errors.push(ModelError::MapNotEquivariant { k, map: name });
        }
        for c in 0..n {
            for r in 0..nb {
                if map.get(r, c) {
                    let from = &absolute.basis()[c].grading;
                    let to = &ambient.b_red.basis()[r].grading;
                    if *to != from.shifted(shift) {
                        errors.push(ModelError::MapNotHomogeneous {
                            k,
                            map: name,
                            from: from.clone(),
                            to: to.clone(),
                            shift,
                        });
                    }
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    debug_assert_eq!(b_rel.dim(), nb);

    // Relative to the tower generator at d(Y) − 2V_k.
    let origin = Grading::new(ambient.d.value() + expected_offset.value());
    Ok(ReducedPiece { k, module: relative(&absolute, &origin), v, h })
}

/// A bare ambient document, or the ambient of a full model document.
pub fn load_ambient(text: &str) -> Result<AmbientSummary, ModelErrors> {
    if let Ok(doc) = serde_json::from_str::<AmbientDocument>(text) {
        return AmbientSummary::from_document(&doc);
    }
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ModelError::Syntax(e.to_string()))?;
    AmbientSummary::from_document(&doc.ambient)
}
