//! The JSON bundle format: named systems, representations, coefficient
//! tables, Morita data and amenability witnesses in one document.
//!
//! Conventions: complex scalars are two-element arrays `[re, im]`, matrices
//! are row-major nested arrays, algebra elements are arrays of per-block
//! matrices, per-g tables are indexed by group element. Parsing performs
//! structural validation only (shapes and name resolution); the semantic
//! checks live in the respective validators.

use crate::algebra::{AlgElement, C64, CMatrix, CStarAlgebra, CVector};
use crate::equivariant::{EquivariantRep, HilbertModule};
use crate::fourier::CoeffMap;
use crate::morita::ImprimitivityBimodule;
use crate::system::{Automorphism, TwistedSystem};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(String),
    #[error("shape error at {0}")]
    ShapeError(String),
    #[error("duplicate name `{0}` when merging bundles")]
    DuplicateName(String),
}

type WComplex = [f64; 2];
type WMatrix = Vec<Vec<WComplex>>;
type WElement = Vec<WMatrix>;

#[derive(Serialize, Deserialize)]
struct WAlgebra {
    block_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct WGroup {
    table: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct WAutomorphism {
    block_perm: Vec<usize>,
    unitary: WElement,
}

#[derive(Serialize, Deserialize)]
struct WSystem {
    algebra: WAlgebra,
    group: WGroup,
    alpha: Vec<WAutomorphism>,
    sigma: Vec<Vec<WElement>>,
}

#[derive(Serialize, Deserialize)]
struct WModule {
    dim: usize,
    right_action: Vec<WMatrix>,
    gram: Vec<WMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "construct", rename_all = "snake_case")]
enum WRepKind {
    Trivial,
    Regular,
    Amplified { base: String, unitary_rep: Vec<WMatrix> },
    Explicit { module: WModule, rho: Vec<WMatrix>, v: Vec<WMatrix> },
}

#[derive(Serialize, Deserialize)]
struct WRep {
    system: String,
    #[serde(flatten)]
    kind: WRepKind,
}

#[derive(Serialize, Deserialize)]
struct WCoeff {
    system: String,
    per_g: Vec<WMatrix>,
}

#[derive(Serialize, Deserialize)]
struct WBimodule {
    dim: usize,
    left_action: Vec<WMatrix>,
    right_action: Vec<WMatrix>,
    left_inner: Vec<WMatrix>,
    right_inner: Vec<WMatrix>,
}

#[derive(Serialize, Deserialize)]
struct WFramePair {
    z: Vec<WComplex>,
    zp: Vec<WComplex>,
}

#[derive(Serialize, Deserialize)]
struct WMorita {
    sigma: String,
    theta: String,
    bimodule: WBimodule,
    delta: Vec<WMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame: Option<Vec<WFramePair>>,
}

#[derive(Serialize, Deserialize)]
struct WWitness {
    system: String,
    members: Vec<String>,
}

#[derive(Serialize, Deserialize, Default)]
struct WBundle {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    systems: BTreeMap<String, WSystem>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    reps: BTreeMap<String, WRep>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    coeffs: BTreeMap<String, WCoeff>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    morita: BTreeMap<String, WMorita>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    witnesses: BTreeMap<String, WWitness>,
}

/// How a named representation is described in a bundle.
#[derive(Debug, Clone)]
pub enum RepSpec {
    Trivial,
    Regular,
    Amplified { base: String, unitary_rep: Vec<CMatrix> },
    Explicit(EquivariantRep),
}

#[derive(Debug, Clone)]
pub struct RepEntry {
    pub system: String,
    pub spec: RepSpec,
}

#[derive(Debug, Clone)]
pub struct MoritaEntry {
    pub sigma: String,
    pub theta: String,
    pub bimodule: ImprimitivityBimodule,
    pub delta: Vec<CMatrix>,
    pub frame: Option<Vec<(CVector, CVector)>>,
}

#[derive(Debug, Clone)]
pub struct WitnessEntry {
    pub system: String,
    pub members: Vec<String>,
}

/// A parsed bundle with all names resolved.
#[derive(Debug, Default, Clone)]
pub struct Bundle {
    pub systems: BTreeMap<String, Arc<TwistedSystem>>,
    pub reps: BTreeMap<String, RepEntry>,
    pub coeffs: BTreeMap<String, CoeffMap>,
    pub morita: BTreeMap<String, MoritaEntry>,
    pub witnesses: BTreeMap<String, WitnessEntry>,
}

fn matrix_to_wire(m: &CMatrix) -> WMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_wire(w: &WMatrix, ctx: &str) -> Result<CMatrix, BundleError> {
    let rows = w.len();
    if rows == 0 {
        return Err(BundleError::ShapeError(format!("{ctx}: empty matrix")));
    }
    let cols = w[0].len();
    if w.iter().any(|r| r.len() != cols) {
        return Err(BundleError::ShapeError(format!("{ctx}: ragged matrix rows")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| C64::new(w[i][j][0], w[i][j][1])))
}

fn square_matrix_from_wire(w: &WMatrix, dim: usize, ctx: &str) -> Result<CMatrix, BundleError> {
    let m = matrix_from_wire(w, ctx)?;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(BundleError::ShapeError(format!(
            "{ctx}: expected {dim}×{dim}, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn element_to_wire(e: &AlgElement) -> WElement {
    e.blocks.iter().map(matrix_to_wire).collect()
}

fn element_from_wire(w: &WElement, algebra: &CStarAlgebra, ctx: &str) -> Result<AlgElement, BundleError> {
    if w.len() != algebra.num_blocks() {
        return Err(BundleError::ShapeError(format!("{ctx}: wrong number of blocks")));
    }
    let mut blocks = Vec::with_capacity(w.len());
    for (b, wm) in w.iter().enumerate() {
        blocks.push(square_matrix_from_wire(wm, algebra.block_dims()[b], &format!("{ctx} block {b}"))?);
    }
    Ok(AlgElement { blocks })
}

fn vector_to_wire(v: &CVector) -> Vec<WComplex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn vector_from_wire(w: &[WComplex], dim: usize, ctx: &str) -> Result<CVector, BundleError> {
    if w.len() != dim {
        return Err(BundleError::ShapeError(format!("{ctx}: expected length {dim}, got {}", w.len())));
    }
    Ok(CVector::from_fn(dim, |i, _| C64::new(w[i][0], w[i][1])))
}

fn system_to_wire(sys: &TwistedSystem) -> WSystem {
    WSystem {
        algebra: WAlgebra { block_dims: sys.algebra.block_dims().to_vec() },
        group: WGroup { table: sys.group.table().to_vec() },
        alpha: sys
            .alpha
            .iter()
            .map(|a| WAutomorphism {
                block_perm: a.block_perm.clone(),
                unitary: element_to_wire(&a.unitary),
            })
            .collect(),
        sigma: sys.sigma.iter().map(|row| row.iter().map(element_to_wire).collect()).collect(),
    }
}

fn system_from_wire(name: &str, w: &WSystem) -> Result<Arc<TwistedSystem>, BundleError> {
    let algebra = CStarAlgebra::new(w.algebra.block_dims.clone())
        .map_err(|e| BundleError::ShapeError(format!("systems.{name}.algebra: {e}")))?;
    let group = crate::group::validate_group(w.group.table.clone())
        .map_err(|e| BundleError::ShapeError(format!("systems.{name}.group: {e}")))?;
    let n = group.order();
    if w.alpha.len() != n {
        return Err(BundleError::ShapeError(format!("systems.{name}.alpha: expected {n} entries")));
    }
    if w.sigma.len() != n || w.sigma.iter().any(|r| r.len() != n) {
        return Err(BundleError::ShapeError(format!("systems.{name}.sigma: expected {n}×{n} table")));
    }
    let mut alpha = Vec::with_capacity(n);
    for (g, wa) in w.alpha.iter().enumerate() {
        let unitary = element_from_wire(&wa.unitary, &algebra, &format!("systems.{name}.alpha[{g}]"))?;
        alpha.push(Automorphism { block_perm: wa.block_perm.clone(), unitary });
    }
    let mut sigma = Vec::with_capacity(n);
    for (g, row) in w.sigma.iter().enumerate() {
        let mut out = Vec::with_capacity(n);
        for (h, we) in row.iter().enumerate() {
            out.push(element_from_wire(we, &algebra, &format!("systems.{name}.sigma[{g}][{h}]"))?);
        }
        sigma.push(out);
    }
    let sys = TwistedSystem::new_unchecked(algebra, group, alpha, sigma)
        .map_err(|e| BundleError::ShapeError(format!("systems.{name}: {e}")))?;
    Ok(Arc::new(sys))
}

fn matrices_from_wire(
    ws: &[WMatrix],
    expected_len: usize,
    dim: usize,
    ctx: &str,
) -> Result<Vec<CMatrix>, BundleError> {
    if ws.len() != expected_len {
        return Err(BundleError::ShapeError(format!(
            "{ctx}: expected {expected_len} matrices, got {}",
            ws.len()
        )));
    }
    ws.iter()
        .enumerate()
        .map(|(i, w)| square_matrix_from_wire(w, dim, &format!("{ctx}[{i}]")))
        .collect()
}

impl Bundle {
    pub fn to_json(&self) -> String {
        let wire = WBundle {
            systems: self
                .systems
                .iter()
                .map(|(k, v)| (k.clone(), system_to_wire(v)))
                .collect(),
            reps: self
                .reps
                .iter()
                .map(|(k, entry)| {
                    let kind = match &entry.spec {
                        RepSpec::Trivial => WRepKind::Trivial,
                        RepSpec::Regular => WRepKind::Regular,
                        RepSpec::Amplified { base, unitary_rep } => WRepKind::Amplified {
                            base: base.clone(),
                            unitary_rep: unitary_rep.iter().map(matrix_to_wire).collect(),
                        },
                        RepSpec::Explicit(rep) => WRepKind::Explicit {
                            module: WModule {
                                dim: rep.module.dim,
                                right_action: rep.module.right_action.iter().map(matrix_to_wire).collect(),
                                gram: rep.module.gram.iter().map(matrix_to_wire).collect(),
                            },
                            rho: rep.rho.iter().map(matrix_to_wire).collect(),
                            v: rep.v.iter().map(matrix_to_wire).collect(),
                        },
                    };
                    (k.clone(), WRep { system: entry.system.clone(), kind })
                })
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| {
                    let system = self
                        .systems
                        .iter()
                        .find(|(_, s)| Arc::ptr_eq(s, &c.system) || s.approx_eq(&c.system, 1e-12))
                        .map(|(n, _)| n.clone())
                        .unwrap_or_default();
                    (k.clone(), WCoeff { system, per_g: c.per_g.iter().map(matrix_to_wire).collect() })
                })
                .collect(),
            morita: self
                .morita
                .iter()
                .map(|(k, m)| {
                    (
                        k.clone(),
                        WMorita {
                            sigma: m.sigma.clone(),
                            theta: m.theta.clone(),
                            bimodule: WBimodule {
                                dim: m.bimodule.dim,
                                left_action: m.bimodule.left_action.iter().map(matrix_to_wire).collect(),
                                right_action: m.bimodule.right_action.iter().map(matrix_to_wire).collect(),
                                left_inner: m.bimodule.left_inner.iter().map(matrix_to_wire).collect(),
                                right_inner: m.bimodule.right_inner.iter().map(matrix_to_wire).collect(),
                            },
                            delta: m.delta.iter().map(matrix_to_wire).collect(),
                            frame: m.frame.as_ref().map(|pairs| {
                                pairs
                                    .iter()
                                    .map(|(z, zp)| WFramePair { z: vector_to_wire(z), zp: vector_to_wire(zp) })
                                    .collect()
                            }),
                        },
                    )
                })
                .collect(),
            witnesses: self
                .witnesses
                .iter()
                .map(|(k, w)| {
                    (k.clone(), WWitness { system: w.system.clone(), members: w.members.clone() })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("wire types serialize")
    }

    pub fn from_json(text: &str) -> Result<Bundle, BundleError> {
        let wire: WBundle = serde_json::from_str(text).map_err(|e| BundleError::ParseError {
            line: e.line(),
            message: e.to_string(),
        })?;
        Bundle::from_wire(wire)
    }

    fn from_wire(wire: WBundle) -> Result<Bundle, BundleError> {
        let mut bundle = Bundle::default();
        for (name, ws) in &wire.systems {
            bundle.systems.insert(name.clone(), system_from_wire(name, ws)?);
        }
        for (name, wr) in &wire.reps {
            let sys = bundle
                .systems
                .get(&wr.system)
                .ok_or_else(|| BundleError::UnresolvedReference(wr.system.clone()))?;
            let t = sys.algebra.total_dim();
            let n = sys.group.order();
            let spec = match &wr.kind {
                WRepKind::Trivial => RepSpec::Trivial,
                WRepKind::Regular => RepSpec::Regular,
                WRepKind::Amplified { base, unitary_rep } => {
                    if !wire.reps.contains_key(base) {
                        return Err(BundleError::UnresolvedReference(base.clone()));
                    }
                    let ms: Result<Vec<CMatrix>, _> = unitary_rep
                        .iter()
                        .enumerate()
                        .map(|(g, w)| matrix_from_wire(w, &format!("reps.{name}.unitary_rep[{g}]")))
                        .collect();
                    let ms = ms?;
                    if ms.len() != n {
                        return Err(BundleError::ShapeError(format!(
                            "reps.{name}.unitary_rep: expected {n} matrices"
                        )));
                    }
                    RepSpec::Amplified { base: base.clone(), unitary_rep: ms }
                }
                WRepKind::Explicit { module, rho, v } => {
                    let d = module.dim;
                    let rep = EquivariantRep {
                        module: HilbertModule {
                            algebra: sys.algebra.clone(),
                            dim: d,
                            right_action: matrices_from_wire(
                                &module.right_action,
                                t,
                                d,
                                &format!("reps.{name}.module.right_action"),
                            )?,
                            gram: matrices_from_wire(&module.gram, t, d, &format!("reps.{name}.module.gram"))?,
                        },
                        rho: matrices_from_wire(rho, t, d, &format!("reps.{name}.rho"))?,
                        v: matrices_from_wire(v, n, d, &format!("reps.{name}.v"))?,
                    };
                    RepSpec::Explicit(rep)
                }
            };
            bundle.reps.insert(name.clone(), RepEntry { system: wr.system.clone(), spec });
        }
        for (name, wc) in &wire.coeffs {
            let sys = bundle
                .systems
                .get(&wc.system)
                .ok_or_else(|| BundleError::UnresolvedReference(wc.system.clone()))?;
            let t = sys.algebra.total_dim();
            let per_g = matrices_from_wire(&wc.per_g, sys.group.order(), t, &format!("coeffs.{name}.per_g"))?;
            bundle
                .coeffs
                .insert(name.clone(), CoeffMap { system: sys.clone(), per_g, provenance: None });
        }
        for (name, wm) in &wire.morita {
            let sigma = bundle
                .systems
                .get(&wm.sigma)
                .ok_or_else(|| BundleError::UnresolvedReference(wm.sigma.clone()))?;
            let theta = bundle
                .systems
                .get(&wm.theta)
                .ok_or_else(|| BundleError::UnresolvedReference(wm.theta.clone()))?;
            let (ta, tb) = (sigma.algebra.total_dim(), theta.algebra.total_dim());
            let d = wm.bimodule.dim;
            let bimodule = ImprimitivityBimodule {
                algebra_a: sigma.algebra.clone(),
                algebra_b: theta.algebra.clone(),
                dim: d,
                left_action: matrices_from_wire(
                    &wm.bimodule.left_action,
                    ta,
                    d,
                    &format!("morita.{name}.bimodule.left_action"),
                )?,
                right_action: matrices_from_wire(
                    &wm.bimodule.right_action,
                    tb,
                    d,
                    &format!("morita.{name}.bimodule.right_action"),
                )?,
                left_inner: matrices_from_wire(
                    &wm.bimodule.left_inner,
                    ta,
                    d,
                    &format!("morita.{name}.bimodule.left_inner"),
                )?,
                right_inner: matrices_from_wire(
                    &wm.bimodule.right_inner,
                    tb,
                    d,
                    &format!("morita.{name}.bimodule.right_inner"),
                )?,
            };
            let delta = matrices_from_wire(&wm.delta, sigma.group.order(), d, &format!("morita.{name}.delta"))?;
            let frame = match &wm.frame {
                None => None,
                Some(pairs) => Some(
                    pairs
                        .iter()
                        .enumerate()
                        .map(|(i, p)| {
                            Ok((
                                vector_from_wire(&p.z, d, &format!("morita.{name}.frame[{i}].z"))?,
                                vector_from_wire(&p.zp, d, &format!("morita.{name}.frame[{i}].zp"))?,
                            ))
                        })
                        .collect::<Result<Vec<_>, BundleError>>()?,
                ),
            };
            bundle.morita.insert(
                name.clone(),
                MoritaEntry { sigma: wm.sigma.clone(), theta: wm.theta.clone(), bimodule, delta, frame },
            );
        }
        for (name, ww) in &wire.witnesses {
            if !bundle.systems.contains_key(&ww.system) {
                return Err(BundleError::UnresolvedReference(ww.system.clone()));
            }
            for member in &ww.members {
                let coeff = bundle
                    .coeffs
                    .get(member)
                    .ok_or_else(|| BundleError::UnresolvedReference(member.clone()))?;
                if !coeff.system.approx_eq(bundle.systems[&ww.system].as_ref(), 1e-12) {
                    return Err(BundleError::ShapeError(format!(
                        "witnesses.{name}: member {member} lives over a different system"
                    )));
                }
            }
            bundle
                .witnesses
                .insert(name.clone(), WitnessEntry { system: ww.system.clone(), members: ww.members.clone() });
        }
        Ok(bundle)
    }

    /// Construct the representation named `name` from its spec.
    pub fn build_rep(
        &self,
        name: &str,
    ) -> Result<(Arc<TwistedSystem>, EquivariantRep), BundleError> {
        let entry = self
            .reps
            .get(name)
            .ok_or_else(|| BundleError::UnresolvedReference(name.to_string()))?;
        let sys = self.systems[&entry.system].clone();
        let rep = match &entry.spec {
            RepSpec::Trivial => crate::equivariant::trivial_rep(&sys),
            RepSpec::Regular => crate::equivariant::regular_rep(&sys),
            RepSpec::Amplified { base, unitary_rep } => {
                let (_, base_rep) = self.build_rep(base)?;
                crate::equivariant::amplify_rep(
                    &sys,
                    &base_rep,
                    unitary_rep,
                    &crate::algebra::ScalarTolerance::default(),
                )
                .map_err(|e| BundleError::ShapeError(format!("reps.{name}: {e}")))?
            }
            RepSpec::Explicit(rep) => rep.clone(),
        };
        Ok((sys, rep))
    }

    /// Merge another bundle into this one; duplicate names are rejected.
    pub fn merge(&mut self, other: Bundle) -> Result<(), BundleError> {
        for (k, v) in other.systems {
            if self.systems.insert(k.clone(), v).is_some() {
                return Err(BundleError::DuplicateName(k));
            }
        }
        for (k, v) in other.reps {
            if self.reps.insert(k.clone(), v).is_some() {
                return Err(BundleError::DuplicateName(k));
            }
        }
        for (k, v) in other.coeffs {
            if self.coeffs.insert(k.clone(), v).is_some() {
                return Err(BundleError::DuplicateName(k));
            }
        }
        for (k, v) in other.morita {
            if self.morita.insert(k.clone(), v).is_some() {
                return Err(BundleError::DuplicateName(k));
            }
        }
        for (k, v) in other.witnesses {
            if self.witnesses.insert(k.clone(), v).is_some() {
                return Err(BundleError::DuplicateName(k));
            }
        }
        Ok(())
    }
}

/// Read and structurally validate a bundle file.
pub fn parse_bundle(path: &Path) -> Result<Bundle, BundleError> {
    parse_bundles(std::slice::from_ref(&path.to_path_buf()))
}

/// Read several bundle files as one document: names may cross file
/// boundaries. A name defined in two files is accepted only when both
/// definitions serialize identically.
pub fn parse_bundles(paths: &[std::path::PathBuf]) -> Result<Bundle, BundleError> {
    fn insert<T: Serialize>(
        map: &mut BTreeMap<String, T>,
        key: String,
        value: T,
    ) -> Result<(), BundleError> {
        if let Some(existing) = map.get(&key) {
            let same = serde_json::to_string(existing).ok() == serde_json::to_string(&value).ok();
            if !same {
                return Err(BundleError::DuplicateName(key));
            }
            return Ok(());
        }
        map.insert(key, value);
        Ok(())
    }
    let mut merged = WBundle::default();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| BundleError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let wire: WBundle = serde_json::from_str(&text).map_err(|e| BundleError::ParseError {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })?;
        for (k, v) in wire.systems {
            insert(&mut merged.systems, k, v)?;
        }
        for (k, v) in wire.reps {
            insert(&mut merged.reps, k, v)?;
        }
        for (k, v) in wire.coeffs {
            insert(&mut merged.coeffs, k, v)?;
        }
        for (k, v) in wire.morita {
            insert(&mut merged.morita, k, v)?;
        }
        for (k, v) in wire.witnesses {
            insert(&mut merged.witnesses, k, v)?;
        }
    }
    Bundle::from_wire(merged)
}

/// Write a bundle to a file.
pub fn write_bundle(bundle: &Bundle, path: &Path) -> Result<(), BundleError> {
    std::fs::write(path, bundle.to_json()).map_err(|e| BundleError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
