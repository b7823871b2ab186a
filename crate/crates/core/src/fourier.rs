//! Elements of `L(Σ)` (maps `G×A → A`, linear in the second variable), the
//! coefficient map of an equivariant representation, the embeddings of
//! scalar group functions and of algebra elements, positive-definiteness
//! checking, and norm computations.
//!
//! Positive definiteness of `T` is decided through complete positivity of
//! the Schur-type map `Θ_T` on `M_{|G|}(A)` whose `(g,h)` entry applies
//! `Φ_{g,h}(a) = α_g(T_{g⁻¹h}(α_g⁻¹(a·σ(g,g⁻¹h)*)))·σ(g,g⁻¹h)`: the map is
//! completely positive iff all its blockwise Choi matrices are positive.
//! A sampled checker instantiates the defining matrix condition on random
//! tuples and cross-validates the Choi reduction; the two may never
//! disagree in the falsifying direction.

use crate::algebra::{max_modulus, AlgElement, C64, CMatrix, CStarAlgebra, CVector, ScalarTolerance};
use crate::equivariant::{trivial_rep, EquivariantRep};
use crate::system::TwistedSystem;
use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("coefficient maps live over different systems")]
    SystemMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sample count must be at least 1")]
    InvalidSamples,
    #[error("checkers disagree: Choi verdict positive but a sampled tuple failed (eig {0:.3e})")]
    CheckerDivergence(f64),
}

/// Provenance of a coefficient map: the representation and vectors it came
/// from, with the decomposition bound `‖x‖·‖y‖`.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub rep: Arc<EquivariantRep>,
    pub x: CVector,
    pub y: CVector,
    pub bound: f64,
}

/// An element of `L(Σ)`: one linear self-map of `A` per group element.
#[derive(Debug, Clone)]
pub struct CoeffMap {
    pub system: Arc<TwistedSystem>,
    pub per_g: Vec<CMatrix>,
    pub provenance: Option<Provenance>,
}

/// Tolerance used when deciding whether two coefficient maps refer to the
/// same system.
const SYSTEM_EQ_TOL: f64 = 1e-9;

impl CoeffMap {
    pub fn apply(&self, g: usize, a: &AlgElement) -> AlgElement {
        self.system.algebra.element_from_vec(&(&self.per_g[g] * a.vectorize()))
    }

    /// Entrywise gap between the per-g tables of two maps.
    pub fn table_gap(&self, other: &CoeffMap) -> f64 {
        self.per_g
            .iter()
            .zip(&other.per_g)
            .map(|(a, b)| max_modulus(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Group elements where the map is nonzero.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.per_g.len()).filter(|&g| max_modulus(&self.per_g[g]) > tol).collect()
    }

    fn check_same_system(&self, other: &CoeffMap) -> Result<(), FourierError> {
        if !self.system.approx_eq(&other.system, SYSTEM_EQ_TOL) {
            return Err(FourierError::SystemMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &CoeffMap) -> Result<CoeffMap, FourierError> {
        self.check_same_system(other)?;
        Ok(CoeffMap {
            system: self.system.clone(),
            per_g: self.per_g.iter().zip(&other.per_g).map(|(a, b)| a + b).collect(),
            provenance: None,
        })
    }

    pub fn scale(&self, lambda: C64) -> CoeffMap {
        CoeffMap {
            system: self.system.clone(),
            per_g: self.per_g.iter().map(|m| m * lambda).collect(),
            provenance: None,
        }
    }

    /// Pointwise-in-g composition `(T·T')(g,a) = T(g, T'(g,a))`.
    pub fn compose(&self, other: &CoeffMap) -> Result<CoeffMap, FourierError> {
        self.check_same_system(other)?;
        Ok(CoeffMap {
            system: self.system.clone(),
            per_g: self.per_g.iter().zip(&other.per_g).map(|(a, b)| a * b).collect(),
            provenance: None,
        })
    }
}

/// The identity `I_Σ(g,a) = a` (the coefficient of the trivial representation
/// at the unit).
pub fn identity(system: &Arc<TwistedSystem>) -> CoeffMap {
    embed_algebra_element(system, &system.algebra.unit())
}

/// Coefficient map `T_{ρ,v,x,y}(g,a) = ⟨x, ρ(a)·v(g)·y⟩`.
pub fn coefficient_map(
    system: &Arc<TwistedSystem>,
    rep: &Arc<EquivariantRep>,
    x: &CVector,
    y: &CVector,
) -> Result<CoeffMap, FourierError> {
    if rep.module.algebra != system.algebra || rep.v.len() != system.group.order() {
        return Err(FourierError::ShapeMismatch("representation does not fit the system".into()));
    }
    if x.len() != rep.dim() || y.len() != rep.dim() {
        return Err(FourierError::ShapeMismatch("vector length vs carrier dimension".into()));
    }
    let t = system.algebra.total_dim();
    let mut per_g = Vec::with_capacity(system.group.order());
    for g in 0..system.group.order() {
        let vy = &rep.v[g] * y;
        let mut m = CMatrix::zeros(t, t);
        for k in 0..t {
            let col = rep.module.inner(x, &(&rep.rho[k] * &vy)).vectorize();
            m.set_column(k, &col);
        }
        per_g.push(m);
    }
    let bound = rep.module.vector_norm(x) * rep.module.vector_norm(y);
    Ok(CoeffMap {
        system: system.clone(),
        per_g,
        provenance: Some(Provenance { rep: rep.clone(), x: x.clone(), y: y.clone(), bound }),
    })
}

/// Embedding of a scalar group function: `T^f(g,a) = f(g)·a`.
pub fn embed_group_function(system: &Arc<TwistedSystem>, f: &[C64]) -> CoeffMap {
    let t = system.algebra.total_dim();
    CoeffMap {
        system: system.clone(),
        per_g: f.iter().map(|&c| CMatrix::identity(t, t) * c).collect(),
        provenance: None,
    }
}

/// Embedding of an algebra element: `T^b(g,a) = b·a`, the coefficient
/// `T_{ℓ,α,b*,1}` of the trivial representation.
pub fn embed_algebra_element(system: &Arc<TwistedSystem>, b: &AlgElement) -> CoeffMap {
    let lm = system.algebra.left_mul_matrix(b);
    let rep = Arc::new(trivial_rep(system));
    let x = b.adjoint().vectorize();
    let y = system.algebra.unit().vectorize();
    let bound = b.operator_norm();
    CoeffMap {
        system: system.clone(),
        per_g: vec![lm; system.group.order()],
        provenance: Some(Provenance { rep, x, y, bound }),
    }
}

/// The maps `Φ_{g,h}` of the Schur-type operator associated with `T`, as
/// matrices on the flat coordinates of `A`.
pub fn phi_matrices(t_map: &CoeffMap) -> Vec<Vec<CMatrix>> {
    let sys = &t_map.system;
    let n = sys.group.order();
    let mut rows = Vec::with_capacity(n);
    for g in 0..n {
        let ag = sys.alpha_matrix(g);
        let ag_inv = sys.alpha[g].inverse().matrix(&sys.algebra);
        let mut row = Vec::with_capacity(n);
        for h in 0..n {
            let k = sys.group.mul(sys.group.inv(g), h);
            let s = sys.sigma(g, k);
            let rs = sys.algebra.right_mul_matrix(s);
            let rs_star = sys.algebra.right_mul_matrix(&s.adjoint());
            row.push(rs * ag * &t_map.per_g[k] * &ag_inv * rs_star);
        }
        rows.push(row);
    }
    rows
}

/// How a verdict was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PDMethod {
    Choi,
    Sampled,
}

/// A concrete falsifying tuple `(g_i, a_i)` with the negative eigenvalue of
/// its matrix.
#[derive(Debug, Clone)]
pub struct PDCertificate {
    pub tuple: Vec<(usize, AlgElement)>,
    pub eigenvalue: f64,
}

/// Outcome of a positive-definiteness check.
#[derive(Debug, Clone)]
pub struct PDVerdict {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub certificate: Option<PDCertificate>,
    pub method: PDMethod,
}

/// Decide positive definiteness of `T` through the blockwise Choi matrices
/// of its Schur-type map. On failure, a falsifying tuple is extracted when
/// possible (the verdict stands either way).
pub fn pd_check(t_map: &CoeffMap, tol: &ScalarTolerance) -> PDVerdict {
    let sys = &t_map.system;
    let alg = &sys.algebra;
    let n = sys.group.order();
    let phi = phi_matrices(t_map);
    let mut min_eig = f64::INFINITY;
    let mut skew: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (b, &nb) in alg.block_dims().iter().enumerate() {
        for (c, &nc) in alg.block_dims().iter().enumerate() {
            let rows = n * nb * n * nc;
            let mut choi = CMatrix::zeros(rows, rows);
            for g in 0..n {
                for h in 0..n {
                    let m = &phi[g][h];
                    for i in 0..nb {
                        for j in 0..nb {
                            let col_in = alg.coord(b, i, j);
                            for k in 0..nc {
                                for l in 0..nc {
                                    let val = m[(alg.coord(c, k, l), col_in)];
                                    if val.norm_sqr() != 0.0 {
                                        let row = (g * nb + i) * (n * nc) + (g * nc + k);
                                        let col = (h * nb + j) * (n * nc) + (h * nc + l);
                                        choi[(row, col)] = val;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let herm = (&choi + choi.adjoint()).scale(0.5);
            let anti = (&choi - choi.adjoint()).scale(0.5);
            skew = skew.max(anti.norm());
            for &e in herm.symmetric_eigen().eigenvalues.iter() {
                min_eig = min_eig.min(e);
                scale = scale.max(e.abs());
            }
        }
    }
    let threshold = tol.at_scale(scale);
    let positive = min_eig >= -threshold && skew <= threshold;
    let reported = if skew > threshold { min_eig.min(-skew) } else { min_eig };
    let certificate = if positive { None } else { confirm_not_pd(t_map, tol) };
    PDVerdict { positive, min_eigenvalue: reported, certificate, method: PDMethod::Choi }
}

/// The matrix of the defining positive-definiteness condition for a concrete
/// tuple `(g_i, a_i)`, computed entirely at the element level.
pub fn paper_matrix(t_map: &CoeffMap, tuple: &[(usize, AlgElement)]) -> Vec<Vec<AlgElement>> {
    let sys = &t_map.system;
    tuple
        .iter()
        .map(|&(gi, ref ai)| {
            tuple
                .iter()
                .map(|&(gj, ref aj)| {
                    let k = sys.group.mul(sys.group.inv(gi), gj);
                    let s = sys.sigma(gi, k);
                    let inner = ai.adjoint().mul(aj).mul(&s.adjoint());
                    let pulled = sys.apply_alpha_inv(gi, &inner);
                    sys.apply_alpha(gi, &t_map.apply(k, &pulled)).mul(s)
                })
                .collect()
        })
        .collect()
}

struct TupleEig {
    min_eig: f64,
    skew: f64,
    scale: f64,
    block: usize,
    eigvec: CVector,
}

fn tuple_min_eig(alg: &CStarAlgebra, entries: &[Vec<AlgElement>]) -> TupleEig {
    let n = entries.len();
    let mut out = TupleEig {
        min_eig: f64::INFINITY,
        skew: 0.0,
        scale: 0.0,
        block: 0,
        eigvec: CVector::zeros(0),
    };
    for (b, &nb) in alg.block_dims().iter().enumerate() {
        let dim = n * nb;
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                let blk = &entries[i][j].blocks[b];
                for p in 0..nb {
                    for q in 0..nb {
                        m[(i * nb + p, j * nb + q)] = blk[(p, q)];
                    }
                }
            }
        }
        let herm = (&m + m.adjoint()).scale(0.5);
        let anti = (&m - m.adjoint()).scale(0.5);
        out.skew = out.skew.max(anti.norm());
        let eig = herm.symmetric_eigen();
        for (idx, &e) in eig.eigenvalues.iter().enumerate() {
            out.scale = out.scale.max(e.abs());
            if e < out.min_eig {
                out.min_eig = e;
                out.block = b;
                out.eigvec = eig.eigenvectors.column(idx).into_owned();
            }
        }
    }
    out
}

/// Best rank-one factorization of a vector over `tuple-index ⊗ block-row`.
fn rank_one_split(xi: &CVector, n: usize, nb: usize) -> (CVector, CVector) {
    let m = CMatrix::from_fn(n, nb, |i, p| xi[i * nb + p]);
    if nb == 1 {
        return (m.column(0).into_owned(), CVector::from_element(1, C64::new(1.0, 0.0)));
    }
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("svd with vectors");
    let vt = svd.v_t.as_ref().expect("svd with vectors");
    let s0 = svd.singular_values[0];
    (u.column(0).into_owned() * C64::new(s0, 0.0), vt.row(0).adjoint())
}

fn reported_min(e: &TupleEig, threshold: f64) -> f64 {
    // positivity needs self-adjointness too: a skew defect is reported as a
    // negative value, matching the Choi-side convention
    if e.skew > threshold {
        e.min_eig.min(-e.skew)
    } else {
        e.min_eig
    }
}

/// Directed search for a falsifying tuple: start from the full basis tuple,
/// project the worst eigenvector onto a product-structured tuple, then a few
/// rescaling-descent rounds; falls back to the full tuple.
pub fn confirm_not_pd(t_map: &CoeffMap, tol: &ScalarTolerance) -> Option<PDCertificate> {
    let sys = &t_map.system;
    let alg = &sys.algebra;
    let n = sys.group.order();
    let t = alg.total_dim();
    let full: Vec<(usize, AlgElement)> = (0..n)
        .flat_map(|g| (0..t).map(move |k| (g, k)))
        .map(|(g, k)| (g, alg.basis_element(k)))
        .collect();
    let m_full = paper_matrix(t_map, &full);
    let eig = tuple_min_eig(alg, &m_full);
    let threshold = tol.at_scale(eig.scale);
    let full_reported = reported_min(&eig, threshold);
    if full_reported >= -threshold {
        return None;
    }
    let fallback = PDCertificate { tuple: full.clone(), eigenvalue: full_reported };
    if eig.min_eig >= -threshold {
        // failure is purely a self-adjointness defect; no eigenvector to
        // shrink along, the full tuple stands as the witness
        return Some(fallback);
    }

    // Project onto one element per group index: a_g = Σ_k u_{(g,k)} e_k.
    let nb = alg.block_dims()[eig.block];
    let (u, _w) = rank_one_split(&eig.eigvec, full.len(), nb);
    let mut tuple: Vec<(usize, AlgElement)> = (0..n)
        .map(|g| {
            let mut coords = CVector::zeros(t);
            for k in 0..t {
                coords[k] = u[g * t + k];
            }
            (g, alg.element_from_vec(&coords))
        })
        .collect();
    let max_norm = tuple.iter().map(|(_, a)| a.operator_norm()).fold(0.0, f64::max);
    tuple.retain(|(_, a)| a.operator_norm() > 1e-10 * max_norm);
    if tuple.is_empty() {
        return Some(fallback);
    }

    let mut best: Option<PDCertificate> = None;
    for _round in 0..3 {
        let m = paper_matrix(t_map, &tuple);
        let e = tuple_min_eig(alg, &m);
        let thr = tol.at_scale(e.scale);
        let rep = reported_min(&e, thr);
        if rep < -thr && best.as_ref().is_none_or(|b| rep < b.eigenvalue) {
            best = Some(PDCertificate { tuple: tuple.clone(), eigenvalue: rep });
        } else if best.is_some() {
            break;
        }
        // rescale by the tuple components of the current worst eigenvector
        let nb2 = alg.block_dims()[e.block];
        let (c, _) = rank_one_split(&e.eigvec, tuple.len(), nb2);
        for (i, (_, a)) in tuple.iter_mut().enumerate() {
            *a = a.scale(c[i]);
        }
        let mx = tuple.iter().map(|(_, a)| a.operator_norm()).fold(0.0, f64::max);
        if mx < 1e-14 {
            break;
        }
        for (_, a) in tuple.iter_mut() {
            *a = a.scale(C64::new(1.0 / mx, 0.0));
        }
    }
    Some(best.unwrap_or(fallback))
}

/// Randomized instantiation of the defining condition: draws tuples
/// `(g_i, a_i)` with repetition (after first trying the plain group
/// enumeration) and eigen-tests the resulting matrices.
pub fn pd_check_sampled(
    t_map: &CoeffMap,
    samples: usize,
    seed: u64,
    tol: &ScalarTolerance,
) -> Result<PDVerdict, FourierError> {
    if samples == 0 {
        return Err(FourierError::InvalidSamples);
    }
    let sys = &t_map.system;
    let alg = &sys.algebra;
    let n = sys.group.order();
    let mut rng = crate::random::seeded(seed);
    let mut min_seen = f64::INFINITY;
    for s in 0..samples {
        let tuple: Vec<(usize, AlgElement)> = if s == 0 {
            (0..n).map(|g| (g, alg.unit())).collect()
        } else {
            let len = rng.gen_range(1..=2 * n);
            (0..len)
                .map(|_| (rng.gen_range(0..n), crate::random::element(&mut rng, alg)))
                .collect()
        };
        let m = paper_matrix(t_map, &tuple);
        let e = tuple_min_eig(alg, &m);
        let threshold = tol.at_scale(e.scale);
        let reported = if e.skew > threshold { e.min_eig.min(-e.skew) } else { e.min_eig };
        min_seen = min_seen.min(reported);
        if reported < -threshold {
            return Ok(PDVerdict {
                positive: false,
                min_eigenvalue: reported,
                certificate: Some(PDCertificate { tuple, eigenvalue: e.min_eig }),
                method: PDMethod::Sampled,
            });
        }
    }
    Ok(PDVerdict {
        positive: true,
        min_eigenvalue: min_seen,
        certificate: None,
        method: PDMethod::Sampled,
    })
}

/// Run both checkers and fail hard if they disagree in the falsifying
/// direction (sampled finds a violation where the Choi check certified
/// positivity).
pub fn pd_check_cross(
    t_map: &CoeffMap,
    samples: usize,
    seed: u64,
    tol: &ScalarTolerance,
) -> Result<PDVerdict, FourierError> {
    let choi = pd_check(t_map, tol);
    let sampled = pd_check_sampled(t_map, samples, seed, tol)?;
    if choi.positive && !sampled.positive {
        return Err(FourierError::CheckerDivergence(sampled.min_eigenvalue));
    }
    Ok(choi)
}

/// Norm bracket returned by [`sup_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: Option<f64>,
}

/// `‖T‖_∞ = sup_g ‖T_g‖`. Positive-definite maps get the exact value
/// `‖T_e(1)‖`; otherwise a bracket from alternating maximization (lower) and
/// the `√(dim A)`-scaled singular-value bound together with the provenance
/// bound (upper).
pub fn sup_norm(t_map: &CoeffMap, tol: &ScalarTolerance, seed: u64) -> NormBracket {
    let sys = &t_map.system;
    let verdict = pd_check(t_map, tol);
    if verdict.positive {
        let e = sys.group.identity();
        let exact = t_map.apply(e, &sys.algebra.unit()).operator_norm();
        return NormBracket { lower: exact, upper: exact, exact: Some(exact) };
    }
    let t = sys.algebra.total_dim() as f64;
    let mut upper = t_map
        .per_g
        .iter()
        .map(|m| if max_modulus(m) == 0.0 { 0.0 } else { m.singular_values().max() })
        .fold(0.0, f64::max)
        * t.sqrt();
    if let Some(p) = &t_map.provenance {
        upper = upper.min(p.bound);
    }
    let mut rng = crate::random::seeded(seed);
    let mut lower: f64 = 0.0;
    for g in 0..sys.group.order() {
        let mut starts = vec![sys.algebra.unit()];
        for _ in 0..4 {
            starts.push(crate::random::unitary_element(&mut rng, &sys.algebra));
        }
        for start in starts {
            lower = lower.max(polish_norm(t_map, g, start));
        }
    }
    NormBracket { lower: lower.min(upper), upper, exact: None }
}

/// Alternating maximization of `‖T_g(a)‖` over unit-norm `a`: alternately
/// linearize at the top singular pair of `T_g(a)` and maximize the linear
/// functional over the unit ball (at its polar decomposition).
fn polish_norm(t_map: &CoeffMap, g: usize, start: AlgElement) -> f64 {
    let alg = &t_map.system.algebra;
    let mut a = {
        let n = start.operator_norm();
        if n < 1e-14 {
            alg.unit()
        } else {
            start.scale(C64::new(1.0 / n, 0.0))
        }
    };
    let m = &t_map.per_g[g];
    let mut best = t_map.apply(g, &a).operator_norm();
    for _ in 0..30 {
        let b = t_map.apply(g, &a);
        // top singular triple over blocks
        let mut top: Option<(f64, usize, CVector, CVector)> = None;
        for (blk, mat) in b.blocks.iter().enumerate() {
            if max_modulus(mat) == 0.0 {
                continue;
            }
            let svd = mat.clone().svd(true, true);
            let s0 = svd.singular_values[0];
            if top.as_ref().is_none_or(|(s, _, _, _)| s0 > *s) {
                let u = svd.u.as_ref().unwrap().column(0).into_owned();
                let v = svd.v_t.as_ref().unwrap().row(0).adjoint();
                top = Some((s0, blk, u, v));
            }
        }
        let Some((_, blk, u, v)) = top else { break };
        // functional φ(δ) = Re u^H (T_g δ)_blk v = Re(cᵀ·M·vec δ)
        let nb = alg.block_dims()[blk];
        let mut c = CVector::zeros(alg.total_dim());
        for i in 0..nb {
            for j in 0..nb {
                c[alg.coord(blk, i, j)] = u[i].conj() * v[j];
            }
        }
        let lambda = m.transpose() * c;
        let mut lift = alg.element_from_vec(&lambda);
        lift = AlgElement { blocks: lift.blocks.iter().map(|b| b.conjugate()).collect() };
        // maximize Re tr(lift^H δ) over ‖δ‖ ≤ 1: δ = polar(lift)
        let mut polar_blocks = Vec::with_capacity(lift.blocks.len());
        for pb in &lift.blocks {
            if pb.nrows() == 1 {
                let z = pb[(0, 0)];
                let val = if z.norm() < 1e-14 { C64::new(1.0, 0.0) } else { z / z.norm() };
                polar_blocks.push(CMatrix::from_element(1, 1, val));
            } else if max_modulus(pb) < 1e-14 {
                polar_blocks.push(CMatrix::identity(pb.nrows(), pb.ncols()));
            } else {
                let svd = pb.clone().svd(true, true);
                polar_blocks.push(svd.u.as_ref().unwrap() * svd.v_t.as_ref().unwrap());
            }
        }
        a = AlgElement { blocks: polar_blocks };
        let val = t_map.apply(g, &a).operator_norm();
        if val <= best + 1e-13 {
            best = best.max(val);
            break;
        }
        best = val;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ONE;
    use crate::equivariant::regular_rep;
    use crate::group::FiniteGroup;
    use crate::system::{validate_system, Automorphism};

    fn tol() -> ScalarTolerance {
        ScalarTolerance::uniform(1e-8)
    }

    fn sys_triv() -> Arc<TwistedSystem> {
        Arc::new(TwistedSystem::trivial(CStarAlgebra::scalars(), FiniteGroup::cyclic(2)))
    }

    fn sys_m2_triv() -> Arc<TwistedSystem> {
        Arc::new(TwistedSystem::trivial(CStarAlgebra::full(2), FiniteGroup::cyclic(2)))
    }

    fn sys_tw() -> Arc<TwistedSystem> {
        let group = FiniteGroup::klein();
        let algebra = CStarAlgebra::scalars();
        let n = group.order();
        let mut sigma = vec![vec![algebra.unit(); n]; n];
        for g in 0..n {
            for h in 0..n {
                if (g % 2) * (h / 2) % 2 == 1 {
                    sigma[g][h] = algebra.unit().scale(C64::new(-1.0, 0.0));
                }
            }
        }
        let alpha = vec![Automorphism::identity(&algebra); n];
        Arc::new(validate_system(algebra, group, alpha, sigma, &ScalarTolerance::default()).unwrap())
    }

    #[test]
    fn trivial_rep_unit_coefficient_is_identity() {
        let sys = sys_m2_triv();
        let rep = Arc::new(trivial_rep(&sys));
        let x = sys.algebra.unit().vectorize();
        let t = coefficient_map(&sys, &rep, &x, &x).unwrap();
        assert!(t.table_gap(&identity(&sys)) < 1e-13);
    }

    #[test]
    fn regular_rep_delta_coefficient() {
        let sys = sys_triv();
        let rep = Arc::new(regular_rep(&sys));
        let mut delta_e = CVector::zeros(rep.dim());
        delta_e[0] = ONE; // basis vector at (e, unit coordinate)
        let t = coefficient_map(&sys, &rep, &delta_e, &delta_e).unwrap();
        // T(g,a) = a·[g = e]
        assert!((t.per_g[0][(0, 0)] - ONE).norm() < 1e-14);
        assert!(max_modulus(&t.per_g[1]) < 1e-14);
    }

    #[test]
    fn zero_vector_gives_zero_map() {
        let sys = sys_triv();
        let rep = Arc::new(trivial_rep(&sys));
        let x = CVector::from_element(1, ONE);
        let zero = CVector::zeros(1);
        let t = coefficient_map(&sys, &rep, &x, &zero).unwrap();
        assert!(t.per_g.iter().all(|m| max_modulus(m) == 0.0));
    }

    #[test]
    fn algebra_embedding_is_multiplicative() {
        let sys = sys_m2_triv();
        let alg = &sys.algebra;
        let e12 = alg.basis_element(alg.coord(0, 0, 1));
        let e21 = alg.basis_element(alg.coord(0, 1, 0));
        let t12 = embed_algebra_element(&sys, &e12);
        let t21 = embed_algebra_element(&sys, &e21);
        let prod = t12.compose(&t21).unwrap();
        let expect = embed_algebra_element(&sys, &e12.mul(&e21));
        assert!(prod.table_gap(&expect) < 1e-13);

        // noncommutativity witness with gap ≥ 0.5
        let other = t21.compose(&t12).unwrap();
        assert!(prod.table_gap(&other) >= 0.5);
    }

    #[test]
    fn group_function_embedding() {
        let sys = sys_triv();
        let f = embed_group_function(&sys, &[ONE, C64::new(-1.0, 0.0)]);
        assert!((f.per_g[1][(0, 0)] + ONE).norm() < 1e-15);
        let ff = embed_group_function(&sys, &[ONE, ONE]);
        assert!(ff.table_gap(&identity(&sys)) < 1e-15);
        let prod = f.compose(&f).unwrap();
        assert!(prod.table_gap(&identity(&sys)) < 1e-15);

        // the scalar copy is central
        let b = embed_algebra_element(&sys, &sys.algebra.unit().scale(C64::new(0.3, 0.7)));
        let left = f.compose(&b).unwrap();
        let right = b.compose(&f).unwrap();
        assert!(left.table_gap(&right) < 1e-15);
    }

    #[test]
    fn identity_and_composition_laws() {
        let sys = sys_tw();
        let f = embed_group_function(
            &sys,
            &[ONE, C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)],
        );
        let composed = f.compose(&identity(&sys)).unwrap();
        assert!(composed.table_gap(&f) < 1e-15);
    }

    #[test]
    fn scalar_pd_examples() {
        let sys = sys_triv();
        let good = embed_group_function(&sys, &[ONE, C64::new(-1.0, 0.0)]);
        let v = pd_check(&good, &tol());
        assert!(v.positive, "min eig {}", v.min_eigenvalue);

        let bad = embed_group_function(&sys, &[ONE, C64::new(2.0, 0.0)]);
        let v = pd_check(&bad, &tol());
        assert!(!v.positive);
        assert!(v.min_eigenvalue <= -1.0 + 1e-9, "min eig {}", v.min_eigenvalue);
        let cert = v.certificate.expect("certificate extracted");
        assert!(cert.eigenvalue <= -1.0 + 1e-9);
        // the certificate is a genuine falsifier
        let m = paper_matrix(&bad, &cert.tuple);
        let (min_eig, _) = crate::algebra::matrix_over_algebra_min_eig(&sys.algebra, &m);
        assert!(min_eig < -1e-6);
    }

    #[test]
    fn identity_is_positive_definite() {
        for sys in [sys_triv(), sys_m2_triv(), sys_tw()] {
            let v = pd_check(&identity(&sys), &tol());
            assert!(v.positive);
        }
    }

    #[test]
    fn diagonal_coefficients_are_positive_definite() {
        let sys = sys_tw();
        let rep = Arc::new(regular_rep(&sys));
        let mut rng = crate::random::seeded(3);
        for _ in 0..5 {
            let x = crate::random::vector(&mut rng, rep.dim());
            let t = coefficient_map(&sys, &rep, &x, &x).unwrap();
            let v = pd_check(&t, &tol());
            assert!(v.positive, "min eig {}", v.min_eigenvalue);
            let s = pd_check_sampled(&t, 50, 11, &tol()).unwrap();
            assert!(s.positive);
        }
    }

    #[test]
    fn sampled_finds_scalar_counterexample() {
        let sys = sys_triv();
        let bad = embed_group_function(&sys, &[ONE, C64::new(2.0, 0.0)]);
        let v = pd_check_sampled(&bad, 100, 0, &tol()).unwrap();
        assert!(!v.positive);
        assert!(v.certificate.is_some());
        assert!(pd_check_sampled(&bad, 0, 0, &tol()).is_err());
    }

    #[test]
    fn cross_check_agrees() {
        let sys = sys_tw();
        let rep = Arc::new(regular_rep(&sys));
        let mut rng = crate::random::seeded(5);
        let x = crate::random::vector(&mut rng, rep.dim());
        let t = coefficient_map(&sys, &rep, &x, &x).unwrap();
        pd_check_cross(&t, 40, 1, &tol()).unwrap();
    }

    #[test]
    fn sup_norm_of_pd_map_is_exact() {
        let sys = sys_tw();
        let rep = Arc::new(regular_rep(&sys));
        let mut rng = crate::random::seeded(9);
        let x = crate::random::vector(&mut rng, rep.dim());
        let t = coefficient_map(&sys, &rep, &x, &x).unwrap();
        let b = sup_norm(&t, &tol(), 0);
        let expect = rep.module.inner(&x, &x).operator_norm();
        assert!(b.exact.is_some());
        assert!((b.lower - expect).abs() < 1e-10 * expect.max(1.0));
    }

    #[test]
    fn sup_norm_of_algebra_embedding_attains_norm() {
        let sys = sys_m2_triv();
        let alg = &sys.algebra;
        let e12 = alg.basis_element(alg.coord(0, 0, 1));
        let t = embed_algebra_element(&sys, &e12);
        let b = sup_norm(&t, &tol(), 0);
        assert!((b.lower - 1.0).abs() < 1e-10, "lower {}", b.lower);
        assert!((b.upper - 1.0).abs() < 1e-10, "upper {}", b.upper);

        let mut rng = crate::random::seeded(4);
        let r = crate::random::element(&mut rng, alg);
        let tr = embed_algebra_element(&sys, &r);
        let br = sup_norm(&tr, &tol(), 0);
        let expect = r.operator_norm();
        assert!(br.lower <= br.upper + 1e-12);
        assert!((br.lower - expect).abs() < 1e-8 * expect.max(1.0), "{} vs {expect}", br.lower);
    }

    #[test]
    fn sup_norm_of_zero_map() {
        let sys = sys_triv();
        let zero = identity(&sys).scale(C64::new(0.0, 0.0));
        let b = sup_norm(&zero, &tol(), 0);
        assert_eq!(b, NormBracket { lower: 0.0, upper: 0.0, exact: Some(0.0) });
    }

    #[test]
    fn system_mismatch_is_rejected() {
        let a = identity(&sys_triv());
        let b = identity(&sys_tw());
        assert!(matches!(a.compose(&b), Err(FourierError::SystemMismatch)));
        assert!(matches!(a.add(&b), Err(FourierError::SystemMismatch)));
    }

    #[test]
    fn sums_of_coefficients_are_direct_sum_coefficients() {
        let sys = sys_m2_triv();
        let rep1 = Arc::new(trivial_rep(&sys));
        let rep2 = Arc::new(regular_rep(&sys));
        let mut rng = crate::random::seeded(21);
        let (x1, y1) = (
            crate::random::vector(&mut rng, rep1.dim()),
            crate::random::vector(&mut rng, rep1.dim()),
        );
        let (x2, y2) = (
            crate::random::vector(&mut rng, rep2.dim()),
            crate::random::vector(&mut rng, rep2.dim()),
        );
        let t1 = coefficient_map(&sys, &rep1, &x1, &y1).unwrap();
        let t2 = coefficient_map(&sys, &rep2, &x2, &y2).unwrap();
        let sum = t1.add(&t2).unwrap();
        let rep = Arc::new(crate::equivariant::direct_sum_reps(&rep1, &rep2));
        let x = crate::equivariant::direct_sum_vector(&x1, &x2);
        let y = crate::equivariant::direct_sum_vector(&y1, &y2);
        let direct = coefficient_map(&sys, &rep, &x, &y).unwrap();
        assert!(sum.table_gap(&direct) < 1e-9);
    }
}
