//! Imprimitivity bimodules, compatible actions, conjugates, product actions,
//! induced representations, coefficient transfer and span reconstruction.
//!
//! A bimodule stores four coordinate tensors on its carrier: the left and
//! right actions (one matrix per algebra basis element) and the two inner
//! products. The B-valued inner product is conjugate-linear in the first
//! variable (`vec(⟨z,z'⟩_B)_k = z^H·R_k·z'`), the A-valued one is linear in
//! the first (`vec(_A⟨z,z'⟩)_k = zᵀ·L_k·conj(z')`). With these conventions
//! the conjugate bimodule swaps the two inner-product tensors verbatim and
//! conjugates the action matrices.

use crate::algebra::{max_modulus, AlgElement, C64, CMatrix, CStarAlgebra, CVector, ScalarTolerance};
use crate::equivariant::{
    tensor_quotient, validate_equivariant, EquivariantRep, HilbertModule, QuotientWitness,
    RepError,
};
use crate::fourier::{CoeffMap, FourierError};
use crate::system::{
    check_group_conjugacy, AlgebraIsomorphism, GroupIsomorphism, TwistedSystem,
};
use crate::transport::{TransportKind, TransportReport};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoritaError {
    #[error("tensor shapes are inconsistent: {0}")]
    ShapeMismatch(String),
    #[error("bimodule invariant `{what}` fails (defect {defect:.3e})")]
    BimoduleInvalid { what: String, defect: f64 },
    #[error("compatibility _A⟨z,z'⟩·z'' = z·⟨z',z''⟩_B fails at basis triple ({i},{j},{k})")]
    CompatibilityFails { i: usize, j: usize, k: usize, defect: f64 },
    #[error("left inner products do not span the left algebra")]
    NotFullLeft,
    #[error("right inner products do not span the right algebra")]
    NotFullRight,
    #[error("‖_A⟨z,z⟩‖ ≠ ‖⟨z,z⟩_B‖ ({left:.6e} vs {right:.6e})")]
    NormMismatch { left: f64, right: f64 },
    #[error("{side} inner product is not positive (min eigenvalue {min_eig:.3e})")]
    InnerNotPositive { side: &'static str, min_eig: f64 },
    #[error("compatible-action bullet {which} fails at g={g}, h={h} (defect {defect:.3e})")]
    BulletFails { which: usize, g: usize, h: usize, defect: f64 },
    #[error("middle algebras or systems of the two actions do not match")]
    MiddleMismatch,
    #[error("objects live over different systems")]
    SystemMismatch,
    #[error("partition-of-unity solve residual {0:.3e} above tolerance")]
    FrameSolveFailed(f64),
    #[error("span reconstruction residual {0:.3e} above tolerance")]
    ReconstructionResidual(f64),
    #[error("algebras are not commutative")]
    NotCommutative,
    #[error("relation phi(_A⟨z,z'⟩) = ⟨z',z⟩_B is inconsistent (residual {0:.3e})")]
    PhiInconsistent(f64),
    #[error("transferred coefficient disagrees with the induced-representation coefficient (defect {0:.3e})")]
    TransferIdentityFailed(f64),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
}

/// An A–B imprimitivity bimodule on the carrier `ℂ^dim`.
#[derive(Debug, Clone)]
pub struct ImprimitivityBimodule {
    pub algebra_a: CStarAlgebra,
    pub algebra_b: CStarAlgebra,
    pub dim: usize,
    /// Carrier matrix of `z ↦ e_k·z`, one per A basis element.
    pub left_action: Vec<CMatrix>,
    /// Carrier matrix of `z ↦ z·f_k`, one per B basis element.
    pub right_action: Vec<CMatrix>,
    /// `vec(_A⟨z,z'⟩)_k = zᵀ·left_inner[k]·conj(z')`.
    pub left_inner: Vec<CMatrix>,
    /// `vec(⟨z,z'⟩_B)_k = z^H·right_inner[k]·z'`.
    pub right_inner: Vec<CMatrix>,
}

impl ImprimitivityBimodule {
    pub fn left_act(&self, a: &AlgElement, z: &CVector) -> CVector {
        self.left_action_matrix(a) * z
    }

    pub fn left_action_matrix(&self, a: &AlgElement) -> CMatrix {
        combine(&self.left_action, &a.vectorize(), self.dim)
    }

    pub fn right_action_matrix(&self, b: &AlgElement) -> CMatrix {
        combine(&self.right_action, &b.vectorize(), self.dim)
    }

    /// `_A⟨z, z'⟩`, linear in the first variable.
    pub fn inner_left(&self, z: &CVector, zp: &CVector) -> AlgElement {
        let t = self.algebra_a.total_dim();
        let mut coords = CVector::zeros(t);
        for k in 0..t {
            coords[k] = (z.transpose() * &self.left_inner[k] * zp.conjugate())[(0, 0)];
        }
        self.algebra_a.element_from_vec(&coords)
    }

    /// `⟨z, z'⟩_B`, linear in the second variable.
    pub fn inner_right(&self, z: &CVector, zp: &CVector) -> AlgElement {
        let t = self.algebra_b.total_dim();
        let mut coords = CVector::zeros(t);
        for k in 0..t {
            coords[k] = (z.adjoint() * &self.right_inner[k] * zp)[(0, 0)];
        }
        self.algebra_b.element_from_vec(&coords)
    }

    /// Module norm (the two inner products induce the same one).
    pub fn vector_norm(&self, z: &CVector) -> f64 {
        self.inner_right(z, z).operator_norm().sqrt()
    }

    /// The identity equivalence `Z = A` over one algebra.
    pub fn identity_equivalence(algebra: &CStarAlgebra) -> Self {
        let t = algebra.total_dim();
        let basis = algebra.basis();
        let left_action: Vec<CMatrix> = basis.iter().map(|e| algebra.left_mul_matrix(e)).collect();
        let right_action: Vec<CMatrix> = basis.iter().map(|e| algebra.right_mul_matrix(e)).collect();
        let mut left_inner = vec![CMatrix::zeros(t, t); t];
        let mut right_inner = vec![CMatrix::zeros(t, t); t];
        for i in 0..t {
            for j in 0..t {
                let li = basis[i].mul(&basis[j].adjoint()).vectorize(); // b_i·b_j*
                let ri = basis[i].adjoint().mul(&basis[j]).vectorize(); // b_i*·b_j
                for k in 0..t {
                    left_inner[k][(i, j)] = li[k];
                    right_inner[k][(i, j)] = ri[k];
                }
            }
        }
        ImprimitivityBimodule {
            algebra_a: algebra.clone(),
            algebra_b: algebra.clone(),
            dim: t,
            left_action,
            right_action,
            left_inner,
            right_inner,
        }
    }

    /// Validate every bimodule invariant on the bases (plus random vectors
    /// for the norm coincidence).
    pub fn validate(&self, tol: &ScalarTolerance) -> Result<(), MoritaError> {
        let ta = self.algebra_a.total_dim();
        let tb = self.algebra_b.total_dim();
        let d = self.dim;
        if self.left_action.len() != ta
            || self.right_action.len() != tb
            || self.left_inner.len() != ta
            || self.right_inner.len() != tb
        {
            return Err(MoritaError::ShapeMismatch("coordinate tensor lengths".into()));
        }
        let thr = |scale: f64| tol.at_scale(scale.max(1.0));
        let fail = |what: &str, defect: f64| MoritaError::BimoduleInvalid { what: what.into(), defect };

        // unital actions
        let dl = (self.left_action_matrix(&self.algebra_a.unit()) - CMatrix::identity(d, d)).norm();
        if dl > thr(1.0) {
            return Err(fail("unital left action", dl));
        }
        let dr = (self.right_action_matrix(&self.algebra_b.unit()) - CMatrix::identity(d, d)).norm();
        if dr > thr(1.0) {
            return Err(fail("unital right action", dr));
        }
        // left action multiplicative, right action anti-multiplicative as operators
        for k in 0..ta {
            for l in 0..ta {
                let prod = self.algebra_a.basis_element(k).mul(&self.algebra_a.basis_element(l));
                let defect =
                    (self.left_action_matrix(&prod) - &self.left_action[k] * &self.left_action[l]).norm();
                if defect > thr(1.0) {
                    return Err(fail("left action multiplicativity", defect));
                }
            }
        }
        for k in 0..tb {
            for l in 0..tb {
                let prod = self.algebra_b.basis_element(k).mul(&self.algebra_b.basis_element(l));
                let defect = (self.right_action_matrix(&prod)
                    - &self.right_action[l] * &self.right_action[k])
                    .norm();
                if defect > thr(1.0) {
                    return Err(fail("right action multiplicativity", defect));
                }
            }
        }
        // actions commute
        for k in 0..ta {
            for l in 0..tb {
                let defect = (&self.left_action[k] * &self.right_action[l]
                    - &self.right_action[l] * &self.left_action[k])
                    .norm();
                if defect > thr(1.0) {
                    return Err(fail("left/right actions commute", defect));
                }
            }
        }
        // inner-product symmetry
        for k in 0..tb {
            let defect =
                (&self.right_inner[k] - self.right_inner[self.algebra_b.star_perm(k)].adjoint()).norm();
            if defect > thr(self.right_inner[k].norm()) {
                return Err(fail("right inner symmetry", defect));
            }
        }
        for k in 0..ta {
            let defect =
                (&self.left_inner[k] - self.left_inner[self.algebra_a.star_perm(k)].adjoint()).norm();
            if defect > thr(self.left_inner[k].norm()) {
                return Err(fail("left inner symmetry", defect));
            }
        }
        // ⟨z, z'·f_m⟩_B = ⟨z,z'⟩_B·f_m and adjointability of the left action
        for m in 0..tb {
            let rm = self.algebra_b.right_mul_matrix(&self.algebra_b.basis_element(m));
            for k in 0..tb {
                let lhs = &self.right_inner[k] * &self.right_action[m];
                let mut rhs = CMatrix::zeros(d, d);
                for l in 0..tb {
                    if rm[(k, l)].norm_sqr() != 0.0 {
                        rhs += &self.right_inner[l] * rm[(k, l)];
                    }
                }
                let defect = (lhs - &rhs).norm();
                if defect > thr(rhs.norm()) {
                    return Err(fail("right inner compatibility", defect));
                }
            }
        }
        for k in 0..ta {
            let star = self.algebra_a.star_perm(k);
            for m in 0..tb {
                let lhs = self.left_action[k].adjoint() * &self.right_inner[m];
                let rhs = &self.right_inner[m] * &self.left_action[star];
                let defect = (lhs - &rhs).norm();
                if defect > thr(rhs.norm()) {
                    return Err(fail("left action adjointable", defect));
                }
            }
        }
        // _A⟨e_m·z, z'⟩ = e_m·_A⟨z,z'⟩
        for m in 0..ta {
            let lm = self.algebra_a.left_mul_matrix(&self.algebra_a.basis_element(m));
            for k in 0..ta {
                let lhs = self.left_action[m].transpose() * &self.left_inner[k];
                let mut rhs = CMatrix::zeros(d, d);
                for l in 0..ta {
                    if lm[(k, l)].norm_sqr() != 0.0 {
                        rhs += &self.left_inner[l] * lm[(k, l)];
                    }
                }
                let defect = (lhs - &rhs).norm();
                if defect > thr(rhs.norm()) {
                    return Err(fail("left inner compatibility", defect));
                }
            }
        }
        // the imprimitivity relation on basis triples
        for i in 0..d {
            let ei = CVector::from_fn(d, |r, _| if r == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            for j in 0..d {
                let ej = CVector::from_fn(d, |r, _| if r == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
                let aij = self.inner_left(&ei, &ej);
                let la = self.left_action_matrix(&aij);
                let bj = |k: usize| {
                    CVector::from_fn(d, |r, _| if r == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                };
                for k in 0..d {
                    let lhs = &la * bj(k);
                    let bjk = self.inner_right(&ej, &bj(k));
                    let rhs = self.right_action_matrix(&bjk) * &ei;
                    let defect = (lhs - rhs).norm();
                    if defect > thr(1.0 + aij.operator_norm()) {
                        return Err(MoritaError::CompatibilityFails { i, j, k, defect });
                    }
                }
            }
        }
        // positivity of both inner products
        let (min_r, skew_r) = gram_min_eig(&self.algebra_b, d, &self.right_inner);
        if skew_r > thr(1.0) || min_r < -thr(1.0) {
            return Err(MoritaError::InnerNotPositive { side: "right", min_eig: min_r.min(-skew_r) });
        }
        let (min_l, skew_l) = gram_min_eig(&self.algebra_a, d, &self.left_inner);
        if skew_l > thr(1.0) || min_l < -thr(1.0) {
            return Err(MoritaError::InnerNotPositive { side: "left", min_eig: min_l.min(-skew_l) });
        }
        // fullness
        if coordinate_rank(&self.left_inner, tol) < ta {
            return Err(MoritaError::NotFullLeft);
        }
        if coordinate_rank(&self.right_inner, tol) < tb {
            return Err(MoritaError::NotFullRight);
        }
        // norm coincidence on basis and random vectors
        let mut rng = crate::random::seeded(0);
        let mut vectors: Vec<CVector> = (0..d)
            .map(|i| CVector::from_fn(d, |r, _| if r == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
            .collect();
        for _ in 0..20 {
            vectors.push(crate::random::vector(&mut rng, d));
        }
        for z in &vectors {
            let left = self.inner_left(z, z).operator_norm();
            let right = self.inner_right(z, z).operator_norm();
            if (left - right).abs() > thr(left.max(right)) {
                return Err(MoritaError::NormMismatch { left, right });
            }
        }
        Ok(())
    }
}

fn combine(tensors: &[CMatrix], coords: &CVector, dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for (k, t) in tensors.iter().enumerate() {
        if coords[k].norm_sqr() != 0.0 {
            m += t * coords[k];
        }
    }
    m
}

/// Min Hermitian eigenvalue and skew defect of an inner-product Gram in the
/// faithful block picture. Both storage conventions put the inner value at
/// basis pair `(i,j)` into entry `(i,j)` of the coordinate matrix, so one
/// assembly covers the left and the right inner product.
fn gram_min_eig(alg: &CStarAlgebra, dim: usize, inner: &[CMatrix]) -> (f64, f64) {
    let mut min_eig = f64::INFINITY;
    let mut skew: f64 = 0.0;
    for (b, &nb) in alg.block_dims().iter().enumerate() {
        let n = dim * nb;
        let mut m = CMatrix::zeros(n, n);
        for p in 0..nb {
            for q in 0..nb {
                let g = &inner[alg.coord(b, p, q)];
                for i in 0..dim {
                    for j in 0..dim {
                        m[(i * nb + p, j * nb + q)] = g[(i, j)];
                    }
                }
            }
        }
        let herm = (&m + m.adjoint()).scale(0.5);
        let anti = (&m - m.adjoint()).scale(0.5);
        skew = skew.max(anti.norm());
        for &e in herm.symmetric_eigen().eigenvalues.iter() {
            min_eig = min_eig.min(e);
        }
    }
    (min_eig, skew)
}

/// Rank of the span of the inner-product values inside the algebra.
fn coordinate_rank(inner: &[CMatrix], tol: &ScalarTolerance) -> usize {
    let t = inner.len();
    let d = inner[0].nrows();
    let mut m = CMatrix::zeros(t, d * d);
    for (k, g) in inner.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                m[(k, i * d + j)] = g[(i, j)];
            }
        }
    }
    let sv = m.singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s > tol.at_scale(max).max(1e-12 * max)).count()
}

/// A `(Σ,Θ)`-compatible action on an imprimitivity bimodule.
#[derive(Debug, Clone)]
pub struct CompatibleAction {
    pub sigma: Arc<TwistedSystem>,
    pub theta: Arc<TwistedSystem>,
    pub bimodule: ImprimitivityBimodule,
    pub delta: Vec<CMatrix>,
}

/// Validate the four defining bullets (and the derived left-inner bullet)
/// exhaustively over the group and the bases.
pub fn validate_compatible_action(
    sigma: &Arc<TwistedSystem>,
    theta: &Arc<TwistedSystem>,
    bimodule: ImprimitivityBimodule,
    delta: Vec<CMatrix>,
    tol: &ScalarTolerance,
) -> Result<CompatibleAction, MoritaError> {
    if bimodule.algebra_a != sigma.algebra || bimodule.algebra_b != theta.algebra {
        return Err(MoritaError::SystemMismatch);
    }
    if sigma.group != theta.group || delta.len() != sigma.group.order() {
        return Err(MoritaError::ShapeMismatch("one carrier map per group element".into()));
    }
    bimodule.validate(tol)?;
    let n = sigma.group.order();
    let ta = sigma.algebra.total_dim();
    let tb = theta.algebra.total_dim();
    let d = bimodule.dim;
    let thr = |scale: f64| tol.at_scale(scale.max(1.0));

    for g in 0..n {
        if delta[g].nrows() != d || delta[g].ncols() != d {
            return Err(MoritaError::ShapeMismatch("delta carrier dimensions".into()));
        }
        let sv = delta[g].singular_values();
        if sv.iter().fold(f64::INFINITY, |a, &b| a.min(b)) < 1e-12 * sv.max() {
            return Err(MoritaError::BulletFails { which: 0, g, h: 0, defect: 0.0 });
        }
        let am = sigma.alpha_matrix(g);
        let bm = theta.alpha_matrix(g);
        // bullet 1: δ(g)·L(e_m) = L(α_g(e_m))·δ(g)
        for m in 0..ta {
            let ag = sigma.algebra.element_from_vec(&(am * sigma.algebra.basis_element(m).vectorize()));
            let defect =
                (&delta[g] * &bimodule.left_action[m] - bimodule.left_action_matrix(&ag) * &delta[g]).norm();
            if defect > thr(delta[g].norm()) {
                return Err(MoritaError::BulletFails { which: 1, g, h: m, defect });
            }
        }
        // bullet 2: δ(g)·R(f_m) = R(β_g(f_m))·δ(g)
        for m in 0..tb {
            let bg = theta.algebra.element_from_vec(&(bm * theta.algebra.basis_element(m).vectorize()));
            let defect = (&delta[g] * &bimodule.right_action[m]
                - bimodule.right_action_matrix(&bg) * &delta[g])
                .norm();
            if defect > thr(delta[g].norm()) {
                return Err(MoritaError::BulletFails { which: 2, g, h: m, defect });
            }
        }
        // bullet 4: ⟨δ(g)z, δ(g)ζ⟩_B = β_g(⟨z,ζ⟩_B)
        for k in 0..tb {
            let lhs = delta[g].adjoint() * &bimodule.right_inner[k] * &delta[g];
            let mut rhs = CMatrix::zeros(d, d);
            for l in 0..tb {
                if bm[(k, l)].norm_sqr() != 0.0 {
                    rhs += &bimodule.right_inner[l] * bm[(k, l)];
                }
            }
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm().max(bimodule.right_inner[k].norm())) {
                return Err(MoritaError::BulletFails { which: 4, g, h: k, defect });
            }
        }
        // derived bullet 5: _A⟨δ(g)z, δ(g)ζ⟩ = α_g(_A⟨z,ζ⟩)
        for k in 0..ta {
            let lhs = delta[g].transpose() * &bimodule.left_inner[k] * delta[g].conjugate();
            let mut rhs = CMatrix::zeros(d, d);
            for l in 0..ta {
                if am[(k, l)].norm_sqr() != 0.0 {
                    rhs += &bimodule.left_inner[l] * am[(k, l)];
                }
            }
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm().max(bimodule.left_inner[k].norm())) {
                return Err(MoritaError::BulletFails { which: 5, g, h: k, defect });
            }
        }
    }
    // bullet 3: δ(g)δ(h) = L(σ(g,h))·δ(gh)·R(θ(g,h)*)
    for g in 0..n {
        for h in 0..n {
            let gh = sigma.group.mul(g, h);
            let lhs = &delta[g] * &delta[h];
            let rhs = bimodule.left_action_matrix(sigma.sigma(g, h))
                * &delta[gh]
                * bimodule.right_action_matrix(&theta.sigma(g, h).adjoint());
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm()) {
                return Err(MoritaError::BulletFails { which: 3, g, h, defect });
            }
        }
    }
    Ok(CompatibleAction { sigma: sigma.clone(), theta: theta.clone(), bimodule, delta })
}

/// The trivial self-equivalence: `α` as a `(Σ,Σ)`-compatible action on `A`.
pub fn alpha_as_action(sigma: &Arc<TwistedSystem>, tol: &ScalarTolerance) -> Result<CompatibleAction, MoritaError> {
    let bimodule = ImprimitivityBimodule::identity_equivalence(&sigma.algebra);
    let delta = (0..sigma.group.order()).map(|g| sigma.alpha_matrix(g).clone()).collect();
    validate_compatible_action(sigma, sigma, bimodule, delta, tol)
}

/// The conjugate (reverse) bimodule with `δ̃(g)z̃ = (δ(g)z)~`, a
/// `(Θ,Σ)`-compatible action. Conjugation is the coordinatewise antilinear
/// identification, so `(z̃)~ = z` exactly.
pub fn conjugate_action(action: &CompatibleAction) -> CompatibleAction {
    let z = &action.bimodule;
    let ta = z.algebra_a.total_dim();
    let tb = z.algebra_b.total_dim();
    let left_action: Vec<CMatrix> = (0..tb)
        .map(|k| z.right_action[z.algebra_b.star_perm(k)].conjugate())
        .collect();
    let right_action: Vec<CMatrix> = (0..ta)
        .map(|k| z.left_action[z.algebra_a.star_perm(k)].conjugate())
        .collect();
    let bimodule = ImprimitivityBimodule {
        algebra_a: z.algebra_b.clone(),
        algebra_b: z.algebra_a.clone(),
        dim: z.dim,
        left_action,
        right_action,
        left_inner: z.right_inner.clone(),
        right_inner: z.left_inner.clone(),
    };
    let delta = action.delta.iter().map(|m| m.conjugate()).collect();
    CompatibleAction {
        sigma: action.theta.clone(),
        theta: action.sigma.clone(),
        bimodule,
        delta,
    }
}

/// Coordinates of `z̃` for a vector `z`.
pub fn conjugate_vector(z: &CVector) -> CVector {
    z.conjugate()
}

/// The coefficient `S_{δ,z,ζ}(g,a) = ⟨z, a·(δ(g)ζ)⟩_B`, as one linear map
/// `A → B` per group element, with the bound `‖z‖·‖ζ‖`.
#[derive(Debug, Clone)]
pub struct SCoeff {
    pub per_g: Vec<CMatrix>,
    pub bound: f64,
}

pub fn s_coefficient(action: &CompatibleAction, z: &CVector, zeta: &CVector) -> SCoeff {
    let bim = &action.bimodule;
    let ta = bim.algebra_a.total_dim();
    let tb = bim.algebra_b.total_dim();
    let n = action.sigma.group.order();
    let mut per_g = Vec::with_capacity(n);
    for g in 0..n {
        let dz = &action.delta[g] * zeta;
        let mut m = CMatrix::zeros(tb, ta);
        for k in 0..ta {
            let col = bim.inner_right(z, &(&bim.left_action[k] * &dz)).vectorize();
            m.set_column(k, &col);
        }
        per_g.push(m);
    }
    SCoeff { per_g, bound: bim.vector_norm(z) * bim.vector_norm(zeta) }
}

/// A partition-of-unity frame: pairs `(z_i, z_i')` with
/// `Σ_i ⟨z_i, z_i'⟩_B = 1_B`, and the constant `K = (Σ ‖z_i‖‖z_i'‖)²`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub pairs: Vec<(CVector, CVector)>,
    pub k: f64,
    pub residual: f64,
}

/// Solve for a frame over the carrier basis by least squares and verify the
/// residual.
pub fn partition_of_unity(
    bimodule: &ImprimitivityBimodule,
    tol: &ScalarTolerance,
) -> Result<Frame, MoritaError> {
    let d = bimodule.dim;
    let tb = bimodule.algebra_b.total_dim();
    // unknowns: z'_i ∈ ℂ^d for each basis z_i = e_i
    let mut m = CMatrix::zeros(tb, d * d);
    for k in 0..tb {
        for i in 0..d {
            for j in 0..d {
                m[(k, i * d + j)] = bimodule.right_inner[k][(i, j)];
            }
        }
    }
    let rhs = bimodule.algebra_b.unit().vectorize();
    let svd = m.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-12).map_err(|_| MoritaError::FrameSolveFailed(f64::INFINITY))?;
    let mut pairs: Vec<(CVector, CVector)> = (0..d)
        .map(|i| {
            let e = CVector::from_fn(d, |r, _| if r == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            let zp = CVector::from_fn(d, |j, _| x[i * d + j]);
            (e, zp)
        })
        .collect();
    let max_weight = pairs
        .iter()
        .map(|(z, zp)| bimodule.vector_norm(z) * bimodule.vector_norm(zp))
        .fold(0.0, f64::max);
    pairs.retain(|(z, zp)| bimodule.vector_norm(z) * bimodule.vector_norm(zp) > 1e-12 * max_weight);
    let mut sum = bimodule.algebra_b.zero();
    for (z, zp) in &pairs {
        sum = sum.add(&bimodule.inner_right(z, zp));
    }
    let residual = sum.distance(&bimodule.algebra_b.unit());
    let limit = tol.at_scale(1.0).max(1e-9);
    if residual > limit {
        return Err(MoritaError::FrameSolveFailed(residual));
    }
    let k: f64 = pairs
        .iter()
        .map(|(z, zp)| bimodule.vector_norm(z) * bimodule.vector_norm(zp))
        .sum::<f64>()
        .powi(2);
    Ok(Frame { pairs, k, residual })
}

/// The transfer mode: one frame quadruple, or the full frame sum.
#[derive(Debug, Clone)]
pub enum TransferMode {
    Single { z: CVector, zp: CVector, zeta: CVector, zetap: CVector },
    Full,
}

/// Transfer a coefficient map over `Σ` to one over `Θ`:
/// `F_{z,z',ζ,ζ'}(T) = S_{δ,z',ζ'}·T·S_{δ̃,z̃,ζ̃}` in single mode, and the
/// frame sum `Σ_{ij} F_{z_i,z_i',z_j,z_j'}(T)` in full mode. Both modes run
/// through the same single-quadruple composition.
pub fn transfer(
    action: &CompatibleAction,
    frame: &Frame,
    t_map: &CoeffMap,
    mode: &TransferMode,
    tol: &ScalarTolerance,
) -> Result<CoeffMap, MoritaError> {
    if !t_map.system.approx_eq(&action.sigma, 1e-9) {
        return Err(MoritaError::SystemMismatch);
    }
    let conj = conjugate_action(action);
    let n = action.sigma.group.order();
    let tb = action.theta.algebra.total_dim();
    let per_g = match mode {
        TransferMode::Single { z, zp, zeta, zetap } => {
            single_transfer_tables(action, &conj, t_map, z, zp, zeta, zetap)
        }
        TransferMode::Full => {
            let mut acc = vec![CMatrix::zeros(tb, tb); n];
            for (zi, zpi) in &frame.pairs {
                for (zj, zpj) in &frame.pairs {
                    let tables = single_transfer_tables(action, &conj, t_map, zi, zpi, zj, zpj);
                    for g in 0..n {
                        acc[g] += &tables[g];
                    }
                }
            }
            acc
        }
    };
    let out = CoeffMap { system: action.theta.clone(), per_g, provenance: None };
    // cross-check the displayed identity against the induced representation
    if let (TransferMode::Single { z, zp, zeta, zetap }, Some(p)) = (mode, &t_map.provenance) {
        let induced = induced_rep(action, &p.rep, tol)?;
        let left = induced.embed(&conjugate_vector(z), &p.x, zp);
        let right = induced.embed(&conjugate_vector(zeta), &p.y, zetap);
        let direct =
            crate::fourier::coefficient_map(&action.theta, &Arc::new(induced.rep), &left, &right)?;
        let defect = out.table_gap(&direct);
        let scale = 1.0 + p.bound * frame_scale(z, zp, zeta, zetap, &action.bimodule);
        if defect > 1e-8 * scale {
            return Err(MoritaError::TransferIdentityFailed(defect));
        }
    }
    Ok(out)
}

fn frame_scale(
    z: &CVector,
    zp: &CVector,
    zeta: &CVector,
    zetap: &CVector,
    bim: &ImprimitivityBimodule,
) -> f64 {
    bim.vector_norm(z) * bim.vector_norm(zp) * bim.vector_norm(zeta) * bim.vector_norm(zetap)
}

fn single_transfer_tables(
    action: &CompatibleAction,
    conj: &CompatibleAction,
    t_map: &CoeffMap,
    z: &CVector,
    zp: &CVector,
    zeta: &CVector,
    zetap: &CVector,
) -> Vec<CMatrix> {
    let s_left = s_coefficient(action, zp, zetap);
    let s_right = s_coefficient(conj, &conjugate_vector(z), &conjugate_vector(zeta));
    (0..action.sigma.group.order())
        .map(|g| &s_left.per_g[g] * &t_map.per_g[g] * &s_right.per_g[g])
        .collect()
}

/// An induced representation of `Θ` on `Y = (Z̃ ⊗_A X) ⊗_A Z`, with the
/// quotient maps of both tensor stages.
#[derive(Debug, Clone)]
pub struct InducedRep {
    pub rep: EquivariantRep,
    pub stage1: QuotientWitness,
    pub stage2: QuotientWitness,
    dim_x: usize,
    dim_z: usize,
}

impl InducedRep {
    /// Quotient coordinates of `(z̃ ⊗ x) ⊗ z`.
    pub fn embed(&self, ztilde: &CVector, x: &CVector, z: &CVector) -> CVector {
        let u = &self.stage1.basis_map * ztilde.kronecker(x);
        &self.stage2.basis_map * u.kronecker(z)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_x, self.dim_z)
    }
}

/// Induce a representation of `Σ` to one of `Θ` across the equivalence.
pub fn induced_rep(
    action: &CompatibleAction,
    rep: &EquivariantRep,
    tol: &ScalarTolerance,
) -> Result<InducedRep, MoritaError> {
    if rep.module.algebra != action.sigma.algebra {
        return Err(MoritaError::SystemMismatch);
    }
    let conj = conjugate_action(action);
    let zt = &conj.bimodule; // Z̃ as a B–A bimodule
    let a_alg = &action.sigma.algebra;
    let b_alg = &action.theta.algebra;
    let n = action.sigma.group.order();
    let dz = action.bimodule.dim;
    let dx = rep.dim();

    // Stage 1: U = Z̃ ⊗_A X (a B–A correspondence).
    let tq1 = tensor_quotient(
        a_alg,
        dz,
        &zt.right_inner,
        &rep.rho,
        dx,
        &rep.module.gram,
        a_alg,
    );
    let eye_x = CMatrix::identity(dx, dx);
    let eye_z = CMatrix::identity(dz, dz);
    let u_left_b: Vec<CMatrix> =
        zt.left_action.iter().map(|l| tq1.push(&l.kronecker(&eye_x))).collect();
    let u_action: Vec<CMatrix> = (0..n)
        .map(|g| tq1.push(&conj.delta[g].kronecker(&rep.v[g])))
        .collect();

    // Stage 2: Y = U ⊗_A Z (a B–B correspondence).
    let tq2 = tensor_quotient(
        a_alg,
        tq1.dim,
        &tq1.gram,
        &action.bimodule.left_action,
        dz,
        &action.bimodule.right_inner,
        b_alg,
    );
    let eye_u = CMatrix::identity(tq1.dim, tq1.dim);
    let right_action: Vec<CMatrix> = action
        .bimodule
        .right_action
        .iter()
        .map(|r| tq2.push(&eye_u.kronecker(r)))
        .collect();
    let tau: Vec<CMatrix> = u_left_b.iter().map(|l| tq2.push(&l.kronecker(&eye_z))).collect();
    let w: Vec<CMatrix> = (0..n)
        .map(|g| tq2.push(&u_action[g].kronecker(&action.delta[g])))
        .collect();

    let rep_out = EquivariantRep {
        module: HilbertModule {
            algebra: b_alg.clone(),
            dim: tq2.dim,
            right_action,
            gram: tq2.gram.clone(),
        },
        rho: tau,
        v: w,
    };
    validate_equivariant(&action.theta, &rep_out, tol)?;
    Ok(InducedRep {
        rep: rep_out,
        stage1: QuotientWitness {
            gram_rank: tq1.dim,
            dropped_dim: tq1.pre_dim - tq1.dim,
            basis_map: tq1.q,
        },
        stage2: QuotientWitness {
            gram_rank: tq2.dim,
            dropped_dim: tq2.pre_dim - tq2.dim,
            basis_map: tq2.q,
        },
        dim_x: dx,
        dim_z: dz,
    })
}

/// Product of compatible actions on the internal tensor
/// `_A(Z ⊗_B W)_C`, with `(δ⊗η)(g) = δ(g)⊗η(g)` on simple tensors.
pub fn tensor_actions(
    first: &CompatibleAction,
    second: &CompatibleAction,
    tol: &ScalarTolerance,
) -> Result<(CompatibleAction, QuotientWitness), MoritaError> {
    if first.bimodule.algebra_b != second.bimodule.algebra_a
        || !first.theta.approx_eq(&second.sigma, 1e-9)
    {
        return Err(MoritaError::MiddleMismatch);
    }
    let z = &first.bimodule;
    let w = &second.bimodule;
    let b_alg = &z.algebra_b;
    let dz = z.dim;
    let dw = w.dim;
    let tq = tensor_quotient(
        b_alg,
        dz,
        &z.right_inner,
        &w.left_action,
        dw,
        &w.right_inner,
        &w.algebra_b,
    );
    let eye_z = CMatrix::identity(dz, dz);
    let eye_w = CMatrix::identity(dw, dw);
    let left_action: Vec<CMatrix> =
        z.left_action.iter().map(|l| tq.push(&l.kronecker(&eye_w))).collect();
    let right_action: Vec<CMatrix> =
        w.right_action.iter().map(|r| tq.push(&eye_z.kronecker(r))).collect();
    let delta: Vec<CMatrix> = first
        .delta
        .iter()
        .zip(&second.delta)
        .map(|(a, b)| tq.push(&a.kronecker(b)))
        .collect();
    // left inner: _A⟨z⊗w, z'⊗w'⟩ = _A⟨z·(_B⟨w,w'⟩), z'⟩
    let ta = z.algebra_a.total_dim();
    let tb = b_alg.total_dim();
    let mut left_inner = Vec::with_capacity(ta);
    for k in 0..ta {
        let mut big = CMatrix::zeros(dz * dw, dz * dw);
        for c in 0..tb {
            let factor = z.right_action[c].transpose() * &z.left_inner[k];
            big += factor.kronecker(&w.left_inner[c]);
        }
        left_inner.push(tq.section.transpose() * big * tq.section.conjugate());
    }
    let bimodule = ImprimitivityBimodule {
        algebra_a: z.algebra_a.clone(),
        algebra_b: w.algebra_b.clone(),
        dim: tq.dim,
        left_action,
        right_action,
        left_inner,
        right_inner: tq.gram.clone(),
    };
    let witness = QuotientWitness {
        gram_rank: tq.dim,
        dropped_dim: tq.pre_dim - tq.dim,
        basis_map: tq.q.clone(),
    };
    let out = validate_compatible_action(&first.sigma, &second.theta, bimodule, delta, tol)?;
    Ok((out, witness))
}

/// Embed a simple tensor into the quotient carrier of [`tensor_actions`].
pub fn tensor_embed(witness: &QuotientWitness, z: &CVector, w: &CVector) -> CVector {
    &witness.basis_map * z.kronecker(w)
}

/// The decomposition produced by [`span_reconstruct`].
#[derive(Debug)]
pub struct SpanDecomposition {
    /// `T'_{ijkl} = S_{δ̃,z̃_i,z̃_j}·T'·S_{δ,z'_k,z'_l}`, indexed
    /// lexicographically by `(i,j,k,l)` over the frame.
    pub components: Vec<((usize, usize, usize, usize), CoeffMap)>,
    pub residual: f64,
}

/// Reconstruct `T'` over `Θ` from pulled-back components over `Σ` and verify
/// `Σ_{ijkl} F_{z_k,z_i',z_l,z_j'}(T'_{ijkl}) = T'`.
pub fn span_reconstruct(
    action: &CompatibleAction,
    frame: &Frame,
    t_prime: &CoeffMap,
    tol: &ScalarTolerance,
) -> Result<SpanDecomposition, MoritaError> {
    if !t_prime.system.approx_eq(&action.theta, 1e-9) {
        return Err(MoritaError::SystemMismatch);
    }
    let conj = conjugate_action(action);
    let n = action.sigma.group.order();
    let tb = action.theta.algebra.total_dim();
    let m = frame.pairs.len();
    let mut components = Vec::with_capacity(m * m * m * m);
    let mut total = vec![CMatrix::zeros(tb, tb); n];
    for i in 0..m {
        for j in 0..m {
            let s_back = s_coefficient(
                &conj,
                &conjugate_vector(&frame.pairs[i].0),
                &conjugate_vector(&frame.pairs[j].0),
            );
            for k in 0..m {
                for l in 0..m {
                    let s_fwd = s_coefficient(action, &frame.pairs[k].1, &frame.pairs[l].1);
                    let per_g: Vec<CMatrix> = (0..n)
                        .map(|g| &s_back.per_g[g] * &t_prime.per_g[g] * &s_fwd.per_g[g])
                        .collect();
                    let component =
                        CoeffMap { system: action.sigma.clone(), per_g, provenance: None };
                    // F_{z_k, z_i', z_l, z_j'} applied to the component
                    let tables = single_transfer_tables(
                        action,
                        &conj,
                        &component,
                        &frame.pairs[k].0,
                        &frame.pairs[i].1,
                        &frame.pairs[l].0,
                        &frame.pairs[j].1,
                    );
                    for g in 0..n {
                        total[g] += &tables[g];
                    }
                    components.push(((i, j, k, l), component));
                }
            }
        }
    }
    let residual = total
        .iter()
        .zip(&t_prime.per_g)
        .map(|(a, b)| max_modulus(&(a - b)))
        .fold(0.0, f64::max);
    let scale = t_prime.per_g.iter().map(max_modulus).fold(0.0, f64::max);
    if residual > (1e-8 * (1.0 + scale)).max(tol.at_scale(scale)) {
        return Err(MoritaError::ReconstructionResidual(residual));
    }
    Ok(SpanDecomposition { components, residual })
}

/// For commutative `A` and `B`, extract the isomorphism `φ: A → B` with
/// `φ(_A⟨z,z'⟩) = ⟨z',z⟩_B`, verify that it intertwines the actions and the
/// module structures, and certify conjugacy of the transported systems.
pub fn commutative_conjugacy(
    action: &CompatibleAction,
    tol: &ScalarTolerance,
) -> Result<(AlgebraIsomorphism, TransportReport), MoritaError> {
    let a_alg = &action.sigma.algebra;
    let b_alg = &action.theta.algebra;
    if a_alg.block_dims().iter().any(|&n| n != 1) || b_alg.block_dims().iter().any(|&n| n != 1) {
        return Err(MoritaError::NotCommutative);
    }
    let ta = a_alg.total_dim();
    let tb = b_alg.total_dim();
    let d = action.bimodule.dim;
    // Solve Φ·vec(_A⟨b_i,b_j⟩) = vec(⟨b_j,b_i⟩_B) over all basis pairs.
    let mut xs = CMatrix::zeros(ta, d * d);
    let mut ys = CMatrix::zeros(tb, d * d);
    for i in 0..d {
        let ei = CVector::from_fn(d, |r, _| if r == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for j in 0..d {
            let ej = CVector::from_fn(d, |r, _| if r == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
            xs.set_column(i * d + j, &action.bimodule.inner_left(&ei, &ej).vectorize());
            ys.set_column(i * d + j, &action.bimodule.inner_right(&ej, &ei).vectorize());
        }
    }
    // Φ·X = Y  ⟺  Xᵀ·Φᵀ = Yᵀ, solved column by column by least squares.
    let xt = xs.transpose();
    let svd = xt.clone().svd(true, true);
    let mut phi_t = CMatrix::zeros(ta, tb);
    for c in 0..tb {
        let rhs = ys.transpose().column(c).into_owned();
        let sol = svd.solve(&rhs, 1e-12).map_err(|_| MoritaError::PhiInconsistent(f64::INFINITY))?;
        phi_t.set_column(c, &sol);
    }
    let phi_mat = phi_t.transpose();
    let residual = (&phi_mat * &xs - &ys).norm();
    if residual > tol.at_scale(xs.norm()).max(1e-10 * xs.norm()) {
        return Err(MoritaError::PhiInconsistent(residual));
    }
    // A commutative *-isomorphism in this picture is a coordinate permutation.
    let mut block_map = vec![0usize; ta];
    let mut seen = vec![false; tb];
    for k in 0..ta {
        let col = phi_mat.column(k);
        let (mut best, mut best_val) = (0usize, 0.0f64);
        for r in 0..tb {
            if col[r].norm() > best_val {
                best_val = col[r].norm();
                best = r;
            }
        }
        if (best_val - 1.0).abs() > tol.at_scale(1.0).max(1e-8) || seen[best] {
            return Err(MoritaError::PhiInconsistent(residual.max((best_val - 1.0).abs())));
        }
        seen[best] = true;
        block_map[k] = best;
    }
    let phi = AlgebraIsomorphism {
        source: a_alg.clone(),
        target: b_alg.clone(),
        block_map,
        unitary: b_alg.unit(),
    };
    let perm_defect = (phi.matrix() - &phi_mat).norm();

    let mut report = TransportReport {
        kind: TransportKind::MoritaConjugacy,
        inputs: vec![format!(
            "bimodule dim {}, |G| = {}",
            action.bimodule.dim,
            action.sigma.group.order()
        )],
        checks_passed: Vec::new(),
        failures: Vec::new(),
    };
    let record = |name: &str, defect: f64, limit: f64, report: &mut TransportReport| {
        if defect <= limit {
            report.checks_passed.push(format!("{name} (defect {defect:.3e})"));
        } else {
            report.failures.push(format!("{name} (defect {defect:.3e})"));
        }
    };
    record("phi is a coordinate *-isomorphism", perm_defect, tol.at_scale(1.0).max(1e-8), &mut report);

    // φ∘α_g = β_g∘φ
    let n = action.sigma.group.order();
    let mut worst = 0.0f64;
    for g in 0..n {
        let lhs = phi.matrix() * action.sigma.alpha_matrix(g);
        let rhs = action.theta.alpha_matrix(g) * phi.matrix();
        worst = worst.max((lhs - rhs).norm());
    }
    record("phi intertwines the actions", worst, 1e-10_f64.max(tol.at_scale(1.0)), &mut report);

    // a·z = z·φ(a)
    let mut worst2 = 0.0f64;
    for k in 0..ta {
        let ph = phi.apply(&a_alg.basis_element(k));
        worst2 = worst2.max(
            (&action.bimodule.left_action[k] - action.bimodule.right_action_matrix(&ph)).norm(),
        );
    }
    record("a·z = z·phi(a)", worst2, tol.at_scale(1.0), &mut report);

    // with trivial cocycles the systems themselves are conjugate
    let unit_a = a_alg.unit();
    let unit_b = b_alg.unit();
    let sigma_trivial = (0..n)
        .all(|g| (0..n).all(|h| action.sigma.sigma(g, h).distance(&unit_a) <= tol.at_scale(1.0)));
    let theta_trivial = (0..n)
        .all(|g| (0..n).all(|h| action.theta.sigma(g, h).distance(&unit_b) <= tol.at_scale(1.0)));
    if sigma_trivial && theta_trivial {
        let idg = GroupIsomorphism::identity(&action.sigma.group);
        match check_group_conjugacy(&action.sigma, &action.theta, &phi, &idg, tol) {
            Ok(()) => report
                .checks_passed
                .push("untwisted commutative systems are conjugate via phi".into()),
            Err(e) => report.failures.push(format!("conjugacy certification: {e}")),
        }
    }
    Ok((phi, report))
}
