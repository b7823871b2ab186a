//! Hilbert A-modules realized on finite-dimensional complex carriers and
//! equivariant representations `(ρ, v)` of a twisted system.
//!
//! A module stores its right action and its A-valued inner product as
//! coordinate tensors: `right_action[k]` is the carrier matrix of `x ↦ x·e_k`
//! and `gram[k]` holds the k-th coordinate of `⟨b_i, b_j⟩` at entry `(i, j)`,
//! so that `vec(⟨x, y⟩)_k = x^H · gram[k] · y`. Internal tensor products are
//! formed on the algebraic tensor carrier and quotiented by the null space of
//! the semi-inner product, detected through the trace-induced scalar Gram
//! matrix.

use crate::algebra::{AlgElement, CMatrix, CStarAlgebra, CVector, ScalarTolerance};
use crate::system::TwistedSystem;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepError {
    #[error("tensor shapes are inconsistent: {0}")]
    ShapeMismatch(String),
    #[error("module invariant `{what}` fails (defect {defect:.3e})")]
    ModuleInvalid { what: String, defect: f64 },
    #[error("axiom ({which}) fails at g={g}, h={h} (defect {defect:.3e})")]
    AxiomFails { which: String, g: usize, h: usize, defect: f64 },
    #[error("w is not a unitary representation: w(g)w(h) ≠ w(gh) at ({g},{h})")]
    NotARepresentation { g: usize, h: usize },
    #[error("representations live over different systems")]
    SystemMismatch,
}

/// A right Hilbert A-module on the carrier `ℂ^dim`.
#[derive(Debug, Clone)]
pub struct HilbertModule {
    pub algebra: CStarAlgebra,
    pub dim: usize,
    /// Carrier matrix of `x ↦ x · e_k`, one per algebra basis element.
    pub right_action: Vec<CMatrix>,
    /// Coordinate Gram matrices: `gram[k][(i,j)] = vec(⟨b_i, b_j⟩)_k`.
    pub gram: Vec<CMatrix>,
}

impl HilbertModule {
    /// `⟨x, y⟩ ∈ A` (conjugate-linear in `x`, linear in `y`).
    pub fn inner(&self, x: &CVector, y: &CVector) -> AlgElement {
        let t = self.algebra.total_dim();
        let mut coords = CVector::zeros(t);
        for k in 0..t {
            coords[k] = (x.adjoint() * &self.gram[k] * y)[(0, 0)];
        }
        self.algebra.element_from_vec(&coords)
    }

    /// Matrix of `x ↦ x·a` on the carrier.
    pub fn right_action_matrix(&self, a: &AlgElement) -> CMatrix {
        let v = a.vectorize();
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (k, r) in self.right_action.iter().enumerate() {
            if v[k].norm_sqr() != 0.0 {
                m += r * v[k];
            }
        }
        m
    }

    pub fn act(&self, x: &CVector, a: &AlgElement) -> CVector {
        self.right_action_matrix(a) * x
    }

    /// Module norm `‖x‖ = ‖⟨x,x⟩‖^{1/2}`.
    pub fn vector_norm(&self, x: &CVector) -> f64 {
        self.inner(x, x).operator_norm().sqrt()
    }

    /// Trace-induced scalar Gram matrix (faithful on positive elements).
    pub fn scalar_gram(&self) -> CMatrix {
        let tr = self.algebra.trace_vec();
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for k in 0..self.algebra.total_dim() {
            if tr[k].norm_sqr() != 0.0 {
                s += &self.gram[k] * tr[k];
            }
        }
        s
    }

    /// Structural and order-theoretic module invariants.
    pub fn validate(&self, tol: &ScalarTolerance) -> Result<(), RepError> {
        let t = self.algebra.total_dim();
        if self.right_action.len() != t || self.gram.len() != t {
            return Err(RepError::ShapeMismatch("coordinate tensor lengths".into()));
        }
        for m in self.right_action.iter().chain(self.gram.iter()) {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(RepError::ShapeMismatch("carrier matrix dimensions".into()));
            }
        }
        let fail = |what: &str, defect: f64| RepError::ModuleInvalid { what: what.into(), defect };
        let thr = |scale: f64| tol.at_scale(scale.max(1.0));

        // ⟨x,y⟩* = ⟨y,x⟩  ⟺  gram[k] = gram[star(k)]^H
        for k in 0..t {
            let d = (&self.gram[k] - self.gram[self.algebra.star_perm(k)].adjoint()).norm();
            if d > thr(self.gram[k].norm()) {
                return Err(fail("inner product symmetry", d));
            }
        }
        // unital right action
        let unit_defect =
            (self.right_action_matrix(&self.algebra.unit()) - CMatrix::identity(self.dim, self.dim))
                .norm();
        if unit_defect > thr(1.0) {
            return Err(fail("unital right action", unit_defect));
        }
        // x·(e_k e_l) = (x·e_k)·e_l
        for k in 0..t {
            for l in 0..t {
                let prod = self.algebra.basis_element(k).mul(&self.algebra.basis_element(l));
                let lhs = self.right_action_matrix(&prod);
                let rhs = &self.right_action[l] * &self.right_action[k];
                let d = (lhs - &rhs).norm();
                if d > thr(rhs.norm()) {
                    return Err(fail("right action multiplicativity", d));
                }
            }
        }
        // ⟨x, y·e_m⟩ = ⟨x,y⟩·e_m
        for k in 0..t {
            let rm = self.algebra.right_mul_matrix(&self.algebra.basis_element(k));
            for c in 0..t {
                let lhs = &self.gram[c] * &self.right_action[k];
                let mut rhs = CMatrix::zeros(self.dim, self.dim);
                for l in 0..t {
                    if rm[(c, l)].norm_sqr() != 0.0 {
                        rhs += &self.gram[l] * rm[(c, l)];
                    }
                }
                let d = (lhs - &rhs).norm();
                if d > thr(rhs.norm()) {
                    return Err(fail("inner product right compatibility", d));
                }
            }
        }
        // Gram positivity in M_dim(A), blockwise faithful picture.
        let (min_eig, skew) = self.gram_min_eig();
        let scale = self.scalar_gram().norm();
        if skew > thr(scale) {
            return Err(fail("gram self-adjointness", skew));
        }
        if min_eig < -thr(scale) {
            return Err(fail("gram positivity", -min_eig));
        }
        // nondegeneracy: ⟨x,x⟩ = 0 ⇒ x = 0
        let rank = self.scalar_gram_rank(GRAM_RANK_CUTOFF);
        if rank < self.dim {
            return Err(fail("gram nondegeneracy", (self.dim - rank) as f64));
        }
        Ok(())
    }

    /// Minimum Hermitian eigenvalue and skew defect of the module Gram
    /// matrix, viewed in `⊕_b M_{dim·n_b}`.
    pub fn gram_min_eig(&self) -> (f64, f64) {
        let mut min_eig = f64::INFINITY;
        let mut skew: f64 = 0.0;
        for (b, &nb) in self.algebra.block_dims().iter().enumerate() {
            let n = self.dim * nb;
            let mut m = CMatrix::zeros(n, n);
            for p in 0..nb {
                for q in 0..nb {
                    let g = &self.gram[self.algebra.coord(b, p, q)];
                    for i in 0..self.dim {
                        for j in 0..self.dim {
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

    /// Rank of the scalar Gram (quotient dimension of the null space).
    pub fn scalar_gram_rank(&self, rel_cutoff: f64) -> usize {
        let s = self.scalar_gram();
        let eigs = (&s + s.adjoint()).scale(0.5).symmetric_eigen().eigenvalues;
        let max = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        eigs.iter().filter(|&&e| e > rel_cutoff * max.max(1e-300)).count()
    }
}

/// An equivariant representation `(ρ, v)` on a [`HilbertModule`].
#[derive(Debug, Clone)]
pub struct EquivariantRep {
    pub module: HilbertModule,
    /// Carrier matrix of `ρ(e_k)`, one per algebra basis element.
    pub rho: Vec<CMatrix>,
    /// Carrier matrix of `v(g)`, one per group element.
    pub v: Vec<CMatrix>,
}

impl EquivariantRep {
    pub fn dim(&self) -> usize {
        self.module.dim
    }

    pub fn rho_matrix(&self, a: &AlgElement) -> CMatrix {
        let v = a.vectorize();
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (k, r) in self.rho.iter().enumerate() {
            if v[k].norm_sqr() != 0.0 {
                m += r * v[k];
            }
        }
        m
    }

    /// `ad_ρ(u): x ↦ (ρ(u)x)·u*`.
    pub fn ad_rho(&self, u: &AlgElement) -> CMatrix {
        self.module.right_action_matrix(&u.adjoint()) * self.rho_matrix(u)
    }
}

/// Relative eigenvalue cutoff for null-space detection in tensor quotients.
pub const GRAM_RANK_CUTOFF: f64 = 1e-10;

/// Witness of an internal-tensor quotient: the Gram rank, the dimension
/// dropped, and the surjection from the algebraic tensor carrier onto the
/// quotient carrier.
#[derive(Debug, Clone)]
pub struct QuotientWitness {
    pub gram_rank: usize,
    pub dropped_dim: usize,
    pub basis_map: CMatrix,
}

/// Orthonormal basis of the essential range of a PSD scalar Gram.
///
/// Returns `(q, section)` with `q: D → r` the quotient coordinates and
/// `section: r → D` the isometric section onto the complement of the null
/// space; `q · section = I_r`.
pub(crate) fn gram_quotient(scalar_gram: &CMatrix, rel_cutoff: f64) -> (CMatrix, CMatrix, usize) {
    let d = scalar_gram.nrows();
    let herm = (scalar_gram + scalar_gram.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut kept: Vec<usize> = (0..d)
        .filter(|&i| eig.eigenvalues[i] > rel_cutoff * max.max(1e-300))
        .collect();
    kept.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let r = kept.len();
    let mut section = CMatrix::zeros(d, r);
    for (col, &i) in kept.iter().enumerate() {
        section.set_column(col, &eig.eigenvectors.column(i));
    }
    let q = section.adjoint();
    (q, section, r)
}

/// The trivial equivariant representation `(ℓ, α)` on `A` itself.
pub fn trivial_rep(sys: &TwistedSystem) -> EquivariantRep {
    let alg = &sys.algebra;
    let t = alg.total_dim();
    let basis = alg.basis();
    let right_action: Vec<CMatrix> = basis.iter().map(|e| alg.right_mul_matrix(e)).collect();
    let rho: Vec<CMatrix> = basis.iter().map(|e| alg.left_mul_matrix(e)).collect();
    let mut gram = vec![CMatrix::zeros(t, t); t];
    for i in 0..t {
        for j in 0..t {
            let v = basis[i].adjoint().mul(&basis[j]).vectorize();
            for k in 0..t {
                gram[k][(i, j)] = v[k];
            }
        }
    }
    let v = (0..sys.group.order()).map(|g| sys.alpha_matrix(g).clone()).collect();
    EquivariantRep {
        module: HilbertModule { algebra: alg.clone(), dim: t, right_action, gram },
        rho,
        v,
    }
}

/// The regular equivariant representation `(ℓ̌, α̌)` on `A^G`.
pub fn regular_rep(sys: &TwistedSystem) -> EquivariantRep {
    let alg = &sys.algebra;
    let t = alg.total_dim();
    let n = sys.group.order();
    let dim = n * t;
    let basis = alg.basis();
    let mut right_action = Vec::with_capacity(t);
    let mut rho = Vec::with_capacity(t);
    for e in &basis {
        let rm = alg.right_mul_matrix(e);
        let lm = alg.left_mul_matrix(e);
        let mut big_r = CMatrix::zeros(dim, dim);
        let mut big_l = CMatrix::zeros(dim, dim);
        for g in 0..n {
            big_r.view_mut((g * t, g * t), (t, t)).copy_from(&rm);
            big_l.view_mut((g * t, g * t), (t, t)).copy_from(&lm);
        }
        right_action.push(big_r);
        rho.push(big_l);
    }
    let mut gram = vec![CMatrix::zeros(dim, dim); t];
    for g in 0..n {
        for i in 0..t {
            for j in 0..t {
                let v = basis[i].adjoint().mul(&basis[j]).vectorize();
                for k in 0..t {
                    gram[k][(g * t + i, g * t + j)] = v[k];
                }
            }
        }
    }
    // (α̌(g)ξ)(h) = α_g(ξ(g^{-1}h))
    let mut v = Vec::with_capacity(n);
    for g in 0..n {
        let mut m = CMatrix::zeros(dim, dim);
        let a = sys.alpha_matrix(g);
        for h in 0..n {
            let src = sys.group.mul(sys.group.inv(g), h);
            m.view_mut((h * t, src * t), (t, t)).copy_from(a);
        }
        v.push(m);
    }
    EquivariantRep {
        module: HilbertModule { algebra: alg.clone(), dim, right_action, gram },
        rho,
        v,
    }
}

/// Amplification `(ρ ⊗ ι, v ⊗ w)` on `X ⊗ ℂ^d` by a unitary representation
/// `w` of the group.
pub fn amplify_rep(
    sys: &TwistedSystem,
    rep: &EquivariantRep,
    w: &[CMatrix],
    tol: &ScalarTolerance,
) -> Result<EquivariantRep, RepError> {
    let n = sys.group.order();
    if w.len() != n {
        return Err(RepError::ShapeMismatch("one unitary per group element".into()));
    }
    let d = w[0].nrows();
    for (g, m) in w.iter().enumerate() {
        if m.nrows() != d || m.ncols() != d {
            return Err(RepError::ShapeMismatch("unitary rep dimensions".into()));
        }
        let defect = (m.adjoint() * m - CMatrix::identity(d, d)).norm();
        if defect > tol.at_scale(d as f64) {
            return Err(RepError::NotARepresentation { g, h: g });
        }
    }
    for g in 0..n {
        for h in 0..n {
            let defect = (&w[g] * &w[h] - &w[sys.group.mul(g, h)]).norm();
            if defect > tol.at_scale(d as f64) {
                return Err(RepError::NotARepresentation { g, h });
            }
        }
    }
    let eye = CMatrix::identity(d, d);
    let right_action = rep.module.right_action.iter().map(|r| r.kronecker(&eye)).collect();
    let rho = rep.rho.iter().map(|r| r.kronecker(&eye)).collect();
    let gram = rep.module.gram.iter().map(|g| g.kronecker(&eye)).collect();
    let v = rep.v.iter().zip(w).map(|(vg, wg)| vg.kronecker(wg)).collect();
    Ok(EquivariantRep {
        module: HilbertModule {
            algebra: rep.module.algebra.clone(),
            dim: rep.dim() * d,
            right_action,
            gram,
        },
        rho,
        v,
    })
}

/// Direct sum of two representations of the same system.
pub fn direct_sum_reps(r1: &EquivariantRep, r2: &EquivariantRep) -> EquivariantRep {
    let d1 = r1.dim();
    let d2 = r2.dim();
    let dim = d1 + d2;
    let block = |a: &CMatrix, b: &CMatrix| {
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (d1, d1)).copy_from(a);
        m.view_mut((d1, d1), (d2, d2)).copy_from(b);
        m
    };
    EquivariantRep {
        module: HilbertModule {
            algebra: r1.module.algebra.clone(),
            dim,
            right_action: r1
                .module
                .right_action
                .iter()
                .zip(&r2.module.right_action)
                .map(|(a, b)| block(a, b))
                .collect(),
            gram: r1
                .module
                .gram
                .iter()
                .zip(&r2.module.gram)
                .map(|(a, b)| block(a, b))
                .collect(),
        },
        rho: r1.rho.iter().zip(&r2.rho).map(|(a, b)| block(a, b)).collect(),
        v: r1.v.iter().zip(&r2.v).map(|(a, b)| block(a, b)).collect(),
    }
}

/// Embed a direct-sum vector.
pub fn direct_sum_vector(x1: &CVector, x2: &CVector) -> CVector {
    let mut x = CVector::zeros(x1.len() + x2.len());
    x.rows_mut(0, x1.len()).copy_from(x1);
    x.rows_mut(x1.len(), x2.len()).copy_from(x2);
    x
}

/// Outcome of an internal-tensor Gram quotient: the quotient maps and the
/// quotient-side coefficient-algebra Gram.
#[derive(Debug, Clone)]
pub(crate) struct TensorQuotient {
    pub dim: usize,
    pub pre_dim: usize,
    pub q: CMatrix,
    pub section: CMatrix,
    pub gram: Vec<CMatrix>,
}

impl TensorQuotient {
    pub fn push(&self, m: &CMatrix) -> CMatrix {
        &self.q * m * &self.section
    }
}

/// Shared internal-tensor procedure: install the semi-inner product
/// `⟨u⊗w, u'⊗w'⟩ = ⟨w, π(⟨u,u'⟩_M) w'⟩` on the algebraic tensor carrier and
/// quotient by its null space via the trace-induced scalar Gram.
///
/// `middle_gram_left[c]` are the coordinate Gram matrices (over the middle
/// algebra) of the left factor, `mid_action_right[c]` the left action of the
/// middle algebra on the right factor, `right_gram[k]` the coordinate Gram
/// matrices (over the coefficient algebra) of the right factor.
pub(crate) fn tensor_quotient(
    middle_alg: &CStarAlgebra,
    d_left: usize,
    middle_gram_left: &[CMatrix],
    mid_action_right: &[CMatrix],
    d_right: usize,
    right_gram: &[CMatrix],
    coeff_alg: &CStarAlgebra,
) -> TensorQuotient {
    let tm = middle_alg.total_dim();
    let tc = coeff_alg.total_dim();
    let big = d_left * d_right;
    // Precompute right_gram[k]·π(e_c).
    let mut gc: Vec<Vec<CMatrix>> = Vec::with_capacity(tc);
    for k in 0..tc {
        gc.push((0..tm).map(|c| &right_gram[k] * &mid_action_right[c]).collect());
    }
    let mut big_gram = vec![CMatrix::zeros(big, big); tc];
    for i in 0..d_left {
        for j in 0..d_left {
            let coords: Vec<num_complex::Complex<f64>> =
                (0..tm).map(|c| middle_gram_left[c][(i, j)]).collect();
            for k in 0..tc {
                let mut blockm = CMatrix::zeros(d_right, d_right);
                for (c, &co) in coords.iter().enumerate() {
                    if co.norm_sqr() != 0.0 {
                        blockm += &gc[k][c] * co;
                    }
                }
                big_gram[k]
                    .view_mut((i * d_right, j * d_right), (d_right, d_right))
                    .copy_from(&blockm);
            }
        }
    }
    let tr = coeff_alg.trace_vec();
    let mut scalar = CMatrix::zeros(big, big);
    for k in 0..tc {
        if tr[k].norm_sqr() != 0.0 {
            scalar += &big_gram[k] * tr[k];
        }
    }
    let (q, section, rank) = gram_quotient(&scalar, GRAM_RANK_CUTOFF);
    let gram = big_gram.iter().map(|g| &q * g * &section).collect();
    TensorQuotient { dim: rank, pre_dim: big, q, section, gram }
}

/// Internal tensor product of two equivariant representations of the same
/// system, realized on the Gram quotient of the algebraic tensor carrier.
pub fn internal_tensor_reps(
    sys: &TwistedSystem,
    r1: &EquivariantRep,
    r2: &EquivariantRep,
) -> Result<(EquivariantRep, QuotientWitness), RepError> {
    if r1.module.algebra != sys.algebra || r2.module.algebra != sys.algebra {
        return Err(RepError::SystemMismatch);
    }
    let alg = &sys.algebra;
    let d1 = r1.dim();
    let d2 = r2.dim();
    let tq = tensor_quotient(
        alg,
        d1,
        &r1.module.gram,
        &r2.rho,
        d2,
        &r2.module.gram,
        alg,
    );
    let eye1 = CMatrix::identity(d1, d1);
    let eye2 = CMatrix::identity(d2, d2);
    let right_action: Vec<CMatrix> =
        r2.module.right_action.iter().map(|r| tq.push(&eye1.kronecker(r))).collect();
    let rho: Vec<CMatrix> = r1.rho.iter().map(|r| tq.push(&r.kronecker(&eye2))).collect();
    let v: Vec<CMatrix> =
        r1.v.iter().zip(&r2.v).map(|(a, b)| tq.push(&a.kronecker(b))).collect();

    Ok((
        EquivariantRep {
            module: HilbertModule {
                algebra: alg.clone(),
                dim: tq.dim,
                right_action,
                gram: tq.gram.clone(),
            },
            rho,
            v,
        },
        QuotientWitness {
            gram_rank: tq.dim,
            dropped_dim: tq.pre_dim - tq.dim,
            basis_map: tq.q,
        },
    ))
}

/// The perturbed representation `(ρ, g ↦ ad_ρ(w(g))·v(g))`, equivariant for
/// the perturbed system.
pub fn perturbed_rep(
    rep: &EquivariantRep,
    w: &crate::system::UnitaryMap,
) -> EquivariantRep {
    let v = rep
        .v
        .iter()
        .zip(&w.entries)
        .map(|(vg, wg)| rep.ad_rho(wg) * vg)
        .collect();
    EquivariantRep { module: rep.module.clone(), rho: rep.rho.clone(), v }
}

/// Verify the four equivariance axioms (and the module structure) of a
/// candidate representation, exhaustively over the group and the bases.
pub fn validate_equivariant(
    sys: &TwistedSystem,
    rep: &EquivariantRep,
    tol: &ScalarTolerance,
) -> Result<(), RepError> {
    let alg = &sys.algebra;
    let t = alg.total_dim();
    let n = sys.group.order();
    let d = rep.dim();
    if rep.module.algebra != *alg {
        return Err(RepError::SystemMismatch);
    }
    if rep.rho.len() != t || rep.v.len() != n {
        return Err(RepError::ShapeMismatch("rho/v table lengths".into()));
    }
    rep.module.validate(tol)?;
    let thr = |scale: f64| tol.at_scale(scale.max(1.0));
    let fail = |which: &str, g: usize, h: usize, defect: f64| RepError::AxiomFails {
        which: which.into(),
        g,
        h,
        defect,
    };

    // ρ is a unital *-homomorphism by adjointable operators.
    let unit_defect = (rep.rho_matrix(&alg.unit()) - CMatrix::identity(d, d)).norm();
    if unit_defect > thr(1.0) {
        return Err(fail("rho unital", 0, 0, unit_defect));
    }
    for k in 0..t {
        for l in 0..t {
            let prod = alg.basis_element(k).mul(&alg.basis_element(l));
            let defect = (rep.rho_matrix(&prod) - &rep.rho[k] * &rep.rho[l]).norm();
            if defect > thr(rep.rho[k].norm() * rep.rho[l].norm()) {
                return Err(fail("rho multiplicative", k, l, defect));
            }
        }
    }
    for k in 0..t {
        let star = alg.star_perm(k);
        for m in 0..t {
            let lhs = rep.rho[k].adjoint() * &rep.module.gram[m];
            let rhs = &rep.module.gram[m] * &rep.rho[star];
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm()) {
                return Err(fail("rho adjointable", k, m, defect));
            }
        }
        for m in 0..t {
            let defect =
                (&rep.rho[k] * &rep.module.right_action[m] - &rep.module.right_action[m] * &rep.rho[k])
                    .norm();
            if defect > thr(rep.rho[k].norm()) {
                return Err(fail("rho module map", k, m, defect));
            }
        }
    }

    for g in 0..n {
        // invertibility of v(g), by conditioned singular values
        let sv = rep.v[g].singular_values();
        let smin = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if smin < 1e-12 * sv.max() {
            return Err(fail("v invertible", g, 0, smin));
        }
        let am = sys.alpha_matrix(g);
        // (i) ρ(α_g(a))·v(g) = v(g)·ρ(a)
        for k in 0..t {
            let ag = alg.element_from_vec(&(am * alg.basis_element(k).vectorize()));
            let lhs = rep.rho_matrix(&ag) * &rep.v[g];
            let rhs = &rep.v[g] * &rep.rho[k];
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm()) {
                return Err(fail("i", g, k, defect));
            }
        }
        // (iii) v(g)^H · gram_k · v(g) = Σ_l α_g[k,l] gram_l
        for k in 0..t {
            let lhs = rep.v[g].adjoint() * &rep.module.gram[k] * &rep.v[g];
            let mut rhs = CMatrix::zeros(d, d);
            for l in 0..t {
                if am[(k, l)].norm_sqr() != 0.0 {
                    rhs += &rep.module.gram[l] * am[(k, l)];
                }
            }
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm().max(rep.module.gram[k].norm())) {
                return Err(fail("iii", g, k, defect));
            }
        }
        // (iv) v(g)·R(e_m) = R(α_g(e_m))·v(g)
        for m in 0..t {
            let ag = alg.element_from_vec(&(am * alg.basis_element(m).vectorize()));
            let lhs = &rep.v[g] * &rep.module.right_action[m];
            let rhs = rep.module.right_action_matrix(&ag) * &rep.v[g];
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm()) {
                return Err(fail("iv", g, m, defect));
            }
        }
        // isometry spot check on a few basis vectors (a consequence of (iii))
        for i in 0..d.min(8) {
            let x = CVector::from_fn(d, |r, _| {
                if r == i {
                    num_complex::Complex::new(1.0, 0.0)
                } else {
                    num_complex::Complex::new(0.0, 0.0)
                }
            });
            let before = rep.module.vector_norm(&x);
            let after = rep.module.vector_norm(&(&rep.v[g] * &x));
            if (before - after).abs() > thr(before) {
                return Err(fail("v isometric", g, i, (before - after).abs()));
            }
        }
    }
    // (ii) v(g)v(h) = ad_ρ(σ(g,h))·v(gh)
    for g in 0..n {
        for h in 0..n {
            let gh = sys.group.mul(g, h);
            let lhs = &rep.v[g] * &rep.v[h];
            let rhs = rep.ad_rho(sys.sigma(g, h)) * &rep.v[gh];
            let defect = (lhs - &rhs).norm();
            if defect > thr(rhs.norm()) {
                return Err(fail("ii", g, h, defect));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{C64, ONE};
    use crate::group::FiniteGroup;
    use crate::system::{validate_system, Automorphism, UnitaryMap};

    fn tol() -> ScalarTolerance {
        ScalarTolerance::default()
    }

    fn sys_triv() -> TwistedSystem {
        TwistedSystem::trivial(CStarAlgebra::scalars(), FiniteGroup::cyclic(2))
    }

    fn sys_m2() -> TwistedSystem {
        let algebra = CStarAlgebra::full(2);
        let group = FiniteGroup::cyclic(2);
        let mut u = algebra.unit();
        u.blocks[0][(1, 1)] = C64::new(-1.0, 0.0);
        let alpha = vec![Automorphism::identity(&algebra), Automorphism::inner(&algebra, u)];
        let sigma = vec![vec![algebra.unit(); 2]; 2];
        validate_system(algebra, group, alpha, sigma, &tol()).unwrap()
    }

    fn sys_tw() -> TwistedSystem {
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
        validate_system(algebra, group, alpha, sigma, &tol()).unwrap()
    }

    #[test]
    fn trivial_rep_validates() {
        for sys in [sys_triv(), sys_m2(), sys_tw()] {
            let rep = trivial_rep(&sys);
            assert_eq!(rep.dim(), sys.algebra.total_dim());
            validate_equivariant(&sys, &rep, &tol()).unwrap();
        }
    }

    #[test]
    fn trivial_rep_carrier_dims() {
        assert_eq!(trivial_rep(&sys_triv()).dim(), 1);
        assert_eq!(trivial_rep(&sys_m2()).dim(), 4);
    }

    #[test]
    fn regular_rep_validates() {
        for sys in [sys_triv(), sys_m2(), sys_tw()] {
            let rep = regular_rep(&sys);
            assert_eq!(rep.dim(), sys.group.order() * sys.algebra.total_dim());
            validate_equivariant(&sys, &rep, &tol()).unwrap();
        }
        assert_eq!(regular_rep(&sys_tw()).dim(), 4);
    }

    #[test]
    fn broken_isometry_is_detected() {
        let sys = sys_triv();
        let mut rep = trivial_rep(&sys);
        rep.v[1] *= C64::new(2.0, 0.0);
        let err = validate_equivariant(&sys, &rep, &tol()).unwrap_err();
        match err {
            RepError::AxiomFails { which, .. } => assert!(which == "iii" || which == "ii"),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn amplified_rep_validates_and_sign_negates() {
        let sys = sys_m2();
        let rep = trivial_rep(&sys);
        // sign representation of Z2 on ℂ
        let w = vec![
            CMatrix::identity(1, 1),
            CMatrix::identity(1, 1) * C64::new(-1.0, 0.0),
        ];
        let amp = amplify_rep(&sys, &rep, &w, &tol()).unwrap();
        validate_equivariant(&sys, &amp, &tol()).unwrap();
        assert_eq!(amp.dim(), rep.dim());
        assert!((&amp.v[1] + &rep.v[1]).norm() < 1e-12, "v(s) negated");

        // left regular scalar rep of Z2 on ℂ²
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 1)] = ONE;
        p[(1, 0)] = ONE;
        let w2 = vec![CMatrix::identity(2, 2), p];
        let amp2 = amplify_rep(&sys, &rep, &w2, &tol()).unwrap();
        validate_equivariant(&sys, &amp2, &tol()).unwrap();
        assert_eq!(amp2.dim(), 8);

        // not a representation: w(s)² ≠ w(e)
        let bad = vec![CMatrix::identity(1, 1), CMatrix::identity(1, 1) * C64::new(0.0, 1.0)];
        assert!(matches!(
            amplify_rep(&sys, &rep, &bad, &tol()),
            Err(RepError::NotARepresentation { .. })
        ));
    }

    #[test]
    fn tensor_of_trivials_has_algebra_rank() {
        for sys in [sys_triv(), sys_m2()] {
            let rep = trivial_rep(&sys);
            let (tensor, witness) = internal_tensor_reps(&sys, &rep, &rep).unwrap();
            assert_eq!(witness.gram_rank, sys.algebra.total_dim());
            assert_eq!(
                witness.dropped_dim,
                sys.algebra.total_dim() * sys.algebra.total_dim() - sys.algebra.total_dim()
            );
            validate_equivariant(&sys, &tensor, &tol()).unwrap();
        }
    }

    #[test]
    fn tensor_with_regular_validates() {
        let sys = sys_m2();
        let (tensor, witness) = internal_tensor_reps(&sys, &trivial_rep(&sys), &regular_rep(&sys)).unwrap();
        assert_eq!(witness.gram_rank, regular_rep(&sys).dim());
        validate_equivariant(&sys, &tensor, &tol()).unwrap();
    }

    #[test]
    fn tensor_inner_product_matches_direct_formula() {
        let sys = sys_m2();
        let rep = trivial_rep(&sys);
        let d = rep.dim();
        // simple tensors x₁⊗x₂, y₁⊗y₂ with deterministic entries
        let x1 = CVector::from_fn(d, |i, _| C64::new(0.3 + i as f64, 0.1));
        let x2 = CVector::from_fn(d, |i, _| C64::new(0.2, -0.4 * i as f64));
        let y1 = CVector::from_fn(d, |i, _| C64::new(1.0 - 0.2 * i as f64, 0.0));
        let y2 = CVector::from_fn(d, |i, _| C64::new(0.0, 0.5 + 0.1 * i as f64));
        let expected = rep
            .module
            .inner(&x2, &(rep.rho_matrix(&rep.module.inner(&x1, &y1)) * &y2));
        let (tensor, witness) = internal_tensor_reps(&sys, &rep, &rep).unwrap();
        let xq = &witness.basis_map * x1.kronecker(&x2);
        let yq = &witness.basis_map * y1.kronecker(&y2);
        let got = tensor.module.inner(&xq, &yq);
        assert!(got.distance(&expected) < 1e-10);
    }

    #[test]
    fn perturbed_rep_is_equivariant_for_perturbed_system() {
        let sys = sys_m2();
        let mut u = sys.algebra.unit();
        u.blocks[0][(1, 1)] = C64::new(-1.0, 0.0);
        let w = UnitaryMap { entries: vec![sys.algebra.unit(), u] };
        let perturbed = crate::system::perturb_unitary(&sys, &w, &tol()).unwrap();
        let rep = trivial_rep(&sys);
        let tilde = perturbed_rep(&rep, &w);
        validate_equivariant(&perturbed, &tilde, &tol()).unwrap();
        // w ≡ 1 leaves the representation unchanged
        let id = UnitaryMap::constant_unit(&sys);
        let same = perturbed_rep(&rep, &id);
        for g in 0..2 {
            assert!((&same.v[g] - &rep.v[g]).norm() < 1e-14);
        }
    }

    #[test]
    fn direct_sum_validates() {
        let sys = sys_m2();
        let sum = direct_sum_reps(&trivial_rep(&sys), &regular_rep(&sys));
        validate_equivariant(&sys, &sum, &tol()).unwrap();
    }

    #[test]
    fn v_times_v_inverse_matches_ad_rho_sigma() {
        let sys = sys_tw();
        let rep = regular_rep(&sys);
        for g in 0..sys.group.order() {
            let ginv = sys.group.inv(g);
            let lhs = &rep.v[g] * &rep.v[ginv];
            let rhs = rep.ad_rho(sys.sigma(g, ginv));
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }
}
