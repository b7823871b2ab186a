//! Finite-dimensional C*-algebras as direct sums of full complex matrix
//! blocks, together with the arithmetic and spectral primitives the rest of
//! the crate is built on.
//!
//! An algebra is described by its block dimensions `(n_1, ..., n_m)`; an
//! element is one complex matrix per block. All norms are C*-norms (largest
//! singular value over blocks) and all comparisons go through
//! [`ScalarTolerance`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };
pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("algebra must have at least one block")]
    EmptyBlockList,
    #[error("block {0} has dimension 0")]
    ZeroBlockDim(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Absolute/relative tolerance pair used for all floating comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for ScalarTolerance {
    fn default() -> Self {
        ScalarTolerance { atol: 1e-9, rtol: 1e-9 }
    }
}

impl ScalarTolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        assert!(atol.is_finite() && atol >= 0.0, "atol must be finite and nonnegative");
        assert!(rtol.is_finite() && rtol >= 0.0, "rtol must be finite and nonnegative");
        ScalarTolerance { atol, rtol }
    }

    /// Uniform tolerance, same absolute and relative part.
    pub fn uniform(tol: f64) -> Self {
        ScalarTolerance::new(tol, tol)
    }

    /// Effective threshold at the given scale.
    pub fn at_scale(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale
    }
}

/// A direct sum of full matrix algebras `M_{n_1} ⊕ ... ⊕ M_{n_m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CStarAlgebra {
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl CStarAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self, AlgebraError> {
        if block_dims.is_empty() {
            return Err(AlgebraError::EmptyBlockList);
        }
        if let Some(b) = block_dims.iter().position(|&n| n == 0) {
            return Err(AlgebraError::ZeroBlockDim(b));
        }
        let mut offsets = Vec::with_capacity(block_dims.len());
        let mut total = 0usize;
        for &n in &block_dims {
            offsets.push(total);
            total += n * n;
        }
        Ok(CStarAlgebra { block_dims, offsets, total_dim: total })
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Self {
        CStarAlgebra::new(vec![n]).expect("positive dimension")
    }

    /// The scalars, `ℂ`.
    pub fn scalars() -> Self {
        CStarAlgebra::full(1)
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Linear dimension over ℂ: `Σ n_b²`.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Coordinate index of the (i, j) entry of block `b` in the flat
    /// (row-major, block-concatenated) vectorization.
    pub fn coord(&self, block: usize, i: usize, j: usize) -> usize {
        self.offsets[block] + i * self.block_dims[block] + j
    }

    /// Inverse of [`coord`](Self::coord).
    pub fn coord_decompose(&self, k: usize) -> (usize, usize, usize) {
        let mut b = 0;
        while b + 1 < self.offsets.len() && self.offsets[b + 1] <= k {
            b += 1;
        }
        let r = k - self.offsets[b];
        let n = self.block_dims[b];
        (b, r / n, r % n)
    }

    pub fn zero(&self) -> AlgElement {
        AlgElement {
            blocks: self.block_dims.iter().map(|&n| CMatrix::zeros(n, n)).collect(),
        }
    }

    pub fn unit(&self) -> AlgElement {
        AlgElement {
            blocks: self.block_dims.iter().map(|&n| CMatrix::identity(n, n)).collect(),
        }
    }

    /// The k-th matrix-unit basis element.
    pub fn basis_element(&self, k: usize) -> AlgElement {
        let (b, i, j) = self.coord_decompose(k);
        let mut e = self.zero();
        e.blocks[b][(i, j)] = ONE;
        e
    }

    /// All matrix units, in coordinate order.
    pub fn basis(&self) -> Vec<AlgElement> {
        (0..self.total_dim).map(|k| self.basis_element(k)).collect()
    }

    /// Coordinate permutation performed by the adjoint: `vec(a*) = star ∘ conj(vec(a))`.
    pub fn star_perm(&self, k: usize) -> usize {
        let (b, i, j) = self.coord_decompose(k);
        self.coord(b, j, i)
    }

    /// Block identities `0 ⊕ ... ⊕ I_{n_b} ⊕ ... ⊕ 0`; these span the center.
    pub fn center_basis(&self) -> Vec<AlgElement> {
        (0..self.num_blocks())
            .map(|b| {
                let mut e = self.zero();
                let n = self.block_dims[b];
                e.blocks[b] = CMatrix::identity(n, n);
                e
            })
            .collect()
    }

    /// Element from flat coordinates.
    pub fn element_from_vec(&self, v: &CVector) -> AlgElement {
        assert_eq!(v.len(), self.total_dim, "coordinate vector length");
        let mut blocks = Vec::with_capacity(self.num_blocks());
        for b in 0..self.num_blocks() {
            let n = self.block_dims[b];
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = v[self.coord(b, i, j)];
                }
            }
            blocks.push(m);
        }
        AlgElement { blocks }
    }

    /// Matrix of left multiplication `a ↦ b·a` on flat coordinates.
    pub fn left_mul_matrix(&self, b: &AlgElement) -> CMatrix {
        let t = self.total_dim;
        let mut m = CMatrix::zeros(t, t);
        for (bl, &n) in self.block_dims.iter().enumerate() {
            let lhs = &b.blocks[bl];
            // (b·a)_{ij} = Σ_r b_{ir} a_{rj}
            for i in 0..n {
                for j in 0..n {
                    let row = self.coord(bl, i, j);
                    for r in 0..n {
                        m[(row, self.coord(bl, r, j))] = lhs[(i, r)];
                    }
                }
            }
        }
        m
    }

    /// Matrix of right multiplication `a ↦ a·b` on flat coordinates.
    pub fn right_mul_matrix(&self, b: &AlgElement) -> CMatrix {
        let t = self.total_dim;
        let mut m = CMatrix::zeros(t, t);
        for (bl, &n) in self.block_dims.iter().enumerate() {
            let rhs = &b.blocks[bl];
            // (a·b)_{ij} = Σ_r a_{ir} b_{rj}
            for i in 0..n {
                for j in 0..n {
                    let row = self.coord(bl, i, j);
                    for r in 0..n {
                        m[(row, self.coord(bl, i, r))] = rhs[(r, j)];
                    }
                }
            }
        }
        m
    }

    /// Coordinates of the trace functional: `tr(a) = trace_vec · vec(a)`.
    pub fn trace_vec(&self) -> CVector {
        let mut v = CVector::zeros(self.total_dim);
        for b in 0..self.num_blocks() {
            for i in 0..self.block_dims[b] {
                v[self.coord(b, i, i)] = ONE;
            }
        }
        v
    }
}

/// An element of a [`CStarAlgebra`]: one complex matrix per block.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgElement {
    pub blocks: Vec<CMatrix>,
}

impl AlgElement {
    pub fn same_shape(&self, other: &AlgElement) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }

    pub fn shape_matches(&self, algebra: &CStarAlgebra) -> bool {
        self.blocks.len() == algebra.num_blocks()
            && self
                .blocks
                .iter()
                .zip(algebra.block_dims())
                .all(|(m, &n)| m.nrows() == n && m.ncols() == n)
    }

    pub fn try_add(&self, other: &AlgElement) -> Result<AlgElement, AlgebraError> {
        if !self.same_shape(other) {
            return Err(AlgebraError::ShapeMismatch("add of unequal shapes".into()));
        }
        Ok(AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_mul(&self, other: &AlgElement) -> Result<AlgElement, AlgebraError> {
        if !self.same_shape(other) {
            return Err(AlgebraError::ShapeMismatch("mul of unequal shapes".into()));
        }
        Ok(AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn add(&self, other: &AlgElement) -> AlgElement {
        self.try_add(other).expect("shape mismatch")
    }

    pub fn sub(&self, other: &AlgElement) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &AlgElement) -> AlgElement {
        self.try_mul(other).expect("shape mismatch")
    }

    /// Conjugate transpose per block.
    pub fn adjoint(&self) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|m| m.adjoint()).collect() }
    }

    pub fn scale(&self, lambda: C64) -> AlgElement {
        AlgElement { blocks: self.blocks.iter().map(|m| m * lambda).collect() }
    }

    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|m| m.trace()).sum()
    }

    /// C*-norm: max over blocks of the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                if m.nrows() == 1 {
                    m[(0, 0)].norm()
                } else {
                    m.singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt norm of the flat coordinates.
    pub fn hs_norm(&self) -> f64 {
        self.blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn vectorize(&self) -> CVector {
        let total: usize = self.blocks.iter().map(|m| m.nrows() * m.ncols()).sum();
        let mut v = CVector::zeros(total);
        let mut k = 0;
        for m in &self.blocks {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v[k] = m[(i, j)];
                    k += 1;
                }
            }
        }
        v
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.operator_norm() <= tol
    }

    /// `‖self − other‖` in the C*-norm.
    pub fn distance(&self, other: &AlgElement) -> f64 {
        self.sub(other).operator_norm()
    }

    pub fn is_unitary(&self, tol: &ScalarTolerance) -> bool {
        let u_star_u = self.adjoint().mul(self);
        let n = u_star_u.blocks.iter().map(|m| m.nrows()).max().unwrap_or(1) as f64;
        let unit = AlgElement {
            blocks: self.blocks.iter().map(|m| CMatrix::identity(m.nrows(), m.ncols())).collect(),
        };
        u_star_u.distance(&unit) <= tol.at_scale(n)
    }

    /// Whether every block is a scalar multiple of the identity.
    pub fn is_central(&self, tol: f64) -> bool {
        self.blocks.iter().all(|m| {
            let lambda = m.trace() / C64::new(m.nrows() as f64, 0.0);
            let mut d: f64 = 0.0;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    let expect = if i == j { lambda } else { ZERO };
                    d = d.max((m[(i, j)] - expect).norm());
                }
            }
            d <= tol
        })
    }

    /// Scalar per block, for central elements.
    pub fn central_scalars(&self) -> Vec<C64> {
        self.blocks.iter().map(|m| m.trace() / C64::new(m.nrows() as f64, 0.0)).collect()
    }
}

/// Outcome of a positivity check.
#[derive(Debug, Clone, PartialEq)]
pub enum PositivityVerdict {
    Positive,
    NotSelfAdjoint { defect: f64 },
    NegativeEigenvalue { block: usize, value: f64 },
}

impl PositivityVerdict {
    pub fn is_positive(&self) -> bool {
        matches!(self, PositivityVerdict::Positive)
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_modulus(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of a complex matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    if herm.nrows() == 1 {
        return vec![herm[(0, 0)].re];
    }
    herm.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Minimum eigenvalue of the Hermitian part.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Decide positivity of `a` within tolerance: self-adjoint up to
/// `atol + rtol·‖a‖` and all eigenvalues of the Hermitian part at least
/// `−(atol + rtol·‖a‖)` per block.
pub fn positivity_test(a: &AlgElement, tol: &ScalarTolerance) -> PositivityVerdict {
    let scale = a.operator_norm();
    let threshold = tol.at_scale(scale);
    let defect = a.distance(&a.adjoint());
    if defect > threshold {
        return PositivityVerdict::NotSelfAdjoint { defect };
    }
    let mut worst: Option<(usize, f64)> = None;
    for (b, m) in a.blocks.iter().enumerate() {
        let min = min_hermitian_eigenvalue(m);
        if worst.is_none_or(|(_, w)| min < w) {
            worst = Some((b, min));
        }
    }
    match worst {
        Some((block, value)) if value < -threshold => {
            PositivityVerdict::NegativeEigenvalue { block, value }
        }
        _ => PositivityVerdict::Positive,
    }
}

/// Positivity of an `n×n` matrix over the algebra, in the faithful block
/// picture `M_n(A) = ⊕_b M_{n·n_b}`. Returns the minimum Hermitian
/// eigenvalue over blocks together with the skew defect.
pub fn matrix_over_algebra_min_eig(
    algebra: &CStarAlgebra,
    entries: &[Vec<AlgElement>],
) -> (f64, f64) {
    let n = entries.len();
    let mut min_eig = f64::INFINITY;
    let mut max_scale: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for (b, &nb) in algebra.block_dims().iter().enumerate() {
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
        skew = skew.max(if dim == 1 { anti[(0, 0)].norm() } else { anti.singular_values().max() });
        let eigs = herm.symmetric_eigen().eigenvalues;
        for &e in eigs.iter() {
            min_eig = min_eig.min(e);
            max_scale = max_scale.max(e.abs());
        }
    }
    let _ = max_scale;
    (min_eig, skew)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> CStarAlgebra {
        CStarAlgebra::full(2)
    }

    #[test]
    fn unit_law_and_involution() {
        let a = m2();
        let e01 = a.basis_element(a.coord(0, 0, 1));
        assert_eq!(a.unit().mul(&e01), e01);
        assert_eq!(e01.adjoint().adjoint(), e01);
    }

    #[test]
    fn matrix_unit_product() {
        let a = m2();
        let e12 = a.basis_element(a.coord(0, 0, 1));
        let e21 = a.basis_element(a.coord(0, 1, 0));
        let e11 = a.basis_element(a.coord(0, 0, 0));
        assert!(e12.mul(&e21).distance(&e11) < 1e-15);
    }

    #[test]
    fn diagonal_operator_norm() {
        let a = m2();
        let mut d = a.zero();
        d.blocks[0][(0, 0)] = C64::new(3.0, 0.0);
        d.blocks[0][(1, 1)] = C64::new(-4.0, 0.0);
        assert!((d.operator_norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_permutation_norm() {
        let a = m2();
        let e12 = a.basis_element(a.coord(0, 0, 1));
        let e21 = a.basis_element(a.coord(0, 1, 0));
        let s = e12.add(&e21);
        assert!((s.operator_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_norm_is_one() {
        let a = m2();
        let mut u = a.zero();
        let t = std::f64::consts::FRAC_PI_4;
        u.blocks[0][(0, 0)] = C64::new(t.cos(), 0.0);
        u.blocks[0][(0, 1)] = C64::new(-t.sin(), 0.0);
        u.blocks[0][(1, 0)] = C64::new(t.sin(), 0.0);
        u.blocks[0][(1, 1)] = C64::new(t.cos(), 0.0);
        assert!(u.is_unitary(&ScalarTolerance::default()));
        assert!((u.operator_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn positivity_of_unit_and_signature() {
        let a = m2();
        let tol = ScalarTolerance::default();
        assert!(positivity_test(&a.unit(), &tol).is_positive());

        let mut d = a.zero();
        d.blocks[0][(0, 0)] = ONE;
        d.blocks[0][(1, 1)] = C64::new(-1.0, 0.0);
        match positivity_test(&d, &tol) {
            PositivityVerdict::NegativeEigenvalue { block, value } => {
                assert_eq!(block, 0);
                assert!((value + 1.0).abs() < 1e-12);
            }
            v => panic!("expected negative eigenvalue, got {v:?}"),
        }
    }

    #[test]
    fn tolerance_absorbs_noise() {
        let a = m2();
        let mut d = a.zero();
        d.blocks[0][(0, 0)] = ONE;
        d.blocks[0][(1, 1)] = C64::new(-1e-12, 0.0);
        let tol = ScalarTolerance::new(1e-8, 0.0);
        assert!(positivity_test(&d, &tol).is_positive());
    }

    #[test]
    fn center_basis_shapes() {
        let a = CStarAlgebra::new(vec![2, 3]).unwrap();
        let c = a.center_basis();
        assert_eq!(c.len(), 2);
        assert!((c[0].blocks[0].trace().re - 2.0).abs() < 1e-15);
        assert!(c[0].blocks[1].norm_squared() < 1e-30);
        assert!((c[1].blocks[1].trace().re - 3.0).abs() < 1e-15);

        let two = CStarAlgebra::new(vec![1, 1]).unwrap();
        let cb = two.center_basis();
        assert_eq!(cb.len(), 2);
        assert!((cb[0].blocks[0][(0, 0)] - ONE).norm() < 1e-15);
    }

    #[test]
    fn full_matrix_algebra_center_is_scalar() {
        let a = m2();
        let c = a.center_basis();
        assert_eq!(c.len(), 1);
        assert!(c[0].distance(&a.unit()) < 1e-15);
    }

    #[test]
    fn left_right_mul_matrices_agree_with_products() {
        let a = CStarAlgebra::new(vec![2, 1]).unwrap();
        let x = a.basis_element(1).add(&a.basis_element(4).scale(C64::new(0.0, 2.0)));
        let y = a.basis_element(2).add(&a.basis_element(0).scale(C64::new(-1.5, 0.5)));
        let lx = a.left_mul_matrix(&x);
        let prod = a.element_from_vec(&(lx * y.vectorize()));
        assert!(prod.distance(&x.mul(&y)) < 1e-14);
        let rx = a.right_mul_matrix(&x);
        let prod2 = a.element_from_vec(&(rx * y.vectorize()));
        assert!(prod2.distance(&y.mul(&x)) < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = m2();
        let b = CStarAlgebra::scalars();
        assert!(a.unit().try_mul(&b.unit()).is_err());
        assert!(a.unit().try_add(&b.unit()).is_err());
    }

    #[test]
    fn star_perm_roundtrip() {
        let a = CStarAlgebra::new(vec![2, 3]).unwrap();
        for k in 0..a.total_dim() {
            assert_eq!(a.star_perm(a.star_perm(k)), k);
        }
    }
}
