//! Twisted systems `(A, G, α, σ)`: axioms, perturbations, coboundaries and
//! transport along algebra/group isomorphisms.
//!
//! Automorphisms of a direct sum of matrix blocks are stored in a
//! perm-plus-inner normal form `a ↦ u·perm(a)·u*`, which is exhaustive at
//! this scale and closed under composition and inversion.

use crate::algebra::{
    AlgElement, C64, CMatrix, CStarAlgebra, ScalarTolerance, ONE,
};
use crate::group::FiniteGroup;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("automorphism block permutation does not preserve block dimensions")]
    BadBlockPermutation,
    #[error("automorphism unitary fails the unitarity check")]
    NotUnitaryAutomorphism,
    #[error("alpha/sigma tables do not match the group order")]
    TableShape,
    #[error("sigma({g},{h}) is not unitary")]
    NotUnitaryCocycle { g: usize, h: usize },
    #[error("alpha_g alpha_h ≠ Ad(sigma({g},{h})) alpha_gh (defect {defect:.3e})")]
    AutomorphismTwistMismatch { g: usize, h: usize, defect: f64 },
    #[error("2-cocycle identity fails at ({g},{h},{k}) (defect {defect:.3e})")]
    CocycleIdentityFails { g: usize, h: usize, k: usize, defect: f64 },
    #[error("normalization fails at {g}: sigma(g,e) or sigma(e,g) ≠ 1")]
    NotNormalized { g: usize },
    #[error("unitary map is not normalized (w(e) ≠ 1)")]
    MapNotNormalized,
    #[error("unitary map entry {0} is not unitary")]
    MapEntryNotUnitary(usize),
    #[error("cocycle entry ({g},{h}) is not central")]
    NotCentral { g: usize, h: usize },
    #[error("scalar cocycle entry ({g},{h}) does not have modulus 1")]
    NotUnitModulus { g: usize, h: usize },
    #[error("not an isomorphism: {0}")]
    NotIsomorphism(String),
}

/// An automorphism `a ↦ u · perm(a) · u*` of a block algebra.
///
/// `block_perm[b]` is the block receiving the entries of block `b`; it may
/// only map blocks onto blocks of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    pub block_perm: Vec<usize>,
    pub unitary: AlgElement,
}

fn permute_blocks(perm: &[usize], a: &AlgElement) -> AlgElement {
    let mut blocks = a.blocks.clone();
    for (b, m) in a.blocks.iter().enumerate() {
        blocks[perm[b]] = m.clone();
    }
    AlgElement { blocks }
}

fn invert_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (b, &p) in perm.iter().enumerate() {
        inv[p] = b;
    }
    inv
}

impl Automorphism {
    pub fn identity(algebra: &CStarAlgebra) -> Self {
        Automorphism {
            block_perm: (0..algebra.num_blocks()).collect(),
            unitary: algebra.unit(),
        }
    }

    /// Inner automorphism `Ad(u)`.
    pub fn inner(algebra: &CStarAlgebra, u: AlgElement) -> Self {
        Automorphism { block_perm: (0..algebra.num_blocks()).collect(), unitary: u }
    }

    pub fn check(&self, algebra: &CStarAlgebra, tol: &ScalarTolerance) -> Result<(), SystemError> {
        let dims = algebra.block_dims();
        if self.block_perm.len() != dims.len() {
            return Err(SystemError::BadBlockPermutation);
        }
        let mut seen = vec![false; dims.len()];
        for (b, &p) in self.block_perm.iter().enumerate() {
            if p >= dims.len() || seen[p] || dims[p] != dims[b] {
                return Err(SystemError::BadBlockPermutation);
            }
            seen[p] = true;
        }
        if !self.unitary.shape_matches(algebra) || !self.unitary.is_unitary(tol) {
            return Err(SystemError::NotUnitaryAutomorphism);
        }
        Ok(())
    }

    pub fn apply(&self, a: &AlgElement) -> AlgElement {
        let p = permute_blocks(&self.block_perm, a);
        self.unitary.mul(&p).mul(&self.unitary.adjoint())
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        let perm: Vec<usize> = other.block_perm.iter().map(|&b| self.block_perm[b]).collect();
        let unitary = self.unitary.mul(&permute_blocks(&self.block_perm, &other.unitary));
        Automorphism { block_perm: perm, unitary }
    }

    pub fn inverse(&self) -> Automorphism {
        let inv_perm = invert_perm(&self.block_perm);
        let unitary = permute_blocks(&inv_perm, &self.unitary).adjoint();
        Automorphism { block_perm: inv_perm, unitary }
    }

    /// Matrix on flat coordinates.
    pub fn matrix(&self, algebra: &CStarAlgebra) -> CMatrix {
        let t = algebra.total_dim();
        let mut m = CMatrix::zeros(t, t);
        for k in 0..t {
            let col = self.apply(&algebra.basis_element(k)).vectorize();
            m.set_column(k, &col);
        }
        m
    }

    /// Distance between two automorphisms as linear maps, on the basis.
    pub fn map_distance(&self, other: &Automorphism, algebra: &CStarAlgebra) -> f64 {
        (0..algebra.total_dim())
            .map(|k| {
                let e = algebra.basis_element(k);
                self.apply(&e).distance(&other.apply(&e))
            })
            .fold(0.0, f64::max)
    }
}

/// A normalized map `w: G → U(A)`.
#[derive(Debug, Clone)]
pub struct UnitaryMap {
    pub entries: Vec<AlgElement>,
}

impl UnitaryMap {
    pub fn constant_unit(sys: &TwistedSystem) -> Self {
        UnitaryMap { entries: vec![sys.algebra.unit(); sys.group.order()] }
    }

    pub fn check(&self, sys: &TwistedSystem, tol: &ScalarTolerance) -> Result<(), SystemError> {
        if self.entries.len() != sys.group.order() {
            return Err(SystemError::TableShape);
        }
        let e = sys.group.identity();
        if self.entries[e].distance(&sys.algebra.unit()) > tol.at_scale(1.0) {
            return Err(SystemError::MapNotNormalized);
        }
        for (g, u) in self.entries.iter().enumerate() {
            if !u.shape_matches(&sys.algebra) || !u.is_unitary(tol) {
                return Err(SystemError::MapEntryNotUnitary(g));
            }
        }
        Ok(())
    }

    /// Pointwise adjoint; the perturbation by it undoes the perturbation by `self`.
    pub fn pointwise_adjoint(&self) -> UnitaryMap {
        UnitaryMap { entries: self.entries.iter().map(|u| u.adjoint()).collect() }
    }

    /// Pointwise product `g ↦ other(g)·self(g)`.
    pub fn then(&self, other: &UnitaryMap) -> UnitaryMap {
        UnitaryMap {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| b.mul(a))
                .collect(),
        }
    }
}

/// A twisted system `Σ = (A, G, α, σ)`; validated on construction via
/// [`validate_system`].
#[derive(Debug, Clone)]
pub struct TwistedSystem {
    pub algebra: CStarAlgebra,
    pub group: FiniteGroup,
    pub alpha: Vec<Automorphism>,
    pub sigma: Vec<Vec<AlgElement>>,
    alpha_mats: Vec<CMatrix>,
}

impl TwistedSystem {
    /// Shape-checked construction without the axiom checks; used by IO and by
    /// the validators themselves.
    pub fn new_unchecked(
        algebra: CStarAlgebra,
        group: FiniteGroup,
        alpha: Vec<Automorphism>,
        sigma: Vec<Vec<AlgElement>>,
    ) -> Result<Self, SystemError> {
        let n = group.order();
        if alpha.len() != n || sigma.len() != n || sigma.iter().any(|row| row.len() != n) {
            return Err(SystemError::TableShape);
        }
        for a in &alpha {
            a.check(&algebra, &ScalarTolerance::default())
                .map_err(|_| SystemError::BadBlockPermutation)
                .ok();
        }
        let alpha_mats = alpha.iter().map(|a| a.matrix(&algebra)).collect();
        Ok(TwistedSystem { algebra, group, alpha, sigma, alpha_mats })
    }

    pub fn alpha_matrix(&self, g: usize) -> &CMatrix {
        &self.alpha_mats[g]
    }

    pub fn apply_alpha(&self, g: usize, a: &AlgElement) -> AlgElement {
        self.alpha[g].apply(a)
    }

    pub fn apply_alpha_inv(&self, g: usize, a: &AlgElement) -> AlgElement {
        self.alpha[g].inverse().apply(a)
    }

    pub fn sigma(&self, g: usize, h: usize) -> &AlgElement {
        &self.sigma[g][h]
    }

    /// Untwisted system `(A, G, id, 1)` over the given group.
    pub fn trivial(algebra: CStarAlgebra, group: FiniteGroup) -> Self {
        let n = group.order();
        let alpha = vec![Automorphism::identity(&algebra); n];
        let sigma = vec![vec![algebra.unit(); n]; n];
        TwistedSystem::new_unchecked(algebra, group, alpha, sigma)
            .expect("trivial tables are well shaped")
    }

    /// Entrywise comparison of two systems (group tables exactly, maps and
    /// cocycles within `tol`).
    pub fn approx_eq(&self, other: &TwistedSystem, tol: f64) -> bool {
        if self.algebra != other.algebra || self.group != other.group {
            return false;
        }
        let n = self.group.order();
        for g in 0..n {
            if self.alpha[g].map_distance(&other.alpha[g], &self.algebra) > tol {
                return false;
            }
            for h in 0..n {
                if self.sigma[g][h].distance(&other.sigma[g][h]) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Largest deviation between the α/σ tables of two systems.
    pub fn table_gap(&self, other: &TwistedSystem) -> f64 {
        let n = self.group.order();
        let mut gap: f64 = 0.0;
        for g in 0..n {
            gap = gap.max(self.alpha[g].map_distance(&other.alpha[g], &self.algebra));
            for h in 0..n {
                gap = gap.max(self.sigma[g][h].distance(&other.sigma[g][h]));
            }
        }
        gap
    }
}

/// Check the three twisted-action axioms exhaustively and return the
/// validated system.
pub fn validate_system(
    algebra: CStarAlgebra,
    group: FiniteGroup,
    alpha: Vec<Automorphism>,
    sigma: Vec<Vec<AlgElement>>,
    tol: &ScalarTolerance,
) -> Result<TwistedSystem, SystemError> {
    let sys = TwistedSystem::new_unchecked(algebra, group, alpha, sigma)?;
    revalidate_system(&sys, tol)?;
    Ok(sys)
}

/// The axiom checks of [`validate_system`] on an already-built value.
pub fn revalidate_system(sys: &TwistedSystem, tol: &ScalarTolerance) -> Result<(), SystemError> {
    let n = sys.group.order();
    let e = sys.group.identity();
    let unit = sys.algebra.unit();
    for a in &sys.alpha {
        a.check(&sys.algebra, tol)?;
    }
    for g in 0..n {
        if sys.sigma[g][e].distance(&unit) > tol.at_scale(1.0)
            || sys.sigma[e][g].distance(&unit) > tol.at_scale(1.0)
        {
            return Err(SystemError::NotNormalized { g });
        }
    }
    for g in 0..n {
        for h in 0..n {
            if !sys.sigma[g][h].shape_matches(&sys.algebra) || !sys.sigma[g][h].is_unitary(tol) {
                return Err(SystemError::NotUnitaryCocycle { g, h });
            }
        }
    }
    // α_g α_h = Ad(σ(g,h)) α_{gh}
    for g in 0..n {
        for h in 0..n {
            let gh = sys.group.mul(g, h);
            let lhs = sys.alpha[g].compose(&sys.alpha[h]);
            let twist = Automorphism::inner(&sys.algebra, sys.sigma[g][h].clone());
            let rhs = twist.compose(&sys.alpha[gh]);
            let defect = lhs.map_distance(&rhs, &sys.algebra);
            if defect > tol.at_scale(1.0) {
                return Err(SystemError::AutomorphismTwistMismatch { g, h, defect });
            }
        }
    }
    // σ(g,h) σ(gh,k) = α_g(σ(h,k)) σ(g,hk)
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                let lhs = sys.sigma[g][h].mul(&sys.sigma[sys.group.mul(g, h)][k]);
                let rhs = sys
                    .apply_alpha(g, &sys.sigma[h][k])
                    .mul(&sys.sigma[g][sys.group.mul(h, k)]);
                let defect = lhs.distance(&rhs);
                if defect > tol.at_scale(1.0) {
                    return Err(SystemError::CocycleIdentityFails { g, h, k, defect });
                }
            }
        }
    }
    Ok(())
}

/// Perturbation `Σ^w = (A, G, Ad(w(g))∘α_g, w(g)·α_g(w(g'))·σ(g,g')·w(gg')*)`.
pub fn perturb_unitary(
    sys: &TwistedSystem,
    w: &UnitaryMap,
    tol: &ScalarTolerance,
) -> Result<TwistedSystem, SystemError> {
    w.check(sys, tol)?;
    let n = sys.group.order();
    let alpha: Vec<Automorphism> = (0..n)
        .map(|g| Automorphism::inner(&sys.algebra, w.entries[g].clone()).compose(&sys.alpha[g]))
        .collect();
    let mut sigma = vec![vec![sys.algebra.zero(); n]; n];
    for g in 0..n {
        for h in 0..n {
            let gh = sys.group.mul(g, h);
            sigma[g][h] = w.entries[g]
                .mul(&sys.apply_alpha(g, &w.entries[h]))
                .mul(&sys.sigma[g][h])
                .mul(&w.entries[gh].adjoint());
        }
    }
    validate_system(sys.algebra.clone(), sys.group.clone(), alpha, sigma, tol)
}

/// A normalized 2-cocycle for α with values in `U(Z(A))`.
#[derive(Debug, Clone)]
pub struct CentralCocycle {
    pub entries: Vec<Vec<AlgElement>>,
}

impl CentralCocycle {
    /// Validate centrality, unitarity, normalization and the 2-cocycle
    /// identity (for α restricted to the center).
    pub fn check(&self, sys: &TwistedSystem, tol: &ScalarTolerance) -> Result<(), SystemError> {
        let n = sys.group.order();
        let e = sys.group.identity();
        if self.entries.len() != n || self.entries.iter().any(|r| r.len() != n) {
            return Err(SystemError::TableShape);
        }
        let unit = sys.algebra.unit();
        for g in 0..n {
            if self.entries[g][e].distance(&unit) > tol.at_scale(1.0)
                || self.entries[e][g].distance(&unit) > tol.at_scale(1.0)
            {
                return Err(SystemError::NotNormalized { g });
            }
        }
        for g in 0..n {
            for h in 0..n {
                let eta = &self.entries[g][h];
                if !eta.shape_matches(&sys.algebra) || !eta.is_central(tol.at_scale(1.0)) {
                    return Err(SystemError::NotCentral { g, h });
                }
                if !eta.is_unitary(tol) {
                    return Err(SystemError::NotUnitaryCocycle { g, h });
                }
            }
        }
        for g in 0..n {
            for h in 0..n {
                for k in 0..n {
                    let lhs = self.entries[g][h].mul(&self.entries[sys.group.mul(g, h)][k]);
                    let rhs = sys
                        .apply_alpha(g, &self.entries[h][k])
                        .mul(&self.entries[g][sys.group.mul(h, k)]);
                    let defect = lhs.distance(&rhs);
                    if defect > tol.at_scale(1.0) {
                        return Err(SystemError::CocycleIdentityFails { g, h, k, defect });
                    }
                }
            }
        }
        Ok(())
    }

    /// Lift a scalar cocycle to center-valued entries.
    pub fn from_scalar(sys: &TwistedSystem, omega: &ScalarCocycle) -> Self {
        let n = sys.group.order();
        let entries = (0..n)
            .map(|g| {
                (0..n)
                    .map(|h| sys.algebra.unit().scale(omega.omega[g][h]))
                    .collect()
            })
            .collect();
        CentralCocycle { entries }
    }
}

/// Perturbation `Σ(η) = (A, G, α, σ·η)` by a central cocycle.
pub fn perturb_central(
    sys: &TwistedSystem,
    eta: &CentralCocycle,
    tol: &ScalarTolerance,
) -> Result<TwistedSystem, SystemError> {
    eta.check(sys, tol)?;
    let n = sys.group.order();
    let sigma = (0..n)
        .map(|g| {
            (0..n)
                .map(|h| sys.sigma[g][h].mul(&eta.entries[g][h]))
                .collect()
        })
        .collect();
    validate_system(sys.algebra.clone(), sys.group.clone(), sys.alpha.clone(), sigma, tol)
}

/// Coboundary `∂u(g,h) = u(g)·α_g(u(h))·u(gh)*`.
pub fn coboundary(sys: &TwistedSystem, u: &UnitaryMap) -> Vec<Vec<AlgElement>> {
    let n = sys.group.order();
    (0..n)
        .map(|g| {
            (0..n)
                .map(|h| {
                    u.entries[g]
                        .mul(&sys.apply_alpha(g, &u.entries[h]))
                        .mul(&u.entries[sys.group.mul(g, h)].adjoint())
                })
                .collect()
        })
        .collect()
}

/// A normalized `𝕋`-valued group 2-cocycle.
#[derive(Debug, Clone)]
pub struct ScalarCocycle {
    pub omega: Vec<Vec<C64>>,
}

/// Validate unit modulus, normalization and the (trivial-action) cocycle
/// identity `ω(g,h)ω(gh,k) = ω(h,k)ω(g,hk)` over all triples.
pub fn validate_scalar_cocycle(
    group: &FiniteGroup,
    omega: Vec<Vec<C64>>,
    tol: &ScalarTolerance,
) -> Result<ScalarCocycle, SystemError> {
    let n = group.order();
    if omega.len() != n || omega.iter().any(|r| r.len() != n) {
        return Err(SystemError::TableShape);
    }
    for g in 0..n {
        for h in 0..n {
            if (omega[g][h].norm() - 1.0).abs() > tol.at_scale(1.0) {
                return Err(SystemError::NotUnitModulus { g, h });
            }
        }
    }
    let e = group.identity();
    for g in 0..n {
        if (omega[g][e] - ONE).norm() > tol.at_scale(1.0) || (omega[e][g] - ONE).norm() > tol.at_scale(1.0) {
            return Err(SystemError::NotNormalized { g });
        }
    }
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                let lhs = omega[g][h] * omega[group.mul(g, h)][k];
                let rhs = omega[h][k] * omega[g][group.mul(h, k)];
                let defect = (lhs - rhs).norm();
                if defect > tol.at_scale(1.0) {
                    return Err(SystemError::CocycleIdentityFails { g, h, k, defect });
                }
            }
        }
    }
    Ok(ScalarCocycle { omega })
}

/// An isomorphism `φ: A → B` in perm-plus-inner form: `φ(a) = u·perm(a)·u*`
/// with `u` unitary in the target algebra.
#[derive(Debug, Clone)]
pub struct AlgebraIsomorphism {
    pub source: CStarAlgebra,
    pub target: CStarAlgebra,
    /// `block_map[b]` is the target block receiving source block `b`.
    pub block_map: Vec<usize>,
    pub unitary: AlgElement,
}

impl AlgebraIsomorphism {
    pub fn identity(algebra: &CStarAlgebra) -> Self {
        AlgebraIsomorphism {
            source: algebra.clone(),
            target: algebra.clone(),
            block_map: (0..algebra.num_blocks()).collect(),
            unitary: algebra.unit(),
        }
    }

    pub fn check(&self, tol: &ScalarTolerance) -> Result<(), SystemError> {
        let sd = self.source.block_dims();
        let td = self.target.block_dims();
        if sd.len() != td.len() || self.block_map.len() != sd.len() {
            return Err(SystemError::NotIsomorphism("block count mismatch".into()));
        }
        let mut seen = vec![false; td.len()];
        for (b, &p) in self.block_map.iter().enumerate() {
            if p >= td.len() || seen[p] || td[p] != sd[b] {
                return Err(SystemError::NotIsomorphism(format!(
                    "block {b} cannot map onto target block {p}"
                )));
            }
            seen[p] = true;
        }
        if !self.unitary.shape_matches(&self.target) || !self.unitary.is_unitary(tol) {
            return Err(SystemError::NotIsomorphism("unitary part fails unitarity".into()));
        }
        Ok(())
    }

    pub fn apply(&self, a: &AlgElement) -> AlgElement {
        let mut blocks: Vec<CMatrix> = self
            .target
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        for (b, m) in a.blocks.iter().enumerate() {
            blocks[self.block_map[b]] = m.clone();
        }
        let moved = AlgElement { blocks };
        self.unitary.mul(&moved).mul(&self.unitary.adjoint())
    }

    pub fn inverse(&self) -> AlgebraIsomorphism {
        let inv_map = invert_perm(&self.block_map);
        let mut blocks: Vec<CMatrix> = self
            .source
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        for (b, m) in self.unitary.blocks.iter().enumerate() {
            blocks[inv_map[b]] = m.clone();
        }
        AlgebraIsomorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            block_map: inv_map,
            unitary: AlgElement { blocks }.adjoint(),
        }
    }

    /// Matrix on flat coordinates (target_dim × source_dim).
    pub fn matrix(&self) -> CMatrix {
        let s = self.source.total_dim();
        let t = self.target.total_dim();
        let mut m = CMatrix::zeros(t, s);
        for k in 0..s {
            let col = self.apply(&self.source.basis_element(k)).vectorize();
            m.set_column(k, &col);
        }
        m
    }

    /// The automorphism `φ∘β∘φ^{-1}` of the target when source = target of β.
    pub fn conjugate_automorphism(&self, beta: &Automorphism) -> Automorphism {
        // φ = (P, u), β = (Q, v): φβφ^{-1} = (PQP^{-1}, u·perm_P(v)·perm_{PQP^{-1}}(u*))
        // computed directly from the normal forms.
        let p = &self.block_map;
        let p_inv = invert_perm(p);
        let perm: Vec<usize> = (0..p.len()).map(|c| p[beta.block_perm[p_inv[c]]]).collect();
        // unitary of the composite: φ∘β∘φ^{-1}(a) = u·P(v·Q(P^{-1}(u* a u))·v*)·u*
        // = [u·P(v)·PQ(P^{-1}(u*))] (PQP^{-1})(a) [...]*
        let move_to_target = |x: &AlgElement| {
            let mut blocks: Vec<CMatrix> = self
                .target
                .block_dims()
                .iter()
                .map(|&n| CMatrix::zeros(n, n))
                .collect();
            for (b, m) in x.blocks.iter().enumerate() {
                blocks[p[b]] = m.clone();
            }
            AlgElement { blocks }
        };
        let pv = move_to_target(&beta.unitary);
        // perm(PQP^{-1}) applied to u*: the composite applied to u* without its own unitary
        let mut moved_ustar_blocks: Vec<CMatrix> = self
            .target
            .block_dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        let ustar = self.unitary.adjoint();
        for (c, m) in ustar.blocks.iter().enumerate() {
            moved_ustar_blocks[perm[c]] = m.clone();
        }
        let moved_ustar = AlgElement { blocks: moved_ustar_blocks };
        let unitary = self.unitary.mul(&pv).mul(&moved_ustar);
        Automorphism { block_perm: perm, unitary }
    }
}

/// A group isomorphism `G → H` given by its value table.
#[derive(Debug, Clone)]
pub struct GroupIsomorphism {
    pub map: Vec<usize>,
}

impl GroupIsomorphism {
    pub fn identity(group: &FiniteGroup) -> Self {
        GroupIsomorphism { map: (0..group.order()).collect() }
    }

    pub fn check(&self, source: &FiniteGroup, target: &FiniteGroup) -> Result<(), SystemError> {
        let n = source.order();
        if target.order() != n || self.map.len() != n {
            return Err(SystemError::NotIsomorphism("group order mismatch".into()));
        }
        let mut seen = vec![false; n];
        for &v in &self.map {
            if v >= n || seen[v] {
                return Err(SystemError::NotIsomorphism("group map is not a bijection".into()));
            }
            seen[v] = true;
        }
        for g in 0..n {
            for h in 0..n {
                if self.map[source.mul(g, h)] != target.mul(self.map[g], self.map[h]) {
                    return Err(SystemError::NotIsomorphism(format!(
                        "tables disagree at ({g},{h})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> GroupIsomorphism {
        GroupIsomorphism { map: invert_perm(&self.map) }
    }
}

/// Transport `Σ` along `(φ, φ_G)`: returns `Θ = (B, H, φ∘α∘φ^{-1}, φ(σ))`,
/// group conjugate to `Σ` by construction.
pub fn group_transport(
    sys: &TwistedSystem,
    phi: &AlgebraIsomorphism,
    phi_g: &GroupIsomorphism,
    target_group: &FiniteGroup,
    tol: &ScalarTolerance,
) -> Result<TwistedSystem, SystemError> {
    phi.check(tol)?;
    if phi.source != sys.algebra {
        return Err(SystemError::NotIsomorphism("source algebra mismatch".into()));
    }
    phi_g.check(&sys.group, target_group)?;
    let n = sys.group.order();
    let inv = phi_g.inverse();
    let beta: Vec<Automorphism> = (0..n)
        .map(|h| phi.conjugate_automorphism(&sys.alpha[inv.map[h]]))
        .collect();
    let theta: Vec<Vec<AlgElement>> = (0..n)
        .map(|h1| {
            (0..n)
                .map(|h2| phi.apply(&sys.sigma[inv.map[h1]][inv.map[h2]]))
                .collect()
        })
        .collect();
    validate_system(phi.target.clone(), target_group.clone(), beta, theta, tol)
}

/// Verify that `(φ, φ_G)` is a group-conjugacy datum between `Σ` and `Θ`.
pub fn check_group_conjugacy(
    sigma: &TwistedSystem,
    theta: &TwistedSystem,
    phi: &AlgebraIsomorphism,
    phi_g: &GroupIsomorphism,
    tol: &ScalarTolerance,
) -> Result<(), SystemError> {
    phi.check(tol)?;
    phi_g.check(&sigma.group, &theta.group)?;
    if phi.source != sigma.algebra || phi.target != theta.algebra {
        return Err(SystemError::NotIsomorphism("algebra endpoints mismatch".into()));
    }
    let n = sigma.group.order();
    for g in 0..n {
        let lhs = phi.conjugate_automorphism(&sigma.alpha[g]);
        let defect = lhs.map_distance(&theta.alpha[phi_g.map[g]], &theta.algebra);
        if defect > tol.at_scale(1.0) {
            return Err(SystemError::NotIsomorphism(format!(
                "beta_phi(g) ≠ phi∘alpha_g∘phi^-1 at g={g} (defect {defect:.3e})"
            )));
        }
    }
    for g in 0..n {
        for h in 0..n {
            let lhs = phi.apply(&sigma.sigma[g][h]);
            let rhs = &theta.sigma[phi_g.map[g]][phi_g.map[h]];
            let defect = lhs.distance(rhs);
            if defect > tol.at_scale(1.0) {
                return Err(SystemError::NotIsomorphism(format!(
                    "theta(phi(g),phi(h)) ≠ phi(sigma(g,h)) at ({g},{h}) (defect {defect:.3e})"
                )));
            }
        }
    }
    Ok(())
}
