//! Amenability witnesses: finite nets of finitely supported positive
//! definite coefficient maps converging to the identity, Exel-type
//! approximation data, and the transfer of witnesses across a Morita
//! equivalence.
//!
//! At finite scale a net is an ordered list and the limit condition is read
//! at its final member; every finite-scale system here is amenable (the
//! constant Exel function already witnesses it), so the value of this module
//! is the verified transfer construction, not the existence question.

use crate::algebra::{max_modulus, AlgElement, C64, CMatrix, CVector, ScalarTolerance};
use crate::equivariant::regular_rep;
use crate::fourier::{coefficient_map, pd_check, sup_norm, CoeffMap, FourierError, Provenance};
use crate::morita::{transfer, CompatibleAction, Frame, MoritaError, TransferMode};
use crate::system::TwistedSystem;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmenabilityError {
    #[error("witness must contain at least one member")]
    EmptyWitness,
    #[error("witness members live over different systems")]
    SystemMismatch,
    #[error("witness member {0} is not positive definite")]
    NotPD(usize),
    #[error("residual ‖T_g(a) − a‖ = {value:.3e} at g={g}, basis element {basis} exceeds epsilon")]
    ResidualTooLarge { g: usize, basis: usize, value: f64 },
    #[error("transferred member {0} has support outside the original support")]
    SupportGrew(usize),
    #[error("transferred bound {got:.6e} exceeds K·bound = {limit:.6e}")]
    BoundExceeded { got: f64, limit: f64 },
    #[error("Exel coefficient disagrees with the regular-representation coefficient (defect {0:.3e})")]
    ExelCrossCheckFailed(f64),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Morita(#[from] MoritaError),
}

/// A finitely supported map `ξ: G → A`.
#[derive(Debug, Clone)]
pub struct ExelFunction {
    pub xi: Vec<AlgElement>,
}

impl ExelFunction {
    /// `ξ(h) = |G|^{-1/2}·1_A` for every `h`; its coefficient is the
    /// identity, witnessing amenability of any finite-scale system.
    pub fn constant(sys: &TwistedSystem) -> Self {
        let c = 1.0 / (sys.group.order() as f64).sqrt();
        ExelFunction {
            xi: vec![sys.algebra.unit().scale(C64::new(c, 0.0)); sys.group.order()],
        }
    }

    /// `ξ = δ_e·1_A`.
    pub fn delta_identity(sys: &TwistedSystem) -> Self {
        let mut xi = vec![sys.algebra.zero(); sys.group.order()];
        xi[sys.group.identity()] = sys.algebra.unit();
        ExelFunction { xi }
    }

    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.xi.len()).filter(|&h| self.xi[h].operator_norm() > tol).collect()
    }

    /// Coordinates of `ξ` in the regular module `A^G`.
    pub fn as_regular_vector(&self, sys: &TwistedSystem) -> CVector {
        let t = sys.algebra.total_dim();
        let mut v = CVector::zeros(sys.group.order() * t);
        for (h, x) in self.xi.iter().enumerate() {
            let coords = x.vectorize();
            for k in 0..t {
                v[h * t + k] = coords[k];
            }
        }
        v
    }
}

/// `T^ξ_g(a) = Σ_h ξ(h)*·a·α_g(ξ(g^{-1}h))`, together with the value
/// `‖Σ_g ξ(g)*ξ(g)‖` of the uniform-boundedness condition.
///
/// The table is assembled from the defining sum and cross-checked against
/// the diagonal coefficient of the regular representation at `ξ`, whose
/// provenance it carries.
pub fn exel_coefficient(
    sys: &Arc<TwistedSystem>,
    xi: &ExelFunction,
) -> Result<(CoeffMap, f64), AmenabilityError> {
    let alg = &sys.algebra;
    let t = alg.total_dim();
    let n = sys.group.order();
    if xi.xi.len() != n || xi.xi.iter().any(|x| !x.shape_matches(alg)) {
        return Err(AmenabilityError::SystemMismatch);
    }
    let mut per_g = Vec::with_capacity(n);
    for g in 0..n {
        let mut m = CMatrix::zeros(t, t);
        for k in 0..t {
            let e = alg.basis_element(k);
            let mut acc = alg.zero();
            for h in 0..n {
                let tail = sys.apply_alpha(g, &xi.xi[sys.group.mul(sys.group.inv(g), h)]);
                acc = acc.add(&xi.xi[h].adjoint().mul(&e).mul(&tail));
            }
            m.set_column(k, &acc.vectorize());
        }
        per_g.push(m);
    }
    let mut sum = alg.zero();
    for h in 0..n {
        sum = sum.add(&xi.xi[h].adjoint().mul(&xi.xi[h]));
    }
    let condition_a = sum.operator_norm();

    let rep = Arc::new(regular_rep(sys));
    let v = xi.as_regular_vector(sys);
    let direct = coefficient_map(sys, &rep, &v, &v)?;
    let defect = direct
        .per_g
        .iter()
        .zip(&per_g)
        .map(|(a, b)| max_modulus(&(a - b)))
        .fold(0.0, f64::max);
    if defect > 1e-10 * (1.0 + condition_a) {
        return Err(AmenabilityError::ExelCrossCheckFailed(defect));
    }
    let bound = rep.module.vector_norm(&v).powi(2);
    Ok((
        CoeffMap {
            system: sys.clone(),
            per_g,
            provenance: Some(Provenance { rep, x: v.clone(), y: v, bound }),
        },
        condition_a,
    ))
}

/// A validated amenability witness.
#[derive(Debug, Clone)]
pub struct AmenabilityWitness {
    pub net: Vec<CoeffMap>,
    /// Max over the net of the exact positive-definite sup-norms.
    pub bound: f64,
    /// Final-member residuals `‖T_g(e_k) − e_k‖`, indexed `[g][k]`.
    pub convergence: Vec<Vec<f64>>,
}

/// Verification transcript of [`validate_witness`].
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub member_norms: Vec<f64>,
    pub bound: f64,
    pub max_residual: f64,
    pub issues: Vec<String>,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Check that every member is positive definite, compute the uniform bound
/// from exact PD norms, and check the final-member residuals against
/// `epsilon` for every group element and algebra basis element.
pub fn validate_witness(
    members: &[CoeffMap],
    epsilon: f64,
    tol: &ScalarTolerance,
) -> Result<(AmenabilityWitness, WitnessReport), AmenabilityError> {
    if members.is_empty() {
        return Err(AmenabilityError::EmptyWitness);
    }
    let sys = &members[0].system;
    for m in members.iter().skip(1) {
        if !m.system.approx_eq(sys, 1e-9) {
            return Err(AmenabilityError::SystemMismatch);
        }
    }
    let mut issues = Vec::new();
    let mut member_norms = Vec::with_capacity(members.len());
    let mut first_not_pd: Option<usize> = None;
    for (i, m) in members.iter().enumerate() {
        let verdict = pd_check(m, tol);
        if !verdict.positive {
            issues.push(format!("member {i} is not positive definite (min eig {:.3e})", verdict.min_eigenvalue));
            first_not_pd.get_or_insert(i);
            member_norms.push(f64::NAN);
        } else {
            member_norms.push(sup_norm(m, tol, 0).exact.expect("pd maps have exact norms"));
        }
    }
    let bound = member_norms.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let last = members.last().expect("nonempty");
    let alg = &sys.algebra;
    let mut convergence = Vec::with_capacity(sys.group.order());
    let mut max_residual: f64 = 0.0;
    let mut first_residual: Option<(usize, usize, f64)> = None;
    for g in 0..sys.group.order() {
        let mut row = Vec::with_capacity(alg.total_dim());
        for k in 0..alg.total_dim() {
            let e = alg.basis_element(k);
            let r = last.apply(g, &e).distance(&e);
            if r > epsilon {
                issues.push(format!("residual {r:.3e} at g={g}, basis {k} exceeds epsilon {epsilon:.3e}"));
                first_residual.get_or_insert((g, k, r));
            }
            max_residual = max_residual.max(r);
            row.push(r);
        }
        convergence.push(row);
    }
    let report = WitnessReport { member_norms, bound, max_residual, issues };
    if let Some(i) = first_not_pd {
        return Err(AmenabilityError::NotPD(i));
    }
    if let Some((g, basis, value)) = first_residual {
        return Err(AmenabilityError::ResidualTooLarge { g, basis, value });
    }
    Ok((AmenabilityWitness { net: members.to_vec(), bound, convergence }, report))
}

/// Outcome of transferring a witness across a Morita equivalence.
#[derive(Debug)]
pub struct TransferredWitness {
    pub witness: AmenabilityWitness,
    pub k: f64,
    pub bound_ratio: f64,
    /// The a-priori residual estimate computed from the frame norms.
    pub transferred_epsilon: f64,
}

/// Apply the full-mode transfer to every net member, verify positive
/// definiteness, support containment, the `K`-bound on the uniform norms,
/// and the final-member residuals against an epsilon estimated from the
/// frame's norms.
pub fn transfer_witness(
    action: &CompatibleAction,
    frame: &Frame,
    witness: &AmenabilityWitness,
    tol: &ScalarTolerance,
) -> Result<TransferredWitness, AmenabilityError> {
    let support_tol = 1e-12;
    let mut transferred = Vec::with_capacity(witness.net.len());
    for (i, member) in witness.net.iter().enumerate() {
        let out = transfer(action, frame, member, &TransferMode::Full, tol)?;
        let in_support = member.support(support_tol);
        if out.support(support_tol).iter().any(|g| !in_support.contains(g)) {
            return Err(AmenabilityError::SupportGrew(i));
        }
        transferred.push(out);
    }
    // a-priori residual estimate from the frame norms:
    // ‖F(T)_g(b) − b‖ ≤ (Σ_ij ‖z_i'‖‖z_j'‖‖z_i‖‖z_j‖)·‖T_g − id‖ on unit b.
    let bim = &action.bimodule;
    let weight: f64 = frame
        .pairs
        .iter()
        .flat_map(|(zi, zpi)| {
            frame.pairs.iter().map(move |(zj, zpj)| {
                bim.vector_norm(zpi)
                    * bim.vector_norm(zpj)
                    * bim.vector_norm(zi)
                    * bim.vector_norm(zj)
            })
        })
        .sum();
    let last = witness.net.last().ok_or(AmenabilityError::EmptyWitness)?;
    let ta = action.sigma.algebra.total_dim();
    let eye = CMatrix::identity(ta, ta);
    let op_gap = last
        .per_g
        .iter()
        .map(|m| {
            let diff = m - &eye;
            if max_modulus(&diff) == 0.0 {
                0.0
            } else {
                diff.singular_values().max() * (ta as f64).sqrt()
            }
        })
        .fold(0.0, f64::max);
    let transferred_epsilon = (weight * op_gap).max(tol.at_scale(1.0));

    let (out_witness, _report) = validate_witness(&transferred, transferred_epsilon, tol)?;
    let limit = frame.k * witness.bound + tol.at_scale(witness.bound);
    if out_witness.bound > limit {
        return Err(AmenabilityError::BoundExceeded { got: out_witness.bound, limit });
    }
    let bound_ratio = if witness.bound > 0.0 { out_witness.bound / witness.bound } else { 0.0 };
    Ok(TransferredWitness { witness: out_witness, k: frame.k, bound_ratio, transferred_epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CStarAlgebra, ONE};
    use crate::fourier::{embed_group_function, identity};
    use crate::group::FiniteGroup;
    use crate::morita::{
        alpha_as_action, partition_of_unity, validate_compatible_action, ImprimitivityBimodule,
    };
    use crate::random;

    fn tol() -> ScalarTolerance {
        ScalarTolerance::uniform(1e-8)
    }

    fn sys_triv() -> Arc<TwistedSystem> {
        Arc::new(TwistedSystem::trivial(CStarAlgebra::scalars(), FiniteGroup::cyclic(2)))
    }

    #[test]
    fn constant_exel_gives_identity() {
        for sys in [
            sys_triv(),
            Arc::new(TwistedSystem::trivial(CStarAlgebra::full(2), FiniteGroup::klein())),
        ] {
            let xi = ExelFunction::constant(&sys);
            let (t, cond_a) = exel_coefficient(&sys, &xi).unwrap();
            assert!(t.table_gap(&identity(&sys)) < 1e-14);
            assert!((cond_a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_exel_gives_identity_indicator() {
        let sys = sys_triv();
        let xi = ExelFunction::delta_identity(&sys);
        let (t, _) = exel_coefficient(&sys, &xi).unwrap();
        assert!((t.per_g[0][(0, 0)] - ONE).norm() < 1e-14);
        assert!(max_modulus(&t.per_g[1]) < 1e-14);
    }

    #[test]
    fn zero_exel_gives_zero() {
        let sys = sys_triv();
        let xi = ExelFunction { xi: vec![sys.algebra.zero(); 2] };
        let (t, cond_a) = exel_coefficient(&sys, &xi).unwrap();
        assert!(t.per_g.iter().all(|m| max_modulus(m) == 0.0));
        assert_eq!(cond_a, 0.0);
    }

    #[test]
    fn exel_coefficients_are_positive_definite() {
        let mut rng = random::seeded(19);
        for _ in 0..5 {
            let sys = Arc::new(random::system(&mut rng, 4, 5));
            let xi = ExelFunction {
                xi: (0..sys.group.order()).map(|_| random::element(&mut rng, &sys.algebra)).collect(),
            };
            let (t, _) = exel_coefficient(&sys, &xi).unwrap();
            assert!(pd_check(&t, &tol()).positive);
        }
    }

    #[test]
    fn identity_witness_validates() {
        let sys = sys_triv();
        let (w, report) = validate_witness(&[identity(&sys)], 1e-9, &tol()).unwrap();
        assert!((w.bound - 1.0).abs() < 1e-12);
        assert!(report.passed());
        assert!(report.max_residual < 1e-14);
    }

    #[test]
    fn truncated_function_fails_residual() {
        let sys = sys_triv();
        let t = embed_group_function(&sys, &[ONE, C64::new(0.0, 0.0)]);
        match validate_witness(&[t], 0.5, &tol()) {
            Err(AmenabilityError::ResidualTooLarge { g, value, .. }) => {
                assert_eq!(g, 1);
                assert!((value - 1.0).abs() < 1e-12);
            }
            other => panic!("expected residual failure, got {other:?}"),
        }
    }

    #[test]
    fn non_pd_member_is_rejected() {
        let sys = sys_triv();
        let t = embed_group_function(&sys, &[ONE, C64::new(2.0, 0.0)]);
        match validate_witness(&[t], 10.0, &tol()) {
            Err(AmenabilityError::NotPD(0)) => {}
            other => panic!("expected NotPD, got {other:?}"),
        }
    }

    fn mor_pair_action() -> CompatibleAction {
        let sigma = sys_triv();
        let theta = Arc::new(TwistedSystem::trivial(CStarAlgebra::full(2), FiniteGroup::cyclic(2)));
        let d = 2usize;
        let left_action = vec![CMatrix::identity(d, d)];
        let mut right_action = Vec::new();
        let mut right_inner = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut act = CMatrix::zeros(d, d);
                act[(j, i)] = ONE;
                right_action.push(act);
                let mut inn = CMatrix::zeros(d, d);
                inn[(i, j)] = ONE;
                right_inner.push(inn);
            }
        }
        let bimodule = ImprimitivityBimodule {
            algebra_a: sigma.algebra.clone(),
            algebra_b: theta.algebra.clone(),
            dim: d,
            left_action,
            right_action,
            left_inner: vec![CMatrix::identity(d, d)],
            right_inner,
        };
        validate_compatible_action(&sigma, &theta, bimodule, vec![CMatrix::identity(d, d); 2], &tol())
            .unwrap()
    }

    #[test]
    fn transfer_identity_witness_across_mor_pair() {
        let action = mor_pair_action();
        let frame = partition_of_unity(&action.bimodule, &tol()).unwrap();
        let (w, _) = validate_witness(&[identity(&action.sigma)], 1e-9, &tol()).unwrap();
        let out = transfer_witness(&action, &frame, &w, &tol()).unwrap();
        assert!((out.k - 4.0).abs() < 1e-10);
        assert!(out.bound_ratio <= out.k + 1e-9);
        assert!(out.witness.net[0].table_gap(&identity(&action.theta)) < 1e-12);
    }

    #[test]
    fn transfer_across_identity_equivalence_is_identity() {
        let sys = sys_triv();
        let action = alpha_as_action(&sys, &tol()).unwrap();
        let frame = partition_of_unity(&action.bimodule, &tol()).unwrap();
        assert!((frame.k - 1.0).abs() < 1e-12);
        let (w, _) = validate_witness(&[identity(&sys)], 1e-9, &tol()).unwrap();
        let out = transfer_witness(&action, &frame, &w, &tol()).unwrap();
        assert!(out.witness.net[0].table_gap(&identity(&sys)) < 1e-12);
    }

    #[test]
    fn constant_exel_witness_transfers_across_mor_pair() {
        let action = mor_pair_action();
        let frame = partition_of_unity(&action.bimodule, &tol()).unwrap();
        let xi = ExelFunction::constant(&action.sigma);
        let (t, _) = exel_coefficient(&action.sigma, &xi).unwrap();
        let (w, _) = validate_witness(&[t], 1e-9, &tol()).unwrap();
        let out = transfer_witness(&action, &frame, &w, &tol()).unwrap();
        assert!(out.witness.convergence.iter().flatten().all(|&r| r <= 1e-9));
    }

    #[test]
    fn central_exel_simplified_residual_matches() {
        // for central ξ the simplified condition equals the residual at 1_A
        let mut rng = random::seeded(43);
        let sys = Arc::new(random::system(&mut rng, 4, 4));
        let c = &sys.algebra.center_basis();
        let xi = ExelFunction {
            xi: (0..sys.group.order())
                .map(|_| {
                    let mut x = sys.algebra.zero();
                    for e in c.iter() {
                        x = x.add(&e.scale(random::complex_gaussian(&mut rng)));
                    }
                    x
                })
                .collect(),
        };
        let (t, _) = exel_coefficient(&sys, &xi).unwrap();
        for g in 0..sys.group.order() {
            let mut simplified = sys.algebra.zero();
            for h in 0..sys.group.order() {
                let tail = sys.apply_alpha(g, &xi.xi[sys.group.mul(sys.group.inv(g), h)]);
                simplified = simplified.add(&xi.xi[h].adjoint().mul(&tail));
            }
            let lhs = simplified.distance(&sys.algebra.unit());
            let rhs = t.apply(g, &sys.algebra.unit()).distance(&sys.algebra.unit());
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
