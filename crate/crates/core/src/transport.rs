//! Transport of coefficient maps between equivalent systems: `Π` along an
//! exterior equivalence, `Ψ` along a group conjugacy, and the reconstruction
//! of the central cocycle relating two systems from conjugacy data.

use crate::algebra::{max_modulus, CMatrix, ScalarTolerance};
use crate::equivariant::perturbed_rep;
use crate::fourier::{coefficient_map, CoeffMap, Provenance};
use crate::system::{
    check_group_conjugacy, perturb_central, perturb_unitary, AlgebraIsomorphism, CentralCocycle,
    GroupIsomorphism, ScalarCocycle, SystemError, TwistedSystem, UnitaryMap,
};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("coefficient map does not live over the expected system")]
    SystemMismatch,
    #[error("supplied data is not a group conjugacy: {0}")]
    NotConjugate(String),
    #[error("phi^-1 ∘ beta_phi(g) ∘ phi ≠ Ad(w(g)) ∘ alpha_g at g={g} (defect {defect:.3e})")]
    IntertwinerFails { g: usize, defect: f64 },
    #[error("omega({g},{h}) is not central unitary")]
    OmegaNotCentral { g: usize, h: usize },
    #[error("transported coefficient disagrees with the perturbed-representation coefficient (defect {0:.3e})")]
    ProvenanceCheckFailed(f64),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// What a certification transcript belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    Pi,
    Psi,
    OmegaReconstruction,
    MoritaConjugacy,
}

/// A verification transcript: the inputs involved, which checks ran, which
/// failed.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub kind: TransportKind,
    pub inputs: Vec<String>,
    pub checks_passed: Vec<String>,
    pub failures: Vec<String>,
}

impl TransportReport {
    fn new(kind: TransportKind) -> Self {
        TransportReport { kind, inputs: Vec::new(), checks_passed: Vec::new(), failures: Vec::new() }
    }

    fn record(&mut self, name: &str, defect: f64, threshold: f64) {
        if defect <= threshold {
            self.checks_passed.push(format!("{name} (defect {defect:.3e})"));
        } else {
            self.failures.push(format!("{name} (defect {defect:.3e})"));
        }
    }

    pub fn certified(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `Π(T)(g,a) = T(g, a·w(g))·w(g)*`, an element of `L(Σ^w)`.
///
/// `target` must be the perturbation of `T`'s system by `w`. When `T`
/// carries provenance `(ρ, v, x, y)`, the result is checked against the
/// coefficient of the perturbed representation and re-tagged with it.
pub fn pi_transport(
    t_map: &CoeffMap,
    w: &UnitaryMap,
    target: &Arc<TwistedSystem>,
    tol: &ScalarTolerance,
) -> Result<CoeffMap, TransportError> {
    let source = &t_map.system;
    let expected = perturb_unitary(source, w, tol)?;
    if !target.approx_eq(&expected, tol.at_scale(1.0)) {
        return Err(TransportError::SystemMismatch);
    }
    let per_g: Vec<CMatrix> = (0..source.group.order())
        .map(|g| {
            let rm = source.algebra.right_mul_matrix(&w.entries[g]);
            let rm_star = source.algebra.right_mul_matrix(&w.entries[g].adjoint());
            rm_star * &t_map.per_g[g] * rm
        })
        .collect();
    let provenance = match &t_map.provenance {
        Some(p) => {
            let tilde = Arc::new(perturbed_rep(&p.rep, w));
            let direct = coefficient_map(target, &tilde, &p.x, &p.y)
                .map_err(|_| TransportError::SystemMismatch)?;
            let defect = per_g
                .iter()
                .zip(&direct.per_g)
                .map(|(a, b)| max_modulus(&(a - b)))
                .fold(0.0, f64::max);
            if defect > 1e-10 * (1.0 + p.bound) {
                return Err(TransportError::ProvenanceCheckFailed(defect));
            }
            Some(Provenance { rep: tilde, x: p.x.clone(), y: p.y.clone(), bound: p.bound })
        }
        None => None,
    };
    Ok(CoeffMap { system: target.clone(), per_g, provenance })
}

/// [`pi_transport`] with the perturbed system computed here.
pub fn pi_transport_auto(
    t_map: &CoeffMap,
    w: &UnitaryMap,
    tol: &ScalarTolerance,
) -> Result<(CoeffMap, Arc<TwistedSystem>), TransportError> {
    let target = Arc::new(perturb_unitary(&t_map.system, w, tol)?);
    let out = pi_transport(t_map, w, &target, tol)?;
    Ok((out, target))
}

/// Verify multiplicativity and additivity of `Π` on supplied pairs.
pub fn verify_pi_homomorphism(
    w: &UnitaryMap,
    target: &Arc<TwistedSystem>,
    pairs: &[(CoeffMap, CoeffMap)],
    tol: &ScalarTolerance,
) -> Result<TransportReport, TransportError> {
    let mut report = TransportReport::new(TransportKind::Pi);
    for (i, (a, b)) in pairs.iter().enumerate() {
        let pa = pi_transport(a, w, target, tol)?;
        let pb = pi_transport(b, w, target, tol)?;
        let prod = pi_transport(&a.compose(b).map_err(|_| TransportError::SystemMismatch)?, w, target, tol)?;
        let gap = prod.table_gap(&pa.compose(&pb).map_err(|_| TransportError::SystemMismatch)?);
        report.record(&format!("pi multiplicative on pair {i}"), gap, 1e-10 * scale_of(a, b));
        let sum = pi_transport(&a.add(b).map_err(|_| TransportError::SystemMismatch)?, w, target, tol)?;
        let gap2 = sum.table_gap(&pa.add(&pb).map_err(|_| TransportError::SystemMismatch)?);
        report.record(&format!("pi additive on pair {i}"), gap2, 1e-10 * scale_of(a, b));
    }
    Ok(report)
}

fn scale_of(a: &CoeffMap, b: &CoeffMap) -> f64 {
    let na = a.per_g.iter().map(max_modulus).fold(0.0, f64::max);
    let nb = b.per_g.iter().map(max_modulus).fold(0.0, f64::max);
    (1.0 + na) * (1.0 + nb)
}

/// `Ψ(S)(g,a) = φ^{-1}(S(φ_G(g), φ(a)))`, pulling a coefficient map over `Θ`
/// back to one over `Σ` along a group-conjugacy datum.
pub fn psi_transport(
    s_map: &CoeffMap,
    phi: &AlgebraIsomorphism,
    phi_g: &GroupIsomorphism,
    sigma: &Arc<TwistedSystem>,
    tol: &ScalarTolerance,
) -> Result<CoeffMap, TransportError> {
    let theta = &s_map.system;
    check_group_conjugacy(sigma, theta, phi, phi_g, tol)
        .map_err(|e| TransportError::NotConjugate(e.to_string()))?;
    let fwd = phi.matrix();
    let back = phi.inverse().matrix();
    let per_g = (0..sigma.group.order())
        .map(|g| &back * &s_map.per_g[phi_g.map[g]] * &fwd)
        .collect();
    Ok(CoeffMap { system: sigma.clone(), per_g, provenance: None })
}

/// A reconstructed relating cocycle: scalar-valued when the center is
/// trivial, center-valued otherwise.
#[derive(Debug, Clone)]
pub enum ReconstructedCocycle {
    Scalar(ScalarCocycle),
    Central(CentralCocycle),
}

/// From data `(φ, φ_G, w)` with `φ^{-1}∘β_{φ_G(g)}∘φ = Ad(w(g))∘α_g`,
/// compute `u(g,h) = φ^{-1}(θ(φ_G(g),φ_G(h)))`, `ω = u·(σ^w)*`, verify that
/// `ω` is a central normalized 2-cocycle for α, and certify that `Θ` is
/// group conjugate to `Σ^w(ω)`.
pub fn reconstruct_weak_cocycle(
    sigma: &TwistedSystem,
    theta: &TwistedSystem,
    phi: &AlgebraIsomorphism,
    phi_g: &GroupIsomorphism,
    w: &UnitaryMap,
    tol: &ScalarTolerance,
) -> Result<(ReconstructedCocycle, TransportReport), TransportError> {
    phi.check(tol).map_err(|e| TransportError::NotConjugate(e.to_string()))?;
    phi_g
        .check(&sigma.group, &theta.group)
        .map_err(|e| TransportError::NotConjugate(e.to_string()))?;
    w.check(sigma, tol)?;
    let mut report = TransportReport::new(TransportKind::OmegaReconstruction);
    report.inputs = vec![
        format!("sigma: |G| = {}, dim A = {}", sigma.group.order(), sigma.algebra.total_dim()),
        format!("theta: |H| = {}, dim B = {}", theta.group.order(), theta.algebra.total_dim()),
    ];
    let n = sigma.group.order();
    let phi_inv = phi.inverse();

    // intertwiner hypothesis
    for g in 0..n {
        let conj = phi_inv.conjugate_automorphism(&theta.alpha[phi_g.map[g]]);
        let perturbed = crate::system::Automorphism::inner(&sigma.algebra, w.entries[g].clone())
            .compose(&sigma.alpha[g]);
        let defect = conj.map_distance(&perturbed, &sigma.algebra);
        if defect > tol.at_scale(1.0) {
            return Err(TransportError::IntertwinerFails { g, defect });
        }
    }
    report.checks_passed.push("intertwiner phi^-1∘beta∘phi = Ad(w)∘alpha".into());

    let sigma_w = perturb_unitary(sigma, w, tol)?;
    let mut omega = vec![vec![sigma.algebra.zero(); n]; n];
    for g in 0..n {
        for h in 0..n {
            let u = phi_inv.apply(&theta.sigma(phi_g.map[g], phi_g.map[h]).clone());
            omega[g][h] = u.mul(&sigma_w.sigma(g, h).adjoint());
            if !omega[g][h].is_central(tol.at_scale(1.0)) || !omega[g][h].is_unitary(tol) {
                return Err(TransportError::OmegaNotCentral { g, h });
            }
        }
    }
    report.checks_passed.push("omega central unitary".into());

    let central = CentralCocycle { entries: omega.clone() };
    central.check(&sigma_w, tol)?;
    report.checks_passed.push("omega is a normalized 2-cocycle for alpha on Z(A)".into());

    // certification: Θ ~ gc Σ^w(ω)
    let sigma_w_omega = perturb_central(&sigma_w, &central, tol)?;
    match check_group_conjugacy(&sigma_w_omega, theta, phi, phi_g, tol) {
        Ok(()) => report.checks_passed.push("theta group conjugate to sigma^w(omega)".into()),
        Err(e) => report.failures.push(format!("conjugacy certification: {e}")),
    }

    let cocycle = if sigma.algebra.num_blocks() == 1 {
        let table = omega
            .iter()
            .map(|row| row.iter().map(|e| e.central_scalars()[0]).collect())
            .collect();
        let scalar = crate::system::validate_scalar_cocycle(&sigma.group, table, tol)?;
        report.checks_passed.push("trivial center: omega downgraded to a scalar cocycle".into());
        ReconstructedCocycle::Scalar(scalar)
    } else {
        ReconstructedCocycle::Central(central)
    };
    Ok((cocycle, report))
}
