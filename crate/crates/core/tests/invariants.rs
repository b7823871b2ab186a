//! Cross-module invariants that don't fit a single unit-test module:
//! composition laws of perturbations, tensor associativity and unit laws at
//! the coefficient level, and the order/norm behavior of the transfer map.

use bsigma_core::algebra::{C64, CMatrix, ScalarTolerance};
use bsigma_core::equivariant::{internal_tensor_reps, regular_rep, trivial_rep};
use bsigma_core::fourier::{coefficient_map, pd_check, sup_norm};
use bsigma_core::gallery;
use bsigma_core::morita::{
    partition_of_unity, transfer, validate_compatible_action, CompatibleAction, TransferMode,
};
use bsigma_core::random;
use bsigma_core::system::perturb_unitary;
use rand::Rng;
use std::sync::Arc;

fn tol() -> ScalarTolerance {
    ScalarTolerance::default()
}

#[test]
fn iterated_perturbation_matches_composite_map() {
    let mut rng = random::seeded(71);
    for _ in 0..8 {
        let sys = random::system(&mut rng, 6, 8);
        let w1 = random::unitary_map(&mut rng, &sys);
        let step1 = perturb_unitary(&sys, &w1, &tol()).unwrap();
        let w2 = random::unitary_map(&mut rng, &step1);
        let step2 = perturb_unitary(&step1, &w2, &tol()).unwrap();
        let composite = perturb_unitary(&sys, &w1.then(&w2), &tol()).unwrap();
        let gap = step2.table_gap(&composite);
        assert!(gap <= 1e-10, "iterated vs composite perturbation, gap {gap:.3e}");
    }
}

#[test]
fn ad_rho_of_cocycle_inverts_by_adjoint() {
    let mut rng = random::seeded(72);
    for _ in 0..5 {
        let sys = Arc::new(random::system(&mut rng, 4, 5));
        let rep = regular_rep(&sys);
        let d = rep.dim();
        for g in 0..sys.group.order() {
            for h in 0..sys.group.order() {
                let fwd = rep.ad_rho(sys.sigma(g, h));
                let back = rep.ad_rho(&sys.sigma(g, h).adjoint());
                let gap = (fwd * back - CMatrix::identity(d, d)).norm();
                assert!(gap <= 1e-10, "ad_rho inverse gap {gap:.3e}");
            }
        }
    }
}

#[test]
fn internal_tensor_is_associative_up_to_isomorphism() {
    let mut rng = random::seeded(73);
    for _ in 0..4 {
        let sys = Arc::new(random::system(&mut rng, 4, 4));
        let x1 = trivial_rep(&sys);
        let x2 = trivial_rep(&sys);
        let x3 = trivial_rep(&sys);
        let (t12, w12) = internal_tensor_reps(&sys, &x1, &x2).unwrap();
        let (left, wl) = internal_tensor_reps(&sys, &t12, &x3).unwrap();
        let (t23, w23) = internal_tensor_reps(&sys, &x2, &x3).unwrap();
        let (right, wr) = internal_tensor_reps(&sys, &x1, &t23).unwrap();
        assert_eq!(left.dim(), right.dim(), "quotient dimensions agree");

        // matched vectors come from the same flat tensor x₁⊗x₂⊗x₃
        let left = Arc::new(left);
        let right = Arc::new(right);
        for _ in 0..3 {
            let a = random::vector(&mut rng, x1.dim());
            let b = random::vector(&mut rng, x2.dim());
            let c = random::vector(&mut rng, x3.dim());
            let a2 = random::vector(&mut rng, x1.dim());
            let b2 = random::vector(&mut rng, x2.dim());
            let c2 = random::vector(&mut rng, x3.dim());
            let embed_left = |u: &_, v: &_, w: &_| {
                &wl.basis_map * (&w12.basis_map * crate_kron(u, v)).kronecker(w)
            };
            let embed_right = |u: &_, v: &_, w: &_| {
                &wr.basis_map * crate_kron(u, &(&w23.basis_map * crate_kron(v, w)))
            };
            let tl = coefficient_map(&sys, &left, &embed_left(&a, &b, &c), &embed_left(&a2, &b2, &c2))
                .unwrap();
            let tr =
                coefficient_map(&sys, &right, &embed_right(&a, &b, &c), &embed_right(&a2, &b2, &c2))
                    .unwrap();
            let gap = tl.table_gap(&tr);
            assert!(gap <= 1e-8, "associativity coefficient gap {gap:.3e}");
        }
    }
}

fn crate_kron(
    a: &bsigma_core::algebra::CVector,
    b: &bsigma_core::algebra::CVector,
) -> bsigma_core::algebra::CVector {
    a.kronecker(b)
}

#[test]
fn tensor_with_trivial_realizes_the_representation() {
    let mut rng = random::seeded(74);
    let sys = Arc::new(random::system(&mut rng, 4, 4));
    let triv = trivial_rep(&sys);
    let rep = Arc::new(regular_rep(&sys));
    let (tensor, witness) = internal_tensor_reps(&sys, &triv, &rep).unwrap();
    assert_eq!(tensor.dim(), rep.dim(), "unit law quotient dimension");
    let tensor = Arc::new(tensor);
    // class(a ⊗ x) ↦ ρ(a)x intertwines the coefficient functions
    for _ in 0..3 {
        let a = random::element(&mut rng, &sys.algebra);
        let b = random::element(&mut rng, &sys.algebra);
        let x = random::vector(&mut rng, rep.dim());
        let y = random::vector(&mut rng, rep.dim());
        let u = &witness.basis_map * crate_kron(&a.vectorize(), &x);
        let v = &witness.basis_map * crate_kron(&b.vectorize(), &y);
        let t_tensor = coefficient_map(&sys, &tensor, &u, &v).unwrap();
        let t_rep = coefficient_map(
            &sys,
            &rep,
            &(rep.rho_matrix(&a) * &x),
            &(rep.rho_matrix(&b) * &y),
        )
        .unwrap();
        let gap = t_tensor.table_gap(&t_rep);
        assert!(gap <= 1e-8, "unit law coefficient gap {gap:.3e}");
    }
}

/// MOR-PAIR with both systems perturbed by random unitary maps and δ
/// adjusted to stay compatible, giving nontrivial twisted Morita data.
fn random_morita_action<R: Rng>(rng: &mut R) -> CompatibleAction {
    let (sigma0, theta0, entry) = gallery::mor_pair_entry();
    let w = random::unitary_map(rng, &sigma0);
    let cap_w = random::unitary_map(rng, &theta0);
    let sigma = Arc::new(perturb_unitary(&sigma0, &w, &tol()).unwrap());
    let theta = Arc::new(perturb_unitary(&theta0, &cap_w, &tol()).unwrap());
    let delta: Vec<CMatrix> = (0..2)
        .map(|g| {
            entry.bimodule.left_action_matrix(&w.entries[g])
                * entry.bimodule.right_action_matrix(&cap_w.entries[g].adjoint())
                * &entry.delta[g]
        })
        .collect();
    validate_compatible_action(&sigma, &theta, entry.bimodule, delta, &tol())
        .expect("perturbed Morita data stays compatible")
}

#[test]
fn transfer_preserves_positivity_bounds_and_linearity() {
    let pd_tol = ScalarTolerance::uniform(1e-8);
    let mut rng = random::seeded(75);
    for _ in 0..20 {
        let action = random_morita_action(&mut rng);
        let frame = partition_of_unity(&action.bimodule, &tol()).unwrap();
        let rep = Arc::new(trivial_rep(&action.sigma));
        let x = random::vector(&mut rng, rep.dim());
        let t = coefficient_map(&action.sigma, &rep, &x, &x).unwrap();
        assert!(pd_check(&t, &pd_tol).positive);
        let moved = transfer(&action, &frame, &t, &TransferMode::Full, &tol()).unwrap();
        assert!(pd_check(&moved, &pd_tol).positive, "transfer must carry P(Σ) into P(Θ)");
        let n_in = sup_norm(&t, &pd_tol, 0).exact.unwrap();
        let n_out = sup_norm(&moved, &pd_tol, 0).exact.unwrap();
        assert!(
            n_out <= frame.k * n_in + 1e-9 * (1.0 + n_in),
            "‖F(T)‖ = {n_out} exceeds K·‖T‖ = {}",
            frame.k * n_in
        );

        // linearity in T
        let y = random::vector(&mut rng, rep.dim());
        let t2 = coefficient_map(&action.sigma, &rep, &x, &y).unwrap();
        let a = random::complex_gaussian(&mut rng);
        let combo = t.scale(a).add(&t2).unwrap();
        let lhs = transfer(&action, &frame, &combo, &TransferMode::Full, &tol()).unwrap();
        let rhs = transfer(&action, &frame, &t, &TransferMode::Full, &tol())
            .unwrap()
            .scale(a)
            .add(&transfer(&action, &frame, &t2, &TransferMode::Full, &tol()).unwrap())
            .unwrap();
        let gap = lhs.table_gap(&rhs);
        assert!(gap <= 1e-10 * (1.0 + a.norm()), "transfer linearity gap {gap:.3e}");
    }
}

#[test]
fn witness_support_is_preserved_by_transfer() {
    let mut rng = random::seeded(76);
    let action = random_morita_action(&mut rng);
    let frame = partition_of_unity(&action.bimodule, &tol()).unwrap();
    // a finitely supported positive-definite map: the δ_e Exel coefficient
    let xi = bsigma_core::amenability::ExelFunction::delta_identity(&action.sigma);
    let (t, _) = bsigma_core::amenability::exel_coefficient(&action.sigma, &xi).unwrap();
    let support_before = t.support(1e-12);
    let moved = transfer(&action, &frame, &t, &TransferMode::Full, &tol()).unwrap();
    for g in moved.support(1e-12) {
        assert!(support_before.contains(&g), "support must not grow under transfer");
    }
}

#[test]
fn scaled_coefficient_is_still_a_coefficient() {
    // λT is the coefficient at (x, λy); checked through the tables
    let mut rng = random::seeded(77);
    let sys = Arc::new(random::system(&mut rng, 4, 4));
    let rep = Arc::new(trivial_rep(&sys));
    let x = random::vector(&mut rng, rep.dim());
    let y = random::vector(&mut rng, rep.dim());
    let lambda = C64::new(-0.3, 1.7);
    let t = coefficient_map(&sys, &rep, &x, &y).unwrap();
    let scaled_vec = &y * lambda;
    let direct = coefficient_map(&sys, &rep, &x, &scaled_vec).unwrap();
    assert!(t.scale(lambda).table_gap(&direct) <= 1e-11);
}
