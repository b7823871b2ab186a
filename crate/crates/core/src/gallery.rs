//! The worked-example gallery: self-contained bundles for the standard
//! small systems, the row-module Morita pair and the constant Exel witness.

use crate::algebra::{C64, CMatrix, CStarAlgebra, ScalarTolerance, ONE};
use crate::amenability::{exel_coefficient, ExelFunction};
use crate::bundle::{Bundle, MoritaEntry, RepEntry, RepSpec, WitnessEntry};
use crate::fourier::{embed_group_function, identity};
use crate::group::FiniteGroup;
use crate::morita::ImprimitivityBimodule;
use crate::system::{validate_system, Automorphism, TwistedSystem};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("unknown gallery name `{0}`")]
pub struct UnknownGalleryName(pub String);

pub const GALLERY_NAMES: [&str; 5] = ["sys-triv", "sys-tw", "sys-m2", "mor-pair", "exel-const"];

/// `(ℂ, Z2, triv, 1)`
pub fn sys_triv() -> Arc<TwistedSystem> {
    Arc::new(TwistedSystem::trivial(CStarAlgebra::scalars(), FiniteGroup::cyclic(2)))
}

/// `(ℂ, Z2×Z2, triv, ω)` with `ω((a,b),(c,d)) = (−1)^{bc}`
pub fn sys_tw() -> Arc<TwistedSystem> {
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
    Arc::new(
        validate_system(algebra, group, alpha, sigma, &ScalarTolerance::default())
            .expect("Klein cocycle system is valid"),
    )
}

/// `(M₂, Z2, Ad(diag(1,−1)), 1)`
pub fn sys_m2() -> Arc<TwistedSystem> {
    let algebra = CStarAlgebra::full(2);
    let group = FiniteGroup::cyclic(2);
    let mut u = algebra.unit();
    u.blocks[0][(1, 1)] = C64::new(-1.0, 0.0);
    let alpha = vec![Automorphism::identity(&algebra), Automorphism::inner(&algebra, u)];
    let sigma = vec![vec![algebra.unit(); 2]; 2];
    Arc::new(
        validate_system(algebra, group, alpha, sigma, &ScalarTolerance::default())
            .expect("inner Z2 action is valid"),
    )
}

/// The row bimodule `ℂ^{1×2}` between `(ℂ, Z2, triv, 1)` and
/// `(M₂, Z2, triv, 1)` with `δ = id`.
pub fn mor_pair_entry() -> (Arc<TwistedSystem>, Arc<TwistedSystem>, MoritaEntry) {
    let sigma = sys_triv();
    let theta = Arc::new(TwistedSystem::trivial(CStarAlgebra::full(2), FiniteGroup::cyclic(2)));
    let d = 2usize;
    let left_action = vec![CMatrix::identity(d, d)];
    let mut right_action = Vec::with_capacity(4);
    let mut right_inner = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            // z·f_{ij} sends e_i to e_j; ⟨z,z'⟩_B coordinate (i,j) is conj(z_i)z'_j
            let mut act = CMatrix::zeros(d, d);
            act[(j, i)] = ONE;
            right_action.push(act);
            let mut inn = CMatrix::zeros(d, d);
            inn[(i, j)] = ONE;
            right_inner.push(inn);
        }
    }
    let entry = MoritaEntry {
        sigma: "sys-triv".into(),
        theta: "sys-m2-triv".into(),
        bimodule: ImprimitivityBimodule {
            algebra_a: sigma.algebra.clone(),
            algebra_b: theta.algebra.clone(),
            dim: d,
            left_action,
            right_action,
            left_inner: vec![CMatrix::identity(d, d)],
            right_inner,
        },
        delta: vec![CMatrix::identity(d, d); 2],
        frame: Some(vec![
            (unit_vector(d, 0), unit_vector(d, 0)),
            (unit_vector(d, 1), unit_vector(d, 1)),
        ]),
    };
    (sigma, theta, entry)
}

fn unit_vector(dim: usize, i: usize) -> crate::algebra::CVector {
    crate::algebra::CVector::from_fn(dim, |r, _| if r == i { ONE } else { C64::new(0.0, 0.0) })
}

/// Build the named worked-example bundle.
pub fn gallery(name: &str) -> Result<Bundle, UnknownGalleryName> {
    let mut bundle = Bundle::default();
    match name {
        "sys-triv" => {
            let sys = sys_triv();
            bundle.systems.insert("sys-triv".into(), sys.clone());
            bundle
                .reps
                .insert("triv".into(), RepEntry { system: "sys-triv".into(), spec: RepSpec::Trivial });
            bundle
                .reps
                .insert("regular".into(), RepEntry { system: "sys-triv".into(), spec: RepSpec::Regular });
            bundle.coeffs.insert("id".into(), identity(&sys));
            bundle.coeffs.insert(
                "sign-character".into(),
                embed_group_function(&sys, &[ONE, C64::new(-1.0, 0.0)]),
            );
        }
        "sys-tw" => {
            let sys = sys_tw();
            bundle.systems.insert("sys-tw".into(), sys.clone());
            bundle
                .reps
                .insert("regular".into(), RepEntry { system: "sys-tw".into(), spec: RepSpec::Regular });
            bundle.coeffs.insert("id".into(), identity(&sys));
        }
        "sys-m2" => {
            let sys = sys_m2();
            bundle.systems.insert("sys-m2".into(), sys.clone());
            bundle
                .reps
                .insert("triv".into(), RepEntry { system: "sys-m2".into(), spec: RepSpec::Trivial });
            bundle
                .reps
                .insert("regular".into(), RepEntry { system: "sys-m2".into(), spec: RepSpec::Regular });
            bundle.coeffs.insert("id".into(), identity(&sys));
        }
        "mor-pair" => {
            let (sigma, theta, entry) = mor_pair_entry();
            bundle.systems.insert("sys-triv".into(), sigma.clone());
            bundle.systems.insert("sys-m2-triv".into(), theta.clone());
            bundle.morita.insert("mor-pair".into(), entry);
            bundle.coeffs.insert("id-sigma".into(), identity(&sigma));
            bundle.coeffs.insert("id-theta".into(), identity(&theta));
            bundle.coeffs.insert(
                "sign-character".into(),
                embed_group_function(&sigma, &[ONE, C64::new(-1.0, 0.0)]),
            );
        }
        "exel-const" => {
            let sys = sys_triv();
            bundle.systems.insert("sys-triv".into(), sys.clone());
            let xi = ExelFunction::constant(&sys);
            let (t, _) = exel_coefficient(&sys, &xi).expect("constant Exel coefficient");
            bundle.coeffs.insert("exel-const".into(), t);
            bundle.witnesses.insert(
                "exel-const-witness".into(),
                WitnessEntry { system: "sys-triv".into(), members: vec!["exel-const".into()] },
            );
        }
        other => return Err(UnknownGalleryName(other.to_string())),
    }
    Ok(bundle)
}
