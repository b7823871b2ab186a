//! Seeded generators for elements, unitaries, systems and representations.
//!
//! All randomized search and sampling in the crate flows through a single
//! `ChaCha8` stream, so results are reproducible for a fixed seed.

use crate::algebra::{AlgElement, C64, CMatrix, CStarAlgebra, CVector, ScalarTolerance};
use crate::group::FiniteGroup;
use crate::system::{perturb_unitary, TwistedSystem, UnitaryMap};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    // Box–Muller per component
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn vector<R: Rng>(rng: &mut R, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| complex_gaussian(rng))
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    if n == 1 {
        let z = complex_gaussian(rng);
        let u = if z.norm() < 1e-12 { C64::new(1.0, 0.0) } else { z / z.norm() };
        return CMatrix::from_element(1, 1, u);
    }
    let qr = matrix(rng, n, n).qr();
    qr.q()
}

pub fn element<R: Rng>(rng: &mut R, algebra: &CStarAlgebra) -> AlgElement {
    AlgElement {
        blocks: algebra.block_dims().iter().map(|&n| matrix(rng, n, n)).collect(),
    }
}

pub fn unitary_element<R: Rng>(rng: &mut R, algebra: &CStarAlgebra) -> AlgElement {
    AlgElement {
        blocks: algebra.block_dims().iter().map(|&n| unitary(rng, n)).collect(),
    }
}

/// A normalized unitary map `w: G → U(A)`.
pub fn unitary_map<R: Rng>(rng: &mut R, sys: &TwistedSystem) -> UnitaryMap {
    let mut entries: Vec<AlgElement> =
        (0..sys.group.order()).map(|_| unitary_element(rng, &sys.algebra)).collect();
    entries[sys.group.identity()] = sys.algebra.unit();
    UnitaryMap { entries }
}

/// A random valid twisted system: a seed system (possibly with a scalar
/// cocycle) perturbed by a random unitary map, which produces nontrivial α
/// and σ while keeping the axioms exact.
pub fn system<R: Rng>(rng: &mut R, max_group: usize, max_dim: usize) -> TwistedSystem {
    let groups: Vec<FiniteGroup> = vec![
        FiniteGroup::cyclic(2),
        FiniteGroup::cyclic(3),
        FiniteGroup::cyclic(4),
        FiniteGroup::klein(),
        FiniteGroup::symmetric_3(),
        FiniteGroup::cyclic(6),
    ];
    let group = loop {
        let g = &groups[rng.gen_range(0..groups.len())];
        if g.order() <= max_group {
            break g.clone();
        }
    };
    let dims_menu: Vec<Vec<usize>> =
        vec![vec![1], vec![2], vec![1, 1], vec![2, 1], vec![2, 2], vec![1, 1, 1]];
    let dims = loop {
        let d = &dims_menu[rng.gen_range(0..dims_menu.len())];
        if d.iter().map(|n| n * n).sum::<usize>() <= max_dim {
            break d.clone();
        }
    };
    let algebra = CStarAlgebra::new(dims).expect("menu dims valid");
    let mut base = TwistedSystem::trivial(algebra, group.clone());
    // sometimes install a scalar cocycle on Z2 or the Klein group
    if group.order() == 4 && group.table() == FiniteGroup::klein().table() && rng.gen_bool(0.5) {
        let mut sigma = base.sigma.clone();
        for g in 0..4 {
            for h in 0..4 {
                if (g % 2) * (h / 2) % 2 == 1 {
                    sigma[g][h] = base.algebra.unit().scale(C64::new(-1.0, 0.0));
                }
            }
        }
        base = TwistedSystem::new_unchecked(base.algebra, base.group, base.alpha, sigma)
            .expect("shapes preserved");
    }
    let w = unitary_map(rng, &base);
    perturb_unitary(&base, &w, &ScalarTolerance::default()).expect("perturbation stays valid")
}
