//! Property-based checks of the algebraic invariants: the C*-identity,
//! positivity of squares, centrality, coefficient-map structure.

use bsigma_core::algebra::{
    positivity_test, AlgElement, C64, CMatrix, CStarAlgebra, ScalarTolerance,
};
use bsigma_core::fourier::{embed_algebra_element, embed_group_function};
use bsigma_core::group::FiniteGroup;
use bsigma_core::system::TwistedSystem;
use proptest::prelude::*;
use std::sync::Arc;

fn complex_entry() -> impl Strategy<Value = C64> {
    ((-100i32..=100), (-100i32..=100))
        .prop_map(|(re, im)| C64::new(f64::from(re) / 10.0, f64::from(im) / 10.0))
}

fn block_dims() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![1]),
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![1, 1]),
        Just(vec![2, 1]),
        Just(vec![2, 3]),
    ]
}

fn element_for(dims: &[usize]) -> impl Strategy<Value = AlgElement> {
    let shapes: Vec<usize> = dims.to_vec();
    let total: usize = shapes.iter().map(|n| n * n).sum();
    proptest::collection::vec(complex_entry(), total).prop_map(move |entries| {
        let mut blocks = Vec::with_capacity(shapes.len());
        let mut k = 0;
        for &n in &shapes {
            blocks.push(CMatrix::from_fn(n, n, |_, _| {
                let v = entries[k];
                k += 1;
                v
            }));
        }
        AlgElement { blocks }
    })
}

fn algebra_and_pair() -> impl Strategy<Value = (Vec<usize>, AlgElement, AlgElement)> {
    block_dims().prop_flat_map(|dims| {
        let a = element_for(&dims);
        let b = element_for(&dims);
        (Just(dims), a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cstar_identity_and_submultiplicativity((_dims, a, b) in algebra_and_pair()) {
        let na = a.operator_norm();
        let nb = b.operator_norm();
        let nab = a.mul(&b).operator_norm();
        prop_assert!(nab <= na * nb + 1e-10 * (1.0 + na * nb));
        let square = a.adjoint().mul(&a).operator_norm();
        prop_assert!((square - na * na).abs() <= 1e-10 * (1.0 + na * na));
    }

    #[test]
    fn squares_are_positive((_dims, a, _b) in algebra_and_pair()) {
        let verdict = positivity_test(&a.adjoint().mul(&a), &ScalarTolerance::default());
        prop_assert!(verdict.is_positive(), "{verdict:?}");
    }

    #[test]
    fn center_elements_commute((dims, a, _b) in algebra_and_pair()) {
        let algebra = CStarAlgebra::new(dims).unwrap();
        for c in algebra.center_basis() {
            let gap = a.mul(&c).distance(&c.mul(&a));
            prop_assert!(gap <= 1e-12 * (1.0 + a.operator_norm()));
        }
    }

    #[test]
    fn adjoint_is_isometric_involution((_dims, a, _b) in algebra_and_pair()) {
        prop_assert!(a.adjoint().adjoint().distance(&a) == 0.0);
        prop_assert!((a.adjoint().operator_norm() - a.operator_norm()).abs() <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scalar_copy_is_central(
        b in element_for(&[2, 1]),
        re in -10i32..=10,
        im in -10i32..=10,
    ) {
        let algebra = CStarAlgebra::new(vec![2, 1]).unwrap();
        let sys = Arc::new(TwistedSystem::trivial(algebra, FiniteGroup::cyclic(3)));
        let f: Vec<C64> = vec![
            C64::new(1.0, 0.0),
            C64::new(f64::from(re) / 10.0, f64::from(im) / 10.0),
            C64::new(f64::from(im) / 10.0, -f64::from(re) / 10.0),
        ];
        let tf = embed_group_function(&sys, &f);
        let tb = embed_algebra_element(&sys, &b);
        let left = tf.compose(&tb).unwrap();
        let right = tb.compose(&tf).unwrap();
        prop_assert!(left.table_gap(&right) <= 1e-12 * (1.0 + b.operator_norm()));
    }

    #[test]
    fn algebra_embedding_is_multiplicative_generic(
        a in element_for(&[2]),
        b in element_for(&[2]),
    ) {
        let algebra = CStarAlgebra::full(2);
        let sys = Arc::new(TwistedSystem::trivial(algebra, FiniteGroup::cyclic(2)));
        let ta = embed_algebra_element(&sys, &a);
        let tb = embed_algebra_element(&sys, &b);
        let prod = ta.compose(&tb).unwrap();
        let expect = embed_algebra_element(&sys, &a.mul(&b));
        let scale = 1.0 + a.operator_norm() * b.operator_norm();
        prop_assert!(prod.table_gap(&expect) <= 1e-11 * scale);
    }
}
