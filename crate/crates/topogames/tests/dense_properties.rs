use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topogames::codes::{toric_code_2d, toric_z_windings};
use topogames::dense::{DenseState, FieldFamily};
use topogames::random::{random_element, random_stabilizer_state, random_subgroup, random_weyl};
use topogames::strategies::{ghz_ops, tc2d_parity_ops, CompositeOperatorSet, Tc2dLayout};
use topogames::tableau::Expectation;
use topogames::weyl::WeylOperator;

const TOL: f64 = 1e-10;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dense_expectations_agree_with_the_tableau(seed in any::<u64>(), n in 1usize..7, k in 0usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = random_stabilizer_state(&mut rng, 2, n);
        let sub = random_subgroup(&mut rng, &full, k.min(n));
        let state = DenseState::from_group(&full, &mut rng).unwrap();
        for _ in 0..8 {
            let op = if rng.gen::<bool>() { random_element(&mut rng, &sub) } else { random_weyl(&mut rng, 2, n) };
            let dense = state.expectation(&op).unwrap();
            let want = match sub.expectation(&op).unwrap() {
                Expectation::Logical => full.expectation(&op).unwrap(),
                e => e,
            };
            let want = match want {
                Expectation::Definite(r) => r.to_complex(),
                Expectation::Zero => Complex64::new(0.0, 0.0),
                Expectation::Logical => unreachable!("maximal group"),
            };
            prop_assert!((dense - want).norm() < TOL, "{op:?}: {dense} vs {want}");
        }
    }
}

fn mermin_terms(ops: &CompositeOperatorSet) -> Vec<(f64, WeylOperator)> {
    let m = |a: [bool; 3]| {
        (0..3).fold(WeylOperator::identity(2, ops.n()), |acc, i| {
            let op = if a[i] { ops.y(i).unwrap() } else { ops.x(i).clone() };
            acc.multiply(&op).unwrap()
        })
    };
    vec![
        (1.0, m([false, false, false])),
        (-1.0, m([false, true, true])),
        (-1.0, m([true, false, true])),
        (-1.0, m([true, true, false])),
    ]
}

fn mermin(state: &DenseState, terms: &[(f64, WeylOperator)]) -> f64 {
    terms.iter().map(|(c, op)| c * state.expectation(op).unwrap().re).sum()
}

fn check_derivative(ops: &CompositeOperatorSet, state: &DenseState) {
    let n = ops.n();
    let sites: Vec<usize> = (0..n).collect();
    let terms = mermin_terms(ops);
    let h = 1e-4;
    let plus = mermin(&state.deform(FieldFamily::Z, h, &sites).unwrap(), &terms);
    let minus = mermin(&state.deform(FieldFamily::Z, -h, &sites).unwrap(), &terms);
    let numeric = (plus - minus) / (2.0 * h);
    let zs: Vec<DenseState> = sites.iter().map(|&s| state.apply(&WeylOperator::z_pow(2, n, s, 1)).unwrap()).collect();
    let sum_z: f64 = zs.iter().map(|z| state.inner(z).re).sum();
    let anti: f64 = terms
        .iter()
        .map(|(c, op)| {
            let m = state.apply(op).unwrap();
            c * zs.iter().map(|z| 2.0 * z.inner(&m).re).sum::<f64>()
        })
        .sum();
    let analytic = anti - 2.0 * sum_z * mermin(state, &terms);
    assert!((numeric - analytic).abs() < 1e-6, "{numeric} vs {analytic}");
}

#[test]
fn deformation_derivative_matches_the_connected_correlator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ghz = ghz_ops(3).unwrap();
    check_derivative(&ghz, &DenseState::from_group(ghz.resource(), &mut rng).unwrap());

    let code = toric_code_2d(2).unwrap();
    let ops = tc2d_parity_ops(&code, 3, Tc2dLayout::default()).unwrap();
    let group = code.group().fix_sector(&toric_z_windings(&code).unwrap()).unwrap();
    check_derivative(&ops, &DenseState::from_group(&group, &mut rng).unwrap());
}
