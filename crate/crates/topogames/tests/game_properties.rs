use proptest::prelude::*;
use std::sync::Arc;
use topogames::codes::toric_code_2d;
use topogames::complex::build_torus;
use topogames::games::{
    classical_optimum_parity, classical_parity_bound, mermin_win_probability, quantum_parity_eval,
    CellulationGame, EvalOptions,
};
use topogames::strategies::{ghz_ops, tc2d_parity_ops, CompositeOperatorSet, Constraint, Tc2dLayout};

fn permuted(ops: &CompositeOperatorSet, perm: &[usize]) -> CompositeOperatorSet {
    let pairs = perm.iter().map(|&i| ops.pairs()[i].clone()).collect();
    let mut inverse = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inverse[old] = new;
    }
    let constraints = ops
        .constraints()
        .iter()
        .map(|c| Constraint { players: c.players.iter().map(|&i| inverse[i]).collect(), ..c.clone() })
        .collect();
    CompositeOperatorSet::new("permuted", ops.resource().clone(), pairs, constraints).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relabeling_players_leaves_the_value(
        p in 3usize..7,
        perm_seed in Just(()).prop_perturb(|_, mut rng| rng.next_u64()),
        on_torus in any::<bool>(),
    ) {
        let ops = if on_torus {
            tc2d_parity_ops(&toric_code_2d(5).unwrap(), p, Tc2dLayout::default()).unwrap()
        } else {
            ghz_ops(p).unwrap()
        };
        let mut perm: Vec<usize> = (0..p).collect();
        let mut s = perm_seed;
        for k in (1..p).rev() {
            perm.swap(k, (s % (k as u64 + 1)) as usize);
            s /= k as u64 + 1;
        }
        let a = quantum_parity_eval(&ops, &EvalOptions::default()).unwrap();
        let b = quantum_parity_eval(&permuted(&ops, &perm), &EvalOptions::default()).unwrap();
        prop_assert_eq!(a.p_q_exact, b.p_q_exact);
        prop_assert_eq!(a.mermin, b.mermin);
    }

    #[test]
    fn cellulation_inputs_have_even_overlap(
        lx in 2usize..5,
        ly in 2usize..5,
        k in any::<u64>(),
    ) {
        let game = CellulationGame::new(Arc::new(build_torus(&[lx, ly]).unwrap()), 1).unwrap();
        let k = k & ((1u64 << game.input_bits()) - 1);
        let (a, b) = game.bits(k);
        let overlap = a.iter().zip(&b).filter(|(&a, &b)| a && b).count();
        prop_assert_eq!(overlap % 2, 0);
    }
}

#[test]
fn mermin_value_determines_the_three_player_score() {
    for ops in [ghz_ops(3).unwrap(), tc2d_parity_ops(&toric_code_2d(4).unwrap(), 3, Tc2dLayout::default()).unwrap()] {
        let e = quantum_parity_eval(&ops, &EvalOptions::default()).unwrap();
        assert_eq!(mermin_win_probability(e.mermin.unwrap()), e.p_q);
    }
}

#[test]
fn classical_bound_is_attained() {
    for p in 2..=8 {
        let opt = classical_optimum_parity(p).unwrap();
        assert_eq!(opt.probability, classical_parity_bound(p), "P = {p}");
    }
}
