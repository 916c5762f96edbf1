//! Random Weyl operators and stabilizer groups for tests and benchmarks.
//!
//! Maximal groups are images of `⟨Z_0, …, Z_{n−1}⟩` under a random circuit of
//! Fourier, phase and SUM gates, so they are consistent by construction.

use crate::tableau::StabilizerGroup;
use crate::weyl::WeylOperator;
use rand::Rng;

pub fn random_weyl(rng: &mut impl Rng, d: u32, n: usize) -> WeylOperator {
    let x = (0..n).map(|_| rng.gen_range(0..d) as u8).collect();
    let z = (0..n).map(|_| rng.gen_range(0..d) as u8).collect();
    WeylOperator::from_parts(d, x, z, rng.gen_range(0..2 * d)).expect("valid parts")
}

#[derive(Clone, Copy, Debug)]
enum Gate {
    Fourier(usize),
    Phase(usize),
    Sum(usize, usize),
}

/// Images of `X_j` and `Z_j` under a gate; `None` means unchanged.
fn images(g: Gate, d: u32, n: usize, j: usize) -> (Option<WeylOperator>, Option<WeylOperator>) {
    let x = |s: usize, a: u8| WeylOperator::x_pow(d, n, s, a);
    let z = |s: usize, b: u8| WeylOperator::z_pow(d, n, s, b);
    let inv = (d - 1) as u8;
    match g {
        // F X F† = Z, F Z F† = X†
        Gate::Fourier(s) if s == j => (Some(z(s, 1)), Some(x(s, inv))),
        // S X S† = w X Z
        Gate::Phase(s) if s == j => (Some(x(s, 1).multiply(&z(s, 1)).unwrap().times_w(1)), None),
        // X_c ↦ X_c X_t, Z_t ↦ Z_c† Z_t
        Gate::Sum(c, t) if c == j => (Some(x(c, 1).multiply(&x(t, 1)).unwrap()), None),
        Gate::Sum(c, t) if t == j => (None, Some(z(c, inv).multiply(&z(t, 1)).unwrap())),
        _ => (None, None),
    }
}

fn conjugate(op: &WeylOperator, g: Gate) -> WeylOperator {
    let (d, n) = (op.d(), op.n());
    let mut acc = WeylOperator::identity(d, n).with_phase(op.phase_exp());
    for j in 0..n {
        let (xi, zi) = images(g, d, n, j);
        let (a, b) = (op.x_exps()[j], op.z_exps()[j]);
        let xi = xi.unwrap_or_else(|| WeylOperator::x_pow(d, n, j, 1));
        let zi = zi.unwrap_or_else(|| WeylOperator::z_pow(d, n, j, 1));
        acc = acc.multiply(&xi.power(a as i64)).unwrap().multiply(&zi.power(b as i64)).unwrap();
    }
    acc
}

fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    match rng.gen_range(0..3) {
        0 => Gate::Fourier(rng.gen_range(0..n)),
        1 => Gate::Phase(rng.gen_range(0..n)),
        _ if n > 1 => {
            let c = rng.gen_range(0..n);
            let t = (c + rng.gen_range(1..n)) % n;
            Gate::Sum(c, t)
        }
        _ => Gate::Fourier(0),
    }
}

/// A maximal stabilizer group (unique stabilized state) in a random sector.
pub fn random_stabilizer_state(rng: &mut impl Rng, d: u32, n: usize) -> StabilizerGroup {
    let mut gens: Vec<WeylOperator> = (0..n).map(|j| WeylOperator::z_pow(d, n, j, 1)).collect();
    for _ in 0..(4 * n * n + 4) {
        let g = random_gate(rng, n);
        gens = gens.iter().map(|op| conjugate(op, g)).collect();
    }
    let gens = gens.into_iter().map(|op| op.times_w(2 * rng.gen_range(0..d))).collect();
    StabilizerGroup::new(d, n, gens).expect("Clifford image of a consistent group")
}

/// `k` random products of the generators of `group`.
pub fn random_subgroup(rng: &mut impl Rng, group: &StabilizerGroup, k: usize) -> StabilizerGroup {
    let gens = group.all_generators();
    let (d, n) = (group.d(), group.n());
    let sub = (0..k)
        .map(|_| {
            gens.iter().fold(WeylOperator::identity(d, n), |acc, g| {
                acc.multiply(&g.power(rng.gen_range(0..d as i64))).unwrap()
            })
        })
        .collect();
    StabilizerGroup::new(d, n, sub).expect("subgroup of a consistent group")
}

/// A random element of `group` together with its exact phase.
pub fn random_element(rng: &mut impl Rng, group: &StabilizerGroup) -> WeylOperator {
    let (d, n) = (group.d(), group.n());
    group.all_generators().iter().fold(WeylOperator::identity(d, n), |acc, g| {
        acc.multiply(&g.power(rng.gen_range(0..d as i64))).unwrap()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::matrix_oracle as mo;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gate_images_preserve_relations() {
        for d in [2u32, 4, 8] {
            let n = 2;
            for g in [Gate::Fourier(0), Gate::Phase(1), Gate::Sum(0, 1), Gate::Sum(1, 0)] {
                for j in 0..n {
                    let xi = conjugate(&WeylOperator::x_pow(d, n, j, 1), g);
                    let zi = conjugate(&WeylOperator::z_pow(d, n, j, 1), g);
                    assert!(xi.power(d as i64).is_scalar_one());
                    assert!(zi.power(d as i64).is_scalar_one());
                    assert_eq!(zi.commutation_phase(&xi).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn phase_gate_is_a_unitary_conjugation() {
        // S = diag(w^{q²}) at d = 4
        let d = 4usize;
        let w = |k: usize| num_complex::Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / d as f64);
        let mut s = mo::eye(d);
        let mut sd = mo::eye(d);
        for q in 0..d {
            s[q][q] = w((q * q) % (2 * d));
            sd[q][q] = s[q][q].conj();
        }
        let x = WeylOperator::x_pow(4, 1, 0, 1);
        let lhs = mo::mul(&mo::mul(&s, &mo::weyl_matrix(&x)), &sd);
        let rhs = mo::weyl_matrix(&conjugate(&x, Gate::Phase(0)));
        assert!(mo::close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn random_states_are_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (d, n) in [(2, 6), (4, 4)] {
            let g = random_stabilizer_state(&mut rng, d, n);
            assert_eq!(g.ground_space_log_dim(), 0);
            let e = random_element(&mut rng, &g);
            assert!(g.contains(&e).unwrap());
            assert!(random_subgroup(&mut rng, &g, 2).ground_space_log_dim() > 0);
        }
    }
}
