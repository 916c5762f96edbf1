//! Generalized Pauli (Weyl–Heisenberg) operators on d-level qudits.
//!
//! Canonical form is `w^k · Π_j X_j^{a_j} Z_j^{b_j}` with `w = e^{iπ/d}` and
//! `k ∈ Z_{2d}`. Clock and shift satisfy `Z X = ω X Z`, `ω = w² = e^{2πi/d}`,
//! so at d = 4 one has `Z X = i X Z` and `Z|q⟩ = i^q |q⟩`.

use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliOperator};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylOperator {
    d: u32,
    x: Vec<u8>,
    z: Vec<u8>,
    phase: u32,
}

/// Single-site factor `X^x Z^z` used in ordered products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuditFactor {
    pub site: usize,
    pub x: u8,
    pub z: u8,
}

impl QuditFactor {
    pub fn new(site: usize, x: u8, z: u8) -> Self {
        QuditFactor { site, x, z }
    }
    pub fn x(site: usize, power: u8) -> Self {
        QuditFactor { site, x: power, z: 0 }
    }
    pub fn z(site: usize, power: u8) -> Self {
        QuditFactor { site, x: 0, z: power }
    }
}

impl WeylOperator {
    pub fn identity(d: u32, n: usize) -> Self {
        assert!(d >= 2, "qudit dimension must be at least 2");
        assert!(d <= 128, "qudit dimension too large for u8 exponents");
        WeylOperator { d, x: vec![0; n], z: vec![0; n], phase: 0 }
    }

    /// Builds `w^phase · Π X^x Z^z`, reducing exponents mod d.
    pub fn from_parts(d: u32, x: Vec<u8>, z: Vec<u8>, phase: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("qudit dimension {d} < 2")));
        }
        if x.len() != z.len() {
            return Err(Error::RegisterMismatch(x.len(), z.len()));
        }
        let x = x.into_iter().map(|a| (a as u32 % d) as u8).collect();
        let z = z.into_iter().map(|b| (b as u32 % d) as u8).collect();
        Ok(WeylOperator { d, x, z, phase: phase % (2 * d) })
    }

    pub fn single(d: u32, n: usize, f: QuditFactor) -> Result<Self> {
        if f.site >= n {
            return Err(Error::SiteOutOfRange { site: f.site, n });
        }
        let mut w = Self::identity(d, n);
        w.x[f.site] = (f.x as u32 % d) as u8;
        w.z[f.site] = (f.z as u32 % d) as u8;
        Ok(w)
    }

    pub fn x_pow(d: u32, n: usize, site: usize, a: u8) -> Self {
        Self::single(d, n, QuditFactor::x(site, a)).expect("site in range")
    }

    pub fn z_pow(d: u32, n: usize, site: usize, b: u8) -> Self {
        Self::single(d, n, QuditFactor::z(site, b)).expect("site in range")
    }

    /// Exact embedding of a qubit Pauli at d = 2.
    pub fn from_pauli(p: &PauliOperator) -> Self {
        let n = p.n();
        let x = (0..n).map(|j| p.x_bits().get(j) as u8).collect();
        let z = (0..n).map(|j| p.z_bits().get(j) as u8).collect();
        WeylOperator { d: 2, x, z, phase: p.phase_exp() as u32 }
    }

    pub fn to_pauli(&self) -> Result<PauliOperator> {
        if self.d != 2 {
            return Err(Error::DimensionMismatch(self.d, 2));
        }
        let x = crate::gf2::BitVec::from_bools(&self.x.iter().map(|&a| a == 1).collect::<Vec<_>>());
        let z = crate::gf2::BitVec::from_bools(&self.z.iter().map(|&b| b == 1).collect::<Vec<_>>());
        PauliOperator::from_parts(x, z, self.phase as u8)
    }

    #[inline]
    pub fn d(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn phase_exp(&self) -> u32 {
        self.phase
    }

    pub fn x_exps(&self) -> &[u8] {
        &self.x
    }

    pub fn z_exps(&self) -> &[u8] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&a| a == 0) && self.z.iter().all(|&b| b == 0)
    }

    pub fn is_scalar_one(&self) -> bool {
        self.is_identity() && self.phase == 0
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n()).filter(|&j| self.x[j] != 0 || self.z[j] != 0).collect()
    }

    /// Multiplies by `w^k`.
    pub fn times_w(mut self, k: u32) -> Self {
        self.phase = (self.phase + k) % (2 * self.d);
        self
    }

    pub fn with_phase(mut self, k: u32) -> Self {
        self.phase = k % (2 * self.d);
        self
    }

    fn check(&self, other: &WeylOperator) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        if self.n() != other.n() {
            return Err(Error::RegisterMismatch(self.n(), other.n()));
        }
        Ok(())
    }

    /// Matrix product `self × other`.
    pub fn multiply(&self, other: &WeylOperator) -> Result<WeylOperator> {
        self.check(other)?;
        let d = self.d;
        let m = 2 * d;
        // Z^b X^a = ω^{ab} X^a Z^b
        let mut phase = self.phase + other.phase;
        let mut x = Vec::with_capacity(self.n());
        let mut z = Vec::with_capacity(self.n());
        for j in 0..self.n() {
            phase = (phase + 2 * (self.z[j] as u32 * other.x[j] as u32)) % m;
            x.push(((self.x[j] as u32 + other.x[j] as u32) % d) as u8);
            z.push(((self.z[j] as u32 + other.z[j] as u32) % d) as u8);
        }
        Ok(WeylOperator { d, x, z, phase })
    }

    /// `k ∈ Z_d` with `self · other = ω^k · other · self`.
    pub fn commutation_phase(&self, other: &WeylOperator) -> Result<u32> {
        self.check(other)?;
        let d = self.d as i64;
        let mut k: i64 = 0;
        for j in 0..self.n() {
            k += self.z[j] as i64 * other.x[j] as i64 - self.x[j] as i64 * other.z[j] as i64;
        }
        Ok(k.rem_euclid(d) as u32)
    }

    pub fn commutes(&self, other: &WeylOperator) -> Result<bool> {
        Ok(self.commutation_phase(other)? == 0)
    }

    pub fn dagger(&self) -> WeylOperator {
        // (w^k X^a Z^b)† = w^{-k} Z^{-b} X^{-a} = w^{-k} ω^{ab} X^{-a} Z^{-b}
        let d = self.d;
        let m = 2 * d;
        let mut phase = (m - self.phase) % m;
        let mut x = Vec::with_capacity(self.n());
        let mut z = Vec::with_capacity(self.n());
        for j in 0..self.n() {
            phase = (phase + 2 * self.x[j] as u32 * self.z[j] as u32) % m;
            x.push(((d - self.x[j] as u32) % d) as u8);
            z.push(((d - self.z[j] as u32) % d) as u8);
        }
        WeylOperator { d, x, z, phase }
    }

    /// Integer power; negative exponents use the adjoint.
    pub fn power(&self, m: i64) -> WeylOperator {
        let base = if m < 0 { self.dagger() } else { self.clone() };
        let mut e = m.unsigned_abs();
        let mut acc = WeylOperator::identity(self.d, self.n());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.multiply(&b).expect("same shape");
            }
            b = b.multiply(&b).expect("same shape");
            e >>= 1;
        }
        acc
    }

    pub fn is_unitary_hermitian(&self) -> bool {
        self.dagger() == *self
    }

    /// Tensor-style concatenation of registers.
    pub fn concat(&self, other: &WeylOperator) -> Result<WeylOperator> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        Ok(WeylOperator { d: self.d, x, z, phase: (self.phase + other.phase) % (2 * self.d) })
    }

    /// Symplectic vector `(x | z)` over Z_d.
    pub fn symplectic(&self) -> Vec<u8> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.z);
        v
    }

    pub fn parse(s: &str, d: u32, n: usize) -> Result<WeylOperator> {
        let mut toks = s.split_whitespace().peekable();
        let mut k = 0u32;
        if let Some(t) = toks.peek() {
            if let Some(rest) = t.strip_prefix("w^") {
                k = rest.parse().map_err(|_| Error::Parse(format!("bad phase token {t:?}")))?;
                toks.next();
            }
        }
        let mut acc = WeylOperator::identity(d, n);
        for t in toks {
            let (letter, rest) = t.split_at(1);
            let (site, exp) = match rest.split_once('^') {
                Some((s, e)) => (s, e),
                None => (rest, "1"),
            };
            let site: usize = site.parse().map_err(|_| Error::Parse(format!("bad site in {t:?}")))?;
            let exp: u32 = exp.parse().map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
            let e = (exp % d) as u8;
            let f = match letter {
                "X" => QuditFactor::x(site, e),
                "Z" => QuditFactor::z(site, e),
                _ => return Err(Error::Parse(format!("bad factor {t:?}"))),
            };
            acc = acc.multiply(&WeylOperator::single(d, n, f)?)?;
        }
        Ok(acc.times_w(k))
    }
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w^{}", self.phase)?;
        for j in 0..self.n() {
            match self.x[j] {
                0 => {}
                1 => write!(f, " X{j}")?,
                a => write!(f, " X{j}^{a}")?,
            }
            match self.z[j] {
                0 => {}
                1 => write!(f, " Z{j}")?,
                b => write!(f, " Z{j}^{b}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weyl[d={},n={}]({})", self.d, self.n(), self)
    }
}

/// Applies `seq` in order and returns the matrix product of the factors in
/// reverse order.
pub fn ordered_product(d: u32, n: usize, seq: &[QuditFactor]) -> Result<WeylOperator> {
    let mut acc = WeylOperator::identity(d, n);
    for f in seq {
        acc = WeylOperator::single(d, n, *f)?.multiply(&acc)?;
    }
    Ok(acc)
}

/// Converts qubit letters to qudit factors at d = 2 (Y ↦ XZ with a phase of i).
pub fn letter_factor(site: usize, op: PauliLetter) -> (QuditFactor, u32) {
    match op {
        PauliLetter::X => (QuditFactor::x(site, 1), 0),
        PauliLetter::Z => (QuditFactor::z(site, 1), 0),
        PauliLetter::Y => (QuditFactor::new(site, 1, 1), 1),
    }
}


#[cfg(test)]
mod tests {
    use super::matrix_oracle as mo;
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(rng: &mut impl Rng, d: u32, n: usize) -> WeylOperator {
        let x = (0..n).map(|_| rng.gen_range(0..d) as u8).collect();
        let z = (0..n).map(|_| rng.gen_range(0..d) as u8).collect();
        WeylOperator::from_parts(d, x, z, rng.gen_range(0..2 * d)).unwrap()
    }

    #[test]
    fn zx_equals_i_xz_at_d4() {
        let z = WeylOperator::z_pow(4, 1, 0, 1);
        let x = WeylOperator::x_pow(4, 1, 0, 1);
        let zx = z.multiply(&x).unwrap();
        assert_eq!((zx.x_exps()[0], zx.z_exps()[0], zx.phase_exp()), (1, 1, 2));
        assert!(x.multiply(&x.dagger()).unwrap().is_scalar_one());
        assert!(WeylOperator::z_pow(4, 1, 0, 1).power(4).is_scalar_one());
        assert_eq!(x.dagger(), WeylOperator::x_pow(4, 1, 0, 3));
    }

    #[test]
    fn commutation_phase_examples() {
        let z1 = WeylOperator::z_pow(4, 2, 0, 1);
        let x1 = WeylOperator::x_pow(4, 2, 0, 1);
        let x2 = WeylOperator::x_pow(4, 2, 1, 1);
        assert_eq!(z1.commutation_phase(&x1).unwrap(), 1);
        assert_eq!(z1.commutation_phase(&x2).unwrap(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_op(&mut rng, 4, 3);
            assert_eq!(p.commutation_phase(&p).unwrap(), 0);
        }
    }

    #[test]
    fn products_match_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &d in &[2u32, 3, 4] {
            for n in 1..=3 {
                if d == 4 && n == 3 && rng.gen_bool(0.5) {
                    continue;
                }
                for _ in 0..8 {
                    let p = random_op(&mut rng, d, n);
                    let q = random_op(&mut rng, d, n);
                    let pq = p.multiply(&q).unwrap();
                    let mp = mo::weyl_matrix(&p);
                    let mq = mo::weyl_matrix(&q);
                    assert!(mo::close(&mo::weyl_matrix(&pq), &mo::mul(&mp, &mq), 1e-9));
                    assert!(mo::close(&mo::weyl_matrix(&p.dagger()), &mo::dagger(&mp), 1e-9));
                    let k = p.commutation_phase(&q).unwrap();
                    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
                    assert!(mo::close(&mo::mul(&mp, &mq), &mo::scale(&mo::mul(&mq, &mp), omega), 1e-9));
                }
            }
        }
    }

    #[test]
    fn dagger_of_i_xz_inverts() {
        // i = w^2 at d = 4
        let ixz = WeylOperator::from_parts(4, vec![1], vec![1], 2).unwrap();
        assert!(ixz.dagger().multiply(&ixz).unwrap().is_scalar_one());
        let m = mo::weyl_matrix(&ixz);
        assert!(mo::close(&mo::mul(&mo::dagger(&m), &m), &mo::eye(4), 1e-12));
    }

    #[test]
    fn qubit_embedding_matches_pauli_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let a = random_op(&mut rng, 2, n);
            let b = random_op(&mut rng, 2, n);
            let pa = a.to_pauli().unwrap();
            let pb = b.to_pauli().unwrap();
            let via_pauli = WeylOperator::from_pauli(&pa.multiply(&pb).unwrap());
            assert_eq!(via_pauli, a.multiply(&b).unwrap());
            assert_eq!(a.commutes(&b).unwrap(), pa.commutes(&pb).unwrap());
        }
    }

    #[test]
    fn ordered_product_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let n = 2;
            let seq: Vec<QuditFactor> = (0..5)
                .map(|_| QuditFactor::new(rng.gen_range(0..n), rng.gen_range(0..4), rng.gen_range(0..4)))
                .collect();
            let op = ordered_product(4, n, &seq).unwrap();
            let mut m = mo::eye(16);
            for f in &seq {
                let single = WeylOperator::single(4, n, *f).unwrap();
                m = mo::mul(&mo::weyl_matrix(&single), &m);
            }
            assert!(mo::close(&mo::weyl_matrix(&op), &m, 1e-9));
        }
    }

    #[test]
    fn u_operators_satisfy_square_algebra() {
        // U1 = Z†, U2 = X², U3 = X Z X at d = 4
        let z = mo::clock(4);
        let x = mo::shift(4);
        let u = [mo::dagger(&z), mo::mul(&x, &x), mo::mul(&mo::mul(&x, &z), &x)];
        let two_i = Complex64::new(0.0, 2.0);
        let eps = |i: usize, j: usize| -> Option<(usize, f64)> {
            match (i, j) {
                (0, 1) => Some((2, 1.0)),
                (1, 2) => Some((0, 1.0)),
                (2, 0) => Some((1, 1.0)),
                (1, 0) => Some((2, -1.0)),
                (2, 1) => Some((0, -1.0)),
                (0, 2) => Some((1, -1.0)),
                _ => None,
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                let ab = mo::mul(&u[i], &u[j]);
                let ba = mo::mul(&u[j], &u[i]);
                let comm = mo::add(&ab, &mo::scale(&ba, Complex64::new(-1.0, 0.0)));
                let anti = mo::add(&ab, &ba);
                let expect_comm = match eps(i, j) {
                    Some((k, s)) => mo::scale(&mo::dagger(&u[k]), two_i * s),
                    None => mo::scale(&mo::eye(4), Complex64::new(0.0, 0.0)),
                };
                assert!(mo::close(&comm, &expect_comm, 1e-12), "commutator {i}{j}");
                let expect_anti = if i == j {
                    mo::scale(&mo::mul(&u[i], &u[i]), Complex64::new(2.0, 0.0))
                } else {
                    mo::scale(&mo::eye(4), Complex64::new(0.0, 0.0))
                };
                assert!(mo::close(&anti, &expect_anti, 1e-12), "anticommutator {i}{j}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let op = WeylOperator::parse("w^3 X0^3 Z0 Z2^2", 4, 3).unwrap();
        assert_eq!(op.to_string(), "w^3 X0^3 Z0 Z2^2");
        assert_eq!(WeylOperator::parse(&op.to_string(), 4, 3).unwrap(), op);
    }
}

#[cfg(test)]
mod props {
    use super::matrix_oracle as mo;
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn op(d: u32, n: usize) -> impl Strategy<Value = WeylOperator> {
        (prop::collection::vec(0..d as u8, n), prop::collection::vec(0..d as u8, n), 0..2 * d)
            .prop_map(move |(x, z, k)| WeylOperator::from_parts(d, x, z, k).unwrap())
    }

    fn small() -> impl Strategy<Value = (WeylOperator, WeylOperator, WeylOperator)> {
        (prop_oneof![Just(2u32), Just(4)], 1usize..=3).prop_flat_map(|(d, n)| (op(d, n), op(d, n), op(d, n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn group_axioms_match_matrices((p, q, r) in small()) {
            let (mp, mq, mr) = (mo::weyl_matrix(&p), mo::weyl_matrix(&q), mo::weyl_matrix(&r));
            let pq = p.multiply(&q).unwrap();
            prop_assert!(mo::close(&mo::weyl_matrix(&pq), &mo::mul(&mp, &mq), 1e-9));
            prop_assert_eq!(pq.multiply(&r).unwrap(), p.multiply(&q.multiply(&r).unwrap()).unwrap());
            prop_assert!(mo::close(&mo::weyl_matrix(&pq.multiply(&r).unwrap()), &mo::mul(&mo::mul(&mp, &mq), &mr), 1e-9));
            prop_assert!(p.multiply(&p.dagger()).unwrap().is_scalar_one());
            prop_assert!(mo::close(&mo::weyl_matrix(&p.dagger()), &mo::dagger(&mp), 1e-9));
            let id = WeylOperator::identity(p.d(), p.n());
            prop_assert_eq!(p.multiply(&id).unwrap(), p.clone());
            let d = p.d() as usize;
            prop_assert!(p.power(d as i64).x_exps().iter().all(|&e| e == 0));
            let k = p.commutation_phase(&q).unwrap();
            let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64);
            prop_assert!(mo::close(&mo::mul(&mp, &mq), &mo::scale(&mo::mul(&mq, &mp), omega), 1e-9));
        }

        #[test]
        fn ordered_products_match_matrices(
            d in prop_oneof![Just(2u32), Just(4)],
            n in 1usize..=3,
            seq in prop::collection::vec((0usize..3, 0u8..4, 0u8..4), 0..7),
        ) {
            let seq: Vec<QuditFactor> =
                seq.into_iter().map(|(s, a, b)| QuditFactor::new(s % n, a % d as u8, b % d as u8)).collect();
            let got = ordered_product(d, n, &seq).unwrap();
            let mut m = mo::eye((d as usize).pow(n as u32));
            for f in &seq {
                m = mo::mul(&mo::weyl_matrix(&WeylOperator::single(d, n, *f).unwrap()), &m);
            }
            prop_assert!(mo::close(&mo::weyl_matrix(&got), &m, 1e-9));
        }
    }
}
