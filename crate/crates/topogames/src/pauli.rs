//! n-qubit Pauli operators with exact global phase.
//!
//! An operator is stored as `i^k · Π_j X_j^{x_j} Z_j^{z_j}`, X to the left of Z
//! on every site. Products keep `k` exact, so the sign picked up by applying
//! the same factors in a different order is never lost.

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: BitVec,
    z: BitVec,
    phase: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn bits(self) -> (bool, bool) {
        match self {
            PauliLetter::X => (true, false),
            PauliLetter::Y => (true, true),
            PauliLetter::Z => (false, true),
        }
    }
}

/// One single-site factor of an ordered product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteFactor {
    pub site: usize,
    pub op: PauliLetter,
}

impl SiteFactor {
    pub fn new(site: usize, op: PauliLetter) -> Self {
        SiteFactor { site, op }
    }
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { n, x: BitVec::zeros(n), z: BitVec::zeros(n), phase: 0 }
    }

    /// Builds `i^phase · X^x Z^z` from raw parts.
    pub fn from_parts(x: BitVec, z: BitVec, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::RegisterMismatch(x.len(), z.len()));
        }
        Ok(PauliOperator { n: x.len(), x, z, phase: phase % 4 })
    }

    pub fn x_on(n: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for s in sites {
            p.x.flip(s);
        }
        p
    }

    pub fn z_on(n: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut p = Self::identity(n);
        for s in sites {
            p.z.flip(s);
        }
        p
    }

    pub fn single(n: usize, site: usize, op: PauliLetter) -> Result<Self> {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let mut p = Self::identity(n);
        let (bx, bz) = op.bits();
        p.x.set(site, bx);
        p.z.set(site, bz);
        if op == PauliLetter::Y {
            p.phase = 1;
        }
        Ok(p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.z
    }

    pub fn with_phase(mut self, phase_exp: u8) -> Self {
        self.phase = phase_exp % 4;
        self
    }

    /// Multiplies by `i^k`.
    pub fn times_i(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_x_only(&self) -> bool {
        self.z.is_zero()
    }

    pub fn is_z_only(&self) -> bool {
        self.x.is_zero()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.x.get(j) || self.z.get(j)).collect()
    }

    fn check(&self, other: &PauliOperator) -> Result<()> {
        if self.n != other.n {
            return Err(Error::RegisterMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Matrix product `self × other` (`other` acts first).
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        self.check(other)?;
        let swaps = self.z.and_count(&other.x);
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        let phase = ((self.phase as usize + other.phase as usize + 2 * swaps) % 4) as u8;
        Ok(PauliOperator { n: self.n, x, z, phase })
    }

    /// Symplectic form mod 2.
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        self.check(other)?;
        Ok((self.x.and_count(&other.z) + self.z.and_count(&other.x)) % 2 == 0)
    }

    pub fn dagger(&self) -> PauliOperator {
        // (i^k X^x Z^z)† = i^{-k} Z^z X^x = i^{-k} (-1)^{|x∧z|} X^x Z^z
        let w = self.x.and_count(&self.z);
        let phase = ((4 - self.phase as usize) + 2 * w) % 4;
        PauliOperator { phase: phase as u8, ..self.clone() }
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase as usize % 2 == self.x.and_count(&self.z) % 2
    }

    /// Number of sites carrying a Y factor in letter form.
    fn y_count(&self) -> usize {
        self.x.and_count(&self.z)
    }

    /// Per-site letters in ascending site order.
    pub fn letters(&self) -> Vec<SiteFactor> {
        (0..self.n)
            .filter_map(|j| match (self.x.get(j), self.z.get(j)) {
                (true, false) => Some(SiteFactor::new(j, PauliLetter::X)),
                (true, true) => Some(SiteFactor::new(j, PauliLetter::Y)),
                (false, true) => Some(SiteFactor::new(j, PauliLetter::Z)),
                _ => None,
            })
            .collect()
    }

    /// Phase exponent of the letter form `i^k Π letters` (Y = iXZ per site).
    pub fn letter_phase(&self) -> u8 {
        ((self.phase as usize + 4 - self.y_count() % 4) % 4) as u8
    }

    pub fn parse(s: &str, n: usize) -> Result<PauliOperator> {
        let mut toks = s.split_whitespace().peekable();
        let mut k = 0u8;
        if let Some(t) = toks.peek() {
            if let Some(rest) = t.strip_prefix("i^") {
                k = rest
                    .parse::<u8>()
                    .map_err(|_| Error::Parse(format!("bad phase token {t:?}")))?
                    % 4;
                toks.next();
            }
        }
        let mut p = PauliOperator::identity(n);
        for t in toks {
            let (letter, site) = t.split_at(1);
            let op = match letter {
                "X" => PauliLetter::X,
                "Y" => PauliLetter::Y,
                "Z" => PauliLetter::Z,
                "I" => continue,
                _ => return Err(Error::Parse(format!("bad factor {t:?}"))),
            };
            let site: usize = site.parse().map_err(|_| Error::Parse(format!("bad site in {t:?}")))?;
            if site >= n {
                return Err(Error::SiteOutOfRange { site, n });
            }
            if p.x.get(site) || p.z.get(site) {
                return Err(Error::Parse(format!("site {site} repeated")));
            }
            p = Self::single(n, site, op)?.multiply(&p)?;
        }
        Ok(p.times_i(k))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i^{}", self.letter_phase())?;
        for SiteFactor { site, op } in self.letters() {
            write!(f, " {:?}{}", op, site)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli[{}]({})", self.n, self)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;
    /// Parses with the register size set to one past the largest site.
    fn from_str(s: &str) -> Result<Self> {
        let n = s
            .split_whitespace()
            .filter(|t| !t.starts_with("i^"))
            .filter_map(|t| t.get(1..).and_then(|d| d.parse::<usize>().ok()))
            .max()
            .map_or(0, |m| m + 1);
        PauliOperator::parse(s, n)
    }
}

/// Applies `seq` in order (first element first) and returns the canonical
/// product, i.e. the matrix product of the factors in reverse order.
pub fn ordered_product(seq: &[SiteFactor], n: usize) -> Result<PauliOperator> {
    let mut acc = PauliOperator::identity(n);
    for f in seq {
        acc = PauliOperator::single(n, f.site, f.op)?.multiply(&acc)?;
    }
    Ok(acc)
}

/// `i · x_part · z_part` for an X-only and a Z-only operator overlapping on
/// exactly one site.
pub fn make_y_composite(x_part: &PauliOperator, z_part: &PauliOperator) -> Result<PauliOperator> {
    if x_part.n != z_part.n {
        return Err(Error::RegisterMismatch(x_part.n, z_part.n));
    }
    if !x_part.is_x_only() || !z_part.is_z_only() {
        return Err(Error::InvalidComposite("expected an X-only and a Z-only part".into()));
    }
    let overlap = x_part.x.and_count(&z_part.z);
    if overlap != 1 {
        return Err(Error::InvalidComposite(format!("supports overlap on {overlap} sites, need exactly 1")));
    }
    Ok(x_part.multiply(z_part)?.times_i(1))
}

/// Factors of a Pauli in letter form, with the leftover `i^k` phase.
pub fn to_site_factors(p: &PauliOperator) -> (u8, Vec<SiteFactor>) {
    (p.letter_phase(), p.letters())
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::weyl::matrix_oracle as mo;
    use crate::weyl::WeylOperator;
    use proptest::prelude::*;

    fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4)
            .prop_map(|(x, z, k)| PauliOperator::from_parts(BitVec::from_bools(&x), BitVec::from_bools(&z), k).unwrap())
    }

    fn triple() -> impl Strategy<Value = (PauliOperator, PauliOperator, PauliOperator)> {
        (1usize..=6).prop_flat_map(|n| (pauli(n), pauli(n), pauli(n)))
    }

    fn letter() -> impl Strategy<Value = PauliLetter> {
        prop_oneof![Just(PauliLetter::X), Just(PauliLetter::Y), Just(PauliLetter::Z)]
    }

    proptest! {
        #[test]
        fn multiplication_is_associative((p, q, r) in triple()) {
            let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commutation_is_the_phase_offset((p, q, _r) in triple()) {
            let pq = p.multiply(&q).unwrap();
            let qp = q.multiply(&p).unwrap();
            prop_assert_eq!((pq.x_bits(), pq.z_bits()), (qp.x_bits(), qp.z_bits()));
            let offset = (pq.phase_exp() + 4 - qp.phase_exp()) % 4;
            prop_assert_eq!(offset, if p.commutes(&q).unwrap() { 0 } else { 2 });
        }

        #[test]
        fn ordered_product_matches_matrices(
            n in 1usize..=4,
            seq in prop::collection::vec((0usize..4, letter()), 0..8),
        ) {
            let seq: Vec<SiteFactor> = seq.into_iter().map(|(s, op)| SiteFactor::new(s % n, op)).collect();
            let op = ordered_product(&seq, n).unwrap();
            let mut m = mo::eye(1 << n);
            for f in &seq {
                let single = WeylOperator::from_pauli(&PauliOperator::single(n, f.site, f.op).unwrap());
                m = mo::mul(&mo::weyl_matrix(&single), &m);
            }
            prop_assert!(mo::close(&mo::weyl_matrix(&WeylOperator::from_pauli(&op)), &m, 1e-12));
        }

        #[test]
        fn y_composites_square_to_identity(
            n in 2usize..=8,
            xs in prop::collection::vec(any::<bool>(), 8),
            zs in prop::collection::vec(any::<bool>(), 8),
            shared in 0usize..8,
        ) {
            let shared = shared % n;
            let xsites: Vec<usize> = (0..n).filter(|&i| i == shared || (xs[i] && !zs[i])).collect();
            let zsites: Vec<usize> = (0..n).filter(|&i| i == shared || (zs[i] && !xs[i])).collect();
            let y = make_y_composite(&PauliOperator::x_on(n, xsites), &PauliOperator::z_on(n, zsites)).unwrap();
            let sq = y.multiply(&y).unwrap();
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.phase_exp(), 0);
            prop_assert!(y.is_hermitian());
        }
    }
}
