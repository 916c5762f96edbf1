//! Stabilizer groups over qubits and 2^k-level qudits.
//!
//! Generators are reduced to Howell normal form over Z_d with the phase of
//! every row carried exactly. At d = 2 this is ordinary Gaussian elimination
//! over GF(2). Membership of an operator is decided by reducing it against
//! the canonical rows and reading off the residual phase.

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::weyl::WeylOperator;
use serde::{Deserialize, Serialize};
use std::fmt;

/// `e^{2πi k / order}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub k: u32,
    pub order: u32,
}

impl RootOfUnity {
    pub fn new(k: u32, order: u32) -> Self {
        RootOfUnity { k: k % order, order }
    }

    pub fn one() -> Self {
        RootOfUnity { k: 0, order: 1 }
    }

    /// Reduced to lowest terms so that equal values compare equal.
    pub fn normalized(self) -> Self {
        let g = gcd(self.k, self.order);
        RootOfUnity { k: self.k / g, order: self.order / g }
    }

    pub fn is_one(self) -> bool {
        self.k == 0
    }

    /// `Some(±1)` for real values.
    pub fn sign(self) -> Option<i8> {
        let r = self.normalized();
        match (r.k, r.order) {
            (0, 1) => Some(1),
            (1, 2) => Some(-1),
            _ => None,
        }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.k as f64 / self.order as f64)
    }

    pub fn mul(self, other: RootOfUnity) -> RootOfUnity {
        let order = lcm(self.order, other.order);
        let k = self.k * (order / self.order) + other.k * (order / other.order);
        RootOfUnity::new(k, order).normalized()
    }

    pub fn conj(self) -> RootOfUnity {
        RootOfUnity::new(self.order - self.k, self.order).normalized()
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.normalized();
        match (r.k, r.order) {
            (0, 1) => write!(f, "1"),
            (1, 2) => write!(f, "-1"),
            (1, 4) => write!(f, "i"),
            (3, 4) => write!(f, "-i"),
            (k, o) => write!(f, "exp(2pi i {k}/{o})"),
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Result of `⟨ψ|O|ψ⟩` for a stabilizer state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expectation {
    /// `O` equals this phase times a group element.
    Definite(RootOfUnity),
    /// `O` fails to commute with some stabilizer.
    Zero,
    /// `O` commutes with the group but is not in it up to phase.
    Logical,
}

impl Expectation {
    pub fn is_definite(&self) -> bool {
        matches!(self, Expectation::Definite(_))
    }

    pub fn definite_sign(&self) -> Option<i8> {
        match self {
            Expectation::Definite(r) => r.sign(),
            _ => None,
        }
    }

    /// Numerical value when it is determined by the group alone.
    pub fn value(&self) -> Option<num_complex::Complex64> {
        match self {
            Expectation::Definite(r) => Some(r.to_complex()),
            Expectation::Zero => Some(num_complex::Complex64::new(0.0, 0.0)),
            Expectation::Logical => None,
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Definite(r) => write!(f, "{r}"),
            Expectation::Zero => write!(f, "0"),
            Expectation::Logical => write!(f, "logical"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Row {
    pivot: usize,
    // pivot entry is 2^val
    val: u32,
    op: WeylOperator,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizerGroup {
    d: u32,
    n: usize,
    generators: Vec<WeylOperator>,
    sector_fixers: Vec<WeylOperator>,
    canonical: Vec<Row>,
}

fn log2_exact(d: u32) -> Option<u32> {
    (d >= 2 && d.is_power_of_two()).then(|| d.trailing_zeros())
}

fn valuation(e: u8) -> u32 {
    (e as u32).trailing_zeros()
}

/// Inverse of an odd residue modulo a power of two.
fn odd_inverse(u: u32, d: u32) -> u32 {
    (1..d).find(|&v| (u * v) % d == 1).expect("odd residues are units")
}

impl StabilizerGroup {
    /// Validates commutation and builds the canonical form.
    pub fn new(d: u32, n: usize, generators: Vec<WeylOperator>) -> Result<Self> {
        Self::with_fixers(d, n, generators, Vec::new())
    }

    pub fn from_paulis(n: usize, generators: &[PauliOperator]) -> Result<Self> {
        let gens = generators
            .iter()
            .map(|p| {
                if p.n() != n {
                    return Err(Error::RegisterMismatch(p.n(), n));
                }
                Ok(WeylOperator::from_pauli(p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(2, n, gens)
    }

    fn with_fixers(d: u32, n: usize, generators: Vec<WeylOperator>, fixers: Vec<WeylOperator>) -> Result<Self> {
        if log2_exact(d).is_none() {
            return Err(Error::InvalidParameter(format!("qudit dimension {d} is not a power of two")));
        }
        let all: Vec<&WeylOperator> = generators.iter().chain(fixers.iter()).collect();
        for g in &all {
            if g.d() != d {
                return Err(Error::DimensionMismatch(g.d(), d));
            }
            if g.n() != n {
                return Err(Error::RegisterMismatch(g.n(), n));
            }
            if !g.power(d as i64).is_scalar_one() {
                return Err(Error::Inconsistent);
            }
        }
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if !all[i].commutes(all[j])? {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        let canonical = howell(d, n, all.into_iter().cloned().collect())?;
        Ok(StabilizerGroup { d, n, generators, sector_fixers: fixers, canonical })
    }

    pub fn empty(d: u32, n: usize) -> Self {
        Self::new(d, n, Vec::new()).expect("empty group is valid")
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[WeylOperator] {
        &self.generators
    }

    pub fn sector_fixers(&self) -> &[WeylOperator] {
        &self.sector_fixers
    }

    /// Generators followed by sector fixers.
    pub fn all_generators(&self) -> Vec<WeylOperator> {
        self.generators.iter().chain(self.sector_fixers.iter()).cloned().collect()
    }

    /// Canonical rows (Howell form with exact phases).
    pub fn canonical_rows(&self) -> Vec<WeylOperator> {
        self.canonical.iter().map(|r| r.op.clone()).collect()
    }

    /// Returns the group rebuilt in canonical form; idempotent.
    pub fn canonicalize(&self) -> StabilizerGroup {
        let rows = self.canonical_rows();
        StabilizerGroup {
            d: self.d,
            n: self.n,
            generators: rows.clone(),
            sector_fixers: Vec::new(),
            canonical: self.canonical.clone(),
        }
    }

    /// Number of canonical rows; equals the GF(2) rank at d = 2.
    pub fn rank(&self) -> usize {
        self.canonical.len()
    }

    /// log2 of the order of the group modulo phases.
    pub fn log2_order(&self) -> u32 {
        let k = log2_exact(self.d).expect("power of two");
        self.canonical.iter().map(|r| k - r.val).sum()
    }

    pub fn ground_space_log_dim(&self) -> u32 {
        let k = log2_exact(self.d).expect("power of two");
        k * self.n as u32 - self.log2_order()
    }

    fn check_op(&self, op: &WeylOperator) -> Result<()> {
        if op.d() != self.d {
            return Err(Error::DimensionMismatch(op.d(), self.d));
        }
        if op.n() != self.n {
            return Err(Error::RegisterMismatch(op.n(), self.n));
        }
        Ok(())
    }

    /// Reduces `op` against the canonical rows; returns the residual.
    fn reduce(&self, op: &WeylOperator) -> WeylOperator {
        let n = self.n;
        let mut cur = op.clone();
        for row in &self.canonical {
            let e = entry(&cur, row.pivot, n);
            if e == 0 {
                continue;
            }
            let step = 1u32 << row.val;
            if e as u32 % step != 0 {
                continue;
            }
            let k = e as u32 / step;
            cur = cur.multiply(&row.op.power(-(k as i64))).expect("same shape");
        }
        cur
    }

    /// `Some(φ)` iff `op = φ · g` for some group element `g`.
    pub fn membership(&self, op: &WeylOperator) -> Result<Option<RootOfUnity>> {
        self.check_op(op)?;
        let r = self.reduce(op);
        Ok(r.is_identity().then(|| RootOfUnity::new(r.phase_exp(), 2 * self.d).normalized()))
    }

    pub fn contains(&self, op: &WeylOperator) -> Result<bool> {
        Ok(self.membership(op)? == Some(RootOfUnity::one()))
    }

    pub fn expectation(&self, op: &WeylOperator) -> Result<Expectation> {
        self.check_op(op)?;
        for row in &self.canonical {
            if !row.op.commutes(op)? {
                return Ok(Expectation::Zero);
            }
        }
        Ok(match self.membership(op)? {
            Some(phase) => Expectation::Definite(phase),
            None => Expectation::Logical,
        })
    }

    pub fn expectation_pauli(&self, op: &PauliOperator) -> Result<Expectation> {
        self.expectation(&WeylOperator::from_pauli(op))
    }

    /// Enlarges the group so that each operator in `logicals` is fixed to +1.
    pub fn fix_sector(&self, logicals: &[WeylOperator]) -> Result<StabilizerGroup> {
        for (i, l) in logicals.iter().enumerate() {
            self.check_op(l)?;
            for (j, g) in self.all_generators().iter().enumerate() {
                if !l.commutes(g)? {
                    return Err(Error::InvalidParameter(format!(
                        "sector fixer {i} anticommutes with generator {j}"
                    )));
                }
            }
        }
        let mut fixers = self.sector_fixers.clone();
        fixers.extend(logicals.iter().cloned());
        Self::with_fixers(self.d, self.n, self.generators.clone(), fixers)
    }

    pub fn fix_sector_pauli(&self, logicals: &[PauliOperator]) -> Result<StabilizerGroup> {
        let w: Vec<WeylOperator> = logicals.iter().map(WeylOperator::from_pauli).collect();
        self.fix_sector(&w)
    }

    /// Same group with generator `i` replaced by `phase · g_i` (a different sector).
    pub fn with_generator_phase(&self, i: usize, phase_exp: u32) -> Result<StabilizerGroup> {
        let mut gens = self.generators.clone();
        let g = gens
            .get_mut(i)
            .ok_or_else(|| Error::InvalidParameter(format!("no generator {i}")))?;
        *g = g.clone().times_w(phase_exp);
        Self::with_fixers(self.d, self.n, gens, self.sector_fixers.clone())
    }

    /// One generator per line in operator text form, after a `# d= n=` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("# d={} n={}\n", self.d, self.n);
        for g in self.all_generators() {
            if self.d == 2 {
                s.push_str(&g.to_pauli().expect("d = 2").to_string());
            } else {
                s.push_str(&g.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<StabilizerGroup> {
        let mut d = None;
        let mut n = None;
        let mut lines = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(h) = line.strip_prefix('#') {
                for tok in h.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("d=") {
                        d = Some(v.parse::<u32>().map_err(|_| Error::Parse(format!("bad header {line:?}")))?);
                    } else if let Some(v) = tok.strip_prefix("n=") {
                        n = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad header {line:?}")))?);
                    }
                }
                continue;
            }
            lines.push(line);
        }
        let d = d.ok_or_else(|| Error::Parse("missing `# d= n=` header".into()))?;
        let n = n.ok_or_else(|| Error::Parse("missing `# d= n=` header".into()))?;
        let gens = lines
            .into_iter()
            .map(|l| {
                if d == 2 {
                    Ok(WeylOperator::from_pauli(&PauliOperator::parse(l, n)?))
                } else {
                    WeylOperator::parse(l, d, n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, n, gens)
    }
}

#[inline]
fn entry(op: &WeylOperator, col: usize, n: usize) -> u8 {
    if col < n {
        op.x_exps()[col]
    } else {
        op.z_exps()[col - n]
    }
}

fn howell(d: u32, n: usize, gens: Vec<WeylOperator>) -> Result<Vec<Row>> {
    let mut pool: Vec<WeylOperator> = Vec::new();
    let push = |pool: &mut Vec<WeylOperator>, g: WeylOperator| -> Result<()> {
        if g.is_identity() {
            if g.phase_exp() != 0 {
                return Err(Error::Inconsistent);
            }
        } else {
            pool.push(g);
        }
        Ok(())
    };
    for g in gens {
        push(&mut pool, g)?;
    }
    let mut rows: Vec<Row> = Vec::new();
    for col in 0..2 * n {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, g)| entry(g, col, n) != 0)
            .min_by_key(|(i, g)| (valuation(entry(g, col, n)), *i))
            .map(|(i, _)| i);
        let Some(bi) = best else { continue };
        let mut r = pool.swap_remove(bi);
        let e = entry(&r, col, n) as u32;
        let val = e.trailing_zeros();
        let unit = e >> val;
        if unit != 1 {
            r = r.power(odd_inverse(unit, d) as i64);
        }
        let step = 1u32 << val;
        let old = std::mem::take(&mut pool);
        for g in old {
            let ge = entry(&g, col, n) as u32;
            let g = if ge == 0 { g } else { g.multiply(&r.power(-((ge / step) as i64)))? };
            push(&mut pool, g)?;
        }
        if val > 0 {
            push(&mut pool, r.power((d / step) as i64))?;
        }
        rows.push(Row { pivot: col, val, op: r });
    }
    debug_assert!(pool.is_empty());
    // Reduce entries above each pivot into [0, 2^val).
    for i in 0..rows.len() {
        let (pivot, step) = (rows[i].pivot, 1u32 << rows[i].val);
        let pivot_op = rows[i].op.clone();
        for row in rows.iter_mut().take(i) {
            let e = entry(&row.op, pivot, n) as u32;
            let k = e / step;
            if k > 0 {
                row.op = row.op.multiply(&pivot_op.power(-(k as i64)))?;
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str, n: usize) -> PauliOperator {
        PauliOperator::parse(s, n).unwrap()
    }

    fn w(s: &str, n: usize) -> WeylOperator {
        WeylOperator::parse(s, 4, n).unwrap()
    }

    #[test]
    fn canonical_form_of_small_group() {
        let g = StabilizerGroup::from_paulis(2, &[p("Z0", 2), p("Z0 Z1", 2)]).unwrap();
        let rows: Vec<String> = g.canonical_rows().iter().map(|r| r.to_pauli().unwrap().to_string()).collect();
        assert_eq!(rows, vec!["i^0 Z0", "i^0 Z1"]);
        assert_eq!(g.ground_space_log_dim(), 0);
    }

    #[test]
    fn inconsistent_and_noncommuting_groups_are_rejected() {
        let minus = p("Z0", 1).times_i(2);
        assert_eq!(StabilizerGroup::from_paulis(1, &[p("Z0", 1), minus]).unwrap_err(), Error::Inconsistent);
        assert!(matches!(
            StabilizerGroup::from_paulis(1, &[p("Z0", 1), p("X0", 1)]),
            Err(Error::NonCommuting(0, 1))
        ));
        // (XZ)^2 = -1, so XZ without the factor i cannot stabilize anything
        let xz = p("X0", 1).multiply(&p("Z0", 1)).unwrap();
        assert_eq!(StabilizerGroup::from_paulis(1, &[xz]).unwrap_err(), Error::Inconsistent);
    }

    #[test]
    fn expectation_kinds() {
        let g = StabilizerGroup::from_paulis(2, &[p("Z0", 2)]).unwrap();
        assert_eq!(g.expectation_pauli(&p("Z0", 2)).unwrap(), Expectation::Definite(RootOfUnity::one()));
        assert_eq!(g.expectation_pauli(&p("X0", 2)).unwrap(), Expectation::Zero);
        assert_eq!(g.expectation_pauli(&p("Z1", 2)).unwrap(), Expectation::Logical);
        assert_eq!(g.expectation_pauli(&p("i^2 Z0", 2)).unwrap().definite_sign(), Some(-1));
        let fixed = g.fix_sector_pauli(&[p("Z1", 2)]).unwrap();
        assert!(fixed.expectation_pauli(&p("Z1", 2)).unwrap().is_definite());
        assert_eq!(g.fix_sector(&[]).unwrap().expectation_pauli(&p("Z1", 2)).unwrap(), Expectation::Logical);
        assert!(g.fix_sector_pauli(&[p("X0", 2)]).is_err());
    }

    #[test]
    fn z4_howell_form_handles_order_two_rows() {
        // Z^2 on one qudit: stabilized space {|0>, |2>}, dimension 2
        let g = StabilizerGroup::new(4, 1, vec![w("Z0^2", 1)]).unwrap();
        assert_eq!(g.ground_space_log_dim(), 1);
        assert_eq!(g.expectation(&w("Z0", 1)).unwrap(), Expectation::Logical);
        assert_eq!(g.expectation(&w("X0", 1)).unwrap(), Expectation::Zero);
        assert_eq!(g.expectation(&w("X0^2", 1)).unwrap(), Expectation::Logical);
        // Bell pair of two ququarts: X X and Z Z†
        let bell = StabilizerGroup::new(4, 2, vec![w("X0 X1", 2), w("Z0 Z1^3", 2)]).unwrap();
        assert_eq!(bell.ground_space_log_dim(), 0);
        assert_eq!(bell.expectation(&w("X0^2 X1^2", 2)).unwrap(), Expectation::Definite(RootOfUnity::one()));
        // X0 Z1 and Z0 X1: a pair whose product has a Z_4 relation
        let g2 = StabilizerGroup::new(4, 2, vec![w("X0^2 Z1^2", 2), w("Z0^2", 2), w("X1^2", 2)]).unwrap();
        assert_eq!(g2.rank(), 3);
        assert_eq!(g2.ground_space_log_dim(), 4 - 3);
    }

    pub(crate) fn random_commuting_paulis(rng: &mut impl Rng, n: usize, k: usize) -> Vec<PauliOperator> {
        // rejection sampling of independent, mutually commuting Hermitian Paulis
        let mut gens: Vec<PauliOperator> = Vec::new();
        while gens.len() < k {
            let x: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let z: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let bare = PauliOperator::x_on(n, x).multiply(&PauliOperator::z_on(n, z)).unwrap();
            let ny = (bare.x_bits().and_count(bare.z_bits()) % 2) as u8;
            let cand = bare.times_i(ny + 2 * rng.gen_range(0..2u8));
            if cand.is_identity() || !gens.iter().all(|g| g.commutes(&cand).unwrap()) {
                continue;
            }
            let current = StabilizerGroup::from_paulis(n, &gens).unwrap();
            if current.membership(&WeylOperator::from_pauli(&cand)).unwrap().is_none() {
                gens.push(cand);
            }
        }
        gens
    }

    #[test]
    fn canonical_form_is_order_independent_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(2..9);
            let k = rng.gen_range(1..=n);
            let mut gens = random_commuting_paulis(&mut rng, n, k);
            let g1 = StabilizerGroup::from_paulis(n, &gens).unwrap();
            gens.shuffle(&mut rng);
            // throw in a redundant product as well
            let extra = gens[0].multiply(gens.last().unwrap()).unwrap();
            gens.push(extra);
            let g2 = StabilizerGroup::from_paulis(n, &gens).unwrap();
            assert_eq!(g1.canonical_rows(), g2.canonical_rows());
            assert_eq!(g1.canonicalize().canonical_rows(), g1.canonical_rows());
            assert_eq!(g1.rank() + g1.ground_space_log_dim() as usize, n);
        }
    }

    #[test]
    fn text_round_trip() {
        let g = StabilizerGroup::new(4, 2, vec![w("X0 X1", 2), w("Z0 Z1^3", 2)]).unwrap();
        let g2 = StabilizerGroup::from_text(&g.to_text()).unwrap();
        assert_eq!(g.canonical_rows(), g2.canonical_rows());
        let q = StabilizerGroup::from_paulis(3, &[p("X0 X1", 3), p("i^2 Z0 Z1", 3)]).unwrap();
        assert_eq!(StabilizerGroup::from_text(&q.to_text()).unwrap().canonical_rows(), q.canonical_rows());
    }


    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        #[test]
        fn canonical_form_properties(seed in 0u64..u64::MAX, n in 2usize..10, frac in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 1 + ((n - 1) as f64 * frac) as usize;
            let mut gens = random_commuting_paulis(&mut rng, n, k);
            let g1 = StabilizerGroup::from_paulis(n, &gens).unwrap();
            gens.shuffle(&mut rng);
            let extra = gens[0].multiply(gens.last().unwrap()).unwrap();
            gens.push(extra);
            let g2 = StabilizerGroup::from_paulis(n, &gens).unwrap();
            proptest::prop_assert_eq!(g1.canonical_rows(), g2.canonical_rows());
            proptest::prop_assert_eq!(g1.canonicalize().canonical_rows(), g1.canonical_rows());
            proptest::prop_assert_eq!(g1.rank(), k);
            proptest::prop_assert_eq!(g1.rank() + g1.ground_space_log_dim() as usize, n);
        }

        #[test]
        fn qudit_canonical_form_is_order_independent(seed in 0u64..u64::MAX, n in 1usize..5, k in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let state = crate::random::random_stabilizer_state(&mut rng, 4, n);
            let g = crate::random::random_subgroup(&mut rng, &state, k);
            let mut gens = g.generators().to_vec();
            gens.shuffle(&mut rng);
            let h = StabilizerGroup::new(4, n, gens).unwrap();
            proptest::prop_assert_eq!(g.canonical_rows(), h.canonical_rows());
            proptest::prop_assert_eq!(h.canonicalize().canonical_rows(), h.canonical_rows());
        }
    }
}
