//! Dense state vectors for small registers.
//!
//! Basis index `Σ_j q_j d^{n−1−j}`: site 0 is the most significant digit.
//! Operators are applied digit-wise, never as full matrices.

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;
use crate::tableau::StabilizerGroup;
use crate::weyl::WeylOperator;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

/// Largest supported number of amplitudes.
pub const MAX_AMPLITUDES: usize = 1 << 22;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    d: u32,
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldFamily {
    Z,
    X,
}

fn dim_of(d: u32, n: usize) -> Result<usize> {
    if !(d >= 2 && d.is_power_of_two()) {
        return Err(Error::InvalidParameter(format!("dense states need d a power of two, got {d}")));
    }
    let bits = d.trailing_zeros() as usize * n;
    if bits > 22 {
        return Err(Error::TooLarge(format!("{d}^{n} amplitudes exceed {MAX_AMPLITUDES}")));
    }
    Ok(1usize << bits)
}

/// Digit layout of a register for a power-of-two `d`.
struct Layout {
    bits: u32,
    mask: usize,
    n: usize,
}

impl Layout {
    fn new(d: u32, n: usize) -> Self {
        Layout { bits: d.trailing_zeros(), mask: d as usize - 1, n }
    }

    #[inline]
    fn shift(&self, site: usize) -> u32 {
        self.bits * (self.n - 1 - site) as u32
    }

    #[inline]
    fn digit(&self, idx: usize, site: usize) -> usize {
        (idx >> self.shift(site)) & self.mask
    }
}

/// Precomputed action `O|q⟩ = phase(q) |target(q)⟩` of a Weyl operator.
struct Action {
    sites: Vec<(u32, usize, usize)>, // (shift, x, z)
    mask: usize,
    global: Complex64,
    omega: Vec<Complex64>,
    d: usize,
}

impl Action {
    fn new(op: &WeylOperator) -> Self {
        let d = op.d();
        let lay = Layout::new(d, op.n());
        let sites = op
            .support()
            .into_iter()
            .map(|j| (lay.shift(j), op.x_exps()[j] as usize, op.z_exps()[j] as usize))
            .collect();
        let omega = (0..d).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64)).collect();
        let global = Complex64::from_polar(1.0, std::f64::consts::PI * op.phase_exp() as f64 / d as f64);
        Action { sites, mask: lay.mask, global, omega, d: d as usize }
    }

    #[inline]
    fn apply(&self, idx: usize) -> (usize, Complex64) {
        let mut target = idx;
        let mut k = 0usize;
        for &(shift, x, z) in &self.sites {
            let q = (idx >> shift) & self.mask;
            k += z * q;
            let nq = (q + x) & self.mask;
            target = (target & !(self.mask << shift)) | (nq << shift);
        }
        (target, self.global * self.omega[k % self.d])
    }
}

impl DenseState {
    pub fn basis(d: u32, n: usize, digits: &[usize]) -> Result<Self> {
        let dim = dim_of(d, n)?;
        if digits.len() != n || digits.iter().any(|&q| q >= d as usize) {
            return Err(Error::InvalidParameter(format!("basis label {digits:?} invalid for d={d}, n={n}")));
        }
        let lay = Layout::new(d, n);
        let idx = digits.iter().enumerate().fold(0usize, |acc, (j, &q)| acc | (q << lay.shift(j)));
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(DenseState { d, n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(d: u32, n: usize, amps: Vec<Complex64>) -> Result<Self> {
        let dim = dim_of(d, n)?;
        if amps.len() != dim {
            return Err(Error::InvalidParameter(format!("expected {dim} amplitudes, got {}", amps.len())));
        }
        let mut s = DenseState { d, n, amps };
        s.normalize(1e-14)?;
        Ok(s)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn normalize(&mut self, floor: f64) -> Result<()> {
        let nrm = self.norm();
        if nrm < floor {
            return Err(Error::InvalidParameter(format!("state norm {nrm:e} below {floor:e}")));
        }
        let inv = 1.0 / nrm;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn check(&self, op: &WeylOperator) -> Result<()> {
        if op.d() != self.d {
            return Err(Error::DimensionMismatch(op.d(), self.d));
        }
        if op.n() != self.n {
            return Err(Error::RegisterMismatch(op.n(), self.n));
        }
        Ok(())
    }

    fn apply_raw(&self, op: &WeylOperator) -> Vec<Complex64> {
        let act = Action::new(op);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            if a.re != 0.0 || a.im != 0.0 {
                let (t, ph) = act.apply(idx);
                out[t] = ph * a;
            }
        }
        out
    }

    /// `O|ψ⟩` (unitary, so the norm is unchanged).
    pub fn apply(&self, op: &WeylOperator) -> Result<DenseState> {
        self.check(op)?;
        Ok(DenseState { d: self.d, n: self.n, amps: self.apply_raw(op) })
    }

    pub fn apply_pauli(&self, op: &PauliOperator) -> Result<DenseState> {
        self.apply(&WeylOperator::from_pauli(op))
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &WeylOperator) -> Result<Complex64> {
        self.check(op)?;
        let act = Action::new(op);
        let term = |(idx, a): (usize, &Complex64)| {
            let (t, ph) = act.apply(idx);
            self.amps[t].conj() * ph * a
        };
        Ok(if self.amps.len() >= PAR_THRESHOLD {
            self.amps.par_iter().enumerate().map(term).sum()
        } else {
            self.amps.iter().enumerate().map(term).sum()
        })
    }

    pub fn expectation_pauli(&self, op: &PauliOperator) -> Result<Complex64> {
        self.expectation(&WeylOperator::from_pauli(op))
    }

    /// Applies `(1/d) Σ_m g^m` for each generator and renormalizes.
    fn projected(&self, group: &StabilizerGroup) -> Result<DenseState> {
        if group.d() != self.d || group.n() != self.n {
            return Err(Error::RegisterMismatch(group.n(), self.n));
        }
        let mut amps = self.amps.clone();
        for g in group.canonical_rows() {
            let mut acc = amps.clone();
            let mut term = DenseState { d: self.d, n: self.n, amps };
            for _ in 1..self.d {
                term.amps = term.apply_raw(&g);
                acc.iter_mut().zip(&term.amps).for_each(|(a, t)| *a += t);
            }
            let scale = 1.0 / self.d as f64;
            acc.iter_mut().for_each(|a| *a *= scale);
            amps = acc;
        }
        Ok(DenseState { d: self.d, n: self.n, amps })
    }

    pub fn project(&self, group: &StabilizerGroup) -> Result<DenseState> {
        let mut s = self.projected(group)?;
        s.normalize(1e-10)?;
        Ok(s)
    }

    /// `⟨ψ|Π|ψ⟩` for the projector `Π` onto the joint +1 space of `group`.
    pub fn projected_weight(&self, group: &StabilizerGroup) -> Result<f64> {
        let n = self.projected(group)?.norm();
        Ok(n * n)
    }

    /// The unique state stabilized by `group` (generators plus sector fixers).
    ///
    /// Seeds from `|0…0⟩` and falls back to random basis states if the
    /// projector annihilates the seed.
    pub fn from_group(group: &StabilizerGroup, rng: &mut impl Rng) -> Result<DenseState> {
        if group.ground_space_log_dim() != 0 {
            return Err(Error::NotDefinite(format!(
                "group leaves a 2^{} dimensional space; fix the sector first",
                group.ground_space_log_dim()
            )));
        }
        let (d, n) = (group.d(), group.n());
        dim_of(d, n)?;
        let mut seed = vec![0usize; n];
        for _ in 0..64 {
            if let Ok(s) = DenseState::basis(d, n, &seed)?.project(group) {
                return Ok(s);
            }
            seed = (0..n).map(|_| rng.gen_range(0..d as usize)).collect();
        }
        Err(Error::InvalidParameter("projector annihilated every seed state".into()))
    }

    /// `e^{θ Σ_s P_s}|ψ⟩` renormalized, with `P = Z` or `X` on each listed site.
    ///
    /// For `d > 2` the Hermitian part `(P + P†)/2` is used; only the Z family
    /// is supported there.
    pub fn deform(&self, family: FieldFamily, theta: f64, sites: &[usize]) -> Result<DenseState> {
        if let Some(&s) = sites.iter().find(|&&s| s >= self.n) {
            return Err(Error::SiteOutOfRange { site: s, n: self.n });
        }
        let lay = Layout::new(self.d, self.n);
        let mut amps = self.amps.clone();
        match family {
            FieldFamily::Z => {
                let weights: Vec<f64> = (0..self.d)
                    .map(|q| (theta * (2.0 * std::f64::consts::PI * q as f64 / self.d as f64).cos()).exp())
                    .collect();
                for &s in sites {
                    for (idx, a) in amps.iter_mut().enumerate() {
                        *a *= weights[lay.digit(idx, s)];
                    }
                }
            }
            FieldFamily::X => {
                if self.d != 2 {
                    return Err(Error::InvalidParameter("X-field deformation is only defined for qubits".into()));
                }
                let (c, sh) = (theta.cosh(), theta.sinh());
                for &s in sites {
                    let bit = 1usize << lay.shift(s);
                    for idx in 0..amps.len() {
                        if idx & bit == 0 {
                            let (a0, a1) = (amps[idx], amps[idx | bit]);
                            amps[idx] = a0 * c + a1 * sh;
                            amps[idx | bit] = a1 * c + a0 * sh;
                        }
                    }
                }
            }
        }
        let mut s = DenseState { d: self.d, n: self.n, amps };
        s.normalize(1e-14)?;
        Ok(s)
    }

    /// Binary dump: `TGDS`, d and n as u32 little-endian, then (re, im) f64 pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 16 * self.amps.len());
        out.extend_from_slice(b"TGDS");
        out.extend_from_slice(&self.d.to_le_bytes());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<DenseState> {
        let bad = || Error::Parse("malformed dense state dump".into());
        if bytes.len() < 12 || &bytes[..4] != b"TGDS" {
            return Err(bad());
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
        let (d, n) = (word(4), word(8) as usize);
        let dim = dim_of(d, n)?;
        if bytes.len() != 12 + 16 * dim {
            return Err(bad());
        }
        let f = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let amps = (0..dim).map(|k| Complex64::new(f(12 + 16 * k), f(20 + 16 * k))).collect();
        Ok(DenseState { d, n, amps })
    }
}
