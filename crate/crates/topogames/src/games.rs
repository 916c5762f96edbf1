//! Nonlocal games: classical optima by exhaustive search and evaluation of
//! quantum strategies on stabilizer (exact) or dense (floating) resources.

use crate::complex::CellComplex;
use crate::dense::DenseState;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, SpanBasis};
use crate::strategies::{validate, CompositeOperatorSet, MagicSquareOps, SquarePlayer};
use crate::tableau::{Expectation, RootOfUnity, StabilizerGroup};
use crate::weyl::WeylOperator;
use num_complex::Complex;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::sync::Arc;

pub type Rational = Ratio<u64>;

/// Inputs are enumerated when there are at most this many, sampled otherwise.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 20;

fn ratio_str<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EvalOptions {
    pub seed: u64,
    /// Sample count when the input set exceeds [`EXHAUSTIVE_LIMIT`].
    pub samples: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { seed: 0, samples: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputRecord {
    pub input: String,
    /// Expectation of the collective operator, as text.
    pub value: String,
    pub win: f64,
    #[serde(serialize_with = "ratio_str")]
    pub win_exact: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyEvaluation {
    pub per_input: Vec<InputRecord>,
    pub p_q: f64,
    #[serde(serialize_with = "ratio_str")]
    pub p_q_exact: Option<Rational>,
    /// `⟨M₃⟩` for three players.
    pub mermin: Option<f64>,
    pub inputs_total: u64,
    /// `(seed, samples)` when inputs were sampled.
    pub sampled: Option<(u64, u64)>,
}

/// Expectation of a ±1-valued observable: exact sign when known.
#[derive(Clone, Copy, Debug)]
struct Outcome {
    value: f64,
    sign: Option<i8>,
}

fn tableau_outcome(group: &StabilizerGroup, op: &WeylOperator) -> Result<(Outcome, String)> {
    let e = group.expectation(op)?;
    let out = match e {
        Expectation::Definite(r) => match r.sign() {
            Some(s) => Outcome { value: s as f64, sign: Some(s) },
            None => Outcome { value: r.to_complex().re, sign: None },
        },
        Expectation::Zero | Expectation::Logical => Outcome { value: 0.0, sign: Some(0) },
    };
    Ok((out, e.to_string()))
}

fn dense_outcome(state: &DenseState, op: &WeylOperator) -> Result<(Outcome, String)> {
    let v = state.expectation(op)?;
    Ok((Outcome { value: v.re, sign: None }, format!("{:.12}", v.re)))
}

/// `(1 + t·⟨O⟩)/2` for target sign `t`; `sign = Some(0)` marks an unbiased outcome.
fn win_of(target: i8, o: Outcome) -> (f64, Option<Rational>) {
    let win = 0.5 * (1.0 + target as f64 * o.value);
    let exact = o.sign.map(|s| match s * target {
        1 => Rational::from_integer(1),
        -1 => Rational::from_integer(0),
        _ => Rational::new(1, 2),
    });
    (win, exact)
}

fn choose_inputs(total: u64, opts: &EvalOptions) -> (Vec<u64>, Option<(u64, u64)>) {
    if total <= EXHAUSTIVE_LIMIT {
        ((0..total).collect(), None)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        ((0..opts.samples).map(|_| rng.gen_range(0..total)).collect(), Some((opts.seed, opts.samples)))
    }
}

fn summarize(per_input: Vec<InputRecord>, total: u64, sampled: Option<(u64, u64)>, mermin: Option<f64>) -> StrategyEvaluation {
    let m = per_input.len() as u64;
    let p_q = per_input.iter().map(|r| r.win).sum::<f64>() / m.max(1) as f64;
    let p_q_exact = per_input
        .iter()
        .map(|r| r.win_exact)
        .try_fold(Rational::from_integer(0), |acc, w| w.map(|w| acc + w))
        .map(|s| s / Rational::from_integer(m.max(1)));
    StrategyEvaluation { per_input, p_q, p_q_exact, mermin, inputs_total: total, sampled }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// `P` players receive bits with even total; they win when their output bits
/// sum to half the input weight, mod 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ParityGame {
    players: usize,
}

impl ParityGame {
    pub fn new(players: usize) -> Result<Self> {
        if !(2..=63).contains(&players) {
            return Err(Error::InvalidParameter(format!("parity game needs 2 to 63 players, got {players}")));
        }
        Ok(ParityGame { players })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn num_inputs(&self) -> u64 {
        1 << (self.players - 1)
    }

    /// Input `k`: the low `P−1` bits of `k`, then the parity bit.
    pub fn input(&self, k: u64) -> Vec<bool> {
        let mut x: Vec<bool> = (0..self.players - 1).map(|i| (k >> i) & 1 == 1).collect();
        x.push(k.count_ones() % 2 == 1);
        x
    }

    /// `+1` when `|x|/2` is even.
    pub fn target_sign(x: &[bool]) -> i8 {
        if (x.iter().filter(|&&b| b).count() / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn wins(&self, x: &[bool], y: &[bool]) -> bool {
        let half = x.iter().filter(|&&b| b).count() / 2;
        y.iter().filter(|&&b| b).count() % 2 == half % 2
    }
}

/// Deterministic strategy `y_i = c_i ⊕ d_i x_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityStrategy {
    pub constant: Vec<bool>,
    pub linear: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalParityOptimum {
    #[serde(serialize_with = "ratio_str_plain")]
    pub probability: Rational,
    pub witness: ParityStrategy,
}

fn ratio_str_plain<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Largest player count for the exhaustive classical search.
pub const MAX_CLASSICAL_PLAYERS: usize = 10;

/// Best deterministic strategy by exhaustive search over all `4^P` strategies.
pub fn classical_optimum_parity(players: usize) -> Result<ClassicalParityOptimum> {
    let game = ParityGame::new(players)?;
    if players > MAX_CLASSICAL_PLAYERS {
        return Err(Error::TooLarge(format!("exhaustive search is limited to {MAX_CLASSICAL_PLAYERS} players")));
    }
    let p = players as u32;
    let inputs: Vec<(u32, u32)> = (0..game.num_inputs())
        .map(|k| {
            let x = game.input(k);
            let mask = x.iter().enumerate().fold(0u32, |m, (i, &b)| m | (u32::from(b) << i));
            (mask, (mask.count_ones() / 2) % 2)
        })
        .collect();
    let (best, idx) = (0..1u64 << (2 * p))
        .into_par_iter()
        .map(|s| {
            let (c, d) = ((s & ((1 << p) - 1)) as u32, (s >> p) as u32);
            let cp = c.count_ones() % 2;
            let won = inputs.iter().filter(|&&(x, t)| (cp ^ ((d & x).count_ones() % 2)) == t).count() as u64;
            // larger count wins; ties go to the smaller index
            (won, u64::MAX - s)
        })
        .max()
        .map(|(w, s)| (w, u64::MAX - s))
        .expect("nonempty");
    let bits = |m: u64| (0..players).map(|i| (m >> i) & 1 == 1).collect();
    Ok(ClassicalParityOptimum {
        probability: Rational::new(best, game.num_inputs()),
        witness: ParityStrategy { constant: bits(idx & ((1 << p) - 1)), linear: bits(idx >> p) },
    })
}

/// `1/2 + 1/2^{⌈P/2⌉}`.
pub fn classical_parity_bound(players: usize) -> Rational {
    Rational::new(1, 2) + Rational::new(1, 1 << players.div_ceil(2))
}

fn parity_eval_with(
    ops: &CompositeOperatorSet,
    opts: &EvalOptions,
    outcome: &(dyn Fn(&WeylOperator) -> Result<(Outcome, String)> + Sync),
) -> Result<StrategyEvaluation> {
    let report = validate(ops);
    if !report.pattern_ok || !report.y_hermitian.iter().all(|&h| h) {
        return Err(Error::InvalidComposite(format!("operator set {} fails validation", ops.name())));
    }
    let game = ParityGame::new(ops.players())?;
    let total = game.num_inputs();
    let (ks, sampled) = choose_inputs(total, opts);
    let records = ks
        .par_iter()
        .map(|&k| {
            let x = game.input(k);
            let mut op = WeylOperator::identity(ops.d(), ops.n());
            for (i, &xi) in x.iter().enumerate() {
                // X_i on 0, Y_i on 1
                op = op.multiply(&ops.player_operator(i, true, xi)?)?;
            }
            let (o, value) = outcome(&op)?;
            let (win, win_exact) = win_of(ParityGame::target_sign(&x), o);
            Ok((InputRecord { input: bit_string(&x), value, win, win_exact }, o.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let mermin = (ops.players() == 3 && sampled.is_none()).then(|| {
        records
            .iter()
            .map(|(r, v)| if r.input == "000" { *v } else { -*v })
            .sum::<f64>()
    });
    let per_input = records.into_iter().map(|(r, _)| r).collect();
    Ok(summarize(per_input, total, sampled, mermin))
}

/// Players measure `X_i` on input 0 and `Y_i` on input 1 and output the
/// eigenvalue bit; scored exactly with the resource group of `ops`.
pub fn quantum_parity_eval(ops: &CompositeOperatorSet, opts: &EvalOptions) -> Result<StrategyEvaluation> {
    let group = ops.resource();
    parity_eval_with(ops, opts, &|op| tableau_outcome(group, op))
}

pub fn quantum_parity_eval_dense(
    ops: &CompositeOperatorSet,
    state: &DenseState,
    opts: &EvalOptions,
) -> Result<StrategyEvaluation> {
    if state.n() != ops.n() || state.d() != ops.d() {
        return Err(Error::RegisterMismatch(state.n(), ops.n()));
    }
    parity_eval_with(ops, opts, &|op| dense_outcome(state, op))
}

/// `p_q = ½(1 + ⟨M₃⟩/4)`.
pub fn mermin_win_probability(mermin: f64) -> f64 {
    0.5 * (1.0 + mermin / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub p_q: f64,
    pub mermin: Option<f64>,
}

/// Parity-game performance of `ops` on `state` deformed by a uniform field
/// on every site, for each `theta`.
pub fn parity_deformation_sweep(
    ops: &CompositeOperatorSet,
    state: &DenseState,
    family: crate::dense::FieldFamily,
    thetas: &[f64],
) -> Result<Vec<SweepPoint>> {
    let sites: Vec<usize> = (0..state.n()).collect();
    thetas
        .iter()
        .map(|&theta| {
            let s = state.deform(family, theta, &sites)?;
            let ev = quantum_parity_eval_dense(ops, &s, &EvalOptions::default())?;
            Ok(SweepPoint { theta, p_q: ev.p_q, mermin: ev.mermin })
        })
        .collect()
}

/// Game on a cell complex: one player per `p`-cell. Input bits pick boundaries
/// of `(p+1)`-cells in `x_basis` and coboundaries of `(p−1)`-cells in
/// `z_basis`; player `c` receives `a_c` (does `c` lie on an odd number of
/// chosen boundaries) and `b_c` (likewise for coboundaries).
#[derive(Clone, Debug)]
pub struct CellulationGame {
    pub complex: Arc<CellComplex>,
    pub p: usize,
    pub x_basis: Vec<usize>,
    pub z_basis: Vec<usize>,
    /// Basis elements are allowed to be linearly dependent.
    pub overcomplete: bool,
    /// Only inputs with `a_c = 1` for every player.
    pub a_all_ones: bool,
}

impl CellulationGame {
    /// Greedy independent bases in cell order.
    pub fn new(complex: Arc<CellComplex>, p: usize) -> Result<Self> {
        check_degree(&complex, p)?;
        let n = complex.num_cells(p);
        let pick = |cells: usize, support: &dyn Fn(usize) -> Vec<usize>| {
            let mut span = SpanBasis::new(n);
            (0..cells).filter(|&i| span.insert(&BitVec::from_indices(n, support(i)))).collect::<Vec<_>>()
        };
        let x_basis = pick(complex.num_cells(p + 1), &|f| complex.boundary_of(p + 1, f).to_vec());
        let z_basis = pick(complex.num_cells(p - 1), &|v| complex.coboundary_of(p - 1, v).to_vec());
        Ok(CellulationGame { complex, p, x_basis, z_basis, overcomplete: false, a_all_ones: false })
    }

    pub fn with_basis(
        complex: Arc<CellComplex>,
        p: usize,
        x_basis: Vec<usize>,
        z_basis: Vec<usize>,
        overcomplete: bool,
    ) -> Result<Self> {
        check_degree(&complex, p)?;
        let n = complex.num_cells(p);
        let check = |cells: &[usize], count: usize, support: &dyn Fn(usize) -> Vec<usize>| -> Result<()> {
            let mut span = SpanBasis::new(n);
            for &c in cells {
                if c >= count {
                    return Err(Error::InvalidParameter(format!("basis cell {c} out of range")));
                }
                if !span.insert(&BitVec::from_indices(n, support(c))) && !overcomplete {
                    return Err(Error::InvalidParameter(format!("basis element {c} is dependent")));
                }
            }
            Ok(())
        };
        check(&x_basis, complex.num_cells(p + 1), &|f| complex.boundary_of(p + 1, f).to_vec())?;
        check(&z_basis, complex.num_cells(p - 1), &|v| complex.coboundary_of(p - 1, v).to_vec())?;
        Ok(CellulationGame { complex, p, x_basis, z_basis, overcomplete, a_all_ones: false })
    }

    pub fn restrict_a_to_ones(mut self) -> Self {
        self.a_all_ones = true;
        self
    }

    pub fn players(&self) -> usize {
        self.complex.num_cells(self.p)
    }

    pub fn input_bits(&self) -> usize {
        self.x_basis.len() + self.z_basis.len()
    }

    /// `(a, b)` for input `k` (x-basis bits low, then z-basis bits).
    pub fn bits(&self, k: u64) -> (Vec<bool>, Vec<bool>) {
        let n = self.players();
        let mut a = vec![false; n];
        let mut b = vec![false; n];
        for (j, &f) in self.x_basis.iter().enumerate() {
            if (k >> j) & 1 == 1 {
                for &c in self.complex.boundary_of(self.p + 1, f) {
                    a[c] ^= true;
                }
            }
        }
        let off = self.x_basis.len();
        for (j, &v) in self.z_basis.iter().enumerate() {
            if (k >> (off + j)) & 1 == 1 {
                for &c in self.complex.coboundary_of(self.p - 1, v) {
                    b[c] ^= true;
                }
            }
        }
        (a, b)
    }

    fn inputs(&self, opts: &EvalOptions) -> Result<(Vec<u64>, u64, Option<(u64, u64)>)> {
        if self.input_bits() >= 63 {
            return Err(Error::TooLarge(format!("{} input bits", self.input_bits())));
        }
        let total = 1u64 << self.input_bits();
        if !self.a_all_ones {
            let (ks, sampled) = choose_inputs(total, opts);
            return Ok((ks, total, sampled));
        }
        if total > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge("restricted inputs need exhaustive enumeration".into()));
        }
        let ks: Vec<u64> = (0..total).filter(|&k| self.bits(k).0.iter().all(|&a| a)).collect();
        if ks.is_empty() {
            return Err(Error::InvalidParameter("no input gives a_c = 1 for every player".into()));
        }
        let n = ks.len() as u64;
        Ok((ks, n, None))
    }
}

fn check_degree(complex: &CellComplex, p: usize) -> Result<()> {
    if p == 0 || p >= complex.top() {
        return Err(Error::InvalidParameter(format!("degree {p} must lie strictly inside the complex")));
    }
    Ok(())
}

fn cellulation_eval_with(
    game: &CellulationGame,
    ops: &CompositeOperatorSet,
    opts: &EvalOptions,
    outcome: &(dyn Fn(&WeylOperator) -> Result<(Outcome, String)> + Sync),
) -> Result<StrategyEvaluation> {
    if ops.players() != game.players() {
        return Err(Error::InvalidComposite(format!("{} pairs for {} players", ops.players(), game.players())));
    }
    let report = validate(ops);
    if !report.pattern_ok {
        return Err(Error::InvalidComposite(format!("operator set {} fails validation", ops.name())));
    }
    let (ks, total, sampled) = game.inputs(opts)?;
    let per_input = ks
        .par_iter()
        .map(|&k| {
            let (a, b) = game.bits(k);
            let ab = a.iter().zip(&b).filter(|(&a, &b)| a && b).count();
            if ab % 2 != 0 {
                return Err(Error::InvalidComposite(format!("input {k} has odd Σ a_c b_c")));
            }
            let mut op = WeylOperator::identity(ops.d(), ops.n());
            for c in 0..game.players() {
                op = op.multiply(&ops.player_operator(c, a[c], b[c])?)?;
            }
            let target = if (ab / 2) % 2 == 0 { 1 } else { -1 };
            let (o, value) = outcome(&op)?;
            let (win, win_exact) = win_of(target, o);
            let label = format!("{}|{}", bit_string(&a), bit_string(&b));
            Ok(InputRecord { input: label, value, win, win_exact })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_input, total, sampled, None))
}

/// Player `c` measures `P_c = i^{ab} X_c^a Z_c^b` and outputs its eigenvalue
/// bit; the players win when the outputs sum to `½ Σ a_c b_c` mod 2.
pub fn cellulation_game_eval(
    game: &CellulationGame,
    ops: &CompositeOperatorSet,
    opts: &EvalOptions,
) -> Result<StrategyEvaluation> {
    let group = ops.resource();
    cellulation_eval_with(game, ops, opts, &|op| tableau_outcome(group, op))
}

pub fn cellulation_game_eval_dense(
    game: &CellulationGame,
    ops: &CompositeOperatorSet,
    state: &DenseState,
    opts: &EvalOptions,
) -> Result<StrategyEvaluation> {
    if state.n() != ops.n() || state.d() != ops.d() {
        return Err(Error::RegisterMismatch(state.n(), ops.n()));
    }
    cellulation_eval_with(game, ops, opts, &|op| dense_outcome(state, op))
}

/// Group generated by the game's basis: the boundaries and coboundaries the
/// players collectively measure, built from the composite operators.
pub fn cellulation_measured_group(game: &CellulationGame, ops: &CompositeOperatorSet) -> Result<StabilizerGroup> {
    let mut gens = Vec::new();
    for &f in &game.x_basis {
        let op = game.complex.boundary_of(game.p + 1, f).iter().try_fold(
            WeylOperator::identity(ops.d(), ops.n()),
            |acc, &c| acc.multiply(ops.x(c)),
        )?;
        gens.push(op);
    }
    for &v in &game.z_basis {
        let op = game.complex.coboundary_of(game.p - 1, v).iter().try_fold(
            WeylOperator::identity(ops.d(), ops.n()),
            |acc, &c| acc.multiply(ops.z(c)),
        )?;
        gens.push(op);
    }
    StabilizerGroup::new(ops.d(), ops.n(), gens)
}

/// Players fill a 3×3 grid with entries in `Z_d`: rows sum to 0, columns to
/// `d/2`, and the shared square must agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MagicSquareGame {
    d: u32,
}

impl MagicSquareGame {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 || d % 2 != 0 {
            return Err(Error::InvalidParameter(format!("magic square needs an even d, got {d}")));
        }
        Ok(MagicSquareGame { d })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Triples summing to `total` mod d.
    pub fn triples(&self, total: u32) -> Vec<[u32; 3]> {
        let d = self.d;
        let mut out = Vec::with_capacity((d * d) as usize);
        for a in 0..d {
            for b in 0..d {
                out.push([a, b, (2 * d * d + total - a - b) % d]);
            }
        }
        out
    }

    pub fn rows(&self) -> Vec<[u32; 3]> {
        self.triples(0)
    }

    pub fn columns(&self) -> Vec<[u32; 3]> {
        self.triples(self.d / 2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassicalSquareOptimum {
    #[serde(serialize_with = "ratio_str_plain")]
    pub probability: Rational,
    /// Row filled by A on each row input.
    pub alice: [[u32; 3]; 3],
    /// Column filled by B on each column input.
    pub bob: [[u32; 3]; 3],
}

/// Largest `d` for the exhaustive classical search.
pub const MAX_SQUARE_D: u32 = 4;

/// Best deterministic strategy pair over all `(d²)³ × (d²)³` tables.
pub fn classical_optimum_magic_square(d: u32) -> Result<ClassicalSquareOptimum> {
    let game = MagicSquareGame::new(d)?;
    if d > MAX_SQUARE_D {
        return Err(Error::TooLarge(format!("exhaustive search is limited to d ≤ {MAX_SQUARE_D}")));
    }
    let rows = game.rows();
    let cols = game.columns();
    let m = rows.len();
    let tables = (m * m * m) as u64;
    let unpack = |t: u64, set: &[[u32; 3]]| -> [[u32; 3]; 3] {
        let t = t as usize;
        [set[t % m], set[(t / m) % m], set[t / (m * m)]]
    };
    let (wins, ia, ib) = (0..tables)
        .into_par_iter()
        .map(|ia| {
            let a = unpack(ia, &rows);
            let mut best = (0u64, 0u64);
            for ib in 0..tables {
                let b = unpack(ib, &cols);
                let mut w = 0u64;
                for r in 0..3 {
                    for c in 0..3 {
                        w += u64::from(a[r][c] == b[c][r]);
                    }
                }
                if w > best.0 {
                    best = (w, ib);
                }
            }
            (best.0, u64::MAX - ia, best.1)
        })
        .max()
        .map(|(w, ia, ib)| (w, u64::MAX - ia, ib))
        .expect("nonempty");
    Ok(ClassicalSquareOptimum {
        probability: Rational::new(wins, 9),
        alice: unpack(ia, &rows),
        bob: unpack(ib, &cols),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub label: String,
    pub expected: RootOfUnity,
    pub observed: Expectation,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagicSquareEvaluation {
    pub identities: Vec<IdentityCheck>,
    pub cross: Vec<IdentityCheck>,
    /// Entries in each row and column commute, for both players.
    pub commuting: bool,
    pub per_input: Vec<InputRecord>,
    pub p_q: f64,
    #[serde(serialize_with = "ratio_str")]
    pub p_q_exact: Option<Rational>,
}

impl MagicSquareEvaluation {
    pub fn all_hold(&self) -> bool {
        self.commuting && self.identities.iter().chain(&self.cross).all(|c| c.ok)
    }
}

fn check(group: &StabilizerGroup, label: String, op: &WeylOperator, expected: RootOfUnity) -> Result<IdentityCheck> {
    let observed = group.expectation(op)?;
    let ok = observed == Expectation::Definite(expected.normalized());
    Ok(IdentityCheck { label, expected, observed, ok })
}

/// Checks the row (+1) and column (−1) identities of both players' operator
/// squares, the cross constraints `U_k Ũ_k†` on each copy, and scores each of
/// the nine inputs by the probability that the shared square agrees.
pub fn magic_square_eval(ops: &MagicSquareOps, resource: &StabilizerGroup) -> Result<MagicSquareEvaluation> {
    let d = resource.d();
    if ops.x[0].d() != d || ops.x[0].n() != resource.n() {
        return Err(Error::RegisterMismatch(ops.x[0].n(), resource.n()));
    }
    MagicSquareGame::new(d)?;
    let minus = RootOfUnity::new(1, 2);
    let mut identities = Vec::new();
    let mut commuting = true;
    for (player, tag) in [(SquarePlayer::A, "A"), (SquarePlayer::B, "B")] {
        let e = |r: usize, c: usize| ops.entry(player, r, c);
        for r in 0..3 {
            let prod = e(r, 0).multiply(&e(r, 1))?.multiply(&e(r, 2))?;
            identities.push(check(resource, format!("{tag} row {r}"), &prod, RootOfUnity::one())?);
        }
        for c in 0..3 {
            let prod = e(0, c).multiply(&e(1, c))?.multiply(&e(2, c))?;
            identities.push(check(resource, format!("{tag} column {c}"), &prod, minus)?);
        }
        for i in 0..3 {
            for j in 0..3 {
                for k in j + 1..3 {
                    commuting &= e(i, j).commutes(&e(i, k))? && e(j, i).commutes(&e(k, i))?;
                }
            }
        }
    }
    let mut cross = Vec::new();
    for copy in 0..2 {
        for (k, want) in [(1, RootOfUnity::one()), (2, RootOfUnity::one()), (3, minus)] {
            let op = ops.unitary(SquarePlayer::A, copy, k).multiply(&ops.unitary(SquarePlayer::B, copy, k).dagger())?;
            cross.push(check(resource, format!("copy {copy} U{k} U{k}~†"), &op, want)?);
        }
    }
    let mut per_input = Vec::with_capacity(9);
    for r in 0..3 {
        for c in 0..3 {
            let v = ops.entry(SquarePlayer::A, r, c).multiply(&ops.entry(SquarePlayer::B, r, c).dagger())?;
            // P(agree) = (1/d) Σ_m ⟨V^m⟩
            let mut exact: Option<Complex<i64>> = Some(Complex::new(0, 0));
            let mut approx = Complex::new(0.0, 0.0);
            for m in 0..d {
                match resource.expectation(&v.power(m as i64))? {
                    Expectation::Definite(phi) => {
                        approx += phi.to_complex();
                        let phi = phi.normalized();
                        exact = exact.and_then(|s| {
                            (4 % phi.order == 0).then(|| s + Complex::<i64>::i().powu(phi.k * (4 / phi.order)))
                        });
                    }
                    Expectation::Zero => {}
                    Expectation::Logical => {
                        return Err(Error::NotDefinite(format!("square ({r}, {c}) is not fixed by the resource")));
                    }
                }
            }
            let win = approx.re / d as f64;
            let win_exact = exact.filter(|s| s.im == 0 && s.re >= 0).map(|s| Rational::new(s.re as u64, d as u64));
            let value = match win_exact {
                Some(w) => format!("{}/{}", w.numer(), w.denom()),
                None => format!("{win:.12}"),
            };
            per_input.push(InputRecord { input: format!("{r}{c}"), value, win, win_exact });
        }
    }
    let summary = summarize(per_input, 9, None, None);
    Ok(MagicSquareEvaluation {
        identities,
        cross,
        commuting,
        per_input: summary.per_input,
        p_q: summary.p_q,
        p_q_exact: summary.p_q_exact,
    })
}
