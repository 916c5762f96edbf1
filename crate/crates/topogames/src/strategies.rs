//! Composite operator sets that realize perfect strategies.
//!
//! Player `i` holds a pair `(X_i, Z_i)` of ordered site-factor sequences.
//! Constraints record which products of `X`s (or of `Z`s) lie in the resource
//! group and with which phase. `Y_i = i X_i Z_i` applies the `Z` segment first.

use crate::codes::{ds_string, Anyon, CodeInstance, CodeKind, LatticePath, PathLattice, Step};
use crate::complex::{build_box, build_torus, CellComplex, LatticeCell, PlaneGraph, Topology};
use crate::error::{Error, Result};
use crate::tableau::{Expectation, RootOfUnity, StabilizerGroup};
use crate::weyl::{ordered_product, QuditFactor, WeylOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositePair {
    pub x: Vec<QuditFactor>,
    pub z: Vec<QuditFactor>,
}

impl CompositePair {
    /// `X` on `xs` and `Z` on `zs`, one factor per site.
    pub fn from_sites(xs: &[usize], zs: &[usize]) -> Self {
        CompositePair {
            x: xs.iter().map(|&s| QuditFactor::x(s, 1)).collect(),
            z: zs.iter().map(|&s| QuditFactor::z(s, 1)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub players: Vec<usize>,
    pub expected: RootOfUnity,
}

impl Constraint {
    pub fn x(players: Vec<usize>) -> Self {
        Constraint { kind: ConstraintKind::X, players, expected: RootOfUnity::one() }
    }

    pub fn z(players: Vec<usize>) -> Self {
        Constraint { kind: ConstraintKind::Z, players, expected: RootOfUnity::one() }
    }
}

#[derive(Clone, Debug)]
pub struct CompositeOperatorSet {
    name: String,
    pairs: Vec<CompositePair>,
    constraints: Vec<Constraint>,
    resource: StabilizerGroup,
    xs: Vec<WeylOperator>,
    zs: Vec<WeylOperator>,
}

impl CompositeOperatorSet {
    pub fn new(
        name: impl Into<String>,
        resource: StabilizerGroup,
        pairs: Vec<CompositePair>,
        constraints: Vec<Constraint>,
    ) -> Result<Self> {
        let (d, n) = (resource.d(), resource.n());
        let xs = pairs.iter().map(|p| ordered_product(d, n, &p.x)).collect::<Result<Vec<_>>>()?;
        let zs = pairs.iter().map(|p| ordered_product(d, n, &p.z)).collect::<Result<Vec<_>>>()?;
        for c in &constraints {
            if c.players.is_empty() {
                return Err(Error::InvalidComposite("empty constraint".into()));
            }
            if let Some(&i) = c.players.iter().find(|&&i| i >= pairs.len()) {
                return Err(Error::InvalidComposite(format!("constraint names player {i} of {}", pairs.len())));
            }
        }
        Ok(CompositeOperatorSet { name: name.into(), pairs, constraints, resource, xs, zs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> u32 {
        self.resource.d()
    }

    pub fn n(&self) -> usize {
        self.resource.n()
    }

    pub fn players(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[CompositePair] {
        &self.pairs
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn resource(&self) -> &StabilizerGroup {
        &self.resource
    }

    pub fn x(&self, i: usize) -> &WeylOperator {
        &self.xs[i]
    }

    pub fn z(&self, i: usize) -> &WeylOperator {
        &self.zs[i]
    }

    /// `Y_i = i X_i Z_i` (qubits only).
    pub fn y(&self, i: usize) -> Result<WeylOperator> {
        if self.d() != 2 {
            return Err(Error::InvalidParameter("Y_i is defined for qubit sets".into()));
        }
        let seq: Vec<QuditFactor> = self.pairs[i].z.iter().chain(&self.pairs[i].x).copied().collect();
        Ok(ordered_product(2, self.n(), &seq)?.times_w(1))
    }

    /// `i^{ab} X_i^a Z_i^b` for bits `a`, `b`.
    pub fn player_operator(&self, i: usize, a: bool, b: bool) -> Result<WeylOperator> {
        Ok(match (a, b) {
            (false, false) => WeylOperator::identity(self.d(), self.n()),
            (true, false) => self.xs[i].clone(),
            (false, true) => self.zs[i].clone(),
            (true, true) => self.y(i)?,
        })
    }

    pub fn constraint_operator(&self, c: &Constraint) -> WeylOperator {
        let ops = match c.kind {
            ConstraintKind::X => &self.xs,
            ConstraintKind::Z => &self.zs,
        };
        c.players
            .iter()
            .fold(WeylOperator::identity(self.d(), self.n()), |acc, &i| acc.multiply(&ops[i]).expect("same shape"))
    }

    /// The same operators evaluated against another resource group.
    pub fn with_resource(&self, resource: StabilizerGroup) -> Result<Self> {
        if resource.d() != self.d() {
            return Err(Error::DimensionMismatch(resource.d(), self.d()));
        }
        if resource.n() != self.n() {
            return Err(Error::RegisterMismatch(resource.n(), self.n()));
        }
        Ok(CompositeOperatorSet { resource, ..self.clone() })
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// JSON header with factor sequences and constraints, plus the resource in
    /// operator text form.
    pub fn to_json(&self) -> String {
        let file = SetFile {
            name: self.name.clone(),
            d: self.d(),
            n: self.n(),
            pairs: self
                .pairs
                .iter()
                .enumerate()
                .map(|(index, p)| PairText { index, x: factors_to_text(&p.x), z: factors_to_text(&p.z) })
                .collect(),
            constraints: self.constraints.clone(),
            resource: self.resource.to_text(),
        };
        serde_json::to_string_pretty(&file).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SetFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let resource = StabilizerGroup::from_text(&file.resource)?;
        if resource.d() != file.d || resource.n() != file.n {
            return Err(Error::Parse("resource header disagrees with the set header".into()));
        }
        let pairs = file
            .pairs
            .iter()
            .map(|p| Ok(CompositePair { x: factors_from_text(&p.x)?, z: factors_from_text(&p.z)? }))
            .collect::<Result<Vec<_>>>()?;
        CompositeOperatorSet::new(file.name, resource, pairs, file.constraints)
    }
}

#[derive(Serialize, Deserialize)]
struct PairText {
    index: usize,
    x: String,
    z: String,
}

#[derive(Serialize, Deserialize)]
struct SetFile {
    name: String,
    d: u32,
    n: usize,
    pairs: Vec<PairText>,
    constraints: Vec<Constraint>,
    resource: String,
}

/// Space-separated factors in application order, e.g. `X3 Z5^3 X1Z1`.
pub fn factors_to_text(seq: &[QuditFactor]) -> String {
    let tok = |f: &QuditFactor| {
        let part = |l: char, e: u8| match e {
            0 => String::new(),
            1 => format!("{l}{}", f.site),
            e => format!("{l}{}^{e}", f.site),
        };
        let s = format!("{}{}", part('X', f.x), part('Z', f.z));
        if s.is_empty() {
            format!("I{}", f.site)
        } else {
            s
        }
    };
    seq.iter().map(tok).collect::<Vec<_>>().join(" ")
}

pub fn factors_from_text(s: &str) -> Result<Vec<QuditFactor>> {
    let bad = |t: &str| Error::Parse(format!("bad factor {t:?}"));
    let mut out = Vec::new();
    for t in s.split_whitespace() {
        let mut f = QuditFactor::new(0, 0, 0);
        let mut site = None;
        let mut rest = t;
        while !rest.is_empty() {
            let letter = rest.chars().next().unwrap();
            rest = &rest[1..];
            let end = rest.find(|c: char| !c.is_ascii_digit() && c != '^').unwrap_or(rest.len());
            let (body, tail) = rest.split_at(end);
            rest = tail;
            let (s, e) = body.split_once('^').unwrap_or((body, "1"));
            let s: usize = s.parse().map_err(|_| bad(t))?;
            let e: u8 = e.parse().map_err(|_| bad(t))?;
            if site.is_some_and(|x| x != s) {
                return Err(bad(t));
            }
            site = Some(s);
            match letter {
                'X' => f.x = e,
                'Z' => f.z = e,
                'I' => {}
                _ => return Err(bad(t)),
            }
        }
        f.site = site.ok_or_else(|| bad(t))?;
        out.push(f);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintCheck {
    pub kind: ConstraintKind,
    pub players: Vec<usize>,
    pub expected: RootOfUnity,
    pub observed: Expectation,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub players: usize,
    /// `commutation[i][j] = k` with `Z_i X_j = ω^k X_j Z_i`.
    pub commutation: Vec<Vec<u32>>,
    pub pattern_ok: bool,
    pub pattern_failures: Vec<String>,
    /// Empty for `d ≠ 2`.
    pub y_hermitian: Vec<bool>,
    pub constraints: Vec<ConstraintCheck>,
    pub ready: bool,
}

pub fn validate(ops: &CompositeOperatorSet) -> ValidationReport {
    let p = ops.players();
    let commutation: Vec<Vec<u32>> = (0..p)
        .into_par_iter()
        .map(|i| (0..p).map(|j| ops.z(i).commutation_phase(ops.x(j)).expect("same shape")).collect())
        .collect();
    let mut pattern_failures = Vec::new();
    for i in 0..p {
        for j in 0..p {
            let want = u32::from(i == j);
            if commutation[i][j] != want {
                pattern_failures.push(format!("Z{i} X{j}: phase {} expected {want}", commutation[i][j]));
            }
            if i < j {
                if !ops.x(i).commutes(ops.x(j)).expect("same shape") {
                    pattern_failures.push(format!("X{i} X{j} do not commute"));
                }
                if !ops.z(i).commutes(ops.z(j)).expect("same shape") {
                    pattern_failures.push(format!("Z{i} Z{j} do not commute"));
                }
            }
        }
    }
    let y_hermitian: Vec<bool> = if ops.d() == 2 {
        (0..p).map(|i| ops.y(i).map(|y| y.is_unitary_hermitian()).unwrap_or(false)).collect()
    } else {
        Vec::new()
    };
    let constraints: Vec<ConstraintCheck> = ops
        .constraints()
        .par_iter()
        .map(|c| {
            let observed = ops.resource().expectation(&ops.constraint_operator(c)).expect("same shape");
            let ok = observed == Expectation::Definite(c.expected.normalized());
            ConstraintCheck { kind: c.kind, players: c.players.clone(), expected: c.expected, observed, ok }
        })
        .collect();
    let pattern_ok = pattern_failures.is_empty();
    let ready = pattern_ok && y_hermitian.iter().all(|&h| h) && constraints.iter().all(|c| c.ok);
    ValidationReport { players: p, commutation, pattern_ok, pattern_failures, y_hermitian, constraints, ready }
}

/// `P`-qubit GHZ group `⟨X^{⊗P}, Z_i Z_{i+1}⟩` with single-qubit pairs.
pub fn ghz_ops(p: usize) -> Result<CompositeOperatorSet> {
    if p < 2 {
        return Err(Error::InvalidParameter("GHZ needs at least 2 qubits".into()));
    }
    let all = WeylOperator::from_pauli(&crate::pauli::PauliOperator::x_on(p, 0..p));
    let mut gens = vec![all];
    for i in 0..p - 1 {
        gens.push(WeylOperator::from_pauli(&crate::pauli::PauliOperator::z_on(p, [i, i + 1])));
    }
    let group = StabilizerGroup::new(2, p, gens)?;
    let pairs = (0..p).map(|i| CompositePair::from_sites(&[i], &[i])).collect();
    CompositeOperatorSet::new(format!("ghz-{p}"), group, pairs, parity_constraints(p))
}

/// `Π X_i = 1` and `Z_i Z_{i+1} = 1`.
fn parity_constraints(p: usize) -> Vec<Constraint> {
    let mut c = vec![Constraint::x((0..p).collect())];
    c.extend((0..p - 1).map(|i| Constraint::z(vec![i, i + 1])));
    c
}

fn torus_period(code: &CodeInstance) -> Result<[i64; 3]> {
    code.complex()
        .period()
        .ok_or_else(|| Error::Geometry(format!("{} is not on a periodic lattice", code.kind.name())))
}

fn require_kind(code: &CodeInstance, want: CodeKind) -> Result<()> {
    if code.kind != want {
        return Err(Error::InvalidParameter(format!("expected a {} code, got {}", want.name(), code.kind.name())));
    }
    Ok(())
}

fn sites(code: &CodeInstance, cells: &[LatticeCell]) -> Result<Vec<usize>> {
    cells.iter().map(|c| code.site(c.pos, c.mask)).collect()
}

/// Lattice edge traversed by a direct step from `at`.
fn direct_edge(at: [i64; 2], step: Step) -> LatticeCell {
    let [x, y] = at;
    match step {
        Step::PlusX => LatticeCell::new([x, y, 0], 1),
        Step::MinusX => LatticeCell::new([x - 1, y, 0], 1),
        Step::PlusY => LatticeCell::new([x, y, 0], 2),
        Step::MinusY => LatticeCell::new([x, y - 1, 0], 2),
    }
}

/// Walls (codimension-one cells) grouped into composite cells, plus the
/// regions they cut out of a window of the lattice.
#[derive(Clone, Debug)]
pub struct RegionPlacement {
    pub pairs: Vec<CompositePair>,
    /// Number of regions; region 0 holds the lexicographically first window cell.
    pub regions: usize,
    pub outer: usize,
    /// Regions on the lower and upper side of each composite cell.
    pub sides: Vec<(usize, usize)>,
}

struct Window {
    dim: usize,
    lo: [i64; 3],
    size: [i64; 3],
}

impl Window {
    fn index(&self, p: [i64; 3]) -> Option<usize> {
        let mut idx = 0i64;
        for a in 0..3 {
            let r = p[a] - self.lo[a];
            if r < 0 || r >= self.size[a] {
                return None;
            }
            idx = idx * self.size[a] + r;
        }
        Some(idx as usize)
    }

    fn len(&self) -> usize {
        (self.size[0] * self.size[1] * self.size[2]) as usize
    }

    fn point(&self, mut idx: usize) -> [i64; 3] {
        let mut p = [0i64; 3];
        for a in (0..3).rev() {
            p[a] = self.lo[a] + (idx as i64 % self.size[a]);
            idx /= self.size[a] as usize;
        }
        p
    }

    /// Neighbours with the wall crossed on the way.
    fn steps(&self, q: [i64; 3]) -> Vec<([i64; 3], LatticeCell)> {
        let full = (1u8 << self.dim) - 1;
        let mut out = Vec::with_capacity(2 * self.dim);
        for k in 0..self.dim {
            let mask = full ^ (1 << k);
            let mut up = q;
            up[k] += 1;
            out.push((up, LatticeCell::new(up, mask)));
            let mut down = q;
            down[k] -= 1;
            out.push((down, LatticeCell::new(q, mask)));
        }
        out
    }
}

fn normal_axis(cell: &LatticeCell, dim: usize) -> Result<usize> {
    let full = (1u8 << dim) - 1;
    if cell.mask & !full != 0 || cell.degree() + 1 != dim {
        return Err(Error::Geometry(format!("{cell:?} is not a wall in {dim} dimensions")));
    }
    Ok((full ^ cell.mask).trailing_zeros() as usize)
}

/// Builds composite pairs from walls: `X_c` acts on the walls of `c` and `Z_c`
/// on a dual path that starts at the first cell of the region below the middle
/// wall of `c`, crosses it, and ends at the first cell of the region above.
pub fn region_placement(code: &CodeInstance, walls: &[Vec<LatticeCell>]) -> Result<RegionPlacement> {
    torus_period(code)?;
    let dim = code.complex().top();
    if code.site_degree() + 1 != dim || code.d() != 2 {
        return Err(Error::InvalidParameter("region placements need qubits on codimension-one cells".into()));
    }
    let mut wall_of: HashMap<LatticeCell, usize> = HashMap::new();
    let mut phys_of: HashMap<usize, usize> = HashMap::new();
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    let mut first = true;
    for (c, ws) in walls.iter().enumerate() {
        if ws.is_empty() {
            return Err(Error::Geometry(format!("composite cell {c} has no walls")));
        }
        for w in ws {
            normal_axis(w, dim)?;
            if wall_of.insert(*w, c).is_some() {
                return Err(Error::Geometry(format!("wall {w:?} used twice")));
            }
            let s = code.site(w.pos, w.mask)?;
            if phys_of.insert(s, c).is_some() {
                return Err(Error::Geometry(format!("wall {w:?} wraps onto another wall")));
            }
            for a in 0..dim {
                if first || w.pos[a] < lo[a] {
                    lo[a] = w.pos[a];
                }
                if first || w.pos[a] > hi[a] {
                    hi[a] = w.pos[a];
                }
            }
            first = false;
        }
    }
    let mut wlo = [0i64; 3];
    let mut size = [1i64; 3];
    for a in 0..dim {
        wlo[a] = lo[a] - 1;
        size[a] = hi[a] - lo[a] + 3;
    }
    let win = Window { dim, lo: wlo, size };
    let mut label = vec![usize::MAX; win.len()];
    let mut reps: Vec<[i64; 3]> = Vec::new();
    for start in 0..win.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let r = reps.len();
        reps.push(win.point(start));
        label[start] = r;
        let mut queue = VecDeque::from([win.point(start)]);
        while let Some(q) = queue.pop_front() {
            for (nb, wall) in win.steps(q) {
                if wall_of.contains_key(&wall) {
                    continue;
                }
                if let Some(ni) = win.index(nb) {
                    if label[ni] == usize::MAX {
                        label[ni] = r;
                        queue.push_back(nb);
                    }
                }
            }
        }
    }
    let region = |p: [i64; 3]| label[win.index(p).expect("inside window")];
    // dual path inside one region
    let path = |from: [i64; 3], to: [i64; 3]| -> Vec<LatticeCell> {
        let mut parent: HashMap<[i64; 3], ([i64; 3], LatticeCell)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let r = region(from);
        while let Some(q) = queue.pop_front() {
            if q == to {
                break;
            }
            for (nb, wall) in win.steps(q) {
                if nb == from || parent.contains_key(&nb) || wall_of.contains_key(&wall) {
                    continue;
                }
                if win.index(nb).is_some() && region(nb) == r {
                    parent.insert(nb, (q, wall));
                    queue.push_back(nb);
                }
            }
        }
        let mut out = Vec::new();
        let mut cur = to;
        while cur != from {
            let (prev, wall) = parent[&cur];
            out.push(wall);
            cur = prev;
        }
        out.reverse();
        out
    };
    let mut pairs = Vec::with_capacity(walls.len());
    let mut sides = Vec::with_capacity(walls.len());
    for (c, ws) in walls.iter().enumerate() {
        let mid = ws[ws.len() / 2];
        let k = normal_axis(&mid, dim)?;
        let b = mid.pos;
        let mut a = b;
        a[k] -= 1;
        let (ra, rb) = (region(a), region(b));
        if ra == rb {
            return Err(Error::Geometry(format!("composite cell {c} has the same region on both sides")));
        }
        let mut crossing = path(reps[ra], a);
        crossing.push(mid);
        crossing.extend(path(b, reps[rb]));
        let zs = sites(code, &crossing)?;
        let mut tally: HashMap<usize, usize> = HashMap::new();
        for s in &zs {
            if let Some(&owner) = phys_of.get(s) {
                *tally.entry(owner).or_default() += 1;
            }
        }
        for (&owner, &count) in &tally {
            if (owner == c) != (count % 2 == 1) {
                return Err(Error::Geometry(format!("Z ray of cell {c} crosses cell {owner}")));
            }
        }
        pairs.push(CompositePair::from_sites(&sites(code, ws)?, &zs));
        sides.push((ra, rb));
    }
    let outer = region(wlo);
    Ok(RegionPlacement { pairs, regions: reps.len(), outer, sides })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawnEdge {
    pub from: usize,
    pub to: usize,
    pub path: LatticePath,
}

/// A plane graph drawn along edges of the square lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDrawing {
    pub vertices: Vec<[i64; 2]>,
    pub edges: Vec<DrawnEdge>,
}

impl GraphDrawing {
    pub fn new(vertices: Vec<[i64; 2]>, edges: Vec<DrawnEdge>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            let (Some(&a), Some(&b)) = (vertices.get(e.from), vertices.get(e.to)) else {
                return Err(Error::Geometry(format!("edge {i} names a missing vertex")));
            };
            if e.path.lattice != PathLattice::Direct || e.path.steps.is_empty() {
                return Err(Error::Geometry(format!("edge {i} must be a nonempty direct path")));
            }
            if e.path.start != a || e.path.end() != b {
                return Err(Error::Geometry(format!("edge {i} does not join its endpoints")));
            }
        }
        Ok(GraphDrawing { vertices, edges })
    }

    pub fn walls(&self) -> Vec<Vec<LatticeCell>> {
        self.edges.iter().map(|e| e.path.walk().into_iter().map(|(at, s)| direct_edge(at, s)).collect()).collect()
    }

    /// `p` arcs of near-equal length around the boundary of the `r × r` block
    /// with lower-left corner `anchor`, counterclockwise from the anchor. Arc `i`
    /// joins vertices `i` and `i+1`.
    pub fn cycle(p: usize, anchor: [i64; 2], r: usize) -> Result<Self> {
        if p < 2 || 4 * r < p {
            return Err(Error::Geometry(format!("a {r}x{r} block cannot carry {p} arcs")));
        }
        let [cx, cy] = anchor;
        let r = r as i64;
        let mut ring = Vec::with_capacity(4 * r as usize + 1);
        ring.extend((0..r).map(|i| [cx + i, cy]));
        ring.extend((0..r).map(|i| [cx + r, cy + i]));
        ring.extend((0..r).map(|i| [cx + r - i, cy + r]));
        ring.extend((0..r).map(|i| [cx, cy + r - i]));
        ring.push(anchor);
        let total = 4 * r as usize;
        let (base, extra) = (total / p, total % p);
        let mut cuts = vec![0usize];
        for j in 0..p {
            cuts.push(cuts[j] + base + usize::from(j < extra));
        }
        let vertices = (0..p).map(|j| ring[cuts[j]]).collect();
        let edges = (0..p)
            .map(|j| {
                let path = LatticePath::through(PathLattice::Direct, &ring[cuts[j]..=cuts[j + 1]])?;
                Ok(DrawnEdge { from: j, to: (j + 1) % p, path })
            })
            .collect::<Result<Vec<_>>>()?;
        GraphDrawing::new(vertices, edges)
    }

    /// Wheel with `k ∈ {3, 4}` spokes of length `r` leaving the hub along +x,
    /// +y, −x, −y; edge order matches [`PlaneGraph::wheel`].
    pub fn wheel(k: usize, center: [i64; 2], r: usize) -> Result<Self> {
        if !(3..=4).contains(&k) || r == 0 {
            return Err(Error::Geometry("lattice wheels need 3 or 4 spokes and a positive radius".into()));
        }
        let [cx, cy] = center;
        let r = r as i64;
        let tips = [[cx + r, cy], [cx, cy + r], [cx - r, cy], [cx, cy - r]];
        let corners = [[cx + r, cy + r], [cx - r, cy + r], [cx - r, cy - r], [cx + r, cy - r]];
        let mut vertices = vec![center];
        vertices.extend_from_slice(&tips[..k]);
        let line = |a: [i64; 2], b: [i64; 2]| -> Vec<[i64; 2]> {
            let n = (b[0] - a[0]).abs().max((b[1] - a[1]).abs());
            let (sx, sy) = ((b[0] - a[0]).signum(), (b[1] - a[1]).signum());
            (0..=n).map(|t| [a[0] + sx * t, a[1] + sy * t]).collect()
        };
        let mut edges = Vec::new();
        for (i, &tip) in tips.iter().enumerate().take(k) {
            edges.push(DrawnEdge { from: 0, to: i + 1, path: LatticePath::through(PathLattice::Direct, &line(center, tip))? });
        }
        for i in 0..k {
            // counterclockwise around the ring from tip i to tip i+1
            let mut pts = vec![tips[i]];
            let mut j = i;
            loop {
                let c = corners[j];
                let last = *pts.last().unwrap();
                pts.extend(line(last, c).into_iter().skip(1));
                j = (j + 1) % 4;
                pts.extend(line(c, tips[j]).into_iter().skip(1));
                if j == (i + 1) % k {
                    break;
                }
            }
            edges.push(DrawnEdge { from: i + 1, to: (i + 1) % k + 1, path: LatticePath::through(PathLattice::Direct, &pts)? });
        }
        GraphDrawing::new(vertices, edges)
    }

    /// `k ∈ 2..=4` parallel edges between `(x, y)` and `(x + 2r, y)`; edge order
    /// matches [`PlaneGraph::dipole`].
    pub fn dipole(k: usize, at: [i64; 2], r: usize) -> Result<Self> {
        if !(2..=4).contains(&k) || r == 0 {
            return Err(Error::Geometry("lattice dipoles need 2 to 4 edges and a positive radius".into()));
        }
        let [x, y] = at;
        let r = r as i64;
        let b = [x + 2 * r, y];
        let go = |pts: &[[i64; 2]]| -> Result<LatticePath> {
            let mut all = vec![pts[0]];
            for w in pts.windows(2) {
                let n = (w[1][0] - w[0][0]).abs().max((w[1][1] - w[0][1]).abs());
                let (sx, sy) = ((w[1][0] - w[0][0]).signum(), (w[1][1] - w[0][1]).signum());
                all.extend((1..=n).map(|t| [w[0][0] + sx * t, w[0][1] + sy * t]));
            }
            LatticePath::through(PathLattice::Direct, &all)
        };
        let routes: Vec<Vec<[i64; 2]>> = vec![
            vec![at, [x, y + r], [b[0], y + r], b],
            vec![at, [x, y - r], [b[0], y - r], b],
            vec![at, b],
            vec![at, [x - 1, y], [x - 1, y + r + 1], [b[0] + 1, y + r + 1], [b[0] + 1, y], b],
        ];
        let order: &[usize] = match k {
            2 => &[0, 1],
            3 => &[0, 2, 1],
            _ => &[3, 0, 2, 1],
        };
        let edges =
            order.iter().map(|&i| Ok(DrawnEdge { from: 0, to: 1, path: go(&routes[i])? })).collect::<Result<Vec<_>>>()?;
        GraphDrawing::new(vec![at, b], edges)
    }
}

/// Composite set of a drawn graph: `X` constraints around bounded regions and
/// `Z` constraints at every vertex but the last.
pub fn embed_drawing(code: &CodeInstance, drawing: &GraphDrawing) -> Result<(CompositeOperatorSet, RegionPlacement)> {
    if code.complex().top() != 2 {
        return Err(Error::InvalidParameter("drawings live on a 2D lattice".into()));
    }
    let placement = region_placement(code, &drawing.walls())?;
    let mut constraints = Vec::new();
    for r in (0..placement.regions).filter(|&r| r != placement.outer) {
        let players: Vec<usize> =
            placement.sides.iter().enumerate().filter(|(_, &(a, b))| (a == r) != (b == r)).map(|(i, _)| i).collect();
        if !players.is_empty() {
            constraints.push(Constraint::x(players));
        }
    }
    for v in 0..drawing.vertices.len().saturating_sub(1) {
        let players: Vec<usize> = drawing
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| (e.from == v) != (e.to == v))
            .map(|(i, _)| i)
            .collect();
        if !players.is_empty() {
            constraints.push(Constraint::z(players));
        }
    }
    let set = CompositeOperatorSet::new("drawing", code.group().clone(), placement.pairs.clone(), constraints)?;
    Ok((set, placement))
}

/// Embeds `g` through `drawing` and returns the set with the effective group
/// generated by its constraints, which must have rank `E(g)`.
pub fn plane_graph_embedding(
    g: &PlaneGraph,
    code: &CodeInstance,
    drawing: &GraphDrawing,
) -> Result<(CompositeOperatorSet, StabilizerGroup)> {
    if drawing.edges.len() != g.num_edges() || drawing.vertices.len() != g.num_vertices() {
        return Err(Error::Geometry("drawing and graph differ in size".into()));
    }
    for (i, (e, &(a, b))) in drawing.edges.iter().zip(g.ends()).enumerate() {
        if (e.from, e.to) != (a, b) && (e.to, e.from) != (a, b) {
            return Err(Error::Geometry(format!("drawn edge {i} joins different vertices")));
        }
    }
    let (set, placement) = embed_drawing(code, drawing)?;
    if placement.regions != g.num_faces() {
        return Err(Error::Geometry(format!("drawing has {} regions, graph has {} faces", placement.regions, g.num_faces())));
    }
    let set = set.renamed("plane-graph");
    let n = g.num_edges();
    let gens: Vec<WeylOperator> = set
        .constraints()
        .iter()
        .map(|c| {
            let p = match c.kind {
                ConstraintKind::X => crate::pauli::PauliOperator::x_on(n, c.players.iter().copied()),
                ConstraintKind::Z => crate::pauli::PauliOperator::z_on(n, c.players.iter().copied()),
            };
            WeylOperator::from_pauli(&p)
        })
        .collect();
    let effective = StabilizerGroup::new(2, n, gens)?;
    if effective.rank() != n {
        return Err(Error::Geometry(format!("effective group has rank {} for {n} edges", effective.rank())));
    }
    Ok((set, effective))
}

/// Placement of the loop for [`tc2d_parity_ops`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tc2dLayout {
    /// Lower-left corner of the block whose boundary carries the arcs.
    pub anchor: [i64; 2],
    /// Block side; raised to `⌈P/4⌉` when smaller.
    pub radius: usize,
    /// Even-indexed `Z_i` also wind once around the torus.
    pub winding: bool,
}

impl Default for Tc2dLayout {
    fn default() -> Self {
        Tc2dLayout { anchor: [0, 0], radius: 1, winding: false }
    }
}

/// `P` arcs around a square block; `Z_i` are dual rays from the block interior
/// through arc `i` to the region outside.
pub fn tc2d_parity_ops(code: &CodeInstance, p: usize, layout: Tc2dLayout) -> Result<CompositeOperatorSet> {
    require_kind(code, CodeKind::Toric2D)?;
    if p < 3 {
        return Err(Error::InvalidParameter(format!("parity game needs P ≥ 3, got {p}")));
    }
    let period = torus_period(code)?;
    let side = period[0].min(period[1]);
    let r = layout.radius.max(p.div_ceil(4));
    if r as i64 > side - 1 {
        return Err(Error::Geometry(format!("{p} arcs need a {r}x{r} block, torus side is {side}")));
    }
    let drawing = GraphDrawing::cycle(p, layout.anchor, r)?;
    let (set, _) = embed_drawing(code, &drawing)?;
    let constraints = parity_constraints(p);
    if !layout.winding {
        return CompositeOperatorSet::new(format!("tc2d-{p}"), code.group().clone(), set.pairs().to_vec(), constraints);
    }
    let [cx, cy] = layout.anchor;
    let row: Vec<LatticeCell> = (0..period[0]).map(|x| LatticeCell::new([x, cy - 1, 0], 2)).collect();
    let col: Vec<LatticeCell> = (0..period[1]).map(|y| LatticeCell::new([cx - 1, y, 0], 1)).collect();
    let (row, col) = (sites(code, &row)?, sites(code, &col)?);
    let resource = code.group().fix_sector(&[code.z_on(&row, 1), code.z_on(&col, 1)])?;
    let pairs = set
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, pr)| {
            let mut pr = pr.clone();
            if i % 2 == 0 {
                pr.z.extend(row.iter().map(|&s| QuditFactor::z(s, 1)));
            }
            pr
        })
        .collect();
    CompositeOperatorSet::new(format!("tc2d-{p}-winding"), resource, pairs, constraints)
}

/// `Z_e B_p (A_v Z_e)` applied in that order for the first edge `e` shared by
/// vertex `v` and plaquette `p`.
pub fn tc2d_twist(code: &CodeInstance, v: usize, p: usize) -> Result<WeylOperator> {
    require_kind(code, CodeKind::Toric2D)?;
    let a = code.generator("A_v", v).ok_or_else(|| Error::InvalidParameter(format!("no vertex {v}")))?;
    let b = code.generator("B_p", p).ok_or_else(|| Error::InvalidParameter(format!("no plaquette {p}")))?;
    let (sa, sb) = (a.support(), b.support());
    let shared = *sa
        .iter()
        .find(|s| sb.contains(s))
        .ok_or_else(|| Error::Geometry(format!("vertex {v} is not a corner of plaquette {p}")))?;
    let mut seq = vec![QuditFactor::z(shared, 1)];
    seq.extend(sb.iter().map(|&s| QuditFactor::x(s, 1)));
    seq.extend(sa.iter().filter(|&&s| s != shared).map(|&s| QuditFactor::z(s, 1)));
    ordered_product(2, code.n(), &seq)
}

/// Every (vertex, plaquette) corner pair with the expectation of its twist operator.
pub fn tc2d_twists(code: &CodeInstance) -> Result<Vec<(usize, usize, Expectation)>> {
    require_kind(code, CodeKind::Toric2D)?;
    let c = code.complex();
    let mut out = Vec::new();
    for v in 0..c.num_cells(0) {
        let mut plaqs: Vec<usize> = c.coboundary_of(0, v).iter().flat_map(|&e| c.coboundary_of(1, e).to_vec()).collect();
        plaqs.sort_unstable();
        plaqs.dedup();
        for p in plaqs {
            let t = tc2d_twist(code, v, p)?;
            out.push((v, p, code.group().expectation(&t)?));
        }
    }
    Ok(out)
}

fn unit(k: usize) -> [i64; 3] {
    let mut e = [0; 3];
    e[k] = 1;
    e
}

fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Face normal to axis `k` at `pos`.
fn face(pos: [i64; 3], k: usize) -> LatticeCell {
    LatticeCell::new(pos, 7 ^ (1 << k))
}

fn edge(pos: [i64; 3], axis: usize) -> LatticeCell {
    LatticeCell::new(pos, 1 << axis)
}

/// Faces crossed by a dual path through the listed cubes.
fn cube_path(cubes: &[[i64; 3]]) -> Result<Vec<LatticeCell>> {
    cubes
        .windows(2)
        .map(|w| {
            let d: Vec<i64> = (0..3).map(|a| w[1][a] - w[0][a]).collect();
            match (0..3).find(|&a| d[a] != 0) {
                Some(k) if d.iter().map(|x| x.abs()).sum::<i64>() == 1 => {
                    Ok(if d[k] > 0 { face(w[1], k) } else { face(w[0], k) })
                }
                _ => Err(Error::Geometry(format!("cubes {:?} and {:?} are not adjacent", w[0], w[1]))),
            }
        })
        .collect()
}

/// Three patches of the boundary of the cube at the origin, each crossed once
/// by a dual path ending in the cube at `(1, 1, 1)`.
pub fn tc3d_1form_ops(code: &CodeInstance) -> Result<CompositeOperatorSet> {
    require_kind(code, CodeKind::Toric3DFaces)?;
    let o = [0, 0, 0];
    let patches = [[face(unit(0), 0), face(o, 1)], [face(unit(1), 1), face(o, 2)], [face(unit(2), 2), face(o, 0)]];
    let far = [1, 1, 1];
    let routes = [
        [o, [1, 0, 0], [1, 1, 0], far],
        [o, [0, 1, 0], [0, 1, 1], far],
        [o, [0, 0, 1], [1, 0, 1], far],
    ];
    let pairs = patches
        .iter()
        .zip(&routes)
        .map(|(x, route)| Ok(CompositePair::from_sites(&sites(code, x)?, &sites(code, &cube_path(route)?)?)))
        .collect::<Result<Vec<_>>>()?;
    CompositeOperatorSet::new("tc3d-1form", code.group().clone(), pairs, parity_constraints(3))
}

/// Three arcs of the boundary of the xy-face at the origin; each `Z_i` is a
/// sheet of x-edges (a dual membrane) whose boundary is shared by all three.
pub fn tc3d_2form_ops(code: &CodeInstance) -> Result<CompositeOperatorSet> {
    require_kind(code, CodeKind::Toric3DEdges)?;
    let l = torus_period(code)?[0];
    let arcs = [vec![edge([0, 0, 0], 0)], vec![edge([1, 0, 0], 1)], vec![edge([0, 1, 0], 0), edge([0, 0, 0], 1)]];
    let h = (l - 1) / 2;
    let sheet: Vec<LatticeCell> =
        (-(l - 2)..=0).flat_map(|y| (-h..=h).map(move |z| edge([0, y, z], 0))).collect();
    let z1 = code.z_on(&sites(code, &sheet)?, 1);
    let star = |pos: [i64; 3]| -> Result<WeylOperator> {
        let v = code.complex().vertex(pos).ok_or_else(|| Error::Geometry(format!("no vertex at {pos:?}")))?;
        code.generator("A_v", v).ok_or_else(|| Error::Geometry("missing vertex stabilizer".into()))
    };
    let z2 = z1.multiply(&star([1, 0, 0])?)?;
    let z3 = z2.multiply(&star([1, 1, 0])?)?;
    let pairs = arcs
        .iter()
        .zip([z1, z2, z3])
        .map(|(x, z)| Ok(CompositePair::from_sites(&sites(code, x)?, &z.support())))
        .collect::<Result<Vec<_>>>()?;
    CompositeOperatorSet::new("tc3d-2form", code.group().clone(), pairs, parity_constraints(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XCubeVariant {
    /// Prism of the given height along `axis`.
    Prism { axis: usize, height: usize },
    Cage,
}

/// Prism: `X_i` are columns of edges on the faces of a prism along the chosen
/// axis and `Z_i` are rectangles whose pairwise products are cages. Cage:
/// `X_i` are the four edges of one direction around a cube and `Z_i` are short
/// strings meeting it once.
pub fn xcube_ops(code: &CodeInstance, variant: XCubeVariant) -> Result<CompositeOperatorSet> {
    require_kind(code, CodeKind::XCube)?;
    let l = torus_period(code)?[0];
    let (xs, zs): (Vec<Vec<LatticeCell>>, Vec<Vec<LatticeCell>>) = match variant {
        XCubeVariant::Prism { axis, height } => {
            if axis > 2 || height == 0 || height as i64 > l - 1 {
                return Err(Error::Geometry(format!("prism of height {height} along axis {axis} does not fit L={l}")));
            }
            let (a, b, mu) = ((axis + 1) % 3, (axis + 2) % 3, axis);
            let h = height as i64;
            let pt = |ua: i64, ub: i64, um: i64| {
                let mut p = [0i64; 3];
                p[a] = ua;
                p[b] = ub;
                p[mu] = um;
                p
            };
            let x1 = (0..h).map(|z| edge(pt(-1, 0, z), a)).collect();
            let x3 = (0..h).map(|z| edge(pt(0, 0, z), a)).collect();
            let x2 = (0..h).flat_map(|z| [edge(pt(0, -1, z), b), edge(pt(0, 0, z), b)]).collect();
            let square = |u: i64| -> Vec<LatticeCell> {
                let mut s = vec![edge(pt(u, 0, 0), b), edge(pt(u, 0, h), b)];
                s.extend((0..h).flat_map(|z| [edge(pt(u, 0, z), mu), edge(pt(u, 1, z), mu)]));
                s
            };
            let rods = |u: i64| -> Vec<LatticeCell> {
                [(0, 0), (1, 0), (0, h), (1, h)].iter().map(|&(j, z)| edge(pt(u, j, z), a)).collect()
            };
            let z1 = [square(-1), rods(-1)].concat();
            let z2 = square(0);
            let z3 = [square(1), rods(0)].concat();
            (vec![x1, x2, x3], vec![z1, z2, z3])
        }
        XCubeVariant::Cage => {
            let around = |k: usize| -> Vec<LatticeCell> {
                let (b, c) = ((k + 1) % 3, (k + 2) % 3);
                [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(i, j)| {
                        let mut p = [0i64; 3];
                        p[b] = i;
                        p[c] = j;
                        edge(p, k)
                    })
                    .collect()
            };
            let xs = [around(0), around(1), around(2)];
            let zs = vec![
                vec![edge([0, 0, 0], 0)],
                vec![edge([-1, 0, 0], 0), edge([0, 0, 0], 1), edge([0, -1, 0], 1)],
                vec![edge([-1, 0, 0], 0), edge([0, 0, 0], 2), edge([0, 0, -1], 2)],
            ];
            // X_i: Z-type cube edges; Z_i: X-type strings
            let pairs = xs
                .iter()
                .zip(&zs)
                .map(|(x, z)| {
                    let (xs, zs) = (sites(code, x)?, sites(code, z)?);
                    Ok(CompositePair {
                        x: xs.iter().map(|&s| QuditFactor::z(s, 1)).collect(),
                        z: zs.iter().map(|&s| QuditFactor::x(s, 1)).collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return CompositeOperatorSet::new("xcube-cage", code.group().clone(), pairs, parity_constraints(3));
        }
    };
    let pairs = xs
        .iter()
        .zip(&zs)
        .map(|(x, z)| Ok(CompositePair::from_sites(&sites(code, x)?, &sites(code, z)?)))
        .collect::<Result<Vec<_>>>()?;
    CompositeOperatorSet::new("xcube-prism", code.group().clone(), pairs, parity_constraints(3))
}

/// Composite set attached to a coarse complex: one player per coarse `p`-cell.
#[derive(Clone, Debug)]
pub struct Cellulation {
    pub coarse: Arc<CellComplex>,
    pub p: usize,
    pub ops: CompositeOperatorSet,
}

/// Attaches `pairs` (one per coarse `p`-cell) to `coarse` with constraints
/// `Π_{c ∈ ∂f} X_c = 1` for every `(p+1)`-cell and `Π_{c ∈ δv} Z_c = 1` for
/// every `(p−1)`-cell.
pub fn cellulation_ops(
    coarse: Arc<CellComplex>,
    p: usize,
    code: &CodeInstance,
    pairs: Vec<CompositePair>,
) -> Result<Cellulation> {
    if p == 0 || p >= coarse.top() {
        return Err(Error::InvalidParameter(format!("degree {p} must lie strictly inside the complex")));
    }
    if pairs.len() != coarse.num_cells(p) {
        return Err(Error::InvalidComposite(format!("{} pairs for {} coarse cells", pairs.len(), coarse.num_cells(p))));
    }
    let mut constraints = Vec::new();
    for f in 0..coarse.num_cells(p + 1) {
        constraints.push(Constraint::x(coarse.boundary_of(p + 1, f).to_vec()));
    }
    for v in 0..coarse.num_cells(p - 1) {
        constraints.push(Constraint::z(coarse.coboundary_of(p - 1, v).to_vec()));
    }
    let ops = CompositeOperatorSet::new("cellulation", code.group().clone(), pairs, constraints)?;
    Ok(Cellulation { coarse, p, ops })
}

/// Coarse torus with `s × s (× s)` blocks of the code's lattice per cell.
///
/// `X_c` covers the `s^p` micro cells of coarse cell `c`; `Z_c` is the dual
/// sheet of micro cells sharing the orientation of `c` through its middle.
pub fn scaled_cellulation(code: &CodeInstance, s: usize) -> Result<Cellulation> {
    let period = torus_period(code)?;
    let dim = code.complex().top();
    let p = code.site_degree();
    if s == 0 {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let mut sizes = Vec::new();
    for &l in period.iter().take(dim) {
        if l % s as i64 != 0 || l / (s as i64) < 2 {
            return Err(Error::Geometry(format!("scale {s} must divide the side {l} at least twice")));
        }
        sizes.push((l / s as i64) as usize);
    }
    let coarse = Arc::new(build_torus(&sizes)?);
    let s = s as i64;
    let o = (s - 1) / 2;
    let mut pairs = Vec::with_capacity(coarse.num_cells(p));
    for i in 0..coarse.num_cells(p) {
        let cell = coarse.coord(p, i).expect("lattice");
        let base = [s * cell.pos[0], s * cell.pos[1], s * cell.pos[2]];
        let along: Vec<usize> = cell.axes().collect();
        let across: Vec<usize> = (0..dim).filter(|a| !along.contains(a)).collect();
        let mut xs = vec![base];
        for &a in &along {
            xs = xs.iter().flat_map(|q| (0..s).map(move |t| { let mut q = *q; q[a] += t; q })).collect();
        }
        let mut zbase = base;
        for &a in &along {
            zbase[a] += o;
        }
        let mut zs = vec![zbase];
        for &a in &across {
            zs = zs.iter().flat_map(|q| (-(s - 1 - o)..=o).map(move |u| { let mut q = *q; q[a] += u; q })).collect();
        }
        let xs: Vec<LatticeCell> = xs.into_iter().map(|q| LatticeCell::new(q, cell.mask)).collect();
        let zs: Vec<LatticeCell> = zs.into_iter().map(|q| LatticeCell::new(q, cell.mask)).collect();
        pairs.push(CompositePair::from_sites(&sites(code, &xs)?, &sites(code, &zs)?));
    }
    cellulation_ops(coarse, p, code, pairs).map(|mut c| {
        c.ops = c.ops.renamed(format!("cellulation-scaled-{s}"));
        c
    })
}

/// The code's own lattice as the coarse complex.
pub fn identity_cellulation(code: &CodeInstance) -> Result<Cellulation> {
    let mut c = scaled_cellulation(code, 1)?;
    c.ops = c.ops.renamed("cellulation-identity");
    Ok(c)
}

/// A box of `sizes` coarse cells (each `scale` lattice units wide) placed at
/// `offset`, closed off by the unbounded cell; walls are codimension-one cells.
pub fn box_cellulation(code: &CodeInstance, sizes: &[usize], scale: usize, offset: [i64; 3]) -> Result<Cellulation> {
    let dim = code.complex().top();
    if sizes.len() != dim || scale == 0 {
        return Err(Error::InvalidParameter(format!("box {sizes:?} does not match a {dim}D code")));
    }
    let coarse = Arc::new(build_box(sizes)?);
    let p = dim - 1;
    let s = scale as i64;
    let walls: Vec<Vec<LatticeCell>> = (0..coarse.num_cells(p))
        .map(|i| {
            let cell = coarse.coord(p, i).expect("box cells have coordinates");
            let base = add([s * cell.pos[0], s * cell.pos[1], s * cell.pos[2]], offset);
            let mut pts = vec![base];
            for a in cell.axes() {
                pts = pts.iter().flat_map(|q| (0..s).map(move |t| { let mut q = *q; q[a] += t; q })).collect();
            }
            pts.into_iter().map(|q| LatticeCell::new(q, cell.mask)).collect()
        })
        .collect();
    let placement = region_placement(code, &walls)?;
    if placement.regions != coarse.num_cells(dim) {
        return Err(Error::Geometry("box walls do not cut out one region per coarse cell".into()));
    }
    let mut c = cellulation_ops(coarse, p, code, placement.pairs)?;
    c.ops = c.ops.renamed("cellulation-box");
    Ok(c)
}

/// Three-player cellulations of the sphere underlying the minimal parity
/// strategies: a triangle (2D toric and 3D edge codes) or three discs sharing
/// a circle (3D face code).
pub fn tab1_cellulation(code: &CodeInstance) -> Result<Cellulation> {
    let none = || Vec::<usize>::new();
    let (faces, ops) = match code.kind {
        CodeKind::Toric2D => {
            let tri = vec![vec![none(); 3], vec![vec![0, 1], vec![1, 2], vec![2, 0]], vec![vec![0, 1, 2]; 2]];
            (tri, tc2d_parity_ops(code, 3, Tc2dLayout::default())?)
        }
        CodeKind::Toric3DEdges => {
            let tri = vec![
                vec![none(); 3],
                vec![vec![0, 1], vec![1, 2], vec![2, 0]],
                vec![vec![0, 1, 2]; 2],
                vec![vec![0, 1]; 2],
            ];
            (tri, tc3d_2form_ops(code)?)
        }
        CodeKind::Toric3DFaces => {
            let theta = vec![
                vec![none(); 2],
                vec![vec![0, 1]; 3],
                vec![vec![2, 0], vec![0, 1], vec![1, 2]],
                vec![vec![0, 1, 2]; 2],
            ];
            (theta, tc3d_1form_ops(code)?)
        }
        _ => return Err(Error::InvalidParameter(format!("no three-player cellulation for {}", code.kind.name()))),
    };
    let coarse = Arc::new(CellComplex::from_faces(faces, Topology::Sphere)?);
    let p = code.site_degree();
    let mut c = cellulation_ops(coarse, p, code, ops.pairs().to_vec())?;
    c.ops = c.ops.renamed("cellulation-three-player");
    Ok(c)
}

/// Operators for the magic-square strategy on a double-semion torus: two
/// copies of `(X, Z)` for player A and `(X̃, Z̃)` for player B, built from `s`
/// strings around one plaquette per copy.
#[derive(Clone, Debug)]
pub struct MagicSquareOps {
    pub resource: StabilizerGroup,
    pub x: [WeylOperator; 2],
    pub z: [WeylOperator; 2],
    pub x_tilde: [WeylOperator; 2],
    pub z_tilde: [WeylOperator; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SquarePlayer {
    A,
    B,
}

impl MagicSquareOps {
    fn u(x: &WeylOperator, z: &WeylOperator, which: usize) -> WeylOperator {
        match which {
            1 => z.dagger(),
            2 => x.power(2),
            _ => x.multiply(z).and_then(|xz| xz.multiply(x)).expect("same shape"),
        }
    }

    /// `U_k` of copy `copy` for a player.
    pub fn unitary(&self, player: SquarePlayer, copy: usize, which: usize) -> WeylOperator {
        match player {
            SquarePlayer::A => Self::u(&self.x[copy], &self.z[copy], which),
            SquarePlayer::B => Self::u(&self.x_tilde[copy], &self.z_tilde[copy], which),
        }
    }

    /// Entry `(row, col)` of the operator square for a player:
    /// `[U1†⊗1, 1⊗U1†, U1⊗U1; 1⊗U2†, U2†⊗1, U2⊗U2; −U1⊗U2, −U2⊗U1, U3⊗U3]`.
    pub fn entry(&self, player: SquarePlayer, row: usize, col: usize) -> WeylOperator {
        let u = |c: usize, k: usize| self.unitary(player, c, k);
        let both = |a: WeylOperator, b: WeylOperator| a.multiply(&b).expect("same shape");
        let minus = |o: WeylOperator| o.times_w(self.resource.d());
        match (row, col) {
            (0, 0) => u(0, 1).dagger(),
            (0, 1) => u(1, 1).dagger(),
            (0, 2) => both(u(0, 1), u(1, 1)),
            (1, 0) => u(1, 2).dagger(),
            (1, 1) => u(0, 2).dagger(),
            (1, 2) => both(u(0, 2), u(1, 2)),
            (2, 0) => minus(both(u(0, 1), u(1, 2))),
            (2, 1) => minus(both(u(0, 2), u(1, 1))),
            _ => both(u(0, 3), u(1, 3)),
        }
    }
}

/// Offset between the two copies along x.
pub const MAGIC_SQUARE_COPY_OFFSET: i64 = 4;

/// Builds the magic-square operators on a double-semion code, fixing the
/// phases so that every operator has order 4, `X X̃ = 1` and `Z Z̃† = 1` on
/// the resource.
pub fn ds_magic_square_ops(code: &CodeInstance) -> Result<MagicSquareOps> {
    require_kind(code, CodeKind::DoubleSemion)?;
    let group = code.group();
    let d = code.d();
    let s = |start: [i64; 2], steps: [Step; 2]| ds_string(code, Anyon::S, &LatticePath::new(PathLattice::Dual, start, steps.to_vec()));
    let order4 = |o: WeylOperator| -> Result<WeylOperator> {
        let o = if o.power(4).is_scalar_one() { o } else { o.times_w(1) };
        if !o.power(4).is_scalar_one() {
            return Err(Error::Geometry("string operator does not have order 4".into()));
        }
        Ok(o)
    };
    let member = |o: &WeylOperator| -> Result<RootOfUnity> {
        group
            .membership(o)?
            .ok_or_else(|| Error::NotDefinite("closed string is not a stabilizer; check the sector and lattice size".into()))
    };
    // w^k with w = e^{iπ/d}
    let w_exp = |r: RootOfUnity| -> Result<u32> {
        let r = r.normalized();
        if (2 * d) % r.order != 0 {
            return Err(Error::Geometry(format!("phase {r} is not a power of w")));
        }
        Ok(r.k * (2 * d / r.order))
    };
    let mut x = Vec::new();
    let mut z = Vec::new();
    let mut xt = Vec::new();
    let mut zt = Vec::new();
    for copy in 0..2 {
        let [ox, oy] = [copy as i64 * MAGIC_SQUARE_COPY_OFFSET, 0];
        let xa = order4(s([ox, oy], [Step::PlusY, Step::PlusX])?)?;
        let xb = order4(s([ox + 1, oy + 1], [Step::MinusY, Step::MinusX])?)?;
        let za = order4(s([ox, oy], [Step::MinusX, Step::MinusY])?)?;
        let zb = order4(s([ox, oy], [Step::MinusY, Step::MinusX])?)?;
        let mx = member(&xa.multiply(&xb)?)?;
        let xb = xb.times_w(w_exp(mx.conj())?);
        let mz = member(&za.multiply(&zb.dagger())?)?;
        let zb = zb.times_w(w_exp(mz)?);
        x.push(xa);
        xt.push(xb);
        z.push(za);
        zt.push(zb);
    }
    let disjoint = |ps: &[&WeylOperator], qs: &[&WeylOperator]| {
        ps.iter().all(|p| qs.iter().all(|q| p.support().iter().all(|s| !q.support().contains(s))))
    };
    if !disjoint(&[&x[0], &x[1], &z[0], &z[1]], &[&xt[0], &xt[1], &zt[0], &zt[1]]) {
        return Err(Error::Geometry("player supports overlap; the torus is too small".into()));
    }
    if !disjoint(&[&x[0], &z[0], &xt[0], &zt[0]], &[&x[1], &z[1], &xt[1], &zt[1]]) {
        return Err(Error::Geometry("the two copies overlap; the torus is too small".into()));
    }
    let pair = |v: Vec<WeylOperator>| -> [WeylOperator; 2] { [v[0].clone(), v[1].clone()] };
    Ok(MagicSquareOps { resource: group.clone(), x: pair(x), z: pair(z), x_tilde: pair(xt), z_tilde: pair(zt) })
}
