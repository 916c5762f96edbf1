//! Stabilizer codes used as game resources.
//!
//! Sites of every code are cells of one degree of a [`CellComplex`], so the
//! site index is the cell index. Lattice codes are built on periodic cubic
//! complexes with `(coordinate, direction)` lexicographic indexing.

use crate::complex::{build_torus, build_torus_3d, CellComplex};
use crate::error::{Error, Result};
use crate::tableau::{Expectation, RootOfUnity, StabilizerGroup};
use crate::weyl::{ordered_product, QuditFactor, WeylOperator};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeKind {
    Homological(usize),
    Toric2D,
    Toric3DFaces,
    Toric3DEdges,
    XCube,
    DoubleSemion,
}

impl CodeKind {
    pub fn name(&self) -> String {
        match self {
            CodeKind::Homological(p) => format!("homological-p{p}"),
            CodeKind::Toric2D => "toric2d".into(),
            CodeKind::Toric3DFaces => "toric3d-faces".into(),
            CodeKind::Toric3DEdges => "toric3d-edges".into(),
            CodeKind::XCube => "xcube".into(),
            CodeKind::DoubleSemion => "double-semion".into(),
        }
    }
}

/// Which stabilizer family a generator belongs to and the cell it sits on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorLabel {
    pub family: String,
    pub cell_degree: usize,
    pub cell: usize,
}

#[derive(Clone, Debug)]
pub struct CodeInstance {
    pub kind: CodeKind,
    complex: Arc<CellComplex>,
    site_degree: usize,
    group: StabilizerGroup,
    labels: Vec<GeneratorLabel>,
}

/// Summary emitted by `code info`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeInfo {
    pub kind: String,
    pub d: u32,
    pub n: usize,
    pub generator_counts: BTreeMap<String, usize>,
    pub family_ranks: BTreeMap<String, usize>,
    pub rank: usize,
    pub ground_space_log_dim: u32,
}

impl CodeInstance {
    fn build(
        kind: CodeKind,
        complex: Arc<CellComplex>,
        site_degree: usize,
        d: u32,
        gens: Vec<(GeneratorLabel, WeylOperator)>,
    ) -> Result<Self> {
        let n = complex.num_cells(site_degree);
        let (labels, ops): (Vec<_>, Vec<_>) = gens.into_iter().unzip();
        let group = StabilizerGroup::new(d, n, ops)?;
        Ok(CodeInstance { kind, complex, site_degree, group, labels })
    }

    pub fn n(&self) -> usize {
        self.group.n()
    }

    pub fn d(&self) -> u32 {
        self.group.d()
    }

    pub fn group(&self) -> &StabilizerGroup {
        &self.group
    }

    pub fn complex(&self) -> &Arc<CellComplex> {
        &self.complex
    }

    /// Degree of the cells that carry the sites.
    pub fn site_degree(&self) -> usize {
        self.site_degree
    }

    pub fn labels(&self) -> &[GeneratorLabel] {
        &self.labels
    }

    pub fn families(&self) -> Vec<String> {
        let mut f: Vec<String> = Vec::new();
        for l in &self.labels {
            if !f.contains(&l.family) {
                f.push(l.family.clone());
            }
        }
        f
    }

    pub fn family(&self, family: &str) -> Vec<WeylOperator> {
        self.labels
            .iter()
            .zip(self.group.generators())
            .filter(|(l, _)| l.family == family)
            .map(|(_, g)| g.clone())
            .collect()
    }

    /// Generator of `family` on cell `cell`.
    pub fn generator(&self, family: &str, cell: usize) -> Option<WeylOperator> {
        self.labels
            .iter()
            .zip(self.group.generators())
            .find(|(l, _)| l.family == family && l.cell == cell)
            .map(|(_, g)| g.clone())
    }

    /// The same code in a different sector or ground state.
    pub fn with_group(&self, group: StabilizerGroup) -> Result<CodeInstance> {
        if group.n() != self.n() {
            return Err(Error::RegisterMismatch(group.n(), self.n()));
        }
        if group.d() != self.d() {
            return Err(Error::DimensionMismatch(group.d(), self.d()));
        }
        Ok(CodeInstance { group, ..self.clone() })
    }

    /// Site index of a lattice cell of the site degree.
    pub fn site(&self, pos: [i64; 3], mask: u8) -> Result<usize> {
        if mask.count_ones() as usize != self.site_degree {
            return Err(Error::Geometry(format!("mask {mask:#b} does not select a site cell")));
        }
        self.complex
            .cell(pos, mask)
            .ok_or_else(|| Error::Geometry(format!("no cell at {pos:?} spanning {mask:#b}")))
    }

    /// `Π X^power` over `sites` (repeated sites accumulate).
    pub fn x_on(&self, sites: &[usize], power: u8) -> WeylOperator {
        let seq: Vec<QuditFactor> = sites.iter().map(|&s| QuditFactor::x(s, power)).collect();
        ordered_product(self.d(), self.n(), &seq).expect("sites in range")
    }

    pub fn z_on(&self, sites: &[usize], power: u8) -> WeylOperator {
        let seq: Vec<QuditFactor> = sites.iter().map(|&s| QuditFactor::z(s, power)).collect();
        ordered_product(self.d(), self.n(), &seq).expect("sites in range")
    }

    pub fn info(&self) -> CodeInfo {
        let mut generator_counts = BTreeMap::new();
        let mut family_ranks = BTreeMap::new();
        for f in self.families() {
            let gens = self.family(&f);
            generator_counts.insert(f.clone(), gens.len());
            let rank = StabilizerGroup::new(self.d(), self.n(), gens).map(|g| g.rank()).unwrap_or(0);
            family_ranks.insert(f, rank);
        }
        CodeInfo {
            kind: self.kind.name(),
            d: self.d(),
            n: self.n(),
            generator_counts,
            family_ranks,
            rank: self.group.rank(),
            ground_space_log_dim: self.group.ground_space_log_dim(),
        }
    }
}

fn css_generators(c: &CellComplex, p: usize) -> Vec<(GeneratorLabel, WeylOperator)> {
    let n = c.num_cells(p);
    let mut gens = Vec::new();
    for v in 0..c.num_cells(p - 1) {
        let seq: Vec<QuditFactor> = c.coboundary_of(p - 1, v).iter().map(|&s| QuditFactor::z(s, 1)).collect();
        let label = GeneratorLabel { family: "Z".into(), cell_degree: p - 1, cell: v };
        gens.push((label, ordered_product(2, n, &seq).expect("in range")));
    }
    for f in 0..c.num_cells(p + 1) {
        let seq: Vec<QuditFactor> = c.boundary_of(p + 1, f).iter().map(|&s| QuditFactor::x(s, 1)).collect();
        let label = GeneratorLabel { family: "X".into(), cell_degree: p + 1, cell: f };
        gens.push((label, ordered_product(2, n, &seq).expect("in range")));
    }
    gens
}

/// Qubits on p-cells; Z stabilizers are coboundaries of (p−1)-cells and
/// X stabilizers are boundaries of (p+1)-cells.
pub fn homological_css(c: &Arc<CellComplex>, p: usize) -> Result<CodeInstance> {
    if p == 0 || p >= c.top() {
        return Err(Error::InvalidParameter(format!("degree {p} must lie in 1..={}", c.top().saturating_sub(1))));
    }
    CodeInstance::build(CodeKind::Homological(p), c.clone(), p, 2, css_generators(c, p))
}

fn relabel(gens: &mut [(GeneratorLabel, WeylOperator)], z_name: &str, x_name: &str) {
    for (l, _) in gens.iter_mut() {
        l.family = if l.family == "Z" { z_name.into() } else { x_name.into() };
    }
}

/// `A_v = Π Z` on the star of `v`, `B_p = Π X` around `p`, built from lattice coordinates.
pub fn toric_code_2d(l: usize) -> Result<CodeInstance> {
    let c = Arc::new(build_torus(&[l, l])?);
    let n = c.num_cells(1);
    let e = |pos: [i64; 3], axis: usize| c.edge(pos, axis).expect("periodic lattice");
    let mut gens = Vec::new();
    for v in 0..c.num_cells(0) {
        let [x, y, _] = c.coord(0, v).expect("lattice").pos;
        let star = [e([x, y, 0], 0), e([x - 1, y, 0], 0), e([x, y, 0], 1), e([x, y - 1, 0], 1)];
        let seq: Vec<QuditFactor> = star.iter().map(|&s| QuditFactor::z(s, 1)).collect();
        gens.push((GeneratorLabel { family: "A_v".into(), cell_degree: 0, cell: v }, ordered_product(2, n, &seq)?));
    }
    for p in 0..c.num_cells(2) {
        let [x, y, _] = c.coord(2, p).expect("lattice").pos;
        let edges = [e([x, y, 0], 0), e([x, y + 1, 0], 0), e([x, y, 0], 1), e([x + 1, y, 0], 1)];
        let seq: Vec<QuditFactor> = edges.iter().map(|&s| QuditFactor::x(s, 1)).collect();
        gens.push((GeneratorLabel { family: "B_p".into(), cell_degree: 2, cell: p }, ordered_product(2, n, &seq)?));
    }
    CodeInstance::build(CodeKind::Toric2D, c, 1, 2, gens)
}

/// Qubits on faces: `A_e = Π Z` over faces containing `e`, `B_c = Π X` over faces of `c`.
pub fn toric_code_3d_faces(l: usize) -> Result<CodeInstance> {
    let c = Arc::new(build_torus_3d(l)?);
    let mut gens = css_generators(&c, 2);
    relabel(&mut gens, "A_e", "B_c");
    CodeInstance::build(CodeKind::Toric3DFaces, c, 2, 2, gens)
}

/// Qubits on edges: `A_v = Π Z` on the star, `B_f = Π X` around each face.
pub fn toric_code_3d_edges(l: usize) -> Result<CodeInstance> {
    let c = Arc::new(build_torus_3d(l)?);
    let mut gens = css_generators(&c, 1);
    relabel(&mut gens, "A_v", "B_f");
    CodeInstance::build(CodeKind::Toric3DEdges, c, 1, 2, gens)
}

/// Z-type dual loops winding around the 2D torus: vertical edges along the
/// row `y = 0` and horizontal edges along the column `x = 0`.
pub fn toric_z_windings(code: &CodeInstance) -> Result<Vec<WeylOperator>> {
    if code.kind != CodeKind::Toric2D {
        return Err(Error::InvalidParameter(format!("winding loops need a toric2d code, got {}", code.kind.name())));
    }
    let c = code.complex();
    let [lx, ly, _] = c.period().expect("torus");
    let row: Vec<usize> = (0..lx).map(|x| c.edge([x, 0, 0], 1).expect("periodic lattice")).collect();
    let col: Vec<usize> = (0..ly).map(|y| c.edge([0, y, 0], 0).expect("periodic lattice")).collect();
    Ok(vec![code.z_on(&row, 1), code.z_on(&col, 1)])
}

/// Edge sites of the 12 edges of the cube based at `pos`.
pub fn cube_edges(c: &CellComplex, pos: [i64; 3]) -> Vec<usize> {
    let mut out = Vec::with_capacity(12);
    for a in 0..3 {
        let (b, d) = ((a + 1) % 3, (a + 2) % 3);
        for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let mut p = pos;
            p[b] += i;
            p[d] += j;
            out.push(c.edge(p, a).expect("periodic lattice"));
        }
    }
    out
}

/// Edges at vertex `v` perpendicular to axis `mu`.
pub fn planar_star(c: &CellComplex, v: [i64; 3], mu: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(4);
    for a in (0..3).filter(|&a| a != mu) {
        let mut back = v;
        back[a] -= 1;
        out.push(c.edge(v, a).expect("periodic lattice"));
        out.push(c.edge(back, a).expect("periodic lattice"));
    }
    out
}

/// X-cube model: `A_c = Π Z` on the 12 cube edges, `B_v^μ = Π X` on the planar star ⊥ μ.
pub fn xcube(l: usize) -> Result<CodeInstance> {
    let c = Arc::new(build_torus_3d(l)?);
    let n = c.num_cells(1);
    let mut gens = Vec::new();
    for cube in 0..c.num_cells(3) {
        let pos = c.coord(3, cube).expect("lattice").pos;
        let seq: Vec<QuditFactor> = cube_edges(&c, pos).into_iter().map(|s| QuditFactor::z(s, 1)).collect();
        gens.push((GeneratorLabel { family: "A_c".into(), cell_degree: 3, cell: cube }, ordered_product(2, n, &seq)?));
    }
    for v in 0..c.num_cells(0) {
        let pos = c.coord(0, v).expect("lattice").pos;
        for (mu, name) in ["B_v^x", "B_v^y", "B_v^z"].iter().enumerate() {
            let seq: Vec<QuditFactor> = planar_star(&c, pos, mu).into_iter().map(|s| QuditFactor::x(s, 1)).collect();
            gens.push((GeneratorLabel { family: (*name).into(), cell_degree: 0, cell: v }, ordered_product(2, n, &seq)?));
        }
    }
    CodeInstance::build(CodeKind::XCube, c, 1, 2, gens)
}

const DS_D: u32 = 4;
// exponents of X†, Z† at d = 4
const DAG: u8 = 3;

fn ds_edge(c: &CellComplex, x: i64, y: i64, axis: usize) -> usize {
    c.edge([x, y, 0], axis).expect("periodic lattice")
}

/// Footprint of `A_v` at vertex `(x, y)` as an ordered factor list.
fn ds_vertex_factors(c: &CellComplex, x: i64, y: i64) -> Vec<QuditFactor> {
    let h = |x, y| ds_edge(c, x, y, 0);
    let v = |x, y| ds_edge(c, x, y, 1);
    vec![
        QuditFactor::x(h(x - 1, y), 1),
        // X† Z on the east edge
        QuditFactor::z(h(x, y), 1),
        QuditFactor::x(h(x, y), DAG),
        QuditFactor::x(v(x, y - 1), 1),
        // X† Z† on the north edge
        QuditFactor::z(v(x, y), DAG),
        QuditFactor::x(v(x, y), DAG),
        QuditFactor::z(h(x, y + 1), DAG),
        QuditFactor::z(v(x + 1, y), 1),
    ]
}

/// Double-semion stabilizer code on an `lx × ly` torus of 4-level qudits.
///
/// Horizontal edges point along +x and vertical edges along +y. `A_v` acts on
/// six edges around `v`, `B_p = Π Z²` on the plaquette, and `C_e` pairs `X_e²`
/// with `Z²` on the edge entering the tail of `e` from below (horizontal `e`)
/// or from the left (vertical `e`).
pub fn double_semion(lx: usize, ly: usize) -> Result<CodeInstance> {
    if lx < 2 || ly < 2 {
        return Err(Error::InvalidParameter(format!(
            "double-semion torus {lx}x{ly} is too small for the vertex footprint"
        )));
    }
    let c = Arc::new(build_torus(&[lx, ly])?);
    let n = c.num_cells(1);
    let mut gens = Vec::new();
    for vtx in 0..c.num_cells(0) {
        let [x, y, _] = c.coord(0, vtx).expect("lattice").pos;
        let seq = ds_vertex_factors(&c, x, y);
        let label = GeneratorLabel { family: "A_v".into(), cell_degree: 0, cell: vtx };
        gens.push((label, ordered_product(DS_D, n, &seq)?));
    }
    for p in 0..c.num_cells(2) {
        let [x, y, _] = c.coord(2, p).expect("lattice").pos;
        let edges = [ds_edge(&c, x, y, 0), ds_edge(&c, x, y + 1, 0), ds_edge(&c, x, y, 1), ds_edge(&c, x + 1, y, 1)];
        let seq: Vec<QuditFactor> = edges.iter().map(|&s| QuditFactor::z(s, 2)).collect();
        gens.push((GeneratorLabel { family: "B_p".into(), cell_degree: 2, cell: p }, ordered_product(DS_D, n, &seq)?));
    }
    for e in 0..c.num_cells(1) {
        let cell = c.coord(1, e).expect("lattice");
        let [x, y, _] = cell.pos;
        let partner = if cell.mask == 1 { ds_edge(&c, x, y - 1, 1) } else { ds_edge(&c, x - 1, y, 0) };
        let seq = [QuditFactor::x(e, 2), QuditFactor::z(partner, 2)];
        gens.push((GeneratorLabel { family: "C_e".into(), cell_degree: 1, cell: e }, ordered_product(DS_D, n, &seq)?));
    }
    CodeInstance::build(CodeKind::DoubleSemion, c, 1, DS_D, gens)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
}

impl Step {
    pub fn delta(self) -> [i64; 2] {
        match self {
            Step::PlusX => [1, 0],
            Step::MinusX => [-1, 0],
            Step::PlusY => [0, 1],
            Step::MinusY => [0, -1],
        }
    }

    pub fn reversed(self) -> Step {
        match self {
            Step::PlusX => Step::MinusX,
            Step::MinusX => Step::PlusX,
            Step::PlusY => Step::MinusY,
            Step::MinusY => Step::PlusY,
        }
    }

    fn from_delta(d: [i64; 2]) -> Option<Step> {
        match d {
            [1, 0] => Some(Step::PlusX),
            [-1, 0] => Some(Step::MinusX),
            [0, 1] => Some(Step::PlusY),
            [0, -1] => Some(Step::MinusY),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathLattice {
    /// Steps between vertices along edges.
    Direct,
    /// Steps between plaquettes across edges.
    Dual,
}

/// Directed path on the square lattice or its dual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub lattice: PathLattice,
    /// Starting vertex, or starting plaquette for dual paths.
    pub start: [i64; 2],
    pub steps: Vec<Step>,
}

impl LatticePath {
    pub fn new(lattice: PathLattice, start: [i64; 2], steps: Vec<Step>) -> Self {
        LatticePath { lattice, start, steps }
    }

    /// Path through the listed vertices (or plaquettes); neighbours must be adjacent.
    pub fn through(lattice: PathLattice, points: &[[i64; 2]]) -> Result<Self> {
        let start = *points.first().ok_or_else(|| Error::Geometry("empty path".into()))?;
        let steps = points
            .windows(2)
            .map(|w| {
                Step::from_delta([w[1][0] - w[0][0], w[1][1] - w[0][1]])
                    .ok_or_else(|| Error::Geometry(format!("path jumps from {:?} to {:?}", w[0], w[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LatticePath { lattice, start, steps })
    }

    pub fn end(&self) -> [i64; 2] {
        self.steps.iter().fold(self.start, |p, s| {
            let d = s.delta();
            [p[0] + d[0], p[1] + d[1]]
        })
    }

    pub fn reversed(&self) -> LatticePath {
        LatticePath {
            lattice: self.lattice,
            start: self.end(),
            steps: self.steps.iter().rev().map(|s| s.reversed()).collect(),
        }
    }

    /// Each step as (position before the step, step).
    pub fn walk(&self) -> Vec<([i64; 2], Step)> {
        let mut p = self.start;
        let mut out = Vec::with_capacity(self.steps.len());
        for &s in &self.steps {
            out.push((p, s));
            let d = s.delta();
            p = [p[0] + d[0], p[1] + d[1]];
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Anyon {
    S,
    SBar,
    SSBar,
}

/// Factors of `W^s` (or `W^s̄`) for one dual step out of plaquette `(x, y)`.
fn ds_dual_step(c: &CellComplex, at: [i64; 2], step: Step, bar: bool) -> [QuditFactor; 2] {
    let [x, y] = at;
    // X on the crossed edge; s̄ swaps X and X†
    let xp = |pow: u8| if bar { (DS_D as u8 - pow) % DS_D as u8 } else { pow };
    match step {
        Step::PlusX => {
            let (ex, ez) = (ds_edge(c, x + 1, y, 1), ds_edge(c, x + 1, y + 1, 0));
            [QuditFactor::x(ex, xp(1)), QuditFactor::z(ez, 1)]
        }
        Step::MinusX => {
            let (ex, ez) = (ds_edge(c, x, y, 1), ds_edge(c, x, y + 1, 0));
            [QuditFactor::x(ex, xp(DAG)), QuditFactor::z(ez, DAG)]
        }
        Step::PlusY => {
            let (ex, ez) = (ds_edge(c, x, y + 1, 0), ds_edge(c, x + 1, y + 1, 1));
            [QuditFactor::x(ex, xp(DAG)), QuditFactor::z(ez, 1)]
        }
        Step::MinusY => {
            let (ex, ez) = (ds_edge(c, x, y, 0), ds_edge(c, x + 1, y, 1));
            [QuditFactor::x(ex, xp(1)), QuditFactor::z(ez, DAG)]
        }
    }
}

fn ds_direct_edge(c: &CellComplex, at: [i64; 2], step: Step) -> usize {
    let [x, y] = at;
    match step {
        Step::PlusX => ds_edge(c, x, y, 0),
        Step::MinusX => ds_edge(c, x - 1, y, 0),
        Step::PlusY => ds_edge(c, x, y, 1),
        Step::MinusY => ds_edge(c, x, y - 1, 1),
    }
}

/// String operator `W_{e_k} ⋯ W_{e_1}` along `path`.
///
/// `s` and `s̄` live on dual paths. `ss̄` is `Π Z_e²` on a direct path, or
/// `W^s_e W^s̄_e` per step on a dual path.
pub fn ds_string(code: &CodeInstance, anyon: Anyon, path: &LatticePath) -> Result<WeylOperator> {
    if code.kind != CodeKind::DoubleSemion {
        return Err(Error::InvalidParameter(format!("string operators need a double-semion code, got {}", code.kind.name())));
    }
    let c = code.complex();
    let n = code.n();
    let mut seq = Vec::new();
    match (anyon, path.lattice) {
        (Anyon::S | Anyon::SBar, PathLattice::Dual) => {
            for (at, step) in path.walk() {
                seq.extend(ds_dual_step(c, at, step, anyon == Anyon::SBar));
            }
        }
        (Anyon::SSBar, PathLattice::Direct) => {
            for (at, step) in path.walk() {
                seq.push(QuditFactor::z(ds_direct_edge(c, at, step), 2));
            }
        }
        (Anyon::SSBar, PathLattice::Dual) => {
            for (at, step) in path.walk() {
                let (s, sb) = (ds_dual_step(c, at, step, false), ds_dual_step(c, at, step, true));
                seq.extend(s.into_iter().chain(sb));
            }
        }
        (_, PathLattice::Direct) => {
            return Err(Error::Geometry("s and s-bar strings run along dual paths".into()));
        }
    }
    ordered_product(DS_D, n, &seq)
}

/// Counterclockwise dual loop around vertex `(x, y)`, starting in the plaquette to its south-east.
pub fn ds_vertex_loop(x: i64, y: i64) -> LatticePath {
    LatticePath::new(PathLattice::Dual, [x, y - 1], vec![Step::PlusY, Step::MinusX, Step::MinusY, Step::PlusX])
}

/// Relative phase of the two exchange processes for three dual strings
/// leaving a common plaquette along −x, +y and +x (clockwise).
///
/// With `W_1, W_2, W_3` the three strings, the processes `W_3 W_2† W_1` and
/// `W_1 W_2† W_3` act on `W_2|ψ⟩`; the result is `⟨ψ|W_2† B† A W_2|ψ⟩`.
pub fn exchange_statistics(code: &CodeInstance, anyon: Anyon) -> Result<RootOfUnity> {
    if code.kind != CodeKind::DoubleSemion {
        return Err(Error::InvalidParameter("exchange statistics need a double-semion code".into()));
    }
    let period = code.complex().period().expect("torus");
    let len = ((period[0].min(period[1]) - 1) / 2).clamp(1, 2) as usize;
    let origin = [0, 0];
    let string = |step: Step| ds_string(code, anyon, &LatticePath::new(PathLattice::Dual, origin, vec![step; len]));
    let w1 = string(Step::MinusX)?;
    let w2 = string(Step::PlusY)?;
    let w3 = string(Step::PlusX)?;
    let a = w3.multiply(&w2.dagger())?.multiply(&w1)?;
    let b = w1.multiply(&w2.dagger())?.multiply(&w3)?;
    let overlap = w2.dagger().multiply(&b.dagger())?.multiply(&a)?.multiply(&w2)?;
    match code.group().expectation(&overlap)? {
        Expectation::Definite(phase) => Ok(phase),
        other => Err(Error::NotDefinite(format!("exchange overlap is {other}"))),
    }
}
