//! Chain complexes over GF(2), cubic cellulations of tori and boxes, and
//! plane graphs given by rotation systems.

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

/// Boundary maps `∂_i: C_i → C_{i-1}` for `i = 1..=top`.
///
/// `∂_i` is stored as a `dims[i-1] × dims[i]` matrix, so column `j` lists the
/// boundary of cell `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainComplex {
    dims: Vec<usize>,
    boundary: Vec<BitMatrix>,
}

impl ChainComplex {
    pub fn new(dims: Vec<usize>, boundary: Vec<BitMatrix>) -> Result<Self> {
        if dims.is_empty() || boundary.len() + 1 != dims.len() {
            return Err(Error::Geometry(format!(
                "{} cell counts need {} boundary maps, got {}",
                dims.len(),
                dims.len().saturating_sub(1),
                boundary.len()
            )));
        }
        for (i, b) in boundary.iter().enumerate() {
            if b.nrows() != dims[i] || b.ncols() != dims[i + 1] {
                return Err(Error::Geometry(format!(
                    "boundary[{}] has shape {}x{}, expected {}x{}",
                    i + 1,
                    b.nrows(),
                    b.ncols(),
                    dims[i],
                    dims[i + 1]
                )));
            }
        }
        for i in 1..boundary.len() {
            if !boundary[i - 1].mul(&boundary[i]).is_zero() {
                return Err(Error::Geometry(format!("boundary[{i}] * boundary[{}] is nonzero", i + 1)));
            }
        }
        Ok(ChainComplex { dims, boundary })
    }

    /// Top degree.
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, i: usize) -> usize {
        self.dims.get(i).copied().unwrap_or(0)
    }

    /// `∂_i`; the zero map for `i = 0` and `i > top`.
    pub fn boundary(&self, i: usize) -> BitMatrix {
        if i == 0 || i > self.top() {
            BitMatrix::zeros(if i == 0 { 0 } else { self.dim(i - 1) }, self.dim(i))
        } else {
            self.boundary[i - 1].clone()
        }
    }

    /// `δ_i = ∂_{i+1}ᵀ: C_i → C_{i+1}`.
    pub fn coboundary(&self, i: usize) -> BitMatrix {
        self.boundary(i + 1).transpose()
    }

    pub fn boundary_rank(&self, i: usize) -> usize {
        if i == 0 || i > self.top() {
            0
        } else {
            self.boundary[i - 1].rank()
        }
    }

    /// `dim ker ∂_i − rank ∂_{i+1}`.
    pub fn homology_dim(&self, i: usize) -> usize {
        if i > self.top() {
            return 0;
        }
        self.dim(i) - self.boundary_rank(i) - self.boundary_rank(i + 1)
    }

    /// `dim ker δ_i − rank δ_{i−1}`, computed from the transposed maps.
    pub fn cohomology_dim(&self, i: usize) -> usize {
        if i > self.top() {
            return 0;
        }
        let up = self.coboundary(i).rank();
        let down = if i == 0 { 0 } else { self.coboundary(i - 1).rank() };
        self.dim(i) - up - down
    }

    pub fn euler_characteristic(&self) -> i64 {
        alternating(self.dims.iter().copied())
    }

    pub fn betti(&self) -> Vec<usize> {
        (0..=self.top()).map(|i| self.homology_dim(i)).collect()
    }

    /// Σ(−1)^i dim C_i == Σ(−1)^i dim H_i.
    pub fn euler_check(&self) -> bool {
        self.euler_characteristic() == alternating(self.betti().into_iter())
    }
}

fn alternating(it: impl Iterator<Item = usize>) -> i64 {
    it.enumerate().map(|(i, c)| if i % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
}

/// A cell of a cubic lattice: base corner plus the set of axes it spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeCell {
    pub pos: [i64; 3],
    pub mask: u8,
}

impl LatticeCell {
    pub fn new(pos: [i64; 3], mask: u8) -> Self {
        LatticeCell { pos, mask }
    }

    pub fn degree(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(move |a| self.mask & (1 << a) != 0)
    }

    pub fn shifted(&self, delta: [i64; 3]) -> Self {
        LatticeCell { pos: [self.pos[0] + delta[0], self.pos[1] + delta[1], self.pos[2] + delta[2]], mask: self.mask }
    }
}

pub const AX_X: u8 = 1;
pub const AX_Y: u8 = 2;
pub const AX_Z: u8 = 4;

fn mask_vector(mask: u8) -> [i64; 3] {
    [(mask & 1) as i64, ((mask >> 1) & 1) as i64, ((mask >> 2) & 1) as i64]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    /// Periodic cubic lattice.
    Torus,
    /// Closed and sphere-like, e.g. a box of cells plus one unbounded cell.
    Sphere,
    /// Has boundary.
    Open,
}

impl Topology {
    pub fn is_closed(self) -> bool {
        !matches!(self, Topology::Open)
    }
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    top: usize,
    faces: Vec<Vec<Vec<usize>>>,
    cofaces: Vec<Vec<Vec<usize>>>,
    coords: Vec<Vec<Option<LatticeCell>>>,
    lookup: HashMap<LatticeCell, usize>,
    period: Option<[i64; 3]>,
    dual_lattice: bool,
    topology: Topology,
    chain: ChainComplex,
}

impl CellComplex {
    /// `faces[k][i]` lists the (k−1)-cells on the boundary of k-cell `i`;
    /// `faces[0]` must contain one empty list per vertex.
    pub fn from_faces(faces: Vec<Vec<Vec<usize>>>, topology: Topology) -> Result<Self> {
        let coords = faces.iter().map(|f| vec![None; f.len()]).collect();
        Self::assemble(faces, coords, None, false, topology)
    }

    pub fn from_chain(chain: &ChainComplex, topology: Topology) -> Result<Self> {
        let mut faces = vec![vec![Vec::new(); chain.dim(0)]];
        for k in 1..=chain.top() {
            let b = chain.boundary(k);
            faces.push((0..chain.dim(k)).map(|j| b.column(j).iter_ones().collect()).collect());
        }
        Self::from_faces(faces, topology)
    }

    fn assemble(
        faces: Vec<Vec<Vec<usize>>>,
        coords: Vec<Vec<Option<LatticeCell>>>,
        period: Option<[i64; 3]>,
        dual_lattice: bool,
        topology: Topology,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::Geometry("complex has no cells".into()));
        }
        let top = faces.len() - 1;
        let dims: Vec<usize> = faces.iter().map(Vec::len).collect();
        // mod 2: repeated incidences cancel
        let mut reduced: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); dims[0]]];
        for (k, fk) in faces.iter().enumerate().skip(1) {
            let mut rk = Vec::with_capacity(fk.len());
            for (j, fs) in fk.iter().enumerate() {
                if let Some(&f) = fs.iter().find(|&&f| f >= dims[k - 1]) {
                    return Err(Error::Geometry(format!("{k}-cell {j} references missing {}-cell {f}", k - 1)));
                }
                let mut sorted = fs.clone();
                sorted.sort_unstable();
                let mut odd = Vec::with_capacity(sorted.len());
                for f in sorted {
                    if odd.last() == Some(&f) {
                        odd.pop();
                    } else {
                        odd.push(f);
                    }
                }
                rk.push(odd);
            }
            reduced.push(rk);
        }
        let faces = reduced;
        let mut cofaces: Vec<Vec<Vec<usize>>> = dims.iter().map(|&c| vec![Vec::new(); c]).collect();
        let mut boundary = Vec::with_capacity(top);
        for k in 1..=top {
            let mut m = BitMatrix::zeros(dims[k - 1], dims[k]);
            for (j, fs) in faces[k].iter().enumerate() {
                for &f in fs {
                    m.set(f, j, true);
                    cofaces[k - 1][f].push(j);
                }
            }
            boundary.push(m);
        }
        let chain = ChainComplex::new(dims, boundary)?;
        let mut lookup = HashMap::new();
        for cs in &coords {
            for (i, c) in cs.iter().enumerate() {
                if let Some(c) = c {
                    lookup.insert(*c, i);
                }
            }
        }
        Ok(CellComplex { top, faces, cofaces, coords, lookup, period, dual_lattice, topology, chain })
    }

    fn from_lattice_cells(
        top: usize,
        mut cells: Vec<Vec<LatticeCell>>,
        unbounded: bool,
        period: Option<[i64; 3]>,
        topology: Topology,
    ) -> Result<Self> {
        for cs in cells.iter_mut() {
            cs.sort_by_key(|c| (c.pos, mask_rank(c.mask)));
        }
        let mut lookup = HashMap::new();
        for cs in &cells {
            for (i, c) in cs.iter().enumerate() {
                lookup.insert(*c, i);
            }
        }
        let wrap = |c: LatticeCell| -> LatticeCell {
            LatticeCell { pos: wrap_pos(c.pos, period), mask: c.mask }
        };
        let mut faces: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); cells[0].len()]];
        for k in 1..=top {
            let mut fk = Vec::with_capacity(cells[k].len());
            for c in &cells[k] {
                let mut fs = Vec::with_capacity(2 * k);
                for a in c.axes() {
                    let m = c.mask & !(1 << a);
                    let mut step = [0i64; 3];
                    step[a] = 1;
                    for lower in [LatticeCell::new(c.pos, m), LatticeCell::new(c.pos, m).shifted(step)] {
                        let idx = lookup
                            .get(&wrap(lower))
                            .ok_or_else(|| Error::Geometry(format!("missing boundary cell {lower:?}")))?;
                        fs.push(*idx);
                    }
                }
                fk.push(fs);
            }
            faces.push(fk);
        }
        let mut coords: Vec<Vec<Option<LatticeCell>>> =
            cells.iter().map(|cs| cs.iter().map(|c| Some(*c)).collect()).collect();
        if unbounded {
            // boundary of the unbounded top cell: every (top-1)-cell with a single top-cell coface
            let mut count = vec![0usize; cells[top - 1].len()];
            for fs in &faces[top] {
                for &f in fs {
                    count[f] += 1;
                }
            }
            let outer: Vec<usize> = (0..count.len()).filter(|&f| count[f] == 1).collect();
            faces[top].push(outer);
            coords[top].push(None);
        }
        Self::assemble(faces, coords, period, false, topology)
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_closed(&self) -> bool {
        self.topology.is_closed()
    }

    pub fn chain(&self) -> &ChainComplex {
        &self.chain
    }

    pub fn dims(&self) -> &[usize] {
        self.chain.dims()
    }

    pub fn num_cells(&self, k: usize) -> usize {
        self.chain.dim(k)
    }

    pub fn boundary_of(&self, k: usize, i: usize) -> &[usize] {
        &self.faces[k][i]
    }

    pub fn coboundary_of(&self, k: usize, i: usize) -> &[usize] {
        &self.cofaces[k][i]
    }

    /// Lattice extents for periodic complexes (1 on unused axes).
    pub fn period(&self) -> Option<[i64; 3]> {
        self.period
    }

    /// Whether coordinates refer to the half-shifted (dual) lattice.
    pub fn on_dual_lattice(&self) -> bool {
        self.dual_lattice
    }

    pub fn coord(&self, k: usize, i: usize) -> Option<LatticeCell> {
        self.coords.get(k).and_then(|c| c.get(i)).copied().flatten()
    }

    /// Index of the cell at `pos` spanning `mask`, wrapping periodically.
    pub fn cell(&self, pos: [i64; 3], mask: u8) -> Option<usize> {
        let pos = wrap_pos(pos, self.period);
        self.lookup.get(&LatticeCell { pos, mask }).copied()
    }

    pub fn vertex(&self, pos: [i64; 3]) -> Option<usize> {
        self.cell(pos, 0)
    }

    pub fn edge(&self, pos: [i64; 3], axis: usize) -> Option<usize> {
        self.cell(pos, 1 << axis)
    }

    /// The unbounded top cell of a sphere-like box complex.
    pub fn unbounded_cell(&self) -> Option<usize> {
        match self.topology {
            Topology::Sphere => (0..self.num_cells(self.top)).find(|&i| self.coord(self.top, i).is_none()),
            _ => None,
        }
    }

    /// Dual complex: dual k-cell `j` is primal (top−k)-cell `j`.
    pub fn dualize(&self) -> Result<CellComplex> {
        if !self.is_closed() {
            return Err(Error::Geometry("dual complex requires a closed manifold".into()));
        }
        let d = self.top;
        let full: u8 = (1u8 << d) - 1;
        let faces: Vec<Vec<Vec<usize>>> = (0..=d)
            .map(|k| {
                let primal = d - k;
                if k == 0 {
                    vec![Vec::new(); self.num_cells(primal)]
                } else {
                    self.cofaces[primal].clone()
                }
            })
            .collect();
        let coords = (0..=d)
            .map(|k| {
                self.coords[d - k]
                    .iter()
                    .map(|c| {
                        c.map(|c| {
                            let new_mask = full & !c.mask;
                            let pos = if self.dual_lattice {
                                let v = mask_vector(c.mask);
                                [c.pos[0] + v[0], c.pos[1] + v[1], c.pos[2] + v[2]]
                            } else {
                                let v = mask_vector(new_mask);
                                [c.pos[0] - v[0], c.pos[1] - v[1], c.pos[2] - v[2]]
                            };
                            let pos = wrap_pos(pos, self.period);
                            LatticeCell { pos, mask: new_mask }
                        })
                    })
                    .collect()
            })
            .collect();
        Self::assemble(faces, coords, self.period, !self.dual_lattice, self.topology)
    }

    /// Line-oriented text: `topology`, `cells[k] N`, and `boundary[k]` sections.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let topo = match self.topology {
            Topology::Torus => "torus",
            Topology::Sphere => "sphere",
            Topology::Open => "open",
        };
        let _ = writeln!(s, "topology {topo}");
        for k in 0..=self.top {
            let _ = writeln!(s, "cells[{k}] {}", self.num_cells(k));
        }
        for k in 1..=self.top {
            let _ = writeln!(s, "boundary[{k}]");
            for (i, fs) in self.faces[k].iter().enumerate() {
                let list: Vec<String> = fs.iter().map(usize::to_string).collect();
                let _ = writeln!(s, "{i}: {}", list.join(" "));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CellComplex> {
        let mut topology = Topology::Open;
        let mut counts: Vec<(usize, usize)> = Vec::new();
        let mut lists: HashMap<usize, Vec<Option<Vec<usize>>>> = HashMap::new();
        let mut section: Option<usize> = None;
        let bad = |line: &str| Error::Parse(format!("complex file: unexpected line {line:?}"));
        let bracket = |s: &str, head: &str| -> Option<usize> {
            s.strip_prefix(head)?.strip_prefix('[')?.strip_suffix(']')?.parse().ok()
        };
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(t) = line.strip_prefix("topology") {
                topology = match t.trim() {
                    "torus" => Topology::Torus,
                    "sphere" => Topology::Sphere,
                    "open" => Topology::Open,
                    _ => return Err(bad(line)),
                };
                continue;
            }
            let mut words = line.split_whitespace();
            let head = words.next().unwrap_or("");
            if let Some(k) = bracket(head, "cells") {
                let n: usize = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| bad(line))?;
                counts.push((k, n));
                section = None;
                continue;
            }
            if let Some(k) = bracket(head, "boundary") {
                if k == 0 {
                    return Err(bad(line));
                }
                section = Some(k);
                continue;
            }
            let k = section.ok_or_else(|| bad(line))?;
            let (idx, rest) = line.split_once(':').ok_or_else(|| bad(line))?;
            let idx: usize = idx.trim().parse().map_err(|_| bad(line))?;
            let fs = rest
                .split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| bad(line)))
                .collect::<Result<Vec<_>>>()?;
            let entry = lists.entry(k).or_default();
            if entry.len() <= idx {
                entry.resize(idx + 1, None);
            }
            if entry[idx].replace(fs).is_some() {
                return Err(Error::Parse(format!("boundary[{k}] lists cell {idx} twice")));
            }
        }
        counts.sort();
        let top = counts.len().checked_sub(1).ok_or_else(|| Error::Parse("no cells[k] sections".into()))?;
        for (expect, (k, _)) in counts.iter().enumerate() {
            if *k != expect {
                return Err(Error::Parse(format!("cells[{expect}] missing")));
            }
        }
        let mut faces = vec![vec![Vec::new(); counts[0].1]];
        for k in 1..=top {
            let n = counts[k].1;
            let given = lists.remove(&k).unwrap_or_default();
            if given.len() > n {
                return Err(Error::Parse(format!("boundary[{k}] lists more than {n} cells")));
            }
            let mut fk = Vec::with_capacity(n);
            for i in 0..n {
                fk.push(
                    given
                        .get(i)
                        .cloned()
                        .flatten()
                        .ok_or_else(|| Error::Parse(format!("boundary[{k}] missing cell {i}")))?,
                );
            }
            faces.push(fk);
        }
        if let Some(k) = lists.keys().next() {
            return Err(Error::Parse(format!("boundary[{k}] has no matching cells[{k}]")));
        }
        Self::from_faces(faces, topology)
    }
}

fn mask_rank(mask: u8) -> (u32, u8) {
    (mask.count_ones(), mask)
}

fn masks(dim: usize, k: usize) -> Vec<u8> {
    let mut ms: Vec<u8> = (0..(1u8 << dim)).filter(|m| m.count_ones() as usize == k).collect();
    ms.sort_by_key(|&m| mask_rank(m));
    ms
}

fn lattice_points(extent: [i64; 3]) -> impl Iterator<Item = [i64; 3]> {
    (0..extent[0]).flat_map(move |x| (0..extent[1]).flat_map(move |y| (0..extent[2]).map(move |z| [x, y, z])))
}

fn wrap_pos(pos: [i64; 3], period: Option<[i64; 3]>) -> [i64; 3] {
    match period {
        Some(l) => [pos[0].rem_euclid(l[0]), pos[1].rem_euclid(l[1]), pos[2].rem_euclid(l[2])],
        None => pos,
    }
}

/// Periodic cubic lattice with the given extents (2 or 3 axes, each at least 2).
pub fn build_torus(sizes: &[usize]) -> Result<CellComplex> {
    let dim = sizes.len();
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidParameter(format!("torus needs 2 or 3 extents, got {}", dim)));
    }
    if let Some(l) = sizes.iter().find(|&&l| l < 2) {
        return Err(Error::InvalidParameter(format!("torus side {l} must be at least 2")));
    }
    let mut extent = [1i64; 3];
    for (a, &l) in sizes.iter().enumerate() {
        extent[a] = l as i64;
    }
    let cells = (0..=dim)
        .map(|k| {
            let ms = masks(dim, k);
            lattice_points(extent).flat_map(|p| ms.iter().map(move |&m| LatticeCell::new(p, m))).collect()
        })
        .collect();
    CellComplex::from_lattice_cells(dim, cells, false, Some(extent), Topology::Torus)
}

/// Periodic `L × L` square lattice: (L², 2L², L²) cells.
pub fn build_torus_2d(l: usize) -> Result<CellComplex> {
    build_torus(&[l, l])
}

/// Periodic `L × L × L` cubic lattice: (L³, 3L³, 3L³, L³) cells.
pub fn build_torus_3d(l: usize) -> Result<CellComplex> {
    build_torus(&[l, l, l])
}

/// Box of `sizes` unit cells (2 or 3 axes) closed off by one unbounded top cell.
pub fn build_box(sizes: &[usize]) -> Result<CellComplex> {
    let dim = sizes.len();
    if !(2..=3).contains(&dim) || sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!("box sizes {sizes:?} must be 2 or 3 positive extents")));
    }
    let mut ext = [0i64; 3];
    for (a, &s) in sizes.iter().enumerate() {
        ext[a] = s as i64;
    }
    let cells = (0..=dim)
        .map(|k| {
            let mut out = Vec::new();
            for m in masks(dim, k) {
                let v = mask_vector(m);
                let range = [
                    if dim > 0 { ext[0] + 1 - v[0] } else { 1 },
                    ext[1] + 1 - v[1],
                    if dim == 3 { ext[2] + 1 - v[2] } else { 1 },
                ];
                out.extend(lattice_points(range).map(|p| LatticeCell::new(p, m)));
            }
            out
        })
        .collect();
    CellComplex::from_lattice_cells(dim, cells, true, None, Topology::Sphere)
}

/// Planar embedding given by the cyclic order of edges around each vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaneGraph {
    rotation: Vec<Vec<usize>>,
    ends: Vec<(usize, usize)>,
    face_of: Vec<usize>,
    faces: Vec<Vec<usize>>,
}

impl PlaneGraph {
    /// Builds the graph from per-vertex cyclic edge lists; endpoints are inferred.
    pub fn from_rotation(rotation: Vec<Vec<usize>>) -> Result<Self> {
        let m = rotation.iter().flatten().map(|&e| e + 1).max().unwrap_or(0);
        let mut ends: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (v, es) in rotation.iter().enumerate() {
            for &e in es {
                ends[e].push(v);
            }
        }
        let ends = ends
            .into_iter()
            .enumerate()
            .map(|(e, vs)| match vs.as_slice() {
                [a, b] if a == b => Err(Error::Geometry(format!("edge {e} is a self-loop"))),
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::Geometry(format!("edge {e} must appear at exactly two vertices, found {}", vs.len()))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ends, rotation)
    }

    pub fn new(ends: Vec<(usize, usize)>, rotation: Vec<Vec<usize>>) -> Result<Self> {
        let nv = rotation.len();
        let mut seen = vec![0usize; ends.len()];
        for (v, es) in rotation.iter().enumerate() {
            for &e in es {
                let (a, b) = *ends.get(e).ok_or_else(|| Error::Geometry(format!("unknown edge {e}")))?;
                if a != v && b != v {
                    return Err(Error::Geometry(format!("edge {e} listed at vertex {v} but not incident")));
                }
                seen[e] += 1;
            }
        }
        for (e, &(a, b)) in ends.iter().enumerate() {
            if a == b {
                return Err(Error::Geometry(format!("edge {e} is a self-loop")));
            }
            if a >= nv || b >= nv || seen[e] != 2 {
                return Err(Error::Geometry(format!("edge {e} is not listed once at each endpoint")));
            }
        }
        let mut g = PlaneGraph { rotation, ends, face_of: Vec::new(), faces: Vec::new() };
        if !g.is_connected() {
            return Err(Error::Geometry("plane graph is disconnected".into()));
        }
        g.trace_faces();
        if g.num_vertices() + g.faces.len() != g.num_edges() + 2 {
            return Err(Error::Geometry("rotation system does not describe a planar embedding".into()));
        }
        Ok(g)
    }

    fn tail(&self, dart: usize) -> usize {
        let (a, b) = self.ends[dart / 2];
        if dart % 2 == 0 {
            a
        } else {
            b
        }
    }

    fn dart_from(&self, v: usize, e: usize) -> usize {
        if self.ends[e].0 == v {
            2 * e
        } else {
            2 * e + 1
        }
    }

    fn next_around_face(&self, dart: usize) -> usize {
        let rev = dart ^ 1;
        let v = self.tail(rev);
        let rot = &self.rotation[v];
        let pos = rot.iter().position(|&e| e == rev / 2).expect("edge listed at its endpoint");
        let next = rot[(pos + 1) % rot.len()];
        self.dart_from(v, next)
    }

    fn trace_faces(&mut self) {
        let nd = 2 * self.ends.len();
        self.face_of = vec![usize::MAX; nd];
        self.faces.clear();
        for start in 0..nd {
            if self.face_of[start] != usize::MAX {
                continue;
            }
            let f = self.faces.len();
            let mut orbit = Vec::new();
            let mut d = start;
            while self.face_of[d] == usize::MAX {
                self.face_of[d] = f;
                orbit.push(d);
                d = self.next_around_face(d);
            }
            self.faces.push(orbit);
        }
    }

    fn is_connected(&self) -> bool {
        let nv = self.rotation.len();
        if nv == 0 {
            return false;
        }
        let mut seen = vec![false; nv];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.rotation[v] {
                let (a, b) = self.ends[e];
                let w = if a == v { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn ends(&self) -> &[(usize, usize)] {
        &self.ends
    }

    pub fn rotation(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    /// Edges around each face, in traversal order.
    pub fn face_edges(&self) -> Vec<Vec<usize>> {
        self.faces.iter().map(|o| o.iter().map(|d| d / 2).collect()).collect()
    }

    /// The two faces bordering edge `e`.
    pub fn edge_faces(&self, e: usize) -> (usize, usize) {
        (self.face_of[2 * e], self.face_of[2 * e + 1])
    }

    /// Edges whose two sides lie in the same face; these become dual self-loops.
    pub fn bridges(&self) -> Vec<usize> {
        (0..self.num_edges()).filter(|&e| self.face_of[2 * e] == self.face_of[2 * e + 1]).collect()
    }

    /// Geometric dual; dual edge `e` crosses primal edge `e`.
    pub fn dual(&self) -> Result<PlaneGraph> {
        if let Some(e) = self.bridges().first() {
            return Err(Error::Geometry(format!("edge {e} is a bridge, so the dual has a self-loop")));
        }
        let ends = (0..self.num_edges()).map(|e| self.edge_faces(e)).collect();
        PlaneGraph::new(ends, self.face_edges())
    }

    /// Sphere-like 2-complex with every face, including the outer one, as a 2-cell.
    pub fn complex(&self) -> Result<CellComplex> {
        let verts = vec![Vec::new(); self.num_vertices()];
        let edges = self.ends.iter().map(|&(a, b)| vec![a, b]).collect();
        let faces = self.face_edges();
        CellComplex::from_faces(vec![verts, edges, faces], Topology::Sphere)
    }

    pub fn cycle(k: usize) -> Result<PlaneGraph> {
        if k < 2 {
            return Err(Error::InvalidParameter("cycle needs at least 2 vertices".into()));
        }
        let ends = (0..k).map(|i| (i, (i + 1) % k)).collect();
        let rotation = (0..k).map(|i| vec![(i + k - 1) % k, i]).collect();
        PlaneGraph::new(ends, rotation)
    }

    /// Two vertices joined by `k` parallel edges; dual to the k-cycle.
    pub fn dipole(k: usize) -> Result<PlaneGraph> {
        if k < 2 {
            return Err(Error::InvalidParameter("dipole needs at least 2 edges".into()));
        }
        let ends = (0..k).map(|_| (0, 1)).collect();
        let rotation = vec![(0..k).collect(), (0..k).rev().collect()];
        PlaneGraph::new(ends, rotation)
    }

    /// Hub 0 with `k` spokes to a rim cycle; 2k edges, self-dual.
    pub fn wheel(k: usize) -> Result<PlaneGraph> {
        if k < 3 {
            return Err(Error::InvalidParameter("wheel needs at least 3 spokes".into()));
        }
        // spokes 0..k, rim edges k..2k with rim edge k+i joining rim vertices i and i+1
        let mut ends: Vec<(usize, usize)> = (0..k).map(|i| (0, i + 1)).collect();
        ends.extend((0..k).map(|i| (i + 1, (i + 1) % k + 1)));
        let mut rotation = vec![(0..k).collect::<Vec<_>>()];
        for i in 0..k {
            rotation.push(vec![i, k + (i + k - 1) % k, k + i]);
        }
        PlaneGraph::new(ends, rotation)
    }

    /// Inserts an edge across face `f` between its corners `i` and `j`.
    pub fn add_chord(&self, f: usize, i: usize, j: usize) -> Result<PlaneGraph> {
        let orbit = self.faces.get(f).ok_or_else(|| Error::InvalidParameter(format!("no face {f}")))?;
        let m = orbit.len();
        if i >= m || j >= m || i == j {
            return Err(Error::InvalidParameter(format!("face {f} has corners 0..{m}; got {i}, {j}")));
        }
        let (u, v) = (self.tail(orbit[i]), self.tail(orbit[j]));
        if u == v {
            return Err(Error::Geometry("chord would be a self-loop".into()));
        }
        let new = self.num_edges();
        let mut rotation = self.rotation.clone();
        for &c in &[i, j] {
            let w = self.tail(orbit[c]);
            let out_edge = orbit[c] / 2;
            let rot = &mut rotation[w];
            let pos = rot.iter().position(|&e| e == out_edge).expect("listed");
            rot.insert(pos, new);
        }
        let mut ends = self.ends.clone();
        ends.push((u, v));
        PlaneGraph::new(ends, rotation)
    }

    /// A cycle of `k` vertices with `chords` random chords added inside faces.
    pub fn random(rng: &mut impl rand::Rng, k: usize, chords: usize) -> Result<PlaneGraph> {
        let mut g = PlaneGraph::cycle(k)?;
        let mut added = 0;
        while added < chords {
            let f = rng.gen_range(0..g.num_faces());
            let m = g.faces[f].len();
            if m < 2 {
                continue;
            }
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i == j || g.tail(g.faces[f][i]) == g.tail(g.faces[f][j]) {
                continue;
            }
            g = g.add_chord(f, i, j)?;
            added += 1;
        }
        Ok(g)
    }

    /// One `vertex: e1 e2 ...` line per vertex.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (v, es) in self.rotation.iter().enumerate() {
            let list: Vec<String> = es.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{v}: {}", list.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<PlaneGraph> {
        let mut rows: Vec<Option<Vec<usize>>> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("plane graph: unexpected line {line:?}"));
            let (v, rest) = line.split_once(':').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            let es = rest
                .split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            if rows.len() <= v {
                rows.resize(v + 1, None);
            }
            if rows[v].replace(es).is_some() {
                return Err(Error::Parse(format!("vertex {v} listed twice")));
            }
        }
        let rotation = rows
            .into_iter()
            .enumerate()
            .map(|(v, r)| r.ok_or_else(|| Error::Parse(format!("vertex {v} missing"))))
            .collect::<Result<Vec<_>>>()?;
        PlaneGraph::from_rotation(rotation)
    }
}

/// Complex of `g` and of its geometric dual, both sphere-like.
pub fn plane_graph_complex(g: &PlaneGraph) -> Result<(CellComplex, CellComplex)> {
    let dual = g.dual()?;
    Ok((g.complex()?, dual.complex()?))
}
