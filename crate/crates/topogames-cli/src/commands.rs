//! Subcommand bodies. Each returns the JSON result and its CSV table.

use crate::config::{parse_thetas, Params};
use crate::output::{num, opt_num, Table};
use anyhow::{anyhow, bail, Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::sync::Arc;
use topogames::codes::{self, CodeInstance, CodeKind};
use topogames::complex::CellComplex;
use topogames::dense::{DenseState, FieldFamily};
use topogames::games::{self, CellulationGame, EvalOptions, StrategyEvaluation};
use topogames::strategies::{self, Cellulation, CompositeOperatorSet, Tc2dLayout, XCubeVariant};
use topogames::tableau::StabilizerGroup;

pub type Output = (Value, Table);

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing --{flag}"))
}

fn ratio(r: &games::Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn ratio_f64(r: &games::Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn build_code(p: &Params) -> Result<CodeInstance> {
    let name = p.code.as_deref().ok_or_else(|| anyhow!("missing --code"))?;
    let code = match name {
        "tc2d" => codes::toric_code_2d(require(p.l, "L")?),
        "tc3d-faces" => codes::toric_code_3d_faces(require(p.l, "L")?),
        "tc3d-edges" => codes::toric_code_3d_edges(require(p.l, "L")?),
        "xcube" => codes::xcube(require(p.l, "L")?),
        "ds" => {
            let lx = p.lx.or(p.l).ok_or_else(|| anyhow!("missing --Lx or --L"))?;
            let ly = p.ly.or(p.l).ok_or_else(|| anyhow!("missing --Ly or --L"))?;
            codes::double_semion(lx, ly)
        }
        "ghz" => bail!("ghz is a reference state, not a lattice code"),
        other => bail!("unknown code `{other}`"),
    };
    code.with_context(|| format!("building code {name}"))
}

fn xcube_variant(v: Option<&str>) -> Result<XCubeVariant> {
    match v.unwrap_or("prism:2:1") {
        "cage" => Ok(XCubeVariant::Cage),
        s if s.starts_with("prism:") => {
            let parts: Vec<usize> = s[6..].split(':').map(str::parse).collect::<std::result::Result<_, _>>()
                .map_err(|_| anyhow!("variant `{s}` must be prism:AXIS:HEIGHT"))?;
            match parts[..] {
                [axis, height] => Ok(XCubeVariant::Prism { axis, height }),
                _ => bail!("variant `{s}` must be prism:AXIS:HEIGHT"),
            }
        }
        s => bail!("unknown xcube variant `{s}`"),
    }
}

/// The composite operator set named by `--ops` or by `--code` and `--variant`.
pub fn build_ops(p: &Params) -> Result<(CompositeOperatorSet, Option<CodeInstance>)> {
    if let Some(path) = &p.ops {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let ops = CompositeOperatorSet::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
        return Ok((ops, None));
    }
    let players = p.players.unwrap_or(3);
    if p.code.as_deref() == Some("ghz") {
        return Ok((strategies::ghz_ops(players)?, None));
    }
    let code = build_code(p)?;
    let ops = match code.kind {
        CodeKind::Toric2D => {
            let winding = match p.variant.as_deref().unwrap_or("contractible") {
                "contractible" => false,
                "winding" => true,
                v => bail!("unknown tc2d variant `{v}`"),
            };
            let d = Tc2dLayout::default();
            let layout = Tc2dLayout { anchor: p.anchor.unwrap_or(d.anchor), radius: p.radius.unwrap_or(d.radius), winding };
            strategies::tc2d_parity_ops(&code, players, layout)
        }
        CodeKind::Toric3DFaces => strategies::tc3d_1form_ops(&code),
        CodeKind::Toric3DEdges => strategies::tc3d_2form_ops(&code),
        CodeKind::XCube => strategies::xcube_ops(&code, xcube_variant(p.variant.as_deref())?),
        _ => bail!("no parity strategy for code {}", code.kind.name()),
    }
    .context("building strategy")?;
    if matches!(code.kind, CodeKind::Toric3DFaces | CodeKind::Toric3DEdges | CodeKind::XCube) && players != 3 {
        bail!("{} strategies have exactly 3 players", code.kind.name());
    }
    Ok((ops, Some(code)))
}

fn save_ops(p: &Params, ops: &CompositeOperatorSet) -> Result<()> {
    if let Some(path) = &p.save_ops {
        std::fs::write(path, ops.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// The unique state of the resource group; on a 2D torus the Z winding
/// loops are fixed to +1 first.
fn dense_state(p: &Params, ops: &CompositeOperatorSet, code: Option<&CodeInstance>) -> Result<DenseState> {
    let mut group: StabilizerGroup = ops.resource().clone();
    if group.ground_space_log_dim() > 0 {
        if let Some(code) = code.filter(|c| c.kind == CodeKind::Toric2D) {
            let loops: Vec<_> = codes::toric_z_windings(code)?
                .into_iter()
                .filter(|w| !matches!(group.contains(w), Ok(true)))
                .collect();
            group = group.fix_sector(&loops)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed());
    DenseState::from_group(&group, &mut rng).context("preparing the dense resource state")
}

fn eval_opts(p: &Params) -> EvalOptions {
    EvalOptions { seed: p.seed(), samples: p.samples.unwrap_or(EvalOptions::default().samples) }
}

fn evaluation_table(name: &str, ev: &StrategyEvaluation) -> Table {
    let mut t = Table::new(&["strategy", "input", "value", "win", "p_q", "mermin"]);
    for r in &ev.per_input {
        t.push(vec![name.into(), r.input.clone(), r.value.clone(), num(r.win), num(ev.p_q), opt_num(ev.mermin)]);
    }
    t
}

pub fn code_info(p: &Params) -> Result<Output> {
    let code = build_code(p)?;
    let info = code.info();
    let mut t = Table::new(&["kind", "d", "n", "family", "generators", "family_rank", "rank", "ground_space_log_dim"]);
    for (fam, count) in &info.generator_counts {
        t.push(vec![
            info.kind.clone(),
            info.d.to_string(),
            info.n.to_string(),
            fam.clone(),
            count.to_string(),
            info.family_ranks.get(fam).map(usize::to_string).unwrap_or_default(),
            info.rank.to_string(),
            info.ground_space_log_dim.to_string(),
        ]);
    }
    Ok((serde_json::to_value(&info)?, t))
}

pub fn complex_info(p: &Params) -> Result<(Output, String)> {
    let c = match &p.complex {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            CellComplex::from_text(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => (**build_code(p)?.complex()).clone(),
    };
    let chain = c.chain();
    let betti = chain.betti();
    let cohom: Vec<usize> = (0..=c.top()).map(|k| chain.cohomology_dim(k)).collect();
    let value = json!({
        "topology": format!("{:?}", c.topology()).to_lowercase(),
        "dimension": c.top(),
        "cells": c.dims(),
        "betti": betti,
        "cohomology": cohom,
        "euler_characteristic": chain.euler_characteristic(),
        "euler_check": chain.euler_check(),
    });
    let mut t = Table::new(&["degree", "cells", "betti", "cohomology"]);
    for k in 0..=c.top() {
        t.push(vec![k.to_string(), c.num_cells(k).to_string(), betti[k].to_string(), cohom[k].to_string()]);
    }
    Ok(((value, t), c.to_text()))
}

pub fn strategy_validate(p: &Params) -> Result<Output> {
    let (ops, _) = build_ops(p)?;
    save_ops(p, &ops)?;
    let report = strategies::validate(&ops);
    let mut t = Table::new(&["strategy", "check", "subject", "expected", "observed", "ok"]);
    let name = ops.name().to_string();
    for f in &report.pattern_failures {
        t.push(vec![name.clone(), "pattern".into(), f.clone(), String::new(), String::new(), "false".into()]);
    }
    for (i, ok) in report.y_hermitian.iter().enumerate() {
        t.push(vec![name.clone(), "y_hermitian".into(), format!("Y{i}"), String::new(), String::new(), ok.to_string()]);
    }
    for c in &report.constraints {
        let players: Vec<String> = c.players.iter().map(usize::to_string).collect();
        t.push(vec![
            name.clone(),
            format!("{:?}", c.kind).to_lowercase(),
            players.join(" "),
            c.expected.to_string(),
            c.observed.to_string(),
            c.ok.to_string(),
        ]);
    }
    t.push(vec![name.clone(), "ready".into(), String::new(), String::new(), String::new(), report.ready.to_string()]);
    let value = json!({ "strategy": name, "d": ops.d(), "n": ops.n(), "report": report });
    Ok((value, t))
}

pub fn game_parity(p: &Params) -> Result<Output> {
    if p.is(p.classical) {
        let players = require(p.players, "P")?;
        let opt = games::classical_optimum_parity(players)?;
        let bound = games::classical_parity_bound(players);
        let value = json!({
            "players": players,
            "probability": ratio(&opt.probability),
            "probability_float": ratio_f64(&opt.probability),
            "bound": ratio(&bound),
            "bound_float": ratio_f64(&bound),
            "witness": opt.witness,
        });
        let mut t = Table::new(&["players", "probability", "bound"]);
        t.push(vec![players.to_string(), num(ratio_f64(&opt.probability)), num(ratio_f64(&bound))]);
        return Ok((value, t));
    }
    let (ops, code) = build_ops(p)?;
    save_ops(p, &ops)?;
    let opts = eval_opts(p);
    let ev = if p.is(p.dense) {
        let state = dense_state(p, &ops, code.as_ref())?;
        games::quantum_parity_eval_dense(&ops, &state, &opts)?
    } else {
        games::quantum_parity_eval(&ops, &opts)?
    };
    let value = json!({
        "strategy": ops.name(),
        "players": ops.players(),
        "backend": if p.is(p.dense) { "dense" } else { "tableau" },
        "evaluation": ev,
    });
    Ok((value, evaluation_table(ops.name(), &ev)))
}

fn parse_placement(code: &CodeInstance, text: &str, p: &Params) -> Result<Cellulation> {
    let cel = match text {
        "identity" => strategies::identity_cellulation(code),
        "tab1" => strategies::tab1_cellulation(code),
        s if s.starts_with("scaled:") => {
            strategies::scaled_cellulation(code, s[7..].parse().map_err(|_| anyhow!("bad scale in `{s}`"))?)
        }
        s if s.starts_with("box:") => {
            let (dims, scale) = match s[4..].split_once('@') {
                Some((a, b)) => (a, b.parse().map_err(|_| anyhow!("bad scale in `{s}`"))?),
                None => (&s[4..], 1),
            };
            let sizes: Vec<usize> = dims.split('x').map(str::parse).collect::<std::result::Result<_, _>>()
                .map_err(|_| anyhow!("bad box sizes in `{s}`"))?;
            let a = p.anchor.unwrap_or([0, 0]);
            strategies::box_cellulation(code, &sizes, scale, [a[0], a[1], 0])
        }
        s => bail!("unknown placement `{s}`"),
    };
    cel.with_context(|| format!("building placement {text}"))
}

pub fn game_cellulation(p: &Params) -> Result<Output> {
    let (game, ops, code, placement) = if let Some(path) = &p.complex {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let coarse = Arc::new(CellComplex::from_text(&text).with_context(|| format!("parsing {}", path.display()))?);
        let degree = require(p.degree, "degree")?;
        let (ops, _) = build_ops(&Params { ops: Some(p.ops.clone().ok_or_else(|| anyhow!("--complex needs --ops"))?), ..p.clone() })?;
        if ops.players() != coarse.num_cells(degree) {
            bail!("{} players but {} cells of degree {degree}", ops.players(), coarse.num_cells(degree));
        }
        (CellulationGame::new(coarse, degree)?, ops, None, format!("file:{}", path.display()))
    } else {
        let code = build_code(p)?;
        let label = p.placement.clone().unwrap_or_else(|| "identity".into());
        let cel = parse_placement(&code, &label, p)?;
        (CellulationGame::new(cel.coarse.clone(), cel.p)?, cel.ops, Some(code), label)
    };
    let game = if p.is(p.a_ones) { game.restrict_a_to_ones() } else { game };
    save_ops(p, &ops)?;
    let opts = eval_opts(p);
    let ev = if p.is(p.dense) {
        let state = dense_state(p, &ops, code.as_ref())?;
        games::cellulation_game_eval_dense(&game, &ops, &state, &opts)?
    } else {
        games::cellulation_game_eval(&game, &ops, &opts)?
    };
    let value = json!({
        "placement": placement,
        "degree": game.p,
        "players": game.players(),
        "input_bits": game.input_bits(),
        "a_all_ones": game.a_all_ones,
        "backend": if p.is(p.dense) { "dense" } else { "tableau" },
        "evaluation": ev,
    });
    Ok((value, evaluation_table(&placement, &ev)))
}

pub fn game_magic_square(p: &Params) -> Result<Output> {
    if p.is(p.classical) {
        let d = p.d.unwrap_or(2);
        let opt = games::classical_optimum_magic_square(d)?;
        let value = json!({
            "d": d,
            "probability": ratio(&opt.probability),
            "probability_float": ratio_f64(&opt.probability),
            "alice": opt.alice,
            "bob": opt.bob,
        });
        let mut t = Table::new(&["d", "probability"]);
        t.push(vec![d.to_string(), num(ratio_f64(&opt.probability))]);
        return Ok((value, t));
    }
    let code = build_code(&Params {
        code: Some("ds".into()),
        lx: p.lx.or(p.l).or(Some(8)),
        ly: p.ly.or(p.l).or(Some(4)),
        ..p.clone()
    })?;
    let ops = strategies::ds_magic_square_ops(&code)?;
    let ev = games::magic_square_eval(&ops, &ops.resource)?;
    let mut t = Table::new(&["input", "value", "win", "p_q", "all_hold"]);
    for r in &ev.per_input {
        t.push(vec![r.input.clone(), r.value.clone(), num(r.win), num(ev.p_q), ev.all_hold().to_string()]);
    }
    let value = json!({ "code": code.kind.name(), "n": code.n(), "all_hold": ev.all_hold(), "evaluation": ev });
    Ok((value, t))
}

pub fn sweep_deformation(p: &Params) -> Result<Output> {
    let (ops, code) = build_ops(p)?;
    save_ops(p, &ops)?;
    let family = match p.family.as_deref().unwrap_or("z") {
        "z" | "Z" => FieldFamily::Z,
        "x" | "X" => FieldFamily::X,
        f => bail!("unknown field family `{f}`"),
    };
    let thetas = parse_thetas(p.thetas.as_deref().unwrap_or("0:0.5:0.05"))?;
    let state = dense_state(p, &ops, code.as_ref())?;
    let points = games::parity_deformation_sweep(&ops, &state, family, &thetas)?;
    let mut t = Table::new(&["strategy", "family", "theta", "p_q", "mermin"]);
    let fam = format!("{family:?}").to_lowercase();
    for pt in &points {
        t.push(vec![ops.name().into(), fam.clone(), num(pt.theta), num(pt.p_q), opt_num(pt.mermin)]);
    }
    let value = json!({ "strategy": ops.name(), "family": fam, "points": points });
    Ok((value, t))
}
