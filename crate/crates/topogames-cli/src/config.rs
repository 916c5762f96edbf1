//! Experiment parameters: flags, an optional TOML file, and the resolved hash.

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Every parameter any subcommand reads. Unset fields fall back to the
/// config file, then to per-command defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// tc2d, tc3d-faces, tc3d-edges, xcube, ds or ghz.
    #[arg(long)]
    pub code: Option<String>,
    /// Linear size of a cubic torus.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<usize>,
    /// Double-semion torus width.
    #[arg(long = "Lx")]
    #[serde(rename = "Lx")]
    pub lx: Option<usize>,
    /// Double-semion torus height.
    #[arg(long = "Ly")]
    #[serde(rename = "Ly")]
    pub ly: Option<usize>,
    /// Number of players.
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub players: Option<usize>,
    /// Qudit dimension for the classical magic-square search.
    #[arg(long)]
    pub d: Option<u32>,
    /// Strategy variant: contractible | winding (tc2d), 1form | 2form (tc3d),
    /// cage | prism:AXIS:HEIGHT (xcube).
    #[arg(long)]
    pub variant: Option<String>,
    /// Cellulation: identity | tab1 | scaled:S | box:AxB[xC][@S].
    #[arg(long)]
    pub placement: Option<String>,
    /// Lower-left corner of the tc2d block, as `x,y`.
    #[arg(long, value_parser = parse_anchor)]
    pub anchor: Option<[i64; 2]>,
    /// Side of the tc2d block.
    #[arg(long)]
    pub radius: Option<usize>,
    /// Coarse complex in the text format of `complex info`.
    #[arg(long)]
    pub complex: Option<PathBuf>,
    /// Cell degree of the players on `--complex`.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Composite operator set in the JSON format written by `--save-ops`.
    #[arg(long)]
    pub ops: Option<PathBuf>,
    /// Write the composite operator set used to this path.
    #[arg(long)]
    pub save_ops: Option<PathBuf>,
    /// Exhaustive classical optimum instead of the quantum strategy.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical: Option<bool>,
    /// Evaluate on a dense state vector instead of the stabilizer tableau.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense: Option<bool>,
    /// Restrict cellulation inputs to `a_c = 1` for every player.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_ones: Option<bool>,
    /// Field family for deformations: z | x.
    #[arg(long)]
    pub family: Option<String>,
    /// Deformation angles: `start:stop:step` or a comma list.
    #[arg(long)]
    pub thetas: Option<String>,
    /// Sample count when an input set is too large to enumerate.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Seed for input sampling and dense-state construction.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_anchor(s: &str) -> std::result::Result<[i64; 2], String> {
    let v: Vec<i64> = s.split(',').map(|t| t.trim().parse::<i64>()).collect::<std::result::Result<_, _>>().map_err(|e| e.to_string())?;
    <[i64; 2]>::try_from(v).map_err(|_| format!("anchor `{s}` must be `x,y`"))
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Params {
    pub fn load(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlaid(mut self, top: &Params) -> Params {
        overlay!(self, top; code, l, lx, ly, players, d, variant, placement, anchor, radius, complex,
            degree, ops, save_ops, classical, dense, a_ones, family, thetas, samples, seed);
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn is(&self, f: Option<bool>) -> bool {
        f.unwrap_or(false)
    }

    /// Hex SHA-256 of the canonical JSON of the parameters and the command.
    pub fn hash(&self, command: &str) -> String {
        let body = serde_json::json!({ "command": command, "params": self });
        let digest = Sha256::digest(body.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn check_files(&self) -> Result<()> {
        for p in [&self.complex, &self.ops].into_iter().flatten() {
            if !p.exists() {
                bail!("file {} does not exist", p.display());
            }
        }
        Ok(())
    }
}

pub fn parse_thetas(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts.iter().map(|t| t.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad theta range `{s}`"))?;
        let (a, b, step) = (v[0], v[1], v[2]);
        if !(step > 0.0) || b < a {
            bail!("theta range `{s}` needs step > 0 and stop ≥ start");
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad theta `{t}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Params = toml::from_str("code = \"tc2d\"\nL = 4\nP = 3\nseed = 9").unwrap();
        let flags = Params { l: Some(2), ..Default::default() };
        let p = file.overlaid(&flags);
        assert_eq!((p.code.as_deref(), p.l, p.players, p.seed()), (Some("tc2d"), Some(2), Some(3), 9));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Params>("colour = 1").is_err());
    }

    #[test]
    fn theta_grid_includes_endpoint() {
        let t = parse_thetas("0:0.5:0.05").unwrap();
        assert_eq!(t.len(), 11);
        assert!((t[10] - 0.5).abs() < 1e-12);
        assert_eq!(parse_thetas("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_thetas("0:1:0").is_err());
    }

    #[test]
    fn hash_depends_on_params() {
        let a = Params { seed: Some(1), ..Default::default() };
        let b = Params { seed: Some(2), ..Default::default() };
        assert_ne!(a.hash("x"), b.hash("x"));
        assert_eq!(a.hash("x"), a.clone().hash("x"));
        assert_eq!(a.hash("x").len(), 64);
    }
}
