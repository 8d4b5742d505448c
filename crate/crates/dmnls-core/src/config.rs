//! Run configuration shared by the command-line tool and the harness:
//! defaults, key = value config files, and the initial-datum grammar.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{gaussian_profile, ComplexField, SpatialGrid};
use crate::io::read_snapshot;

/// Initial datum: a named profile with parameters, or a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Gaussian { amplitude: f64, width: f64, center: f64, chirp: f64 },
    File(PathBuf),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Gaussian { amplitude: 1.0, width: 1.0, center: 0.0, chirp: 0.0 }
    }
}

impl InitialSpec {
    /// Grammar: `gaussian`, `gaussian:a=1,w=1,x0=0,c=0` (any subset of keys),
    /// or `file:PATH`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(InitialSpec::File(PathBuf::from(path)));
        }
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, a),
            None => (s, ""),
        };
        if name != "gaussian" {
            return Err(Error::InvalidConfig(format!(
                "unknown initial profile '{name}' (expected 'gaussian' or 'file:PATH')"
            )));
        }
        let mut spec = match InitialSpec::default() {
            InitialSpec::Gaussian { amplitude, width, center, chirp } => {
                (amplitude, width, center, chirp)
            }
            _ => unreachable!(),
        };
        for kv in args.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("bad profile parameter '{kv}' (expected k=v)"))
            })?;
            let val: f64 = v.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("bad numeric value '{v}' for '{k}'"))
            })?;
            match k.trim() {
                "a" => spec.0 = val,
                "w" => spec.1 = val,
                "x0" => spec.2 = val,
                "c" => spec.3 = val,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown profile parameter '{other}'"
                    )))
                }
            }
        }
        Ok(InitialSpec::Gaussian {
            amplitude: spec.0,
            width: spec.1,
            center: spec.2,
            chirp: spec.3,
        })
    }

    pub fn build(&self, grid: &Arc<SpatialGrid>) -> Result<ComplexField> {
        match self {
            InitialSpec::Gaussian { amplitude, width, center, chirp } => {
                gaussian_profile(grid, *amplitude, *width, *center, *chirp)
            }
            InitialSpec::File(path) => {
                let (field, _) = read_snapshot(path)?;
                if !field.grid().same_grid(grid) {
                    return Err(Error::InvalidConfig(format!(
                        "snapshot grid (n = {}, L = {}) differs from the configured grid",
                        field.grid().n(),
                        field.grid().length()
                    )));
                }
                Ok(field)
            }
        }
    }
}

/// Everything a run needs. Flags override config-file values, which override
/// these defaults (the documented desk-scale scenario).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub eps: f64,
    pub gamma: f64,
    pub d_av: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps_per_half_cell: usize,
    pub quad_nodes: usize,
    pub snapshot_stride: usize,
    pub seed: u64,
    pub initial: InitialSpec,
    pub eps_list: Vec<f64>,
    pub deltas: Vec<f64>,
    pub perturbation_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 512,
            length: 16.0 * std::f64::consts::PI,
            eps: 0.1,
            gamma: 0.2,
            d_av: 0.5,
            t_end: 1.0,
            dt: 1e-3,
            steps_per_half_cell: 20,
            quad_nodes: 32,
            snapshot_stride: 5,
            seed: 7,
            initial: InitialSpec::default(),
            eps_list: vec![0.1, 0.05, 0.025, 0.0125],
            deltas: vec![1e-2, 1e-3, 1e-4],
            perturbation_scale: 1.0,
        }
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad list entry '{p}'")))
        })
        .collect()
}

impl RunConfig {
    /// Apply `key = value` lines (UTF-8, `#` comments) on top of self.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_kv_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::InvalidConfig(format!("bad value '{v}' for '{k}'"));
        match key {
            "n" => self.n = value.parse().map_err(|_| bad(key, value))?,
            "length" => self.length = value.parse().map_err(|_| bad(key, value))?,
            "eps" => self.eps = value.parse().map_err(|_| bad(key, value))?,
            "gamma" => self.gamma = value.parse().map_err(|_| bad(key, value))?,
            "dav" => self.d_av = value.parse().map_err(|_| bad(key, value))?,
            "tmax" => self.t_end = value.parse().map_err(|_| bad(key, value))?,
            "dt" => self.dt = value.parse().map_err(|_| bad(key, value))?,
            "steps_per_half_cell" => {
                self.steps_per_half_cell = value.parse().map_err(|_| bad(key, value))?
            }
            "quad_nodes" => self.quad_nodes = value.parse().map_err(|_| bad(key, value))?,
            "snapshot_stride" => {
                self.snapshot_stride = value.parse().map_err(|_| bad(key, value))?
            }
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "initial" => self.initial = InitialSpec::parse(value)?,
            "eps_list" => self.eps_list = parse_list(value)?,
            "deltas" => self.deltas = parse_list(value)?,
            "perturbation_scale" => {
                self.perturbation_scale = value.parse().map_err(|_| bad(key, value))?
            }
            other => return Err(Error::InvalidConfig(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<SpatialGrid>> {
        SpatialGrid::new(self.n, self.length)
    }
}
