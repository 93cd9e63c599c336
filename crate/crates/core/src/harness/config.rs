//! Experiment configuration files and built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ao::{AoConfig, Scheme};
use crate::channel::{Dims, LargeScaleParams, Point, Topology, BS_POS, IRS_POS, RELAY_POS, USER_CENTER, USER_RADIUS};
use crate::error::{Error, Result};
use crate::system::{SystemParams, DEFAULT_GAMMA_R_TH, DEFAULT_NOISE_W, DEFAULT_POWER_W};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    N,
    L,
    M,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::N => "N",
            SweepVar::L => "L",
            SweepVar::M => "M",
        }
    }

    pub fn apply(self, dims: Dims, value: usize) -> Dims {
        match self {
            SweepVar::N => Dims { n: value, ..dims },
            SweepVar::L => Dims { l: value, ..dims },
            SweepVar::M => Dims { m: value, ..dims },
        }
    }

    pub fn current(self, dims: Dims) -> usize {
        match self {
            SweepVar::N => dims.n,
            SweepVar::L => dims.l,
            SweepVar::M => dims.m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<usize>,
}

/// Node positions as `[x, y]` in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub bs: [f64; 2],
    pub irs: [f64; 2],
    pub relay: [f64; 2],
    pub user_center: [f64; 2],
    pub user_radius: f64,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        let xy = |p: Point| [p.x, p.y];
        Self {
            bs: xy(BS_POS),
            irs: xy(IRS_POS),
            relay: xy(RELAY_POS),
            user_center: xy(USER_CENTER),
            user_radius: USER_RADIUS,
        }
    }
}

impl TopologyConfig {
    pub fn with_users(&self, users: Vec<Point>) -> Topology {
        let p = |a: [f64; 2]| Point::new(a[0], a[1]);
        Topology {
            bs: p(self.bs),
            irs: p(self.irs),
            relay: p(self.relay),
            users,
        }
    }

    pub fn user_center(&self) -> Point {
        Point::new(self.user_center[0], self.user_center[1])
    }
}

/// Powers in watts; one noise variance shared by all users.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub p_bs_max: f64,
    pub p_r_max: f64,
    pub sigma_k2: f64,
    pub sigma_r2: f64,
    pub gamma_r_th: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            p_bs_max: DEFAULT_POWER_W,
            p_r_max: DEFAULT_POWER_W,
            sigma_k2: DEFAULT_NOISE_W,
            sigma_r2: DEFAULT_NOISE_W,
            gamma_r_th: DEFAULT_GAMMA_R_TH,
        }
    }
}

impl SystemConfig {
    pub fn params(&self, k: usize) -> SystemParams {
        SystemParams {
            p_bs_max: self.p_bs_max,
            p_r_max: self.p_r_max,
            sigma_k2: vec![self.sigma_k2; k],
            sigma_r2: self.sigma_r2,
            gamma_r_th: self.gamma_r_th,
        }
    }
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_trials() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Dims,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub large_scale: LargeScaleParams,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub ao: AoConfig,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    /// Without a sweep the experiment runs at `dims` only.
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Record per-trial wall time; off by default so that reruns produce
    /// identical files.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn new(dims: Dims) -> Self {
        Self {
            dims,
            topology: TopologyConfig::default(),
            large_scale: LargeScaleParams::default(),
            system: SystemConfig::default(),
            ao: AoConfig::default(),
            schemes: default_schemes(),
            sweep: None,
            trials: default_trials(),
            base_seed: 0,
            record_wall_time: false,
        }
    }

    /// `(variable, value)` of every sweep point.
    pub fn sweep_points(&self) -> (SweepVar, Vec<usize>) {
        match &self.sweep {
            Some(s) => (s.variable, s.values.clone()),
            None => (SweepVar::N, vec![self.dims.n]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (var, values) = self.sweep_points();
        if values.is_empty() {
            return Err(invalid("sweep.values", "must not be empty"));
        }
        if values.contains(&0) {
            return Err(invalid("sweep.values", "must be positive"));
        }
        for v in values {
            let d = var.apply(self.dims, v);
            if d.m == 0 || d.l == 0 || d.n == 0 || d.k == 0 {
                return Err(invalid("dims", format!("all dimensions must be positive, got {d:?}")));
            }
            if d.k > d.m.min(d.l) {
                return Err(invalid(
                    "dims.k",
                    format!("K ≤ min(M,L) violated: K={} M={} L={}", d.k, d.m, d.l),
                ));
            }
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must list at least one scheme"));
        }
        if !(self.topology.user_radius >= 0.0) {
            return Err(invalid("topology.user_radius", "must be non-negative"));
        }
        let ls = &self.large_scale;
        for (f, v) in [
            ("large_scale.d0", ls.d0),
            ("large_scale.kappa_direct_and_relay", ls.kappa_direct_and_relay),
            ("large_scale.kappa_irs", ls.kappa_irs),
            ("large_scale.rho_direct", ls.rho_direct),
            ("large_scale.rho_assisted", ls.rho_assisted),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(f, "must be positive and finite"));
            }
        }
        self.system.params(self.dims.k).validate().map_err(|e| match e {
            Error::Validation { field, message } => invalid(&format!("system.{field}"), message),
            other => other,
        })?;
        self.ao.validate().map_err(|e| match e {
            Error::Validation { field, message } => invalid(&format!("ao.{field}"), message),
            other => other,
        })?;
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

pub const PRESETS: [&str; 4] = ["fig2a", "fig2b", "fig2c", "desk"];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let sweep = |variable, values: &[usize]| {
        Some(SweepSpec {
            variable,
            values: values.to_vec(),
        })
    };
    let mut cfg = match name {
        "fig2a" => {
            let mut c = ExperimentConfig::new(Dims {
                m: 8,
                l: 4,
                n: 30,
                k: 4,
            });
            c.sweep = sweep(SweepVar::N, &[10, 20, 30, 40, 50]);
            c
        }
        "fig2b" => {
            let mut c = ExperimentConfig::new(Dims {
                m: 8,
                l: 4,
                n: 30,
                k: 4,
            });
            c.sweep = sweep(SweepVar::L, &[4, 6, 8, 10]);
            c
        }
        "fig2c" => {
            let mut c = ExperimentConfig::new(Dims {
                m: 8,
                l: 4,
                n: 30,
                k: 4,
            });
            c.sweep = sweep(SweepVar::M, &[4, 6, 8, 10]);
            c
        }
        "desk" => {
            let mut c = ExperimentConfig::new(Dims {
                m: 4,
                l: 2,
                n: 16,
                k: 2,
            });
            c.sweep = sweep(SweepVar::N, &[4, 16, 32]);
            c.trials = 50;
            c
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown preset `{other}`, expected one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    if name.starts_with("fig") {
        cfg.trials = 20;
    }
    cfg.validate()?;
    Ok(cfg)
}
