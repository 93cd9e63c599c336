//! Monte-Carlo sweeps over array sizes, CSV output.

mod config;
mod output;

pub use config::{
    load_config, parse_config, preset, ExperimentConfig, SweepSpec, SweepVar, SystemConfig, TopologyConfig, PRESETS,
};
pub use output::{summarize, write_results, SummaryRow};

use std::time::Instant;

use rayon::prelude::*;

use crate::ao::{run_scheme, Scheme};
use crate::channel::{draw_channels, place_users};
use crate::error::Result;

/// One (scheme, sweep point, trial) outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub scheme: Scheme,
    pub sweep_var: SweepVar,
    pub sweep_value: usize,
    pub trial: usize,
    pub sum_rate: f64,
    pub feasible: bool,
    pub eff_gamma_th: f64,
    pub iters: usize,
    pub wall_ms: u64,
    /// Checksum of the channel draw, shared by all schemes of a trial.
    pub channel_checksum: u64,
    /// Set when the trial aborted; the other numeric fields are then NaN or zero.
    pub error: Option<String>,
}

fn failed(scheme: Scheme, var: SweepVar, value: usize, trial: usize, checksum: u64, msg: String) -> TrialResult {
    TrialResult {
        scheme,
        sweep_var: var,
        sweep_value: value,
        trial,
        sum_rate: f64::NAN,
        feasible: false,
        eff_gamma_th: f64::NAN,
        iters: 0,
        wall_ms: 0,
        channel_checksum: checksum,
        error: Some(msg),
    }
}

/// All schemes of one trial see the same channel draw.
fn run_trial(cfg: &ExperimentConfig, var: SweepVar, value: usize, trial: usize) -> Vec<TrialResult> {
    let dims = var.apply(cfg.dims, value);
    let seed = cfg.base_seed.wrapping_add(trial as u64);
    let users = place_users(cfg.topology.user_center(), cfg.topology.user_radius, dims.k, seed);
    let topology = cfg.topology.with_users(users);
    let params = cfg.system.params(dims.k);
    let channels = match draw_channels(&topology, &cfg.large_scale, dims, seed) {
        Ok(c) => c,
        Err(e) => {
            log::warn!("{}={value} trial {trial}: channel draw failed: {e}", var.name());
            return cfg
                .schemes
                .iter()
                .map(|&s| failed(s, var, value, trial, 0, e.to_string()))
                .collect();
        }
    };
    let checksum = channels.checksum();
    cfg.schemes
        .iter()
        .map(|&scheme| {
            let start = Instant::now();
            let out = run_scheme(scheme, &channels, &params, &cfg.ao, seed);
            let wall_ms = if cfg.record_wall_time {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            match out {
                Ok(r) => {
                    log::debug!(
                        "{}={value} trial {trial} {scheme}: rate {:.4} iters {} feasible {}",
                        var.name(),
                        r.sum_rate,
                        r.outer_iters,
                        r.feasible
                    );
                    TrialResult {
                        scheme,
                        sweep_var: var,
                        sweep_value: value,
                        trial,
                        sum_rate: r.sum_rate,
                        feasible: r.feasible,
                        eff_gamma_th: r.eff_gamma_th,
                        iters: r.outer_iters,
                        wall_ms,
                        channel_checksum: checksum,
                        error: None,
                    }
                }
                Err(e) => {
                    log::warn!("{}={value} trial {trial} {scheme}: {e}", var.name());
                    failed(scheme, var, value, trial, checksum, e.to_string())
                }
            }
        })
        .collect()
}

/// Runs every (sweep point, trial) pair, in parallel when rayon has threads.
/// Output is sorted by configured scheme order, sweep value, then trial,
/// regardless of scheduling.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let (var, values) = cfg.sweep_points();
    let jobs: Vec<(usize, usize)> = values
        .iter()
        .flat_map(|&v| (0..cfg.trials).map(move |t| (v, t)))
        .collect();
    let mut results: Vec<TrialResult> = jobs
        .par_iter()
        .flat_map_iter(|&(v, t)| run_trial(cfg, var, v, t))
        .collect();
    let rank = |s: Scheme| cfg.schemes.iter().position(|&x| x == s);
    results.sort_by_key(|r| (rank(r.scheme), r.sweep_value, r.trial));
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Dims;

    fn tiny() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(Dims { m: 2, l: 2, n: 2, k: 1 });
        cfg.trials = 2;
        cfg.ao.max_outer_iters = 2;
        cfg.schemes = vec![Scheme::Proposed, Scheme::RelayOnly];
        cfg.sweep = Some(SweepSpec {
            variable: SweepVar::N,
            values: vec![2, 3],
        });
        cfg
    }

    #[test]
    fn sweep_covers_every_combination_in_order() {
        let cfg = tiny();
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.len(), 2 * 2 * 2);
        let keys: Vec<_> = res
            .iter()
            .map(|r| (cfg.schemes.iter().position(|&x| x == r.scheme), r.sweep_value, r.trial))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        assert!(res.iter().all(|r| r.error.is_none() && r.wall_ms == 0));
    }

    #[test]
    fn schemes_share_the_channel_draw() {
        let res = run_sweep(&tiny()).unwrap();
        for r in &res {
            let twin = res
                .iter()
                .find(|o| o.scheme != r.scheme && o.sweep_value == r.sweep_value && o.trial == r.trial)
                .unwrap();
            assert_eq!(r.channel_checksum, twin.channel_checksum);
        }
        assert_ne!(res[0].channel_checksum, res[1].channel_checksum);
    }

    #[test]
    fn single_point_gives_single_result() {
        let mut cfg = tiny();
        cfg.trials = 1;
        cfg.schemes = vec![Scheme::RandomIrs];
        cfg.sweep = None;
        assert_eq!(run_sweep(&cfg).unwrap().len(), 1);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = tiny();
        assert_eq!(run_sweep(&cfg).unwrap(), run_sweep(&cfg).unwrap());
    }

    #[test]
    fn relay_only_ignores_the_irs_size() {
        let res = run_sweep(&tiny()).unwrap();
        let ro: Vec<_> = res.iter().filter(|r| r.scheme == Scheme::RelayOnly).collect();
        for t in 0..2 {
            let at: Vec<_> = ro.iter().filter(|r| r.trial == t).map(|r| r.sum_rate).collect();
            assert!((at[0] - at[1]).abs() < 1e-9, "{at:?}");
        }
    }
}
