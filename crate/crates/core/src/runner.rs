//! Executes a validated [`RunConfig`] and renders its outputs.

use std::path::Path;

use serde::Serialize;

use crate::cascade::{run_cascade, CascadeResult};
use crate::config::{ExperimentSpec, RunConfig};
use crate::error::Result;
use crate::experiments::{
    detect_critical, diversification_sweep, margin_times_study, phase_diagram, run_sweep,
    ButterflyStats, CriticalPoint, PhaseGrid, SweepResult, SweepSpec,
};
use crate::market::build_market;
use crate::output::{timeseries_table, write_text, Table};
use crate::params::MarketParams;

/// Mean steady-state index, as a fraction of the post-shock index, below
/// which a phase-grid cell counts as vulnerable.
pub const VULNERABLE_FRACTION: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Run(CascadeResult),
    Sweep(SweepResult),
    Phase(PhaseGrid),
    MarginTimes(ButterflyStats),
}

#[derive(Serialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
enum SummaryDoc<'a> {
    Run {
        params: &'a MarketParams,
        tau: usize,
        p_inf: f64,
        n_inf: usize,
        shocked_index: f64,
        index_trajectory: &'a [f64],
        active_trajectory: &'a [usize],
    },
    Sweep {
        params: &'a MarketParams,
        critical: Option<CriticalPoint>,
        result: &'a SweepResult,
    },
    Phase {
        params: &'a MarketParams,
        vulnerable_fraction: f64,
        vulnerable_onset: Vec<Option<f64>>,
        grid: &'a PhaseGrid,
    },
    MarginTimes {
        params: &'a MarketParams,
        stats: &'a ButterflyStats,
    },
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let base = &cfg.market;
    Ok(match &cfg.experiment {
        ExperimentSpec::Run => {
            let mut market = build_market(base)?;
            Outcome::Run(run_cascade(&mut market, base)?)
        }
        ExperimentSpec::Sweep(a) => Outcome::Sweep(run_sweep(&SweepSpec {
            base: base.clone(),
            axis: a.axis,
            values: a.values.clone(),
            replicas: cfg.replicas,
            master_seed: cfg.master_seed,
        })?),
        ExperimentSpec::Phase { axis1, axis2 } => Outcome::Phase(phase_diagram(
            (axis1.axis, &axis1.values),
            (axis2.axis, &axis2.values),
            base,
            cfg.replicas,
            cfg.master_seed,
        )?),
        ExperimentSpec::Diversify { s_values } => Outcome::Sweep(diversification_sweep(
            s_values,
            base,
            cfg.replicas,
            cfg.master_seed,
        )?),
        ExperimentSpec::MarginTimes => {
            Outcome::MarginTimes(margin_times_study(base, cfg.replicas, cfg.master_seed)?)
        }
    })
}

impl Outcome {
    pub fn table(&self) -> String {
        match self {
            Outcome::Run(r) => timeseries_table(r),
            Outcome::Sweep(s) => s.to_table(),
            Outcome::Phase(g) => g.to_table(),
            Outcome::MarginTimes(b) => b.to_table(),
        }
    }

    /// Pretty-printed JSON with the same fields as the table plus derived
    /// quantities (critical point, vulnerable onset).
    pub fn summary_json(&self, params: &MarketParams) -> String {
        let doc = match self {
            Outcome::Run(r) => SummaryDoc::Run {
                params,
                tau: r.tau,
                p_inf: r.p_inf,
                n_inf: r.n_inf,
                shocked_index: r.shocked_index(),
                index_trajectory: &r.index_trajectory,
                active_trajectory: &r.active_trajectory,
            },
            Outcome::Sweep(s) => SummaryDoc::Sweep {
                params,
                critical: detect_critical(s),
                result: s,
            },
            Outcome::Phase(g) => SummaryDoc::Phase {
                params,
                vulnerable_fraction: VULNERABLE_FRACTION,
                vulnerable_onset: g.vulnerable_onset(VULNERABLE_FRACTION),
                grid: g,
            },
            Outcome::MarginTimes(b) => SummaryDoc::MarginTimes { params, stats: b },
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
        text.push('\n');
        text
    }

    /// One-line human description for the terminal.
    pub fn headline(&self) -> String {
        match self {
            Outcome::Run(r) => format!(
                "tau = {}, p_inf = {:.2}, n_inf = {}",
                r.tau, r.p_inf, r.n_inf
            ),
            Outcome::Sweep(s) => match detect_critical(s) {
                Some(c) => format!(
                    "{} points; peak mean tau {:.2} at {} = {}",
                    s.points.len(),
                    c.mean_tau,
                    s.axis.name(),
                    c.value
                ),
                None => format!("{} points; no cascade on the grid", s.points.len()),
            },
            Outcome::Phase(g) => format!("{} x {} cells", g.values1.len(), g.values2.len()),
            Outcome::MarginTimes(b) => format!(
                "{} degree bins over {} share observations",
                b.bins.len(),
                b.total_mass()
            ),
        }
    }
}

/// Runs `cfg` and writes the table to `out` (when given) and the JSON summary
/// to `summary` (when given). Returns the outcome for reporting.
pub fn run_to_files(cfg: &RunConfig, out: Option<&Path>, summary: Option<&Path>) -> Result<Outcome> {
    let outcome = execute(cfg)?;
    if let Some(path) = out {
        write_text(path, &outcome.table())?;
    }
    if let Some(path) = summary {
        write_text(path, &outcome.summary_json(&cfg.market))?;
    }
    Ok(outcome)
}
