//! Replica-averaged experiments over the cascade model.
//!
//! Every replica seed is derived from the master seed and a tag, never from
//! the position of a value on an axis, so all values along a swept axis (and
//! all cells of a phase grid) see the same set of markets and shocks. Runs
//! are executed in parallel and aggregated in index order.

mod butterfly;
mod phase;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::cascade::run_cascade;
use crate::error::{Error, Result};
use crate::market::build_market;
use crate::params::MarketParams;

pub use butterfly::{margin_times_study, ButterflyStats, DegreeBin, BUTTERFLY_TAG};
pub use phase::{phase_diagram, PhaseCell, PhaseGrid};
pub use sweep::{
    detect_critical, diversification_sweep, run_sweep, CriticalPoint, SweepPoint, SweepResult,
    SweepSpec,
};

/// Replica count used when none is given.
pub const DEFAULT_REPLICAS: usize = 20;

/// Model parameter an experiment varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    K,
    R,
    V,
    S,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::K => "k",
            Axis::R => "r",
            Axis::V => "v",
            Axis::S => "s",
        }
    }

    /// Seed-derivation tag.
    pub fn id(self) -> u64 {
        match self {
            Axis::K => 1,
            Axis::R => 2,
            Axis::V => 3,
            Axis::S => 4,
        }
    }

    /// Whether larger values of this parameter make the market more stable.
    pub fn stable_when_high(self) -> bool {
        matches!(self, Axis::K)
    }

    /// Copy of `base` with this parameter set to `value`, validated.
    pub fn apply(self, base: &MarketParams, value: f64) -> Result<MarketParams> {
        let mut p = base.clone();
        match self {
            Axis::K => p.initial_margin_k = value,
            Axis::R => p.maintenance_r = value,
            Axis::V => p.volatility_v = value,
            Axis::S => {
                if !(value.fract() == 0.0 && value >= 1.0) {
                    return Err(Error::config(
                        "diversity_s",
                        format!("axis value {value} is not a positive integer"),
                    ));
                }
                p.diversity_s = value as usize;
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn value_of(self, p: &MarketParams) -> f64 {
        match self {
            Axis::K => p.initial_margin_k,
            Axis::R => p.maintenance_r,
            Axis::V => p.volatility_v,
            Axis::S => p.diversity_s as f64,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(Axis::K),
            "r" => Ok(Axis::R),
            "v" => Ok(Axis::V),
            "s" => Ok(Axis::S),
            other => Err(Error::config("axis", format!("unknown axis `{other}` (expected k, r, v or s)"))),
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }

    /// Standard error of the mean over `n` samples.
    pub fn sem(&self, n: usize) -> f64 {
        self.std / (n as f64).sqrt()
    }
}

/// Scalar outcome of one cascade run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub tau: usize,
    pub p_inf: f64,
    pub n_inf: usize,
    pub shocked_index: f64,
}

pub(crate) fn run_once(params: &MarketParams) -> Result<RunOutcome> {
    let mut market = build_market(params)?;
    let res = run_cascade(&mut market, params)?;
    Ok(RunOutcome {
        seed: params.seed,
        tau: res.tau,
        p_inf: res.p_inf,
        n_inf: res.n_inf,
        shocked_index: res.shocked_index(),
    })
}

pub(crate) fn check_replicas(replicas: usize) -> Result<()> {
    if replicas == 0 {
        return Err(Error::config("replicas", "must be >= 1"));
    }
    Ok(())
}
