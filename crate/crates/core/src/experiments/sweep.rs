use rayon::prelude::*;
use serde::Serialize;

use super::{check_replicas, run_once, Axis, RunOutcome, Summary};
use crate::error::{Error, Result};
use crate::params::MarketParams;
use crate::rng::derive_seed;

/// One-dimensional sweep over a model parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: MarketParams,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub replicas: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    /// Seed of replica `replica`, shared by every value on the axis.
    pub fn replica_seed(&self, replica: usize) -> u64 {
        derive_seed(self.master_seed, self.axis.id(), replica as u64)
    }

    pub fn params_for(&self, value_index: usize, replica: usize) -> Result<MarketParams> {
        let value = *self.values.get(value_index).ok_or_else(|| {
            Error::Domain(format!("value index {value_index} out of range"))
        })?;
        let mut p = self.axis.apply(&self.base, value)?;
        p.seed = self.replica_seed(replica);
        Ok(p)
    }

    fn validate(&self) -> Result<Vec<MarketParams>> {
        check_replicas(self.replicas)?;
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        self.values
            .iter()
            .map(|&v| self.axis.apply(&self.base, v))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub tau: Summary,
    pub p_inf: Summary,
    pub n_inf: Summary,
    pub runs: Vec<RunOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub replicas: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn mean_tau(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.tau.mean).collect()
    }

    pub fn mean_p_inf(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_inf.mean).collect()
    }
}

pub(crate) fn aggregate(value: f64, runs: Vec<RunOutcome>) -> SweepPoint {
    SweepPoint {
        value,
        tau: Summary::of(runs.iter().map(|r| r.tau as f64)),
        p_inf: Summary::of(runs.iter().map(|r| r.p_inf)),
        n_inf: Summary::of(runs.iter().map(|r| r.n_inf as f64)),
        runs,
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let per_value = spec.validate()?;
    let seeds: Vec<u64> = (0..spec.replicas).map(|i| spec.replica_seed(i)).collect();

    let jobs: Vec<MarketParams> = per_value
        .iter()
        .flat_map(|p| {
            seeds.iter().map(move |&seed| MarketParams {
                seed,
                ..p.clone()
            })
        })
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(run_once)
        .collect::<Result<Vec<_>>>()?;

    let points = spec
        .values
        .iter()
        .zip(outcomes.chunks_exact(spec.replicas))
        .map(|(&v, runs)| aggregate(v, runs.to_vec()))
        .collect();
    Ok(SweepResult {
        axis: spec.axis,
        replicas: spec.replicas,
        points,
    })
}

/// Sweep over the number of shares held per investor.
pub fn diversification_sweep(
    s_values: &[usize],
    base: &MarketParams,
    replicas: usize,
    master_seed: u64,
) -> Result<SweepResult> {
    run_sweep(&SweepSpec {
        base: base.clone(),
        axis: Axis::S,
        values: s_values.iter().map(|&s| s as f64).collect(),
        replicas,
        master_seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub value: f64,
    pub index: usize,
    pub mean_tau: f64,
    /// Other axis values that reached the same maximum.
    pub tied_with: Vec<f64>,
}

/// Axis value with the largest mean cascade time, or `None` when no value
/// cascades at all. Ties go to the stable side of the axis.
pub fn detect_critical(result: &SweepResult) -> Option<CriticalPoint> {
    let max = result
        .points
        .iter()
        .map(|p| p.tau.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    if max <= 1.0 {
        return None;
    }
    let maxima: Vec<usize> = (0..result.points.len())
        .filter(|&i| result.points[i].tau.mean == max)
        .collect();
    let pick = |a: usize, b: usize| {
        let (va, vb) = (result.points[a].value, result.points[b].value);
        let a_more_stable = if result.axis.stable_when_high() { va > vb } else { va < vb };
        if a_more_stable { a } else { b }
    };
    let index = maxima.iter().copied().reduce(pick)?;
    Some(CriticalPoint {
        value: result.points[index].value,
        index,
        mean_tau: max,
        tied_with: maxima
            .iter()
            .filter(|&&i| i != index)
            .map(|&i| result.points[i].value)
            .collect(),
    })
}
