use rayon::prelude::*;
use serde::Serialize;

use super::{check_replicas, run_once, Axis, RunOutcome, Summary};
use crate::error::{Error, Result};
use crate::params::MarketParams;
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseCell {
    pub tau: Summary,
    pub p_inf: Summary,
    pub n_inf: Summary,
    pub shocked_index: Summary,
}

/// Replica-averaged outcomes on a two-parameter grid, row-major in
/// (`axis1`, `axis2`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub axis1: Axis,
    pub values1: Vec<f64>,
    pub axis2: Axis,
    pub values2: Vec<f64>,
    pub replicas: usize,
    pub cells: Vec<PhaseCell>,
}

impl PhaseGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &PhaseCell {
        &self.cells[i1 * self.values2.len() + i2]
    }

    /// For each `axis2` value, the first `axis1` value whose mean steady-state
    /// index falls below `fraction` of the mean post-shock index. `None` when
    /// no cell of that column does.
    pub fn vulnerable_onset(&self, fraction: f64) -> Vec<Option<f64>> {
        (0..self.values2.len())
            .map(|i2| {
                (0..self.values1.len())
                    .find(|&i1| {
                        let c = self.cell(i1, i2);
                        c.p_inf.mean < fraction * c.shocked_index.mean
                    })
                    .map(|i1| self.values1[i1])
            })
            .collect()
    }
}

/// Every cell uses the same replica seeds, derived from `axis1`.
pub fn phase_diagram(
    axis1: (Axis, &[f64]),
    axis2: (Axis, &[f64]),
    base: &MarketParams,
    replicas: usize,
    master_seed: u64,
) -> Result<PhaseGrid> {
    let (a1, v1) = axis1;
    let (a2, v2) = axis2;
    check_replicas(replicas)?;
    if a1 == a2 {
        return Err(Error::config("axis2", "phase axes must differ"));
    }
    if v1.is_empty() || v2.is_empty() {
        return Err(Error::config("values", "phase axes need at least one value each"));
    }
    let mut cells_params = Vec::with_capacity(v1.len() * v2.len());
    for &x in v1 {
        let row = a1.apply(base, x)?;
        for &y in v2 {
            cells_params.push(a2.apply(&row, y)?);
        }
    }
    let seeds: Vec<u64> = (0..replicas as u64)
        .map(|i| derive_seed(master_seed, a1.id(), i))
        .collect();

    let jobs: Vec<MarketParams> = cells_params
        .iter()
        .flat_map(|p| seeds.iter().map(move |&seed| MarketParams { seed, ..p.clone() }))
        .collect();
    let outcomes = jobs.par_iter().map(run_once).collect::<Result<Vec<_>>>()?;

    let cells = outcomes
        .chunks_exact(replicas)
        .map(|runs: &[RunOutcome]| PhaseCell {
            tau: Summary::of(runs.iter().map(|r| r.tau as f64)),
            p_inf: Summary::of(runs.iter().map(|r| r.p_inf)),
            n_inf: Summary::of(runs.iter().map(|r| r.n_inf as f64)),
            shocked_index: Summary::of(runs.iter().map(|r| r.shocked_index)),
        })
        .collect();
    Ok(PhaseGrid {
        axis1: a1,
        values1: v1.to_vec(),
        axis2: a2,
        values2: v2.to_vec(),
        replicas,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_sweep, SweepSpec};

    fn base() -> MarketParams {
        MarketParams {
            n_investors: 2_000,
            n_shares: 100,
            diversity_s: 10,
            ..Default::default()
        }
    }

    #[test]
    fn one_by_one_matches_sweep_point() {
        let grid = phase_diagram((Axis::R, &[1.6]), (Axis::K, &[0.45]), &base(), 5, 12).unwrap();
        let sweep = run_sweep(&SweepSpec {
            base: MarketParams {
                initial_margin_k: 0.45,
                ..base()
            },
            axis: Axis::R,
            values: vec![1.6],
            replicas: 5,
            master_seed: 12,
        })
        .unwrap();
        let (cell, pt) = (grid.cell(0, 0), &sweep.points[0]);
        assert_eq!(cell.tau, pt.tau);
        assert_eq!(cell.p_inf, pt.p_inf);
        assert_eq!(cell.n_inf, pt.n_inf);
    }

    #[test]
    fn dimensions_and_monotone_cells() {
        let r = [1.3, 1.5, 1.7];
        let k = [0.35, 0.45, 0.55, 0.65];
        let grid = phase_diagram((Axis::R, &r), (Axis::K, &k), &base(), 4, 1).unwrap();
        assert_eq!(grid.cells.len(), 12);
        for i in 0..3 {
            for j in 1..4 {
                assert!(grid.cell(i, j).p_inf.mean >= grid.cell(i, j - 1).p_inf.mean);
            }
        }
        for j in 0..4 {
            for i in 1..3 {
                assert!(grid.cell(i, j).p_inf.mean <= grid.cell(i - 1, j).p_inf.mean);
            }
        }
    }

    #[test]
    fn same_axis_twice_rejected() {
        assert!(phase_diagram((Axis::R, &[1.0]), (Axis::R, &[1.2]), &base(), 2, 0).is_err());
        assert!(phase_diagram((Axis::R, &[1.0]), (Axis::K, &[1.2]), &base(), 2, 0).is_err());
    }

    #[test]
    fn onset_scan() {
        let shocked = Summary { mean: 100.0, std: 0.0 };
        let cell = |p: f64| PhaseCell {
            tau: Summary { mean: 1.0, std: 0.0 },
            p_inf: Summary { mean: p, std: 0.0 },
            n_inf: Summary { mean: 0.0, std: 0.0 },
            shocked_index: shocked,
        };
        // rows r = 1, 2, 3; columns k = a, b
        let grid = PhaseGrid {
            axis1: Axis::R,
            values1: vec![1.0, 2.0, 3.0],
            axis2: Axis::K,
            values2: vec![0.1, 0.2],
            replicas: 1,
            cells: vec![cell(90.0), cell(95.0), cell(40.0), cell(90.0), cell(10.0), cell(60.0)],
        };
        assert_eq!(grid.vulnerable_onset(0.5), vec![Some(2.0), None]);
    }
}
