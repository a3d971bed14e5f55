use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{check_replicas, Summary};
use crate::cascade::run_cascade;
use crate::error::Result;
use crate::market::{build_market, margin_times};
use crate::params::MarketParams;
use crate::rng::derive_seed;

pub const BUTTERFLY_TAG: u64 = 5;

/// Relative price decline of shares grouped by how many investors hold them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeBin {
    pub margin_times: usize,
    /// Share observations with this degree, summed over replicas.
    pub shares: usize,
    pub decline: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ButterflyStats {
    pub replicas: usize,
    pub n_shares: usize,
    pub bins: Vec<DegreeBin>,
}

impl ButterflyStats {
    pub fn total_mass(&self) -> usize {
        self.bins.iter().map(|b| b.shares).sum()
    }

    pub fn mean_degree(&self) -> f64 {
        let weighted: usize = self.bins.iter().map(|b| b.margin_times * b.shares).sum();
        weighted as f64 / self.total_mass() as f64
    }
}

/// (degree, relative decline) for every share of one replica.
pub(crate) fn share_declines(params: &MarketParams) -> Result<Vec<(usize, f64)>> {
    let mut market = build_market(params)?;
    let degrees = margin_times(&market).counts;
    run_cascade(&mut market, params)?;
    Ok(degrees
        .into_iter()
        .zip(market.initial_prices().iter().zip(market.current_prices()))
        .map(|(d, (p0, p))| (d, (p0 - p) / p0))
        .collect())
}

pub fn margin_times_study(
    base: &MarketParams,
    replicas: usize,
    master_seed: u64,
) -> Result<ButterflyStats> {
    check_replicas(replicas)?;
    base.validate()?;
    let per_replica = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            share_declines(&MarketParams {
                seed: derive_seed(master_seed, BUTTERFLY_TAG, i),
                ..base.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut by_degree: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (degree, decline) in per_replica.into_iter().flatten() {
        by_degree.entry(degree).or_default().push(decline);
    }
    let bins = by_degree
        .into_iter()
        .map(|(margin_times, xs)| DegreeBin {
            margin_times,
            shares: xs.len(),
            decline: Summary::of(xs),
        })
        .collect();
    Ok(ButterflyStats {
        replicas,
        n_shares: base.n_shares,
        bins,
    })
}
