//! Shock, margin checks and the liquidation cascade.
//!
//! Updates are synchronous: every margin check in step `t` uses the prices
//! left by step `t - 1`, and all liquidations of the step are executed before
//! any price moves. A run stops at the first step that liquidates nobody;
//! that probe step is not counted in `tau`.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{market_index, BipartiteMarket};
use crate::params::MarketParams;
use crate::rng;

/// Per-share decline fractions drawn at the initial shock.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShockRealization {
    pub declines: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step_index: usize,
    pub liquidated: Vec<usize>,
    pub sell_orders: Vec<u64>,
    pub index_after: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeResult {
    pub tau: usize,
    pub p_inf: f64,
    pub n_inf: usize,
    /// Market index at t = 0, after the shock at t = 1, then after every
    /// liquidating step.
    pub index_trajectory: Vec<f64>,
    pub active_trajectory: Vec<usize>,
    pub steps: Vec<StepReport>,
    pub shock: ShockRealization,
}

impl CascadeResult {
    pub fn total_liquidated(&self) -> usize {
        self.steps.iter().map(|s| s.liquidated.len()).sum()
    }

    pub fn total_sell_orders(&self) -> u64 {
        self.steps
            .iter()
            .map(|s| s.sell_orders.iter().sum::<u64>())
            .sum()
    }

    /// Index right after the shock.
    pub fn shocked_index(&self) -> f64 {
        self.index_trajectory[1]
    }
}

pub fn apply_initial_shock(
    market: &mut BipartiteMarket,
    params: &MarketParams,
) -> Result<ShockRealization> {
    if market.is_shocked() {
        return Err(Error::State("market has already been shocked".into()));
    }
    let width = params.max_decline();
    if !(0.0..=1.0).contains(&width) {
        return Err(Error::config("volatility_v", "must be within [0, 100]"));
    }
    let mut shock_rng = rng::stream(params.seed, rng::SHOCK_STREAM);
    let declines: Vec<f64> = (0..market.n_shares())
        .map(|_| shock_rng.random::<f64>() * width)
        .collect();
    let shocked = market
        .initial_prices()
        .iter()
        .zip(&declines)
        .map(|(p, d)| p * (1.0 - d))
        .collect();
    market.set_shocked(shocked);
    Ok(ShockRealization { declines })
}

/// Collateral value over the frozen loan for one active investor.
pub fn maintenance_margin(market: &BipartiteMarket, investor: usize) -> Result<f64> {
    if investor >= market.n_investors() {
        return Err(Error::Domain(format!("no investor {investor}")));
    }
    if !market.is_active(investor) {
        return Err(Error::Domain(format!("investor {investor} is liquidated")));
    }
    Ok(ratio(market, investor))
}

#[inline]
fn ratio(market: &BipartiteMarket, investor: usize) -> f64 {
    let prices = market.current_prices();
    let value: f64 = market.holdings(investor).iter().map(|&j| prices[j]).sum();
    value / market.loan(investor)
}

pub fn cascade_step(
    market: &mut BipartiteMarket,
    params: &MarketParams,
    t: usize,
) -> Result<StepReport> {
    if !market.is_shocked() {
        return Err(Error::State("cascade step before the initial shock".into()));
    }
    if t < 2 {
        return Err(Error::Domain(format!(
            "cascade steps start at t = 2 (t = 1 is the shock), got {t}"
        )));
    }
    let r = params.maintenance_r;
    let liquidated: Vec<usize> = (0..market.n_investors())
        .filter(|&i| market.is_active(i) && ratio(market, i) < r)
        .collect();

    let mut sell_orders = vec![0u64; market.n_shares()];
    for &i in &liquidated {
        for &j in market.holdings(i) {
            sell_orders[j] += 1;
        }
    }
    for &i in &liquidated {
        market.deactivate(i);
    }
    if !liquidated.is_empty() {
        market.add_sells(&sell_orders, params.price_impact_eta);
    }

    Ok(StepReport {
        step_index: t,
        liquidated,
        sell_orders,
        index_after: market_index(market),
    })
}

/// Shocks a fresh market and iterates to the first step without liquidations.
pub fn run_cascade(market: &mut BipartiteMarket, params: &MarketParams) -> Result<CascadeResult> {
    if market.is_shocked() {
        return Err(Error::State("run_cascade needs an unshocked market".into()));
    }
    let mut index_trajectory = vec![market_index(market)];
    let mut active_trajectory = vec![market.active_count()];

    let shock = apply_initial_shock(market, params)?;
    index_trajectory.push(market_index(market));
    active_trajectory.push(market.active_count());

    let mut steps = Vec::new();
    let mut t = 2;
    loop {
        let report = cascade_step(market, params, t)?;
        if report.liquidated.is_empty() {
            break;
        }
        index_trajectory.push(report.index_after);
        active_trajectory.push(market.active_count());
        steps.push(report);
        t += 1;
    }

    Ok(CascadeResult {
        tau: 1 + steps.len(),
        p_inf: *index_trajectory.last().unwrap(),
        n_inf: market.active_count(),
        index_trajectory,
        active_trajectory,
        steps,
        shock,
    })
}
