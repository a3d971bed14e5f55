#![allow(dead_code)]

use margin_cascade::{BipartiteMarket, CascadeResult, MarketParams};

/// Output of the reference simulator.
#[derive(Debug, PartialEq)]
pub struct NaiveRun {
    pub tau: usize,
    pub p_inf: f64,
    pub n_inf: usize,
    pub index_trajectory: Vec<f64>,
    pub active_trajectory: Vec<usize>,
    pub liquidated_per_step: Vec<Vec<usize>>,
    pub final_prices: Vec<f64>,
}

/// Straightforward re-implementation of the dynamics: every step rebuilds
/// all prices from the shocked prices and a fresh count of liquidated
/// holders, then recomputes every margin ratio from scratch.
pub fn naive_cascade(
    initial: &[f64],
    holdings: &[Vec<usize>],
    k: f64,
    r: f64,
    eta: f64,
    declines: &[f64],
) -> NaiveRun {
    let m = initial.len();
    let n = holdings.len();
    let loans: Vec<f64> = holdings
        .iter()
        .map(|h| {
            let mut v = 0.0;
            for &j in h {
                v += initial[j];
            }
            v * (1.0 - k)
        })
        .collect();
    let shocked: Vec<f64> = (0..m).map(|j| initial[j] * (1.0 - declines[j])).collect();
    let index = |p: &[f64]| {
        let mut s = 0.0;
        for x in p {
            s += x;
        }
        s / m as f64
    };

    let mut gone = vec![false; n];
    let prices_for = |gone: &[bool]| -> Vec<f64> {
        (0..m)
            .map(|j| {
                let holders = (0..n).filter(|&i| gone[i] && holdings[i].contains(&j)).count();
                (shocked[j] - eta * holders as f64).max(0.0)
            })
            .collect()
    };

    let mut index_trajectory = vec![index(initial), index(&shocked)];
    let mut active_trajectory = vec![n, n];
    let mut liquidated_per_step = Vec::new();
    let mut prices = shocked.clone();
    loop {
        let mut hit = Vec::new();
        for i in 0..n {
            if gone[i] {
                continue;
            }
            let mut value = 0.0;
            for &j in &holdings[i] {
                value += prices[j];
            }
            if value / loans[i] < r {
                hit.push(i);
            }
        }
        if hit.is_empty() {
            break;
        }
        for &i in &hit {
            gone[i] = true;
        }
        prices = prices_for(&gone);
        index_trajectory.push(index(&prices));
        active_trajectory.push(gone.iter().filter(|g| !**g).count());
        liquidated_per_step.push(hit);
    }
    NaiveRun {
        tau: 1 + liquidated_per_step.len(),
        p_inf: *index_trajectory.last().unwrap(),
        n_inf: *active_trajectory.last().unwrap(),
        index_trajectory,
        active_trajectory,
        liquidated_per_step,
        final_prices: prices,
    }
}

pub fn holdings_of(market: &BipartiteMarket) -> Vec<Vec<usize>> {
    market.all_holdings().map(|h| h.to_vec()).collect()
}

/// Checks the structural invariants of a finished run. `market` is the
/// state after `run_cascade`.
pub fn check_run(market: &BipartiteMarket, res: &CascadeResult, params: &MarketParams) -> Result<(), String> {
    let n = market.n_investors();
    let s = market.diversity() as u64;

    if res.index_trajectory.len() != res.tau + 1 || res.active_trajectory.len() != res.tau + 1 {
        return Err("trajectory length is not tau + 1".into());
    }
    if res.index_trajectory[1..].windows(2).any(|w| w[1] > w[0]) {
        return Err("index increased after the shock".into());
    }
    if res.active_trajectory.windows(2).any(|w| w[1] > w[0]) {
        return Err("active count increased".into());
    }
    if (res.tau == 1) != (res.total_liquidated() == 0) {
        return Err("tau = 1 does not match absence of liquidations".into());
    }
    if res.p_inf != *res.index_trajectory.last().unwrap() || res.n_inf != *res.active_trajectory.last().unwrap() {
        return Err("p_inf/n_inf differ from trajectory tails".into());
    }
    let mut seen = vec![false; n];
    for step in &res.steps {
        let mut orders = vec![0u64; market.n_shares()];
        for &i in &step.liquidated {
            if seen[i] {
                return Err(format!("investor {i} liquidated twice"));
            }
            seen[i] = true;
            for &j in market.holdings(i) {
                orders[j] += 1;
            }
        }
        if orders != step.sell_orders {
            return Err(format!("sell orders of step {} disagree with holdings", step.step_index));
        }
    }
    if res.total_sell_orders() != s * (n - res.n_inf) as u64 {
        return Err(format!(
            "sell-order conservation: {} != {} * ({} - {})",
            res.total_sell_orders(),
            s,
            n,
            res.n_inf
        ));
    }

    let shocked = market.shocked_prices().ok_or("market not shocked")?;
    let mut holders = vec![0u64; market.n_shares()];
    for (i, h) in market.all_holdings().enumerate() {
        if !market.is_active(i) {
            for &j in h {
                holders[j] += 1;
            }
        }
    }
    if market.clamped_shares() == 0 {
        for j in 0..market.n_shares() {
            let expected = shocked[j] - params.price_impact_eta * holders[j] as f64;
            if market.current_prices()[j] != expected {
                return Err(format!(
                    "closed form violated at share {j}: {} != {expected}",
                    market.current_prices()[j]
                ));
            }
        }
    }
    for j in 0..market.n_shares() {
        let p = market.current_prices()[j];
        if p < 0.0 || p > market.initial_prices()[j] || p > shocked[j] {
            return Err(format!("price bounds violated at share {j}"));
        }
    }
    Ok(())
}
