use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::params::MarketParams;
use crate::rng;

/// Bipartite investor/share market.
///
/// Each investor holds one unit of each of its `s` shares, bought with a loan
/// of `(1 - k)` times the initial value. Loans are fixed at construction.
///
/// Current prices are kept as `max(0, shocked - eta * sold)` where `sold` is
/// the cumulative number of sell orders a share has received, so a price
/// only depends on how many of its holders have been liquidated and not on
/// how those liquidations were spread across steps.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteMarket {
    diversity: usize,
    initial_margin_k: f64,
    initial_prices: Vec<f64>,
    shocked_prices: Option<Vec<f64>>,
    current_prices: Vec<f64>,
    pub(crate) holdings: Vec<usize>,
    pub(crate) loans: Vec<f64>,
    pub(crate) active: Vec<bool>,
    pub(crate) n_active: usize,
    sold: Vec<u64>,
}

/// Number of investors holding each share at construction time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarginTimes {
    pub counts: Vec<usize>,
}

impl MarginTimes {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() as f64 / self.counts.len() as f64
    }
}

pub fn build_market(params: &MarketParams) -> Result<BipartiteMarket> {
    params.validate()?;
    let m = params.n_shares;
    let s = params.diversity_s;

    let lognormal = LogNormal::new(params.price_median.ln(), params.price_sigma)
        .map_err(|e| Error::config("price_sigma", e.to_string()))?;
    let mut price_rng = rng::stream(params.seed, rng::PRICE_STREAM);
    let initial_prices: Vec<f64> = (0..m).map(|_| lognormal.sample(&mut price_rng)).collect();

    let mut holdings_rng = rng::stream(params.seed, rng::HOLDINGS_STREAM);
    let mut holdings = Vec::with_capacity(params.n_investors * s);
    for _ in 0..params.n_investors {
        let start = holdings.len();
        // Floyd's sampling: s distinct indices from 0..m.
        for j in (m - s)..m {
            let t = holdings_rng.random_range(0..=j);
            if holdings[start..].contains(&t) {
                holdings.push(j);
            } else {
                holdings.push(t);
            }
        }
    }

    Ok(BipartiteMarket::assemble(
        initial_prices,
        holdings,
        s,
        params.initial_margin_k,
    ))
}

impl BipartiteMarket {
    /// Builds a market from explicit prices and holdings.
    pub fn from_parts(
        initial_prices: Vec<f64>,
        holdings: &[Vec<usize>],
        initial_margin_k: f64,
    ) -> Result<Self> {
        if initial_prices.is_empty() {
            return Err(Error::config("initial_prices", "must be non-empty"));
        }
        if let Some(p) = initial_prices.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::config(
                "initial_prices",
                format!("all prices must be positive and finite, got {p}"),
            ));
        }
        if !(0.0..1.0).contains(&initial_margin_k) {
            return Err(Error::config("initial_margin_k", "must be in [0, 1)"));
        }
        let Some(first) = holdings.first() else {
            return Err(Error::config("holdings", "at least one investor required"));
        };
        let s = first.len();
        if s == 0 {
            return Err(Error::config("holdings", "investors must hold at least one share"));
        }
        let m = initial_prices.len();
        let mut flat = Vec::with_capacity(holdings.len() * s);
        for (i, h) in holdings.iter().enumerate() {
            if h.len() != s {
                return Err(Error::config(
                    format!("holdings[{i}]"),
                    format!("expected {s} shares, got {}", h.len()),
                ));
            }
            for (pos, &j) in h.iter().enumerate() {
                if j >= m {
                    return Err(Error::config(
                        format!("holdings[{i}]"),
                        format!("share index {j} out of range (M = {m})"),
                    ));
                }
                if h[..pos].contains(&j) {
                    return Err(Error::config(
                        format!("holdings[{i}]"),
                        format!("share index {j} repeated"),
                    ));
                }
            }
            flat.extend_from_slice(h);
        }
        Ok(Self::assemble(initial_prices, flat, s, initial_margin_k))
    }

    fn assemble(initial_prices: Vec<f64>, holdings: Vec<usize>, s: usize, k: f64) -> Self {
        let n = holdings.len() / s;
        let loans = holdings
            .chunks_exact(s)
            .map(|h| h.iter().map(|&j| initial_prices[j]).sum::<f64>() * (1.0 - k))
            .collect();
        let m = initial_prices.len();
        Self {
            diversity: s,
            initial_margin_k: k,
            current_prices: initial_prices.clone(),
            initial_prices,
            shocked_prices: None,
            holdings,
            loans,
            active: vec![true; n],
            n_active: n,
            sold: vec![0; m],
        }
    }

    pub fn n_investors(&self) -> usize {
        self.active.len()
    }

    pub fn n_shares(&self) -> usize {
        self.initial_prices.len()
    }

    pub fn diversity(&self) -> usize {
        self.diversity
    }

    pub fn initial_margin_k(&self) -> f64 {
        self.initial_margin_k
    }

    pub fn initial_prices(&self) -> &[f64] {
        &self.initial_prices
    }

    pub fn current_prices(&self) -> &[f64] {
        &self.current_prices
    }

    /// Prices right after the shock, `None` before it is applied.
    pub fn shocked_prices(&self) -> Option<&[f64]> {
        self.shocked_prices.as_deref()
    }

    pub fn holdings(&self, investor: usize) -> &[usize] {
        &self.holdings[investor * self.diversity..(investor + 1) * self.diversity]
    }

    pub fn all_holdings(&self) -> impl Iterator<Item = &[usize]> {
        self.holdings.chunks_exact(self.diversity)
    }

    pub fn loan(&self, investor: usize) -> f64 {
        self.loans[investor]
    }

    pub fn loans(&self) -> &[f64] {
        &self.loans
    }

    pub fn is_active(&self, investor: usize) -> bool {
        self.active[investor]
    }

    pub fn active_count(&self) -> usize {
        self.n_active
    }

    pub fn is_shocked(&self) -> bool {
        self.shocked_prices.is_some()
    }

    /// Cumulative sell orders received by each share.
    pub fn sell_totals(&self) -> &[u64] {
        &self.sold
    }

    /// Number of shares whose price has been floored at zero.
    pub fn clamped_shares(&self) -> usize {
        match &self.shocked_prices {
            Some(_) => self.current_prices.iter().filter(|&&p| p == 0.0).count(),
            None => 0,
        }
    }

    pub(crate) fn set_shocked(&mut self, shocked: Vec<f64>) {
        self.current_prices.clone_from(&shocked);
        self.shocked_prices = Some(shocked);
    }

    pub(crate) fn deactivate(&mut self, investor: usize) {
        debug_assert!(self.active[investor]);
        self.active[investor] = false;
        self.n_active -= 1;
    }

    pub(crate) fn add_sells(&mut self, orders: &[u64], eta: f64) {
        let shocked = self
            .shocked_prices
            .as_ref()
            .expect("sell orders before shock");
        for (j, &n) in orders.iter().enumerate() {
            if n == 0 {
                continue;
            }
            self.sold[j] += n;
            self.current_prices[j] = (shocked[j] - eta * self.sold[j] as f64).max(0.0);
        }
    }
}

/// Arithmetic mean of current prices.
pub fn market_index(market: &BipartiteMarket) -> f64 {
    mean(market.current_prices())
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn margin_times(market: &BipartiteMarket) -> MarginTimes {
    let mut counts = vec![0usize; market.n_shares()];
    for &j in &market.holdings {
        counts[j] += 1;
    }
    MarginTimes { counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn params(n: usize, m: usize, s: usize, k: f64, seed: u64) -> MarketParams {
        MarketParams {
            n_investors: n,
            n_shares: m,
            diversity_s: s,
            initial_margin_k: k,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn paper_scale_degrees_and_loans() {
        let market = build_market(&params(20_000, 1_000, 20, 0.5, 11)).unwrap();
        assert_eq!(market.n_investors(), 20_000);
        for (i, h) in market.all_holdings().enumerate() {
            assert_eq!(h.len(), 20);
            let mut sorted = h.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 20);
            assert!(sorted.iter().all(|&j| j < 1_000));
            let value: f64 = h.iter().map(|&j| market.initial_prices()[j]).sum();
            assert_eq!(market.loan(i), value * 0.5);
        }
        assert_eq!(market.active_count(), 20_000);
        assert_eq!(market.current_prices(), market.initial_prices());
    }

    #[test]
    fn saturated_holdings() {
        let market = build_market(&params(30, 8, 8, 0.2, 3)).unwrap();
        for h in market.all_holdings() {
            let mut sorted = h.to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..8).collect::<Vec<_>>());
        }
        assert_eq!(margin_times(&market).counts, vec![30; 8]);
    }

    #[test]
    fn hand_replay_of_draw_order() {
        let p = MarketParams {
            price_median: 50.0,
            price_sigma: 0.3,
            ..params(4, 2, 1, 0.25, 0xfeed)
        };
        let market = build_market(&p).unwrap();

        let mut prices_rng = rng::stream(p.seed, rng::PRICE_STREAM);
        let expected_prices: Vec<f64> = (0..2)
            .map(|_| {
                let z: f64 = prices_rng.sample(StandardNormal);
                (50f64.ln() + 0.3 * z).exp()
            })
            .collect();
        assert_eq!(market.initial_prices(), expected_prices.as_slice());

        // Floyd's algorithm with M=2, s=1 is a single draw from 0..=1.
        let mut holdings_rng = rng::stream(p.seed, rng::HOLDINGS_STREAM);
        for i in 0..4 {
            let j: usize = holdings_rng.random_range(0..=1);
            assert_eq!(market.holdings(i), &[j]);
            assert_eq!(market.loan(i), expected_prices[j] * 0.75);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = params(500, 50, 5, 0.3, 99);
        assert_eq!(build_market(&p).unwrap(), build_market(&p).unwrap());
        let other = build_market(&MarketParams { seed: 100, ..p }).unwrap();
        assert_ne!(other.initial_prices(), build_market(&params(500, 50, 5, 0.3, 99)).unwrap().initial_prices());
    }

    #[test]
    fn index_is_mean() {
        let m = BipartiteMarket::from_parts(vec![2000.0; 4], &[vec![0, 1]], 0.5).unwrap();
        assert_eq!(market_index(&m), 2000.0);
        let m = BipartiteMarket::from_parts(vec![1000.0, 3000.0], &[vec![0]], 0.5).unwrap();
        assert_eq!(market_index(&m), 2000.0);
    }

    #[test]
    fn handshake_and_binomial_occupancy() {
        let market = build_market(&params(20_000, 1_000, 20, 0.5, 5)).unwrap();
        let mt = margin_times(&market);
        assert_eq!(mt.total(), 400_000);
        assert_eq!(mt.mean(), 400.0);

        // Pearson chi-square of the degree histogram against Binomial(N, s/M),
        // bins pooled so every expected count is at least 5.
        let (n, q) = (20_000u64, 0.02f64);
        let pmf = |x: u64| -> f64 {
            let ln = ln_choose(n, x) + x as f64 * q.ln() + (n - x) as f64 * (1.0 - q).ln();
            ln.exp()
        };
        let mut observed = [0f64; 3];
        let mut expected = [0f64; 3];
        // bins: < 380, 380..=420, > 420
        for d in &mt.counts {
            let b = match *d {
                d if d < 380 => 0,
                d if d <= 420 => 1,
                _ => 2,
            };
            observed[b] += 1.0;
        }
        for x in 0..=n.min(2000) {
            let b = match x {
                x if x < 380 => 0,
                x if x <= 420 => 1,
                _ => 2,
            };
            expected[b] += 1000.0 * pmf(x);
        }
        let chi2: f64 = observed
            .iter()
            .zip(&expected)
            .map(|(o, e)| (o - e).powi(2) / e)
            .sum();
        // 2 degrees of freedom, 0.999 quantile is 13.8.
        assert!(chi2 < 13.8, "chi2 = {chi2}, observed {observed:?} expected {expected:?}");
    }

    fn ln_choose(n: u64, x: u64) -> f64 {
        let lg = |v: u64| (1..=v).map(|i| (i as f64).ln()).sum::<f64>();
        lg(n) - lg(x) - lg(n - x)
    }

    #[test]
    fn lognormal_median_within_five_percent() {
        for seed in 0..20 {
            let market = build_market(&params(1, 1_000, 1, 0.5, seed)).unwrap();
            let mut prices = market.initial_prices().to_vec();
            prices.sort_by(f64::total_cmp);
            let median = (prices[499] + prices[500]) / 2.0;
            assert!((median / 2000.0 - 1.0).abs() < 0.05, "seed {seed}: median {median}");
        }
    }

    #[test]
    fn from_parts_rejects_bad_holdings() {
        assert!(BipartiteMarket::from_parts(vec![1.0, 2.0], &[vec![0, 0]], 0.5).is_err());
        assert!(BipartiteMarket::from_parts(vec![1.0, 2.0], &[vec![2]], 0.5).is_err());
        assert!(BipartiteMarket::from_parts(vec![1.0, 2.0], &[vec![0], vec![0, 1]], 0.5).is_err());
        assert!(BipartiteMarket::from_parts(vec![1.0, -2.0], &[vec![0]], 0.5).is_err());
        assert!(BipartiteMarket::from_parts(vec![1.0, 2.0], &[vec![0]], 1.0).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let err = build_market(&params(10, 5, 6, 0.5, 0)).unwrap_err();
        assert!(err.to_string().starts_with("diversity_s"));
    }
}
