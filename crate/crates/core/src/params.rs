use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model constants for one market instance.
///
/// Defaults are the reference configuration: 20000 investors, 1000 shares,
/// 20 shares per investor, price impact of 5 units per sell order, and
/// log-normal initial prices with median 2000 and log-scale 0.5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketParams {
    pub n_investors: usize,
    pub n_shares: usize,
    pub diversity_s: usize,
    pub initial_margin_k: f64,
    pub maintenance_r: f64,
    pub volatility_v: f64,
    pub price_impact_eta: f64,
    pub price_median: f64,
    pub price_sigma: f64,
    pub seed: u64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            n_investors: 20_000,
            n_shares: 1_000,
            diversity_s: 20,
            initial_margin_k: 0.5,
            maintenance_r: 1.6,
            volatility_v: 30.0,
            price_impact_eta: 5.0,
            price_median: 2000.0,
            price_sigma: 0.5,
            seed: 0,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_investors == 0 {
            return Err(Error::config("n_investors", "must be >= 1"));
        }
        if self.n_shares == 0 {
            return Err(Error::config("n_shares", "must be >= 1"));
        }
        if self.diversity_s == 0 {
            return Err(Error::config("diversity_s", "must be >= 1"));
        }
        if self.diversity_s > self.n_shares {
            return Err(Error::config(
                "diversity_s",
                format!("must be <= n_shares ({})", self.n_shares),
            ));
        }
        let k = self.initial_margin_k;
        if !k.is_finite() || k < 0.0 {
            return Err(Error::config("initial_margin_k", "must be >= 0"));
        }
        if k >= 1.0 {
            return Err(Error::config("initial_margin_k", "must be < 1"));
        }
        if !self.maintenance_r.is_finite() || self.maintenance_r < 0.0 {
            return Err(Error::config("maintenance_r", "must be a finite value >= 0"));
        }
        let v = self.volatility_v;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::config("volatility_v", "must be >= 0"));
        }
        if v > 100.0 {
            return Err(Error::config("volatility_v", "must be <= 100"));
        }
        if !self.price_impact_eta.is_finite() || self.price_impact_eta < 0.0 {
            return Err(Error::config("price_impact_eta", "must be a finite value >= 0"));
        }
        if !self.price_median.is_finite() || self.price_median <= 0.0 {
            return Err(Error::config("price_median", "must be > 0"));
        }
        if !self.price_sigma.is_finite() || self.price_sigma <= 0.0 {
            return Err(Error::config("price_sigma", "must be > 0"));
        }
        Ok(())
    }

    /// Upper bound of the per-share shock decline fraction.
    pub fn max_decline(&self) -> f64 {
        self.volatility_v / 100.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn defaults_are_valid() {
        MarketParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_k_of_one() {
        let p = MarketParams {
            initial_margin_k: 1.0,
            ..Default::default()
        };
        let err = p.validate().unwrap_err();
        assert_eq!(err.to_string(), "initial_margin_k: must be < 1");
    }

    #[test]
    fn rejects_each_bad_field() {
        let base = MarketParams::default();
        let cases: Vec<(MarketParams, &str)> = vec![
            (MarketParams { n_investors: 0, ..base.clone() }, "n_investors"),
            (MarketParams { n_shares: 0, ..base.clone() }, "n_shares"),
            (MarketParams { diversity_s: 0, ..base.clone() }, "diversity_s"),
            (MarketParams { diversity_s: 1001, ..base.clone() }, "diversity_s"),
            (MarketParams { initial_margin_k: -0.1, ..base.clone() }, "initial_margin_k"),
            (MarketParams { maintenance_r: -1.0, ..base.clone() }, "maintenance_r"),
            (MarketParams { volatility_v: 100.5, ..base.clone() }, "volatility_v"),
            (MarketParams { price_impact_eta: f64::NAN, ..base.clone() }, "price_impact_eta"),
            (MarketParams { price_median: 0.0, ..base.clone() }, "price_median"),
            (MarketParams { price_sigma: 0.0, ..base.clone() }, "price_sigma"),
        ];
        for (p, field) in cases {
            assert_eq!(field_of(p.validate().unwrap_err()), field);
        }
    }

    #[test]
    fn boundary_values_accepted() {
        let p = MarketParams {
            diversity_s: 1000,
            initial_margin_k: 0.0,
            maintenance_r: 0.0,
            volatility_v: 100.0,
            ..Default::default()
        };
        p.validate().unwrap();
    }
}
