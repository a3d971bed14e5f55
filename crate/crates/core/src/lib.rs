//! Cascading-failure model of margin trading on a bipartite market of
//! investors and shares.
//!
//! Investors buy `s` shares each on margin. After a random initial price
//! shock, any account whose collateral-to-loan ratio drops below the
//! minimum maintenance `r` is liquidated, and every sell order lowers the
//! share price by a fixed impact `eta`. Liquidations lower prices, which
//! trigger further liquidations, until a step liquidates nobody.
//!
//! * [`market`]: market construction, index and share degrees.
//! * [`cascade`]: shock, margin ratio and the synchronous cascade.
//! * [`mean_field`]: closed-form onset of immediate margin calls.
//! * [`experiments`]: replica-averaged sweeps, phase grids and the
//!   margin-times study.
//! * [`config`], [`output`], [`runner`]: TOML configs, CSV tables and the
//!   driver used by the `margin-cascade` binary.

pub mod cascade;
pub mod config;
pub mod error;
pub mod experiments;
pub mod market;
pub mod mean_field;
pub mod output;
pub mod params;
pub mod rng;
pub mod runner;

pub use cascade::{
    apply_initial_shock, cascade_step, maintenance_margin, run_cascade, CascadeResult,
    ShockRealization, StepReport,
};
pub use config::{parse_config, parse_config_for, Experiment, RunConfig};
pub use error::{Error, Result};
pub use market::{build_market, margin_times, market_index, BipartiteMarket, MarginTimes};
pub use mean_field::{mean_field_onset, mean_field_onset_with_decline, MeanFieldOnset};
pub use output::{write_grid, write_timeseries};
pub use params::MarketParams;
