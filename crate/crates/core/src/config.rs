//! TOML run configuration.
//!
//! ```toml
//! experiment = "sweep"   # run | sweep | phase | diversify | margin-times
//! seed = 42              # master seed; the market seed for `run`
//! replicas = 20
//! out = "tau_k.csv"
//!
//! [market]               # any MarketParams field except `seed`
//! maintenance_r = 1.6
//!
//! [sweep]
//! axis = "k"
//! range = { from = 0.40, to = 0.65, step = 0.005 }   # or values = [...]
//! ```
//!
//! A `[phase]` block holds `axis1` and `axis2`, each written like a sweep
//! block (`{ axis = "r", range = {...} }`); `[diversify]` holds `s_values`.
//! Blocks that the selected experiment does not use are rejected.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{Axis, DEFAULT_REPLICAS};
use crate::params::MarketParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Run,
    Sweep,
    Phase,
    Diversify,
    MarginTimes,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Run => "run",
            Experiment::Sweep => "sweep",
            Experiment::Phase => "phase",
            Experiment::Diversify => "diversify",
            Experiment::MarginTimes => "margin-times",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "run" => Experiment::Run,
            "sweep" => Experiment::Sweep,
            "phase" => Experiment::Phase,
            "diversify" => Experiment::Diversify,
            "margin-times" => Experiment::MarginTimes,
            other => {
                return Err(Error::config("experiment", format!("unknown experiment `{other}`")))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxisValues {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentSpec {
    Run,
    Sweep(AxisValues),
    Phase { axis1: AxisValues, axis2: AxisValues },
    Diversify { s_values: Vec<usize> },
    MarginTimes,
}

impl ExperimentSpec {
    pub fn kind(&self) -> Experiment {
        match self {
            ExperimentSpec::Run => Experiment::Run,
            ExperimentSpec::Sweep(_) => Experiment::Sweep,
            ExperimentSpec::Phase { .. } => Experiment::Phase,
            ExperimentSpec::Diversify { .. } => Experiment::Diversify,
            ExperimentSpec::MarginTimes => Experiment::MarginTimes,
        }
    }

    /// Default block for an experiment: the k sweep at 0.005 resolution, the
    /// r-k phase grid, and the s list {2, 5, 10, 20, 40}.
    pub fn default_for(kind: Experiment) -> Self {
        match kind {
            Experiment::Run => ExperimentSpec::Run,
            Experiment::Sweep => ExperimentSpec::Sweep(AxisValues {
                axis: Axis::K,
                values: expand_range(0.40, 0.65, 0.005).unwrap(),
            }),
            Experiment::Phase => ExperimentSpec::Phase {
                axis1: AxisValues {
                    axis: Axis::R,
                    values: expand_range(1.2, 2.0, 0.05).unwrap(),
                },
                axis2: AxisValues {
                    axis: Axis::K,
                    values: expand_range(0.3, 0.7, 0.02).unwrap(),
                },
            },
            Experiment::Diversify => ExperimentSpec::Diversify {
                s_values: vec![2, 5, 10, 20, 40],
            },
            Experiment::MarginTimes => ExperimentSpec::MarginTimes,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Market parameters; `market.seed` equals `master_seed`.
    pub market: MarketParams,
    pub experiment: ExperimentSpec,
    pub replicas: usize,
    pub out: Option<PathBuf>,
    pub master_seed: u64,
}

impl RunConfig {
    pub fn defaults(kind: Experiment) -> Self {
        RunConfig {
            market: MarketParams::default(),
            experiment: ExperimentSpec::default_for(kind),
            replicas: DEFAULT_REPLICAS,
            out: None,
            master_seed: 0,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.master_seed = seed;
        self.market.seed = seed;
    }

    pub fn set_replicas(&mut self, replicas: usize) -> Result<()> {
        if replicas == 0 {
            return Err(Error::config("replicas", "must be >= 1"));
        }
        self.replicas = replicas;
        Ok(())
    }
}

/// Expands `from..=to` in increments of `step`. The span must be a whole
/// number of steps (to within 1e-9 of a step); values are rounded to 1e-9 and
/// the last one is `to` exactly.
pub fn expand_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(Error::config("range", "from, to and step must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::config("range.step", "must be > 0"));
    }
    if to < from {
        return Err(Error::config("range.to", "must be >= from"));
    }
    let steps = (to - from) / step;
    let n = steps.round();
    if (steps - n).abs() > 1e-9 {
        return Err(Error::config(
            "range.step",
            format!("{step} does not divide the span {from}..{to}"),
        ));
    }
    let n = n as usize;
    Ok((0..=n)
        .map(|i| {
            if i == n {
                to
            } else {
                ((from + i as f64 * step) * 1e9).round() / 1e9
            }
        })
        .collect())
}

// ---- document schema ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    experiment: Option<String>,
    seed: Option<u64>,
    replicas: Option<usize>,
    out: Option<PathBuf>,
    market: Option<MarketBlock>,
    sweep: Option<AxisBlock>,
    phase: Option<PhaseBlock>,
    diversify: Option<DiversifyBlock>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct MarketBlock {
    n_investors: Option<usize>,
    n_shares: Option<usize>,
    diversity_s: Option<usize>,
    initial_margin_k: Option<f64>,
    maintenance_r: Option<f64>,
    volatility_v: Option<f64>,
    price_impact_eta: Option<f64>,
    price_median: Option<f64>,
    price_sigma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisBlock {
    axis: String,
    values: Option<Vec<f64>>,
    range: Option<RangeBlock>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RangeBlock {
    from: f64,
    to: f64,
    step: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseBlock {
    axis1: AxisBlock,
    axis2: AxisBlock,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiversifyBlock {
    s_values: Vec<usize>,
}

fn prefixed(prefix: &str, err: Error) -> Error {
    match err {
        Error::Config { field, reason } => Error::Config {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    }
}

impl MarketBlock {
    fn into_params(self, seed: u64) -> MarketParams {
        let d = MarketParams::default();
        MarketParams {
            n_investors: self.n_investors.unwrap_or(d.n_investors),
            n_shares: self.n_shares.unwrap_or(d.n_shares),
            diversity_s: self.diversity_s.unwrap_or(d.diversity_s),
            initial_margin_k: self.initial_margin_k.unwrap_or(d.initial_margin_k),
            maintenance_r: self.maintenance_r.unwrap_or(d.maintenance_r),
            volatility_v: self.volatility_v.unwrap_or(d.volatility_v),
            price_impact_eta: self.price_impact_eta.unwrap_or(d.price_impact_eta),
            price_median: self.price_median.unwrap_or(d.price_median),
            price_sigma: self.price_sigma.unwrap_or(d.price_sigma),
            seed,
        }
    }
}

impl AxisBlock {
    fn resolve(self, path: &str, base: &MarketParams) -> Result<AxisValues> {
        let axis: Axis = self.axis.parse().map_err(|e| prefixed(path, e))?;
        let values = match (self.values, self.range) {
            (Some(v), None) => v,
            (None, Some(r)) => {
                expand_range(r.from, r.to, r.step).map_err(|e| prefixed(path, e))?
            }
            (Some(_), Some(_)) => {
                return Err(Error::config(path, "give either `values` or `range`, not both"))
            }
            (None, None) => return Err(Error::config(path, "missing `values` or `range`")),
        };
        if values.is_empty() {
            return Err(Error::config(format!("{path}.values"), "must be non-empty"));
        }
        for &v in &values {
            axis.apply(base, v).map_err(|e| prefixed(path, e))?;
        }
        Ok(AxisValues { axis, values })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration document.
///
/// `selector` supplies the experiment when the CLI names it; a document that
/// names a different one is rejected.
pub fn parse_config_for(text: &str, selector: Option<Experiment>) -> Result<RunConfig> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let msg = e.message().replace('\n', " ");
        match e.span() {
            Some(span) => Error::Parse(format!("line {}: {}", line_of(text, span.start), msg.trim())),
            None => Error::Parse(msg.trim().to_string()),
        }
    })?;

    let in_doc = doc.experiment.as_deref().map(str::parse).transpose()?;
    let kind = match (in_doc, selector) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::config(
                "experiment",
                format!("document selects `{a}` but the command is `{b}`"),
            ))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(Error::config("experiment", "missing experiment selector")),
    };

    let seed = doc.seed.unwrap_or(0);
    let market = doc.market.unwrap_or_default().into_params(seed);
    market.validate().map_err(|e| prefixed("market", e))?;

    let replicas = doc.replicas.unwrap_or(DEFAULT_REPLICAS);
    if replicas == 0 {
        return Err(Error::config("replicas", "must be >= 1"));
    }

    let unused = |present: bool, block: &str| -> Result<()> {
        if present {
            Err(Error::config(block, format!("block is not used by experiment `{kind}`")))
        } else {
            Ok(())
        }
    };
    if kind != Experiment::Sweep {
        unused(doc.sweep.is_some(), "sweep")?;
    }
    if kind != Experiment::Phase {
        unused(doc.phase.is_some(), "phase")?;
    }
    if kind != Experiment::Diversify {
        unused(doc.diversify.is_some(), "diversify")?;
    }

    let experiment = match kind {
        Experiment::Run => ExperimentSpec::Run,
        Experiment::MarginTimes => ExperimentSpec::MarginTimes,
        Experiment::Sweep => match doc.sweep {
            Some(block) => ExperimentSpec::Sweep(block.resolve("sweep", &market)?),
            None => ExperimentSpec::default_for(kind),
        },
        Experiment::Phase => match doc.phase {
            Some(block) => {
                let axis1 = block.axis1.resolve("phase.axis1", &market)?;
                let axis2 = block.axis2.resolve("phase.axis2", &market)?;
                if axis1.axis == axis2.axis {
                    return Err(Error::config("phase.axis2", "must differ from axis1"));
                }
                ExperimentSpec::Phase { axis1, axis2 }
            }
            None => ExperimentSpec::default_for(kind),
        },
        Experiment::Diversify => match doc.diversify {
            Some(block) => {
                if block.s_values.is_empty() {
                    return Err(Error::config("diversify.s_values", "must be non-empty"));
                }
                for &s in &block.s_values {
                    Axis::S
                        .apply(&market, s as f64)
                        .map_err(|e| prefixed("diversify", e))?;
                }
                ExperimentSpec::Diversify {
                    s_values: block.s_values,
                }
            }
            None => ExperimentSpec::default_for(kind),
        },
    };

    Ok(RunConfig {
        market,
        experiment,
        replicas,
        out: doc.out,
        master_seed: seed,
    })
}

/// Parses a document that names its own experiment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}
