use crate::error::{Error, Result};

/// Mean-field estimate of immediate margin calls after the shock.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldOnset {
    pub mean_decline: f64,
    /// Whether the average account falls below `r` right after the shock.
    pub predicted_liquidation: bool,
    /// Initial margin below which the average account is margin-called.
    pub k_mf: f64,
}

/// Mean-field onset with the average decline of a uniform `[0, v/100]` shock.
pub fn mean_field_onset(k: f64, r: f64, v: f64) -> Result<MeanFieldOnset> {
    mean_field_onset_with_decline(k, r, v / 200.0)
}

/// The average account is liquidated when `(1 - d) / (1 - k) < r`.
pub fn mean_field_onset_with_decline(k: f64, r: f64, mean_decline: f64) -> Result<MeanFieldOnset> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::Domain(format!("k must be in [0, 1), got {k}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!(
            "k_mf is undefined for r = {r}; r must be positive"
        )));
    }
    if !(0.0..=1.0).contains(&mean_decline) {
        return Err(Error::Domain(format!(
            "mean decline must be in [0, 1], got {mean_decline}"
        )));
    }
    let surviving = 1.0 - mean_decline;
    Ok(MeanFieldOnset {
        mean_decline,
        predicted_liquidation: surviving / (1.0 - k) < r,
        k_mf: 1.0 - surviving / r,
    })
}
