//! Generic curiosity-arousal toolkit: Wundt curve, entropy, attention spread.
//!
//! Everything here is a pure function of its arguments and independent of
//! the classifier. Stimulation levels live in [0, 1]; the Wundt curve maps
//! them to a hedonic value, `interest_zone` buckets that value into
//! boredom / curiosity / anxiety, and `attention_spread` widens a Gaussian
//! attention window under sustained boredom or near-threshold failure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wundt curve parameters: hedonic value is the difference of a reward and
/// a punishment sigmoid over the stimulation axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WundtParams {
    pub r_max: f64,
    pub p_max: f64,
    pub rho_r: f64,
    pub rho_p: f64,
    pub r_min: f64,
    pub p_min: f64,
}

impl Default for WundtParams {
    fn default() -> Self {
        WundtParams {
            r_max: 1.0,
            p_max: 1.0,
            rho_r: 10.0,
            rho_p: 10.0,
            r_min: 0.25,
            p_min: 0.75,
        }
    }
}

impl WundtParams {
    fn check(&self) -> Result<()> {
        let all = [
            self.r_max, self.p_max, self.rho_r, self.rho_p, self.r_min, self.p_min,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("wundt parameters must be finite"));
        }
        if self.rho_r <= 0.0 || self.rho_p <= 0.0 {
            return Err(Error::domain("wundt slopes rho_r and rho_p must be positive"));
        }
        Ok(())
    }

    /// True in the canonical rise-then-fall regime, where reward onsets at a
    /// lower stimulation level than punishment.
    pub fn is_rise_then_fall(&self) -> bool {
        self.r_min < self.p_min
    }
}

/// Attention-spread parameters: baseline width plus boredom and failure
/// correction terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadParams {
    pub sigma0: f64,
    pub k_b: f64,
    pub k_f: f64,
    pub t_f: f64,
}

impl SpreadParams {
    fn check(&self) -> Result<()> {
        let all = [self.sigma0, self.k_b, self.k_f, self.t_f];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("spread parameters must be finite"));
        }
        if self.sigma0 < 0.0 || self.k_b < 0.0 || self.k_f < 0.0 {
            return Err(Error::domain("spread coefficients must be non-negative"));
        }
        Ok(())
    }
}

/// Interest level induced by a stimulation value on the Wundt curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterestZone {
    Boredom,
    Curiosity,
    Anxiety,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Hedonic value of a stimulation level: reward sigmoid minus punishment
/// sigmoid.
pub fn wundt_hedonic(stimulation: f64, params: &WundtParams) -> Result<f64> {
    params.check()?;
    if !stimulation.is_finite() {
        return Err(Error::domain("stimulation must be finite"));
    }
    let reward = params.r_max * sigmoid(params.rho_r * (stimulation - params.r_min));
    let punishment = params.p_max * sigmoid(params.rho_p * (stimulation - params.p_min));
    Ok(reward - punishment)
}

/// Shannon entropy in bits, with the continuity convention 0·log2(0) = 0.
pub fn shannon_entropy(probs: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::domain("probabilities must be finite and non-negative"));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "probabilities must sum to 1 within 1e-9, got {sum}"
        )));
    }
    let h = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(h)
}

/// Entropy scaled to [0, 1] by its maximum log2(n); needs n >= 2 outcomes.
pub fn normalized_entropy(probs: &[f64]) -> Result<f64> {
    if probs.len() < 2 {
        return Err(Error::domain("normalized entropy needs at least two outcomes"));
    }
    Ok(shannon_entropy(probs)? / (probs.len() as f64).log2())
}

/// Attention-spread width: sigma0 + k_b·t_b + k_f·(t_f − s_r)².
///
/// `t_b` counts consecutive boredom events and `s_r` is the recent success
/// rate in [0, 1].
pub fn attention_spread(t_b: u64, s_r: f64, params: &SpreadParams) -> Result<f64> {
    params.check()?;
    if !s_r.is_finite() {
        return Err(Error::domain("success rate must be finite"));
    }
    let failure = params.t_f - s_r;
    Ok(params.sigma0 + params.k_b * t_b as f64 + params.k_f * failure * failure)
}

/// Stimulation value maximizing the hedonic curve, located on a fixed
/// 1e−3-step grid over [0, 1].
pub fn wundt_argmax(params: &WundtParams) -> Result<f64> {
    params.check()?;
    let mut best_x = 0.0;
    let mut best_h = f64::NEG_INFINITY;
    for k in 0..=1000 {
        let x = k as f64 / 1000.0;
        let h = wundt_hedonic(x, params)?;
        if h > best_h {
            best_h = h;
            best_x = x;
        }
    }
    Ok(best_x)
}

/// Buckets a stimulation level into boredom, curiosity, or anxiety.
///
/// Hedonic values below `zone_eps` are outside the interest zone; which
/// side of the curve's peak the stimulation falls on decides whether that
/// is boredom (below) or anxiety (above). Requires the rise-then-fall
/// regime so the peak is meaningful.
pub fn interest_zone(
    stimulation: f64,
    params: &WundtParams,
    zone_eps: f64,
) -> Result<InterestZone> {
    if !params.is_rise_then_fall() {
        return Err(Error::domain(
            "interest zones need the rise-then-fall regime (r_min < p_min)",
        ));
    }
    if !(zone_eps > 0.0) {
        return Err(Error::domain("zone_eps must be positive"));
    }
    let h = wundt_hedonic(stimulation, params)?;
    if h >= zone_eps {
        return Ok(InterestZone::Curiosity);
    }
    let peak = wundt_argmax(params)?;
    if stimulation < peak {
        Ok(InterestZone::Boredom)
    } else {
        Ok(InterestZone::Anxiety)
    }
}

/// Default hedonic threshold separating the curiosity zone from boredom and
/// anxiety.
///
/// Sized so the default curve's tails (H ≈ 0.075 at both ends of [0, 1])
/// fall outside the interest zone.
pub const DEFAULT_ZONE_EPS: f64 = 0.1;
