//! Zero sets of Ornstein-Uhlenbeck processes driven by a strictly
//! `alpha`-stable Levy process, started at 0.
//!
//! For `alpha` in `(1, 2]` the zero set is a cutout with cutting density
//! `(1-beta) e^z / (e^z - 1)^2`, `beta = 1 - 1/alpha`; the mean-reversion
//! rate only rescales time and is fixed to 1.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutout::{simulate, CuttingTail, UncoveredSet};
use crate::error::{domain, Result};
use crate::numerics::stats::ks_one_sample;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StableOUSpec {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_ou: f64,
}

impl StableOUSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(domain(format!("alpha={alpha} outside (0, 2]")));
        }
        Ok(StableOUSpec { alpha, beta: 1.0 - 1.0 / alpha, gamma_ou: 1.0 })
    }

    pub fn with_gamma(mut self, gamma_ou: f64) -> Result<Self> {
        if !(gamma_ou > 0.0 && gamma_ou.is_finite()) {
            return Err(domain(format!("gamma={gamma_ou} must be positive")));
        }
        self.gamma_ou = gamma_ou;
        Ok(self)
    }

    /// Whether the zero set is more than `{0}`.
    pub fn has_cutout(&self) -> bool {
        self.alpha > 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class")]
pub enum OuZeroSet {
    TrivialPoint,
    CutoutSet { dim: f64, recurrent: bool },
}

pub fn ou_classify(alpha: f64) -> Result<OuZeroSet> {
    let spec = StableOUSpec::new(alpha)?;
    if !spec.has_cutout() {
        return Ok(OuZeroSet::TrivialPoint);
    }
    Ok(OuZeroSet::CutoutSet { dim: 1.0 / alpha, recurrent: true })
}

fn cutout_beta(alpha: f64) -> Result<f64> {
    let spec = StableOUSpec::new(alpha)?;
    if !spec.has_cutout() {
        return Err(domain(format!("alpha={alpha}: the zero set is {{0}}, no cutting measure")));
    }
    Ok(spec.beta)
}

fn positive(z: f64) -> Result<f64> {
    if z > 0.0 && !z.is_nan() {
        Ok(z)
    } else {
        Err(domain(format!("z={z} must be positive")))
    }
}

/// `(1-beta) e^z / (e^z - 1)^2`.
pub fn cutting_density(z: f64, alpha: f64) -> Result<f64> {
    let beta = cutout_beta(alpha)?;
    let z = positive(z)?;
    // e^z/(e^z-1)^2 = e^{-z}/(1-e^{-z})^2, which stays finite for large z.
    let m = (-z).exp_m1();
    Ok((1.0 - beta) * (-z).exp() / (m * m))
}

/// Mass of `(z, inf)`: `(1-beta)/(e^z - 1)`.
pub fn cutting_tail(z: f64, alpha: f64) -> Result<f64> {
    let beta = cutout_beta(alpha)?;
    Ok((1.0 - beta) / positive(z)?.exp_m1())
}

/// Levy tail of the subordinator with range `Z`, up to its constant:
/// `(e^x - 1)^{-(1-beta)}`.
pub fn levy_tail(x: f64, alpha: f64) -> Result<f64> {
    let beta = cutout_beta(alpha)?;
    Ok(positive(x)?.exp_m1().powf(beta - 1.0))
}

/// OU cutting measure truncated to lengths `>= eps`; sampled in closed form.
#[derive(Debug, Clone, Copy)]
pub struct OuCuttingTail {
    alpha: f64,
    eps: f64,
    rate: f64,
    em1: f64,
}

impl OuCuttingTail {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps={eps} must be positive")));
        }
        Ok(OuCuttingTail { alpha, eps, rate: cutting_tail(eps, alpha)?, em1: eps.exp_m1() })
    }
}

impl CuttingTail for OuCuttingTail {
    fn eps(&self) -> f64 {
        self.eps
    }

    fn rate(&self) -> f64 {
        self.rate
    }

    fn tail(&self, t: f64) -> Result<f64> {
        cutting_tail(t, self.alpha)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, _cap: f64) -> Result<f64> {
        let u = 1.0 - rng.random::<f64>();
        Ok((self.em1 / u).ln_1p())
    }
}

/// Zero set of the OU process on `[0, T]`, lengths below `eps` dropped.
pub fn sample_ou_cutout(alpha: f64, horizon: f64, eps: f64, seed: u64) -> Result<UncoveredSet> {
    let tail = OuCuttingTail::new(alpha, eps)?;
    simulate(&tail, horizon, seed, 0)
}

/// Range of birth times `t` in the pushforward check.
pub const PUSHFORWARD_T_MAX: f64 = 22026.465794806718;

/// Lengths `z = ln(1 + x/t)` of marks `(t, x)` from `dt (1-beta) x^-2 dx` on
/// `t in [1, e^10]`, kept when `z >= z0`.
///
/// `t` is uniform; `x` is Pareto from `x_min = e^{z0} - 1` and the mark is
/// accepted when `x >= t (e^{z0} - 1)`, which is exactly the restriction of
/// the intensity to `{z >= z0}`.
pub fn pushforward_lengths(alpha: f64, n: usize, z0: f64, seed: u64) -> Result<Vec<f64>> {
    cutout_beta(alpha)?;
    let c = positive(z0)?.exp_m1();
    let mut rng = stream_rng(seed, 0);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t = 1.0 + (PUSHFORWARD_T_MAX - 1.0) * rng.random::<f64>();
        let x = c / (1.0 - rng.random::<f64>());
        if x >= t * c {
            out.push((x / t).ln_1p());
        }
    }
    Ok(out)
}

/// KS distance of the pushforward lengths from the cutting law on `[z0, inf)`.
pub fn pushforward_ks(alpha: f64, n: usize, z0: f64, seed: u64) -> Result<f64> {
    let z = pushforward_lengths(alpha, n, z0, seed)?;
    let c = z0.exp_m1();
    Ok(ks_one_sample(&z, |v| 1.0 - c / v.exp_m1()))
}

#[cfg(test)]
mod tests;
