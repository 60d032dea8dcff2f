//! Convergence protocol for improper integrals of nonnegative integrands.
//!
//! The range is cut into geometric panels anchored at a finite point and
//! running either towards `+inf` (`[a 2^k, a 2^(k+1)]`) or towards a floor
//! (`floor + (a - floor) [2^-(k+1), 2^-k]`). Each panel is integrated
//! adaptively and the sequence of panel contributions decides the verdict:
//!
//! * **Finite** once the last `window` contributions shrink with ratio at
//!   most `decay_ratio` and the extrapolated geometric tail is below
//!   `tail_rel` of the running sum; at the end of the budget, a window of
//!   stable ratios below 0.99 is also accepted and extrapolated.
//! * **Infinite** when the running sum exceeds `blowup`, a contribution is
//!   not finite, or (at the end of the budget) the last window is
//!   non-decreasing or levelling off to a positive constant.
//! * **Inconclusive** otherwise.

use serde::Serialize;

use super::quad::integrate;
use crate::verdict::Checkpoint;

/// Tri-state result of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convergence {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelDirection {
    /// Panels `[a 2^k, a 2^(k+1)]`.
    Up,
    /// Panels accumulating at `floor < a`.
    Down { floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelConfig {
    pub max_panels: usize,
    pub window: usize,
    pub decay_ratio: f64,
    pub tail_rel: f64,
    pub blowup: f64,
    pub quad_rel_tol: f64,
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            max_panels: 61,
            window: 10,
            decay_ratio: 0.9,
            tail_rel: 1e-6,
            blowup: 1e12,
            quad_rel_tol: 1e-9,
        }
    }
}

impl PanelConfig {
    /// Same decision rules, tighter tail requirement; used when the value
    /// itself (not only the verdict) matters.
    pub fn accurate(tail_rel: f64) -> Self {
        PanelConfig {
            tail_rel,
            blowup: f64::MAX,
            quad_rel_tol: (tail_rel * 0.1).max(1e-13),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelIntegral {
    pub verdict: Convergence,
    /// Sum of the evaluated panels.
    pub sum: f64,
    /// Extrapolated remainder (zero unless `Finite`).
    pub tail: f64,
    pub contributions: Vec<f64>,
    pub reason: &'static str,
}

impl PanelIntegral {
    pub fn value(&self) -> f64 {
        self.sum + self.tail
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Convergence::Finite
    }

    /// Partial sums every ten panels plus the final state.
    pub fn checkpoints(&self, label: &str) -> Vec<Checkpoint> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        for (k, c) in self.contributions.iter().enumerate() {
            acc += c;
            if (k + 1) % 10 == 0 {
                out.push(Checkpoint::new(format!("{label}.partial_sum[{}]", k + 1), acc));
            }
        }
        out.push(Checkpoint::new(format!("{label}.panels"), self.contributions.len() as f64));
        out.push(Checkpoint::new(format!("{label}.sum"), self.sum));
        out.push(Checkpoint::new(format!("{label}.tail"), self.tail));
        if let [.., a, b] = self.contributions.as_slice() {
            out.push(Checkpoint::new(format!("{label}.last_ratio"), ratio(*a, *b)));
        }
        out
    }
}

fn ratio(prev: f64, next: f64) -> f64 {
    if prev > 0.0 {
        next / prev
    } else if next == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Bounds of panel `k`, returned in increasing order.
pub fn panel_bounds(anchor: f64, dir: PanelDirection, k: usize) -> (f64, f64) {
    match dir {
        PanelDirection::Up => {
            let lo = anchor * 2f64.powi(k as i32);
            (lo, 2.0 * lo)
        }
        PanelDirection::Down { floor } => {
            let span = anchor - floor;
            let hi = floor + span * 2f64.powi(-(k as i32));
            let lo = floor + span * 2f64.powi(-(k as i32) - 1);
            (lo, hi)
        }
    }
}

/// Runs the protocol with a caller-supplied panel integrator.
///
/// `panel(lo, hi)` must return the integral over `[lo, hi]`; panels are
/// requested in order `k = 0, 1, ...`, which lets callers carry cumulative
/// state (nested integrals) from one panel to the next.
pub fn run_panels<P>(anchor: f64, dir: PanelDirection, cfg: &PanelConfig, mut panel: P) -> PanelIntegral
where
    P: FnMut(f64, f64) -> f64,
{
    let mut contributions: Vec<f64> = Vec::with_capacity(cfg.max_panels);
    let mut sum = 0.0;
    let finish = |verdict, sum, tail, contributions, reason| PanelIntegral {
        verdict,
        sum,
        tail,
        contributions,
        reason,
    };
    for k in 0..cfg.max_panels {
        let (lo, hi) = panel_bounds(anchor, dir, k);
        if !(hi > lo) {
            // panels collapsed below floating-point resolution
            break;
        }
        let c = panel(lo, hi);
        if c.is_nan() {
            contributions.push(c);
            return finish(Convergence::Inconclusive, sum, 0.0, contributions, "integrand evaluation failed");
        }
        contributions.push(c);
        sum += c;
        if !c.is_finite() || sum > cfg.blowup {
            return finish(Convergence::Infinite, sum, 0.0, contributions, "running sum exceeded blow-up threshold");
        }
        if contributions.len() > cfg.window {
            let ratios = window_ratios(&contributions, cfg.window);
            let r = ratios.iter().cloned().fold(0.0, f64::max);
            if r <= cfg.decay_ratio {
                let tail = geometric_tail(c, r);
                if tail <= cfg.tail_rel * sum || (sum == 0.0 && tail == 0.0) {
                    return finish(Convergence::Finite, sum, tail, contributions, "geometric decay");
                }
            }
        }
    }
    if contributions.len() <= cfg.window {
        return finish(Convergence::Inconclusive, sum, 0.0, contributions, "too few panels");
    }
    let ratios = window_ratios(&contributions, cfg.window);
    let last = *contributions.last().unwrap_or(&0.0);
    if last > 0.0 && ratios.iter().all(|&r| r >= 1.0 - 1e-9) {
        return finish(Convergence::Infinite, sum, 0.0, contributions, "non-decreasing contributions");
    }
    let deficits: Vec<f64> = ratios.iter().map(|r| 1.0 - r).collect();
    if last > 0.0
        && deficits.iter().all(|&d| d <= 1e-3)
        && deficits.last().unwrap() <= &(0.5 * deficits[0])
    {
        return finish(Convergence::Infinite, sum, 0.0, contributions, "contributions level off at a positive constant");
    }
    let rmax = ratios.iter().cloned().fold(0.0, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    if rmax <= 0.99 && rmax - rmin <= 2e-3 {
        let tail = geometric_tail(last, rmax);
        return finish(Convergence::Finite, sum, tail, contributions, "extrapolated geometric tail");
    }
    finish(Convergence::Inconclusive, sum, 0.0, contributions, "panel budget exhausted")
}

fn window_ratios(c: &[f64], window: usize) -> Vec<f64> {
    let n = c.len();
    (n - window..n).map(|j| ratio(c[j - 1], c[j])).collect()
}

fn geometric_tail(last: f64, r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        last * r / (1.0 - r)
    }
}

/// Protocol applied to a plain integrand.
pub fn integrate_panels<F>(f: F, anchor: f64, dir: PanelDirection, cfg: &PanelConfig) -> PanelIntegral
where
    F: Fn(f64) -> f64,
{
    run_panels(anchor, dir, cfg, |lo, hi| integrate(&f, lo, hi, 0.0, cfg.quad_rel_tol).value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_square_converges() {
        let r = integrate_panels(|q: f64| q.powi(-2), 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Finite);
        assert!((r.value() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn harmonic_diverges() {
        let r = integrate_panels(|q: f64| 1.0 / q, 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Infinite);
    }

    #[test]
    fn slow_power_law_is_extrapolated() {
        // ratio 2^-0.05 per panel: never meets the early rule
        let r = integrate_panels(|q: f64| q.powf(-1.05), 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Finite);
        assert!((r.value() - 20.0).abs() / 20.0 < 1e-6, "{}", r.value());
    }

    #[test]
    fn borderline_power_law_is_inconclusive() {
        let r = integrate_panels(|q: f64| q.powf(-1.0005), 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Inconclusive);
        assert!(!r.checkpoints("x").is_empty());
    }

    #[test]
    fn growing_integrand_diverges_quickly() {
        let r = integrate_panels(|q: f64| q, 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Infinite);
        assert!(r.contributions.len() < 61);
    }

    #[test]
    fn downward_panels_detect_integrable_singularity() {
        let r = integrate_panels(|x: f64| x.powf(-0.5), 1.0, PanelDirection::Down { floor: 0.0 }, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Finite);
        assert!((r.value() - 2.0).abs() < 1e-6);
        let r = integrate_panels(|x: f64| x.powi(-2), 1.0, PanelDirection::Down { floor: 0.0 }, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Infinite);
    }

    #[test]
    fn levelling_off_counts_as_divergent() {
        // contributions ln2 + 1/q-corrections: decreasing towards a constant
        let r = integrate_panels(|q: f64| 1.0 / q + 1.0 / (q * q), 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Infinite);
    }

    #[test]
    fn hump_then_collapse_is_finite() {
        // grows for ~20 panels, then decays super-geometrically
        let f = |x: f64| (-2.5 * x.powf(-0.1)).exp() / (x * x);
        let r = integrate_panels(f, 1.0, PanelDirection::Down { floor: 0.0 }, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Finite, "{:?}", r.reason);
    }

    #[test]
    fn identically_zero_is_finite_zero() {
        let r = integrate_panels(|_| 0.0, 1.0, PanelDirection::Up, &PanelConfig::default());
        assert_eq!(r.verdict, Convergence::Finite);
        assert_eq!(r.value(), 0.0);
    }
}
