//! The zero set as a random cutout.
//!
//! Marks `(t_i, zeta_i)` form a Poisson process with intensity `dt x mu`,
//! where `mu(zeta > t) = Phi(v_t)`, and `Z` is what is left of the half line
//! after removing every `]t_i, t_i + zeta_i[`. Lengths below `eps` are
//! discarded, so simulated sets contain the true one.
//!
//! Marks are generated in time order and folded into a running "covered up
//! to" frontier, so memory grows with the number of uncovered components
//! rather than with the number of marks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_zero_state, ZeroClass};
use crate::error::{domain, Error, Result};
use crate::flow::FlowSolver;
use crate::mechanisms::{BranchingMechanism, ImmigrationMechanism};
use crate::numerics::roots::brent;
use crate::numerics::stats::{fit_line, LineFit};
use crate::rng::stream_rng;

/// Largest expected number of marks a single simulation will generate.
pub const MAX_EXPECTED_MARKS: f64 = 1e8;

const POINTS_PER_DECADE: f64 = 256.0;

/// A cutting measure truncated to lengths `>= eps`.
pub trait CuttingTail: Sync {
    fn eps(&self) -> f64;

    /// Total mass `mu(zeta >= eps)`, the mark rate per unit time.
    fn rate(&self) -> f64;

    /// `mu(zeta > t)` for `t >= eps`.
    fn tail(&self, t: f64) -> Result<f64>;

    /// One length. Exact when below `cap`; otherwise some value `>= cap`.
    fn draw(&self, rng: &mut ChaCha8Rng, cap: f64) -> Result<f64>;
}

/// Inverse-transform sampler for `mu(zeta > t) = Phi(v_t)`, `t >= eps`.
///
/// `ln Phi(v_t)` is tabulated against `ln t` on `[eps, t_max]` and inverted
/// by linear interpolation; draws beyond the table fall back to root
/// finding on the exact tail.
#[derive(Debug, Clone)]
pub struct DurationSampler {
    phi: ImmigrationMechanism,
    flow: FlowSolver,
    eps: f64,
    rate: f64,
    /// `Phi(v_inf)`: positive in the supercritical case, where a mark
    /// covers everything after it with positive probability.
    floor: f64,
    ln_t: Vec<f64>,
    ln_tail: Vec<f64>,
}

impl DurationSampler {
    pub fn new(psi: BranchingMechanism, phi: ImmigrationMechanism, eps: f64, t_max: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("eps={eps} must be positive")));
        }
        if !(t_max >= eps && t_max.is_finite()) {
            return Err(domain(format!("t_max={t_max} must be finite and >= eps")));
        }
        phi.validate()?;
        let flow = FlowSolver::new(psi)?;
        let floor = phi.value(flow.largest_root());
        let mut s = DurationSampler { phi, flow, eps, rate: 0.0, floor, ln_t: Vec::new(), ln_tail: Vec::new() };
        s.rate = s.tail(eps)?;
        if !s.rate.is_finite() {
            return Err(domain("decrease eps not possible, tail infinite"));
        }
        if s.rate > 0.0 {
            s.build_table(t_max)?;
        }
        Ok(s)
    }

    fn build_table(&mut self, t_max: f64) -> Result<()> {
        let (lo, hi) = (self.eps.ln(), t_max.ln());
        let n = (((hi - lo) / std::f64::consts::LN_10) * POINTS_PER_DECADE).ceil().max(1.0) as usize;
        for i in 0..=n {
            let x = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
            let y = self.tail(x.exp())?.ln();
            // Stop where the tail has flattened onto its floor or vanished.
            if !y.is_finite() || self.ln_tail.last().is_some_and(|&p| y >= p) {
                break;
            }
            self.ln_t.push(x);
            self.ln_tail.push(y);
        }
        Ok(())
    }

    pub fn flow(&self) -> &FlowSolver {
        &self.flow
    }

    /// Right end of the tabulated range.
    pub fn table_end(&self) -> f64 {
        self.ln_t.last().map_or(self.eps, |x| x.exp())
    }

    /// Length whose tail equals `level`, for `floor < level <= rate`.
    fn invert(&self, level: f64, cap: f64) -> Result<f64> {
        let y = level.ln();
        let k = self.ln_tail.partition_point(|&v| v > y);
        if k == 0 {
            return Ok(self.eps);
        }
        if k < self.ln_tail.len() {
            let (x0, x1) = (self.ln_t[k - 1], self.ln_t[k]);
            let (y0, y1) = (self.ln_tail[k - 1], self.ln_tail[k]);
            let x = x0 + (x1 - x0) * (y - y0) / (y1 - y0);
            return Ok(x.exp());
        }
        let end = self.table_end();
        if end >= cap {
            return Ok(end);
        }
        self.invert_exact(level, end)
    }

    fn invert_exact(&self, level: f64, from: f64) -> Result<f64> {
        let g = |x: f64| self.tail(x.exp()).map_or(f64::NAN, |v| v.ln() - level.ln());
        let mut lo = from.ln();
        let mut hi = lo + 1.0;
        let mut steps = 0;
        while g(hi) > 0.0 {
            lo = hi;
            hi += 2.0 * (hi - from.ln());
            steps += 1;
            if steps > 60 || !hi.is_finite() {
                return Err(Error::NoConvergence(format!("no length with tail {level:e}")));
            }
        }
        Ok(brent(g, lo, hi, 1e-12, 200)?.exp())
    }
}

impl CuttingTail for DurationSampler {
    fn eps(&self) -> f64 {
        self.eps
    }

    fn rate(&self) -> f64 {
        self.rate
    }

    fn tail(&self, t: f64) -> Result<f64> {
        let v = self.flow.v_from_infinity(t)?;
        self.phi.eval(v)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, cap: f64) -> Result<f64> {
        if self.rate == 0.0 {
            return Err(domain("no cuts: Phi(v_eps) = 0"));
        }
        let u = 1.0 - rng.random::<f64>();
        let level = u * self.rate;
        if level <= self.floor {
            return Ok(f64::INFINITY);
        }
        self.invert(level, cap)
    }
}

/// `n` i.i.d. lengths with tail `Phi(v_t)/Phi(v_eps)` on `[eps, inf)`.
pub fn sample_durations<C: CuttingTail>(sampler: &C, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    (0..n).map(|_| sampler.draw(&mut rng, f64::INFINITY)).collect()
}

/// `Z` intersected with `[0, horizon]`, as sorted disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncoveredSet {
    pub horizon: f64,
    pub eps: f64,
    pub intervals: Vec<(f64, f64)>,
    pub seed: u64,
    pub stream: u64,
}

impl UncoveredSet {
    /// The whole window `[0, horizon]`.
    pub fn full(horizon: f64, eps: f64) -> Self {
        UncoveredSet { horizon, eps, intervals: vec![(0.0, horizon)], seed: 0, stream: 0 }
    }

    pub fn contains(&self, t: f64) -> bool {
        let k = self.intervals.partition_point(|iv| iv.1 < t);
        k < self.intervals.len() && self.intervals[k].0 <= t
    }

    pub fn lebesgue(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Last uncovered point in `[0, horizon]`.
    pub fn last_point(&self) -> f64 {
        self.intervals.last().map_or(0.0, |iv| iv.1)
    }

    /// Whether the right end of the window is cut away.
    pub fn horizon_covered(&self) -> bool {
        self.last_point() < self.horizon
    }

    /// Number of cells `[k delta, (k+1) delta)` of `[0, horizon]` that meet the set.
    pub fn box_count(&self, delta: f64) -> u64 {
        let cells = (self.horizon / delta).ceil().max(1.0) as u64;
        let mut count = 0;
        let mut next = 0u64;
        for &(a, b) in &self.intervals {
            let c0 = ((a / delta).floor() as u64).max(next);
            let c1 = ((b / delta).floor() as u64).min(cells - 1);
            if c1 >= c0 {
                count += c1 - c0 + 1;
                next = c1 + 1;
            }
        }
        count
    }
}

/// Exact intersection; all sets must share horizon and `eps`.
pub fn intersect(sets: &[UncoveredSet]) -> Result<UncoveredSet> {
    let first = sets.first().ok_or_else(|| domain("intersect of an empty list"))?;
    let mut out = first.clone();
    for s in &sets[1..] {
        if s.horizon != first.horizon || s.eps != first.eps {
            return Err(Error::Mismatch(format!(
                "horizon/eps ({}, {}) vs ({}, {})",
                s.horizon, s.eps, first.horizon, first.eps
            )));
        }
        out.intervals = intersect_two(&out.intervals, &s.intervals);
    }
    Ok(out)
}

fn intersect_two(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Time-ordered cutout simulation that can be extended to longer horizons.
pub struct CutoutStream<'a, C: CuttingTail> {
    tail: &'a C,
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    /// Lengths are only needed up to this point in time.
    cap_at: f64,
    next: f64,
    frontier: f64,
    intervals: Vec<(f64, f64)>,
    horizon: f64,
}

impl<'a, C: CuttingTail> CutoutStream<'a, C> {
    /// `cap_at` is the furthest horizon the stream will be asked for
    /// (`inf` if unknown); lengths reaching past it are not resolved.
    pub fn new(tail: &'a C, seed: u64, stream: u64, cap_at: f64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let next = Self::gap(tail, &mut rng);
        CutoutStream { tail, rng, seed, stream, cap_at, next, frontier: 0.0, intervals: Vec::new(), horizon: 0.0 }
    }

    fn gap(tail: &C, rng: &mut ChaCha8Rng) -> f64 {
        let rate = tail.rate();
        if rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / rate
        } else {
            f64::INFINITY
        }
    }

    /// Processes every mark born in `[0, horizon]`.
    pub fn advance(&mut self, horizon: f64) -> Result<()> {
        if horizon > self.cap_at {
            return Err(domain(format!("horizon {horizon} beyond the stream cap {}", self.cap_at)));
        }
        let expected = (horizon - self.horizon).max(0.0) * self.tail.rate();
        if expected > MAX_EXPECTED_MARKS {
            return Err(Error::TooManyMarks { expected, limit: MAX_EXPECTED_MARKS });
        }
        while self.next <= horizon {
            let t = self.next;
            let z = self.tail.draw(&mut self.rng, self.cap_at - t)?;
            if t >= self.frontier {
                self.intervals.push((self.frontier, t));
                self.frontier = t + z;
            } else {
                self.frontier = self.frontier.max(t + z);
            }
            self.next = t + Self::gap(self.tail, &mut self.rng);
        }
        self.horizon = self.horizon.max(horizon);
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn horizon_covered(&self) -> bool {
        self.frontier > self.horizon
    }

    /// Snapshot of `Z` on the current window.
    pub fn set(&self) -> UncoveredSet {
        let mut intervals = self.intervals.clone();
        if self.frontier <= self.horizon {
            intervals.push((self.frontier, self.horizon));
        }
        UncoveredSet { horizon: self.horizon, eps: self.tail.eps(), intervals, seed: self.seed, stream: self.stream }
    }

    /// Last uncovered point of the current window.
    pub fn last_point(&self) -> f64 {
        if self.frontier <= self.horizon {
            self.horizon
        } else {
            self.intervals.last().map_or(0.0, |iv| iv.1)
        }
    }
}

fn check_window(horizon: f64, eps: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon T={horizon} must be positive")));
    }
    if !(eps > 0.0 && eps <= horizon) {
        return Err(domain(format!("eps={eps} must lie in (0, T]")));
    }
    Ok(())
}

/// One cutout on `[0, horizon]` from stream `stream` of `seed`.
pub fn simulate<C: CuttingTail>(tail: &C, horizon: f64, seed: u64, stream: u64) -> Result<UncoveredSet> {
    check_window(horizon, tail.eps())?;
    let mut s = CutoutStream::new(tail, seed, stream, horizon);
    s.advance(horizon)?;
    Ok(s.set())
}

/// Sampler whose table covers lengths up to the horizon.
pub fn cbi_sampler(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    horizon: f64,
    eps: f64,
) -> Result<DurationSampler> {
    check_window(horizon, eps)?;
    DurationSampler::new(psi.clone(), phi.clone(), eps, horizon)
}

/// `Z` intersected with `[0, T]` for the CBI pair.
pub fn sample_cutout(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    horizon: f64,
    eps: f64,
    seed: u64,
) -> Result<UncoveredSet> {
    let sampler = cbi_sampler(psi, phi, horizon, eps)?;
    simulate(&sampler, horizon, seed, 0)
}

/// Runs `f(stream)` for `stream = 0..reps` in parallel, in replicate order.
pub fn replicates<T, F>(reps: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if reps == 0 {
        return Err(domain("reps must be at least 1"));
    }
    (0..reps as u64).into_par_iter().map(f).collect()
}

/// Summary statistics of one simulated set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoutStatistics {
    pub lebesgue: f64,
    pub box_counts: Vec<(f64, u64)>,
    pub dim_fit: Option<LineFit>,
    /// Slope plus or minus two standard errors.
    pub dim_ci: Option<(f64, f64)>,
    pub g_last: f64,
    /// False when the window's right end is uncovered, so `g_last = T` is censored.
    pub g_last_exact: bool,
}

impl CutoutStatistics {
    /// Fitted slope, or 0 when no fit is available.
    pub fn dim(&self) -> f64 {
        self.dim_fit.map_or(0.0, |f| f.slope)
    }
}

/// Cell sizes `2^-k` for `k` in `from..=to`.
pub fn dyadic_grid(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|k| 2f64.powi(-k)).collect()
}

pub fn statistics(set: &UncoveredSet, grid_sizes: &[f64]) -> Result<CutoutStatistics> {
    if grid_sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("grid sizes must be strictly decreasing"));
    }
    if grid_sizes.iter().any(|&d| !(d >= set.eps)) {
        return Err(domain(format!("grid sizes must be >= eps = {}", set.eps)));
    }
    let box_counts: Vec<(f64, u64)> = grid_sizes.iter().map(|&d| (d, set.box_count(d))).collect();
    let only_origin = set.intervals.iter().all(|&(a, b)| a == 0.0 && b == 0.0);
    let dim_fit = if only_origin {
        Some(LineFit { slope: 0.0, intercept: 0.0, slope_stderr: 0.0, rms_residual: 0.0 })
    } else {
        let xs: Vec<f64> = box_counts.iter().map(|(d, _)| -d.ln()).collect();
        let ys: Vec<f64> = box_counts.iter().map(|&(_, n)| (n as f64).ln()).collect();
        fit_line(&xs, &ys)
    };
    Ok(CutoutStatistics {
        lebesgue: set.lebesgue(),
        box_counts,
        dim_fit,
        dim_ci: dim_fit.map(|f| (f.slope - 2.0 * f.slope_stderr, f.slope + 2.0 * f.slope_stderr)),
        g_last: set.last_point(),
        g_last_exact: set.horizon_covered(),
    })
}

/// Longest horizon a `g_inf` replicate may be extended to, as a multiple of `T_max`.
const MAX_EXTENSION: f64 = 1048576.0;

/// Last zero of `t_max`-long cutouts, extending a replicate until its window
/// ends covered. Sorted, one value per replicate.
pub fn empirical_gzero(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    n_samples: usize,
    t_max: f64,
    eps: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_window(t_max, eps)?;
    let report = classify_zero_state(psi, phi)?;
    match report.zero_class {
        ZeroClass::Transient => {}
        ZeroClass::Polar | ZeroClass::TrivialPoint => {
            return Err(Error::Polar("the pair never returns to 0".into()));
        }
        other => return Err(Error::NotTransient(format!("zero class is {other:?}"))),
    }
    let sampler = DurationSampler::new(psi.clone(), phi.clone(), eps, 1e3 * t_max)?;
    let mut out = replicates(n_samples, |stream| gzero_replicate(&sampler, t_max, seed, stream))?;
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `g_last` of one replicate whose window has been extended until covered.
pub fn gzero_replicate<C: CuttingTail>(tail: &C, t_max: f64, seed: u64, stream: u64) -> Result<f64> {
    last_zero_within(tail, t_max, MAX_EXTENSION, seed, stream)?
        .ok_or_else(|| Error::NoConvergence(format!("window still uncovered at T = {:e}", MAX_EXTENSION * t_max)))
}

/// Last point of the uncovered set, doubling the window from `t_max` while
/// its right end stays uncovered, up to `max_factor * t_max`.
///
/// The stream is continued, not redrawn, so the set on `[0, t_max]` is the
/// one `simulate(tail, t_max, seed, stream)` returns. `None` when the window
/// is still uncovered at the largest horizon.
pub fn last_zero_within<C: CuttingTail>(
    tail: &C,
    t_max: f64,
    max_factor: f64,
    seed: u64,
    stream: u64,
) -> Result<Option<f64>> {
    let mut s = CutoutStream::new(tail, seed, stream, f64::INFINITY);
    let mut horizon = t_max;
    s.advance(horizon)?;
    while !s.horizon_covered() {
        horizon *= 2.0;
        if horizon > max_factor * t_max {
            return Ok(None);
        }
        s.advance(horizon)?;
    }
    Ok(Some(s.last_point()))
}
