//! The zero set as a regenerative set: Laplace exponent `L(q)` of the
//! subordinator whose closed range is `Z`, law of the last zero `g_inf`,
//! and the exponents of the self-similar and Lamperti-stable examples.
//!
//! Everything is built on `W(t) = int_{v_1}^{v_t} R(u) du`, for which
//!
//! ```text
//! 1/L(q) = int_0^inf exp(-q t + W(t)) dt,    P[g_inf in dt] = exp(W(t)) dt / k.
//! ```

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::flow::FlowSolver;
use crate::mechanisms::{BranchingMechanism, ImmigrationMechanism};
use crate::numerics::special::{gamma, gamma_ratio};
use crate::numerics::stats::{fit_line, LineFit};
use crate::numerics::{integrate, integrate_geometric, run_panels, Convergence, PanelConfig, PanelDirection, PanelIntegral};
use crate::verdict::{Evidence, Verdict};

const INNER_TOL: f64 = 1e-12;

/// Laplace-exponent samples and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubordinatorSummary {
    pub l_samples: Vec<(f64, f64)>,
    /// Log-log slope of `L` over the samples.
    pub gamma_fit: Option<LineFit>,
    /// `L(q)/q` at the largest sampled `q`.
    pub drift_estimate: f64,
    /// Whether `L(0) > 0`.
    pub killed: Verdict,
}

/// Zero-set law of a CBI pair; caches the `g_inf` normalisation.
#[derive(Debug)]
pub struct ZeroSetLaw {
    psi: BranchingMechanism,
    phi: ImmigrationMechanism,
    flow: FlowSolver,
    v1: f64,
    root: f64,
    panels: PanelConfig,
    norm: OnceLock<Result<f64>>,
}

impl ZeroSetLaw {
    /// Requires Grey's condition (otherwise `Z = {0}`).
    pub fn new(psi: BranchingMechanism, phi: ImmigrationMechanism) -> Result<Self> {
        phi.validate()?;
        let flow = FlowSolver::new(psi.clone())?;
        let v1 = flow.v_from_infinity(1.0)?;
        let root = flow.largest_root();
        Ok(ZeroSetLaw { psi, phi, flow, v1, root, panels: PanelConfig::accurate(1e-10), norm: OnceLock::new() })
    }

    pub fn flow(&self) -> &FlowSolver {
        &self.flow
    }

    pub fn psi(&self) -> &BranchingMechanism {
        &self.psi
    }

    pub fn phi(&self) -> &ImmigrationMechanism {
        &self.phi
    }

    fn r(&self, u: f64) -> f64 {
        self.phi.value(u) / self.psi.value(u)
    }

    /// `int_a^b R` for `root < a <= b`.
    fn r_integral(&self, a: f64, b: f64) -> f64 {
        integrate_geometric(|u| self.r(u), self.root, a, b, INNER_TOL).value
    }

    fn v(&self, t: f64) -> f64 {
        self.flow.v_from_infinity(t).unwrap_or(f64::NAN)
    }

    /// `W(t) = int_{v_1}^{v_t} R(u) du`.
    pub fn w(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain(format!("W(t) needs t > 0, got {t}")));
        }
        let vt = self.flow.v_from_infinity(t)?;
        let w = if vt >= self.v1 { self.r_integral(self.v1, vt) } else { -self.r_integral(vt, self.v1) };
        if w.is_nan() {
            return Err(Error::NoConvergence(format!("W({t:e}) is NaN")));
        }
        Ok(w)
    }

    /// `int_0^a exp(-q s + W(s)) ds` on panels accumulating at 0.
    fn integral_below(&self, a: f64, q: f64) -> Result<PanelIntegral> {
        let mut carry = (self.w(a)?, self.v(a));
        Ok(run_panels(a, PanelDirection::Down { floor: 0.0 }, &self.panels, |lo, hi| {
            let (w_hi, v_hi) = carry;
            let value = integrate(
                |s| {
                    let vs = self.v(s);
                    (-q * s + w_hi + self.r_integral(v_hi, vs.max(v_hi))).exp()
                },
                lo,
                hi,
                0.0,
                self.panels.quad_rel_tol,
            )
            .value;
            let v_lo = self.v(lo);
            carry = (w_hi + self.r_integral(v_hi, v_lo.max(v_hi)), v_lo);
            value
        }))
    }

    /// `int_a^inf exp(-q s + W(s)) ds` on panels `[a 2^k, a 2^(k+1)]`.
    fn integral_above(&self, a: f64, q: f64) -> Result<PanelIntegral> {
        let mut carry = (self.w(a)?, self.v(a));
        Ok(run_panels(a, PanelDirection::Up, &self.panels, |lo, hi| {
            let (w_lo, v_lo) = carry;
            let value = integrate(
                |s| {
                    let vs = self.v(s);
                    (-q * s + w_lo - self.r_integral(vs.min(v_lo), v_lo)).exp()
                },
                lo,
                hi,
                0.0,
                self.panels.quad_rel_tol,
            )
            .value;
            let v_hi = self.v(hi);
            carry = (w_lo - self.r_integral(v_hi.min(v_lo), v_lo), v_hi);
            value
        }))
    }

    /// Near-zero part; an infinite value means `Z = {0}`.
    fn checked_below(&self, a: f64, q: f64) -> Result<f64> {
        let near = self.integral_below(a, q)?;
        match near.verdict {
            Convergence::Finite => Ok(near.value()),
            Convergence::Infinite => Err(Error::Polar(
                "int_0 exp(W(t)) dt diverges; run classify for the full verdict".into(),
            )),
            Convergence::Inconclusive => Err(Error::NoConvergence(format!(
                "int_0^{a} exp(W) undecided ({}), partial sum {:e}",
                near.reason, near.sum
            ))),
        }
    }

    /// `L(q)` for `q > 0`.
    pub fn laplace_exponent(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) || q.is_infinite() {
            return Err(domain(format!("laplace_exponent needs finite q > 0, got {q}")));
        }
        let near = self.checked_below(1.0, q)?;
        let far = self.integral_above(1.0, q)?;
        if far.verdict != Convergence::Finite {
            return Err(Error::NoConvergence(format!("int_1^inf exp(-qt + W) judged {:?}", far.verdict)));
        }
        Ok(1.0 / (near + far.value()))
    }

    /// `L(0)` and the verdict on `L(0) > 0` (zero set bounded).
    pub fn killing(&self) -> Result<(Verdict, f64)> {
        let near = self.checked_below(1.0, 0.0)?;
        let far = self.integral_above(1.0, 0.0)?;
        let mut ev = Evidence::default().with("int_0^1", near);
        ev.checkpoints.extend(far.checkpoints("int_1^inf"));
        let l0 = match far.verdict {
            Convergence::Finite => 1.0 / (near + far.value()),
            _ => 0.0,
        };
        ev.checkpoints.push(crate::verdict::Checkpoint::new("L(0)", l0));
        Ok((Verdict::from_convergence(far.verdict, Convergence::Finite, ev), l0))
    }

    /// `k = int_0^inf exp(W(t)) dt`, computed once.
    pub fn normalization(&self) -> Result<f64> {
        self.norm
            .get_or_init(|| {
                let near = self.checked_below(1.0, 0.0)?;
                let far = self.integral_above(1.0, 0.0)?;
                match far.verdict {
                    Convergence::Finite => Ok(near + far.value()),
                    Convergence::Infinite => Err(Error::NotTransient(format!(
                        "int_1^inf exp(W) diverges (partial sum {:e} over {} panels)",
                        far.sum,
                        far.contributions.len()
                    ))),
                    Convergence::Inconclusive => Err(Error::NoConvergence(format!(
                        "normalisation undecided: {} (partial sum {:e})",
                        far.reason, far.sum
                    ))),
                }
            })
            .clone()
    }

    /// Density of `g_inf` at `t`.
    pub fn gzero_density(&self, t: f64) -> Result<f64> {
        let k = self.normalization()?;
        Ok((self.w(t)?).exp() / k)
    }

    /// `P[g_inf > t]`.
    pub fn gzero_tail(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("gzero_tail needs t >= 0, got {t}")));
        }
        let k = self.normalization()?;
        if t == 0.0 {
            return Ok(1.0);
        }
        let above = self.integral_above(t, 0.0)?;
        if above.verdict == Convergence::Finite {
            Ok((above.value() / k).clamp(0.0, 1.0))
        } else {
            Ok((1.0 - self.checked_below(t, 0.0)? / k).clamp(0.0, 1.0))
        }
    }

    /// `P[g_inf <= t]`.
    pub fn gzero_cdf(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("gzero_cdf needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            self.normalization()?;
            return Ok(0.0);
        }
        let k = self.normalization()?;
        Ok((self.checked_below(t, 0.0)? / k).clamp(0.0, 1.0))
    }

    /// `L` at each `q`, its log-log slope and the drift diagnostic.
    pub fn summary(&self, qs: &[f64]) -> Result<SubordinatorSummary> {
        if qs.is_empty() {
            return Err(domain("summary needs at least one q"));
        }
        let mut samples = Vec::with_capacity(qs.len());
        for &q in qs {
            samples.push((q, self.laplace_exponent(q)?));
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
        let gamma_fit = if samples.len() >= 2 { fit_line(&xs, &ys) } else { None };
        let (qmax, lmax) = samples.iter().cloned().fold((0.0, 0.0), |a, s| if s.0 > a.0 { s } else { a });
        let (killed, _) = self.killing()?;
        Ok(SubordinatorSummary { l_samples: samples, gamma_fit, drift_estimate: lmax / qmax, killed })
    }
}

/// `L(q)` for the pair.
pub fn laplace_exponent(psi: &BranchingMechanism, phi: &ImmigrationMechanism, q: f64) -> Result<f64> {
    ZeroSetLaw::new(psi.clone(), phi.clone())?.laplace_exponent(q)
}

/// Density of the last zero at `t`.
pub fn gzero_density(psi: &BranchingMechanism, phi: &ImmigrationMechanism, t: f64) -> Result<f64> {
    ZeroSetLaw::new(psi.clone(), phi.clone())?.gzero_density(t)
}

/// Stability index `1 - d'/(d(alpha - 1))` of the critical stable pair
/// (`beta = alpha - 1`).
pub fn selfsimilar_index(alpha: f64, d: f64, dprime: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) || !(d > 0.0) || !(dprime > 0.0) {
        return Err(domain(format!("selfsimilar_index needs alpha in (1,2], d, d' > 0; got {alpha}, {d}, {dprime}")));
    }
    if dprime / d >= alpha - 1.0 {
        return Err(Error::Polar(format!("d'/d = {} >= alpha - 1: polar regime, no subordinator", dprime / d)));
    }
    Ok(1.0 - dprime / (d * (alpha - 1.0)))
}

/// Lamperti-stable exponent `Gamma(1-beta+g) / (Gamma(1-beta) Gamma(g))`.
pub fn lamperti_kappa(g: f64, beta: f64) -> Result<f64> {
    if !(g > 0.0) || g.is_infinite() {
        return Err(domain(format!("lamperti_kappa needs a positive argument, got {g}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("lamperti_kappa needs beta in (0,1), got {beta}")));
    }
    Ok(gamma_ratio(g, 1.0 - beta) / gamma(1.0 - beta))
}
