//! The flow `v_t(lambda)` of `dv/dt = -Psi(v)`, the boundary flow `v_t`
//! started from `+inf`, extinction probabilities and the CBI marginal
//! Laplace transform.
//!
//! Everything is computed by quadrature inversion of `F(a) = int_a^inf dq/Psi`
//! (or of `int_v^lambda dq/Psi`), never by time stepping. Stable and
//! quadratic mechanisms use closed forms.

use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::mechanisms::{BranchingMechanism, ImmigrationMechanism};
use crate::numerics::roots::brent;
use crate::numerics::{integrate, integrate_geometric, integrate_panels, PanelConfig, PanelDirection};

const MAX_ROOT_ITER: usize = 200;

/// Flow solver for a fixed branching mechanism.
#[derive(Debug)]
pub struct FlowSolver {
    psi: BranchingMechanism,
    quad_tol: f64,
    root_tol: f64,
    v_cap: f64,
    theta: f64,
    root: f64,
    /// `F(theta)`, or the reason it is undefined.
    tail_at_theta: OnceLock<Result<f64>>,
}

impl Clone for FlowSolver {
    fn clone(&self) -> Self {
        FlowSolver {
            psi: self.psi.clone(),
            quad_tol: self.quad_tol,
            root_tol: self.root_tol,
            v_cap: self.v_cap,
            theta: self.theta,
            root: self.root,
            tail_at_theta: self.tail_at_theta.clone(),
        }
    }
}

impl FlowSolver {
    /// Solver with default tolerances (`1e-10` quadrature, `1e-12` roots).
    pub fn new(psi: BranchingMechanism) -> Result<Self> {
        psi.validate()?;
        let theta = psi.theta()?;
        let root = psi.largest_root()?;
        Ok(FlowSolver {
            psi,
            quad_tol: 1e-10,
            root_tol: 1e-12,
            v_cap: 1e300,
            theta,
            root,
            tail_at_theta: OnceLock::new(),
        })
    }

    pub fn with_tolerances(mut self, quad_tol: f64, root_tol: f64) -> Result<Self> {
        for (name, v) in [("quad_tol", quad_tol), ("root_tol", root_tol)] {
            if !(v > 0.0 && v <= 1e-4) {
                return Err(domain(format!("{name}={v} outside (0, 1e-4]")));
            }
        }
        self.quad_tol = quad_tol;
        self.root_tol = root_tol;
        Ok(self)
    }

    pub fn psi(&self) -> &BranchingMechanism {
        &self.psi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Largest root of `Psi` (0 unless supercritical).
    pub fn largest_root(&self) -> f64 {
        self.root
    }

    pub fn v_cap(&self) -> f64 {
        self.v_cap
    }

    fn quadratic(&self) -> Option<(f64, f64)> {
        match self.psi {
            BranchingMechanism::Quadratic { b, sigma2 } => Some((b, 0.5 * sigma2)),
            _ => None,
        }
    }

    /// `F(theta)`; errors when Grey's condition fails.
    pub fn grey_integral(&self) -> Result<f64> {
        self.tail_at_theta.get_or_init(|| self.compute_tail_at_theta()).clone()
    }

    fn compute_tail_at_theta(&self) -> Result<f64> {
        if let Some((d, alpha)) = self.psi.is_stable() {
            return Ok(self.theta.powf(1.0 - alpha) / (d * (alpha - 1.0)));
        }
        if let Some((b, c)) = self.quadratic() {
            if c == 0.0 {
                return Err(Error::GreyFails(format!("Psi(q) = {b} q grows linearly")));
            }
            return Ok(quadratic_tail(b, c, self.theta));
        }
        let run = integrate_panels(
            |q| 1.0 / self.psi.value(q),
            self.theta,
            PanelDirection::Up,
            &PanelConfig::accurate(self.quad_tol),
        );
        if run.is_finite() {
            Ok(run.value())
        } else {
            Err(Error::GreyFails(format!(
                "int_theta^inf dq/Psi judged {:?} ({}) after {} panels, partial sum {:e}",
                run.verdict,
                run.reason,
                run.contributions.len(),
                run.sum
            )))
        }
    }

    /// `F(a) = int_a^inf dq / Psi(q)` for `a` above the largest root.
    pub fn tail_time(&self, a: f64) -> Result<f64> {
        if !(a > self.root) {
            return Err(domain(format!("tail_time needs a > {} (largest root of Psi), got {a}", self.root)));
        }
        let f_theta = self.grey_integral()?;
        if a.is_infinite() {
            return Ok(0.0);
        }
        if let Some((d, alpha)) = self.psi.is_stable() {
            return Ok(a.powf(1.0 - alpha) / (d * (alpha - 1.0)));
        }
        if let Some((b, c)) = self.quadratic() {
            return Ok(quadratic_tail(b, c, a));
        }
        if a >= self.theta {
            let run = integrate_panels(
                |q| 1.0 / self.psi.value(q),
                a,
                PanelDirection::Up,
                &PanelConfig::accurate(self.quad_tol),
            );
            if !run.is_finite() {
                return Err(Error::NoConvergence(format!("tail integral from {a:e}: {}", run.reason)));
            }
            Ok(run.value())
        } else {
            let r = self.root;
            let near = integrate_geometric(|o| 1.0 / self.psi.value(r + o), 0.0, a - r, self.theta - r, self.quad_tol);
            finite(near.value, "integral up to theta")?;
            Ok(f_theta + near.value)
        }
    }

    /// `v_t`, the solution started from `+inf`: the unique `v` with `F(v) = t`.
    pub fn v_from_infinity(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain(format!("v_from_infinity needs t > 0, got {t}")));
        }
        self.grey_integral()?;
        if t.is_infinite() {
            return Ok(self.root);
        }
        if let Some((d, alpha)) = self.psi.is_stable() {
            return Ok((d * (alpha - 1.0) * t).powf(-1.0 / (alpha - 1.0)).min(self.v_cap));
        }
        if let Some((b, c)) = self.quadratic() {
            return Ok(quadratic_flow(b, c, f64::INFINITY, t).min(self.v_cap));
        }
        let r = self.root;
        let g = |u: f64| match self.tail_time(r + u.exp()) {
            Ok(f) => f - t,
            Err(_) => f64::NAN,
        };
        let u0 = (self.theta - r).ln();
        let g0 = g(u0);
        if g0.is_nan() {
            return Err(Error::NoConvergence(format!("F not evaluable at theta={}", self.theta)));
        }
        let (lo, hi) = if g0 > 0.0 {
            // v_t above theta
            let mut step = 1.0;
            let mut prev = u0;
            loop {
                let u = u0 + step;
                if r + u.exp() >= self.v_cap {
                    return Ok(self.v_cap);
                }
                let gu = g(u);
                if gu.is_nan() {
                    return Err(Error::NoConvergence(format!("F not evaluable at {:e}", r + u.exp())));
                }
                if gu <= 0.0 {
                    break (prev, u);
                }
                prev = u;
                step *= 2.0;
            }
        } else {
            match self.bracket_down(u0, &g)? {
                Some(b) => b,
                // F(r+) < t: the flow reaches the root in finite time
                None => return Ok(r),
            }
        };
        let u = brent(g, lo, hi, self.root_tol, MAX_ROOT_ITER)?;
        Ok(r + u.exp())
    }

    /// Steps `u` down from `u0` (where `g <= 0`) until `g >= 0`.
    fn bracket_down(&self, u0: f64, g: &impl Fn(f64) -> f64) -> Result<Option<(f64, f64)>> {
        let mut step = 1.0;
        let mut prev = u0;
        loop {
            let u = u0 - step;
            if u < f64::MIN_POSITIVE.ln() {
                return Ok(None);
            }
            let gu = g(u);
            if gu.is_nan() {
                return Err(Error::NoConvergence(format!("flow integral not evaluable at offset {:e}", u.exp())));
            }
            if gu >= 0.0 {
                return Ok(Some((u, prev)));
            }
            prev = u;
            step *= 2.0;
        }
    }

    /// `v_t(lambda)`.
    pub fn v_from_lambda(&self, t: f64, lambda: f64) -> Result<f64> {
        if !(t >= 0.0) || !(lambda >= 0.0) {
            return Err(domain(format!("v_from_lambda needs t, lambda >= 0, got t={t}, lambda={lambda}")));
        }
        if t == 0.0 || lambda == 0.0 {
            return Ok(lambda);
        }
        if lambda >= self.v_cap {
            return match self.grey_integral() {
                Ok(_) => self.v_from_infinity(t),
                Err(_) => Ok(self.v_cap),
            };
        }
        if let Some((d, alpha)) = self.psi.is_stable() {
            let k = alpha - 1.0;
            return Ok((lambda.powf(-k) + d * k * t).powf(-1.0 / k));
        }
        if let Some((b, c)) = self.quadratic() {
            return Ok(quadratic_flow(b, c, lambda, t));
        }
        let r = self.root;
        if lambda == r {
            return Ok(r);
        }
        // integrate over the offset o = |q - r| from the root
        let sgn = if lambda > r { 1.0 } else { -1.0 };
        let dist0 = (lambda - r).abs();
        let g = |u: f64| {
            let h = integrate_geometric(|o| 1.0 / self.psi.value(r + sgn * o).abs(), 0.0, u.exp().min(dist0), dist0, self.quad_tol);
            if h.value.is_finite() {
                h.value - t
            } else {
                f64::NAN
            }
        };
        let u0 = dist0.ln();
        match self.bracket_down(u0, &g)? {
            Some((lo, hi)) => {
                let u = brent(g, lo, hi, self.root_tol, MAX_ROOT_ITER)?;
                Ok(r + sgn * u.exp())
            }
            None => Ok(r),
        }
    }

    /// `P_x[zeta <= t] = exp(-x v_t)`.
    pub fn extinction_prob(&self, x: f64, t: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("extinction_prob needs x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(1.0);
        }
        Ok((-x * self.v_from_infinity(t)?).exp())
    }

    /// `E_x[exp(-q Y_t)] = exp(-x v_t(q) - int_0^t Phi(v_s(q)) ds)`.
    pub fn cbi_laplace(&self, x: f64, q: f64, t: f64, phi: &ImmigrationMechanism) -> Result<f64> {
        if !(x >= 0.0 && q >= 0.0 && t >= 0.0) {
            return Err(domain(format!("cbi_laplace needs nonnegative inputs, got x={x}, q={q}, t={t}")));
        }
        if q == 0.0 || t == 0.0 {
            return Ok((-x * q).exp());
        }
        let vt = self.v_from_lambda(t, q)?;
        let integral = if phi.is_zero() {
            0.0
        } else {
            let r = integrate(
                |s| match self.v_from_lambda(s, q) {
                    Ok(v) => phi.value(v),
                    Err(_) => f64::NAN,
                },
                0.0,
                t,
                0.0,
                self.quad_tol.max(1e-13),
            );
            if !r.converged || !r.value.is_finite() {
                return Err(Error::NoConvergence(format!(
                    "time integral of Phi(v_s(q)) over [0, {t}] failed: value {}, error {:e}",
                    r.value, r.abs_err
                )));
            }
            r.value
        };
        Ok((-x * vt - integral).exp())
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NoConvergence(format!("{what} is {v}")))
    }
}

/// `int_a^inf dq / (b q + c q^2)`.
fn quadratic_tail(b: f64, c: f64, a: f64) -> f64 {
    if b == 0.0 {
        1.0 / (c * a)
    } else {
        (b / (c * a)).ln_1p() / b
    }
}

/// Flow of `v' = -(b v + c v^2)` from `lambda` (Bernoulli equation in `1/v`).
fn quadratic_flow(b: f64, c: f64, lambda: f64, t: f64) -> f64 {
    let growth = if b == 0.0 { t } else { (b * t).exp_m1() / b };
    1.0 / ((b * t).exp() / lambda + c * growth)
}
