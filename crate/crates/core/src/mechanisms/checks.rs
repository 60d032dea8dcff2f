//! Structural criteria on the mechanisms.

use crate::error::Result;
use crate::numerics::{integrate_panels, Convergence, PanelConfig, PanelDirection};
use crate::verdict::{Checkpoint, Decision, Evidence, Verdict};

use super::{BranchingMechanism, ImmigrationMechanism};

/// Grey's condition `int_theta^inf dq / Psi(q) < inf`.
pub fn grey_check(psi: &BranchingMechanism) -> Result<Verdict> {
    let theta = psi.theta()?;
    if let Some((d, alpha)) = psi.is_stable() {
        let value = theta.powf(1.0 - alpha) / (d * (alpha - 1.0));
        return Ok(Verdict::yes("grey.integral", value).note("closed form").with("theta", theta));
    }
    let run = integrate_panels(|q| 1.0 / psi.value(q), theta, PanelDirection::Up, &PanelConfig::default());
    let mut ev = Evidence::default().with("theta", theta);
    ev.checkpoints.extend(run.checkpoints("grey"));
    ev.notes.push(format!("protocol: {}", run.reason));
    Ok(Verdict::from_convergence(run.verdict, Convergence::Finite, ev))
}

/// Conservativity: `int_0^eps dq / |Psi(q)| = inf`.
pub fn conservativity_check(psi: &BranchingMechanism) -> Result<Verdict> {
    if let Some((_, alpha)) = psi.is_stable() {
        return Ok(Verdict::yes("index_at_zero", alpha).note("q^-alpha is not integrable at 0 for alpha > 1"));
    }
    // Stay below the largest root so that only the behaviour at 0 matters.
    let root = psi.largest_root()?;
    let eps = if root > 0.0 { (0.5 * root).min(1.0) } else { 1.0 };
    let run = integrate_panels(
        |q| 1.0 / psi.value(q).abs(),
        eps,
        PanelDirection::Down { floor: 0.0 },
        &PanelConfig::default(),
    );
    let mut ev = Evidence::default().with("eps", eps);
    ev.checkpoints.extend(run.checkpoints("conservative"));
    ev.notes.push(format!("protocol: {}", run.reason));
    Ok(Verdict::from_convergence(run.verdict, Convergence::Infinite, ev))
}

/// Whether `Phi` is the exponent of a compound Poisson process: zero drift
/// and bounded `Phi`.
pub fn is_compound_poisson(phi: &ImmigrationMechanism) -> Verdict {
    let probes = [1e4, 1e6, 1e8];
    let vals: Vec<f64> = probes.iter().map(|&q| phi.value(q)).collect();
    let mut ev = Evidence::default().with("drift", phi.drift());
    for (q, v) in probes.iter().zip(&vals) {
        ev.checkpoints.push(Checkpoint::new(format!("phi({q:e})"), *v));
    }
    if let Some(known) = phi.is_compound_poisson_structural() {
        let value = if known { Decision::Yes } else { Decision::No };
        return Verdict::from_parts(value, ev.note("structural"));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Verdict::from_parts(Decision::Inconclusive, ev.note("Phi not evaluable at the probe points"));
    }
    let bounded = vals.windows(2).all(|w| w[0] > 0.0 && ((w[1] - w[0]) / w[0]).abs() < 1e-3);
    let value = if bounded { Decision::Yes } else { Decision::No };
    Verdict::from_parts(value, ev.note("probed"))
}
