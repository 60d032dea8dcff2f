//! Polarity, transience and recurrence of the state 0, heaviness, interval
//! structure, stationarity and box-counting dimensions of the zero set.
//!
//! The numeric path evaluates the two integrals
//!
//! ```text
//! I = int_theta^inf exp[ int_theta^z R ] dz / Psi(z)      (polar iff I = inf)
//! J = int_0^theta exp[ -int_x^theta R ] dx / Psi(x)       (recurrent iff J = inf)
//! ```
//!
//! with `R = Phi / Psi`, panel by panel, carrying the inner integral from
//! one panel to the next. The regular-variation fast path reads the same
//! answers off the asymptotes of `R` when they are known in closed form.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::flow::FlowSolver;
use crate::mechanisms::{
    conservativity_check, grey_check, is_compound_poisson, Asymptote, BranchingMechanism, ImmigrationMechanism,
    IndexSource,
};
use crate::numerics::{integrate, integrate_geometric, integrate_panels, run_panels, PanelConfig, PanelDirection, PanelIntegral};
use crate::verdict::{Checkpoint, Decision, Evidence, Verdict};

/// Index comparisons closer than this make the fast path abstain.
pub const BOUNDARY_MARGIN: f64 = 1e-3;
/// Differences below this count as exact equality of closed-form indices.
const EXACT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ZeroClass {
    /// `Z = {0}`: Grey's condition fails.
    TrivialPoint,
    /// `Phi = 0`: the process started at 0 stays there.
    NoImmigration,
    Polar,
    Transient,
    Recurrent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    NumericIntegral,
    #[serde(rename = "RVFastPath")]
    RvFastPath,
    ClosedForm,
}

/// Classification of the zero set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSetReport {
    pub grey: Verdict,
    pub conservative: Verdict,
    pub zero_class: ZeroClass,
    pub heavy: Verdict,
    pub intervals: Verdict,
    pub stationary: Verdict,
    pub dim_upper: Option<f64>,
    pub dim_lower: Option<f64>,
    pub method: Method,
    pub evidence: Evidence,
}

/// Regular-variation data of `R = Phi/Psi`; `None` when unknown.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RegVarSummary {
    /// Index at `+inf`.
    pub rho: Option<f64>,
    /// Index at `0+`.
    pub kappa: Option<f64>,
    pub r_upper: Option<f64>,
    pub r_lower: Option<f64>,
    pub k_upper: Option<f64>,
    pub k_lower: Option<f64>,
}

/// Outcome of the regular-variation fast path.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum FastPath {
    Decided(ZeroSetReport),
    NoFastPath { reason: String, summary: RegVarSummary },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Try the regular-variation theorems before the integrals.
    pub fast_path: bool,
    pub panels: PanelConfig,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { fast_path: true, panels: PanelConfig::default() }
    }
}

/// Box-dimension estimate of `Z ∩ [0, t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimEstimate {
    /// Largest value compatible with the evidence (bounds the upper box dimension).
    pub dim_upper: f64,
    /// Smallest value compatible with the evidence (bounds the lower box dimension).
    pub dim_lower: f64,
    pub method: Method,
    pub conclusive: bool,
    pub evidence: Evidence,
}

fn ratio_fn<'a>(psi: &'a BranchingMechanism, phi: &'a ImmigrationMechanism) -> impl Fn(f64) -> f64 + 'a {
    move |u| phi.value(u) / psi.value(u)
}

/// Limit of `x R(x)` and index of `R` from the two asymptotes at one end.
fn ratio_limit(phi: Asymptote, psi: Asymptote, at_infinity: bool) -> (f64, f64) {
    let index = phi.index - psi.index;
    let c = phi.coeff / psi.coeff;
    let e = 1.0 + index;
    let grows = if e.abs() <= EXACT {
        let p = phi.log_power - psi.log_power;
        if p.abs() <= EXACT {
            return (index, c);
        }
        p > 0.0
    } else if at_infinity {
        e > 0.0
    } else {
        e < 0.0
    };
    (index, if grows { f64::INFINITY } else { 0.0 })
}

/// Regular-variation summary from closed-form or declared asymptotes.
pub fn regvar_summary(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> RegVarSummary {
    let mut s = RegVarSummary::default();
    if let (Some(a), Some(b)) = (phi.asymptote_inf(), psi.asymptote_inf()) {
        if b.coeff > 0.0 {
            let (rho, r) = ratio_limit(a, b, true);
            s.rho = Some(rho);
            s.r_upper = Some(r);
            s.r_lower = Some(r);
        }
    }
    if let (Some(a), Some(b)) = (phi.asymptote_zero(), psi.asymptote_zero()) {
        if b.coeff > 0.0 {
            let (kappa, k) = ratio_limit(a, b, false);
            s.kappa = Some(kappa);
            s.k_upper = Some(k);
            s.k_lower = Some(k);
        }
    }
    s
}

fn summary_evidence(s: &RegVarSummary) -> Evidence {
    let mut ev = Evidence::default();
    for (label, v) in [
        ("rv.rho", s.rho),
        ("rv.kappa", s.kappa),
        ("rv.r_upper", s.r_upper),
        ("rv.r_lower", s.r_lower),
        ("rv.k_upper", s.k_upper),
        ("rv.k_lower", s.k_lower),
    ] {
        if let Some(v) = v {
            ev.checkpoints.push(Checkpoint::new(label, v));
        }
    }
    ev
}

/// Three-way comparison of `lhs` against `rhs` under the boundary policy:
/// `Some(Ordering)` when decided, `None` when within the margin.
fn compare(lhs: f64, rhs: f64, exact: bool) -> Option<std::cmp::Ordering> {
    let diff = lhs - rhs;
    if diff.abs() <= EXACT && exact {
        return Some(std::cmp::Ordering::Equal);
    }
    if diff.abs() < BOUNDARY_MARGIN {
        return None;
    }
    diff.partial_cmp(&0.0)
}

/// Polarity integral `I`, evaluated on panels above `theta`.
pub fn polarity_integral(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    theta: f64,
    cfg: &PanelConfig,
) -> PanelIntegral {
    let r = ratio_fn(psi, phi);
    let mut carry = 0.0;
    run_panels(theta, PanelDirection::Up, cfg, |lo, hi| {
        let a_lo = carry;
        let value = integrate(
            |z| {
                let a = a_lo + integrate(&r, lo, z, 0.0, 1e-12).value;
                (a - psi.value(z).ln()).exp()
            },
            lo,
            hi,
            0.0,
            cfg.quad_rel_tol,
        )
        .value;
        carry = a_lo + integrate(&r, lo, hi, 0.0, 1e-12).value;
        value
    })
}

/// Recurrence integral `J`, evaluated on panels accumulating at 0.
pub fn recurrence_integral(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    theta: f64,
    cfg: &PanelConfig,
) -> PanelIntegral {
    let r = ratio_fn(psi, phi);
    let mut carry = 0.0;
    run_panels(theta, PanelDirection::Down { floor: 0.0 }, cfg, |lo, hi| {
        let b_hi = carry;
        let value = integrate(
            |x| {
                let b = b_hi + integrate(&r, x, hi, 0.0, 1e-12).value;
                (-b - psi.value(x).ln()).exp()
            },
            lo,
            hi,
            0.0,
            cfg.quad_rel_tol,
        )
        .value;
        carry = b_hi + integrate(&r, lo, hi, 0.0, 1e-12).value;
        value
    })
}

fn panel_evidence(label: &str, run: &PanelIntegral) -> Evidence {
    let mut ev = Evidence::default();
    ev.checkpoints.extend(run.checkpoints(label));
    ev.notes.push(format!("{label}: {:?} ({})", run.verdict, run.reason));
    ev
}

/// Heaviness: `int_theta^inf R < inf`.
pub fn heaviness(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<Verdict> {
    heaviness_with(psi, phi, psi.theta()?, &PanelConfig::default())
}

fn heaviness_with(psi: &BranchingMechanism, phi: &ImmigrationMechanism, theta: f64, cfg: &PanelConfig) -> Result<Verdict> {
    let run = integrate_panels(ratio_fn(psi, phi), theta, PanelDirection::Up, cfg);
    Ok(Verdict::from_convergence(run.verdict, crate::numerics::Convergence::Finite, panel_evidence("heavy", &run)))
}

/// Whether `Z` is a union of closed intervals (compound-Poisson `Phi`).
pub fn has_intervals(phi: &ImmigrationMechanism) -> Verdict {
    is_compound_poisson(phi)
}

/// Existence of a stationary law: `Psi'(0+) >= 0` and `int_0^theta R < inf`.
pub fn stationary_exists(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<Verdict> {
    stationary_with(psi, phi, psi.theta()?, &PanelConfig::default())
}

fn stationary_with(psi: &BranchingMechanism, phi: &ImmigrationMechanism, theta: f64, cfg: &PanelConfig) -> Result<Verdict> {
    let d0 = psi.deriv0()?;
    if d0 < 0.0 {
        return Ok(Verdict::no("psi_deriv0", d0).note("supercritical"));
    }
    if phi.is_zero() {
        return Ok(Verdict::yes("psi_deriv0", d0).note("Phi = 0: the Dirac mass at 0 is stationary"));
    }
    let run = integrate_panels(ratio_fn(psi, phi), theta, PanelDirection::Down { floor: 0.0 }, cfg);
    let mut ev = panel_evidence("stationary", &run);
    ev.checkpoints.insert(0, Checkpoint::new("psi_deriv0", d0));
    Ok(Verdict::from_convergence(run.verdict, crate::numerics::Convergence::Finite, ev))
}

/// Evidence that the index bracket of `Psi` is usable by the theorems.
fn usable(source: IndexSource) -> bool {
    !matches!(source, IndexSource::Probed { conclusive: false })
}

struct Common {
    grey: Verdict,
    conservative: Verdict,
    intervals: Verdict,
    stationary: Verdict,
    theta: f64,
}

fn common(psi: &BranchingMechanism, phi: &ImmigrationMechanism, cfg: &PanelConfig) -> Result<Common> {
    let theta = psi.theta()?;
    Ok(Common {
        grey: grey_check(psi)?,
        conservative: conservativity_check(psi)?,
        intervals: has_intervals(phi),
        stationary: stationary_with(psi, phi, theta, cfg)?,
        theta,
    })
}

fn degenerate(psi: &BranchingMechanism, phi: &ImmigrationMechanism, c: &Common) -> Option<ZeroSetReport> {
    let ev = Evidence::default().with("theta", c.theta);
    if c.grey.is_no() {
        return Some(ZeroSetReport {
            grey: c.grey.clone(),
            conservative: c.conservative.clone(),
            zero_class: ZeroClass::TrivialPoint,
            heavy: Verdict::no("grey", 0.0).note("Z = {0}"),
            intervals: c.intervals.clone(),
            stationary: c.stationary.clone(),
            dim_upper: Some(0.0),
            dim_lower: Some(0.0),
            method: Method::ClosedForm,
            evidence: ev.note(format!("Grey's condition fails for {psi}")),
        });
    }
    if phi.is_zero() {
        return Some(ZeroSetReport {
            grey: c.grey.clone(),
            conservative: c.conservative.clone(),
            zero_class: ZeroClass::NoImmigration,
            heavy: Verdict::yes("lebesgue_fraction", 1.0).note("Z = [0, inf)"),
            intervals: Verdict::yes("levy_mass", 0.0),
            stationary: c.stationary.clone(),
            dim_upper: Some(1.0),
            dim_lower: Some(1.0),
            method: Method::ClosedForm,
            evidence: ev.note("Phi = 0: the process started at 0 never leaves it"),
        });
    }
    None
}

/// Regular-variation fast path (theorems on `rho` and `kappa`).
pub fn rv_fastpath(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<FastPath> {
    let c = common(psi, phi, &PanelConfig::default())?;
    fast_path_with(psi, phi, &c)
}

fn fast_path_with(psi: &BranchingMechanism, phi: &ImmigrationMechanism, c: &Common) -> Result<FastPath> {
    let s = regvar_summary(psi, phi);
    let none = |reason: &str| Ok(FastPath::NoFastPath { reason: reason.to_string(), summary: s });
    if !c.grey.is_yes() || phi.is_zero() {
        return none("degenerate input");
    }
    if psi.deriv0()? < 0.0 {
        return none("supercritical branching mechanism");
    }
    let idx = match psi.indices() {
        Ok(i) if usable(i.at_infinity.source) && usable(i.at_zero.source) => i,
        _ => return none("indices of Psi unknown"),
    };
    let exact = idx.at_infinity.is_exact() && idx.at_zero.is_exact();
    let (Some(rho), Some(r_hi), Some(r_lo)) = (s.rho, s.r_upper, s.r_lower) else {
        return none("R has no known asymptote at infinity");
    };
    let (ind_lo, ind_hi) = (idx.at_infinity.lower, idx.at_infinity.upper);
    let mut ev = summary_evidence(&s);
    let mut dims = None;

    // polarity
    let (polar, heavy) = if (rho + 1.0).abs() <= EXACT {
        use std::cmp::Ordering::*;
        if compare(r_hi, ind_lo - 1.0, exact) == Some(Less) {
            ev.notes.push("rho = -1 and r_upper < Ind_lower - 1: not polar".into());
            let heavy = if r_lo > 0.0 { Some(false) } else { None };
            dims = Some(dim_bounds(r_hi, r_lo, ind_hi, ind_lo));
            (false, heavy)
        } else if matches!(compare(r_lo, ind_hi - 1.0, exact), Some(Greater | Equal)) {
            ev.notes.push("rho = -1 and r_lower >= Ind_upper - 1: polar".into());
            (true, Some(false))
        } else {
            return none("rho = -1 with r between the index bounds, or within the boundary margin");
        }
    } else if (rho + 1.0).abs() < BOUNDARY_MARGIN {
        return none("rho within the boundary margin of -1");
    } else if rho > -1.0 {
        ev.notes.push("rho > -1: polar".into());
        (true, Some(false))
    } else {
        ev.notes.push("rho < -1: not polar, heavy".into());
        (false, Some(true))
    };

    let heavy = match heavy {
        Some(true) => Verdict::yes("rv.rho", rho),
        Some(false) => Verdict::no(if polar { "rv.rho" } else { "rv.r_lower" }, if polar { rho } else { r_lo }),
        None => heaviness_with(psi, phi, c.theta, &PanelConfig::default())?,
    };

    if polar {
        return Ok(FastPath::Decided(ZeroSetReport {
            grey: c.grey.clone(),
            conservative: c.conservative.clone(),
            zero_class: ZeroClass::Polar,
            heavy,
            intervals: c.intervals.clone(),
            stationary: c.stationary.clone(),
            dim_upper: None,
            dim_lower: None,
            method: Method::RvFastPath,
            evidence: ev,
        }));
    }

    // recurrence
    let (Some(kappa), Some(k_hi), Some(k_lo)) = (s.kappa, s.k_upper, s.k_lower) else {
        return none("R has no known asymptote at 0");
    };
    let (i0_lo, i0_hi) = (idx.at_zero.lower, idx.at_zero.upper);
    let class = if (kappa + 1.0).abs() <= EXACT {
        use std::cmp::Ordering::*;
        if matches!(compare(k_hi - i0_lo, -1.0, exact), Some(Less | Equal)) {
            ev.notes.push("kappa = -1 and k_upper - ind_lower <= -1: recurrent".into());
            ZeroClass::Recurrent
        } else if compare(k_lo - i0_hi, -1.0, exact) == Some(Greater) {
            ev.notes.push("kappa = -1 and k_lower - ind_upper > -1: transient".into());
            ZeroClass::Transient
        } else {
            return none("kappa = -1 with k between the index bounds, or within the boundary margin");
        }
    } else if (kappa + 1.0).abs() < BOUNDARY_MARGIN {
        return none("kappa within the boundary margin of -1");
    } else if kappa < -1.0 {
        ev.notes.push("kappa < -1: transient".into());
        ZeroClass::Transient
    } else {
        if !c.conservative.is_yes() {
            return none("kappa > -1 needs a conservative mechanism");
        }
        ev.notes.push("kappa > -1: recurrent".into());
        ZeroClass::Recurrent
    };

    let (dim_upper, dim_lower) = if heavy.is_yes() {
        (1.0, 1.0)
    } else {
        match dims {
            Some((u, l)) => (u, l),
            None => return none("dimension bounds need r_upper < Ind_lower - 1"),
        }
    };
    Ok(FastPath::Decided(ZeroSetReport {
        grey: c.grey.clone(),
        conservative: c.conservative.clone(),
        zero_class: class,
        heavy,
        intervals: c.intervals.clone(),
        stationary: c.stationary.clone(),
        dim_upper: Some(dim_upper),
        dim_lower: Some(dim_lower),
        method: Method::RvFastPath,
        evidence: ev,
    }))
}

/// Bounds from the dimension proposition: `(largest, smallest)` value over
/// the upper and lower box dimensions.
fn dim_bounds(r_hi: f64, r_lo: f64, ind_hi: f64, ind_lo: f64) -> (f64, f64) {
    let upper = 1.0 - r_lo / (ind_hi - 1.0);
    let lower = 1.0 - r_hi / (ind_lo - 1.0);
    (upper.clamp(0.0, 1.0), lower.clamp(0.0, 1.0))
}

/// Classifies the state 0 with default options.
pub fn classify_zero_state(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<ZeroSetReport> {
    classify_with(psi, phi, &ClassifyOptions::default())
}

pub fn classify_with(
    psi: &BranchingMechanism,
    phi: &ImmigrationMechanism,
    opts: &ClassifyOptions,
) -> Result<ZeroSetReport> {
    psi.validate()?;
    phi.validate()?;
    let c = common(psi, phi, &opts.panels)?;
    if let Some(report) = degenerate(psi, phi, &c) {
        return Ok(report);
    }
    let mut fast_note = None;
    if opts.fast_path {
        match fast_path_with(psi, phi, &c)? {
            FastPath::Decided(report) => return Ok(report),
            FastPath::NoFastPath { reason, .. } => fast_note = Some(reason),
        }
    }
    let mut report = numeric(psi, phi, &c, opts)?;
    if let Some(reason) = fast_note {
        report.evidence.notes.push(format!("no fast path: {reason}"));
    }
    Ok(report)
}

fn numeric(psi: &BranchingMechanism, phi: &ImmigrationMechanism, c: &Common, opts: &ClassifyOptions) -> Result<ZeroSetReport> {
    let cfg = &opts.panels;
    let mut ev = Evidence::default().with("theta", c.theta);
    if c.grey.is_inconclusive() {
        return Ok(ZeroSetReport {
            grey: c.grey.clone(),
            conservative: c.conservative.clone(),
            zero_class: ZeroClass::Inconclusive,
            heavy: Verdict::inconclusive("theta", c.theta),
            intervals: c.intervals.clone(),
            stationary: c.stationary.clone(),
            dim_upper: None,
            dim_lower: None,
            method: Method::NumericIntegral,
            evidence: ev.note("Grey's condition undecided"),
        });
    }
    let outer = polarity_integral(psi, phi, c.theta, cfg);
    ev.extend(panel_evidence("outer", &outer));
    let mut heavy = heaviness_with(psi, phi, c.theta, cfg)?;
    let supercritical = psi.deriv0()? < 0.0;

    let mut class = match outer.verdict {
        crate::numerics::Convergence::Infinite => ZeroClass::Polar,
        crate::numerics::Convergence::Inconclusive => ZeroClass::Inconclusive,
        crate::numerics::Convergence::Finite if supercritical => {
            ev.notes.push(format!(
                "supercritical: never recurrent (largest root {:e}); inner integral skipped",
                psi.largest_root()?
            ));
            ZeroClass::Transient
        }
        crate::numerics::Convergence::Finite => {
            let inner = recurrence_integral(psi, phi, c.theta, cfg);
            ev.extend(panel_evidence("inner", &inner));
            match inner.verdict {
                crate::numerics::Convergence::Finite => ZeroClass::Transient,
                crate::numerics::Convergence::Infinite => ZeroClass::Recurrent,
                crate::numerics::Convergence::Inconclusive => ZeroClass::Inconclusive,
            }
        }
    };
    if class == ZeroClass::Inconclusive && heavy.is_yes() && outer.verdict == crate::numerics::Convergence::Inconclusive {
        // a finite int R bounds I by a multiple of Grey's integral
        ev.notes.push("heavy implies int R < inf, hence not polar".into());
        class = if supercritical {
            ZeroClass::Transient
        } else {
            let inner = recurrence_integral(psi, phi, c.theta, cfg);
            ev.extend(panel_evidence("inner", &inner));
            match inner.verdict {
                crate::numerics::Convergence::Finite => ZeroClass::Transient,
                crate::numerics::Convergence::Infinite => ZeroClass::Recurrent,
                crate::numerics::Convergence::Inconclusive => ZeroClass::Inconclusive,
            }
        };
    }
    match class {
        ZeroClass::Polar => heavy = Verdict::no("outer.sum", outer.sum).note("polar: Z = {0}"),
        ZeroClass::Inconclusive if heavy.is_yes() => {
            heavy = Verdict::from_parts(Decision::Inconclusive, heavy.evidence).note("class undecided")
        }
        _ => {}
    }
    let (dim_upper, dim_lower) = match class {
        ZeroClass::Transient | ZeroClass::Recurrent => {
            let d = dims_for(psi, phi, heavy.is_yes())?;
            ev.extend(d.evidence.clone());
            (Some(d.dim_upper), Some(d.dim_lower))
        }
        _ => (None, None),
    };
    Ok(ZeroSetReport {
        grey: c.grey.clone(),
        conservative: c.conservative.clone(),
        zero_class: class,
        heavy,
        intervals: c.intervals.clone(),
        stationary: c.stationary.clone(),
        dim_upper,
        dim_lower,
        method: Method::NumericIntegral,
        evidence: ev,
    })
}

/// Box-counting dimensions of `Z ∩ [0, t]`.
pub fn box_dims(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<DimEstimate> {
    let report = classify_zero_state(psi, phi)?;
    match report.zero_class {
        ZeroClass::Transient | ZeroClass::Recurrent => dims_for(psi, phi, report.heavy.is_yes()),
        ZeroClass::NoImmigration => Ok(DimEstimate {
            dim_upper: 1.0,
            dim_lower: 1.0,
            method: Method::ClosedForm,
            conclusive: true,
            evidence: Evidence::default().note("Z = [0, inf)"),
        }),
        other => Err(domain(format!("dimensions undefined for zero class {other:?}"))),
    }
}

fn dims_for(psi: &BranchingMechanism, phi: &ImmigrationMechanism, heavy: bool) -> Result<DimEstimate> {
    if heavy {
        return Ok(DimEstimate {
            dim_upper: 1.0,
            dim_lower: 1.0,
            method: Method::ClosedForm,
            conclusive: true,
            evidence: Evidence::default().note("heavy zero set has full dimension"),
        });
    }
    let s = regvar_summary(psi, phi);
    if let (Ok(idx), Some(rho), Some(r_hi), Some(r_lo)) = (psi.indices(), s.rho, s.r_upper, s.r_lower) {
        let (ind_lo, ind_hi) = (idx.at_infinity.lower, idx.at_infinity.upper);
        if (rho + 1.0).abs() <= EXACT && usable(idx.at_infinity.source) && r_hi < ind_lo - 1.0 {
            let (u, l) = dim_bounds(r_hi, r_lo, ind_hi, ind_lo);
            let exact = r_hi == r_lo && ind_hi == ind_lo;
            return Ok(DimEstimate {
                dim_upper: u,
                dim_lower: l,
                method: if exact { Method::ClosedForm } else { Method::RvFastPath },
                conclusive: true,
                evidence: summary_evidence(&s).note("dimension proposition"),
            });
        }
    }
    lemma_dims(psi, phi)
}

/// Numeric evaluation of `1 - (1/log(1/u)) int_{v_1}^{v_u} R` at
/// `u = 1e-4, 1e-6, 1e-8`.
fn lemma_dims(psi: &BranchingMechanism, phi: &ImmigrationMechanism) -> Result<DimEstimate> {
    let flow = FlowSolver::new(psi.clone())?;
    let v1 = flow.v_from_infinity(1.0)?;
    let r = ratio_fn(psi, phi);
    let mut ev = Evidence::default().with("v_1", v1);
    let mut values = Vec::new();
    for u in [1e-4, 1e-6, 1e-8] {
        let vu = flow.v_from_infinity(u)?;
        let q = integrate_geometric(&r, 0.0, v1, vu, 1e-10);
        if !q.value.is_finite() {
            return Err(Error::NoConvergence(format!("int R from v_1 to v_{u:e} is {}", q.value)));
        }
        let d = 1.0 - q.value / (1.0 / u).ln();
        ev.checkpoints.push(Checkpoint::new(format!("dim_at_u={u:e}"), d));
        values.push(d);
    }
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let conclusive = hi - lo <= 0.02;
    if !conclusive {
        ev.notes.push(format!("spread {:.3e} across u exceeds 0.02", hi - lo));
    }
    Ok(DimEstimate {
        dim_upper: hi.clamp(0.0, 1.0),
        dim_lower: lo.clamp(0.0, 1.0),
        method: Method::NumericIntegral,
        conclusive,
        evidence: ev,
    })
}
