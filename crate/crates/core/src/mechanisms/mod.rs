//! Branching mechanisms `Psi` and immigration mechanisms `Phi`.
//!
//! Built-in families evaluate in closed form; `Custom` variants wrap a
//! function handle together with explicitly declared metadata. Declared
//! metadata always wins over numeric probes.

mod checks;
mod grammar;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::roots::brent;
use crate::numerics::special::{gamma, gamma_ratio};

pub use checks::{conservativity_check, grey_check, is_compound_poisson};
pub use grammar::{parse_branching, parse_immigration, parse_mechanism, Mechanism};

/// Function handle used by custom mechanisms.
pub type MechFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Leading behaviour `coeff * x^index * |ln x|^log_power` at an end point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptote {
    pub coeff: f64,
    pub index: f64,
    pub log_power: f64,
}

impl Asymptote {
    pub fn power(coeff: f64, index: f64) -> Self {
        Asymptote { coeff, index, log_power: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexSource {
    Exact,
    Declared,
    Probed { conclusive: bool },
}

/// Lower/upper growth index at one end point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexBracket {
    pub lower: f64,
    pub upper: f64,
    pub source: IndexSource,
}

impl IndexBracket {
    pub fn exact(index: f64) -> Self {
        IndexBracket { lower: index, upper: index, source: IndexSource::Exact }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper && !matches!(self.source, IndexSource::Probed { .. })
    }
}

/// Growth indices at `+inf` (`Ind`) and at `0+` (`ind`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Indices {
    pub at_infinity: IndexBracket,
    pub at_zero: IndexBracket,
}

/// Declared metadata of a custom branching mechanism.
#[derive(Clone)]
pub struct CustomBranching {
    pub label: String,
    pub eval: MechFn,
    /// Upper end of the range where `eval` may be called.
    pub max_q: f64,
    pub theta: Option<f64>,
    pub deriv0: Option<f64>,
    pub index_inf: Option<(f64, f64)>,
    pub index_zero: Option<(f64, f64)>,
    pub asymptote_inf: Option<Asymptote>,
    pub asymptote_zero: Option<Asymptote>,
}

impl CustomBranching {
    /// A custom mechanism with every piece of metadata declared unknown.
    pub fn new(label: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomBranching {
            label: label.into(),
            eval: Arc::new(eval),
            max_q: f64::INFINITY,
            theta: None,
            deriv0: None,
            index_inf: None,
            index_zero: None,
            asymptote_inf: None,
            asymptote_zero: None,
        }
    }
}

/// Branching mechanism `Psi`.
#[derive(Clone)]
pub enum BranchingMechanism {
    /// `Psi(q) = d q^alpha`, `alpha` in (1, 2].
    StablePower { d: f64, alpha: f64 },
    /// `Psi(q) = b q + sigma2/2 q^2`.
    Quadratic { b: f64, sigma2: f64 },
    Custom(CustomBranching),
}

/// Declared metadata of a custom immigration mechanism.
#[derive(Clone)]
pub struct CustomImmigration {
    pub label: String,
    pub eval: MechFn,
    pub max_q: f64,
    pub drift: f64,
    pub finite_levy_mass: Option<bool>,
    pub index_inf: Option<(f64, f64)>,
    pub index_zero: Option<(f64, f64)>,
    pub asymptote_inf: Option<Asymptote>,
    pub asymptote_zero: Option<Asymptote>,
}

impl CustomImmigration {
    pub fn new(label: impl Into<String>, eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomImmigration {
            label: label.into(),
            eval: Arc::new(eval),
            max_q: f64::INFINITY,
            drift: 0.0,
            finite_levy_mass: None,
            index_inf: None,
            index_zero: None,
            asymptote_inf: None,
            asymptote_zero: None,
        }
    }
}

/// Jump law of a compound-Poisson immigration.
#[derive(Clone)]
pub enum JumpLaw {
    /// Exponential jumps with the given rate.
    Exponential { rate: f64 },
    /// Jump Laplace transform `q -> E[exp(-q J)]` and optional mean.
    Custom { laplace: MechFn, mean: Option<f64> },
}

/// Immigration mechanism `Phi`.
#[derive(Clone)]
pub enum ImmigrationMechanism {
    /// `Phi = 0`: no immigration.
    Zero,
    /// `Phi(q) = dprime q^beta`, `beta` in (0, 1].
    StablePower { dprime: f64, beta: f64 },
    /// `Phi(q) = a log(1 + q/b)`.
    Gamma { a: f64, b: f64 },
    /// `Phi(q) = Gamma(beta + q) / (Gamma(beta) Gamma(q))`.
    LampertiStable { beta: f64 },
    /// `Phi(q) = mass (1 - E[exp(-q J)])`, no drift.
    CompoundPoisson { mass: f64, jumps: JumpLaw },
    Custom(CustomImmigration),
}

fn check_arg(q: f64) -> Result<()> {
    if q.is_nan() || q < 0.0 {
        return Err(domain(format!("mechanism evaluated at negative or NaN argument {q}")));
    }
    Ok(())
}

fn checked_handle(label: &str, f: &MechFn, q: f64, max_q: f64) -> Result<f64> {
    if q > max_q {
        return Err(domain(format!("{label}: argument {q:e} beyond declared range {max_q:e}")));
    }
    let v = f(q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation(format!("{label}({q:e}) returned {v}")))
    }
}

impl BranchingMechanism {
    pub fn stable(d: f64, alpha: f64) -> Result<Self> {
        let m = BranchingMechanism::StablePower { d, alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn quadratic(b: f64, sigma2: f64) -> Result<Self> {
        let m = BranchingMechanism::Quadratic { b, sigma2 };
        m.validate()?;
        Ok(m)
    }

    /// Checks parameter ranges of the built-in families.
    pub fn validate(&self) -> Result<()> {
        match *self {
            BranchingMechanism::StablePower { d, alpha } => {
                if !(d > 0.0 && d.is_finite()) {
                    return Err(domain(format!("stable branching scale d={d} must be positive")));
                }
                if !(alpha > 1.0 && alpha <= 2.0) {
                    return Err(domain(format!("stable branching index alpha={alpha} outside (1, 2]")));
                }
            }
            BranchingMechanism::Quadratic { b, sigma2 } => {
                if !b.is_finite() {
                    return Err(domain(format!("quadratic drift b={b} must be finite")));
                }
                if !(sigma2 >= 0.0 && sigma2.is_finite()) {
                    return Err(domain(format!("quadratic diffusion sigma2={sigma2} must be nonnegative")));
                }
            }
            BranchingMechanism::Custom(_) => {}
        }
        Ok(())
    }

    /// `Psi(q)`.
    pub fn eval(&self, q: f64) -> Result<f64> {
        check_arg(q)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        match self {
            BranchingMechanism::Custom(c) => checked_handle(&c.label, &c.eval, q, c.max_q),
            _ => Ok(self.value(q)),
        }
    }

    /// Unchecked evaluation for inner loops; NaN signals failure.
    pub(crate) fn value(&self, q: f64) -> f64 {
        match *self {
            BranchingMechanism::StablePower { d, alpha } => d * q.powf(alpha),
            BranchingMechanism::Quadratic { b, sigma2 } => b * q + 0.5 * sigma2 * q * q,
            BranchingMechanism::Custom(ref c) => {
                if q > c.max_q {
                    f64::NAN
                } else {
                    (c.eval)(q)
                }
            }
        }
    }

    pub fn is_stable(&self) -> Option<(f64, f64)> {
        match *self {
            BranchingMechanism::StablePower { d, alpha } => Some((d, alpha)),
            _ => None,
        }
    }

    /// `Psi'(0+)`: closed form, declared, or probed at `q = 1e-8`.
    pub fn deriv0(&self) -> Result<f64> {
        match self {
            BranchingMechanism::StablePower { .. } => Ok(0.0),
            BranchingMechanism::Quadratic { b, .. } => Ok(*b),
            BranchingMechanism::Custom(c) => match c.deriv0 {
                Some(v) => Ok(v),
                None => Ok(self.eval(1e-8)? / 1e-8),
            },
        }
    }

    /// Positivity threshold: the first power of two `>= 1` after which 50
    /// successive samples of a `2^(1/4)` log grid are positive.
    pub fn theta(&self) -> Result<f64> {
        if let BranchingMechanism::Custom(CustomBranching { theta: Some(t), .. }) = self {
            return Ok(*t);
        }
        if let BranchingMechanism::StablePower { .. } = self {
            return Ok(1.0);
        }
        const RUN: usize = 50;
        let max_q = match self {
            BranchingMechanism::Custom(c) => c.max_q,
            _ => f64::INFINITY,
        };
        let grid: Vec<f64> = (0..=1200)
            .map(|j| 2f64.powf(j as f64 / 4.0))
            .take_while(|&q| q <= max_q)
            .collect();
        let mut run = 0;
        for (j, &q) in grid.iter().enumerate() {
            if self.value(q) > 0.0 {
                run += 1;
                if run == RUN {
                    let first = grid[j + 1 - RUN];
                    return Ok(2f64.powf(first.log2().ceil()));
                }
            } else {
                run = 0;
            }
        }
        Err(Error::NoPositivityThreshold)
    }

    /// Largest root of `Psi` (zero unless supercritical).
    pub fn largest_root(&self) -> Result<f64> {
        match *self {
            BranchingMechanism::StablePower { .. } => Ok(0.0),
            BranchingMechanism::Quadratic { b, sigma2 } => {
                if b < 0.0 && sigma2 > 0.0 {
                    Ok(-2.0 * b / sigma2)
                } else {
                    Ok(0.0)
                }
            }
            BranchingMechanism::Custom(_) => {
                if self.deriv0()? >= 0.0 {
                    return Ok(0.0);
                }
                let theta = self.theta()?;
                let mut hi = theta;
                for j in 1..=400 {
                    let q = theta * 2f64.powf(-(j as f64) / 4.0);
                    if self.value(q) <= 0.0 {
                        return brent(|x| self.value(x), q, hi, 1e-15 * hi, 200);
                    }
                    hi = q;
                }
                Err(Error::NoConvergence(
                    "supercritical mechanism: no sign change located on the probe grid".into(),
                ))
            }
        }
    }

    /// Leading behaviour at `+inf`, when known.
    pub fn asymptote_inf(&self) -> Option<Asymptote> {
        match self {
            BranchingMechanism::StablePower { d, alpha } => Some(Asymptote::power(*d, *alpha)),
            BranchingMechanism::Quadratic { b, sigma2 } => {
                if *sigma2 > 0.0 {
                    Some(Asymptote::power(0.5 * sigma2, 2.0))
                } else if *b > 0.0 {
                    Some(Asymptote::power(*b, 1.0))
                } else {
                    None
                }
            }
            BranchingMechanism::Custom(c) => c.asymptote_inf,
        }
    }

    /// Leading behaviour at `0+`, when known.
    pub fn asymptote_zero(&self) -> Option<Asymptote> {
        match self {
            BranchingMechanism::StablePower { d, alpha } => Some(Asymptote::power(*d, *alpha)),
            BranchingMechanism::Quadratic { b, sigma2 } => {
                if *b != 0.0 {
                    Some(Asymptote::power(*b, 1.0))
                } else if *sigma2 > 0.0 {
                    Some(Asymptote::power(0.5 * sigma2, 2.0))
                } else {
                    None
                }
            }
            BranchingMechanism::Custom(c) => c.asymptote_zero,
        }
    }

    pub fn indices(&self) -> Result<Indices> {
        match self {
            BranchingMechanism::StablePower { alpha, .. } => Ok(Indices {
                at_infinity: IndexBracket::exact(*alpha),
                at_zero: IndexBracket::exact(*alpha),
            }),
            BranchingMechanism::Quadratic { b, sigma2 } => {
                if *b == 0.0 && *sigma2 == 0.0 {
                    return Err(domain("Psi = 0 has no growth indices"));
                }
                Ok(Indices {
                    at_infinity: IndexBracket::exact(if *sigma2 > 0.0 { 2.0 } else { 1.0 }),
                    at_zero: IndexBracket::exact(if *b != 0.0 { 1.0 } else { 2.0 }),
                })
            }
            BranchingMechanism::Custom(c) => Ok(Indices {
                at_infinity: declared_or_probe(c.index_inf, c.asymptote_inf, |q| self.eval(q), ProbeEnd::Infinity, c.max_q)?,
                at_zero: declared_or_probe(c.index_zero, c.asymptote_zero, |q| self.eval(q), ProbeEnd::Zero, c.max_q)?,
            }),
        }
    }
}

impl ImmigrationMechanism {
    pub fn stable(dprime: f64, beta: f64) -> Result<Self> {
        let m = ImmigrationMechanism::StablePower { dprime, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn gamma(a: f64, b: f64) -> Result<Self> {
        let m = ImmigrationMechanism::Gamma { a, b };
        m.validate()?;
        Ok(m)
    }

    pub fn lamperti(beta: f64) -> Result<Self> {
        let m = ImmigrationMechanism::LampertiStable { beta };
        m.validate()?;
        Ok(m)
    }

    /// Compound Poisson immigration with exponential jumps.
    pub fn compound_poisson(mass: f64, rate: f64) -> Result<Self> {
        let m = ImmigrationMechanism::CompoundPoisson { mass, jumps: JumpLaw::Exponential { rate } };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name}={v} must be positive and finite")))
            }
        };
        match self {
            ImmigrationMechanism::Zero => Ok(()),
            ImmigrationMechanism::StablePower { dprime, beta } => {
                positive("stable immigration scale d'", *dprime)?;
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return Err(domain(format!("stable immigration index beta={beta} outside (0, 1]")));
                }
                Ok(())
            }
            ImmigrationMechanism::Gamma { a, b } => {
                positive("gamma rate a", *a)?;
                positive("gamma scale b", *b)
            }
            ImmigrationMechanism::LampertiStable { beta } => {
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return Err(domain(format!("Lamperti index beta={beta} outside (0, 1]")));
                }
                Ok(())
            }
            ImmigrationMechanism::CompoundPoisson { mass, jumps } => {
                positive("compound Poisson mass", *mass)?;
                if let JumpLaw::Exponential { rate } = jumps {
                    positive("jump rate", *rate)?;
                }
                Ok(())
            }
            ImmigrationMechanism::Custom(c) => {
                if c.drift < 0.0 {
                    return Err(domain("custom immigration drift must be nonnegative"));
                }
                Ok(())
            }
        }
    }

    /// `Phi(q)`.
    pub fn eval(&self, q: f64) -> Result<f64> {
        check_arg(q)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        match self {
            ImmigrationMechanism::Custom(c) => checked_handle(&c.label, &c.eval, q, c.max_q),
            ImmigrationMechanism::CompoundPoisson { jumps: JumpLaw::Custom { laplace, .. }, mass } => {
                let l = laplace(q);
                if l.is_finite() {
                    Ok(mass * (1.0 - l))
                } else {
                    Err(Error::Evaluation(format!("jump Laplace transform at {q:e} returned {l}")))
                }
            }
            _ => Ok(self.value(q)),
        }
    }

    pub(crate) fn value(&self, q: f64) -> f64 {
        if q == 0.0 {
            return 0.0;
        }
        match self {
            ImmigrationMechanism::Zero => 0.0,
            ImmigrationMechanism::StablePower { dprime, beta } => dprime * q.powf(*beta),
            ImmigrationMechanism::Gamma { a, b } => a * (q / b).ln_1p(),
            ImmigrationMechanism::LampertiStable { beta } => gamma_ratio(q, *beta) / gamma(*beta),
            ImmigrationMechanism::CompoundPoisson { mass, jumps } => match jumps {
                JumpLaw::Exponential { rate } => mass * q / (rate + q),
                JumpLaw::Custom { laplace, .. } => mass * (1.0 - laplace(q)),
            },
            ImmigrationMechanism::Custom(c) => {
                if q > c.max_q {
                    f64::NAN
                } else {
                    (c.eval)(q)
                }
            }
        }
    }

    /// Whether the mechanism is identically zero.
    pub fn is_zero(&self) -> bool {
        match self {
            ImmigrationMechanism::Zero => true,
            ImmigrationMechanism::Custom(c) => [1e-3, 1.0, 1e3].iter().all(|&q| q > c.max_q || (c.eval)(q) == 0.0),
            _ => false,
        }
    }

    /// Drift coefficient `lim Phi(q)/q`.
    pub fn drift(&self) -> f64 {
        match self {
            ImmigrationMechanism::StablePower { dprime, beta } if *beta == 1.0 => *dprime,
            ImmigrationMechanism::LampertiStable { beta } if *beta == 1.0 => 1.0,
            ImmigrationMechanism::Custom(c) => c.drift,
            _ => 0.0,
        }
    }

    /// `c * Phi`, used for infinite-divisibility experiments.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("scale factor {c} must be positive")));
        }
        Ok(match self {
            ImmigrationMechanism::Zero => ImmigrationMechanism::Zero,
            ImmigrationMechanism::StablePower { dprime, beta } => {
                ImmigrationMechanism::StablePower { dprime: dprime * c, beta: *beta }
            }
            ImmigrationMechanism::Gamma { a, b } => ImmigrationMechanism::Gamma { a: a * c, b: *b },
            ImmigrationMechanism::CompoundPoisson { mass, jumps } => {
                ImmigrationMechanism::CompoundPoisson { mass: mass * c, jumps: jumps.clone() }
            }
            other => {
                let inner = other.clone();
                let mut custom = CustomImmigration::new(format!("{c}*({other})"), move |q| c * inner.value(q));
                custom.drift = other.drift() * c;
                custom.finite_levy_mass = Some(matches!(other.is_compound_poisson_structural(), Some(true)));
                custom.asymptote_inf = other.asymptote_inf().map(|a| Asymptote { coeff: a.coeff * c, ..a });
                custom.asymptote_zero = other.asymptote_zero().map(|a| Asymptote { coeff: a.coeff * c, ..a });
                custom.index_inf = other.asymptote_inf().map(|a| (a.index, a.index));
                custom.index_zero = other.asymptote_zero().map(|a| (a.index, a.index));
                if let ImmigrationMechanism::Custom(orig) = other {
                    custom.max_q = orig.max_q;
                    custom.index_inf = custom.index_inf.or(orig.index_inf);
                    custom.index_zero = custom.index_zero.or(orig.index_zero);
                    custom.finite_levy_mass = orig.finite_levy_mass;
                }
                ImmigrationMechanism::Custom(custom)
            }
        })
    }

    /// Compound-Poisson structure known without probing.
    pub(crate) fn is_compound_poisson_structural(&self) -> Option<bool> {
        match self {
            ImmigrationMechanism::Zero | ImmigrationMechanism::CompoundPoisson { .. } => Some(true),
            ImmigrationMechanism::StablePower { .. }
            | ImmigrationMechanism::Gamma { .. }
            | ImmigrationMechanism::LampertiStable { .. } => Some(false),
            ImmigrationMechanism::Custom(c) => {
                if c.drift > 0.0 {
                    Some(false)
                } else {
                    c.finite_levy_mass
                }
            }
        }
    }

    pub fn asymptote_inf(&self) -> Option<Asymptote> {
        match self {
            ImmigrationMechanism::Zero => None,
            ImmigrationMechanism::StablePower { dprime, beta } => Some(Asymptote::power(*dprime, *beta)),
            ImmigrationMechanism::Gamma { a, .. } => Some(Asymptote { coeff: *a, index: 0.0, log_power: 1.0 }),
            ImmigrationMechanism::LampertiStable { beta } => Some(Asymptote::power(1.0 / gamma(*beta), *beta)),
            ImmigrationMechanism::CompoundPoisson { mass, .. } => Some(Asymptote::power(*mass, 0.0)),
            ImmigrationMechanism::Custom(c) => c.asymptote_inf,
        }
    }

    pub fn asymptote_zero(&self) -> Option<Asymptote> {
        match self {
            ImmigrationMechanism::Zero => None,
            ImmigrationMechanism::StablePower { dprime, beta } => Some(Asymptote::power(*dprime, *beta)),
            ImmigrationMechanism::Gamma { a, b } => Some(Asymptote::power(a / b, 1.0)),
            // Gamma(beta+q)/(Gamma(beta) Gamma(q)) ~ q as q -> 0
            ImmigrationMechanism::LampertiStable { .. } => Some(Asymptote::power(1.0, 1.0)),
            ImmigrationMechanism::CompoundPoisson { mass, jumps } => match jumps {
                JumpLaw::Exponential { rate } => Some(Asymptote::power(mass / rate, 1.0)),
                JumpLaw::Custom { mean: Some(m), .. } => Some(Asymptote::power(mass * m, 1.0)),
                JumpLaw::Custom { mean: None, .. } => None,
            },
            ImmigrationMechanism::Custom(c) => c.asymptote_zero,
        }
    }

    pub fn indices(&self) -> Result<Indices> {
        match self {
            ImmigrationMechanism::Zero => Err(domain("Phi = 0 has no growth indices")),
            ImmigrationMechanism::Custom(c) => Ok(Indices {
                at_infinity: declared_or_probe(c.index_inf, c.asymptote_inf, |q| self.eval(q), ProbeEnd::Infinity, c.max_q)?,
                at_zero: declared_or_probe(c.index_zero, c.asymptote_zero, |q| self.eval(q), ProbeEnd::Zero, c.max_q)?,
            }),
            ImmigrationMechanism::CompoundPoisson { jumps: JumpLaw::Custom { mean: None, .. }, .. } => Ok(Indices {
                at_infinity: IndexBracket::exact(0.0),
                at_zero: probe_index(|q| self.eval(q), ProbeEnd::Zero, f64::INFINITY)?,
            }),
            _ => {
                let inf = self.asymptote_inf().expect("built-in asymptote");
                let zero = self.asymptote_zero().expect("built-in asymptote");
                Ok(Indices { at_infinity: IndexBracket::exact(inf.index), at_zero: IndexBracket::exact(zero.index) })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ProbeEnd {
    Infinity,
    Zero,
}

fn declared_or_probe<F: Fn(f64) -> Result<f64>>(
    declared: Option<(f64, f64)>,
    asymptote: Option<Asymptote>,
    f: F,
    end: ProbeEnd,
    max_q: f64,
) -> Result<IndexBracket> {
    if let Some((lower, upper)) = declared {
        return Ok(IndexBracket { lower, upper, source: IndexSource::Declared });
    }
    if let Some(a) = asymptote {
        return Ok(IndexBracket { lower: a.index, upper: a.index, source: IndexSource::Declared });
    }
    probe_index(f, end, max_q)
}

/// Log-log slope probe over `{1e2, ..., 1e8}` (at infinity) or
/// `{1e-8, ..., 1e-2}` (at zero). Brackets the local slopes and flags the
/// estimate inconclusive when they spread by more than 0.02.
pub(crate) fn probe_index<F: Fn(f64) -> Result<f64>>(f: F, end: ProbeEnd, max_q: f64) -> Result<IndexBracket> {
    let exps: Vec<i32> = match end {
        ProbeEnd::Infinity => (2..=8).collect(),
        ProbeEnd::Zero => (-8..=-2).collect(),
    };
    let mut pts = Vec::with_capacity(exps.len());
    for e in exps {
        let q = 10f64.powi(e);
        if q > max_q {
            return Err(domain(format!("index probe needs q={q:e} beyond the declared range")));
        }
        let v = f(q)?.abs();
        if !(v > 0.0) {
            return Err(domain(format!("index probe: mechanism vanishes at q={q:e}")));
        }
        pts.push((q.ln(), v.ln()));
    }
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let lower = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let upper = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(IndexBracket { lower, upper, source: IndexSource::Probed { conclusive: upper - lower <= 0.02 } })
}

impl fmt::Debug for BranchingMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchingMechanism::Custom(c) => write!(f, "Custom({})", c.label),
            other => write!(f, "{other}"),
        }
    }
}

impl fmt::Debug for ImmigrationMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImmigrationMechanism::Custom(c) => write!(f, "Custom({})", c.label),
            other => write!(f, "{other}"),
        }
    }
}

impl PartialEq for BranchingMechanism {
    fn eq(&self, other: &Self) -> bool {
        use BranchingMechanism::*;
        match (self, other) {
            (StablePower { d: a, alpha: b }, StablePower { d: c, alpha: e }) => {
                a.to_bits() == c.to_bits() && b.to_bits() == e.to_bits()
            }
            (Quadratic { b: a, sigma2: b }, Quadratic { b: c, sigma2: e }) => {
                a.to_bits() == c.to_bits() && b.to_bits() == e.to_bits()
            }
            (Custom(a), Custom(b)) => Arc::ptr_eq(&a.eval, &b.eval) && a.label == b.label,
            _ => false,
        }
    }
}

impl PartialEq for JumpLaw {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (JumpLaw::Exponential { rate: a }, JumpLaw::Exponential { rate: b }) => a.to_bits() == b.to_bits(),
            (JumpLaw::Custom { laplace: a, .. }, JumpLaw::Custom { laplace: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl PartialEq for ImmigrationMechanism {
    fn eq(&self, other: &Self) -> bool {
        use ImmigrationMechanism::*;
        let same = |a: &f64, b: &f64| a.to_bits() == b.to_bits();
        match (self, other) {
            (Zero, Zero) => true,
            (StablePower { dprime: a, beta: b }, StablePower { dprime: c, beta: d }) => same(a, c) && same(b, d),
            (Gamma { a, b }, Gamma { a: c, b: d }) => same(a, c) && same(b, d),
            (LampertiStable { beta: a }, LampertiStable { beta: b }) => same(a, b),
            (CompoundPoisson { mass: a, jumps: j }, CompoundPoisson { mass: b, jumps: k }) => same(a, b) && j == k,
            (Custom(a), Custom(b)) => Arc::ptr_eq(&a.eval, &b.eval) && a.label == b.label,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests;
