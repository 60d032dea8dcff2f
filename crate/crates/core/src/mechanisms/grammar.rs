//! Mini-grammar for mechanism specs: `family:key=value,key=value`.
//!
//! `stable` names a branching mechanism when it carries `alpha` and an
//! immigration mechanism when it carries `beta`. Printing uses the shortest
//! round-trip representation of each parameter, so `parse(print(m)) == m`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::{BranchingMechanism, ImmigrationMechanism, JumpLaw};

/// Either kind of mechanism.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    Branching(BranchingMechanism),
    Immigration(ImmigrationMechanism),
}

struct Param<'a> {
    key: &'a str,
    value: f64,
    col: usize,
}

struct Spec<'a> {
    family: &'a str,
    params: Vec<Param<'a>>,
    /// Column just past the spec, used for missing-key errors.
    end: usize,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse { column, message: message.into() }
}

fn tokenize(spec: &str) -> Result<Spec<'_>> {
    let (family, rest, rest_col) = match spec.find(':') {
        Some(i) => (&spec[..i], Some(&spec[i + 1..]), i + 2),
        None => (spec, None, spec.len() + 1),
    };
    if family.is_empty() {
        return Err(err(1, "missing family name"));
    }
    let mut params: Vec<Param> = Vec::new();
    if let Some(rest) = rest {
        let mut col = rest_col;
        for item in rest.split(',') {
            let Some(eq) = item.find('=') else {
                return Err(err(col, format!("expected key=value, found '{item}'")));
            };
            let key = item[..eq].trim();
            let raw = item[eq + 1..].trim();
            if key.is_empty() {
                return Err(err(col, "empty key"));
            }
            if params.iter().any(|p| p.key == key) {
                return Err(err(col, format!("duplicate key '{key}'")));
            }
            let value_col = col + eq + 1;
            let value = f64::from_str(raw).map_err(|_| err(value_col, format!("invalid number '{raw}' for '{key}'")))?;
            params.push(Param { key, value, col: value_col });
            col += item.len() + 1;
        }
    }
    Ok(Spec { family, params, end: spec.len() + 1 })
}

impl<'a> Spec<'a> {
    fn has(&self, key: &str) -> bool {
        self.params.iter().any(|p| p.key == key)
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.params.iter().find(|p| !allowed.contains(&p.key)) {
            Some(p) => Err(err(
                p.col - p.key.len() - 1,
                format!("unknown key '{}' for family '{}' (expected one of {})", p.key, self.family, allowed.join(", ")),
            )),
            None => Ok(()),
        }
    }

    /// Value of `key` (or its alias), checked against `ok`.
    fn get(&self, keys: &[&str], default: Option<f64>, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64> {
        let found: Vec<&Param> = self.params.iter().filter(|p| keys.contains(&p.key)).collect();
        if found.len() > 1 {
            return Err(err(found[1].col, format!("'{}' given twice", keys.join("'/'"))));
        }
        let (value, col) = match (found.first(), default) {
            (Some(p), _) => (p.value, p.col),
            (None, Some(d)) => return Ok(d),
            (None, None) => return Err(err(self.end, format!("missing key '{}' for family '{}'", keys[0], self.family))),
        };
        if ok(value) {
            Ok(value)
        } else {
            Err(err(col, format!("{}={value} out of range: {range}", keys[0])))
        }
    }
}

fn positive(v: f64) -> bool {
    v > 0.0 && v.is_finite()
}

fn branching(spec: &Spec) -> Result<BranchingMechanism> {
    match spec.family {
        "stable" => {
            spec.only(&["d", "alpha"])?;
            let d = spec.get(&["d"], Some(1.0), positive, "d > 0")?;
            let alpha = spec.get(&["alpha"], None, |a| a > 1.0 && a <= 2.0, "alpha in (1, 2]")?;
            Ok(BranchingMechanism::StablePower { d, alpha })
        }
        "quadratic" => {
            spec.only(&["b", "sigma2"])?;
            let b = spec.get(&["b"], Some(0.0), f64::is_finite, "b finite")?;
            let sigma2 = spec.get(&["sigma2"], Some(0.0), |s| s >= 0.0 && s.is_finite(), "sigma2 >= 0")?;
            if b == 0.0 && sigma2 == 0.0 {
                return Err(err(1, "quadratic mechanism with b = sigma2 = 0 is identically zero"));
            }
            Ok(BranchingMechanism::Quadratic { b, sigma2 })
        }
        other => Err(err(1, format!("unknown branching family '{other}' (expected stable or quadratic)"))),
    }
}

fn immigration(spec: &Spec) -> Result<ImmigrationMechanism> {
    match spec.family {
        "none" => {
            spec.only(&[])?;
            Ok(ImmigrationMechanism::Zero)
        }
        "stable" => {
            spec.only(&["d", "dprime", "beta"])?;
            let dprime = spec.get(&["d", "dprime"], Some(1.0), positive, "d > 0")?;
            let beta = spec.get(&["beta"], None, |b| b > 0.0 && b <= 1.0, "beta in (0, 1]")?;
            Ok(ImmigrationMechanism::StablePower { dprime, beta })
        }
        "gamma" => {
            spec.only(&["a", "b"])?;
            let a = spec.get(&["a"], None, positive, "a > 0")?;
            let b = spec.get(&["b"], None, positive, "b > 0")?;
            Ok(ImmigrationMechanism::Gamma { a, b })
        }
        "lamperti" => {
            spec.only(&["beta"])?;
            let beta = spec.get(&["beta"], None, |b| b > 0.0 && b <= 1.0, "beta in (0, 1]")?;
            Ok(ImmigrationMechanism::LampertiStable { beta })
        }
        "cpp" => {
            spec.only(&["mass", "rate"])?;
            let mass = spec.get(&["mass"], None, positive, "mass > 0")?;
            let rate = spec.get(&["rate"], Some(1.0), positive, "rate > 0")?;
            Ok(ImmigrationMechanism::CompoundPoisson { mass, jumps: JumpLaw::Exponential { rate } })
        }
        other => Err(err(
            1,
            format!("unknown immigration family '{other}' (expected stable, gamma, lamperti, cpp or none)"),
        )),
    }
}

/// Parses a branching mechanism spec.
pub fn parse_branching(spec: &str) -> Result<BranchingMechanism> {
    branching(&tokenize(spec.trim())?)
}

/// Parses an immigration mechanism spec.
pub fn parse_immigration(spec: &str) -> Result<ImmigrationMechanism> {
    immigration(&tokenize(spec.trim())?)
}

/// Parses either kind; `stable` is resolved by its keys.
pub fn parse_mechanism(spec: &str) -> Result<Mechanism> {
    let s = tokenize(spec.trim())?;
    match s.family {
        "quadratic" => branching(&s).map(Mechanism::Branching),
        "stable" if s.has("alpha") => branching(&s).map(Mechanism::Branching),
        "stable" if s.has("beta") => immigration(&s).map(Mechanism::Immigration),
        "stable" => Err(err(s.end, "stable spec needs alpha (branching) or beta (immigration)")),
        _ => immigration(&s).map(Mechanism::Immigration),
    }
}

impl FromStr for BranchingMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_branching(s)
    }
}

impl FromStr for ImmigrationMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_immigration(s)
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_mechanism(s)
    }
}

impl fmt::Display for BranchingMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchingMechanism::StablePower { d, alpha } => write!(f, "stable:d={d:?},alpha={alpha:?}"),
            BranchingMechanism::Quadratic { b, sigma2 } => write!(f, "quadratic:b={b:?},sigma2={sigma2:?}"),
            BranchingMechanism::Custom(c) => write!(f, "custom:{}", c.label),
        }
    }
}

impl fmt::Display for ImmigrationMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImmigrationMechanism::Zero => write!(f, "none"),
            ImmigrationMechanism::StablePower { dprime, beta } => write!(f, "stable:d={dprime:?},beta={beta:?}"),
            ImmigrationMechanism::Gamma { a, b } => write!(f, "gamma:a={a:?},b={b:?}"),
            ImmigrationMechanism::LampertiStable { beta } => write!(f, "lamperti:beta={beta:?}"),
            ImmigrationMechanism::CompoundPoisson { mass, jumps } => match jumps {
                JumpLaw::Exponential { rate } => write!(f, "cpp:mass={mass:?},rate={rate:?}"),
                JumpLaw::Custom { .. } => write!(f, "cpp-custom:mass={mass:?}"),
            },
            ImmigrationMechanism::Custom(c) => write!(f, "custom:{}", c.label),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mechanism::Branching(m) => m.fmt(f),
            Mechanism::Immigration(m) => m.fmt(f),
        }
    }
}
