use super::*;
use crate::verdict::Decision;
use approx::assert_relative_eq;

fn psi(s: &str) -> BranchingMechanism {
    s.parse().unwrap()
}

fn phi(s: &str) -> ImmigrationMechanism {
    s.parse().unwrap()
}

#[test]
fn closed_form_values() {
    assert_eq!(psi("stable:d=1,alpha=2").eval(2.0).unwrap(), 4.0);
    assert_eq!(phi("gamma:a=1,b=1").eval(0.0).unwrap(), 0.0);
    assert_relative_eq!(phi("lamperti:beta=0.5").eval(1.0).unwrap(), 0.5, epsilon = 1e-14);
    assert_eq!(psi("quadratic:b=1,sigma2=2").eval(3.0).unwrap(), 12.0);
    assert_relative_eq!(phi("cpp:mass=2").eval(1.0).unwrap(), 1.0);
}

#[test]
fn zero_is_exact_and_negative_rejected() {
    for m in [psi("stable:d=3,alpha=1.5"), psi("quadratic:b=-1,sigma2=2")] {
        assert_eq!(m.eval(0.0).unwrap().to_bits(), 0f64.to_bits());
        assert!(matches!(m.eval(-1.0), Err(Error::Domain(_))));
        assert!(m.eval(f64::NAN).is_err());
    }
    let l = phi("lamperti:beta=0.3");
    assert_eq!(l.eval(0.0).unwrap().to_bits(), 0f64.to_bits());
}

#[test]
fn gamma_small_argument_is_linear() {
    let (a, b) = (2.0, 3.0);
    let g = ImmigrationMechanism::gamma(a, b).unwrap();
    let x = 1e-6 * b;
    assert!((g.eval(x).unwrap() / (a * x / b) - 1.0).abs() < 0.01);
}

#[test]
fn lamperti_asymptotics() {
    let beta = 0.5;
    let l = ImmigrationMechanism::lamperti(beta).unwrap();
    let q = 1e10;
    assert_relative_eq!(l.eval(q).unwrap() / (q.powf(beta) / gamma(beta)), 1.0, epsilon = 1e-6);
    assert_relative_eq!(l.eval(1e-9).unwrap() / 1e-9, 1.0, epsilon = 1e-6);
}

#[test]
fn custom_failures_propagate() {
    let c = CustomBranching { max_q: 10.0, ..CustomBranching::new("bad", |q| if q > 5.0 { f64::NAN } else { q * q }) };
    let m = BranchingMechanism::Custom(c);
    assert_eq!(m.eval(2.0).unwrap(), 4.0);
    assert!(matches!(m.eval(6.0), Err(Error::Evaluation(_))));
    assert!(matches!(m.eval(11.0), Err(Error::Domain(_))));
}

#[test]
fn built_in_indices_are_exact() {
    let i = psi("stable:d=3,alpha=1.5").indices().unwrap();
    assert_eq!((i.at_infinity.lower, i.at_infinity.upper, i.at_zero.lower), (1.5, 1.5, 1.5));
    assert_eq!(i.at_infinity.source, IndexSource::Exact);
    let q = psi("quadratic:b=1,sigma2=2").indices().unwrap();
    assert_eq!((q.at_infinity.lower, q.at_zero.upper), (2.0, 1.0));
    let l = phi("lamperti:beta=0.5").indices().unwrap();
    assert_eq!((l.at_infinity.lower, l.at_zero.lower), (0.5, 1.0));
    let g = phi("gamma:a=1,b=1").indices().unwrap();
    assert_eq!((g.at_infinity.lower, g.at_zero.lower), (0.0, 1.0));
    assert!(ImmigrationMechanism::Zero.indices().is_err());
}

#[test]
fn probe_brackets_custom_indices() {
    let m = BranchingMechanism::Custom(CustomBranching::new("q^1.7", |q: f64| q.powf(1.7)));
    let i = m.indices().unwrap();
    assert_relative_eq!(i.at_infinity.lower, 1.7, epsilon = 1e-9);
    assert_eq!(i.at_infinity.source, IndexSource::Probed { conclusive: true });

    // q^2 log(1+q)^2: local slope drifts by more than 0.02 over the probe decades
    let m = BranchingMechanism::Custom(CustomBranching::new("wobble", |q: f64| q * q * q.ln_1p().powi(2)));
    let i = m.indices().unwrap();
    assert_eq!(i.at_infinity.source, IndexSource::Probed { conclusive: false });
    assert!(i.at_infinity.lower < i.at_infinity.upper);

    // declared values are never overridden by a probe
    let c = CustomBranching { index_inf: Some((1.2, 1.3)), ..CustomBranching::new("decl", |q: f64| q.powf(1.7)) };
    let i = BranchingMechanism::Custom(c).indices().unwrap();
    assert_eq!((i.at_infinity.lower, i.at_infinity.upper), (1.2, 1.3));
    assert_eq!(i.at_infinity.source, IndexSource::Declared);

    let bounded = CustomBranching { max_q: 1e3, ..CustomBranching::new("short", |q: f64| q * q) };
    assert!(BranchingMechanism::Custom(bounded).indices().is_err());
}

#[test]
fn theta_and_largest_root() {
    assert_eq!(psi("quadratic:b=0,sigma2=2").theta().unwrap(), 1.0);
    // Psi(q) = -3q + q^2/2 has its root at 6; next power of two is 8
    let sup = psi("quadratic:b=-3,sigma2=1");
    assert_eq!(sup.theta().unwrap(), 8.0);
    assert_relative_eq!(sup.largest_root().unwrap(), 6.0);
    let custom = BranchingMechanism::Custom(CustomBranching::new("sup", |q: f64| -3.0 * q + 0.5 * q * q));
    assert_eq!(custom.theta().unwrap(), 8.0);
    assert_relative_eq!(custom.largest_root().unwrap(), 6.0, epsilon = 1e-12);
    let never = BranchingMechanism::Custom(CustomBranching::new("neg", |q: f64| -q));
    assert_eq!(never.theta(), Err(Error::NoPositivityThreshold));
}

#[test]
fn grey_examples() {
    let v = grey_check(&psi("quadratic:b=0,sigma2=2")).unwrap();
    assert_eq!(v.value, Decision::Yes);
    assert_relative_eq!(v.evidence.get("grey.sum").unwrap() + v.evidence.get("grey.tail").unwrap(), 1.0, epsilon = 1e-6);
    assert_eq!(grey_check(&psi("quadratic:b=1,sigma2=0")).unwrap().value, Decision::No);
    let s = grey_check(&psi("stable:d=1,alpha=1.5")).unwrap();
    assert!(s.is_yes());
    // int_1^inf q^-1.5 dq = 2
    assert_relative_eq!(s.evidence.get("grey.integral").unwrap(), 2.0);
}

#[test]
fn conservativity_examples() {
    assert!(conservativity_check(&psi("quadratic:b=0,sigma2=2")).unwrap().is_yes());
    assert!(conservativity_check(&psi("stable:d=1,alpha=2")).unwrap().is_yes());
    assert!(conservativity_check(&psi("quadratic:b=-1,sigma2=2")).unwrap().is_yes());
    let c = CustomBranching { index_zero: Some((0.5, 0.5)), ..CustomBranching::new("sqrt", |q: f64| q.sqrt()) };
    let v = conservativity_check(&BranchingMechanism::Custom(c)).unwrap();
    assert!(v.is_no());
    // int_0^1 q^-0.5 dq = 2
    let total = v.evidence.get("conservative.sum").unwrap() + v.evidence.get("conservative.tail").unwrap();
    assert_relative_eq!(total, 2.0, epsilon = 1e-5);
}

#[test]
fn compound_poisson_examples() {
    assert!(is_compound_poisson(&phi("cpp:mass=2")).is_yes());
    assert!(is_compound_poisson(&phi("stable:d=1,beta=0.5")).is_no());
    assert!(is_compound_poisson(&phi("gamma:a=1,b=1")).is_no());
    let bounded = ImmigrationMechanism::Custom(CustomImmigration::new("bounded", |q: f64| 3.0 * q / (1.0 + q)));
    assert!(is_compound_poisson(&bounded).is_yes());
    let log = ImmigrationMechanism::Custom(CustomImmigration::new("log", |q: f64| q.ln_1p()));
    assert!(is_compound_poisson(&log).is_no());
    let declared = CustomImmigration { finite_levy_mass: Some(false), ..CustomImmigration::new("d", |q: f64| 3.0 * q / (1.0 + q)) };
    assert!(is_compound_poisson(&ImmigrationMechanism::Custom(declared)).is_no());
}

#[test]
fn scaling_multiplies_phi() {
    for spec in ["stable:d=1,beta=0.5", "gamma:a=1,b=2", "lamperti:beta=0.4", "cpp:mass=2,rate=3"] {
        let m = phi(spec);
        let s = m.scaled(0.25).unwrap();
        for q in [1e-3, 0.7, 12.0, 1e5] {
            assert_relative_eq!(s.eval(q).unwrap(), 0.25 * m.eval(q).unwrap(), max_relative = 1e-14);
        }
        assert_eq!(s.is_compound_poisson_structural(), m.is_compound_poisson_structural());
    }
}

#[test]
fn grammar_round_trip() {
    for spec in [
        "stable:d=1.0,alpha=2.0",
        "stable:d=0.1,alpha=1.3",
        "quadratic:b=-0.0001,sigma2=2.0",
        "stable:d=2.0,beta=0.3",
        "gamma:a=1.0,b=1e-7",
        "lamperti:beta=0.5",
        "cpp:mass=2.0,rate=1.0",
        "none",
    ] {
        let m = parse_mechanism(spec).unwrap();
        assert_eq!(m.to_string(), spec);
        assert_eq!(parse_mechanism(&m.to_string()).unwrap(), m);
    }
    let m = psi("stable:d=0.30000000000000004,alpha=1.7000000000000002");
    assert_eq!(psi(&m.to_string()), m);
}

#[test]
fn grammar_examples_and_errors() {
    assert_eq!(psi("stable:d=1,alpha=2"), BranchingMechanism::StablePower { d: 1.0, alpha: 2.0 });
    assert_eq!(phi("gamma:a=1,b=1"), ImmigrationMechanism::Gamma { a: 1.0, b: 1.0 });
    assert_eq!(phi("cpp:mass=2"), ImmigrationMechanism::compound_poisson(2.0, 1.0).unwrap());
    let column = |r: Result<BranchingMechanism>| match r {
        Err(Error::Parse { column, .. }) => column,
        other => panic!("expected parse error, got {other:?}"),
    };
    assert_eq!(column(parse_branching("stable:alpha=2.5")), 14);
    assert_eq!(column(parse_branching("stable:alpha=0.9")), 14);
    assert_eq!(column(parse_branching("stable:d=1,alpha")), 12);
    assert_eq!(column(parse_branching("stable:d=x,alpha=2")), 10);
    assert_eq!(column(parse_branching("gamma:a=1,b=1")), 1);
    assert_eq!(column(parse_branching("stable:d=1,gamma=2")), 12);
    assert!(parse_immigration("stable:beta=1.5").is_err());
    assert!(parse_mechanism("stable:d=1").is_err());
    assert!(matches!(parse_mechanism("stable:beta=0.5"), Ok(Mechanism::Immigration(_))));
}
