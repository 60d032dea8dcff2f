use super::*;
use crate::cutout::{dyadic_grid, replicates, statistics};
use crate::numerics::integrate;
use crate::zeroset::lamperti_kappa;
use approx::assert_relative_eq;

#[test]
fn classification() {
    assert_eq!(ou_classify(0.7).unwrap(), OuZeroSet::TrivialPoint);
    assert_eq!(ou_classify(1.0).unwrap(), OuZeroSet::TrivialPoint);
    assert_eq!(ou_classify(2.0).unwrap(), OuZeroSet::CutoutSet { dim: 0.5, recurrent: true });
    match ou_classify(1.8).unwrap() {
        OuZeroSet::CutoutSet { dim, recurrent } => {
            assert_relative_eq!(dim, 0.5556, epsilon = 1e-4);
            assert!(recurrent);
        }
        other => panic!("{other:?}"),
    }
    assert!(ou_classify(0.0).is_err());
    assert!(ou_classify(2.1).is_err());
    let spec = StableOUSpec::new(1.5).unwrap();
    assert_relative_eq!(spec.beta, 1.0 / 3.0, max_relative = 1e-15);
    assert!(spec.with_gamma(0.0).is_err());
}

#[test]
fn density_and_tail() {
    let ln2 = 2f64.ln();
    assert_relative_eq!(cutting_density(ln2, 2.0).unwrap(), 1.0, max_relative = 1e-14);
    assert_relative_eq!(cutting_tail(ln2, 2.0).unwrap(), 0.5, max_relative = 1e-14);
    assert!(cutting_density(0.0, 2.0).is_err());
    assert!(cutting_density(1.0, 0.8).is_err());
    // antiderivative: int_z^Z density = tail(z) - tail(Z)
    for alpha in [1.5, 2.0] {
        let (a, b) = (0.3, 7.0);
        let q = integrate(|z| cutting_density(z, alpha).unwrap(), a, b, 0.0, 1e-12).value;
        let exact = cutting_tail(a, alpha).unwrap() - cutting_tail(b, alpha).unwrap();
        assert_relative_eq!(q, exact, max_relative = 1e-10);
    }
    // z -> inf: density ~ (1-beta) e^{-z}
    let z = 40.0;
    assert_relative_eq!(cutting_density(z, 2.0).unwrap(), 0.5 * (-z).exp(), max_relative = 1e-12);
}

#[test]
fn levy_tail_shape() {
    for alpha in [1.5, 1.8, 2.0] {
        let beta = 1.0 - 1.0 / alpha;
        let xs = [1e-6, 1e-5, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|&x| levy_tail(x, alpha).unwrap().ln()).collect();
        let slope = (ys[2] - ys[0]) / (xs[2] / xs[0]).ln();
        assert!((slope + (1.0 - beta)).abs() < 0.02 * (1.0 - beta), "{slope}");
        let mut prev = f64::INFINITY;
        for x in [0.01, 0.1, 1.0, 10.0] {
            let v = levy_tail(x, alpha).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}

#[test]
fn lamperti_exponent_index() {
    for alpha in [1.5, 2.0] {
        let beta = 1.0 - 1.0 / alpha;
        let (a, b) = (1e6, 1e8);
        let s = (lamperti_kappa(b, beta).unwrap() / lamperti_kappa(a, beta).unwrap()).ln() / (b / a).ln();
        assert!((s - 1.0 / alpha).abs() < 0.01 / alpha, "{s}");
    }
}

#[test]
fn closed_form_sampler() {
    let t = OuCuttingTail::new(2.0, 1e-3).unwrap();
    let d = crate::cutout::sample_durations(&t, 10_000, 4).unwrap();
    assert!(d.iter().all(|&z| z >= 1e-3));
    let c = 1e-3f64.exp_m1();
    let ks = crate::numerics::stats::ks_one_sample(&d, |z| 1.0 - c / z.exp_m1());
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn pushforward_identity() {
    for alpha in [1.5, 2.0] {
        let ks = pushforward_ks(alpha, 4000, 0.01, 21).unwrap();
        assert!(ks < 0.05, "alpha={alpha}: {ks}");
    }
    assert!(pushforward_ks(0.5, 10, 0.01, 0).is_err());
}

#[test]
fn brownian_dimension() {
    let grid = dyadic_grid(2, 10);
    let dims = replicates(4, |k| {
        let tail = OuCuttingTail::new(2.0, 1e-4)?;
        let z = crate::cutout::simulate(&tail, 100.0, 3, k)?;
        Ok(statistics(&z, &grid)?.dim())
    })
    .unwrap();
    let mean = dims.iter().sum::<f64>() / dims.len() as f64;
    assert!((mean - 0.5).abs() < 0.1, "{mean}");
}

#[test]
fn ou_zero_set_is_unbounded() {
    let frac = |horizon: f64| {
        let tail = OuCuttingTail::new(1.5, 1e-3).unwrap();
        let hits = replicates(200, |k| {
            let z = crate::cutout::simulate(&tail, horizon, 12, k)?;
            Ok(z.last_point() > 0.9 * horizon)
        })
        .unwrap();
        hits.iter().filter(|&&h| h).count() as f64 / 200.0
    };
    let (a, b, c) = (frac(10.0), frac(40.0), frac(160.0));
    assert!(a < b && b < c && c > 0.8, "{a} {b} {c}");
}

#[test]
fn determinism() {
    let a = sample_ou_cutout(1.8, 10.0, 1e-3, 5).unwrap();
    let b = sample_ou_cutout(1.8, 10.0, 1e-3, 5).unwrap();
    assert_eq!(a, b);
    assert!(sample_ou_cutout(1.0, 10.0, 1e-3, 5).is_err());
}
