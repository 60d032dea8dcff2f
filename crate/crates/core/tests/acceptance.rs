//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use cbi_core::classify::{classify_with, rv_fastpath, ClassifyOptions, FastPath};
use cbi_core::cutout::{
    cbi_sampler, dyadic_grid, empirical_gzero, gzero_replicate, intersect, replicates, simulate, statistics,
    DurationSampler,
};
use cbi_core::numerics::stats::{fit_line, ks_one_sample, ks_two_sample, quantile};
use cbi_core::ou::{pushforward_ks, OuCuttingTail};
use cbi_core::{BranchingMechanism, FlowSolver, ImmigrationMechanism, Result, ZeroSetLaw};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn stable(d: f64, alpha: f64) -> BranchingMechanism {
    BranchingMechanism::stable(d, alpha).unwrap()
}

fn imm(dprime: f64, beta: f64) -> ImmigrationMechanism {
    ImmigrationMechanism::stable(dprime, beta).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn c1_classification_grid() -> Result<Outcome> {
    let mut total = 0;
    let mut agree = 0;
    let mut excluded = 0;
    let mut worst = String::new();
    for alpha in [1.3, 1.5, 1.8, 2.0] {
        for beta in [0.3, 0.5, alpha - 1.0, 0.9] {
            for d in [0.5, 1.0, 2.0] {
                for dp in [0.5, 1.0, 2.0] {
                    let gap = beta - (alpha - 1.0);
                    let critical = close(gap, 0.0);
                    if (!critical && gap.abs() < 0.05 - 1e-9)
                        || (critical && (dp / d - (alpha - 1.0)).abs() < 0.05 - 1e-9)
                    {
                        excluded += 1;
                        continue;
                    }
                    total += 1;
                    let (psi, phi) = (stable(d, alpha), imm(dp, beta));
                    let numeric = classify_with(&psi, &phi, &ClassifyOptions { fast_path: false, ..Default::default() })?;
                    let fast = match rv_fastpath(&psi, &phi)? {
                        FastPath::Decided(r) => r,
                        FastPath::NoFastPath { reason, .. } => {
                            worst = format!("no fast path at ({alpha},{beta},{d},{dp}): {reason}");
                            continue;
                        }
                    };
                    if numeric.zero_class == fast.zero_class && numeric.heavy.value == fast.heavy.value {
                        agree += 1;
                    } else {
                        worst = format!(
                            "({alpha},{beta},{d},{dp}): numeric {:?}/{:?} vs fast {:?}/{:?}",
                            numeric.zero_class, numeric.heavy.value, fast.zero_class, fast.heavy.value
                        );
                    }
                }
            }
        }
    }
    Ok(outcome(
        agree == total && total >= 40,
        format!("{agree}/{total} grid points agree ({excluded} within the 0.05 margin excluded) {worst}"),
    ))
}

fn c2_feller_laplace() -> Result<Outcome> {
    let law = ZeroSetLaw::new(stable(1.0, 2.0), imm(0.5, 1.0))?;
    let qs = [0.5, 1.0, 4.0, 16.0];
    let mut worst: f64 = 0.0;
    let mut ln_l = Vec::new();
    for q in qs {
        let l = law.laplace_exponent(q)?;
        worst = worst.max((l / (q / PI).sqrt() - 1.0).abs());
        ln_l.push(l.ln());
    }
    let ln_q: Vec<f64> = qs.iter().map(|q| q.ln()).collect();
    let slope = fit_line(&ln_q, &ln_l).unwrap().slope;
    Ok(outcome(
        worst < 1e-4 && (slope - 0.5).abs() <= 0.01,
        format!("max rel err {worst:.2e}, slope {slope:.6}"),
    ))
}

fn c3_marginal() -> Result<Outcome> {
    let flow = FlowSolver::new(stable(1.0, 2.0))?;
    let phi = imm(2.0, 1.0);
    let mut worst: f64 = 0.0;
    for q in [0.1, 0.5, 1.0, 3.0, 10.0] {
        for t in [0.05, 0.5, 2.0, 10.0] {
            let got = flow.cbi_laplace(0.0, q, t, &phi)?;
            worst = worst.max((got - (1.0 + q * t).powi(-2)).abs());
        }
    }
    Ok(outcome(worst < 1e-6, format!("max abs err {worst:.2e} over 20 (q, t) pairs")))
}

fn gzero_cdf(t: f64) -> f64 {
    1.0 - (1.0 + 2.0 * t.sqrt()) * (-2.0 * t.sqrt()).exp()
}

fn c4_last_zero() -> Result<Outcome> {
    let (psi, phi) = (stable(1.0, 2.0), imm(1.0, 0.5));
    let law = ZeroSetLaw::new(psi.clone(), phi.clone())?;
    let mut worst: f64 = 0.0;
    for t in [0.1, 1.0, 4.0] {
        worst = worst.max((law.gzero_density(t)? - 2.0 * (-2.0 * t.sqrt()).exp()).abs());
    }
    let g = empirical_gzero(&psi, &phi, 10_000, 30.0, 1e-4, 2024)?;
    let ks = ks_one_sample(&g, gzero_cdf);
    Ok(outcome(worst < 1e-4 && ks < 0.03, format!("density max err {worst:.2e}, KS {ks:.4} (n = 10^4)")))
}

fn mean_dim<F>(reps: usize, f: F) -> Result<(f64, f64)>
where
    F: Fn(u64) -> Result<f64> + Sync + Send,
{
    let d = replicates(reps, f)?;
    let m = d.iter().sum::<f64>() / d.len() as f64;
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
    Ok((m, sd))
}

fn c5_dimension() -> Result<Outcome> {
    let (horizon, eps, reps) = (1e3, 1e-5, 20);
    let grid = dyadic_grid(4, 14);
    let budget = Duration::from_secs(600);
    let start = Instant::now();
    let sampler = cbi_sampler(&stable(1.0, 2.0), &imm(0.5, 1.0), horizon, eps)?;
    let (cbi, cbi_sd) = mean_dim(reps, |k| Ok(statistics(&simulate(&sampler, horizon, 55, k)?, &grid)?.dim()))?;
    let cbi_time = start.elapsed();
    let start = Instant::now();
    let ou_tail = OuCuttingTail::new(1.8, eps)?;
    let (ou, ou_sd) = mean_dim(reps, |k| Ok(statistics(&simulate(&ou_tail, horizon, 56, k)?, &grid)?.dim()))?;
    let ou_time = start.elapsed();
    let target_ou = 1.0 / 1.8;
    Ok(outcome(
        (cbi - 0.5).abs() <= 0.08 && (ou - target_ou).abs() <= 0.08 && cbi_time <= budget && ou_time <= budget,
        format!(
            "CBI fit {cbi:.4} (sd {cbi_sd:.3}, target 0.5, {:.0}s); OU alpha=1.8 fit {ou:.4} (sd {ou_sd:.3}, target {target_ou:.4}, {:.0}s)",
            cbi_time.as_secs_f64(),
            ou_time.as_secs_f64()
        ),
    ))
}

fn c6_divisibility() -> Result<Outcome> {
    let (psi, phi) = (stable(1.0, 2.0), imm(1.0, 0.5));
    let (horizon, eps, reps) = (30.0, 1e-4, 2000);
    let one = cbi_sampler(&psi, &phi, horizon, eps)?;
    let quarter = cbi_sampler(&psi, &phi.scaled(0.25)?, horizon, eps)?;
    let a = replicates(reps, |k| Ok(simulate(&one, horizon, 61, k)?.last_point()))?;
    let b = replicates(reps, |k| {
        let parts: Vec<_> = (0..4).map(|j| simulate(&quarter, horizon, 62 + j, k)).collect::<Result<_>>()?;
        Ok(intersect(&parts)?.last_point())
    })?;
    let ks = ks_two_sample(&a, &b);
    Ok(outcome(ks < 0.05, format!("two-sample KS {ks:.4} (2000 vs 2000)")))
}

fn c7_pushforward() -> Result<Outcome> {
    let k15 = pushforward_ks(1.5, 10_000, 0.01, 71)?;
    let k2 = pushforward_ks(2.0, 10_000, 0.01, 72)?;
    Ok(outcome(k15 < 0.05 && k2 < 0.05, format!("KS {k15:.4} (alpha=1.5), {k2:.4} (alpha=2)")))
}

fn c8_index() -> Result<Outcome> {
    let t: f64 = 1e-8;
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [1.5, 2.0] {
        let target = 1.0 / (alpha - 1.0);
        let v = FlowSolver::new(stable(target, alpha))?.v_from_infinity(t)?;
        let r = v.ln() / (1.0 / t).ln();
        pass &= (r / target - 1.0).abs() < 0.01;
        let v1 = FlowSolver::new(stable(1.0, alpha))?.v_from_infinity(t)?;
        let r1 = v1.ln() / (1.0 / t).ln();
        parts.push(format!("alpha={alpha}: {r:.6} vs {target} (d = 1: {r1:.4})"));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn c9_properties() -> Result<Outcome> {
    let mut failures = Vec::new();
    // flow semigroup
    let flow = FlowSolver::new(BranchingMechanism::quadratic(0.5, 1.0)?)?;
    for (s, t, l) in [(0.3, 0.7, 5.0), (1.0, 2.0, 0.1)] {
        let lhs = flow.v_from_lambda(s + t, l)?;
        let rhs = flow.v_from_lambda(s, flow.v_from_lambda(t, l)?)?;
        if (lhs / rhs - 1.0).abs() > 1e-9 {
            failures.push("semigroup");
        }
    }
    // convexity of Psi, concavity of Phi
    let psi = stable(1.0, 1.5);
    let phi: ImmigrationMechanism = "gamma:a=1,b=1".parse()?;
    for k in 1..50 {
        let (q, h) = (0.1 * k as f64, 0.05);
        let d2 = psi.eval(q + h)? - 2.0 * psi.eval(q)? + psi.eval(q - h)?;
        let e2 = phi.eval(q + h)? - 2.0 * phi.eval(q)? + phi.eval(q - h)?;
        if d2 < -1e-12 || e2 > 1e-12 {
            failures.push("convexity");
        }
    }
    // concavity of L
    let law = ZeroSetLaw::new(stable(1.0, 2.0), imm(1.0, 0.5))?;
    let ls: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&q| law.laplace_exponent(q)).collect::<Result<_>>()?;
    if ls[0] - 2.0 * ls[1] + ls[2] > 1e-10 {
        failures.push("L concavity");
    }
    // determinism by seed
    let s = cbi_sampler(&stable(1.0, 2.0), &imm(0.5, 1.0), 10.0, 1e-4)?;
    if simulate(&s, 10.0, 3, 1)? != simulate(&s, 10.0, 3, 1)? {
        failures.push("determinism");
    }
    // eps sensitivity of the g_inf median
    let (psi, phi) = (stable(1.0, 2.0), imm(1.0, 0.5));
    let median = |eps: f64| -> Result<f64> {
        let sampler = DurationSampler::new(psi.clone(), phi.clone(), eps, 3e4)?;
        let mut g = replicates(4000, |k| gzero_replicate(&sampler, 30.0, 91, k))?;
        g.sort_by(f64::total_cmp);
        Ok(quantile(&g, 0.5))
    };
    let (m1, m2) = (median(2e-4)?, median(1e-4)?);
    if (m1 / m2 - 1.0).abs() >= 0.02 {
        failures.push("eps sensitivity");
    }
    let detail = if failures.is_empty() {
        format!("all property checks hold (g_inf median {m1:.4} -> {m2:.4} on halving eps)")
    } else {
        format!("failed: {failures:?} (g_inf median {m1:.4} -> {m2:.4})")
    };
    Ok(outcome(failures.is_empty(), detail))
}

fn main() {
    type Criterion = (usize, &'static str, fn() -> Result<Outcome>, Duration);
    let criteria: [Criterion; 9] = [
        (1, "classification grid", c1_classification_grid, Duration::from_secs(60)),
        (2, "closed-form Laplace exponent", c2_feller_laplace, Duration::from_secs(10)),
        (3, "CBI marginal identity", c3_marginal, Duration::from_secs(10)),
        (4, "last-zero law", c4_last_zero, Duration::from_secs(300)),
        (5, "dimension estimation", c5_dimension, Duration::from_secs(1200)),
        (6, "infinite divisibility", c6_divisibility, Duration::from_secs(600)),
        (7, "OU pushforward identity", c7_pushforward, Duration::from_secs(60)),
        (8, "index lemma", c8_index, Duration::from_secs(1)),
        (9, "property suites", c9_properties, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (n, name, run, budget) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {n} ({name}): {detail} [{:.1}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
