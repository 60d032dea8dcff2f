//! Gamma-function helpers.

/// `Gamma(x)` for `x > 0`.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `Gamma(q + a) / Gamma(q)` for `q >= 0`, `a > 0`, accurate for very large `q`.
///
/// Small arguments are shifted upwards with the recurrence
/// `Gamma(z + 1) = z Gamma(z)`; large ones use the Stirling series for the
/// difference of log-gammas, written so the leading `q ln q` terms cancel
/// analytically.
pub fn gamma_ratio(q: f64, a: f64) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    const SHIFT_TO: f64 = 24.0;
    let mut z = q;
    let mut prefactor = 1.0;
    while z < SHIFT_TO {
        // Gamma(z+a)/Gamma(z) = [z/(z+a)] * Gamma(z+1+a)/Gamma(z+1)
        prefactor *= z / (z + a);
        z += 1.0;
    }
    prefactor * ln_ratio_large(z, a).exp()
}

fn ln_ratio_large(z: f64, a: f64) -> f64 {
    let za = z + a;
    let base = (z - 0.5) * (a / z).ln_1p() + a * za.ln() - a;
    let series = |x: f64| {
        let x2 = x * x;
        1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2) - 1.0 / (1680.0 * x * x2 * x2 * x2)
    };
    base + series(za) - series(z)
}
