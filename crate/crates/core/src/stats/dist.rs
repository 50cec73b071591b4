use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

pub fn normal_cdf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// e^{-q} K_{1/4}(q) from the integral representation
/// K_v(q) = ∫_0^∞ exp(-q cosh t) cosh(v t) dt, with the trapezoid rule
/// (exponentially convergent for this doubly-exponentially decaying
/// integrand).
fn scaled_bessel_k_quarter(q: f64) -> f64 {
    const H: f64 = 0.02;
    if q.is_nan() || q <= 0.0 {
        return f64::INFINITY;
    }
    let mut sum = 0.5 * (-2.0 * q).exp();
    let mut t = H;
    loop {
        let e = q * (1.0 + t.cosh());
        if e > 745.0 {
            break;
        }
        sum += (-e).exp() * (0.25 * t).cosh();
        t += H;
    }
    sum * H
}

/// CDF of the limiting distribution of the Cramér–von Mises statistic.
pub fn cvm_limit_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let mut total = 0.0;
    for k in 0..500u32 {
        let kf = f64::from(k);
        let u = (ln_gamma(kf + 0.5) - ln_gamma(kf + 1.0)).exp() / (std::f64::consts::PI.powf(1.5) * x.sqrt());
        let y = 4.0 * kf + 1.0;
        let q = y * y / (16.0 * x);
        let term = u * y.sqrt() * scaled_bessel_k_quarter(q);
        total += term;
        if term.abs() < 1e-14 * total.max(1e-300) || term == 0.0 && k > 0 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}
