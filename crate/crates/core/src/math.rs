//! Scalar numeric helpers: stable logistic link, normal quantile, moments.

/// Logistic function `expit(x) = exp(x) / (1 + exp(x))`.
///
/// Evaluated in the branch that never exponentiates a positive argument, so
/// it neither overflows nor returns an exact 0/1 for |x| up to ~700.
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`expit`]: `logit(p) = ln(p / (1 - p))` for p in (0, 1).
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
///
/// A rational approximation polished with two Newton steps against the
/// erfc-based CDF; accurate to ~1e-14 over (1e-300, 1 - 1e-16).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile requires p in (0,1)");
    // Abramowitz & Stegun 26.2.23 seed (|error| < 4.5e-4).
    let seed = {
        let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
        let t = (-2.0 * q.ln()).sqrt();
        let num = 2.515517 + t * (0.802853 + t * 0.010328);
        let den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308));
        sign * (t - num / den)
    };
    let mut x = seed;
    for _ in 0..2 {
        let err = normal_cdf(x) - p;
        let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if pdf > 0.0 {
            x -= err / pdf;
        }
    }
    x
}

/// Mean of a slice; NaN on empty input.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Empirical quantile under the inf convention: the smallest observed value
/// `t` with `(1/n) Σ 1{v_i <= t} >= q`, for `q` in (0, 1]. The 1e-6 slack
/// keeps the comparison exact when `q·n` is an integer up to f64 rounding.
pub fn quantile_at(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty() && q > 0.0 && q <= 1.0);
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let target = q * n as f64 - 1e-6;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if (j + 1) as f64 >= target {
            return sorted[i];
        }
        i = j + 1;
    }
    sorted[n - 1]
}

/// Pearson correlation of two equal-length slices.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}
