//! Student-t distribution: CDF through the regularized incomplete beta
//! function and the two-sided critical value by safeguarded Newton iteration.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

pub(crate) fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 20_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`. `x_complement` must equal `1 - x`;
/// passing it separately avoids cancellation when `x` is close to 1.
pub(crate) fn regularized_inc_beta(a: f64, b: f64, x: f64, x_complement: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x_complement <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * x_complement.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_continued_fraction(b, a, x_complement) / b
    }
}

/// `P(|T| > c)` for `T ~ t(df)`, `c >= 0`.
fn two_sided_tail(c: f64, df: f64) -> f64 {
    let c2 = c * c;
    let denom = df + c2;
    regularized_inc_beta(0.5 * df, 0.5, df / denom, c2 / denom)
}

fn ln_density_norm(df: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln()
}

/// Density of the Student-t distribution with `df` degrees of freedom.
pub fn student_t_pdf(t: f64, df: f64) -> f64 {
    (ln_density_norm(df) - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
}

/// Cumulative distribution function of the Student-t distribution.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let half_tail = 0.5 * two_sided_tail(t.abs(), df);
    if t >= 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

/// Two-sided critical value `c` with `P(-c <= T <= c) = alpha` for `df`
/// degrees of freedom, i.e. the `(1 + alpha) / 2` quantile.
pub fn t_critical(alpha: f64, df: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if df < 1 {
        return Err(Error::InvalidArgument(
            "degrees of freedom must be at least 1".into(),
        ));
    }
    let nu = df as f64;
    let target = 1.0 - alpha;
    let norm = ln_density_norm(nu);

    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while two_sided_tail(hi, nu) > target {
        lo = hi;
        hi *= 2.0;
    }

    let mut c = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = two_sided_tail(c, nu) - target;
        if g > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let pdf = (norm - 0.5 * (nu + 1.0) * (c * c / nu).ln_1p()).exp();
        // d/dc P(|T| > c) = -2 f(c)
        let newton = c + g / (2.0 * pdf);
        let next = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - c).abs();
        c = next;
        if step <= 1e-13 * c.max(1.0) || hi - lo <= 1e-13 * c.max(1.0) {
            break;
        }
    }
    Ok(c)
}
