//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// `x = mantissa * 2^exponent` with an integer mantissa.
fn decompose(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mantissa, exponent) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_bits - 1075)
    };
    (sign * mantissa, exponent)
}

/// All values as integers over the common scale `2^exponent`.
fn to_fixed(values: &[f64]) -> (Vec<BigInt>, i32) {
    let parts: Vec<(i64, i32)> = values.iter().map(|&v| decompose(v)).collect();
    let min_exp = parts
        .iter()
        .filter(|p| p.0 != 0)
        .map(|p| p.1)
        .min()
        .unwrap_or(0);
    let ints = parts
        .iter()
        .map(|&(m, e)| if m == 0 { BigInt::zero() } else { BigInt::from(m) << (e - min_exp) as usize })
        .collect();
    (ints, min_exp)
}

/// `num / den * 2^scale` rounded to f64.
fn ratio_to_f64(num: &BigInt, den: &BigInt, scale: i32) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = num.is_negative() != den.is_negative();
    let (mut n, mut d) = (num.abs(), den.abs());
    let shift = n.bits() as i64 - d.bits() as i64 - 64;
    if shift > 0 {
        d <<= shift as usize;
    } else {
        n <<= (-shift) as usize;
    }
    let q = (n / d).to_f64().unwrap();
    let v = q * 2f64.powi((shift + scale as i64) as i32);
    if negative {
        -v
    } else {
        v
    }
}

pub struct ExactFit {
    pub slope: f64,
    pub offset: f64,
    pub correlation: f64,
}

/// Correlation and least-squares line from the normal equations, evaluated
/// in exact integer arithmetic and rounded once at the end.
pub fn exact_fit(xs: &[f64], ys: &[f64]) -> ExactFit {
    assert_eq!(xs.len(), ys.len());
    let n = BigInt::from(xs.len());
    let (xi, ex) = to_fixed(xs);
    let (yi, ey) = to_fixed(ys);
    let sx: BigInt = xi.iter().sum();
    let sy: BigInt = yi.iter().sum();
    let sxx: BigInt = xi.iter().map(|x| x * x).sum();
    let syy: BigInt = yi.iter().map(|y| y * y).sum();
    let sxy: BigInt = xi.iter().zip(&yi).map(|(x, y)| x * y).sum();

    let cxx = &n * &sxx - &sx * &sx;
    let cyy = &n * &syy - &sy * &sy;
    let cxy = &n * &sxy - &sx * &sy;

    let slope = ratio_to_f64(&cxy, &cxx, ey - ex);
    let offset = ratio_to_f64(&(&sy * &cxx - &sx * &cxy), &(&n * &cxx), ey);
    let r2 = ratio_to_f64(&(&cxy * &cxy), &(&cxx * &cyy), 0);
    let correlation = if cxy.is_negative() { -r2.sqrt() } else { r2.sqrt() };
    ExactFit {
        slope,
        offset,
        correlation,
    }
}

/// Two-sided Student-t critical values by quadrature of the density.
///
/// With `t = sqrt(df) tan(theta)` the density becomes proportional to
/// `cos(theta)^(df - 1)` on `[0, pi/2)`, so both the coverage integral and the
/// normalizing constant are smooth integrals over a finite interval.
pub struct TQuadrature {
    df: u64,
    step: f64,
    /// Composite Simpson integral from 0 to node `2k`.
    cumulative: Vec<f64>,
}

impl TQuadrature {
    pub fn new(df: u64) -> Self {
        const PANELS: usize = 1 << 15;
        let nodes = 2 * PANELS;
        let step = FRAC_PI_2 / nodes as f64;
        let g = |theta: f64| integrand(df, theta);
        let mut cumulative = Vec::with_capacity(PANELS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..PANELS {
            let a = 2 * k;
            let (t0, t1, t2) = (a as f64 * step, (a + 1) as f64 * step, (a + 2) as f64 * step);
            acc += step / 3.0 * (g(t0) + 4.0 * g(t1) + g(t2));
            cumulative.push(acc);
        }
        TQuadrature {
            df,
            step,
            cumulative,
        }
    }

    fn partial(&self, lo: f64, hi: f64) -> f64 {
        const SUB: usize = 64;
        let h = (hi - lo) / SUB as f64;
        let mut acc = integrand(self.df, lo) + integrand(self.df, hi);
        for i in 1..SUB {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(self.df, lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    pub fn critical(&self, alpha: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = alpha * total;
        let k = self.cumulative.partition_point(|&c| c < target);
        let base = self.cumulative[k - 1];
        let lo0 = 2.0 * (k - 1) as f64 * self.step;
        let (mut lo, mut hi) = (lo0, lo0 + 2.0 * self.step);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if base + self.partial(lo0, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (self.df as f64).sqrt() * (0.5 * (lo + hi)).tan()
    }
}

fn integrand(df: u64, theta: f64) -> f64 {
    if df == 1 {
        1.0
    } else {
        theta.cos().powi((df - 1) as i32)
    }
}

/// Standard-normal 0.995 quantile.
pub const Z_0995: f64 = 2.575_829_303_548_900_4;
