//! Statistical primitives shared by measurement, fitting and reporting.
//!
//! Sums are accumulated with Neumaier compensation and every second-order
//! quantity is computed from centered values (two-pass), so results stay
//! close to exact arithmetic even for long or offset-heavy series.

mod student_t;

use std::ops::Deref;

pub use student_t::{student_t_cdf, student_t_pdf, t_critical};

use crate::error::{Error, Result};

/// An ordered list of finite real numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleVector(Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        ensure_finite(&values)?;
        Ok(SampleVector(values))
    }

    pub fn empty() -> Self {
        SampleVector(Vec::new())
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite sample {value}"
            )));
        }
        self.0.push(value);
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SampleVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SampleVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        SampleVector::new(values)
    }
}

/// Slope and intercept of a least-squares line `y = slope * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult {
    pub slope: f64,
    pub offset: f64,
    pub n: usize,
}

impl RegressionResult {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

fn ensure_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidArgument(format!(
            "non-finite value {} at index {i}",
            values[i]
        ))),
        None => Ok(()),
    }
}

fn ensure_len(values: &[f64], needed: usize) -> Result<()> {
    if values.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: values.len(),
        });
    }
    Ok(())
}

fn ensure_paired(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "length mismatch: {} xs vs {} ys",
            xs.len(),
            ys.len()
        )));
    }
    ensure_len(xs, 2)?;
    ensure_finite(xs)?;
    ensure_finite(ys)
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn mean_unchecked(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let first: CompensatedSum = values.iter().copied().collect();
    let m = first.value() / n;
    // one refinement pass removes the rounding left in the first estimate
    let residual: CompensatedSum = values.iter().map(|v| v - m).collect();
    m + residual.value() / n
}

/// Arithmetic mean.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("mean of an empty sample".into()));
    }
    ensure_finite(values)?;
    Ok(mean_unchecked(values))
}

/// Sample standard deviation with the `M - 1` denominator.
pub fn sample_stddev(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "standard deviation needs at least 2 values, got {}",
            values.len()
        )));
    }
    ensure_finite(values)?;
    if is_constant(values) {
        return Ok(0.0);
    }
    let m = mean_unchecked(values);
    let ss: CompensatedSum = values.iter().map(|v| (v - m) * (v - m)).collect();
    Ok((ss.value() / (values.len() - 1) as f64).sqrt())
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn centered_moments(xs: &[f64], ys: &[f64]) -> Moments {
    let mean_x = mean_unchecked(xs);
    let mean_y = mean_unchecked(ys);
    let mut sxx = CompensatedSum::default();
    let mut syy = CompensatedSum::default();
    let mut sxy = CompensatedSum::default();
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    Moments {
        mean_x,
        mean_y,
        sxx: sxx.value(),
        syy: syy.value(),
        sxy: sxy.value(),
    }
}

/// Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    ensure_paired(xs, ys)?;
    if is_constant(xs) || is_constant(ys) {
        return Err(Error::DegenerateData(
            "correlation undefined: zero deviation in one of the inputs".into(),
        ));
    }
    let m = centered_moments(xs, ys);
    if m.sxx == 0.0 || m.syy == 0.0 {
        return Err(Error::DegenerateData(
            "correlation undefined: zero deviation in one of the inputs".into(),
        ));
    }
    let product = (m.sxx * m.syy).sqrt();
    let denom = if product.is_finite() && product > 0.0 {
        product
    } else {
        m.sxx.sqrt() * m.syy.sqrt()
    };
    let r = m.sxy / denom;
    Ok(r.clamp(-1.0, 1.0))
}

/// Ordinary least-squares line through `(xs, ys)`. The intercept is chosen
/// so the line passes through the centroid.
pub fn linfit(xs: &[f64], ys: &[f64]) -> Result<RegressionResult> {
    ensure_paired(xs, ys)?;
    if is_constant(xs) {
        return Err(Error::DegenerateData(
            "regression undefined: zero deviation in the input values".into(),
        ));
    }
    let m = centered_moments(xs, ys);
    if m.sxx == 0.0 {
        return Err(Error::DegenerateData(
            "regression undefined: zero deviation in the input values".into(),
        ));
    }
    let slope = m.sxy / m.sxx;
    Ok(RegressionResult {
        slope,
        offset: m.mean_y - slope * m.mean_x,
        n: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn mean_examples() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mean(&[5.0]).unwrap(), 5.0);
        // (0.5130 + 0.5236 + 0.5377) / 3 = 1.5743 / 3
        let m = mean(&[0.5130, 0.5236, 0.5377]).unwrap();
        assert!((m - 0.524_766_666_666_666_7).abs() < 1e-15);
        assert!(matches!(mean(&[]), Err(Error::InvalidArgument(_))));
        assert!(mean(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn stddev_examples() {
        assert_eq!(sample_stddev(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert!((sample_stddev(&[1.0, 3.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // mean 5, squared deviations sum to 32, 32 / 7 = 4.571428...
        let s = sample_stddev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert!((s - 2.138_09).abs() < 1e-5);
        assert!(matches!(sample_stddev(&[1.0]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);

        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 2.0, 3.0, 100.0];
        // direct evaluation: x-bar 2.5, y-bar 26.5
        // sxy = (-1.5)(-25.5) + (-0.5)(-24.5) + (0.5)(-23.5) + (1.5)(73.5) = 149
        // sxx = 5, syy = 650.25 + 600.25 + 552.25 + 5402.25 = 7205
        let expected = 149.0 / (5.0f64 * 7205.0).sqrt();
        let r = pearson(&xs, &ys).unwrap();
        assert!(r > 0.0 && r < 1.0);
        assert!((r - expected).abs() < 1e-15, "{r} vs {expected}");
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[0.1, 0.1, 0.1]),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn linfit_examples() {
        let fit = linfit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!((fit.slope, fit.offset, fit.n), (2.0, 1.0, 3));
        let fit = linfit(&[1.0, 2.0], &[7.0, 7.0]).unwrap();
        assert_eq!((fit.slope, fit.offset), (0.0, 7.0));
        assert!(matches!(
            linfit(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            linfit(&[1.0, 2.0], &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let acc: CompensatedSum = [1e16, 1.0, -1e16].into_iter().collect();
        assert_eq!(acc.value(), 1.0);
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e3..1e3f64
    }

    proptest! {
        #[test]
        fn pearson_bounded(pairs in prop::collection::vec((finite(), finite()), 2..60)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let Ok(r) = pearson(&xs, &ys) {
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn pearson_affine_invariance(
            pairs in prop::collection::vec((finite(), finite()), 3..40),
            a in 0.1..10.0f64, b in -50.0..50.0f64,
            c in 0.1..10.0f64, d in -50.0..50.0f64,
        ) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let Ok(r) = pearson(&xs, &ys) else { return Ok(()) };
            let xt: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let yt: Vec<f64> = ys.iter().map(|y| c * y + d).collect();
            let yn: Vec<f64> = ys.iter().map(|y| -c * y + d).collect();
            prop_assert!((pearson(&xt, &yt).unwrap() - r).abs() < 1e-9);
            prop_assert!((pearson(&xt, &yn).unwrap() + r).abs() < 1e-9);
        }

        #[test]
        fn linfit_recovers_exact_line(
            xs in prop::collection::vec(1.0..100.0f64, 2..80),
            p in -20.0..20.0f64, q in -20.0..20.0f64,
        ) {
            prop_assume!(!is_constant(&xs));
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assume!(hi - lo > 1.0);
            let ys: Vec<f64> = xs.iter().map(|x| p * x + q).collect();
            let fit = linfit(&xs, &ys).unwrap();
            let scale = p.abs() * 100.0 + q.abs();
            prop_assert!((fit.slope - p).abs() <= 1e-12 * p.abs().max(1.0) * 10.0);
            prop_assert!((fit.offset - q).abs() <= 1e-12 * scale * 10.0);
        }

        #[test]
        fn linfit_residuals_and_centroid(pairs in prop::collection::vec((finite(), finite()), 2..80)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let Ok(fit) = linfit(&xs, &ys) else { return Ok(()) };
            let scale: f64 = ys.iter().map(|y| y.abs()).sum::<f64>()
                + xs.iter().map(|x| (fit.slope * x).abs()).sum::<f64>() + 1.0;
            let resid: CompensatedSum = xs.iter().zip(&ys).map(|(x, y)| y - fit.eval(*x)).collect();
            prop_assert!(resid.value().abs() <= 1e-9 * scale);
            let mx = mean(&xs).unwrap();
            let my = mean(&ys).unwrap();
            prop_assert!(close(fit.eval(mx), my, 1e-9 * (scale / xs.len() as f64).max(1.0)));
        }

        #[test]
        fn stddev_scaling(v in prop::collection::vec(finite(), 2..50), c in -10.0..10.0f64, b in -1e3..1e3f64) {
            let s = sample_stddev(&v).unwrap();
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let shifted: Vec<f64> = v.iter().map(|x| x + b).collect();
            prop_assert!((sample_stddev(&scaled).unwrap() - c.abs() * s).abs() <= 1e-9 * (c.abs() * s).max(1.0));
            prop_assert!((sample_stddev(&shifted).unwrap() - s).abs() <= 1e-9 * s.max(1.0));
        }

        #[test]
        fn t_critical_monotone(df in 1u64..500, alpha in 0.5..0.995f64) {
            let base = t_critical(alpha, df).unwrap();
            prop_assert!(t_critical(alpha, df + 1).unwrap() < base);
            prop_assert!(t_critical(alpha + 0.004, df).unwrap() > base);
        }
    }
}
