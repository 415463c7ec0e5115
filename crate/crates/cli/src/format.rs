/// Format `x` with `digits` significant digits, keeping trailing zeros.
/// Very small or very large magnitudes switch to scientific notation.
pub fn significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("rust scientific format");
    if exp < -5 || exp >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn sig6(x: f64) -> String {
    significant(x, 6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits() {
        assert_eq!(sig6(5.425), "5.42500");
        assert_eq!(sig6(0.5377), "0.537700");
        assert_eq!(sig6(0.048), "0.0480000");
        assert_eq!(sig6(-0.124), "-0.124000");
        assert_eq!(sig6(1.0), "1.00000");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(123456.4), "123456");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(0.999999999), "1.00000");
    }
}
