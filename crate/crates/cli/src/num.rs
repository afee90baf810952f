//! Locale-free number rendering for CSV and SVG output.

/// Significant digits used for every floating-point CSV cell.
pub const CSV_DIGITS: usize = 10;

/// Renders `x` rounded to `digits` significant digits, in plain decimal
/// notation when the exponent is moderate and in `1.5e-12` style otherwise.
/// Trailing zeros are trimmed and a value that rounds to zero prints as `0`.
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1, "at least one significant digit");
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_only: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits_only = digits_only.trim_end_matches('0');
    let digits_only = if digits_only.is_empty() { "0" } else { digits_only };

    let body = if (-7..=15).contains(&exp) {
        plain(digits_only, exp)
    } else {
        let (head, tail) = digits_only.split_at(1);
        if tail.is_empty() {
            format!("{head}e{exp}")
        } else {
            format!("{head}.{tail}e{exp}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn plain(digits: &str, exp: i32) -> String {
    let point = exp + 1;
    if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    }
}

/// [`sig`] at CSV precision.
pub fn csv(x: f64) -> String {
    sig(x, CSV_DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rendering() {
        assert_eq!(sig(100.0, 10), "100");
        assert_eq!(sig(-5.77, 10), "-5.77");
        assert_eq!(sig(0.0642, 3), "0.0642");
        assert_eq!(sig(1234.5678, 6), "1234.57");
        assert_eq!(sig(0.1 + 0.2, 10), "0.3");
        assert_eq!(sig(123456.0, 2), "120000");
        assert_eq!(sig(9.9999999999, 3), "10");
        assert_eq!(sig(1.5e-7, 4), "0.00000015");
    }

    #[test]
    fn scientific_rendering() {
        assert_eq!(sig(1.5e-12, 10), "1.5e-12");
        assert_eq!(sig(-2e20, 10), "-2e20");
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(sig(-0.0, 10), "0");
        assert_eq!(sig(0.0, 10), "0");
    }

    #[test]
    fn non_finite() {
        assert_eq!(sig(f64::NAN, 4), "NaN");
        assert_eq!(sig(f64::NEG_INFINITY, 4), "-inf");
    }
}
