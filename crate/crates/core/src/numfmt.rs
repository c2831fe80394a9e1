//! Fixed-precision decimal rendering shared by every file writer.
//!
//! All numeric output goes through [`fmt_sig`] so that files are
//! byte-identical across runs and platforms.

/// Significant digits used in every serialized real.
pub const SIG_DIGITS: usize = 9;

/// Renders `v` as a plain decimal with at most nine significant digits.
///
/// Trailing zeros in the fraction are trimmed, `-0` becomes `0`, and
/// non-finite values render as `nan`, `inf` or `-inf`.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".to_string();
    }
    // `{:e}` gives a correctly rounded mantissa; shift its digits by hand.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let point = exp + 1; // digits before the decimal point
    let mut out = String::with_capacity(digits.len() + 8);
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..(-point) {
            out.push('0');
        }
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Rounds `v` to the value that [`fmt_sig`] would write.
pub fn quantize(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIG_DIGITS - 1, v)
        .parse()
        .expect("round-trip of formatted float")
}

/// Renders an optional value; `None` becomes the empty string.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_plain_decimals() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(0.000123456789123), "0.000123456789");
        assert_eq!(fmt_sig(123456789.4), "123456789");
        assert_eq!(fmt_sig(1234567891234.0), "1234567890000");
        assert_eq!(fmt_sig(9.9999999996), "10");
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265");
    }

    #[test]
    fn quantize_matches_rendering() {
        for &v in &[std::f64::consts::E, -1.0 / 3.0, 1e-20, 7.0e12, 0.1 + 0.2] {
            let q = quantize(v);
            assert_eq!(fmt_sig(v).parse::<f64>().unwrap(), q);
            assert_eq!(quantize(q), q);
        }
    }
}
