//! Fixed-precision number formatting for reports.

/// Significant digits used in JSON and CSV reports.
pub const REPORT_DIGITS: usize = 12;

/// Formats like C's `%.{digits}g`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// [`format_sig`] with [`REPORT_DIGITS`].
pub fn sig12(v: f64) -> String {
    format_sig(v, REPORT_DIGITS)
}

/// `v` rounded to [`REPORT_DIGITS`] significant digits, for JSON output.
pub fn round12(v: f64) -> f64 {
    if v.is_finite() {
        sig12(v).parse().unwrap_or(v)
    } else {
        v
    }
}
