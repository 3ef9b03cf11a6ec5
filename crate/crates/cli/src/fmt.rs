//! Number formatting for text output.

/// `x` rounded to `digits` significant digits: fixed notation for
/// magnitudes in `[1e-3, 1e6)`, scientific otherwise.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // Round first so 9.9996 becomes 10.00, not 9.1000e0-style artefacts.
    let sci = format!("{:.*e}", digits - 1, x);
    let (_, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-3..6).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

/// Four significant digits, the text-mode default.
pub fn num(x: f64) -> String {
    sig(x, 4)
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
