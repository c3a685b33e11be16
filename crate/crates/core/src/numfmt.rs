//! Fixed-precision formatting for tables and CSV.

use num_complex::Complex64;

/// Significant digits used for every printed number.
pub const DIGITS: usize = 10;

/// `v` with [`DIGITS`] significant digits, fixed-point for moderate magnitudes.
pub fn real(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{:.*e}", DIGITS - 1, v)
    }
}

/// `a+bi` / `a-bi` with both parts at [`DIGITS`] significant digits.
pub fn complex(z: Complex64) -> String {
    let im = real(z.im.abs());
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{im}i", real(z.re))
}
