//! Number formatting shared by the CLI and reports.

/// Ten significant digits, trailing zeros kept, `-0` folded to `0`.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (9 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(0.125), "0.1250000000");
        assert_eq!(sig10(0.875), "0.8750000000");
        assert_eq!(sig10(1.0), "1.000000000");
        assert_eq!(sig10(0.0), "0.000000000");
        assert_eq!(sig10(-1e-20), "-0.00000000000000000001000000000");
        assert_eq!(sig10(12345.678), "12345.67800");
        assert_eq!(sig10(1e12), "1000000000000");
    }
}
