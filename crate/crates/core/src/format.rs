//! Number formatting shared by every CSV writer.

/// Format with 6 significant digits, `%g` style: fixed notation for
/// exponents in `[-5, 6)`, scientific otherwise, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig6;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.333_350_000_1), "0.33335");
        assert_eq!(sig6(0.007_012_345_1), "0.00701235");
        assert_eq!(sig6(123_456.7), "123457");
        assert_eq!(sig6(1_234_567.0), "1.23457e6");
        assert_eq!(sig6(-2.5e-7), "-2.5e-7");
        assert_eq!(sig6(-3.912_023), "-3.91202");
        assert_eq!(sig6(f64::NAN), "nan");
    }
}
