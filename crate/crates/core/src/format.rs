//! Deterministic decimal output with 12 significant digits, like C's `%.12g`.

/// Formats `x` like `printf("%.12g", x)`.
pub fn g12(x: f64) -> String {
    g(x, 12)
}

/// Formats `x` like `printf("%.{digits}g", x)`.
pub fn g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-1.5, "-1.5"),
            (0.60527819, "0.60527819"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0, "0.666666666667"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e-5, "1e-05"),
            (0.0001, "0.0001"),
            (1.5e-7, "1.5e-07"),
            (1e100, "1e+100"),
            (100.0, "100"),
            (0.1 + 0.2, "0.3"),
        ];
        for (x, want) in cases {
            assert_eq!(g12(x), want, "{x:e}");
        }
        assert_eq!(g(9.9999, 3), "10");
        assert_eq!(g(f64::NAN, 12), "nan");
    }

    #[test]
    fn round_trip_within_twelve_digits() {
        for x in [0.23081722, 0.87276904, 1.0 + 1e-9, 5.0 / 18.0, -3.0 / 2.0] {
            let y: f64 = g12(x).parse().unwrap();
            assert!((x - y).abs() <= 5e-12 * x.abs());
        }
    }
}
