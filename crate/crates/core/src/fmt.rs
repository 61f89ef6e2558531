//! Text formatting of reals with 17 significant digits (`%.17g` style).

/// Formats `x` with 17 significant digits, which is enough for any `f64` to
/// parse back to the identical value.
pub fn real17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{exp}")
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(real17(0.5), "0.5");
        assert_eq!(real17(0.1), "0.10000000000000001");
        assert_eq!(real17(47.0), "47");
        assert_eq!(real17(-2.5e-9), "-2.5000000000000001e-9");
        assert_eq!(real17(1e20), "1e20");
        assert_eq!(real17(0.0), "0");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(real17(x).parse::<f64>().unwrap(), x);
        }
    }
}
