//! CSV number formatting in the style of C's `%.12g`.

use nlg_core::ExtendedEnergy;

const PRECISION: i32 = 12;

pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= PRECISION {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (PRECISION - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn energy(e: ExtendedEnergy) -> String {
    match e {
        ExtendedEnergy::Finite(v) => g12(v),
        ExtendedEnergy::Infinite => "inf".into(),
    }
}

pub fn row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.5, "0.5"),
            (2.0 * std::f64::consts::LN_2, "1.38629436112"),
            (std::f64::consts::PI / 4.0, "0.785398163397"),
            (1e-5, "1e-05"),
            (1.25e-7, "1.25e-07"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (-2.5, "-2.5"),
            (0.01, "0.01"),
            (999999999999.5, "1e+12"),
        ];
        for (x, want) in cases {
            assert_eq!(g12(x), want, "{x}");
        }
        assert_eq!(g12(f64::INFINITY), "inf");
        assert_eq!(energy(ExtendedEnergy::Infinite), "inf");
    }
}
