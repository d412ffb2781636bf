//! Decimal and exact-rational rendering of computed values.

const MAX_DENOMINATOR: i64 = 100_000;

/// Twelve significant digits, trailing zeros trimmed.
pub fn decimal(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-6..=15).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let digits = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.digits$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// The simplest fraction `p/q` with `q ≤ 10⁵` within `1e-12·max(1, |x|)` of `x`.
pub fn rational(x: f64) -> Option<(i64, i64)> {
    if !x.is_finite() || x.abs() > 1e9 {
        return None;
    }
    let tol = 1e-12 * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (h2, k2) = (ai.checked_mul(h1)?.checked_add(h0)?, ai.checked_mul(k1)?.checked_add(k0)?);
        if k2 > MAX_DENOMINATOR {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = r - a;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

pub fn rational_string(x: f64) -> Option<String> {
    rational(x).map(|(p, q)| if q == 1 { p.to_string() } else { format!("{p}/{q}") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(decimal(-0.25), "-0.25");
        assert_eq!(decimal(-23.0 / 96.0), "-0.239583333333");
        assert_eq!(decimal(-131.0 / 600.0), "-0.218333333333");
        assert_eq!(decimal(-0.21000000000000002), "-0.21");
        assert_eq!(decimal(0.0), "0");
        assert_eq!(decimal(12.5), "12.5");
        assert_eq!(decimal(f64::INFINITY), "inf");
    }

    #[test]
    fn rationals() {
        assert_eq!(rational(-0.1875), Some((-3, 16)));
        assert_eq!(rational(-23.0 / 96.0), Some((-23, 96)));
        assert_eq!(rational(-131.0 / 600.0), Some((-131, 600)));
        assert_eq!(rational(-0.21000000000000002), Some((-21, 100)));
        assert_eq!(rational(2.0), Some((2, 1)));
        assert_eq!(rational(std::f64::consts::PI), None);
        assert_eq!(rational_string(0.5).as_deref(), Some("1/2"));
        assert_eq!(rational_string(0.0).as_deref(), Some("0"));
    }
}
