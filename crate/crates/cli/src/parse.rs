//! Text forms of the numeric parameters: complex numbers as `a+bi` and exact
//! rationals as `P/Q`.

use lame_spectra::bloch::RationalEta;
use lame_spectra::C64;

/// Parses `a`, `bi`, `a+bi` or `a-bi` (whitespace ignored, `i` alone means 1i).
pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let bad = || format!("cannot parse '{text}' as a complex number a+bi");
    let real = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(real(&s)?, 0.0));
    };
    // the sign that separates the parts is the last one not belonging to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => real(t)?,
    };
    let re = if re_part.is_empty() { 0.0 } else { real(re_part)? };
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

/// Canonical text form; `parse_complex(&format_complex(z)) == z` exactly.
pub fn format_complex(z: C64) -> String {
    match (z.re == 0.0, z.im == 0.0) {
        (_, true) => format!("{}", z.re + 0.0),
        (true, false) => format!("{}i", z.im),
        (false, false) => {
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            format!("{}{}{}i", z.re, sign, z.im.abs())
        }
    }
}

/// Lattice spacing as given on the command line. A rational is kept exact because the
/// Bloch reduction needs the period Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta {
    Rational(RationalEta),
    Complex(C64),
}

impl Eta {
    pub fn value(&self) -> C64 {
        match self {
            Eta::Rational(r) => r.as_complex(),
            Eta::Complex(z) => *z,
        }
    }

    pub fn rational(&self) -> Option<RationalEta> {
        match self {
            Eta::Rational(r) => Some(*r),
            Eta::Complex(_) => None,
        }
    }
}

pub fn parse_eta(text: &str) -> Result<Eta, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some((p, q)) = s.split_once('/') {
        let p = p.parse::<i64>().map_err(|_| format!("bad numerator in '{text}'"))?;
        let q = q.parse::<i64>().map_err(|_| format!("bad denominator in '{text}'"))?;
        return RationalEta::new(p, q).map(Eta::Rational).map_err(|e| e.to_string());
    }
    let z = parse_complex(&s)?;
    if z == C64::new(0.0, 0.0) {
        return Err("eta must be nonzero".into());
    }
    Ok(Eta::Complex(z))
}

pub fn format_eta(eta: &Eta) -> String {
    match eta {
        Eta::Rational(r) => format!("{}/{}", r.p, r.q),
        Eta::Complex(z) => format_complex(*z),
    }
}

/// Modular parameter; `Im τ > 0` is enforced here.
pub fn parse_tau(text: &str) -> Result<C64, String> {
    let tau = parse_complex(text)?;
    if tau.im <= 0.0 {
        return Err(format!("tau must have positive imaginary part, got '{text}'"));
    }
    Ok(tau)
}

/// Comma-separated list of complex numbers.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>, String> {
    text.split(',').filter(|t| !t.trim().is_empty()).map(parse_complex).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let cases = [
            ("0.17", C64::new(0.17, 0.0)),
            ("1.2i", C64::new(0.0, 1.2)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("0.3+1.4i", C64::new(0.3, 1.4)),
            ("0.23 - 0.05i", C64::new(0.23, -0.05)),
            ("-1e-3+2.5e+1i", C64::new(-1e-3, 25.0)),
            ("1e-3i", C64::new(0.0, 1e-3)),
        ];
        for (text, want) in cases {
            assert_eq!(parse_complex(text).unwrap(), want, "{text}");
        }
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        for z in [C64::new(0.17, 0.0), C64::new(0.0, 1.2), C64::new(0.3, -1.4), C64::new(-2.5e-7, 1e-20)] {
            let s = format_complex(z);
            assert_eq!(parse_complex(&s).unwrap(), z, "{s}");
            assert_eq!(format_complex(parse_complex(&s).unwrap()), s);
        }
    }

    #[test]
    fn eta_and_tau_validation() {
        assert_eq!(parse_eta("2/41").unwrap().rational().unwrap(), RationalEta::new(2, 41).unwrap());
        assert!(parse_eta("2/4").is_err());
        assert!(parse_eta("1/0").is_err());
        assert!(parse_eta("0").is_err());
        assert_eq!(format_eta(&parse_eta(" 1 / 31 ").unwrap()), "1/31");
        assert!(parse_tau("1.2i").is_ok());
        assert!(parse_tau("0.5-0.1i").is_err());
        assert!(parse_tau("0.5").is_err());
    }
}
