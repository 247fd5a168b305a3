use std::str::FromStr;

use num::BigRational;

use crate::error::{Error, Result};

/// Arbitrary-precision rational scalar. Always held in canonical form:
/// positive denominator, gcd-reduced. All arithmetic is exact.
pub type Scalar = BigRational;

/// `p/q` with small integer parts, mostly for tests and constructors.
pub fn rat(p: i64, q: i64) -> Scalar {
    Scalar::new(p.into(), q.into())
}

pub fn int(p: i64) -> Scalar {
    Scalar::from_integer(p.into())
}

/// Parses the wire format: `"p/q"` or `"p"` (decimal integers, optional sign).
/// A zero denominator is rejected.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    Scalar::from_str(text.trim())
        .map_err(|e| Error::parse(format!("rational '{text}'"), e.to_string()))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn scalar_to_string(s: &Scalar) -> String {
    s.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_canonicalizes() {
        assert_eq!(parse_scalar("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_scalar("-2/4").unwrap(), rat(-1, 2));
        assert_eq!(parse_scalar("1/-2").unwrap(), rat(-1, 2));
        assert_eq!(parse_scalar("7").unwrap(), int(7));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("x/y").is_err());
    }

    #[test]
    fn display_round_trips() {
        assert_eq!(scalar_to_string(&rat(1, 2)), "1/2");
        assert_eq!(scalar_to_string(&rat(4, 2)), "2");
        assert_eq!(scalar_to_string(&int(-3)), "-3");
        for s in ["-17/13", "0", "5"] {
            assert_eq!(scalar_to_string(&parse_scalar(s).unwrap()), s);
        }
    }

    #[test]
    fn field_ops_stay_reduced() {
        let a = rat(1, 6) + rat(1, 3);
        assert_eq!(a, rat(1, 2));
        let b = rat(2, 3) * rat(9, 4);
        assert_eq!(b, rat(3, 2));
        let c = rat(1, 2) / rat(1, 4) - int(2);
        assert!(num::Zero::is_zero(&c));
    }
}
