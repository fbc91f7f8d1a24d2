use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undominance threshold, kept as an exact rational so that
/// `⌊α·n⌋` never depends on floating-point rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Alpha(Ratio<i64>);

impl Alpha {
    /// `num/den`, required to lie in `(0, 1]`.
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::input("alpha denominator is zero"));
        }
        Self::from_ratio(Ratio::new(num, den))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Result<Self> {
        if r <= Ratio::from_integer(0) || r > Ratio::from_integer(1) {
            return Err(Error::input(format!("alpha must lie in (0, 1], got {r}")));
        }
        Ok(Alpha(r))
    }

    /// Closest rational to `x` (continued-fraction approximation), clamped to 1.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::input(format!("alpha must be positive, got {x}")));
        }
        if x >= 1.0 {
            return Ok(Alpha::one());
        }
        let r = Ratio::<i64>::approximate_float(x)
            .ok_or_else(|| Error::input(format!("cannot represent {x} as a rational")))?;
        Self::from_ratio(r)
    }

    /// Smallest multiple of `1e-12` that is `≥ x`, clamped to 1.
    pub fn at_least(x: f64) -> Result<Self> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::input(format!("alpha must be positive, got {x}")));
        }
        if x >= 1.0 {
            return Ok(Alpha::one());
        }
        const DEN: i64 = 1_000_000_000_000;
        let num = (x * DEN as f64).ceil() as i64;
        Self::from_ratio(Ratio::new(num.clamp(1, DEN), DEN))
    }

    pub fn one() -> Self {
        Alpha(Ratio::from_integer(1))
    }

    pub fn ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn value(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// `⌊α·n⌋`, exact.
    pub fn floor_times(&self, n: usize) -> u64 {
        let prod = self.numer() as i128 * n as i128;
        (prod / self.denom() as i128) as u64
    }

    /// `α / (1 − ε)` for a rational `ε`, clamped to 1.
    pub fn inflate(&self, epsilon: Ratio<i64>) -> Alpha {
        let one = Ratio::from_integer(1);
        if epsilon <= Ratio::from_integer(0) {
            return *self;
        }
        let denom = one - epsilon;
        if denom <= Ratio::from_integer(0) {
            return Alpha::one();
        }
        let r = self.0 / denom;
        if r >= one {
            Alpha::one()
        } else {
            Alpha(r)
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl From<Alpha> for String {
    fn from(a: Alpha) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Alpha {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q`, integers, and decimals such as `0.39` (parsed exactly).
    fn from_str(s: &str) -> Result<Self> {
        Alpha::from_ratio(parse_rational(s)?)
    }
}

/// Exact parse of `p/q`, `k`, or a plain decimal literal.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let bad = || Error::input(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    if frac_part.len() > 15 {
        return Err(Error::input(format!("too many decimal digits in {s:?}")));
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad())? };
    let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad())? };
    let num = int_val
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac_val))
        .ok_or_else(bad)?;
    Ok(Ratio::new(if neg { -num } else { num }, den))
}

/// Exact rational value of a float's shortest decimal rendering
/// (`1e-3` becomes `1/1000`).
pub fn rational_of_f64(x: f64) -> Result<Ratio<i64>> {
    let text = format!("{x}");
    if text.contains('e') {
        return Ratio::<i64>::approximate_float(x)
            .ok_or_else(|| Error::input(format!("cannot represent {x} as a rational")));
    }
    parse_rational(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let a: Alpha = "0.39".parse().unwrap();
        assert_eq!((a.numer(), a.denom()), (39, 100));
        let b: Alpha = "1/2".parse().unwrap();
        assert_eq!(b, Alpha::new(1, 2).unwrap());
        assert_eq!("1".parse::<Alpha>().unwrap(), Alpha::one());
        assert!("0".parse::<Alpha>().is_err());
        assert!("1.5".parse::<Alpha>().is_err());
        assert!("abc".parse::<Alpha>().is_err());
    }

    #[test]
    fn floor_is_exact_at_boundaries() {
        let a = Alpha::new(1, 2).unwrap();
        assert_eq!(a.floor_times(3), 1);
        assert_eq!(a.floor_times(4), 2);
        let third = Alpha::new(1, 3).unwrap();
        assert_eq!(third.floor_times(3), 1);
        assert_eq!(third.floor_times(2), 0);
    }

    #[test]
    fn inflation_by_epsilon() {
        let a = Alpha::new(1, 2).unwrap();
        let eps = rational_of_f64(1e-3).unwrap();
        assert_eq!(eps, Ratio::new(1, 1000));
        assert_eq!(a.inflate(eps).ratio(), Ratio::new(500, 999));
        assert_eq!(Alpha::one().inflate(eps), Alpha::one());
    }

    #[test]
    fn serde_round_trip_as_string() {
        let a = Alpha::new(39, 100).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "\"39/100\"");
        assert_eq!(serde_json::from_str::<Alpha>(&s).unwrap(), a);
    }
}
