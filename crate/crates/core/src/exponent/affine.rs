use std::fmt;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

/// Exact exponent `constant + h_coeff * H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Affine {
    pub constant: Rational64,
    pub h_coeff: Rational64,
}

impl Affine {
    pub fn new(constant: Rational64, h_coeff: Rational64) -> Self {
        Affine { constant, h_coeff }
    }

    /// `a/b + c H` with integer coefficients on `H`.
    pub fn frac(num: i64, den: i64, h_coeff: i64) -> Self {
        Affine::new(Rational64::new(num, den), Rational64::from_integer(h_coeff))
    }

    pub fn eval(&self, h: f64) -> f64 {
        let f = |r: Rational64| *r.numer() as f64 / *r.denom() as f64;
        f(self.constant) + f(self.h_coeff) * h
    }

    fn at(&self, h: Rational64) -> Rational64 {
        self.constant + self.h_coeff * h
    }

    /// `self <= other` for every `H` in `[1/2, 1]` (affine, so the endpoints
    /// decide).
    pub fn le_on_model_range(&self, other: &Affine) -> bool {
        [Rational64::new(1, 2), Rational64::from_integer(1)]
            .into_iter()
            .all(|h| self.at(h) <= other.at(h))
    }
}

impl std::ops::Add for Affine {
    type Output = Affine;
    fn add(self, o: Affine) -> Affine {
        Affine::new(self.constant + o.constant, self.h_coeff + o.h_coeff)
    }
}

impl std::iter::Sum for Affine {
    fn sum<I: Iterator<Item = Affine>>(iter: I) -> Affine {
        iter.fold(Affine::default(), |a, b| a + b)
    }
}

/// Renders as in `1/2 - 2H`, `-H`, `3/2 - 5H`, `0`.
impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero = Rational64::from_integer(0);
        let one = Rational64::from_integer(1);
        let c = self.constant;
        let b = self.h_coeff;
        if b == zero {
            return write!(f, "{c}");
        }
        let abs = if b < zero { -b } else { b };
        let mag = if abs == one { String::new() } else { format!("{abs}") };
        if c == zero {
            let sign = if b < zero { "-" } else { "" };
            write!(f, "{sign}{mag}H")
        } else {
            let sign = if b < zero { '-' } else { '+' };
            write!(f, "{c} {sign} {mag}H")
        }
    }
}

impl Serialize for Affine {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Affine", 3)?;
        st.serialize_field("constant", &self.constant.to_string())?;
        st.serialize_field("h_coeff", &self.h_coeff.to_string())?;
        st.serialize_field("text", &self.to_string())?;
        st.end()
    }
}
