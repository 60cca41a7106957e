//! Lattice parameters `a, b, c, N` and the positivity condition on them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Parses `"53/3"`, `"-2"` or `" 7 / 4 "` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let err = || Error::Parse { what: "rational", input: s.to_string() };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: i64 = num.parse().map_err(|_| err())?;
    let den: i64 = den.parse().map_err(|_| err())?;
    if den == 0 {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` for integers.
pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// One failed inequality of the positivity condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `c > 0` fails.
    CNotPositive { c: Rational },
    /// `a - b > N` fails.
    AMinusBTooSmall { a_minus_b: Rational, n: u32 },
    /// `b - c > N` fails.
    BMinusCTooSmall { b_minus_c: Rational, n: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CNotPositive { c } => write!(f, "c > 0 fails (c = {})", rational_to_string(c)),
            Violation::AMinusBTooSmall { a_minus_b, n } => {
                write!(f, "a - b > N fails (a - b = {}, N = {n})", rational_to_string(a_minus_b))
            }
            Violation::BMinusCTooSmall { b_minus_c, n } => {
                write!(f, "b - c > N fails (b - c = {}, N = {n})", rational_to_string(b_minus_c))
            }
        }
    }
}

/// Model parameters. Construction does not enforce the positivity condition; call
/// [`ModelParams::violations`] or [`ModelParams::validated`] for that.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub n: u32,
}

impl ModelParams {
    pub fn new(a: Rational, b: Rational, c: Rational, n: u32) -> Self {
        Self { a, b, c, n }
    }

    pub fn parse(a: &str, b: &str, c: &str, n: u32) -> Result<Self> {
        Ok(Self::new(parse_rational(a)?, parse_rational(b)?, parse_rational(c)?, n))
    }

    /// `a = 53/3, b = 34/3, c = 1/6, N = 6`.
    pub fn figure1() -> Self {
        Self::new(Rational::new(53, 3), Rational::new(34, 3), Rational::new(1, 6), 6)
    }

    /// `a = 19, b = 23/2, c = 1/4, N = 6`.
    pub fn figure2() -> Self {
        Self::new(Rational::from_integer(19), Rational::new(23, 2), Rational::new(1, 4), 6)
    }

    pub fn with_n(self, n: u32) -> Self {
        Self { n, ..self }
    }

    pub fn with_c(self, c: Rational) -> Self {
        Self { c, ..self }
    }

    /// All violated inequalities among `c > 0`, `a - b > N`, `b - c > N`, checked exactly.
    pub fn violations(&self) -> Vec<Violation> {
        let n = Rational::from_integer(i64::from(self.n));
        let mut out = Vec::new();
        if self.c <= Rational::from_integer(0) {
            out.push(Violation::CNotPositive { c: self.c });
        }
        if self.a - self.b <= n {
            out.push(Violation::AMinusBTooSmall { a_minus_b: self.a - self.b, n: self.n });
        }
        if self.b - self.c <= n {
            out.push(Violation::BMinusCTooSmall { b_minus_c: self.b - self.c, n: self.n });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Parameters(v))
        }
    }

    /// Floating-point copies of the parameters for the numerical kernels.
    pub fn real(&self) -> RealParams {
        RealParams { a: to_f64(&self.a), b: to_f64(&self.b), c: to_f64(&self.c), n: f64::from(self.n) }
    }

    /// Number of lattice sites, `(N+1)(N+2)/2`.
    pub fn dimension(&self) -> usize {
        let n = self.n as usize;
        (n + 1) * (n + 2) / 2
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} b={} c={} N={}",
            rational_to_string(&self.a),
            rational_to_string(&self.b),
            rational_to_string(&self.c),
            self.n
        )
    }
}

impl Serialize for ModelParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ModelParams", 4)?;
        st.serialize_field("a", &rational_to_string(&self.a))?;
        st.serialize_field("b", &rational_to_string(&self.b))?;
        st.serialize_field("c", &rational_to_string(&self.c))?;
        st.serialize_field("n", &self.n)?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: f64,
}

impl FromStr for ModelParams {
    type Err = Error;

    /// `"a,b,c,N"`, e.g. `"53/3,34/3,1/6,6"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let err = || Error::Parse { what: "model parameters a,b,c,N", input: s.to_string() };
        if parts.len() != 4 {
            return Err(err());
        }
        let n = parts[3].parse().map_err(|_| err())?;
        Self::parse(parts[0], parts[1], parts[2], n)
    }
}
