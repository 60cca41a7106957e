//! Single-excitation time evolution.
//!
//! `f_{src,dst}(T) = Σ_{x<=y} W_src(x,y) W_dst(x,y) e^{-iTλ_{x,y}}`, summed over the grid in
//! the fixed `y`-outer, `x`-inner order. [`OraclePropagator`] computes the same quantity from a
//! Jacobi diagonalization of the assembled Hamiltonian, with no use of the polynomials.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::ops::{Add, Neg};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivariate::Eigenbasis;
use crate::error::{Error, Result};
use crate::jacobi::{jacobi_eigen, SymmetricEigen};
use crate::lattice::{assemble, Site, SiteIndex};
use crate::params::{parse_rational, rational_to_string, to_big, to_f64, ModelParams, Rational};
use crate::summation::CompensatedComplexSum;

/// Evolution time. Rational multiples of π stay symbolic so phases and the phase condition
/// can be evaluated exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Time {
    PiMultiple(Rational),
    Real(f64),
}

impl Time {
    pub fn pi(num: i64, den: i64) -> Self {
        Time::PiMultiple(Rational::new(num, den))
    }

    pub fn value(&self) -> f64 {
        match self {
            Time::PiMultiple(r) => to_f64(r) * PI,
            Time::Real(t) => *t,
        }
    }

    pub fn over_pi(&self) -> Option<Rational> {
        match self {
            Time::PiMultiple(r) => Some(*r),
            Time::Real(_) => None,
        }
    }

    pub fn scale(self, k: Rational) -> Self {
        match self {
            Time::PiMultiple(r) => Time::PiMultiple(r * k),
            Time::Real(t) => Time::Real(t * to_f64(&k)),
        }
    }
}

impl Neg for Time {
    type Output = Time;

    fn neg(self) -> Time {
        match self {
            Time::PiMultiple(r) => Time::PiMultiple(-r),
            Time::Real(t) => Time::Real(-t),
        }
    }
}

impl Add for Time {
    type Output = Time;

    fn add(self, other: Time) -> Time {
        match (self, other) {
            (Time::PiMultiple(a), Time::PiMultiple(b)) => Time::PiMultiple(a + b),
            _ => Time::Real(self.value() + other.value()),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::PiMultiple(r) if r.is_zero() => write!(f, "0"),
            Time::PiMultiple(r) if r.is_integer() => match *r.numer() {
                1 => write!(f, "pi"),
                -1 => write!(f, "-pi"),
                k => write!(f, "{k}pi"),
            },
            Time::PiMultiple(r) => write!(f, "{}pi", rational_to_string(r)),
            Time::Real(t) => write!(f, "{t:?}"),
        }
    }
}

/// Accepts `"3"`, `"3/2"`, `"pi"`, `"3pi"`, `"3/2*pi"` (multiples of π) and decimal or
/// exponent literals such as `"0.5"` or `"1e-3"` (plain reals).
impl FromStr for Time {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "time", input: s.to_string() };
        let t = s.trim().to_lowercase().replace('π', "pi");
        let t = t.as_str();
        if let Some(coef) = t.strip_suffix("pi") {
            let coef = coef.trim().trim_end_matches('*').trim();
            return match coef {
                "" | "+" => Ok(Time::pi(1, 1)),
                "-" => Ok(Time::pi(-1, 1)),
                c => parse_rational(c).map(Time::PiMultiple).map_err(|_| err()),
            };
        }
        if t.contains(['.', 'e']) {
            let v: f64 = t.parse().map_err(|_| err())?;
            return if v.is_finite() { Ok(Time::Real(v)) } else { Err(err()) };
        }
        parse_rational(t).map(Time::PiMultiple).map_err(|_| err())
    }
}

impl From<Time> for String {
    fn from(t: Time) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for Time {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `e^{-iθπ}` with `θ` reduced exactly to `[0, 2)`.
fn phase_pi_multiple(theta: &BigRational) -> Complex64 {
    let two = BigRational::from_integer(BigInt::from(2));
    let r = theta - (theta / &two).floor() * &two;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if r.is_zero() {
        Complex64::new(1.0, 0.0)
    } else if r == half {
        Complex64::new(0.0, -1.0)
    } else if r.is_one() {
        Complex64::new(-1.0, 0.0)
    } else if r == &half * BigRational::from_integer(BigInt::from(3)) {
        Complex64::new(0.0, 1.0)
    } else {
        let x = num_traits::ToPrimitive::to_f64(&r).expect("reduced phase is finite");
        let angle = if x > 1.0 { (x - 2.0) * PI } else { x * PI };
        Complex64::new(angle.cos(), -angle.sin())
    }
}

/// `e^{-iTλ}`. Exact reduction is used when `T` is a rational multiple of π.
pub fn phase(lambda_exact: &BigRational, lambda: f64, time: &Time) -> Complex64 {
    match time {
        Time::PiMultiple(r) => phase_pi_multiple(&(to_big(r) * lambda_exact)),
        Time::Real(t) => Complex64::from_polar(1.0, -t * lambda),
    }
}

/// One transition amplitude with its target site.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub site: Site,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

impl Amplitude {
    pub fn new(site: Site, z: Complex64) -> Self {
        Self { site, re: z.re, im: z.im, modulus: z.norm() }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

pub const CSV_HEADER: &str = "i,j,t,re,im,abs";

/// The amplitude row from one source at one time, targets in site order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeGrid {
    pub source: Site,
    pub time: Time,
    pub t: f64,
    pub values: Vec<Amplitude>,
}

impl AmplitudeGrid {
    pub fn new(source: Site, time: Time, index: SiteIndex, values: &[Complex64]) -> Self {
        let values = index.sites().zip(values).map(|(s, &z)| Amplitude::new(s, z)).collect();
        Self { source, time, t: time.value(), values }
    }

    pub fn get(&self, site: Site) -> Option<Complex64> {
        self.values.iter().find(|a| a.site == site).map(Amplitude::value)
    }

    pub fn total_probability(&self) -> f64 {
        self.values.iter().map(|a| a.re * a.re + a.im * a.im).sum()
    }

    /// CSV rows `i,j,t,re,im,abs`, 17 significant digits, no header.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        for a in &self.values {
            writeln!(w, "{},{},{:.16e},{:.16e},{:.16e},{:.16e}", a.site.i, a.site.j, self.t, a.re, a.im, a.modulus)?;
        }
        Ok(())
    }
}

/// Analytic propagator at one fixed time.
#[derive(Clone, Debug)]
pub struct SpectralPropagator<'a> {
    basis: &'a Eigenbasis,
    time: Time,
    phases: Vec<Complex64>,
}

impl<'a> SpectralPropagator<'a> {
    pub fn new(basis: &'a Eigenbasis, time: Time) -> Self {
        let phases = (0..basis.dimension())
            .map(|col| phase(basis.eigenvalue_exact(col), basis.eigenvalue(col), &time))
            .collect();
        Self { basis, time, phases }
    }

    pub fn time(&self) -> Time {
        self.time
    }

    pub fn basis(&self) -> &Eigenbasis {
        self.basis
    }

    /// Amplitude between rows `src` and `dst` of the site index.
    pub fn amplitude_at(&self, src: usize, dst: usize) -> Complex64 {
        let (ws, wd) = (self.basis.w_row(src), self.basis.w_row(dst));
        let mut acc = CompensatedComplexSum::new();
        for ((a, b), ph) in ws.iter().zip(wd).zip(&self.phases) {
            acc.add(ph * (a * b));
        }
        acc.value()
    }

    pub fn amplitude(&self, src: Site, dst: Site) -> Result<Complex64> {
        let index = self.basis.index();
        Ok(self.amplitude_at(index.checked_index(src)?, index.checked_index(dst)?))
    }

    pub fn row_values(&self, src: usize) -> Vec<Complex64> {
        (0..self.basis.dimension()).map(|dst| self.amplitude_at(src, dst)).collect()
    }

    pub fn row(&self, src: Site) -> Result<AmplitudeGrid> {
        let index = self.basis.index();
        let values = self.row_values(index.checked_index(src)?);
        Ok(AmplitudeGrid::new(src, self.time, index, &values))
    }

    /// Full row-major matrix of `exp(-iTH)` in the site basis.
    pub fn matrix(&self) -> Vec<Complex64> {
        (0..self.basis.dimension()).flat_map(|src| self.row_values(src)).collect()
    }
}

/// Reference propagator built from a numerical diagonalization of `H`.
#[derive(Clone, Debug)]
pub struct OraclePropagator {
    index: SiteIndex,
    eigen: SymmetricEigen,
}

impl OraclePropagator {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let h = assemble(p)?;
        let eigen = jacobi_eigen(h.entries(), h.dimension())?;
        Ok(Self { index: h.index, eigen })
    }

    pub fn eigen(&self) -> &SymmetricEigen {
        &self.eigen
    }

    pub fn row_values(&self, src: usize, time: &Time) -> Vec<Complex64> {
        let n = self.eigen.dim;
        let t = time.value();
        let phases: Vec<Complex64> = self.eigen.values.iter().map(|&mu| Complex64::from_polar(1.0, -t * mu)).collect();
        let vs = &self.eigen.vectors[src * n..(src + 1) * n];
        (0..n)
            .map(|dst| {
                let vd = &self.eigen.vectors[dst * n..(dst + 1) * n];
                let mut acc = CompensatedComplexSum::new();
                for ((a, b), ph) in vs.iter().zip(vd).zip(&phases) {
                    acc.add(ph * (a * b));
                }
                acc.value()
            })
            .collect()
    }

    pub fn row(&self, src: Site, time: &Time) -> Result<AmplitudeGrid> {
        let values = self.row_values(self.index.checked_index(src)?, time);
        Ok(AmplitudeGrid::new(src, *time, self.index, &values))
    }
}

pub fn propagate_spectral(src: Site, dst: Site, time: &Time, p: &ModelParams) -> Result<Complex64> {
    let basis = Eigenbasis::new(p)?;
    SpectralPropagator::new(&basis, *time).amplitude(src, dst)
}

pub fn propagate_oracle(src: Site, time: &Time, p: &ModelParams) -> Result<AmplitudeGrid> {
    OraclePropagator::new(p)?.row(src, time)
}

/// `table[t][d]` is the amplitude from `src` to `dsts[d]` at `times[t]`.
pub fn amplitude_timeseries(src: Site, dsts: &[Site], times: &[Time], p: &ModelParams) -> Result<Vec<Vec<Complex64>>> {
    let basis = Eigenbasis::new(p)?;
    let index = basis.index();
    let s = index.checked_index(src)?;
    let ds = dsts.iter().map(|&d| index.checked_index(d)).collect::<Result<Vec<_>>>()?;
    Ok(times
        .par_iter()
        .map(|t| {
            let prop = SpectralPropagator::new(&basis, *t);
            ds.iter().map(|&d| prop.amplitude_at(s, d)).collect()
        })
        .collect())
}

/// Amplitude rows from `src` at each time, in input order.
pub fn amplitude_rows(basis: &Eigenbasis, src: Site, times: &[Time]) -> Result<Vec<AmplitudeGrid>> {
    times.par_iter().map(|t| SpectralPropagator::new(basis, *t).row(src)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Eigenbasis {
        Eigenbasis::new(&ModelParams::figure1()).unwrap()
    }

    fn small() -> ModelParams {
        ModelParams::figure1().with_n(4)
    }

    #[test]
    fn parses_times() {
        assert_eq!("3".parse::<Time>().unwrap(), Time::pi(3, 1));
        assert_eq!("3/1".parse::<Time>().unwrap(), Time::pi(3, 1));
        assert_eq!("pi".parse::<Time>().unwrap(), Time::pi(1, 1));
        assert_eq!("-pi".parse::<Time>().unwrap(), Time::pi(-1, 1));
        assert_eq!("3/2 pi".parse::<Time>().unwrap(), Time::pi(3, 2));
        assert_eq!("2*pi".parse::<Time>().unwrap(), Time::pi(2, 1));
        assert_eq!("3π".parse::<Time>().unwrap(), Time::pi(3, 1));
        assert_eq!("0.5".parse::<Time>().unwrap(), Time::Real(0.5));
        assert_eq!("1e-3".parse::<Time>().unwrap(), Time::Real(1e-3));
        assert!("x".parse::<Time>().is_err());
        assert!("inf.".parse::<Time>().is_err());
        for t in [Time::pi(0, 1), Time::pi(1, 1), Time::pi(-1, 1), Time::pi(7, 3), Time::Real(1.0), Time::Real(2.5e-9)]
        {
            assert_eq!(t.to_string().parse::<Time>().unwrap(), t, "{t}");
        }
    }

    #[test]
    fn exact_phases() {
        let lam = BigRational::new(BigInt::from(7), BigInt::from(2));
        assert_eq!(phase(&lam, 3.5, &Time::pi(1, 1)), Complex64::new(0.0, 1.0));
        assert_eq!(phase(&lam, 3.5, &Time::pi(2, 1)), Complex64::new(-1.0, 0.0));
        assert_eq!(phase(&lam, 3.5, &Time::pi(4, 1)), Complex64::new(1.0, 0.0));
        assert_eq!(phase(&lam, 3.5, &Time::pi(-1, 1)), Complex64::new(0.0, -1.0));
        let z = phase(&lam, 3.5, &Time::pi(1, 3));
        let w = Complex64::from_polar(1.0, -3.5 * PI / 3.0);
        assert!((z - w).norm() < 1e-15);
    }

    #[test]
    fn identity_at_zero() {
        let b = fig1();
        let prop = SpectralPropagator::new(&b, Time::pi(0, 1));
        for (k, z) in prop.matrix().iter().enumerate() {
            let want = if k / b.dimension() == k % b.dimension() { 1.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_and_symmetric() {
        let b = fig1();
        for t in [Time::pi(1, 2), Time::pi(3, 1), Time::Real(0.37), Time::Real(-11.0)] {
            let prop = SpectralPropagator::new(&b, t);
            let u = prop.matrix();
            let n = b.dimension();
            for s in 0..n {
                let total: f64 = (0..n).map(|d| u[s * n + d].norm_sqr()).sum();
                assert!((total - 1.0).abs() < 1e-10);
                for d in 0..n {
                    assert!((u[s * n + d] - u[d * n + s]).norm() < 1e-12);
                    assert!(u[s * n + d].norm() <= 1.0 + 1e-8);
                }
            }
        }
    }

    #[test]
    fn time_reversal_conjugates() {
        let b = fig1();
        for t in [Time::pi(1, 3), Time::Real(2.2)] {
            let u = SpectralPropagator::new(&b, t).matrix();
            let v = SpectralPropagator::new(&b, -t).matrix();
            for (x, y) in u.iter().zip(&v) {
                assert!((x.conj() - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn composition() {
        let b = Eigenbasis::new(&small()).unwrap();
        let n = b.dimension();
        for (t1, t2) in
            [(Time::pi(1, 3), Time::pi(1, 2)), (Time::Real(0.4), Time::Real(1.7)), (Time::pi(1, 1), Time::Real(0.1))]
        {
            let u1 = SpectralPropagator::new(&b, t1).matrix();
            let u2 = SpectralPropagator::new(&b, t2).matrix();
            let u12 = SpectralPropagator::new(&b, t1 + t2).matrix();
            for s in 0..n {
                for d in 0..n {
                    let prod: Complex64 = (0..n).map(|k| u1[s * n + k] * u2[k * n + d]).sum();
                    assert!((prod - u12[s * n + d]).norm() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn oracle_agrees_small() {
        let p = small();
        let b = Eigenbasis::new(&p).unwrap();
        let oracle = OraclePropagator::new(&p).unwrap();
        for t in [Time::pi(0, 1), Time::pi(1, 2), Time::Real(0.9)] {
            let prop = SpectralPropagator::new(&b, t);
            for s in 0..b.dimension() {
                let o = oracle.row_values(s, &t);
                let f = prop.row_values(s);
                for (x, y) in o.iter().zip(&f) {
                    assert!((x - y).norm() < 1e-9);
                }
                let total: f64 = o.iter().map(Complex64::norm_sqr).sum();
                assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn endpoint_transfer_fig1() {
        let f = propagate_spectral(Site::new(0, 0), Site::new(0, 6), &Time::pi(3, 1), &ModelParams::figure1()).unwrap();
        assert!((f.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn timeseries_matches_single() {
        let p = ModelParams::figure2();
        let times: Vec<Time> = (0..5).map(|k| Time::pi(k, 2)).collect();
        let dsts = [Site::new(0, 6), Site::new(0, 0), Site::new(2, 1)];
        let table = amplitude_timeseries(Site::new(0, 0), &dsts, &times, &p).unwrap();
        assert_eq!(table.len(), 5);
        for (t, row) in times.iter().zip(&table) {
            for (d, z) in dsts.iter().zip(row) {
                assert_eq!(*z, propagate_spectral(Site::new(0, 0), *d, t, &p).unwrap());
            }
        }
        assert!((table[4][0].norm() - 1.0).abs() < 1e-8);
        assert!((table[0][1] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn csv_and_json_rows() {
        let b = Eigenbasis::new(&small()).unwrap();
        let g = SpectralPropagator::new(&b, Time::pi(1, 1)).row(Site::new(0, 0)).unwrap();
        let mut out = Vec::new();
        g.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 15);
        assert!(text.starts_with("0,0,3.1415926535897931e0,"));
        let json = serde_json::to_string(&g).unwrap();
        let back: AmplitudeGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn rejects_bad_sites() {
        let b = Eigenbasis::new(&small()).unwrap();
        let prop = SpectralPropagator::new(&b, Time::pi(1, 1));
        assert!(prop.amplitude(Site::new(3, 2), Site::new(0, 0)).is_err());
    }
}
