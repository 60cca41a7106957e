//! Perfect state transfer and fractional revival.
//!
//! Two rational families carry PST from every site `(i,j)` to its mirror `(i, N-i-j)`:
//!
//! ```text
//! odd period:  a = (2p+1)/(2k+1), b = 2q/(2k+1),  T = (2k+1)π
//! even period: a = p/k,           b = (2q+1)/(2k), T = 2kπ
//! ```
//!
//! both with `c = b/2 - N + 1/2`. Membership and the phase condition are decided in exact
//! rational arithmetic; amplitudes come from the spectral propagator.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bivariate::Eigenbasis;
use crate::dynamics::{SpectralPropagator, Time};
use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::params::{rational_to_string, to_big, ModelParams, Rational, Violation};

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PstFamily {
    OddPeriod,
    EvenPeriod,
}

impl PstFamily {
    pub const ALL: [PstFamily; 2] = [PstFamily::OddPeriod, PstFamily::EvenPeriod];
}

impl fmt::Display for PstFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PstFamily::OddPeriod => "odd-period",
            PstFamily::EvenPeriod => "even-period",
        })
    }
}

impl std::str::FromStr for PstFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "odd" | "odd-period" => Ok(PstFamily::OddPeriod),
            "even" | "even-period" => Ok(PstFamily::EvenPeriod),
            _ => Err(Error::Parse { what: "family (odd|even)", input: s.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PstFamilySpec {
    pub family: PstFamily,
    pub k: u32,
    pub p: u32,
    pub q: u32,
}

impl PstFamilySpec {
    pub fn new(family: PstFamily, k: u32, p: u32, q: u32) -> Self {
        Self { family, k, p, q }
    }

    /// The transfer time divided by π.
    pub fn period_over_pi(&self) -> Rational {
        let k = i64::from(self.k);
        match self.family {
            PstFamily::OddPeriod => Rational::from_integer(2 * k + 1),
            PstFamily::EvenPeriod => Rational::from_integer(2 * k),
        }
    }

    pub fn period(&self) -> Time {
        Time::PiMultiple(self.period_over_pi())
    }

    /// For the even family with odd `p`: the half period, where the excitation spreads over
    /// the column `i = 0`.
    pub fn revival_time(&self) -> Option<Time> {
        (self.family == PstFamily::EvenPeriod && self.p % 2 == 1).then(|| Time::pi(i64::from(self.k), 1))
    }
}

impl fmt::Display for PstFamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} k={} p={} q={}", self.family, self.k, self.p, self.q)
    }
}

/// Parameters generated by a family spec, with any failed positivity inequalities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyParams {
    pub spec: PstFamilySpec,
    pub params: ModelParams,
    #[serde(serialize_with = "ser_rational")]
    pub period_over_pi: Rational,
    #[serde(serialize_with = "ser_violations")]
    pub violations: Vec<Violation>,
}

impl FamilyParams {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_to_string(r))
}

fn ser_violations<S: Serializer>(v: &[Violation], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

/// Builds `a, b, c` for `spec` at size `n`. `k = 0` is an error; failing positivity is
/// reported in [`FamilyParams::violations`].
pub fn family_params(spec: PstFamilySpec, n: u32) -> Result<FamilyParams> {
    if spec.k == 0 {
        return Err(Error::NotPositive { what: "family index k", value: 0.0 });
    }
    let (k, p, q) = (i64::from(spec.k), i64::from(spec.p), i64::from(spec.q));
    let (a, b) = match spec.family {
        PstFamily::OddPeriod => (Rational::new(2 * p + 1, 2 * k + 1), Rational::new(2 * q, 2 * k + 1)),
        PstFamily::EvenPeriod => (Rational::new(p, k), Rational::new(2 * q + 1, 2 * k)),
    };
    let nn = Rational::from_integer(i64::from(n));
    let half = Rational::new(1, 2);
    let c = b * half - nn + half;
    assert_eq!(b, c * 2 + nn * 2 - 1);
    let params = ModelParams::new(a, b, c, n);
    Ok(FamilyParams { spec, params, period_over_pi: spec.period_over_pi(), violations: params.violations() })
}

/// Finds the family spec with smallest `k` that reproduces `p` exactly, if any.
pub fn family_membership(p: &ModelParams) -> Option<PstFamilySpec> {
    let half = Rational::new(1, 2);
    let nn = Rational::from_integer(i64::from(p.n));
    if p.c != p.b * half - nn + half {
        return None;
    }
    let bound = p.a.denom().lcm(p.b.denom()).checked_mul(3)?;
    for family in PstFamily::ALL {
        for k in 1..=bound {
            let (sa, sb) = match family {
                PstFamily::OddPeriod => (p.a * (2 * k + 1), p.b * (2 * k + 1)),
                PstFamily::EvenPeriod => (p.a * k, p.b * (2 * k)),
            };
            if !sa.is_integer() || !sb.is_integer() {
                continue;
            }
            let (ia, ib) = (sa.to_integer(), sb.to_integer());
            let (pp, qq) = match family {
                PstFamily::OddPeriod if ia.is_odd() && ib.is_even() => ((ia - 1) / 2, ib / 2),
                PstFamily::EvenPeriod if ib.is_odd() => (ia, (ib - 1) / 2),
                _ => continue,
            };
            if let (Ok(pp), Ok(qq), Ok(kk)) = (u32::try_from(pp), u32::try_from(qq), u32::try_from(k)) {
                return Some(PstFamilySpec::new(family, kk, pp, qq));
            }
        }
    }
    None
}

fn is_even_integer(r: &BigRational) -> bool {
    r.is_integer() && r.to_integer().is_even()
}

fn near_even_integer(v: f64) -> bool {
    let frac = v / 2.0 - (v / 2.0).round();
    (2.0 * PI * frac).abs() <= 1e-9
}

/// `T x(x+a) ∈ 2πZ` and `T y(y+b) ∈ π(2Z + y)` for all `0 <= x <= y <= N`. Exact for rational
/// multiples of π, otherwise to `1e-9` in the phase.
pub fn check_phase_condition(p: &ModelParams, time: &Time) -> bool {
    match time {
        Time::PiMultiple(r) => {
            let r = to_big(r);
            let (a, b) = (to_big(&p.a), to_big(&p.b));
            (0..=p.n).all(|v| {
                let v = BigRational::from_integer(BigInt::from(v));
                let tx = &r * &v * (&v + &a);
                let ty = &r * &v * (&v + &b) - &v;
                is_even_integer(&tx) && is_even_integer(&ty)
            })
        }
        Time::Real(t) => {
            let rp = p.real();
            (0..=p.n).all(|v| {
                let v = f64::from(v);
                near_even_integer(t * v * (v + rp.a) / PI) && near_even_integer(t * v * (v + rp.b) / PI - v)
            })
        }
    }
}

fn pochhammer_exact(a: &BigRational, n: u32) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, k| acc * (a + BigRational::from_integer(BigInt::from(k))))
}

/// `|f_{(0,0),(0,N)}|` under the phase condition, with its exact square.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointAmplitude {
    pub squared: BigRational,
    pub value: f64,
}

impl EndpointAmplitude {
    pub fn is_exactly_one(&self) -> bool {
        self.squared.is_one()
    }
}

/// `sqrt((c+N)_N (b+1-c-N)_N) / ((b+1)/2)_N`, from exact Pochhammers and one square root.
pub fn endpoint_amplitude_closed_form(p: &ModelParams) -> Result<EndpointAmplitude> {
    let (b, c) = (to_big(&p.b), to_big(&p.c));
    let one = BigRational::one();
    let nn = BigRational::from_integer(BigInt::from(p.n));
    let num = pochhammer_exact(&(&c + &nn), p.n) * pochhammer_exact(&(&b + &one - &c - &nn), p.n);
    let mid = (&b + &one) / BigRational::from_integer(BigInt::from(2));
    let den = pochhammer_exact(&mid, p.n);
    if den.is_zero() {
        return Err(Error::DenominatorPole { param: mid.to_f64().unwrap_or(f64::NAN), order: p.n });
    }
    let squared = num / (&den * &den);
    if squared.is_negative() {
        return Err(Error::NegativeRadicand {
            what: "closed-form endpoint amplitude",
            value: squared.to_f64().unwrap_or(f64::NAN),
        });
    }
    let value = if squared.is_one() { 1.0 } else { squared.to_f64().expect("finite").sqrt() };
    Ok(EndpointAmplitude { squared, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransferKind {
    #[serde(rename = "PST")]
    Pst,
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransferKind::Pst => "PST",
            TransferKind::Fr => "FR",
            TransferKind::None => "none",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MirrorPair {
    pub site: Site,
    pub mirror: Site,
    pub modulus: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Target {
    pub site: Site,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferReport {
    pub kind: TransferKind,
    pub source: Site,
    pub time: Time,
    pub time_over_pi: Option<String>,
    pub phase_condition_satisfied: bool,
    pub tol: f64,
    /// Sites reached from `source` with modulus at least `tol`.
    pub targets: Vec<Target>,
    pub pairs: Vec<MirrorPair>,
    /// Probability on the column of `source`.
    pub column_probability: f64,
}

impl TransferReport {
    pub fn min_mirror_modulus(&self) -> Option<f64> {
        self.pairs.iter().map(|m| m.modulus).reduce(f64::min)
    }
}

fn report_base(prop: &SpectralPropagator<'_>, source: Site, tol: f64) -> Result<(TransferReport, Vec<Complex64>)> {
    let basis = prop.basis();
    let index = basis.index();
    let row = prop.row_values(index.checked_index(source)?);
    let targets = index
        .sites()
        .zip(&row)
        .filter(|(_, z)| z.norm() >= tol)
        .map(|(site, z)| Target { site, modulus: z.norm() })
        .collect();
    let column_probability = index.sites().zip(&row).filter(|(s, _)| s.i == source.i).map(|(_, z)| z.norm_sqr()).sum();
    let time = prop.time();
    let report = TransferReport {
        kind: TransferKind::None,
        source,
        time,
        time_over_pi: time.over_pi().map(|r| rational_to_string(&r)),
        phase_condition_satisfied: check_phase_condition(basis.params(), &time),
        tol,
        targets,
        pairs: Vec::new(),
        column_probability,
    };
    Ok((report, row))
}

/// Moduli from every site to its mirror; PST when all reach `1 - tol`.
pub fn certify_pst(basis: &Eigenbasis, time: Time, tol: f64) -> TransferReport {
    let prop = SpectralPropagator::new(basis, time);
    let n = basis.params().n;
    let index = basis.index();
    let (mut report, _) = report_base(&prop, Site::new(0, 0), tol).expect("origin is a lattice site");
    report.pairs = index
        .sites()
        .map(|s| {
            let m = s.mirror(n);
            let z = prop.amplitude_at(index.index(s).unwrap(), index.index(m).unwrap());
            MirrorPair { site: s, mirror: m, modulus: z.norm() }
        })
        .collect();
    if report.pairs.iter().all(|m| m.modulus >= 1.0 - tol) {
        report.kind = TransferKind::Pst;
    }
    report
}

/// FR from `(0,0)`: column `i = 0` holds at least `1 - tol` of the probability and at
/// least two of its sites carry modulus `tol` or more.
pub fn detect_fractional_revival(basis: &Eigenbasis, time: Time, tol: f64) -> TransferReport {
    let prop = SpectralPropagator::new(basis, time);
    let (mut report, _) = report_base(&prop, Site::new(0, 0), tol).expect("origin is a lattice site");
    let spread = report.targets.iter().filter(|t| t.site.i == 0).count();
    if report.column_probability >= 1.0 - tol && spread >= 2 {
        report.kind = TransferKind::Fr;
    }
    report
}

/// Largest `|f_{(i,j),(k,l)}|` with `i != k`.
pub fn max_cross_column(prop: &SpectralPropagator<'_>) -> f64 {
    let index = prop.basis().index();
    let sites: Vec<Site> = index.sites().collect();
    let mut worst = 0.0f64;
    for (r, s) in sites.iter().enumerate() {
        for (c, d) in sites.iter().enumerate() {
            if s.i != d.i {
                worst = worst.max(prop.amplitude_at(r, c).norm());
            }
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanBounds {
    pub n: u32,
    pub k_max: u32,
    pub p_max: u32,
    pub q_max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub spec: PstFamilySpec,
    pub params: ModelParams,
    pub time: Time,
    pub phase_condition: bool,
    pub pst: bool,
    pub min_mirror_modulus: f64,
    pub max_cross_column: f64,
}

/// Admissible specs in `family, k, p, q` order.
pub fn enumerate_specs(families: &[PstFamily], bounds: ScanBounds) -> Vec<FamilyParams> {
    let mut out = Vec::new();
    for &family in families {
        for k in 1..=bounds.k_max {
            for p in 1..=bounds.p_max {
                for q in 1..=bounds.q_max {
                    let fp = family_params(PstFamilySpec::new(family, k, p, q), bounds.n).expect("k >= 1");
                    if fp.is_admissible() {
                        out.push(fp);
                    }
                }
            }
        }
    }
    out
}

/// Certifies every admissible spec at its family period. Rows come back in spec order.
pub fn scan(families: &[PstFamily], bounds: ScanBounds, tol: f64) -> Result<Vec<ScanRow>> {
    enumerate_specs(families, bounds)
        .par_iter()
        .map(|fp| {
            let basis = Eigenbasis::new(&fp.params)?;
            let time = fp.spec.period();
            let report = certify_pst(&basis, time, tol);
            let prop = SpectralPropagator::new(&basis, time);
            Ok(ScanRow {
                spec: fp.spec,
                params: fp.params,
                time,
                phase_condition: report.phase_condition_satisfied,
                pst: report.kind == TransferKind::Pst,
                min_mirror_modulus: report.min_mirror_modulus().unwrap_or(0.0),
                max_cross_column: max_cross_column(&prop),
            })
        })
        .collect()
}
