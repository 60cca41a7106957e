//! Self-verification suites over the invariants of every module.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::bivariate::{grid, norm_r, tratnik_d, weight_w2, x_factor_params, y_factor_params, DegreeIndex, Eigenbasis};
use crate::dynamics::{OraclePropagator, SpectralPropagator, Time};
use crate::error::Result;
use crate::lattice::{assemble_with, JVariant, Site, SiteIndex};
use crate::params::{ModelParams, Rational};
use crate::specfun::{dual_hahn, weight_w, DualHahnNorms, DualHahnParams};
use crate::transfer::{
    certify_pst, check_phase_condition, detect_fractional_revival, endpoint_amplitude_closed_form, family_membership,
    family_params, max_cross_column, scan, FamilyParams, PstFamily, PstFamilySpec, ScanBounds, TransferKind,
    DEFAULT_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn max_n(self) -> u32 {
        match self {
            Level::Quick => 4,
            Level::Full => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub case: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn bounded(suite: &'static str, case: &str, value: Result<f64>, bound: f64) -> Self {
        match value {
            Ok(v) => Check { suite, case: case.to_string(), value: v, bound, passed: v <= bound, error: None },
            Err(e) => Check {
                suite,
                case: case.to_string(),
                value: f64::NAN,
                bound,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<28} {:<40} {:.3e} <= {:.1e}", self.suite, self.case, self.value, self.bound)?;
        if let Some(e) = &self.error {
            write!(f, " ({e})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub variant: JVariant,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// `max |W W^T - I|` and `max |W^T W - I|`.
pub fn w_orthogonality_defect(basis: &Eigenbasis) -> f64 {
    let n = basis.dimension();
    let mut worst = 0.0f64;
    for r in 0..n {
        for s in 0..n {
            let want = if r == s { 1.0 } else { 0.0 };
            let rows: f64 = (0..n).map(|k| basis.w(r, k) * basis.w(s, k)).sum();
            let cols: f64 = (0..n).map(|k| basis.w(k, r) * basis.w(k, s)).sum();
            worst = worst.max((rows - want).abs()).max((cols - want).abs());
        }
    }
    worst
}

/// `max |Σ_x w_x d_n d_m - δ h_n| / sqrt(|h_n h_m|)` over `0 <= n, m <= size`.
pub fn univariate_orthogonality_defect(p: &DualHahnParams, size: u32) -> Result<f64> {
    let norms = DualHahnNorms::new(p)?;
    let w = (0..=size).map(|x| weight_w(x, p)).collect::<Result<Vec<_>>>()?;
    let d = (0..=size)
        .map(|n| (0..=size).map(|x| dual_hahn(n, x, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for n in 0..=size as usize {
        for m in 0..=size as usize {
            let s: f64 = (0..=size as usize).map(|x| w[x] * d[n][x] * d[m][x]).sum();
            let (hn, hm) = (norms.h(n as u32), norms.h(m as u32));
            let want = if n == m { hn } else { 0.0 };
            worst = worst.max((s - want).abs() / (hn * hm).abs().sqrt());
        }
    }
    Ok(worst)
}

/// Univariate orthogonality of every factor family entering `D_{m,n}` at size `p.n`.
pub fn factor_orthogonality_defect(p: &ModelParams) -> Result<f64> {
    let rp = p.real();
    let mut worst = 0.0f64;
    for y in 0..=p.n {
        worst = worst.max(univariate_orthogonality_defect(&x_factor_params(y, &rp), y)?);
    }
    for m in 0..=p.n {
        worst = worst.max(univariate_orthogonality_defect(&y_factor_params(m, &rp), p.n - m)?);
    }
    Ok(worst)
}

/// `max |Σ_g w_g D_s(g) D_t(g) - δ r_s| / sqrt(|r_s r_t|)` straight from the formulas, with no
/// positivity requirement on `w` or `r`.
pub fn bivariate_orthogonality_defect(p: &ModelParams) -> Result<f64> {
    let index = SiteIndex::new(p.n);
    let g = grid(p.n);
    let sites: Vec<Site> = index.sites().collect();
    let w = g.iter().map(|&x| weight_w2(x, p)).collect::<Result<Vec<_>>>()?;
    let r = sites.iter().map(|&s| norm_r(s.into(), p)).collect::<Result<Vec<_>>>()?;
    let d = sites
        .iter()
        .map(|&s| g.iter().map(|&x| tratnik_d(DegreeIndex::from(s), x, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for a in 0..sites.len() {
        for b in 0..sites.len() {
            let s: f64 = (0..g.len()).map(|k| w[k] * d[a][k] * d[b][k]).sum();
            let want = if a == b { r[a] } else { 0.0 };
            worst = worst.max((s - want).abs() / (r[a] * r[b]).abs().sqrt());
        }
    }
    Ok(worst)
}

/// `max_col ‖H w - λ w‖_∞ / ‖H‖_∞` with `H` built from the chosen `J`.
pub fn eigen_relation_residual(basis: &Eigenbasis, variant: JVariant) -> Result<f64> {
    let h = assemble_with(basis.params(), variant)?;
    let mut worst = 0.0f64;
    for col in 0..basis.dimension() {
        let v = basis.eigenvector(col);
        let hv = h.apply(&v);
        let lam = basis.eigenvalue(col);
        for (x, y) in hv.iter().zip(&v) {
            worst = worst.max((x - lam * y).abs());
        }
    }
    Ok(worst / h.norm_inf())
}

pub fn unitarity_defect(prop: &SpectralPropagator<'_>) -> f64 {
    let n = prop.basis().dimension();
    (0..n).map(|s| (prop.row_values(s).iter().map(Complex64::norm_sqr).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
}

/// `max |f_spectral - f_oracle|` over all site pairs at `time`.
pub fn oracle_deviation(basis: &Eigenbasis, oracle: &OraclePropagator, time: Time) -> f64 {
    let prop = SpectralPropagator::new(basis, time);
    let mut worst = 0.0f64;
    for s in 0..basis.dimension() {
        for (x, y) in prop.row_values(s).iter().zip(oracle.row_values(s, &time)) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

/// First admissible spec of `family` with `k = 1`, smallest `q` then smallest `p`.
pub fn smallest_admissible(family: PstFamily, n: u32) -> FamilyParams {
    for q in 1.. {
        for p in 1..=4 * q + 8 * n + 8 {
            let fp = family_params(PstFamilySpec::new(family, 1, p, q), n).expect("k = 1");
            if fp.is_admissible() {
                return fp;
            }
        }
    }
    unreachable!()
}

fn family_checks(fp: &FamilyParams, variant: JVariant, out: &mut Vec<Check>) {
    let case = format!("{} N={}", fp.spec, fp.params.n);
    let basis = match Eigenbasis::new(&fp.params) {
        Ok(b) => b,
        Err(e) => {
            out.push(Check::bounded("eigenbasis", &case, Err(e), 0.0));
            return;
        }
    };
    let period = fp.spec.period();
    out.push(Check::bounded("w_orthogonality", &case, Ok(w_orthogonality_defect(&basis)), 1e-8));
    out.push(Check::bounded("univariate_orthogonality", &case, factor_orthogonality_defect(&fp.params), 1e-8));
    out.push(Check::bounded("eigen_relation", &case, eigen_relation_residual(&basis, variant), 1e-8));
    let unit = [period.scale(Rational::new(1, 2)), period.scale(Rational::new(1, 3)), Time::Real(1.0)]
        .into_iter()
        .map(|t| unitarity_defect(&SpectralPropagator::new(&basis, t)))
        .fold(0.0, f64::max);
    out.push(Check::bounded("unitarity", &case, Ok(unit), 1e-8));
    let phase = if check_phase_condition(&fp.params, &period) { 0.0 } else { 1.0 };
    out.push(Check::bounded("phase_condition", &case, Ok(phase), 0.0));
    let report = certify_pst(&basis, period, DEFAULT_TOL);
    out.push(Check::bounded("mirror_pst", &case, Ok(1.0 - report.min_mirror_modulus().unwrap_or(0.0)), DEFAULT_TOL));
    let cross = max_cross_column(&SpectralPropagator::new(&basis, period));
    out.push(Check::bounded("column_structure", &case, Ok(cross), 1e-8));

    let shifted = fp.params.with_c(fp.params.c + Rational::new(1, 10));
    let closed = (|| {
        let e = endpoint_amplitude_closed_form(&shifted)?;
        let b = Eigenbasis::new(&shifted)?;
        let f = SpectralPropagator::new(&b, period).amplitude(Site::new(0, 0), Site::new(0, shifted.n))?;
        Ok((e.value - f.norm()).abs())
    })();
    out.push(Check::bounded("closed_form_endpoint", &format!("{case} c+1/10"), closed, 1e-8));
}

fn figure_checks(out: &mut Vec<Check>) {
    let times = [Time::pi(0, 1), Time::pi(1, 2), Time::pi(1, 1), Time::pi(2, 1), Time::pi(3, 1)];
    for (name, p) in [("figure 1", ModelParams::figure1()), ("figure 2", ModelParams::figure2())] {
        let dev = (|| {
            let basis = Eigenbasis::new(&p)?;
            let oracle = OraclePropagator::new(&p)?;
            Ok(times.iter().map(|&t| oracle_deviation(&basis, &oracle, t)).fold(0.0, f64::max))
        })();
        out.push(Check::bounded("oracle_equivalence", name, dev, 1e-7));
        for n in [7, 8] {
            let q = p.with_n(n);
            out.push(Check::bounded(
                "bivariate_orthogonality",
                &format!("{name} a,b,c at N={n}"),
                bivariate_orthogonality_defect(&q),
                1e-8,
            ));
        }
    }
    let fr = Eigenbasis::new(&ModelParams::figure2()).map(|b| {
        let r = detect_fractional_revival(&b, Time::pi(1, 1), DEFAULT_TOL);
        if r.kind == TransferKind::Fr {
            (r.column_probability - 1.0).abs()
        } else {
            1.0
        }
    });
    out.push(Check::bounded("fractional_revival", "figure 2 at t=pi", fr, 1e-8));

    let rows = scan(&PstFamily::ALL, ScanBounds { n: 6, k_max: 1, p_max: 30, q_max: 20 }, DEFAULT_TOL);
    let worst = rows.map(|rows| {
        let has_figures = [ModelParams::figure1(), ModelParams::figure2()]
            .iter()
            .all(|f| rows.iter().any(|r| r.params == *f && r.pst));
        let worst = rows.iter().map(|r| 1.0 - r.min_mirror_modulus).fold(0.0, f64::max);
        if has_figures {
            worst
        } else {
            1.0
        }
    });
    out.push(Check::bounded("family_scan", "N=6 k<=1 p<=30 q<=20", worst, DEFAULT_TOL));
}

pub fn run(level: Level, variant: JVariant) -> VerifyReport {
    let mut checks = Vec::new();
    for n in 1..=level.max_n() {
        for family in PstFamily::ALL {
            family_checks(&smallest_admissible(family, n), variant, &mut checks);
        }
    }
    if level == Level::Full {
        for p in [ModelParams::figure1(), ModelParams::figure2()] {
            let spec = family_membership(&p).expect("figure parameters lie on a family");
            family_checks(&family_params(spec, p.n).expect("k >= 1"), variant, &mut checks);
        }
        figure_checks(&mut checks);
    }
    VerifyReport { level, variant, passed: checks.iter().all(|c| c.passed), checks }
}
