//! Bivariate dual-Hahn polynomials of Tratnik type and the eigenbasis they generate.
//!
//! ```text
//! D_{m,n}(x,y) = d_m(x; b+y-1, a+y, -y-1) · d_n(y-m; m+c+N-1, m+b+N, m-N-1)
//! ```
//!
//! on the spectral grid `0 <= x <= y <= N`, for degrees `m + n <= N`.
//!
//! The weight and the squared norms are carried with a common factor `1/Γ(b-a)` removed:
//!
//! ```text
//! w_{x,y} = (-1)^x / (x! (y-x)!) · (b-a)_{y-x} · Γ(b+y+x) / Γ(a+1+y+x)
//!           · (a, a/2+1)_x / (a/2)_x · (b/2+1, c+N, -N)_y / (b/2, b-c-N+1, b+N+1)_y
//! r_{m,n} = m! n! (-N, c+N)_{m+n} (b-a)_m Γ(b+N+1) / ((-1)^N a b Γ(a) (c-b+n)_{N-n})
//! ```
//!
//! Both are then positive whenever `c > 0`, `a - b > N`, `b - c > N`, and stay finite when
//! `a - b` is an integer. Orthogonality only sees the ratio `w / r`, so nothing else changes.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Site, SiteIndex};
use crate::params::{to_big, ModelParams, RealParams};
use crate::specfun::{dual_hahn, ln_factorial, log_gamma_signed, pochhammer_signed, DualHahnParams, SignedLog};

/// Spectral label `(x, y)`, `0 <= x <= y <= N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GridPoint {
    pub x: u32,
    pub y: u32,
}

impl GridPoint {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Position in the `y`-outer, `x`-inner enumeration.
    pub fn index(self) -> usize {
        let y = self.y as usize;
        y * (y + 1) / 2 + self.x as usize
    }
}

/// All grid points, `y` outer and `x` inner.
pub fn grid(n: u32) -> Vec<GridPoint> {
    (0..=n).flat_map(|y| (0..=y).map(move |x| GridPoint::new(x, y))).collect()
}

/// Polynomial degree pair `(m, n)`, `m + n <= N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DegreeIndex {
    pub m: u32,
    pub n: u32,
}

impl DegreeIndex {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }
}

impl From<Site> for DegreeIndex {
    fn from(s: Site) -> Self {
        Self { m: s.i, n: s.j }
    }
}

/// Parameters of the `x`-factor at row `y`: `(b+y-1, a+y, -y-1)`.
pub fn x_factor_params(y: u32, p: &RealParams) -> DualHahnParams {
    let y = f64::from(y);
    DualHahnParams::new(p.b + y - 1.0, p.a + y, -y - 1.0)
}

/// Parameters of the `y`-factor at degree `m`: `(m+c+N-1, m+b+N, m-N-1)`.
pub fn y_factor_params(m: u32, p: &RealParams) -> DualHahnParams {
    let m = f64::from(m);
    DualHahnParams::new(m + p.c + p.n - 1.0, m + p.b + p.n, m - p.n - 1.0)
}

fn check_indices(d: DegreeIndex, g: GridPoint, n: u32) -> Result<()> {
    if d.m + d.n > n {
        return Err(Error::IndexOutOfRange { kind: "degree", first: d.m, second: d.n, n });
    }
    check_grid(g, n)
}

fn check_grid(g: GridPoint, n: u32) -> Result<()> {
    if g.x > g.y || g.y > n {
        return Err(Error::IndexOutOfRange { kind: "grid point", first: g.x, second: g.y, n });
    }
    Ok(())
}

fn tratnik_d_real(d: DegreeIndex, g: GridPoint, rp: &RealParams) -> Result<f64> {
    // (−y)_m vanishes for m > y, and then the y-factor argument y − m would be negative.
    if d.m > g.y {
        return Ok(0.0);
    }
    let first = dual_hahn(d.m, g.x, &x_factor_params(g.y, rp))?;
    let second = dual_hahn(d.n, g.y - d.m, &y_factor_params(d.m, rp))?;
    Ok(first * second)
}

pub fn tratnik_d(d: DegreeIndex, g: GridPoint, p: &ModelParams) -> Result<f64> {
    check_indices(d, g, p.n)?;
    tratnik_d_real(d, g, &p.real())
}

fn ln_fact(n: u32) -> SignedLog {
    SignedLog::new(ln_factorial(n), 1)
}

fn nonzero(v: SignedLog, param: f64, order: u32) -> Result<SignedLog> {
    if v.is_zero() {
        Err(Error::DenominatorPole { param, order })
    } else {
        Ok(v)
    }
}

pub fn log_weight_w2(g: GridPoint, p: &ModelParams) -> Result<SignedLog> {
    check_grid(g, p.n)?;
    let RealParams { a, b, c, n } = p.real();
    let (x, y) = (g.x, g.y);
    let (xf, yf) = (f64::from(x), f64::from(y));
    let mut acc = pochhammer_signed(b - a, y - x) / (ln_fact(x) * ln_fact(y - x));
    acc = acc * log_gamma_signed(b + yf + xf)? / log_gamma_signed(a + 1.0 + yf + xf)?;
    acc = acc * pochhammer_signed(a, x) * pochhammer_signed(a / 2.0 + 1.0, x)
        / nonzero(pochhammer_signed(a / 2.0, x), a / 2.0, x)?;
    acc = acc * pochhammer_signed(b / 2.0 + 1.0, y) * pochhammer_signed(c + n, y) * pochhammer_signed(-n, y);
    for q in [b / 2.0, b - c - n + 1.0, b + n + 1.0] {
        acc = acc / nonzero(pochhammer_signed(q, y), q, y)?;
    }
    Ok(acc.negate_if(x % 2 == 1))
}

/// The weight `w_{x,y}` (see the module docs for its normalization).
pub fn weight_w2(g: GridPoint, p: &ModelParams) -> Result<f64> {
    log_weight_w2(g, p).map(SignedLog::value)
}

pub fn log_norm_r(d: DegreeIndex, p: &ModelParams) -> Result<SignedLog> {
    if d.m + d.n > p.n {
        return Err(Error::IndexOutOfRange { kind: "degree", first: d.m, second: d.n, n: p.n });
    }
    let RealParams { a, b, c, n } = p.real();
    let k = d.m + d.n;
    let mut acc = ln_fact(d.m) * ln_fact(d.n) * pochhammer_signed(-n, k) * pochhammer_signed(c + n, k);
    acc = acc * pochhammer_signed(b - a, d.m) * log_gamma_signed(b + n + 1.0)?;
    let q = c - b + f64::from(d.n);
    let den = SignedLog::from_f64(a)
        * SignedLog::from_f64(b)
        * log_gamma_signed(a)?
        * nonzero(pochhammer_signed(q, p.n - d.n), q, p.n - d.n)?;
    if den.is_zero() {
        return Err(Error::DenominatorPole { param: a * b, order: 0 });
    }
    Ok((acc / den).negate_if(p.n % 2 == 1))
}

/// The squared norm `r_{m,n}` (see the module docs for its normalization).
pub fn norm_r(d: DegreeIndex, p: &ModelParams) -> Result<f64> {
    log_norm_r(d, p).map(SignedLog::value)
}

/// `λ_{x,y} = x(x+a) - y(y+b)`, exactly.
pub fn eigenvalue_exact(g: GridPoint, p: &ModelParams) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(g.x));
    let y = BigRational::from_integer(BigInt::from(g.y));
    &x * (&x + to_big(&p.a)) - &y * (&y + to_big(&p.b))
}

pub fn eigenvalue(g: GridPoint, p: &ModelParams) -> f64 {
    let RealParams { a, b, .. } = p.real();
    let (x, y) = (f64::from(g.x), f64::from(g.y));
    x * (x + a) - y * (y + b)
}

fn positive_sqrt(what: &'static str, v: SignedLog) -> Result<SignedLog> {
    if v.sign != 1 {
        return Err(Error::NotPositive { what, value: v.value() });
    }
    Ok(v.sqrt().unwrap())
}

/// `W_{i,j}(x,y) = sqrt(w_{x,y} / r_{i,j}) D_{i,j}(x,y)`.
pub fn eigvec_entry(site: Site, g: GridPoint, p: &ModelParams) -> Result<f64> {
    let d = DegreeIndex::from(site);
    check_indices(d, g, p.n)?;
    let sw = positive_sqrt("weight w_{x,y}", log_weight_w2(g, p)?)?;
    let sr = positive_sqrt("norm r_{m,n}", log_norm_r(d, p)?)?;
    let dv = SignedLog::from_f64(tratnik_d_real(d, g, &p.real())?);
    Ok((dv * sw / sr).value())
}

/// Dense tables of `D`, `w`, `r` and the orthogonal matrix `W` for one parameter set.
///
/// Rows are lattice sites in [`SiteIndex`] order; columns are grid points in [`grid`] order.
/// The table is immutable once built.
#[derive(Clone, Debug)]
pub struct Eigenbasis {
    params: ModelParams,
    index: SiteIndex,
    grid: Vec<GridPoint>,
    d_table: Vec<f64>,
    weights: Vec<f64>,
    norms: Vec<f64>,
    w_matrix: Vec<f64>,
    eigenvalues: Vec<f64>,
    exact_eigenvalues: Vec<BigRational>,
}

impl Eigenbasis {
    pub fn new(p: &ModelParams) -> Result<Self> {
        let p = p.validated()?;
        let rp = p.real();
        let index = SiteIndex::new(p.n);
        let grid = grid(p.n);
        let dim = grid.len();

        let log_weights = grid.iter().map(|&g| log_weight_w2(g, &p)).collect::<Result<Vec<_>>>()?;
        let log_norms = index.sites().map(|s| log_norm_r(s.into(), &p)).collect::<Result<Vec<_>>>()?;
        for w in &log_weights {
            positive_sqrt("weight w_{x,y}", *w)?;
        }
        for r in &log_norms {
            positive_sqrt("norm r_{m,n}", *r)?;
        }

        let mut d_table = vec![0.0; dim * dim];
        let mut w_matrix = vec![0.0; dim * dim];
        for (col, &g) in grid.iter().enumerate() {
            for (row, s) in index.sites().enumerate() {
                let d = tratnik_d_real(s.into(), g, &rp)?;
                d_table[row * dim + col] = d;
                let scale = 0.5 * (log_weights[col].log_abs - log_norms[row].log_abs);
                w_matrix[row * dim + col] = d * scale.exp();
            }
        }

        Ok(Self {
            index,
            eigenvalues: grid.iter().map(|&g| eigenvalue(g, &p)).collect(),
            exact_eigenvalues: grid.iter().map(|&g| eigenvalue_exact(g, &p)).collect(),
            weights: log_weights.iter().map(|w| w.value()).collect(),
            norms: log_norms.iter().map(|r| r.value()).collect(),
            params: p,
            grid,
            d_table,
            w_matrix,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn index(&self) -> SiteIndex {
        self.index
    }

    pub fn grid(&self) -> &[GridPoint] {
        &self.grid
    }

    pub fn dimension(&self) -> usize {
        self.grid.len()
    }

    /// `W_{site}(grid[col])` by row/column index.
    pub fn w(&self, row: usize, col: usize) -> f64 {
        self.w_matrix[row * self.grid.len() + col]
    }

    /// Row of `W` for one site: its components over all eigenvectors.
    pub fn w_row(&self, row: usize) -> &[f64] {
        let dim = self.grid.len();
        &self.w_matrix[row * dim..(row + 1) * dim]
    }

    /// Column `(x,y)` of `W`: the eigenvector for `λ_{x,y}` in the site basis.
    pub fn eigenvector(&self, col: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|row| self.w(row, col)).collect()
    }

    /// `D_{m,n}(grid[col])`, zero for degrees off the triangle.
    pub fn d(&self, m: i64, n: i64, col: usize) -> f64 {
        if m < 0 || n < 0 {
            return 0.0;
        }
        match self.index.index(Site::new(m as u32, n as u32)) {
            Some(row) => self.d_table[row * self.grid.len() + col],
            None => 0.0,
        }
    }

    /// Orthonormal `D̃_{m,n} = r_{m,n}^{-1/2} D_{m,n}`, zero off the triangle.
    pub fn d_orthonormal(&self, m: i64, n: i64, col: usize) -> f64 {
        if m < 0 || n < 0 {
            return 0.0;
        }
        match self.index.index(Site::new(m as u32, n as u32)) {
            Some(row) => self.d_table[row * self.grid.len() + col] / self.norms[row].sqrt(),
            None => 0.0,
        }
    }

    pub fn weight(&self, col: usize) -> f64 {
        self.weights[col]
    }

    pub fn norm(&self, row: usize) -> f64 {
        self.norms[row]
    }

    pub fn eigenvalue(&self, col: usize) -> f64 {
        self.eigenvalues[col]
    }

    pub fn eigenvalue_exact(&self, col: usize) -> &BigRational {
        &self.exact_eigenvalues[col]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Pairs of grid points sharing an eigenvalue.
    pub fn degenerate_pairs(&self) -> Vec<(GridPoint, GridPoint)> {
        let mut out = Vec::new();
        for i in 0..self.grid.len() {
            for j in i + 1..self.grid.len() {
                if self.exact_eigenvalues[i] == self.exact_eigenvalues[j] {
                    out.push((self.grid[i], self.grid[j]));
                }
            }
        }
        out
    }
}
