//! Triangular lattice, couplings and the single-excitation Hamiltonian.
//!
//! Sites `(i, j)` with `i + j <= N` are numbered with `j` as the outer and `i` as the inner
//! index: `(0,0), (1,0), …, (N,0), (0,1), …, (N-1,1), …, (0,N)`. Every matrix and vector in
//! the crate indexed by sites uses this order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, RealParams, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub i: u32,
    pub j: u32,
}

impl Site {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }

    /// Reflection `(i, j) -> (i, N - i - j)` inside the column of fixed `i`.
    pub fn mirror(self, n: u32) -> Site {
        Site { i: self.i, j: n - self.i - self.j }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl FromStr for Site {
    type Err = Error;

    /// `"(1,2)"` or `"1,2"`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse { what: "site (i,j)", input: s.to_string() };
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (i, j) = inner.split_once(',').ok_or_else(err)?;
        Ok(Site::new(i.trim().parse().map_err(|_| err())?, j.trim().parse().map_err(|_| err())?))
    }
}

/// Bijection between lattice sites and row indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteIndex {
    n: u32,
}

impl SiteIndex {
    pub fn new(n: u32) -> Self {
        Self { n }
    }

    pub fn size(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        let n = self.n as usize;
        (n + 1) * (n + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        s.i + s.j <= self.n
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        if !self.contains(s) {
            return None;
        }
        let (n, i, j) = (self.n as usize, s.i as usize, s.j as usize);
        Some(j * (n + 1) - j * j.saturating_sub(1) / 2 + i)
    }

    pub fn checked_index(&self, s: Site) -> Result<usize> {
        self.index(s).ok_or(Error::IndexOutOfRange { kind: "site", first: s.i, second: s.j, n: self.n })
    }

    pub fn site(&self, idx: usize) -> Site {
        let mut rest = idx;
        for j in 0..=self.n {
            let row = (self.n - j) as usize + 1;
            if rest < row {
                return Site::new(rest as u32, j);
            }
            rest -= row;
        }
        panic!("site index {idx} out of range for N = {}", self.n)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..=self.n).flat_map(move |j| (0..=self.n - j).map(move |i| Site::new(i, j)))
    }
}

pub fn validate_params(p: &ModelParams) -> std::result::Result<(), Vec<Violation>> {
    let v = p.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Which horizontal coupling to use. `PlusOne` carries `(c+N+m+n+1)` in place of
/// `(c+N+m+n-1)`; it does not diagonalize by the dual-Hahn eigenbasis and exists so the
/// verification suite can show that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JVariant {
    #[default]
    Corrected,
    PlusOne,
}

fn checked_sqrt(what: &'static str, radicand: f64) -> Result<f64> {
    // Radicands that should vanish can come out as -1e-15 after rounding.
    if radicand < -1e-9 * radicand.abs().max(1.0) {
        return Err(Error::NegativeRadicand { what, value: radicand });
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `J_{m,n} = sqrt(m (N+1-m-n) (a-b+1-m) (c+N+m+n-1))`, zero off the lattice.
pub fn coupling_j(m: i64, n: i64, p: &RealParams, variant: JVariant) -> Result<f64> {
    let big_n = p.n as i64;
    if m <= 0 || n < 0 || m + n > big_n {
        return Ok(0.0);
    }
    let (mf, nf) = (m as f64, n as f64);
    let shift = match variant {
        JVariant::Corrected => -1.0,
        JVariant::PlusOne => 1.0,
    };
    checked_sqrt("J", mf * (p.n + 1.0 - mf - nf) * (p.a - p.b + 1.0 - mf) * (p.c + p.n + mf + nf + shift))
}

/// `L_{m,n} = sqrt((m+1) n (a-b-m) (b-c+1-n))`, zero off the lattice.
pub fn coupling_l(m: i64, n: i64, p: &RealParams) -> Result<f64> {
    let big_n = p.n as i64;
    if m < 0 || n <= 0 || m + n > big_n {
        return Ok(0.0);
    }
    let (mf, nf) = (m as f64, n as f64);
    checked_sqrt("L", (mf + 1.0) * nf * (p.a - p.b - mf) * (p.b - p.c + 1.0 - nf))
}

/// `B_{m,n} = m (a - 2b + 1 - 2m)`.
pub fn field_b(m: i64, n: i64, p: &RealParams) -> f64 {
    let big_n = p.n as i64;
    if m <= 0 || n < 0 || m + n > big_n {
        return 0.0;
    }
    let mf = m as f64;
    mf * (p.a - 2.0 * p.b + 1.0 - 2.0 * mf)
}

/// Horizontal couplings `J`, diagonal couplings `L` and Zeeman terms `B`, one entry per site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingSet {
    #[serde(skip)]
    pub index: SiteIndex,
    pub j: Vec<f64>,
    pub l: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn couplings(p: &ModelParams) -> Result<CouplingSet> {
    couplings_with(p, JVariant::Corrected)
}

pub fn couplings_with(p: &ModelParams, variant: JVariant) -> Result<CouplingSet> {
    p.validated()?;
    let rp = p.real();
    let index = SiteIndex::new(p.n);
    let mut set = CouplingSet { index, j: Vec::new(), l: Vec::new(), b: Vec::new() };
    for s in index.sites() {
        let (m, n) = (i64::from(s.i), i64::from(s.j));
        set.j.push(coupling_j(m, n, &rp, variant)?);
        set.l.push(coupling_l(m, n, &rp)?);
        set.b.push(field_b(m, n, &rp));
    }
    Ok(set)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    /// `(i,j) - (i+1,j)`, weight `J_{i+1,j}`.
    Horizontal,
    /// `(i,j) - (i+1,j-1)`, weight `L_{i,j}`.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub from: Site,
    pub to: Site,
    pub kind: EdgeKind,
    pub weight: f64,
}

/// Dense symmetric Hamiltonian restricted to the single-excitation sector.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian1Ex {
    pub index: SiteIndex,
    pub couplings: CouplingSet,
    dim: usize,
    entries: Vec<f64>,
}

impl Hamiltonian1Ex {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.dim + c]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.dim..(r + 1) * self.dim]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|r| self.row(r).iter().zip(v).map(|(h, x)| h * x).sum()).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim).map(|r| self.row(r).iter().map(|h| h.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.entries.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    /// Nonzero off-diagonal couplings, each undirected edge listed once.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for s in self.index.sites() {
            let r = self.index.index(s).unwrap();
            let right = Site::new(s.i + 1, s.j);
            if let Some(c) = self.index.index(right) {
                out.push(Edge { from: s, to: right, kind: EdgeKind::Horizontal, weight: self.get(r, c) });
            }
            if s.j > 0 {
                let diag = Site::new(s.i + 1, s.j - 1);
                let c = self.index.index(diag).unwrap();
                out.push(Edge { from: s, to: diag, kind: EdgeKind::Diagonal, weight: self.get(r, c) });
            }
        }
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }
}

pub fn assemble(p: &ModelParams) -> Result<Hamiltonian1Ex> {
    assemble_with(p, JVariant::Corrected)
}

/// Builds `H` from
/// `H e_{i,j} = J_{i+1,j} e_{i+1,j} + J_{i,j} e_{i-1,j} + L_{i,j} e_{i+1,j-1}
///            + L_{i-1,j+1} e_{i-1,j+1} + B_{i,j} e_{i,j}`.
pub fn assemble_with(p: &ModelParams, variant: JVariant) -> Result<Hamiltonian1Ex> {
    let cs = couplings_with(p, variant)?;
    let index = cs.index;
    let dim = index.len();
    let mut entries = vec![0.0; dim * dim];
    for s in index.sites() {
        let r = index.index(s).unwrap();
        entries[r * dim + r] = cs.b[r];
        let right = Site::new(s.i + 1, s.j);
        if let Some(c) = index.index(right) {
            let w = cs.j[c];
            entries[r * dim + c] = w;
            entries[c * dim + r] = w;
        }
        if s.j > 0 {
            let c = index.index(Site::new(s.i + 1, s.j - 1)).unwrap();
            let w = cs.l[r];
            entries[r * dim + c] = w;
            entries[c * dim + r] = w;
        }
    }
    Ok(Hamiltonian1Ex { index, couplings: cs, dim, entries })
}

/// JSON layout written by `dump`.
#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianDump {
    pub params: ModelParams,
    pub dimension: usize,
    pub sites: Vec<Site>,
    pub couplings: CouplingSet,
    pub edges: Vec<Edge>,
    pub diagonal: Vec<f64>,
}

impl HamiltonianDump {
    pub fn new(p: &ModelParams, h: &Hamiltonian1Ex) -> Self {
        Self {
            params: *p,
            dimension: h.dimension(),
            sites: h.index.sites().collect(),
            couplings: h.couplings.clone(),
            edges: h.edges(),
            diagonal: h.diagonal(),
        }
    }
}
