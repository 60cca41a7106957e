use thiserror::Error;

use crate::params::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma function pole at x = {0}")]
    GammaPole(f64),

    #[error("vanishing denominator Pochhammer ({param})_{order}")]
    DenominatorPole { param: f64, order: u32 },

    #[error("negative radicand {value} in {what}")]
    NegativeRadicand { what: &'static str, value: f64 },

    #[error("{what} must be positive, computed {value}")]
    NotPositive { what: &'static str, value: f64 },

    #[error("parameters violate the positivity condition: {}", format_violations(.0))]
    Parameters(Vec<Violation>),

    #[error("jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("{kind} ({first}, {second}) is out of range for N = {n}")]
    IndexOutOfRange { kind: &'static str, first: u32, second: u32, n: u32 },

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
