mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dualhahn::bivariate::Eigenbasis;
use dualhahn::dynamics::{amplitude_rows, CSV_HEADER};
use dualhahn::lattice::{assemble, HamiltonianDump, JVariant};
use dualhahn::params::rational_to_string;
use dualhahn::transfer::{
    certify_pst, detect_fractional_revival, family_membership, scan, PstFamily, ScanBounds, ScanRow, DEFAULT_TOL,
};
use dualhahn::verify::{self, Level};
use dualhahn::{AmplitudeGrid, Error, ModelParams, Site, Time};
use serde::Serialize;

use config::{parse_times, Format, RunConfig};

/// An error with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub const VALIDATION: u8 = 1;
    pub const NUMERICAL: u8 = 2;
    pub const IO: u8 = 3;

    pub fn validation(error: anyhow::Error) -> Self {
        Self { code: Self::VALIDATION, error }
    }

    pub fn numerical(error: anyhow::Error) -> Self {
        Self { code: Self::NUMERICAL, error }
    }

    pub fn io(error: anyhow::Error) -> Self {
        Self { code: Self::IO, error }
    }

    pub fn context(self, msg: String) -> Self {
        Self { code: self.code, error: self.error.context(msg) }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameters(_) | Error::Parse { .. } | Error::IndexOutOfRange { .. } => Failure::VALIDATION,
            _ => Failure::NUMERICAL,
        };
        Self { code, error: e.into() }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "dualhahn", version, about = "Exactly solvable XX spin lattice: dynamics, PST and FR certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// TOML run configuration with `[model]` and optional `[run]` sections.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Parameters as `a,b,c,N`, e.g. `53/3,34/3,1/6,6`. Overrides the config file.
    #[arg(long, short = 'p', allow_hyphen_values = true)]
    params: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => Some(RunConfig::load(path)?),
            None => None,
        };
        if let Some(p) = &self.params {
            let params: ModelParams = p.parse()?;
            cfg = Some(match cfg {
                Some(c) => RunConfig { params, ..c },
                None => RunConfig::new(params),
            });
        }
        cfg.ok_or_else(|| Failure::validation(anyhow!("give --config or --params")))
    }
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyChoice {
    Odd,
    Even,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CertifyKind {
    Pst,
    Fr,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the positivity condition and identify the PST family, if any.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
    },
    /// Amplitude rows from one source at a list of times.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Source site, e.g. `(0,0)`.
        #[arg(long)]
        source: Option<String>,
        /// Times: `3/2` or `3/2pi` mean multiples of π, `0.5` is a plain real.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Option<Vec<String>>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certify PST over every admissible member of the families within bounds.
    Scan {
        #[arg(long, short = 'n', default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k_max: u32,
        #[arg(long, default_value_t = 60)]
        p_max: u32,
        #[arg(long, default_value_t = 40)]
        q_max: u32,
        #[arg(long, value_enum, default_value = "both")]
        family: FamilyChoice,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// PST (all mirror pairs) or FR (column i = 0 from the origin) report at one time.
    Certify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "pst")]
        kind: CertifyKind,
        #[arg(long, allow_hyphen_values = true)]
        time: String,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suites.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        /// Coupling `J` used to build the Hamiltonian for the eigen-relation check.
        #[arg(long, value_enum, default_value = "corrected")]
        j_variant: JVariantArg,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write the Hamiltonian as JSON: sites, couplings, edges and diagonal.
    Dump {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Amplitude data for the preset runs 1, 2 or 3 (see README).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum JVariantArg {
    Corrected,
    PlusOne,
}

fn open_output(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    match out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display())).map_err(Failure::io)?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn io_context(out: &Option<PathBuf>) -> String {
    match out {
        Some(p) => format!("writing {}", p.display()),
        None => "writing standard output".to_string(),
    }
}

fn emit(out: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult {
    let mut w = open_output(out)?;
    body(&mut *w).and_then(|_| w.flush()).with_context(|| io_context(out)).map_err(Failure::io)
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::numerical(e.into()))?;
    emit(out, |w| writeln!(w, "{text}"))
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    params: ModelParams,
    source: Site,
    frames: &'a [AmplitudeGrid],
}

fn write_simulation(cfg: &RunConfig, out: &Option<PathBuf>) -> CliResult {
    let basis = Eigenbasis::new(&cfg.params)?;
    let frames = amplitude_rows(&basis, cfg.source, &cfg.times)?;
    match cfg.format {
        Format::Json => emit_json(out, &SimulationOutput { params: cfg.params, source: cfg.source, frames: &frames }),
        Format::Csv => emit(out, |w| {
            writeln!(w, "{CSV_HEADER}")?;
            frames.iter().try_for_each(|g| g.write_csv(w))
        }),
    }
}

#[derive(Serialize)]
struct ValidationReport {
    params: ModelParams,
    admissible: bool,
    violations: Vec<String>,
    family: Option<dualhahn::transfer::PstFamilySpec>,
    pst_time: Option<Time>,
    revival_time: Option<Time>,
}

fn validate(cfg: &RunConfig, format: ReportFormat) -> CliResult {
    let p = cfg.params;
    let violations: Vec<String> = p.violations().iter().map(ToString::to_string).collect();
    let family = family_membership(&p);
    let report = ValidationReport {
        params: p,
        admissible: violations.is_empty(),
        violations,
        family,
        pst_time: family.map(|f| f.period()),
        revival_time: family.and_then(|f| f.revival_time()),
    };
    match format {
        ReportFormat::Json => emit_json(&None, &report)?,
        ReportFormat::Text => emit(&None, |w| {
            writeln!(w, "parameters {p}")?;
            let checks = [
                ("c > 0", p.c > 0.into(), p.c),
                ("a - b > N", p.a - p.b > (p.n as i64).into(), p.a - p.b),
                ("b - c > N", p.b - p.c > (p.n as i64).into(), p.b - p.c),
            ];
            for (name, ok, v) in checks {
                writeln!(w, "  {name:<10} {}  ({})", if ok { "ok  " } else { "FAIL" }, rational_to_string(&v))?;
            }
            match (&report.family, &report.pst_time) {
                (Some(f), Some(t)) => writeln!(w, "family {f}: PST between mirror sites at t = {t}")?,
                _ => writeln!(w, "family none")?,
            }
            if let Some(t) = report.revival_time {
                writeln!(w, "p odd: fractional revival on column i = 0 expected at t = {t}")?;
            }
            Ok(())
        })?,
    }
    if report.admissible {
        Ok(())
    } else {
        Err(Error::Parameters(p.violations()).into())
    }
}

fn scan_csv(w: &mut dyn Write, rows: &[ScanRow]) -> io::Result<()> {
    writeln!(w, "family,k,p,q,a,b,c,n,t,phase_condition,pst,min_mirror_modulus,max_cross_column")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{:.16e},{:.16e}",
            r.spec.family,
            r.spec.k,
            r.spec.p,
            r.spec.q,
            rational_to_string(&r.params.a),
            rational_to_string(&r.params.b),
            rational_to_string(&r.params.c),
            r.params.n,
            r.time,
            r.phase_condition,
            r.pst,
            r.min_mirror_modulus,
            r.max_cross_column
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate { model, format } => validate(&model.resolve()?, format),
        Command::Simulate { model, source, times, format, output } => {
            let mut cfg = model.resolve()?;
            if let Some(s) = source {
                cfg.source = s.parse()?;
            }
            if let Some(ts) = times {
                cfg.times = parse_times(&ts)?;
            }
            if let Some(f) = format {
                cfg.format = f;
            }
            write_simulation(&cfg, &output.out)
        }
        Command::Figure { which, format, output } => {
            let mut cfg = RunConfig::figure(which).expect("range checked by clap");
            if let Some(f) = format {
                cfg.format = f;
            }
            write_simulation(&cfg, &output.out)
        }
        Command::Scan { n, k_max, p_max, q_max, family, tol, format, output } => {
            let families: &[PstFamily] = match family {
                FamilyChoice::Odd => &[PstFamily::OddPeriod],
                FamilyChoice::Even => &[PstFamily::EvenPeriod],
                FamilyChoice::Both => &PstFamily::ALL,
            };
            let rows = scan(families, ScanBounds { n, k_max, p_max, q_max }, tol)?;
            match format {
                Format::Json => emit_json(&output.out, &rows)?,
                Format::Csv => emit(&output.out, |w| scan_csv(w, &rows))?,
            }
            let bad: Vec<String> = rows.iter().filter(|r| !r.pst).map(|r| r.spec.to_string()).collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure::numerical(anyhow!("family members without PST: {}", bad.join("; "))))
            }
        }
        Command::Certify { model, kind, time, tol, output } => {
            let cfg = model.resolve()?;
            let time: Time = time.parse()?;
            let basis = Eigenbasis::new(&cfg.params)?;
            let tol = tol.unwrap_or(cfg.tol);
            let report = match kind {
                CertifyKind::Pst => certify_pst(&basis, time, tol),
                CertifyKind::Fr => detect_fractional_revival(&basis, time, tol),
            };
            emit_json(&output.out, &report)
        }
        Command::Verify { level, j_variant, format, output } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let variant = match j_variant {
                JVariantArg::Corrected => JVariant::Corrected,
                JVariantArg::PlusOne => JVariant::PlusOne,
            };
            let report = verify::run(level, variant);
            match format {
                ReportFormat::Json => emit_json(&output.out, &report)?,
                ReportFormat::Text => emit(&output.out, |w| {
                    for c in &report.checks {
                        writeln!(w, "{c}")?;
                    }
                    let failed = report.failures().count();
                    writeln!(w, "{} checks, {failed} failed", report.checks.len())
                })?,
            }
            if report.passed {
                Ok(())
            } else {
                let names: Vec<String> = report.failures().map(|c| format!("{} [{}]", c.suite, c.case)).collect();
                Err(Failure::numerical(anyhow!("failed checks: {}", names.join(", "))))
            }
        }
        Command::Dump { model, output } => {
            let cfg = model.resolve()?;
            let h = assemble(&cfg.params)?;
            emit_json(&output.out, &HamiltonianDump::new(&cfg.params, &h))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
