//! `tauber-lab`: batch front end for the staircase transform lab.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;
use tauber_core::continuation::{self, continue_grid, fit_poles};
use tauber_core::diagnostics::{exponent_scan_with, estimate_exponent, omega_lower_bound, verify_family};
use tauber_core::exec::Execution;
use tauber_core::report::{self, Cell, Table};
use tauber_core::transform::{estimate_sigma_c, partial_sum_with};
use tauber_core::{StaircaseFamily, Variant};

use config::{axis, Command, ConfigError, FamilyFlags, Format, RunConfig, Span};

#[derive(Debug, Parser)]
#[command(name = "tauber-lab", version, about = "Staircase transforms, continuation, poles and exponents")]
struct Cli {
    /// What to compute (may instead come from --config).
    #[arg(value_enum)]
    command: Option<Command>,

    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "c-up")]
    c_up: Option<f64>,
    #[arg(long = "c-down")]
    c_down: Option<f64>,
    #[arg(long)]
    base: Option<f64>,
    #[arg(long = "i-cap")]
    i_cap: Option<u32>,

    /// Complex point such as `0.5+9.06i` (transform); real `s` for omega.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<Complex64>,
    /// Number of intervals for `transform` (default: all active).
    #[arg(long)]
    n: Option<u32>,
    /// Real-part range `a..b` (grid for `continue`, box for `poles`).
    #[arg(long, allow_hyphen_values = true)]
    re: Option<Span>,
    /// Imaginary-part range `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    im: Option<Span>,
    #[arg(long = "re-step")]
    re_step: Option<f64>,
    #[arg(long = "im-step")]
    im_step: Option<f64>,
    /// Comma-separated evaluation points for `eval`.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Exponent range `a..b` of the witness points `x₁ = 2^k` for `omega`.
    #[arg(long)]
    k: Option<Span>,
    /// Comma-separated γ values for `scan`.
    #[arg(long, value_delimiter = ',')]
    gammas: Vec<f64>,
    /// Comma-separated variants for `scan`.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<Variant>,
    /// Keep cancelled lattice points in `poles` output.
    #[arg(long = "include-cancelled")]
    include_cancelled: bool,

    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Compute(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn compute<E: std::fmt::Display>(module: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Compute(format!("{module}: {e}"))
}

/// A finished table and how many of its rows failed.
struct Outcome {
    table: Table,
    failures: usize,
    echo: bool,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome { table, failures: 0, echo: false }
    }

    fn with_failures(table: Table, failures: usize) -> Self {
        Outcome { table, failures, echo: false }
    }
}

struct Run {
    cli: Cli,
    file: RunConfig,
    exec: Execution,
}

impl Run {
    fn family(&self) -> Result<StaircaseFamily, Failure> {
        let flags = FamilyFlags {
            variant: self.cli.variant,
            gamma: self.cli.gamma,
            c_up: self.cli.c_up,
            c_down: self.cli.c_down,
            base: self.cli.base,
            i_cap: self.cli.i_cap,
        };
        Ok(flags.resolve(self.file.family.as_ref())?)
    }

    fn re_span(&self, default: (f64, f64)) -> Span {
        let g = &self.file.grid;
        self.cli.re.unwrap_or(Span {
            lo: g.re_min.unwrap_or(default.0),
            hi: g.re_max.unwrap_or(default.1),
        })
    }

    fn im_span(&self, default: (f64, f64)) -> Span {
        let g = &self.file.grid;
        self.cli.im.unwrap_or(Span {
            lo: g.im_min.unwrap_or(default.0),
            hi: g.im_max.unwrap_or(default.1),
        })
    }

    fn tol(&self, default: f64) -> f64 {
        self.cli.tol.or(self.file.tolerances.tol).unwrap_or(default)
    }

    fn execute(&self, command: Command) -> Result<Outcome, Failure> {
        match command {
            Command::Eval => self.eval(),
            Command::Transform => self.transform(),
            Command::Continue => self.continuation(),
            Command::Poles => self.poles(),
            Command::Abscissa => {
                let family = self.family()?;
                let est = estimate_sigma_c(&family, self.tol(0.05)).map_err(compute("transform"))?;
                Ok(Outcome::ok(report::sigma_table(&family, &est)))
            }
            Command::Exponent => {
                let family = self.family()?;
                let est = estimate_exponent(&family).map_err(compute("diagnostics"))?;
                Ok(Outcome::ok(report::exponent_table(&family, &est)))
            }
            Command::Omega => self.omega(),
            Command::Scan => self.scan(),
            Command::Verify => {
                let family = self.family()?;
                let rows = verify_family(&family, self.exec);
                let failures = rows.iter().filter(|r| !r.pass).count();
                Ok(Outcome {
                    table: report::verify_table(&family, &rows),
                    failures,
                    echo: true,
                })
            }
        }
    }

    fn eval(&self) -> Result<Outcome, Failure> {
        let family = self.family()?;
        let xs = if self.cli.x.is_empty() {
            let lo = family.interval(family.i_start()).map_err(compute("model"))?.lower();
            let last = family.i_cap().min(family.i_start() + 4);
            let hi = family.interval(last).map_err(compute("model"))?.upper();
            let mut xs = family.breakpoint_samples(lo, hi);
            xs.sort_by(f64::total_cmp);
            xs
        } else {
            self.cli.x.clone()
        };
        let mut points = Vec::with_capacity(xs.len());
        for x in xs {
            let f = family.eval_f(x).map_err(compute("model"))?;
            let g = family.eval_g(x).map_err(compute("model"))?;
            points.push((x, f, g));
        }
        Ok(Outcome::ok(report::eval_table(&family, &points)))
    }

    fn transform(&self) -> Result<Outcome, Failure> {
        let family = self.family()?;
        let s = self.cli.s.ok_or_else(|| Failure::Config("transform needs --s".into()))?;
        let n = self.cli.n.unwrap_or(family.i_cap() - family.i_start());
        let trace = partial_sum_with(&family, s, n, self.exec).map_err(compute("transform"))?;
        Ok(Outcome::ok(report::trace_table(&family, &trace)))
    }

    fn continuation(&self) -> Result<Outcome, Failure> {
        let family = self.family()?;
        let grid = &self.file.grid;
        let abscissa = 2.0 * family.gamma() - 1.0;
        let re = self.re_span((abscissa - 0.5, abscissa + 1.5));
        let im = self.im_span((0.0, 0.0));
        let re_axis = axis(re.lo, re.hi, self.cli.re_step.or(grid.re_step).unwrap_or(0.1), "re")?;
        let im_axis = axis(im.lo, im.hi, self.cli.im_step.or(grid.im_step).unwrap_or(1.0), "im")?;
        let points: Vec<Complex64> = im_axis
            .iter()
            .flat_map(|&y| re_axis.iter().map(move |&x| Complex64::new(x, y)))
            .collect();
        let values: Vec<_> = points
            .iter()
            .zip(continue_grid(&family, &points, self.tol(continuation::DEFAULT_TOL), self.exec))
            .map(|(s, v)| (*s, v.map_err(|e| format!("continuation: {e}"))))
            .collect();
        let failures = values.iter().filter(|(_, v)| v.is_err()).count();
        Ok(Outcome::with_failures(
            report::continuation_table(&family, abscissa, &values),
            failures,
        ))
    }

    fn poles(&self) -> Result<Outcome, Failure> {
        let family = self.family()?;
        let re = self.re_span((-2.0, 1.0));
        let im = self.im_span((0.0, 10.0));
        if !(re.lo <= re.hi && im.lo <= im.hi) {
            return Err(Failure::Config(format!(
                "empty region: re {}..{}, im {}..{}",
                re.lo, re.hi, im.lo, im.hi
            )));
        }
        let mut lattice = continuation::poles(&family, (re.lo, re.hi), (im.lo, im.hi));
        if !self.cli.include_cancelled {
            lattice.retain(|p| !p.cancelled);
        }
        let fitted = fit_poles(&family, &lattice, self.exec);
        let failures = fitted.iter().filter(|p| p.order_ok == Some(false)).count();
        Ok(Outcome::with_failures(report::poles_table(&family, &fitted), failures))
    }

    fn omega(&self) -> Result<Outcome, Failure> {
        let family = self.family()?;
        let gamma = family.gamma();
        let c = family.c_up().max(family.c_down());
        let k = self.cli.k.unwrap_or(Span { lo: 10.0, hi: 30.0 });
        let ks = axis(k.lo, k.hi, 1.0, "k")?;
        let ss = match self.cli.s {
            Some(s) if s.im != 0.0 => return Err(Failure::Config("omega takes a real --s".into())),
            Some(s) => vec![s.re],
            None => vec![2.0 * gamma - 1.0, 2.0 * gamma - 1.25, 2.0 * gamma - 1.5],
        };
        let mut rows = Vec::new();
        for &s in &ss {
            for &k in &ks {
                let r = omega_lower_bound(1.0, c, gamma, k.exp2(), s).map_err(|e| format!("diagnostics: {e}"));
                rows.push((s, r));
            }
        }
        let failures = rows.iter().filter(|(_, r)| !matches!(r, Ok(b) if b.pass)).count();
        Ok(Outcome::with_failures(report::omega_table(&rows), failures))
    }

    fn scan(&self) -> Result<Outcome, Failure> {
        let gammas = if self.cli.gammas.is_empty() {
            (3..=9).map(|k| f64::from(k) / 10.0).collect()
        } else {
            self.cli.gammas.clone()
        };
        let variants = if self.cli.variants.is_empty() {
            Variant::ALL.to_vec()
        } else {
            self.cli.variants.clone()
        };
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return Err(Failure::Config(format!("scan γ = {g} is outside (0, 1)")));
        }
        let rows = exponent_scan_with(&gammas, &variants, self.exec);
        Ok(Outcome::ok(report::scan_table(&rows)))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("TAUBER_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("TAUBER_THREADS must be a positive integer, got '{value}'")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Text(t) => t.clone(),
        _ => String::new(),
    }
}

/// Column-aligned `check  result  detail` lines for the terminal.
fn verify_text(table: &Table) -> String {
    let width = table.rows.iter().map(|r| cell_text(&r[0]).chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for r in &table.rows {
        let check = cell_text(&r[0]);
        let pad = " ".repeat(width - check.chars().count());
        out.push_str(&format!("{check}{pad}  {}  {}\n", cell_text(&r[1]), cell_text(&r[2])));
    }
    out
}

fn run(cli: Cli) -> Result<usize, Failure> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    let command = cli
        .command
        .or(file.command)
        .ok_or_else(|| Failure::Config("no command given".into()))?;
    let format = cli.format.or(file.output.format).unwrap_or_default();
    let out = cli.out.clone().or(file.output.path.clone());
    let run = Run {
        cli,
        file,
        exec: Execution::default(),
    };
    let outcome = run.execute(command)?;
    let text = match format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(),
    };
    match &out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
            if outcome.echo {
                print!("{}", verify_text(&outcome.table));
            }
        }
        None if outcome.echo && format == Format::Csv => print!("{}", verify_text(&outcome.table)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Compute(format!("stdout: {e}")))?,
    }
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("error: {n} row(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
