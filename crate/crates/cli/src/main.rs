use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hankel_ladder::identities::{self, AsymptoticReport};
use hankel_ladder::moments::{cross_check, rational_to_decimal};
use hankel_ladder::num::{self, parse_decimal};
use hankel_ladder::report::{self, ResidualReport};
use hankel_ladder::suite::{parse_suites, run_suites, SuiteOptions};
use hankel_ladder::{compute, Computation, Error, FdOrder, NumericPolicy, WeightParams};
use rayon::prelude::*;
use rug::Rational;

/// Orthogonal polynomials, Hankel determinants and Painlevé IV identities
/// for the weight exp(-z^2 + t z) |z - t|^gamma (A + B theta(z - t)).
#[derive(Parser, Debug)]
#[command(name = "hankel-ladder", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Moments mu_0 .. mu_{2 nmax}.
    Moments(Common),
    /// Recurrence coefficients, Hankel determinants and auxiliary quantities.
    Coeffs(Common),
    /// Run identity suites and report residuals.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated: string, deriv, riccati, painleve, sigma, dsigma, ladder, aux, all.
        #[arg(long, default_value = "all")]
        suites: String,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = FdArg::Central2)]
        fd_order: FdArg,
    },
    /// Coefficient table over a grid of t values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
    },
    /// Compare R_n (or ln D_n(s)/D_n(0)) with the large-n expansions.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending orders.
        #[arg(long, default_value = "16,32,64")]
        n_list: String,
        #[arg(long, value_enum, default_value_t = Kind::R)]
        kind: Kind,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long = "A", default_value = "1", allow_hyphen_values = true)]
    a: String,
    #[arg(long = "B", default_value = "0", allow_hyphen_values = true)]
    b: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    gamma: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    t: String,
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    /// Working precision in bits.
    #[arg(long, default_value_t = 512)]
    prec: u32,
    #[arg(long, default_value = "1e-8")]
    fd_step: String,
    #[arg(long, default_value_t = 1e-40)]
    quad_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Grid {
    #[arg(long, allow_hyphen_values = true, requires_all = ["t_to", "t_steps"])]
    t_from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t_to: Option<String>,
    #[arg(long)]
    t_steps: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FdArg {
    Central2,
    Richardson4,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    R,
    Hankel,
}

/// Parameter or usage problem: exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn decimal(flag: &str, s: &str) -> anyhow::Result<Rational> {
    parse_decimal(s).ok_or_else(|| usage(format!("{flag}: '{s}' is not a decimal number")))
}

fn lift(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidParams(_) | Error::InvalidPolicy(_) | Error::InvalidScheme(_) | Error::SingularPoint => {
            usage(e.to_string())
        }
        other => other.into(),
    }
}

impl Common {
    fn params(&self) -> anyhow::Result<WeightParams> {
        WeightParams::new(
            decimal("--A", &self.a)?,
            decimal("--B", &self.b)?,
            decimal("--gamma", &self.gamma)?,
            decimal("--t", &self.t)?,
        )
        .map_err(lift)
    }

    fn policy(&self) -> anyhow::Result<NumericPolicy> {
        decimal("--fd-step", &self.fd_step)?;
        NumericPolicy::new(self.prec, self.quad_tol, &self.fd_step, 2).map_err(lift)
    }

    fn check_nmax(&self) -> anyhow::Result<()> {
        if self.nmax < 1 {
            bail!(usage("--nmax must be at least 1"));
        }
        Ok(())
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                Ok(out.flush()?)
            }
        }
    }
}

impl Grid {
    /// The sweep grid, or the single `t` when no grid flags are given.
    fn values(&self, t: &str) -> anyhow::Result<Vec<Rational>> {
        let (Some(from), Some(to), Some(steps)) = (&self.t_from, &self.t_to, self.t_steps) else {
            return Ok(vec![decimal("--t", t)?]);
        };
        let from = decimal("--t-from", from)?;
        let to = decimal("--t-to", to)?;
        if steps == 0 {
            bail!(usage("--t-steps must be at least 1"));
        }
        if steps == 1 {
            return Ok(vec![from]);
        }
        let span = Rational::from(&to - &from) / Rational::from(steps - 1);
        Ok((0..steps)
            .map(|k| (&span * Rational::from(k)) + &from)
            .collect())
    }
}

/// A table with named columns and decimal-string cells.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.iter().map(|c| report::csv_escape(c)).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let arr: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: serde_json::Map<String, serde_json::Value> = self
                            .columns
                            .iter()
                            .zip(r)
                            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                            .collect();
                        serde_json::Value::Object(m)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&arr).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

fn coeff_rows(c: &Computation, n_max: usize, t_col: bool, table: &mut Table) {
    let p = c.prec();
    let d = |x: &rug::Float| num::to_decimal(x, p);
    let t = rational_to_decimal(c.params().t());
    for n in 0..=n_max {
        let mut row = Vec::new();
        if t_col {
            row.push(t.clone());
        }
        row.extend([
            n.to_string(),
            d(&c.rec.h[n]),
            d(&c.rec.alpha[n]),
            d(&c.rec.beta[n]),
            d(&c.rec.p1[n]),
            d(&c.rec.d[n]),
            d(&c.aux.r_big[n]),
            d(&c.aux.r[n]),
            d(&c.aux.sigma[n]),
        ]);
        table.rows.push(row);
    }
}

const COEFF_COLUMNS: [&str; 9] = ["n", "h_n", "alpha_n", "beta_n", "p_n", "D_n", "R_n", "r_n", "sigma_n"];

fn cmd_moments(c: &Common) -> anyhow::Result<bool> {
    c.check_nmax()?;
    let (params, policy) = (c.params()?, c.policy()?);
    let table = cross_check(c.nmax, &params, &policy).map_err(lift)?;
    let mut out = Table::new(&["k", "mu_k"]);
    for (k, mu) in table.moments.iter().enumerate() {
        out.rows.push(vec![k.to_string(), num::to_decimal(mu, table.prec())]);
    }
    c.emit(&out.render(c.format))?;
    Ok(true)
}

fn cmd_coeffs(c: &Common) -> anyhow::Result<bool> {
    c.check_nmax()?;
    let comp = compute(&c.params()?, &c.policy()?, c.nmax).map_err(lift)?;
    let mut out = Table::new(&COEFF_COLUMNS);
    coeff_rows(&comp, c.nmax, false, &mut out);
    c.emit(&out.render(c.format))?;
    Ok(true)
}

fn cmd_sweep(c: &Common, grid: &Grid) -> anyhow::Result<bool> {
    c.check_nmax()?;
    let (params, policy) = (c.params()?, c.policy()?);
    let ts = grid.values(&c.t)?;
    let comps: Vec<Computation> = ts
        .par_iter()
        .map(|t| compute(&params.with_t(t.clone()), &policy, c.nmax))
        .collect::<Result<_, _>>()
        .map_err(lift)?;
    let mut cols = vec!["t"];
    cols.extend(COEFF_COLUMNS);
    let mut out = Table::new(&cols);
    for comp in &comps {
        coeff_rows(comp, c.nmax, true, &mut out);
    }
    c.emit(&out.render(c.format))?;
    Ok(true)
}

fn render_reports(reports: &[ResidualReport], format: Format) -> String {
    match format {
        Format::Csv => report::to_csv(reports),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report::to_json(reports)).expect("serializable");
            s.push('\n');
            s
        }
    }
}

fn tally(reports: &[ResidualReport]) -> bool {
    let failed: Vec<&ResidualReport> = reports.iter().filter(|r| !r.pass).collect();
    let skipped = reports.iter().filter(|r| r.skipped).count();
    for r in &failed {
        eprintln!("FAIL {}", r.summary());
    }
    eprintln!("{} checks, {} failed, {} skipped", reports.len(), failed.len(), skipped);
    failed.is_empty()
}

fn cmd_verify(c: &Common, suites: &str, grid: &Grid, fd: FdArg) -> anyhow::Result<bool> {
    c.check_nmax()?;
    let (params, policy) = (c.params()?, c.policy()?);
    let suites = parse_suites(suites).map_err(lift)?;
    let ts = grid.values(&c.t)?;
    let opts = SuiteOptions {
        fd_order: match fd {
            FdArg::Central2 => FdOrder::Central2,
            FdArg::Richardson4 => FdOrder::Richardson4,
        },
        ..SuiteOptions::default()
    };
    let per_t: Vec<Vec<ResidualReport>> = ts
        .par_iter()
        .map(|t| run_suites(&params.with_t(t.clone()), &policy, c.nmax, &suites, &opts))
        .collect::<Result<_, _>>()
        .map_err(lift)?;
    let mut reports: Vec<ResidualReport> = per_t.into_iter().flatten().collect();
    report::sort_reports(&mut reports);
    c.emit(&render_reports(&reports, c.format))?;
    Ok(tally(&reports))
}

fn parse_n_list(s: &str) -> anyhow::Result<Vec<usize>> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("--n-list: '{x}' is not an order"))))
        .collect::<anyhow::Result<_>>()?;
    if v.len() < 2 || v.windows(2).any(|w| w[0] >= w[1]) || v[0] < 1 {
        bail!(usage("--n-list needs at least two ascending positive orders"));
    }
    Ok(v)
}

fn cmd_asymptotics(c: &Common, n_list: &str, kind: Kind) -> anyhow::Result<bool> {
    let (params, policy) = (c.params()?, c.policy()?);
    let ns = parse_n_list(n_list)?;
    let (rep, value_col): (AsymptoticReport, &'static str) = match kind {
        Kind::R => (identities::check_asymptotics_r(&ns, &params, &policy).map_err(lift)?, "R_n"),
        Kind::Hankel => (
            identities::check_hankel_expansion(&ns, params.t(), &params, &policy).map_err(lift)?,
            "ln_D_ratio",
        ),
    };
    let mut out = Table::new(&["n", value_col, "expansion", "abs_err", "ratio"]);
    for row in &rep.rows {
        out.rows.push(vec![
            row.n.to_string(),
            num::to_decimal(&row.value, row.value.prec()),
            format!("{:.17e}", row.expansion),
            format!("{:.17e}", row.abs_err),
            row.ratio.map(|r| format!("{r:.17e}")).unwrap_or_default(),
        ]);
    }
    c.emit(&out.render(c.format))?;
    Ok(tally(&rep.reports))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Moments(c) => cmd_moments(c),
        Command::Coeffs(c) => cmd_coeffs(c),
        Command::Verify { common, suites, grid, fd_order } => cmd_verify(common, suites, grid, *fd_order),
        Command::Sweep { common, grid } => cmd_sweep(common, grid),
        Command::Asymptotics { common, n_list, kind } => cmd_asymptotics(common, n_list, *kind),
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HANKEL_LADDER_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| usage(format!("HANKEL_LADDER_THREADS: '{v}' is not a thread count")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match init_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
