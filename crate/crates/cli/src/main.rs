//! `mixbif`: command-line front end.
//!
//! Every command prints its JSON to stdout (or `--out`); failures print one JSON line on
//! stderr and exit with 2 (parse or usage error), 3 (degenerate input) or 1 (I/O).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixbif_core::probe::RadiusSchedule;
use mixbif_core::report::{self, CommandError, RunConfig, Section};
use mixbif_core::SourceExpr;

#[derive(Parser, Debug)]
#[command(
    name = "mixbif",
    version,
    about = "Newton geometry and asymptotic regularity of mixed polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report: geometry, non-degeneracy, bound set, S(f) and K∞(f) probes, checks.
    Analyze(Opts),
    /// Support, Newton polyhedron faces, Γ⁺ and flags.
    Faces(Opts),
    /// Bad faces of the support hull with witness functionals.
    Badfaces(Opts),
    /// Per-face Newton (strong) non-degeneracy verdicts.
    Nondeg(Opts),
    /// Critical values and the bad-face bound set.
    Bound(Opts),
    /// Asymptotic ρ-nonregular values S(f).
    #[command(name = "probe-s")]
    ProbeS(Opts),
    /// Asymptotic critical values K∞(f).
    #[command(name = "probe-kinf")]
    ProbeKinf(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// Polynomial in z1..zn and zb1..zbn, e.g. "z1*z2 + zb1^2*zb2^2".
    #[arg(allow_hyphen_values = true)]
    expr: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated increasing sphere radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Relative zero-test tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Tolerance for comparing value sets.
    #[arg(long)]
    value_tol: Option<f64>,
    /// Final drift bound for a finite_limit chain.
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Multistart budget (per radius, for critical points and per non-degeneracy test).
    #[arg(long)]
    starts: Option<usize>,
    /// Number of sampled phases in [0, π).
    #[arg(long)]
    phases: Option<usize>,
    /// Ambient dimension; defaults to the largest variable index.
    #[arg(long)]
    n: Option<usize>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG plot of the value plane.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Record wall-clock timings (the report is then no longer reproducible).
    #[arg(long)]
    timings: bool,
}

impl Opts {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig {
            seed: self.seed,
            timings: self.timings,
            ..RunConfig::default()
        };
        if let Some(r) = &self.radii {
            c.schedule = RadiusSchedule {
                radii: r.clone(),
                ..c.schedule
            };
        }
        if let Some(t) = self.tol {
            c.tolerances.tol = t;
        }
        if let Some(t) = self.value_tol {
            c.tolerances.value_tol = t;
        }
        if let Some(t) = self.cluster_tol {
            c.tolerances.cluster_tol = t;
        }
        if let Some(s) = self.starts {
            c.schedule.starts = s;
            c.budgets.critical_starts = s;
            c.budgets.nondeg_starts = s;
        }
        if let Some(p) = self.phases {
            c.budgets.phases = p;
        }
        c.outputs.json = self.out.clone();
        c.outputs.svg = self.svg.clone();
        c
    }
}

fn run(cmd: &Command) -> Result<String, CommandError> {
    let (opts, section) = match cmd {
        Command::Analyze(o) => (o, None),
        Command::Faces(o) => (o, Some(Section::Faces)),
        Command::Badfaces(o) => (o, Some(Section::BadFaces)),
        Command::Nondeg(o) => (o, Some(Section::Nondeg)),
        Command::Bound(o) => (o, Some(Section::Bound)),
        Command::ProbeS(o) => (o, Some(Section::ProbeS)),
        Command::ProbeKinf(o) => (o, Some(Section::ProbeKinf)),
    };
    let src = match opts.n {
        Some(n) => SourceExpr::with_n(&opts.expr, n),
        None => SourceExpr::new(&opts.expr),
    };
    let config = opts.config();
    let json = match section {
        None => report::cmd_analyze(&src, &config)?.to_json(),
        Some(s) => report::cmd_section(&src, s, &config)?.to_json(),
    };
    Ok(if opts.out.is_some() { String::new() } else { json })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            let line = serde_json::json!({ "error": "usage_error", "message": first });
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
