//! Command-line front end: validate knot projections, extract and rewrite
//! diagrams, compute invariants, trace isotopies, render SVG.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 parse
//! or I/O error, 3 resolution conflict (time grid too coarse).

use clap::{Args, Parser, Subcommand, ValueEnum};
use knotter::curve::{parse_isotopy, parse_loop, CurveError, FourierLoop};
use knotter::diagram::{Diagram, DiagramError};
use knotter::genericity::{
    find_double_points, perturb_to_generic, validate, GenericityConfig, PerturbError,
};
use knotter::svg::{render_diagram, render_loop, SvgStyle};
use knotter::tracer::{trace, TraceConfig, TraceError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "knotter",
    version,
    about = "Knot projection validation, diagram extraction, and isotopy tracing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a loop's projection is a generic knot diagram.
    Validate {
        /// Knot spec file (degree/x/y/z lines).
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Print the Gauss code of a validated projection.
    Extract {
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Writhe and Fox coloring counts of a diagram or knot file.
    Invariants {
        /// Knot spec, Gauss code, or PD code file.
        file: PathBuf,
        /// Comma-separated coloring moduli.
        #[arg(long, default_value = "3,5", value_delimiter = ',')]
        n: Vec<u64>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Trace an isotopy file and print the verified move script.
    Trace {
        /// Isotopy spec file (keyframe blocks).
        file: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Render a knot file or diagram to SVG.
    Render {
        file: PathBuf,
        /// Output SVG path.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Args)]
struct CommonOpts {
    /// Grid samples per parameter axis (default max(256, 8N)).
    #[arg(long)]
    grid: Option<usize>,
    /// Newton tolerance on |F| at double points.
    #[arg(long, default_value_t = 1e-10)]
    tol_newton: f64,
    /// Immersion threshold, relative to the coefficient scale.
    #[arg(long, default_value_t = 1e-3)]
    tol_immersion: f64,
    /// Crossing separation threshold, relative to scale.
    #[arg(long, default_value_t = 1e-3)]
    tol_triple: f64,
    /// Transversality threshold on |sin angle|.
    #[arg(long, default_value_t = 1e-2)]
    tol_transversality: f64,
    /// 3D embeddedness threshold, relative to scale.
    #[arg(long, default_value_t = 1e-3)]
    tol_embed: f64,
    /// Event bracket tolerance in time.
    #[arg(long, default_value_t = 1e-8)]
    tol_bisect: f64,
    /// Time grid samples for tracing.
    #[arg(long, default_value_t = 512)]
    time_samples: usize,
    /// Seed for perturbation and any randomized choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Nudge a non-generic loop into general position first.
    #[arg(long)]
    perturb: bool,
    /// Starting perturbation magnitude.
    #[arg(long, default_value_t = 1e-3)]
    perturb_magnitude: f64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl CommonOpts {
    fn genericity(&self) -> GenericityConfig {
        GenericityConfig {
            grid: self.grid,
            newton_tol: self.tol_newton,
            embed_tol_rel: self.tol_embed,
            immersion_tol_rel: self.tol_immersion,
            triple_tol_rel: self.tol_triple,
            transversality_tol: self.tol_transversality,
            ..GenericityConfig::default()
        }
    }

    fn tracer(&self) -> TraceConfig {
        TraceConfig {
            genericity: self.genericity(),
            time_samples: self.time_samples,
            bisect_tol: self.tol_bisect,
            ..TraceConfig::default()
        }
    }
}

const EXIT_FAIL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CONFLICT: u8 = 3;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type Failure = (u8, String);

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file, opts } => cmd_validate(&file, &opts),
        Command::Extract { file, opts } => cmd_extract(&file, &opts),
        Command::Invariants { file, n, opts } => cmd_invariants(&file, &n, &opts),
        Command::Trace { file, opts } => cmd_trace(&file, &opts),
        Command::Render { file, out, opts } => cmd_render(&file, &out, &opts),
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| (EXIT_PARSE, format!("{}: {e}", path.display())))
}

/// First token with `#` comments removed; decides knot-spec vs code input.
fn first_token(text: &str) -> String {
    text.lines()
        .filter_map(|l| l.split('#').next())
        .flat_map(str::split_whitespace)
        .next()
        .unwrap_or("")
        .to_string()
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .filter_map(|l| l.split('#').next())
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_knot(path: &PathBuf) -> Result<FourierLoop, Failure> {
    let text = read_file(path)?;
    parse_loop(&text).map_err(curve_failure)
}

fn curve_failure(e: CurveError) -> Failure {
    (EXIT_PARSE, e.to_string())
}

fn diagram_failure(e: DiagramError) -> Failure {
    (EXIT_PARSE, e.to_string())
}

/// Apply --perturb when requested; failures map to exit 1 (the input's
/// geometry is the problem, not its syntax).
fn maybe_perturb(
    loop_: FourierLoop,
    opts: &CommonOpts,
    cfg: &GenericityConfig,
) -> Result<FourierLoop, Failure> {
    if !opts.perturb {
        return Ok(loop_);
    }
    perturb_to_generic(&loop_, opts.seed, opts.perturb_magnitude, cfg).map_err(|e| match e {
        PerturbError::NotEmbedded { .. } | PerturbError::Failed { .. } => {
            (EXIT_FAIL, e.to_string())
        }
    })
}

fn cmd_validate(file: &PathBuf, opts: &CommonOpts) -> Result<(), Failure> {
    let cfg = opts.genericity();
    let loop_ = maybe_perturb(parse_knot(file)?, opts, &cfg)?;
    let report = validate(&loop_, &cfg);
    match opts.format {
        Format::Text => print!("{report}"),
        Format::Kv => print!("{}", report.to_kv()),
    }
    if report.passed() {
        Ok(())
    } else {
        Err((EXIT_FAIL, "validation failed".into()))
    }
}

fn extract_diagram(loop_: &FourierLoop, cfg: &GenericityConfig) -> Result<Diagram, Failure> {
    let report = validate(loop_, cfg);
    if !report.passed() {
        return Err((
            EXIT_FAIL,
            "projection is not a generic diagram (try --perturb)".into(),
        ));
    }
    Diagram::extract(loop_, &report.double_points, cfg.z_tol_rel * loop_.scale())
        .map_err(|e| (EXIT_FAIL, e.to_string()))
}

fn cmd_extract(file: &PathBuf, opts: &CommonOpts) -> Result<(), Failure> {
    let cfg = opts.genericity();
    let loop_ = maybe_perturb(parse_knot(file)?, opts, &cfg)?;
    let diagram = extract_diagram(&loop_, &cfg)?;
    println!("{}", diagram.gauss_code());
    Ok(())
}

/// A diagram from either a knot spec (validated and extracted) or a
/// Gauss/PD code, recognized by content.
fn load_diagram(path: &PathBuf, opts: &CommonOpts) -> Result<Diagram, Failure> {
    let text = read_file(path)?;
    if first_token(&text).starts_with("degree") {
        let cfg = opts.genericity();
        let loop_ = maybe_perturb(parse_loop(&text).map_err(curve_failure)?, opts, &cfg)?;
        extract_diagram(&loop_, &cfg)
    } else {
        Diagram::parse(&strip_comments(&text)).map_err(diagram_failure)
    }
}

fn cmd_invariants(file: &PathBuf, moduli: &[u64], opts: &CommonOpts) -> Result<(), Failure> {
    let diagram = load_diagram(file, opts)?;
    for &n in moduli {
        if n < 2 {
            return Err((
                EXIT_PARSE,
                format!("coloring modulus {n} must be at least 2"),
            ));
        }
        println!("colorings_{n}={}", diagram.fox_colorings(n));
    }
    println!("writhe={}", diagram.writhe());
    println!("crossings={}", diagram.crossings());
    Ok(())
}

fn cmd_trace(file: &PathBuf, opts: &CommonOpts) -> Result<(), Failure> {
    let text = read_file(file)?;
    let family = parse_isotopy(&text).map_err(curve_failure)?;
    let cfg = opts.tracer();
    match trace(&family, &cfg) {
        Ok(script) => {
            print!("{}", script.to_text());
            if script.passed() {
                Ok(())
            } else {
                Err((EXIT_FAIL, "trace verification failed".into()))
            }
        }
        Err(e @ TraceError::ResolutionConflict { .. }) => Err((EXIT_CONFLICT, e.to_string())),
        Err(e) => Err((EXIT_FAIL, e.to_string())),
    }
}

fn cmd_render(file: &PathBuf, out: &PathBuf, opts: &CommonOpts) -> Result<(), Failure> {
    let text = read_file(file)?;
    let style = SvgStyle::default();
    let svg = if first_token(&text).starts_with("degree") {
        let cfg = opts.genericity();
        let loop_ = maybe_perturb(parse_loop(&text).map_err(curve_failure)?, opts, &cfg)?;
        let report = validate(&loop_, &cfg);
        if !report.passed() {
            return Err((
                EXIT_FAIL,
                "projection is not a generic diagram (try --perturb)".into(),
            ));
        }
        let dps = find_double_points(&loop_, &cfg).map_err(|e| (EXIT_FAIL, e.to_string()))?;
        render_loop(&loop_, &dps, &style)
    } else {
        let diagram = Diagram::parse(&strip_comments(&text)).map_err(diagram_failure)?;
        render_diagram(&diagram, &style)
    };
    std::fs::write(out, svg).map_err(|e| (EXIT_PARSE, format!("{}: {e}", out.display())))?;
    Ok(())
}
