use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use greentrace::analysis::{self, DEFAULT_N_MAX, DEFAULT_SYMMETRY_TOL};
use greentrace::forward::{forward_operator, spectral_map};
use greentrace::harmonic::grid_angles;
use greentrace::inverse::{reconstruct, reconstruct_free, ReconstructOptions, DEFAULT_RESIDUAL_TOL};
use greentrace::io;
use greentrace::mapping::{green_level_curve, trace_boundary};
use greentrace::profile::{FluxProfile, DEFAULT_NORMALIZATION_TOL};
use greentrace::{Complex64, Error, Result};

const MIN_CLI_GRID: usize = 64;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  I/O failure
  2  invalid input (details as JSON on stderr)
  3  anchors inconsistent with the flux";

#[derive(Parser, Debug)]
#[command(name = "greentrace", version, about = "Domains from the boundary flux of their Green's function", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map JSON to flux.csv, anchors.json, profile.json and trace.csv.
    Forward(ForwardArgs),
    /// Flux CSV and anchors (or a rotation) to trace.csv and report.json.
    Reconstruct(ReconstructArgs),
    /// Flux CSV to univalence.json, symmetry.json and curvature.csv.
    Analyze(AnalyzeArgs),
}

#[derive(Args, Debug)]
struct Output {
    /// Output directory, created if missing.
    #[arg(long, env = "GREENTRACE_OUT", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FluxInput {
    /// CSV with header `s,phi`.
    #[arg(long, env = "GREENTRACE_FLUX")]
    flux: PathBuf,
    /// JSON `{"perimeter": L}`; without it L is inferred from the grid.
    #[arg(long, env = "GREENTRACE_CONFIG")]
    config: Option<PathBuf>,
    /// Tolerance on `|int phi ds - 1|`.
    #[arg(long, env = "GREENTRACE_TOL_NORM", default_value_t = DEFAULT_NORMALIZATION_TOL)]
    tol_norm: f64,
    /// Divide the samples by their integral instead of rejecting them.
    #[arg(long, env = "GREENTRACE_RENORMALIZE")]
    renormalize: bool,
}

#[derive(Args, Debug)]
struct ForwardArgs {
    /// Map JSON (`polynomial` or `boundary_samples`).
    #[arg(long, env = "GREENTRACE_MAP")]
    map: PathBuf,
    /// Grid size, a power of two >= 64.
    #[arg(long, env = "GREENTRACE_N", default_value_t = 512)]
    n: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[command(flatten)]
    input: FluxInput,
    /// Anchors JSON `{"zeta_c":[re,im],"zeta_b":[re,im]}`.
    #[arg(long, env = "GREENTRACE_ANCHORS", conflicts_with = "gamma", required_unless_present = "gamma")]
    anchors: Option<PathBuf>,
    /// Rotation constant, used instead of anchors.
    #[arg(long, env = "GREENTRACE_GAMMA", allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Center `re,im` when reconstructing from `--gamma`.
    #[arg(long, env = "GREENTRACE_ZETA_C", value_parser = parse_complex, default_value = "0,0", allow_hyphen_values = true)]
    zeta_c: Complex64,
    /// Angle grid size; defaults to max(512, 2 * samples).
    #[arg(long, env = "GREENTRACE_N")]
    n: Option<usize>,
    #[arg(long, env = "GREENTRACE_TOL_RESIDUAL", default_value_t = DEFAULT_RESIDUAL_TOL)]
    tol_residual: f64,
    /// Radii in (0, 1) of Green's function level curves to emit.
    #[arg(long, env = "GREENTRACE_LEVELS", value_delimiter = ',')]
    levels: Vec<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: FluxInput,
    #[arg(long, env = "GREENTRACE_TOL_SYMMETRY", default_value_t = DEFAULT_SYMMETRY_TOL)]
    tol_symmetry: f64,
    /// Largest rotation order scanned (capped at samples / 4).
    #[arg(long, env = "GREENTRACE_N_MAX", default_value_t = DEFAULT_N_MAX)]
    n_max: usize,
    #[command(flatten)]
    output: Output,
}

fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got `{text}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn check_grid(n: usize) -> Result<()> {
    if n < MIN_CLI_GRID || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "--n {n} must be a power of two >= {MIN_CLI_GRID}"
        )));
    }
    Ok(())
}

fn check_tolerance(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} = {value} must be positive")));
    }
    Ok(())
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))
}

fn load_flux(input: &FluxInput) -> Result<FluxProfile> {
    check_tolerance("--tol-norm", input.tol_norm)?;
    let perimeter = input.config.as_deref().map(io::read_perimeter).transpose()?;
    io::read_flux(&input.flux, perimeter, input.tol_norm, input.renormalize)
}

#[derive(serde::Serialize)]
struct ProfileInfo {
    perimeter: f64,
    n: usize,
}

fn cmd_forward(args: &ForwardArgs) -> Result<()> {
    check_grid(args.n)?;
    let spec = io::read_map_spec(&args.map)?;
    let (profile, anchors) = forward_operator(&spec, args.n)?;
    let trace = trace_boundary(&spectral_map(&spec, args.n)?, args.n)?;
    let out = &args.output.out;
    prepare_out(out)?;
    io::write_flux(&out.join("flux.csv"), &profile)?;
    io::write_anchors(&out.join("anchors.json"), &anchors)?;
    io::write_json(
        &out.join("profile.json"),
        &ProfileInfo {
            perimeter: profile.perimeter(),
            n: profile.n_samples(),
        },
    )?;
    io::write_trace(&out.join("trace.csv"), &trace)
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<()> {
    if let Some(n) = args.n {
        check_grid(n)?;
    }
    check_tolerance("--tol-residual", args.tol_residual)?;
    if let Some(r) = args.levels.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidArgument(format!("level radius {r} not in (0, 1)")));
    }
    let profile = load_flux(&args.input)?;
    let rec = match (&args.anchors, args.gamma) {
        (Some(path), _) => {
            let anchors = io::read_anchors(path)?;
            let opts = ReconstructOptions {
                n: args.n,
                tol_residual: args.tol_residual,
            };
            reconstruct(&profile, &anchors, &opts)?
        }
        (None, Some(gamma)) => reconstruct_free(&profile, args.zeta_c, gamma, args.n)?,
        (None, None) => return Err(Error::InvalidArgument("need --anchors or --gamma".into())),
    };
    let out = &args.output.out;
    prepare_out(out)?;
    io::write_trace(&out.join("trace.csv"), &rec.trace)?;
    io::write_json(&out.join("report.json"), &io::ReconstructionReport::from_reconstruction(&rec)?)?;
    let n = rec.trace.len();
    let theta = grid_angles(n);
    for &r in &args.levels {
        let points = green_level_curve(&rec.map, r, n)?;
        io::write_level_curve(&out.join(format!("level_{r}.csv")), &theta, &points)?;
    }
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    check_tolerance("--tol-symmetry", args.tol_symmetry)?;
    let profile = load_flux(&args.input)?;
    let n_max = args.n_max.min(profile.n_samples() / 4);
    let univalence = analysis::paatero_check(&profile);
    let symmetry = analysis::symmetry_report(&profile, n_max, args.tol_symmetry)?;
    let curvature = analysis::curvature_from_flux(&profile)?;
    let out = &args.output.out;
    prepare_out(out)?;
    io::write_json(&out.join("univalence.json"), &univalence)?;
    io::write_json(&out.join("symmetry.json"), &symmetry)?;
    io::write_curvature(&out.join("curvature.csv"), &profile.arclengths(), &curvature)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 1,
        Error::InconsistentAnchors { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Forward(a) => cmd_forward(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Analyze(a) => cmd_analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let mut body = serde_json::json!({ "error": err.kind(), "message": err.to_string() });
            if let Error::InconsistentAnchors { residual, .. } = &err {
                body["residual"] = (*residual).into();
            }
            eprintln!("{body}");
            ExitCode::from(exit_code(&err))
        }
    }
}

