//! `quasispin` command-line front end.
//!
//! Exit status: 0 on success, 1 when a check fails, a phase estimate does not
//! converge or a computation is rejected (e.g. truncation tail too large),
//! 2 on usage, configuration or spec errors. All angles are in radians.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use quasispin::gcs::{Family, GcsContext, Orbit};
use quasispin::geomphase::{geometric_phase_closed, geometric_phase_orbit, solid_angle, ClosedPhase, SpherePath};
use quasispin::io::{parse_real, to_json, MixedSpec, StateArtifact, StateSpec, SCHEMA_VERSION};
use quasispin::polarization::build_polarization_ops;
use quasispin::quasiprob::{q_complete, q_reduced, q_reduced_closed, GridSpec, QClosed, QGrid};
use quasispin::squeezing::{squeeze_report, SqueezeReport};
use quasispin::verify::{run_verify, VerifyConfig};
use quasispin::{Error, FockBasis, HalfInt, QuantumState, Tolerances};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "quasispin", version, about = "Polarization quasispin toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Number of spatiotemporal modes.
    #[arg(long, global = true, default_value_t = 1)]
    m: usize,
    /// Total photon-number cutoff.
    #[arg(long = "nmax", global = true, default_value_t = 8)]
    n_max: usize,
    /// Largest norm allowed to leak past the cutoff.
    #[arg(long, global = true)]
    tol_tail: Option<f64>,
    /// Convergence threshold of the geometric-phase refinement.
    #[arg(long, global = true)]
    tol_conv: Option<f64>,
    /// Seed of the randomized suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Q-function grid as THETAxPHI node counts.
    #[arg(long, global = true, default_value = "64x128")]
    grid: String,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// State spec: a JSON file, JSON text or the inline form family(key=value,...).
    #[arg(long, global = true)]
    spec: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and write a JSON report.
    Verify,
    /// Build a state and write its amplitudes or density matrix.
    State,
    /// Q-function grid as CSV, with a JSON sidecar next to --out.
    Qfunc {
        /// Reduced Q-function of this quasispin sector.
        #[arg(long, conflicts_with = "reference", required_unless_present = "reference")]
        p: Option<String>,
        /// Complete Q-function over the orbit of this spec.
        #[arg(long = "ref")]
        reference: Option<String>,
        /// State artifact written by `state`, instead of --spec.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Variances, uncertainty relations and squeezing classification.
    Squeeze {
        /// State artifact written by `state`, instead of --spec.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Geometric phase of the orbit of --spec around a loop.
    Phase {
        /// `circle:theta=V[,k=K]`, `lune:phi1=V,phi2=V[,k=K]` or a CSV file of theta,phi rows.
        #[arg(long = "loop")]
        path: String,
        /// Largest number of steps the refinement may reach.
        #[arg(long)]
        k_cap: Option<usize>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure { code: 2, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::SpecInvalid { .. }
            | Error::ParamInvalid(_)
            | Error::LabelInvalid(_)
            | Error::PathInvalid(_)
            | Error::DimensionOverflow { .. }
            | Error::BadModeIndex { .. }
            | Error::CutoffExceeded { .. }
            | Error::FamilyUnsupported(_) => 2,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

struct RunConfig {
    m: usize,
    n_max: usize,
    seed: u64,
    tol: Tolerances,
    grid: GridSpec,
    out: Option<PathBuf>,
    spec: Option<String>,
}

impl RunConfig {
    fn from_global(g: Global) -> Result<RunConfig, Failure> {
        if g.m < 1 {
            return Err(Failure::usage("m must be ≥ 1"));
        }
        let mut tol = Tolerances::default();
        for (name, v, slot) in [("tol-tail", g.tol_tail, &mut tol.tail), ("tol-conv", g.tol_conv, &mut tol.convergence)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Failure::usage(format!("{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        let (nt, np) = g
            .grid
            .split_once(['x', 'X'])
            .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
            .ok_or_else(|| Failure::usage(format!("grid must look like 64x128, got {:?}", g.grid)))?;
        let grid = GridSpec::new(nt, np)?;
        Ok(RunConfig { m: g.m, n_max: g.n_max, seed: g.seed, tol, grid, out: g.out, spec: g.spec })
    }

    fn context(&self) -> Result<GcsContext, Failure> {
        let basis = FockBasis::build_with_limit(self.m, self.n_max, self.tol.max_dim)?;
        Ok(GcsContext::with_tolerances(&basis, self.tol)?)
    }

    fn spec(&self) -> Result<StateSpec, Failure> {
        let text = self.spec.as_deref().ok_or_else(|| Failure::usage("--spec is required"))?;
        load_spec(text)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        write_out(self.out.as_deref(), text)
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure { code: 1, msg: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_spec(text: &str) -> Result<StateSpec, Failure> {
    let p = Path::new(text);
    if p.is_file() {
        return Ok(StateSpec::parse(&read_file(p)?)?);
    }
    Ok(StateSpec::parse(text)?)
}

/// The state to analyse: a stored artifact when given, else --spec built on the configured basis.
fn load_state(cfg: &RunConfig, artifact: Option<&Path>) -> Result<(QuantumState, Option<StateSpec>), Failure> {
    match artifact {
        Some(path) => {
            let art: StateArtifact = serde_json::from_str(&read_file(path)?)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok((art.to_state()?, art.spec))
        }
        None => {
            let spec = cfg.spec()?;
            let ctx = cfg.context()?;
            Ok((spec.build(&ctx)?, Some(spec)))
        }
    }
}

fn cmd_verify(cfg: &RunConfig) -> Outcome {
    let report = run_verify(&VerifyConfig { m: cfg.m, n_max: cfg.n_max, seed: cfg.seed, tol: cfg.tol })?;
    cfg.emit(&to_json(&report))?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    eprintln!("{} of {} checks passed", report.checks.len() - failed.len(), report.checks.len());
    for name in &failed {
        eprintln!("FAILED: {name}");
    }
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_state(cfg: &RunConfig) -> Outcome {
    let spec = cfg.spec()?;
    let ctx = cfg.context()?;
    cfg.emit(&to_json(&StateArtifact::from_spec(&spec, &ctx)?))?;
    Ok(0)
}

/// Closed form of the reduced Q-function when the state has one.
fn q_closed_form(spec: Option<&StateSpec>, m: usize) -> Option<QClosed> {
    match spec? {
        StateSpec::Mixed(MixedSpec::Thermal { beta }) => Some(QClosed::Thermal { beta: *beta }),
        StateSpec::Gcs(g) if g.family == Family::SemiCoherent => {
            let (p, mu, _, _) = g.labels().ok()?;
            Some(QClosed::Semi { p, mu, theta: g.theta, phi: g.phi })
        }
        StateSpec::Gcs(g) if g.family == Family::Glauber && m == 2 => {
            let (ap, am) = (g.alpha_plus.as_ref()?, g.alpha_minus.as_ref()?);
            Some(QClosed::GlauberM2 {
                alpha_plus: [ap[0].0, ap[1].0],
                alpha_minus: [am[0].0, am[1].0],
                theta: g.theta,
                phi: g.phi,
            })
        }
        _ => None,
    }
}

fn closed_error(grid: &QGrid, closed: &QClosed, p: HalfInt) -> Result<f64, Failure> {
    let mut worst: f64 = 0.0;
    for (i, &t) in grid.theta.iter().enumerate() {
        for (j, &ph) in grid.phi.iter().enumerate() {
            worst = worst.max((grid.values[(i, j)] - q_reduced_closed(closed, p, t, ph)?).abs());
        }
    }
    Ok(worst)
}

fn cmd_qfunc(cfg: &RunConfig, p: Option<&str>, reference: Option<&str>, artifact: Option<&Path>) -> Outcome {
    let (state, spec) = load_state(cfg, artifact)?;
    let basis: Arc<FockBasis> = state.basis().clone();
    let ctx = GcsContext::with_tolerances(&basis, cfg.tol)?;
    let mut meta = json!({
        "schema_version": SCHEMA_VERSION,
        "spec": spec,
        "m": basis.m(),
        "n_max": basis.n_max(),
        "grid": cfg.grid,
        "quadrature": "Gauss-Legendre in cos(theta) x uniform phi",
    });
    let grid = match (p, reference) {
        (Some(p), _) => {
            let p = HalfInt::from_f64(parse_real(p)?)?;
            let grid = q_reduced(&state, p, &ctx, cfg.grid)?;
            meta["p"] = json!(p);
            meta["sector_weight"] = json!(grid.sector_weight());
            if let Some(closed) = q_closed_form(spec.as_ref(), basis.m()) {
                meta["closed_form_max_error"] = json!(closed_error(&grid, &closed, p)?);
            }
            grid
        }
        (None, Some(r)) => {
            let rspec = load_spec(r)?;
            let g = rspec.gcs().ok_or_else(|| Failure::usage("--ref must be a coherent-state spec"))?;
            g.validate(basis.m())?;
            let orbit = Orbit::of_spec(g, &ctx)?;
            meta["reference"] = json!(rspec);
            q_complete(&state, &orbit, cfg.grid)?
        }
        (None, None) => return Err(Failure::usage("qfunc needs --p or --ref")),
    };
    meta["integral"] = json!(grid.integral());
    meta["min"] = json!(grid.min());
    meta["max"] = json!(grid.max());
    cfg.emit(&grid.to_csv())?;
    if let Some(out) = &cfg.out {
        write_out(Some(&out.with_extension("json")), &to_json(&meta))?;
    }
    Ok(0)
}

fn cmd_squeeze(cfg: &RunConfig, artifact: Option<&Path>) -> Outcome {
    let (state, spec) = load_state(cfg, artifact)?;
    let ops = build_polarization_ops(state.basis())?;
    let report: SqueezeReport = squeeze_report(&state, &ops, &cfg.tol)?;
    cfg.emit(&to_json(&json!({ "schema_version": SCHEMA_VERSION, "spec": spec, "report": report })))?;
    Ok(0)
}

fn cmd_phase(cfg: &RunConfig, path_arg: &str, k_cap: Option<usize>) -> Outcome {
    let spec = cfg.spec()?;
    let g = spec.gcs().ok_or_else(|| Failure::usage("phase needs a coherent-state spec"))?;
    let p = Path::new(path_arg);
    let path = if p.is_file() { SpherePath::from_csv(&read_file(p)?)? } else { SpherePath::from_descriptor(path_arg)? };
    let mut tol = cfg.tol;
    if let Some(k) = k_cap {
        tol.k_cap = k;
    }
    let ctx = cfg.context()?;
    g.validate(cfg.m)?;
    let orbit = Orbit::of_spec(g, &ctx)?;
    let r = geometric_phase_orbit(&orbit, &path, &tol);
    let closed: Option<ClosedPhase> = match geometric_phase_closed(g, &path) {
        Ok(c) => Some(c),
        Err(Error::FamilyUnsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let out: Value = json!({
        "schema_version": SCHEMA_VERSION,
        "spec": spec,
        "loop": path_arg,
        "gamma_principal": r.gamma_principal,
        "winding": r.winding,
        "gamma_total": r.gamma_total,
        "K_final": r.k_final,
        "converged": r.converged,
        "last_change": r.last_change,
        "closed": closed,
        "solid_angle": solid_angle(&path),
    });
    cfg.emit(&to_json(&out))?;
    if !r.converged {
        eprintln!("no convergence after K = {} steps (last change {:e})", r.k_final, r.last_change);
        return Ok(1);
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    let cfg = RunConfig::from_global(cli.global)?;
    match &cli.cmd {
        Command::Verify => cmd_verify(&cfg),
        Command::State => cmd_state(&cfg),
        Command::Qfunc { p, reference, state } => cmd_qfunc(&cfg, p.as_deref(), reference.as_deref(), state.as_deref()),
        Command::Squeeze { state } => cmd_squeeze(&cfg, state.as_deref()),
        Command::Phase { path, k_cap } => cmd_phase(&cfg, path, *k_cap),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
