//! `strainreal`: construct and verify isotropically realizable 2D strain
//! fields for the incompressible Stokes equation.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 hypothesis violation
//! (e.g. vanishing strain at the center, M + M^T = 0), 64 usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use strainreal_core::casebook;
use strainreal_core::expr::parse_expression;
use strainreal_core::grid::{Grid2D, ScalarGrid};
use strainreal_core::laminate;
use strainreal_core::local::{assemble_local_realization, LocalRealizeConfig};
use strainreal_core::stokes::{realization_residual, symbolic_stokes_residual, ViscositySpec};
use strainreal_core::wave::{
    amplitude_sweep, realize_global, GlobalConfig, GlobalOutcome, SweepConfig,
};
use strainreal_core::{fd, Error as CoreError, Matrix2, VelocityField};

#[derive(Parser, Debug)]
#[command(name = "strainreal", version, about)]
struct Cli {
    /// Directory artifacts are written into
    #[arg(long, default_value = ".", global = true)]
    out_dir: PathBuf,
    /// Seed recorded in the run configuration (used by randomized probes)
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// JSON file whose keys stand in for unset flags of the subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a field expression (and optionally a derivative) to CSV
    Fields(FieldsArgs),
    /// Build a viscosity realizing a prescribed strain
    #[command(subcommand)]
    Realize(RealizeCmd),
    /// Canonical wave-equation studies
    #[command(subcommand)]
    Wave(WaveCmd),
    /// Two-phase rank-one laminate decisions
    #[command(subcommand)]
    Laminate(LaminateCmd),
    /// Worked singular examples
    #[command(subcommand)]
    Casebook(CasebookCmd),
    /// Evaluate the Stokes residual of a given viscosity and stream
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct FieldsArgs {
    /// Field expression in x, y
    #[arg(long)]
    expr: String,
    /// Sampling window "x0,y0,x1,y1"
    #[arg(long, default_value = "-1,-1,1,1")]
    grid: String,
    #[arg(long, default_value_t = 33)]
    nx: usize,
    #[arg(long, default_value_t = 33)]
    ny: usize,
    /// x-derivative order applied before sampling
    #[arg(long, default_value_t = 0)]
    dx: u32,
    /// y-derivative order applied before sampling
    #[arg(long, default_value_t = 0)]
    dy: u32,
    /// Artifact base name
    #[arg(long, default_value = "field")]
    name: String,
}

#[derive(Subcommand, Debug)]
enum RealizeCmd {
    /// Local construction around a point with nonvanishing strain
    Local(RealizeLocalArgs),
    /// Quasi-global construction for periodic perturbations of an affine field
    Global(RealizeGlobalArgs),
}

#[derive(Args, Debug)]
struct RealizeLocalArgs {
    /// Stream function of the velocity field
    #[arg(long)]
    stream: String,
    /// Center point "x,y"
    #[arg(long, default_value = "0,0")]
    center: String,
    /// Cap on the half-width of the output square
    #[arg(long)]
    tau_max: Option<f64>,
    /// Grid points per side at the dyadic cap (odd)
    #[arg(long, default_value_t = 129)]
    nx: usize,
    /// Disk radius for the coefficient construction
    #[arg(long, default_value_t = 1.0)]
    omega_radius: f64,
}

#[derive(Args, Debug)]
struct RealizeGlobalArgs {
    /// Stream function of the velocity field
    #[arg(long)]
    stream: String,
    /// Average gradient "m11,m12,m21,m22" (trace-free)
    #[arg(long)]
    average: String,
    /// Disk radius
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Scale applied to the periodic part of the stream
    #[arg(long, default_value_t = 1.0)]
    epsilon_scale: f64,
    /// Lattice step of the wave solve and output grid
    #[arg(long, default_value_t = 1.0 / 64.0)]
    dz: f64,
    /// Fourier cutoff per axis
    #[arg(long, default_value_t = 32)]
    cutoff: usize,
}

#[derive(Subcommand, Debug)]
enum WaveCmd {
    /// Amplitude sweep of the synthetic blow-up system
    Sweep(WaveSweepArgs),
}

#[derive(Args, Debug)]
struct WaveSweepArgs {
    /// Amplitude range "a0:a1:steps"
    #[arg(long)]
    amplitudes: String,
    /// Quadratic-gradient coefficient of the synthetic system
    #[arg(long, default_value_t = 4.0)]
    b0: f64,
    #[arg(long, default_value_t = 6.0)]
    t_max: f64,
    #[arg(long, default_value_t = 8.0)]
    z_max: f64,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    dz: f64,
}

#[derive(Subcommand, Debug)]
enum LaminateCmd {
    /// Decide realizability of a two-phase rank-one laminate
    Check(LaminateCheckArgs),
}

#[derive(Args, Debug)]
struct LaminateCheckArgs {
    /// Phase 1 "a,b,c,d" (row-major 2x2)
    #[arg(long = "E1")]
    e1: String,
    /// Phase 2 "a,b,c,d"
    #[arg(long = "E2")]
    e2: String,
    /// Lamination direction "x,y" (unit)
    #[arg(long)]
    xi: String,
}

#[derive(Subcommand, Debug)]
enum CasebookCmd {
    /// Torus obstruction and the sign-convention audit for the periodic
    /// counterexample
    Counterexample(CounterexampleArgs),
    /// Vanishing-strain family with separated variables
    Vanishing(VanishingArgs),
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[arg(long)]
    epsilon: f64,
    /// Flux line half-offset, in (0, 1/2)
    #[arg(long)]
    r: f64,
    /// Candidate viscosity (positive, 1-periodic in x)
    #[arg(long)]
    mu: String,
    #[arg(long, default_value_t = 65)]
    nx: usize,
}

#[derive(Args, Debug)]
struct VanishingArgs {
    /// Profile in x (or a univariate expression)
    #[arg(long)]
    f: String,
    /// Profile in y (or a univariate expression)
    #[arg(long)]
    g: String,
    #[arg(long, default_value_t = 65)]
    nx: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    stream: String,
    /// Viscosity expression (positive on the window)
    #[arg(long)]
    mu: String,
    #[arg(long, default_value = "-1,-1,1,1")]
    grid: String,
    #[arg(long, default_value_t = 65)]
    nx: usize,
    /// Extra random probe points comparing the two pipelines
    #[arg(long, default_value_t = 0)]
    probes: usize,
}

fn main() -> ExitCode {
    let argv = merge_config_args(std::env::args().collect::<Vec<_>>());
    let argv = match argv {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(64);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are successful exits
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };

    init_thread_pool();
    let started = Instant::now();
    let result = run(&cli, &argv);
    eprintln!("[strainreal] finished in {:?}", started.elapsed());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                CoreError::Hypothesis(_) => ExitCode::from(2),
                CoreError::Parse { .. } | CoreError::Invalid(_) => ExitCode::from(64),
                _ => ExitCode::from(1),
            }
        }
    }
}

/// Cap the worker pool from STRAINREAL_THREADS when set.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("STRAINREAL_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Inject values from `--config file.json` for flags absent on the command
/// line (identical key names, without the leading dashes).
fn merge_config_args(argv: Vec<String>) -> Result<Vec<String>, String> {
    let pos = argv.iter().position(|a| a == "--config");
    let Some(pos) = pos else { return Ok(argv) };
    let path = argv
        .get(pos + 1)
        .ok_or_else(|| "--config requires a file path".to_string())?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?;
    let json: Value =
        serde_json::from_str(&text).map_err(|e| format!("config {path} is not valid JSON: {e}"))?;
    let obj = json
        .as_object()
        .ok_or_else(|| format!("config {path} must be a JSON object"))?;
    let mut out = argv.clone();
    for (key, value) in obj {
        let flag = format!("--{key}");
        if out.iter().any(|a| a == &flag) {
            continue;
        }
        let rendered = match value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        out.push(flag);
        out.push(rendered);
    }
    Ok(out)
}

fn run(cli: &Cli, argv: &[String]) -> Result<(), CoreError> {
    std::fs::create_dir_all(&cli.out_dir)?;
    write_config_echo(cli, argv)?;
    match &cli.command {
        Command::Fields(a) => cmd_fields(cli, a),
        Command::Realize(RealizeCmd::Local(a)) => cmd_realize_local(cli, a),
        Command::Realize(RealizeCmd::Global(a)) => cmd_realize_global(cli, a),
        Command::Wave(WaveCmd::Sweep(a)) => cmd_wave_sweep(cli, a),
        Command::Laminate(LaminateCmd::Check(a)) => cmd_laminate_check(cli, a),
        Command::Casebook(CasebookCmd::Counterexample(a)) => cmd_counterexample(cli, a),
        Command::Casebook(CasebookCmd::Vanishing(a)) => cmd_vanishing(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

// ---------------------------------------------------------------------------
// helpers
// ---------------------------------------------------------------------------

fn parse_csv_numbers(text: &str, n: usize, what: &str) -> Result<Vec<f64>, CoreError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(CoreError::Invalid(format!(
            "{what} expects {n} comma-separated numbers, got `{text}`"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| CoreError::Invalid(format!("{what}: `{p}` is not a number")))
        })
        .collect()
}

fn parse_grid_spec(text: &str, nx: usize, ny: usize) -> Result<Grid2D, CoreError> {
    let v = parse_csv_numbers(text, 4, "--grid")?;
    Grid2D::new(v[0], v[1], v[2], v[3], nx, ny)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CoreError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn write_config_echo(cli: &Cli, argv: &[String]) -> Result<(), CoreError> {
    let mut obj = Map::new();
    obj.insert("argv".into(), json!(argv[1..].to_vec()));
    obj.insert("seed".into(), json!(cli.seed));
    obj.insert("out_dir".into(), json!(cli.out_dir.display().to_string()));
    obj.insert("version".into(), json!(strainreal_core::VERSION));
    write_json(&cli.out_dir, "config.echo.json", &Value::Object(obj))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_fields(cli: &Cli, a: &FieldsArgs) -> Result<(), CoreError> {
    let expr = parse_expression(&a.expr)?;
    let grid = parse_grid_spec(&a.grid, a.nx, a.ny)?;
    let mut derived = expr.clone();
    for _ in 0..a.dx {
        derived = derived.d(strainreal_core::Var::X);
    }
    for _ in 0..a.dy {
        derived = derived.d(strainreal_core::Var::Y);
    }
    let sampled = ScalarGrid::from_fn(grid, |x, y| derived.eval(x, y));

    // cross-check the symbolic derivative against finite differences of the
    // base field on a padded window
    let max_residual = if a.dx + a.dy > 0 {
        let padded = grid.padded(3);
        let mut base = ScalarGrid::from_fn(padded, |x, y| expr.eval(x, y));
        for _ in 0..a.dx {
            base = fd::ddx(&base);
        }
        for _ in 0..a.dy {
            base = fd::ddy(&base);
        }
        let mut worst = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let v = base.get(i + 3, j + 3);
                worst = worst.max((v - sampled.get(i, j)).abs());
            }
        }
        worst
    } else {
        0.0
    };

    sampled.write_csv(&cli.out_dir.join(format!("{}.csv", a.name)))?;
    sampled.write_gnuplot(&cli.out_dir.join(format!("{}.dat", a.name)))?;
    let report = json!({
        "command": "fields",
        "expr": a.expr,
        "derivative": {"dx": a.dx, "dy": a.dy},
        "nx": a.nx,
        "ny": a.ny,
        "max_residual": max_residual,
        "version": strainreal_core::VERSION,
    });
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_realize_local(cli: &Cli, a: &RealizeLocalArgs) -> Result<(), CoreError> {
    let stream = parse_expression(&a.stream)?;
    let center = parse_csv_numbers(&a.center, 2, "--center")?;
    let cfg = LocalRealizeConfig {
        center: (center[0], center[1]),
        tau_max: a.tau_max,
        nx: a.nx,
        omega_radius: a.omega_radius,
    };
    let real = assemble_local_realization(&stream, &cfg)?;
    real.mu.write_csv(&cli.out_dir.join("mu.csv"))?;
    real.mu.write_gnuplot(&cli.out_dir.join("mu.dat"))?;
    real.p.write_csv(&cli.out_dir.join("p.csv"))?;
    real.p.write_gnuplot(&cli.out_dir.join("p.dat"))?;
    let mut report = to_value(&real.report);
    let obj = report.as_object_mut().unwrap();
    obj.insert("command".into(), json!("realize local"));
    obj.insert("orientation".into(), to_value(&real.coeffs.orientation));
    obj.insert("speed_bound_c".into(), json!(real.coeffs.c));
    obj.insert("nx".into(), json!(a.nx));
    obj.insert("version".into(), json!(strainreal_core::VERSION));
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_realize_global(cli: &Cli, a: &RealizeGlobalArgs) -> Result<(), CoreError> {
    let stream = parse_expression(&a.stream)?;
    let m = parse_csv_numbers(&a.average, 4, "--average")?;
    let m = Matrix2::new(m[0], m[1], m[2], m[3]);
    let cfg = GlobalConfig {
        radius: a.radius,
        epsilon_scale: a.epsilon_scale,
        dz: a.dz,
        cutoff: a.cutoff,
    };
    match realize_global(&stream, m, &cfg)? {
        GlobalOutcome::Realized(real) => {
            real.mu.write_csv(&cli.out_dir.join("mu.csv"))?;
            real.mu.write_gnuplot(&cli.out_dir.join("mu.dat"))?;
            real.u.write_csv(&cli.out_dir.join("u.csv"))?;
            real.u.write_gnuplot(&cli.out_dir.join("u.dat"))?;
            let mut report = to_value(&real.report);
            let obj = report.as_object_mut().unwrap();
            obj.insert("command".into(), json!("realize global"));
            obj.insert("version".into(), json!(strainreal_core::VERSION));
            write_json(&cli.out_dir, "report.json", &report)
        }
        GlobalOutcome::BlowUp {
            lifespan,
            reason,
            report,
        } => {
            let mut report = to_value(&report);
            let obj = report.as_object_mut().unwrap();
            obj.insert("command".into(), json!("realize global"));
            obj.insert("version".into(), json!(strainreal_core::VERSION));
            obj.insert("blowup_reason".into(), json!(reason));
            obj.insert(
                "note".into(),
                json!(
                    "finite lifespan before the needed horizon: realizability \
                     is not established on this disk (this is not a proof of \
                     non-realizability)"
                ),
            );
            write_json(&cli.out_dir, "report.json", &report)?;
            eprintln!(
                "[strainreal] wave solution blew up at |t| = {lifespan:.4}; \
                 realizability not established"
            );
            Ok(())
        }
    }
}

fn cmd_wave_sweep(cli: &Cli, a: &WaveSweepArgs) -> Result<(), CoreError> {
    let parts: Vec<&str> = a.amplitudes.split(':').collect();
    if parts.len() != 3 {
        return Err(CoreError::Invalid(format!(
            "--amplitudes expects a0:a1:steps, got `{}`",
            a.amplitudes
        )));
    }
    let a0: f64 = parts[0]
        .parse()
        .map_err(|_| CoreError::Invalid("bad a0".into()))?;
    let a1: f64 = parts[1]
        .parse()
        .map_err(|_| CoreError::Invalid("bad a1".into()))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CoreError::Invalid("bad step count".into()))?;
    let cfg = SweepConfig {
        b0: a.b0,
        t_max: a.t_max,
        z_max: a.z_max,
        dz: a.dz,
    };
    let rows = amplitude_sweep(a0, a1, steps, &cfg);
    let mut csv = String::from("amplitude,blowup,lifespan\n");
    for r in &rows {
        csv.push_str(&format!(
            "{:.16e},{},{:.16e}\n",
            r.amplitude, r.blowup, r.lifespan
        ));
    }
    std::fs::write(cli.out_dir.join("lifespan.csv"), csv)?;
    let threshold = rows.iter().find(|r| r.blowup).map(|r| r.amplitude);
    let report = json!({
        "command": "wave sweep",
        "amplitudes": a.amplitudes,
        "b0": a.b0,
        "t_max": a.t_max,
        "dz": a.dz,
        "threshold": threshold,
        "max_residual": 0.0,
        "version": strainreal_core::VERSION,
    });
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_laminate_check(cli: &Cli, a: &LaminateCheckArgs) -> Result<(), CoreError> {
    let e1 = parse_csv_numbers(&a.e1, 4, "--E1")?;
    let e2 = parse_csv_numbers(&a.e2, 4, "--E2")?;
    let xi = parse_csv_numbers(&a.xi, 2, "--xi")?;
    let e1 = Matrix2::new(e1[0], e1[1], e1[2], e1[3]);
    let e2 = Matrix2::new(e2[0], e2[1], e2[2], e2[3]);
    let xi = (xi[0], xi[1]);

    let lambda = laminate::strain_compatibility(&e1, &e2, xi)?;
    let realizable = laminate::is_realizable(&e1, &e2);
    let mut report = json!({
        "command": "laminate check",
        "compatible": true,
        "lambda": lambda,
        "realizable": realizable,
        "mu_ratio": Value::Null,
        "mu1": Value::Null,
        "mu2": Value::Null,
        "pressure_jump": Value::Null,
        "max_residual": 0.0,
        "version": strainreal_core::VERSION,
    });
    if realizable {
        let r = laminate::realize_laminate(&e1, &e2, xi)?;
        let obj = report.as_object_mut().unwrap();
        obj.insert("mu_ratio".into(), json!(r.mu1 / r.mu2));
        obj.insert("mu1".into(), json!(r.mu1));
        obj.insert("mu2".into(), json!(r.mu2));
        obj.insert("pressure_jump".into(), json!(r.pressure_jump));
        let cross = laminate::interface_cross_component(&e1, &e2, xi, r.mu1 / r.mu2);
        obj.insert("max_residual".into(), json!(cross.abs()));
    }
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_counterexample(cli: &Cli, a: &CounterexampleArgs) -> Result<(), CoreError> {
    let mu = parse_expression(&a.mu)?;
    let obstruction = casebook::torus_obstruction(&mu, a.epsilon, a.r)?;

    // residual pair for u = log(mu) against the printed and general
    // equations, plus the standing audit at this epsilon
    let u = mu.log().simplify();
    let grid = Grid2D::new(-0.5, -0.5, 0.5, 0.5, a.nx, a.nx)?;
    let pair = casebook::printed_wave_residual(&u, a.epsilon, &grid)?;
    let audit = casebook::sign_convention_audit(a.epsilon, &grid)?;

    let instance = casebook::CounterexampleInstance::new(a.epsilon)?;
    let direct = realization_residual(
        &ViscositySpec::Symbolic(mu.clone()),
        &instance.velocity,
        &grid,
    )?;

    let report = json!({
        "command": "casebook counterexample",
        "epsilon": a.epsilon,
        "r": a.r,
        "mu": a.mu,
        "obstruction": obstruction,
        "printed_residual_sup": pair.printed.max_abs,
        "general_residual_sup": pair.general.max_abs,
        "direct_residual_sup": direct.symbolic.as_ref().map(|r| r.max_abs),
        "max_residual": direct.fd.max_abs,
        "audit": to_value(&audit),
        "version": strainreal_core::VERSION,
    });
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_vanishing(cli: &Cli, a: &VanishingArgs) -> Result<(), CoreError> {
    let f = parse_expression(&a.f)?;
    let g = parse_expression(&a.g)?;
    let v = casebook::vanishing_viscosity(&f, &g)?;

    let (verdict, realizable, reason): (&str, Value, Value) = match &v.verdict {
        casebook::VanishingVerdict::Realizable { .. } => ("realizable", json!(true), Value::Null),
        casebook::VanishingVerdict::NotRealizable { reason } => {
            ("not_realizable", json!(false), json!(reason))
        }
        casebook::VanishingVerdict::Inconclusive { reason } => {
            ("inconclusive", Value::Null, json!(reason))
        }
    };

    let mut residual = Value::Null;
    let mut max_residual = 0.0;
    if matches!(v.verdict, casebook::VanishingVerdict::Realizable { .. }) {
        let grid = Grid2D::square(1.0, a.nx)?;
        let mu = v.mu_grid(&grid);
        mu.write_csv(&cli.out_dir.join("mu.csv"))?;
        mu.write_gnuplot(&cli.out_dir.join("mu.dat"))?;
        // Div(mu e) = (2y, 2x) exactly for the constructed viscosity
        let e12 = ScalarGrid::from_fn(grid, |x, y| v.family.strain.e12.eval(x, y));
        let s12 = ScalarGrid {
            grid,
            values: mu
                .values
                .iter()
                .zip(&e12.values)
                .map(|(m, e)| m * e)
                .collect(),
        };
        let zero = ScalarGrid::zeros(grid);
        let (d1, d2) = fd::div_symmetric_tracefree(&zero, &s12);
        let mut worst = 0.0f64;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = (grid.x(i), grid.y(j));
                worst = worst
                    .max((d1.get(i, j) - 2.0 * y).abs())
                    .max((d2.get(i, j) - 2.0 * x).abs());
            }
        }
        max_residual = worst;
        residual = json!(worst);
    }

    let report = json!({
        "command": "casebook vanishing",
        "f": a.f,
        "g": a.g,
        "exponents": [v.fit_f.exponent, v.fit_g.exponent],
        "coefficients": [v.fit_f.coefficient, v.fit_g.coefficient],
        "verdict": verdict,
        "realizable": realizable,
        "reason": reason,
        "residual": residual,
        "max_residual": max_residual,
        "origin_value": v.origin_value,
        "version": strainreal_core::VERSION,
    });
    write_json(&cli.out_dir, "report.json", &report)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<(), CoreError> {
    let stream = parse_expression(&a.stream)?;
    let mu = parse_expression(&a.mu)?;
    let grid = parse_grid_spec(&a.grid, a.nx, a.nx)?;
    let velocity = VelocityField::from_stream(&stream);
    let res = realization_residual(&ViscositySpec::Symbolic(mu.clone()), &velocity, &grid)?;
    res.fd_grid.write_csv(&cli.out_dir.join("residual.csv"))?;

    // seeded random probes comparing the two pipelines pointwise
    let mut probes = Vec::new();
    if a.probes > 0 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
        let sym = symbolic_stokes_residual(&mu, &velocity);
        for _ in 0..a.probes {
            let x = rng.gen_range(grid.x0..grid.x1);
            let y = rng.gen_range(grid.y0..grid.y1);
            probes.push(json!({"x": x, "y": y, "symbolic": sym.eval(x, y)}));
        }
    }

    let report = json!({
        "command": "verify",
        "stream": a.stream,
        "mu": a.mu,
        "max_residual": res.fd.max_abs,
        "l2": res.fd.l2,
        "symbolic_max_residual": res.symbolic.as_ref().map(|r| r.max_abs),
        "symbolic_l2": res.symbolic.as_ref().map(|r| r.l2),
        "probes": probes,
        "version": strainreal_core::VERSION,
    });
    write_json(&cli.out_dir, "report.json", &report)
}
