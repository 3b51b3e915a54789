//! The `sandwich` command line.
//!
//! Exit codes: 0 on success, 1 when a model, domain or validation check fails,
//! 2 on usage or configuration parse errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{collect_samples, ConvergenceReport};
use crate::config::{load_config, OutputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::io::{write_atomic, write_csv, write_json};
use crate::model::{max_mesh, validate_assumptions, CheckMethod, MeshLimit};
use crate::noise::{
    covariance_matrix, GaussianDriverSpec, HurstFn, NoiseGenerator, NoiseMethod, NoiseMethodChoice, TimeGrid,
};
use crate::solver::{check_sandwich, simulate, SandwichReport, StepperChoice, StepperKind};

#[derive(Debug, Parser)]
#[command(name = "sandwich", version, about = "Drift-implicit Euler simulation of sandwiched SDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the model assumptions and print the admissible mesh.
    Validate(Common),
    /// Simulate sample paths and write one file per path plus a manifest.
    Simulate(SimulateArgs),
    /// Dump a noise path on the configured grid.
    Noise(NoiseArgs),
    /// Nested-grid strong-error study with a fitted rate.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StepperArg {
    Auto,
    Closed,
    Generic,
}

impl From<StepperArg> for StepperChoice {
    fn from(s: StepperArg) -> Self {
        match s {
            StepperArg::Auto => StepperChoice::Auto,
            StepperArg::Closed => StepperChoice::ClosedForm,
            StepperArg::Generic => StepperChoice::Generic,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Relative residual tolerance of each implicit step.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub stepper: Option<StepperArg>,
    /// Run even if the mesh condition fails.
    #[arg(long)]
    pub unsafe_mesh: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of paths; seeds are `seed, seed+1, …`.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Add a residual column to CSV paths.
    #[arg(long)]
    pub residuals: bool,
    /// Also write a gnuplot script.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DriverArg {
    Brownian,
    Fbm,
    Mbm,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Driver kind when no config is given.
    #[arg(long, value_enum)]
    pub kind: Option<DriverArg>,
    /// Hurst index for `fbm` or constant `mbm`.
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Grid steps when no config is given.
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    /// Horizon when no config is given.
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Also dump the covariance matrix of Z(t_1..t_N).
    #[arg(long)]
    pub cov: bool,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Cholesky,
    Circulant,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated coarse grid sizes.
    #[arg(long, value_delimiter = ',')]
    pub meshes: Option<Vec<usize>>,
    /// Reference grid size.
    #[arg(long = "ref")]
    pub reference: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    /// Moment order.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub gnuplot: bool,
}

/// Parses `std::env::args` and runs.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Validate(a) => cmd_validate(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Noise(a) => cmd_noise(&a),
        Command::Convergence(a) => cmd_convergence(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<RunConfig> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = load_config(path)?;
    if let Some(s) = common.seed {
        cfg.raw.run.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.raw.run.tol = t;
    }
    if let Some(s) = common.stepper {
        cfg.raw.run.stepper = s.into();
    }
    if common.unsafe_mesh {
        cfg.raw.run.unsafe_mesh = true;
    }
    if let Some(f) = common.format {
        cfg.raw.output.format = match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(o) = &common.out {
        cfg.raw.output.dir = Some(o.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.raw.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    kind: crate::model::SandwichKind,
    all_pass: bool,
    entries: &'a [crate::model::CheckEntry],
    mesh: &'a MeshLimit,
    delta: f64,
}

pub fn cmd_validate(args: &Common) -> Result<u8> {
    let cfg = load(args)?;
    let report = validate_assumptions(&cfg.model);
    let pass = report.all_pass();
    if matches!(cfg.raw.output.format, OutputFormat::Json) {
        let out = ValidateOutput {
            kind: report.kind,
            all_pass: pass,
            entries: &report.entries,
            mesh: &report.mesh,
            delta: report.delta,
        };
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        for e in &report.entries {
            let status = match (e.passed, e.method) {
                (true, CheckMethod::Exact) => "pass",
                (true, CheckMethod::SpotChecked) => "pass (spot-checked)",
                (false, _) => "FAIL",
            };
            let name = format!("({}) {}", e.code, e.label);
            println!("{name:<32} {status:<20} {}", e.detail);
        }
        println!(
            "max mesh Δ_max = {:e} (binding: {:?}), configured Δ_N = {:e}",
            report.mesh.delta_max, report.mesh.binding, report.delta
        );
    }
    Ok(if pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct PathEntry {
    seed: u64,
    file: String,
    max_residual: f64,
    min: f64,
    max: f64,
    sandwich: SandwichReport,
    wall_seconds: f64,
}

#[derive(Serialize)]
struct SimulateManifest<'a> {
    config: &'a crate::config::RawConfig,
    stepper: StepperKind,
    noise_method: NoiseMethod,
    noise_setup_seconds: f64,
    mesh: MeshLimit,
    paths: Vec<PathEntry>,
    all_strict: bool,
    mean_wall_seconds: f64,
}

/// Removes files written by a failed command.
struct Cleanup(Vec<PathBuf>);

impl Cleanup {
    fn disarm(&mut self) {
        self.0.clear();
    }
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        for p in &self.0 {
            let _ = std::fs::remove_file(p);
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let mut cfg = load(&args.common)?;
    if let Some(p) = args.paths {
        cfg.raw.run.paths = p;
    }
    if args.residuals {
        cfg.raw.output.residuals = true;
    }
    let dir = out_dir(&cfg);
    let opts = cfg.simulate_options();
    let model = &cfg.model;
    let t0 = Instant::now();
    let generator = NoiseGenerator::new(&cfg.noise, &model.grid(), cfg.noise_method)?;
    let setup = t0.elapsed().as_secs_f64();
    let json = matches!(cfg.raw.output.format, OutputFormat::Json);
    let mut cleanup = Cleanup(Vec::new());
    let mut entries = Vec::new();
    let mut stepper = None;
    for i in 0..cfg.raw.run.paths {
        let seed = cfg.raw.run.seed.wrapping_add(i as u64);
        let start = Instant::now();
        let noise = generator.sample(seed);
        let path = simulate(model, &noise, &opts).map_err(|e| Error::Path {
            seed,
            n: model.grid_points(),
            source: Box::new(e),
        })?;
        let wall = start.elapsed().as_secs_f64();
        stepper = Some(path.stepper);
        let report = check_sandwich(&path, model, Some(&noise));
        let name = format!("path_{seed}.{}", if json { "json" } else { "csv" });
        let file = dir.join(&name);
        cleanup.0.push(file.clone());
        if json {
            write_json(&file, &path)?;
        } else if cfg.raw.output.residuals {
            let rows = (0..path.values.len()).map(|k| {
                let r = if k == 0 { 0.0 } else { path.residuals[k - 1] };
                [path.grid.time(k), path.values[k], r]
            });
            write_csv(&file, &["t", "y", "residual"], rows)?;
        } else {
            let rows = (0..path.values.len()).map(|k| [path.grid.time(k), path.values[k]]);
            write_csv(&file, &["t", "y"], rows)?;
        }
        let (min, max) = path
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !report.strict {
            log::error!("path {seed} leaves the sandwich at indices {:?}", report.first_violations);
        }
        entries.push(PathEntry {
            seed,
            file: name,
            max_residual: path.max_residual(),
            min,
            max,
            sandwich: report,
            wall_seconds: wall,
        });
    }
    let all_strict = entries.iter().all(|e| e.sandwich.strict);
    let mean_wall = entries.iter().map(|e| e.wall_seconds).sum::<f64>() / entries.len().max(1) as f64;
    let manifest = SimulateManifest {
        config: &cfg.raw,
        stepper: stepper.unwrap_or(opts.stepper.resolve(model.drift())?),
        noise_method: generator.method(),
        noise_setup_seconds: setup,
        mesh: max_mesh(model),
        paths: entries,
        all_strict,
        mean_wall_seconds: mean_wall,
    };
    let manifest_path = dir.join("manifest.json");
    cleanup.0.push(manifest_path.clone());
    write_json(&manifest_path, &manifest)?;
    if args.gnuplot && !json {
        let script = dir.join("plot.gp");
        cleanup.0.push(script.clone());
        let files: Vec<String> = manifest.paths.iter().map(|p| p.file.clone()).collect();
        write_gnuplot_paths(&script, &files)?;
    }
    cleanup.disarm();
    println!(
        "wrote {} paths to {} (all strictly sandwiched: {all_strict}, mean time per path {mean_wall:.6} s)",
        manifest.paths.len(),
        dir.display()
    );
    Ok(if all_strict { 0 } else { 1 })
}

fn write_gnuplot_paths(script: &Path, files: &[String]) -> Result<()> {
    write_atomic(script, |w| {
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key off")?;
        writeln!(w, "set xlabel 't'")?;
        let plots: Vec<String> = files
            .iter()
            .map(|f| format!("'{f}' every ::1 using 1:2 with lines"))
            .collect();
        writeln!(w, "plot {}", plots.join(", \\\n     "))
    })
}


fn noise_spec_from_flags(args: &NoiseArgs) -> Result<(GaussianDriverSpec, TimeGrid)> {
    let grid = TimeGrid::new(args.horizon, args.steps)?;
    let need_h = || {
        args.hurst
            .ok_or_else(|| Error::Config("--hurst is required for this driver".into()))
    };
    let spec = match args.kind {
        None => return Err(Error::Config("either --config or --kind is required".into())),
        Some(DriverArg::Brownian) => GaussianDriverSpec::brownian(),
        Some(DriverArg::Fbm) => GaussianDriverSpec::fbm(need_h()?)?,
        Some(DriverArg::Mbm) => GaussianDriverSpec::mbm(HurstFn::constant(need_h()?)),
    };
    Ok((spec, grid))
}

pub fn cmd_noise(args: &NoiseArgs) -> Result<u8> {
    let (spec, grid, seed, dir, mut method, json) = if args.common.config.is_some() {
        let cfg = load(&args.common)?;
        let json = matches!(cfg.raw.output.format, OutputFormat::Json);
        (cfg.noise.clone(), cfg.model.grid(), cfg.raw.run.seed, out_dir(&cfg), cfg.noise_method, json)
    } else {
        let (spec, grid) = noise_spec_from_flags(args)?;
        let dir = args.common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        let json = matches!(args.common.format, Some(FormatArg::Json));
        (spec, grid, args.common.seed.unwrap_or(0), dir, NoiseMethodChoice::Auto, json)
    };
    if let Some(m) = args.method {
        method = match m {
            MethodArg::Auto => NoiseMethodChoice::Auto,
            MethodArg::Cholesky => NoiseMethodChoice::Cholesky,
            MethodArg::Circulant => NoiseMethodChoice::Circulant,
        };
    }
    let path = NoiseGenerator::new(&spec, &grid, method)?.sample(seed);
    let file = dir.join(if json { "noise.json" } else { "noise.csv" });
    if json {
        write_json(&file, &path)?;
    } else {
        let rows = (0..=grid.steps()).map(|k| [grid.time(k), path.values[k]]);
        write_csv(&file, &["t", "z"], rows)?;
    }
    if args.cov {
        let c = covariance_matrix(&spec, &grid)?;
        let header: Vec<String> = (1..=grid.steps()).map(|k| format!("c{k}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&dir.join("covariance.csv"), &header, c.iter())?;
    }
    println!("wrote {} ({:?}, seed {seed})", file.display(), path.method);
    Ok(0)
}

#[derive(Serialize)]
struct ConvergenceOutput<'a> {
    report: &'a ConvergenceReport,
    wall_seconds: f64,
}

pub fn cmd_convergence(args: &ConvergenceArgs) -> Result<u8> {
    let cfg = load(&args.common)?;
    let mut raw_study = cfg.raw.study.clone().unwrap_or(crate::config::StudySection {
        meshes: vec![64, 128, 256, 512, 1024],
        reference_n: 16384,
        paths: 100,
        r: 1.0,
        seed_base: 0,
    });
    if let Some(m) = &args.meshes {
        raw_study.meshes = m.clone();
    }
    if let Some(r) = args.reference {
        raw_study.reference_n = r;
    }
    if let Some(p) = args.paths {
        raw_study.paths = p;
    }
    if let Some(r) = args.r {
        raw_study.r = r;
    }
    if let Some(s) = args.common.seed {
        raw_study.seed_base = s;
    }
    let mut cfg = cfg;
    cfg.raw.study = Some(raw_study);
    let spec = cfg.study_spec()?;
    let dir = out_dir(&cfg);
    let start = Instant::now();
    let samples = collect_samples(&spec)?;
    let report = samples.summarize(spec.r);
    let wall = start.elapsed().as_secs_f64();

    let mut cleanup = Cleanup(Vec::new());
    let json_path = dir.join("report.json");
    cleanup.0.push(json_path.clone());
    write_json(
        &json_path,
        &ConvergenceOutput {
            report: &report,
            wall_seconds: wall,
        },
    )?;
    let csv_path = dir.join("convergence.csv");
    cleanup.0.push(csv_path.clone());
    let nan = f64::NAN;
    write_csv(
        &csv_path,
        &["N", "delta", "mean_err", "stderr"],
        report
            .per_mesh
            .iter()
            .map(|m| [m.n as f64, m.delta, m.mean_err, m.stderr.unwrap_or(nan)]),
    )?;
    let plot_path = dir.join("loglog.csv");
    cleanup.0.push(plot_path.clone());
    write_csv(
        &plot_path,
        &["log_delta", "log_err"],
        report
            .per_mesh
            .iter()
            .map(|m| [m.delta.ln(), m.mean_err.ln() / report.r]),
    )?;
    if args.gnuplot {
        let script = dir.join("loglog.gp");
        cleanup.0.push(script.clone());
        write_atomic(&script, |w| {
            writeln!(w, "set datafile separator ','")?;
            writeln!(w, "set xlabel 'log delta'")?;
            writeln!(w, "set ylabel 'log error'")?;
            writeln!(w, "plot 'loglog.csv' every ::1 using 1:2 with linespoints title 'slope {:.4}'", report.slope)
        })?;
    }
    cleanup.disarm();
    let se = report
        .slope_stderr
        .map_or_else(|| "unavailable".to_string(), |s| format!("{s:.4}"));
    println!(
        "fitted slope {:.4} (jackknife stderr {se}), expected λ = {:.4}, {} paths in {wall:.1} s",
        report.slope, report.lambda_expected, report.paths
    );
    Ok(0)
}
