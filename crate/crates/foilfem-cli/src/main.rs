//! Command-line driver: build the configured model, run solves/sweeps/
//! comparisons and write deterministic output files plus a machine-readable
//! run manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver error, 4 I/O error.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use config::{Config, ConfigError};
use foilfem::mesh::SymmetryMode;
use foilfem::postprocess::{self, ImpedancePoint, SweepRow};
use foilfem::presets::FoilWindingModel;
use foilfem::solver::{solve_frequency, sweep, Drive, ModelKind, SolveError};
use foilfem::{homogenization, oracle};

#[derive(Parser)]
#[command(
    name = "foilfem",
    about = "Frequency-domain finite-element simulation of homogenized foil windings",
    version
)]
struct Cli {
    /// Path to the TOML configuration file.
    #[arg(short, long, global = true, default_value = "foilfem.toml")]
    config: PathBuf,
    /// Output directory override (also: FOILFEM_OUT environment variable).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single frequency and report the impedance.
    Solve {
        /// Frequency in Hz (0 = DC).
        #[arg(long)]
        freq: f64,
    },
    /// Run the configured frequency sweep and write the impedance spectrum.
    Sweep,
    /// Solve one frequency and write voltage/current profiles and flux contours.
    Profiles {
        #[arg(long)]
        freq: f64,
        /// Number of flux contour levels per field part.
        #[arg(long, default_value_t = 12)]
        levels: usize,
    },
    /// Cross-validate the homogenized model against the resolved-turn ladder
    /// network (desk-scale turn counts only).
    OracleCompare,
    /// Write all assembled matrices in Matrix Market format.
    DumpMatrices,
}

enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    // sequential factorizations keep outputs byte-identical between runs;
    // sweeps parallelize across frequencies instead
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(4)
        }
    }
}

struct Run {
    cfg: Config,
    model: FoilWindingModel,
    out_dir: PathBuf,
    t_build: f64,
    manifest_results: String,
    outputs: Vec<String>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = Config::from_path(&cli.config)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("FOILFEM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    std::fs::create_dir_all(&out_dir)?;

    let t0 = Instant::now();
    let model = cfg.build_model()?;
    let t_build = t0.elapsed().as_secs_f64();
    for w in model.winding.assumption_warnings() {
        eprintln!("warning: {w}");
    }

    let mut run = Run {
        cfg,
        model,
        out_dir,
        t_build,
        manifest_results: String::new(),
        outputs: Vec::new(),
    };

    let t_run = Instant::now();
    let command_name = match &cli.command {
        Command::Solve { freq } => {
            cmd_solve(&mut run, *freq)?;
            "solve".to_string()
        }
        Command::Sweep => {
            cmd_sweep(&mut run)?;
            "sweep".to_string()
        }
        Command::Profiles { freq, levels } => {
            cmd_profiles(&mut run, *freq, *levels)?;
            "profiles".to_string()
        }
        Command::OracleCompare => {
            cmd_oracle_compare(&mut run)?;
            "oracle-compare".to_string()
        }
        Command::DumpMatrices => {
            cmd_dump_matrices(&mut run)?;
            "dump-matrices".to_string()
        }
    };
    write_manifest(&run, &command_name, &cli.config, t_run.elapsed().as_secs_f64())?;
    Ok(())
}

fn drive_of(cfg: &Config) -> Drive {
    let amp = Complex64::new(cfg.drive.amplitude, 0.0);
    match cfg.drive.kind.as_str() {
        "voltage" => Drive::Voltage(amp),
        _ => Drive::Current(amp),
    }
}

fn warn_skin_depth(model: &FoilWindingModel, f: f64) {
    if f <= 0.0 {
        return;
    }
    let mu_c = 1.0 / model.materials.nu_c;
    if let Ok(delta) = homogenization::skin_depth(f, mu_c, model.materials.sigma_c) {
        let d_c = model.winding.d_c();
        if d_c >= delta {
            eprintln!(
                "warning: at {f} Hz the conductor thickness {d_c:.2e} m is not small against \
                 the skin depth {delta:.2e} m; the thin-foil assumption is violated"
            );
        }
    }
}

fn cmd_solve(run: &mut Run, freq: f64) -> Result<(), CliError> {
    warn_skin_depth(&run.model, freq);
    let drive = drive_of(&run.cfg);
    for (label, kind) in run.cfg.models() {
        let sol = solve_frequency(&run.model.system, std::f64::consts::TAU * freq, drive, kind)?;
        let z = sol.impedance()?;
        let pt = ImpedancePoint { f_hz: freq, z };
        println!(
            "{label}: f = {freq} Hz, Z = {} + {}i Ω, |Z| = {} Ω, phase = {}°",
            z.re,
            z.im,
            pt.magnitude(),
            pt.phase_deg()
        );
        let _ = writeln!(
            run.manifest_results,
            "[results.{label}]\nf_hz = {freq}\nz_re_ohm = {}\nz_im_ohm = {}\nz_abs_ohm = {}\nz_phase_deg = {}\nu_re_v = {}\nu_im_v = {}\ni_re_a = {}\ni_im_a = {}",
            z.re,
            z.im,
            pt.magnitude(),
            pt.phase_deg(),
            sol.terminal_voltage.re,
            sol.terminal_voltage.im,
            sol.terminal_current.re,
            sol.terminal_current.im,
        );
    }
    Ok(())
}

fn cmd_sweep(run: &mut Run) -> Result<(), CliError> {
    let freqs = run.cfg.sweep_frequencies();
    warn_skin_depth(&run.model, *freqs.last().unwrap());
    let drive = drive_of(&run.cfg);
    let mut rows: Vec<(f64, &'static str, Complex64)> = Vec::new();
    let mut failures = 0usize;
    for (label, kind) in run.cfg.models() {
        let result = sweep(&run.model.system, &freqs, drive, kind)?;
        failures += result.failures();
        for p in &result.points {
            if let Ok(sol) = &p.outcome {
                if let Ok(z) = sol.impedance() {
                    rows.push((p.f_hz, label, z));
                }
            }
        }
    }
    rows.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).unwrap());
    let csv_rows: Vec<SweepRow> = rows
        .iter()
        .map(|&(f_hz, model, z)| SweepRow {
            f_hz,
            model,
            z,
        })
        .collect();
    let path = run.out_dir.join("sweep.csv");
    let mut file = std::fs::File::create(&path)?;
    postprocess::write_sweep_csv(&mut file, &csv_rows)?;
    run.outputs.push("sweep.csv".into());
    println!(
        "sweep: {} frequencies × {} model(s) → {} ({} failures)",
        freqs.len(),
        run.cfg.models().len(),
        path.display(),
        failures
    );
    let _ = writeln!(
        run.manifest_results,
        "[results.sweep]\npoints = {}\nfailures = {failures}\nf_min_hz = {}\nf_max_hz = {}",
        freqs.len(),
        freqs.first().unwrap(),
        freqs.last().unwrap()
    );
    if failures > 0 {
        return Err(CliError::Solver(format!(
            "{failures} sweep points failed; partial results preserved in sweep.csv"
        )));
    }
    Ok(())
}

fn cmd_profiles(run: &mut Run, freq: f64, levels: usize) -> Result<(), CliError> {
    warn_skin_depth(&run.model, freq);
    let drive = drive_of(&run.cfg);
    let ctx = run.model.post_context();
    let samples = postprocess::default_sample_points(&run.model.basis, 100);
    for (label, kind) in run.cfg.models() {
        let sol = solve_frequency(&run.model.system, std::f64::consts::TAU * freq, drive, kind)?;

        let phi = postprocess::voltage_profile(&run.model.basis, &sol, &samples)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let name = format!("voltage_profile_{label}.csv");
        let mut f = std::fs::File::create(run.out_dir.join(&name))?;
        postprocess::write_voltage_profile_csv(&mut f, &samples, &phi)?;
        run.outputs.push(name);

        let profiles = postprocess::current_profiles(&ctx, &sol, &samples)
            .map_err(|e| CliError::Solver(e.to_string()))?;
        let name = format!("current_profiles_{label}.csv");
        let mut f = std::fs::File::create(run.out_dir.join(&name))?;
        postprocess::write_current_profiles_csv(&mut f, &profiles)?;
        run.outputs.push(name);

        let re_field: Vec<f64> = sol.field.iter().map(|c| c.re).collect();
        let im_field: Vec<f64> = sol.field.iter().map(|c| c.im).collect();
        let re_contours = postprocess::flux_contours(&run.model.mesh, &re_field, levels);
        let im_contours = postprocess::flux_contours(&run.model.mesh, &im_field, levels);
        let name = format!("contours_{label}.csv");
        let mut f = std::fs::File::create(run.out_dir.join(&name))?;
        postprocess::write_contours_csv(
            &mut f,
            &[("re", &re_contours[..]), ("im", &im_contours[..])],
        )?;
        run.outputs.push(name);

        let z = sol.impedance()?;
        let _ = writeln!(
            run.manifest_results,
            "[results.{label}]\nf_hz = {freq}\nz_re_ohm = {}\nz_im_ohm = {}",
            z.re, z.im
        );
        println!("{label}: profiles at {freq} Hz written");
    }
    Ok(())
}

fn cmd_oracle_compare(run: &mut Run) -> Result<(), CliError> {
    let model = &run.model;
    let n = model.winding.turns();
    if n > 20 {
        return Err(CliError::Config(format!(
            "oracle-compare resolves every turn and is desk-scale only (N ≤ 20, got {n})"
        )));
    }
    let SymmetryMode::Cartesian2D { length } = model.symmetry else {
        return Err(CliError::Config(
            "oracle-compare supports the Cartesian geometry only".into(),
        ));
    };
    let margin = run
        .cfg
        .geometry
        .margin
        .ok_or_else(|| CliError::Config("oracle-compare needs [geometry] margin".into()))?;
    let center = model.winding.rect().center();

    let params = oracle::ResolvedTurnParams {
        turns: n,
        thickness: model.winding.thickness(),
        height: model.winding.height(),
        fill_factor: model.winding.fill_factor(),
        margin,
        center,
        target_h: run.cfg.geometry.target_h,
    };
    let (rmesh, turns) = oracle::resolved_turn_mesh(&params)
        .map_err(|e| CliError::Config(format!("resolved-turn mesh: {e}")))?;
    let l = oracle::magnetostatic_inductances(&rmesh, &turns, &model.symmetry, 1.0 / foilfem::MU_0)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let mut l_sym = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            l_sym[i][j] = 0.5 * (l[i][j] + l[j][i]);
        }
    }
    let r_turn = length / (model.materials.sigma_c * model.winding.d_c() * model.winding.height());
    let caps = oracle::interturn_capacitances(&model.winding, &model.symmetry, model.materials.eps_i);
    let net = oracle::LadderNetwork {
        resistances: vec![r_turn; n],
        capacitances: caps,
        inductance: l_sym,
    };
    net.validate()
        .map_err(|e| CliError::Solver(e.to_string()))?;

    let freqs = run.cfg.sweep_frequencies();
    let mut csv = String::from("f_hz,z_abs_homogenized_ohm,z_abs_ladder_ohm,rel_diff\n");
    let mut max_rel = 0.0f64;
    for &f in &freqs {
        let sol = solve_frequency(
            &model.system,
            std::f64::consts::TAU * f,
            Drive::Current(Complex64::ONE),
            ModelKind::Capacitive,
        )?;
        let z_h = sol.impedance()?.norm();
        let z_l = oracle::ladder_impedance(&net, std::f64::consts::TAU * f)
            .map_err(|e| CliError::Solver(e.to_string()))?
            .norm();
        let rel = (z_h - z_l).abs() / z_l;
        max_rel = max_rel.max(rel);
        let _ = writeln!(csv, "{f},{z_h},{z_l},{rel}");
    }
    std::fs::write(run.out_dir.join("oracle_compare.csv"), csv)?;
    run.outputs.push("oracle_compare.csv".into());
    println!(
        "oracle-compare: {} frequencies, max relative |Z| difference {max_rel:.4e}",
        freqs.len()
    );
    let _ = writeln!(
        run.manifest_results,
        "[results.oracle_compare]\nturns = {n}\nladder_r_total_ohm = {}\nmax_rel_z_diff = {max_rel}",
        r_turn * n as f64
    );
    Ok(())
}

fn cmd_dump_matrices(run: &mut Run) -> Result<(), CliError> {
    let sys = &run.model.system;
    let blocks: [(&str, &foilfem::sparse::CsrMatrix); 6] = [
        ("field_stiffness.mtx", &sys.stiffness),
        ("field_mass.mtx", &sys.mass),
        ("coupling.mtx", &sys.coupling),
        ("winding_conductance.mtx", &sys.conductance),
        ("winding_cap_gradient.mtx", &sys.cap_grad),
        ("winding_cap_mass.mtx", &sys.cap_mass),
    ];
    for (name, matrix) in blocks {
        let mut f = std::fs::File::create(run.out_dir.join(name))?;
        matrix.write_matrix_market(&mut f)?;
        run.outputs.push(name.to_string());
    }
    for (name, vector) in [
        ("turn_weights.mtx", &sys.turn_weights),
        ("source.mtx", &sys.source),
    ] {
        let mut f = std::fs::File::create(run.out_dir.join(name))?;
        foilfem::sparse::write_vector_matrix_market(vector, &mut f)?;
        run.outputs.push(name.to_string());
    }
    let dirichlet: String = sys
        .dirichlet
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(run.out_dir.join("dirichlet_nodes.txt"), dirichlet + "\n")?;
    run.outputs.push("dirichlet_nodes.txt".into());
    println!(
        "dump-matrices: {} blocks written to {}",
        run.outputs.len(),
        run.out_dir.display()
    );
    Ok(())
}

fn write_manifest(
    run: &Run,
    command: &str,
    config_path: &Path,
    t_run: f64,
) -> Result<(), CliError> {
    let mut m = String::new();
    let _ = writeln!(m, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "command = \"{command}\"");
    let _ = writeln!(m, "config_path = {:?}", config_path.display().to_string());
    let _ = writeln!(m, "mesh_elements = {}", run.model.mesh.triangle_count());
    let _ = writeln!(m, "mesh_nodes = {}", run.model.mesh.node_count());
    let _ = writeln!(m, "spline_count = {}", run.model.basis.len());
    let _ = writeln!(m, "build_seconds = {}", run.t_build);
    let _ = writeln!(m, "run_seconds = {t_run}");
    let _ = writeln!(m, "outputs = {:?}", run.outputs);
    let _ = writeln!(m);
    let _ = writeln!(m, "{}", run.manifest_results);
    let _ = writeln!(m, "[config_echo]");
    let echo = toml::to_string(&run.cfg).map_err(|e| CliError::Io(e.to_string()))?;
    for line in echo.lines() {
        if let Some(inner) = line.strip_prefix("[[").and_then(|l| l.strip_suffix("]]")) {
            let _ = writeln!(m, "[[config_echo.{inner}]]");
        } else if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let _ = writeln!(m, "[config_echo.{inner}]");
        } else {
            let _ = writeln!(m, "{line}");
        }
    }
    std::fs::write(run.out_dir.join("manifest.toml"), m)?;
    Ok(())
}
