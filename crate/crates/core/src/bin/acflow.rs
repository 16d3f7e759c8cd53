use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use acflow::acsolver::{simulate, write_field, write_points_csv, Grid};
use acflow::flow::{signed_distance, simulate_front, simulate_level_set, FrontCurve, LevelSetOptions};
use acflow::harness::{
    composed_ansatz, front_mobility, generation_run, main_contour, propagation_sweep, shape_distance,
    ExperimentConfig, ProfileBank, VALIDATION_TOL,
};
use acflow::mobility::tabulate_mobility;
use acflow::model::{EDerivative, ModelConfig, ModelSpec};
use acflow::profile::solve_standing_wave;
use acflow::shape::Shape;
use acflow::{Error, Result};

#[derive(Parser)]
#[command(name = "acflow", version, about = "Anisotropic Allen-Cahn solvers and sharp-interface experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model (or experiment) file and print the report as JSON.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Standing wave along a direction, as CSV `z,u0,u0z`.
    Profile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,0")]
        e: Vec<f64>,
        #[arg(long, default_value_t = 12.0)]
        zmax: f64,
        #[arg(long, default_value_t = 1e-3)]
        hz: f64,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
    /// Mobility table, as CSV `theta,lambda,mu11,mu12,mu21,mu22`.
    Mobility {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 256)]
        angles: usize,
        #[arg(long)]
        ambient: bool,
        #[arg(long, default_value = "mobility.csv")]
        out: PathBuf,
    },
    /// Phase-field run from the standing wave composed with a shape.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Overrides the model's epsilon.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        tend: f64,
        #[arg(long, value_delimiter = ',')]
        snapshots: Vec<f64>,
        #[arg(long, default_value = "circle:R=0.25")]
        shape: Shape,
        #[arg(long, default_value = "run")]
        out_prefix: PathBuf,
    },
    /// Limit flow by front tracking or by the level-set method.
    Flow {
        #[arg(long, value_enum, default_value_t = Mode::Front)]
        mode: Mode,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "circle:R=0.25")]
        shape: Shape,
        #[arg(long)]
        tend: f64,
        /// Markers for front tracking.
        #[arg(long, default_value_t = 256)]
        markers: usize,
        /// Grid for the level-set method.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value = "curve.csv")]
        out: PathBuf,
    },
    /// Propagation sweep over eps against the front-tracked limit.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip field and contour dumps.
        #[arg(long)]
        no_dump: bool,
    },
    /// Generation experiment over eps.
    Generation {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Front,
    Levelset,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::NonBistable(_)
        | Error::NotElliptic { .. }
        | Error::EquipotentialViolated { .. }
        | Error::NotUnit { .. }
        | Error::DimensionMismatch { .. } => 3,
        _ => 2,
    }
}

fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let spec = ModelConfig::from_json(&text)?.build()?;
    spec.validate(VALIDATION_TOL, 0)?.check()?;
    Ok(spec)
}

fn load_experiment(path: &Path, eps: Option<Vec<f64>>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(eps) = eps {
        cfg.eps = eps;
    }
    if let Some(out) = out {
        cfg.out = out;
    }
    Ok(cfg)
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Validate { config, seed, out } => {
            let text =
                std::fs::read_to_string(&config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            let report = match ModelConfig::from_json(&text) {
                Ok(m) => m.build()?.validate(VALIDATION_TOL, seed)?,
                Err(_) => {
                    let exp = ExperimentConfig::load(&config)?.validate()?;
                    exp.spec.validate(VALIDATION_TOL, seed)?
                }
            };
            let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            println!("{json}");
            if let Some(out) = out {
                std::fs::write(out, json + "\n")?;
            }
            report.check()?;
            Ok(true)
        }
        Command::Profile { config, e, zmax, hz, out } => {
            let spec = load_model(&config)?;
            let p = solve_standing_wave(&spec, &e, zmax, hz)?;
            p.write_csv(&out)?;
            println!("{} points, decay rate {:.6}", p.len(), p.decay_rate);
            Ok(true)
        }
        Command::Mobility { config, angles, ambient, out } => {
            let spec = load_model(&config)?;
            let conv = if ambient { EDerivative::Ambient } else { EDerivative::Tangential };
            let tensor = tabulate_mobility(&spec, angles, conv)?;
            let table = tensor.table().expect("tabulated");
            table.write_csv(&out)?;
            println!("{} angles written to {}", table.angles(), out.display());
            Ok(true)
        }
        Command::Simulate {
            config,
            grid,
            eps,
            tend,
            snapshots,
            shape,
            out_prefix,
        } => {
            let spec = load_model(&config)?;
            let spec = eps.map_or(spec.clone(), |e| spec.with_epsilon(e));
            let grid = Grid::new(grid)?;
            if grid.h() > spec.epsilon / 4.0 {
                eprintln!("warning: h = {} does not resolve eps = {}", grid.h(), spec.epsilon);
            }
            let bank = ProfileBank::new(&spec, 64)?;
            let u0 = composed_ansatz(&bank, &shape_distance(&shape, grid)?, spec.epsilon);
            let level = spec.reaction.alpha_mid;
            for u in simulate(&u0, &spec, tend, &snapshots)? {
                let prefix = PathBuf::from(format!("{}_t{}", out_prefix.display(), u.t));
                write_field(&u, spec.epsilon, &prefix)?;
                match main_contour(&u, level) {
                    Ok(c) => write_points_csv(&c, &PathBuf::from(format!("{}_contour.csv", prefix.display())))?,
                    Err(Error::NoContour { .. }) => eprintln!("t = {}: no interface", u.t),
                    Err(e) => return Err(e),
                }
                println!("t = {:.6e}  min {:.6}  max {:.6}", u.t, u.min(), u.max());
            }
            Ok(true)
        }
        Command::Flow {
            mode,
            config,
            shape,
            tend,
            markers,
            grid,
            out,
        } => {
            let spec = load_model(&config)?;
            let mob = front_mobility(&spec, EDerivative::Tangential)?;
            let c0 = FrontCurve::from_shape(&shape, markers)?;
            let curve = match mode {
                Mode::Front => simulate_front(&c0, mob.as_ref(), tend, tend / 100.0, &[], |_| Ok(()))?
                    .pop()
                    .expect("final curve"),
                Mode::Levelset => {
                    let d0 = signed_distance(&c0, Grid::new(grid)?)?;
                    let d = simulate_level_set(&d0, mob.as_ref(), tend, &LevelSetOptions::default())?;
                    let prefix = out.with_extension("");
                    write_field(&d.field, spec.epsilon, &prefix)?;
                    d.zero_front()?
                }
            };
            write_points_csv(&curve.points, &out)?;
            println!("t = {:.6e}  area {:.6e}  markers {}", curve.t, curve.signed_area(), curve.len());
            Ok(true)
        }
        Command::Converge {
            config,
            eps,
            out,
            no_dump,
        } => {
            let exp = load_experiment(&config, eps, out)?.validate()?;
            let report = propagation_sweep(&exp, !no_dump)?;
            report.write(&exp.config.out)?;
            for r in &report.rows {
                println!("eps {:<8} hausdorff {:.4e}  C_p {:.3}", r.eps, r.hausdorff, r.c_p_hat);
            }
            match report.fit {
                Some(f) => println!("order p = {:.3}", f.p),
                None => println!("order p = n/a"),
            }
            Ok(report.pass)
        }
        Command::Generation { config, eps, out } => {
            let exp = load_experiment(&config, eps, out)?.validate()?;
            let report = generation_run(&exp)?;
            report.write(&exp.config.out)?;
            for r in &report.rows {
                println!("eps {:<8} t_eps {:.5e}  [{:.5}, {:.5}]  M0 {:.3}", r.eps, r.t_eps, r.min, r.max, r.m0_hat);
            }
            if let Err(e) = report.check() {
                eprintln!("{e}");
            }
            Ok(report.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("experiment failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
