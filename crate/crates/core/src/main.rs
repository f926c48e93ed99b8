//! Command-line driver for the surgery laboratory.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;

use qcsurgery::curve::{read_curve_csv, write_curve_csv, JordanCurve};
use qcsurgery::harness::conical::write_conical_report;
use qcsurgery::harness::{
    detect_conical, detect_conical_auto, find_misiurewicz_cubic, resolve_map,
    run_instability_experiment, ExperimentConfig, ExperimentOutcome,
};
use qcsurgery::lift::lift_curve;
use qcsurgery::moduli::{grid_modulus, round_modulus, AnnulusRegion};
use qcsurgery::rational::{write_orbit_csv, DEFAULT_ESCAPE_RADIUS, DEFAULT_HORIZON};
use qcsurgery::surgery::build_blend;
use qcsurgery::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qcsurgery",
    about = "Desk-scale quasiconformal surgery experiments on polynomial dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a forward orbit and write it as CSV
    Orbit {
        /// preset name (misiurewicz-cubic, z2, z2p4, z2m2) or cubic:A,B / quad:c / poly:c0,c1,...
        #[arg(long)]
        map: String,
        /// starting point as `re` or `re,im`
        #[arg(long)]
        z0: String,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = DEFAULT_ESCAPE_RADIUS)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Escape census: critical points whose orbits reach the escape radius
    Census {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, default_value_t = DEFAULT_ESCAPE_RADIUS)]
        radius: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Lift a circle (or a curve CSV) through the map
    Lift {
        #[arg(long)]
        map: String,
        /// circle center `re` or `re,im` (ignored with --curve)
        #[arg(long, default_value = "0")]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 128)]
        vertices: usize,
        /// base curve CSV with columns re,im (overrides --center/--radius)
        #[arg(long)]
        curve: Option<PathBuf>,
        /// starting preimage `re` or `re,im`; defaults to a fiber point
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Modulus of a ring: closed form for round rings plus a grid estimate
    Modulus {
        /// inner radius of the round ring
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// outer radius of the round ring
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// inner boundary curve CSV (with --outer replaces the round ring)
        #[arg(long)]
        inner: Option<PathBuf>,
        #[arg(long)]
        outer: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// write the discrete potential as CSV (columns i, j, value)
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Blend-map diagnostics: dilatation sup-norm and optional grid dump
    Surgery {
        /// ring thickness parameter in (0, 1)
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Single-depth surgery + straightening on a preset
    Straighten {
        #[arg(long, default_value = "misiurewicz-cubic")]
        map: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Disk-pullback degree certificate along an orbit
    DetectConical {
        #[arg(long)]
        map: String,
        /// base point as `re` or `re,im`
        #[arg(long)]
        x0: String,
        /// disk radius; omitted means automatic with retries
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 2)]
        dmax: usize,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Search for cubics whose bounded critical orbit lands on a repelling fixed point
    FindParams {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 192)]
        seeds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Full instability experiment; exit code 2 when the hypotheses do not apply
    Experiment {
        /// flat key = value config file; flags below override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// comma-separated pullback depths, e.g. 1,2,3
        #[arg(long)]
        depth: Option<String>,
        #[arg(long)]
        render: bool,
    },
}

fn parse_complex(text: &str) -> Result<Complex64> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [re] => Ok(Complex64::new(
            re.parse().map_err(|_| Error::Config(format!("bad real part `{re}`")))?,
            0.0,
        )),
        [re, im] => Ok(Complex64::new(
            re.parse().map_err(|_| Error::Config(format!("bad real part `{re}`")))?,
            im.parse().map_err(|_| Error::Config(format!("bad imaginary part `{im}`")))?,
        )),
        _ => Err(Error::Config(format!("expected `re` or `re,im`, got `{text}`"))),
    }
}

fn load_map(spec: &str, seed: u64) -> Result<qcsurgery::rational::RationalMap> {
    let defaults = ExperimentConfig::default();
    let (map, label) = resolve_map(spec, defaults.search_k, defaults.search_seeds, seed)?;
    println!("map = {label}");
    Ok(map)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Orbit {
            map,
            z0,
            horizon,
            radius,
            out,
            seed,
        } => {
            let map = load_map(&map, seed)?;
            let z0 = parse_complex(&z0)?;
            let orbit = map.iterate_orbit(z0, horizon, radius);
            println!("samples = {}", orbit.samples.len());
            println!("escaped = {}", orbit.escaped);
            if let Some(i) = orbit.escape_index {
                println!("escape_index = {i}");
            }
            match out {
                Some(path) => {
                    let target = resolve_out(path, "orbit.csv")?;
                    write_orbit_csv(&orbit, std::fs::File::create(&target)?)?;
                    println!("wrote {}", target.display());
                }
                None => write_orbit_csv(&orbit, std::io::stdout().lock())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            map,
            horizon,
            radius,
            seed,
        } => {
            let map = load_map(&map, seed)?;
            let census = map.escape_census(horizon, radius)?;
            for (c, escaped) in &census.verdicts {
                println!(
                    "critical_point = {:.12e} {:+.12e}i  escapes = {escaped}",
                    c.re, c.im
                );
            }
            println!("s = {}", census.count);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lift {
            map,
            center,
            radius,
            vertices,
            curve,
            start,
            out,
            seed,
        } => {
            let map = load_map(&map, seed)?;
            let base = match curve {
                Some(path) => read_curve_csv(std::io::BufReader::new(std::fs::File::open(path)?))?,
                None => JordanCurve::circle(parse_complex(&center)?, radius, vertices),
            };
            let start = match start {
                Some(text) => parse_complex(&text)?,
                None => map.distinct_preimages(base.vertices()[0])?[0],
            };
            let lift = lift_curve(&map, &base, start)?;
            println!("covering_degree = {}", lift.covering_degree);
            println!("base_laps = {}", lift.base_laps);
            println!("lift_vertices = {}", lift.curve.len());
            if let Some(path) = out {
                let target = resolve_out(path, "lift.csv")?;
                write_curve_csv(&lift.curve, std::fs::File::create(&target)?)?;
                println!("wrote {}", target.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Modulus {
            p,
            q,
            inner,
            outer,
            resolution,
            potential,
        } => {
            let region = match (inner, outer) {
                (Some(inner), Some(outer)) => {
                    let inner = read_curve_csv(std::io::BufReader::new(std::fs::File::open(inner)?))?;
                    let outer = read_curve_csv(std::io::BufReader::new(std::fs::File::open(outer)?))?;
                    AnnulusRegion::new(outer, inner)?
                }
                (None, None) => {
                    println!("round_modulus = {:.12e}", round_modulus(p, q)?);
                    AnnulusRegion::round(p, q, 512)
                }
                _ => {
                    return Err(Error::Config(
                        "--inner and --outer must be given together".into(),
                    ))
                }
            };
            let estimate = grid_modulus(&region, resolution)?;
            println!("grid_modulus = {:.12e}", estimate.value);
            println!("resolution = {}", estimate.resolution);
            println!("error_bound = {:.12e}", estimate.error_bound);
            if let Some(path) = potential {
                let target = resolve_out(path, "potential.csv")?;
                qcsurgery::moduli::write_potential_csv(
                    &region,
                    resolution,
                    std::fs::File::create(&target)?,
                )?;
                println!("wrote {}", target.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Surgery { p, resolution, out } => {
            let blend = build_blend(p, resolution)?;
            println!("p = {p}");
            println!("a = {:.12e}", blend.a());
            println!("dilatation_sup = {:.12e}", blend.sup_norm());
            if let Some(path) = out {
                let target = resolve_out(path, "blend_dilatation.grid")?;
                qcsurgery::grid::write_beltrami(
                    blend.dilatation_field(),
                    std::fs::File::create(&target)?,
                )?;
                println!("wrote {}", target.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Straighten {
            map,
            depth,
            resolution,
            seed,
            out,
        } => {
            let config = ExperimentConfig {
                map,
                depths: vec![depth],
                resolution,
                seed,
                ..ExperimentConfig::default()
            };
            let bundle = run_instability_experiment(&config, out.as_deref())?;
            print!("{}", bundle.report_text());
            Ok(outcome_code(bundle.outcome))
        }
        Command::DetectConical {
            map,
            x0,
            delta,
            dmax,
            horizon,
            out,
            seed,
        } => {
            let map = load_map(&map, seed)?;
            let x0 = parse_complex(&x0)?;
            let cert = match delta {
                Some(delta) => detect_conical(&map, x0, delta, dmax, horizon)?,
                None => detect_conical_auto(&map, x0, dmax, horizon)?,
            };
            write_conical_report(&cert, std::io::stdout().lock())?;
            if let Some(path) = out {
                let target = resolve_out(path, "conical.txt")?;
                write_conical_report(&cert, std::fs::File::create(&target)?)?;
                println!("wrote {}", target.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::FindParams { k, seeds, seed } => {
            let found = find_misiurewicz_cubic(k, seeds, seed)?;
            println!("found = {}", found.len());
            for p in &found {
                println!(
                    "A = {:.12e}  B = {:.12e}  k = {}  fixed_point = {:.12e}  multiplier = {:.6}",
                    p.a, p.b, p.k, p.fixed_point, p.multiplier
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment {
            config,
            map,
            out,
            resolution,
            seed,
            depth,
            render,
        } => {
            let mut experiment = match config {
                Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
                None => ExperimentConfig::default(),
            };
            if let Some(map) = map {
                experiment.map = map;
            }
            if let Some(resolution) = resolution {
                experiment.resolution = resolution;
            }
            if let Some(seed) = seed {
                experiment.seed = seed;
            }
            if let Some(depth) = depth {
                let parsed = ExperimentConfig::parse(&format!("depths = {depth}\n"))?;
                experiment.depths = parsed.depths;
            }
            if render {
                experiment.render = true;
            }
            let bundle = run_instability_experiment(&experiment, out.as_deref())?;
            print!("{}", bundle.report_text());
            for file in &bundle.files {
                println!("wrote {}", file.display());
            }
            Ok(outcome_code(bundle.outcome))
        }
    }
}

fn outcome_code(outcome: ExperimentOutcome) -> ExitCode {
    match outcome {
        ExperimentOutcome::Success => ExitCode::SUCCESS,
        ExperimentOutcome::NotApplicable => ExitCode::from(2),
        ExperimentOutcome::Partial => ExitCode::from(1),
    }
}

/// Treats an existing directory (or a path with no extension) as a
/// directory and places the default file name inside it.
fn resolve_out(path: PathBuf, default_name: &str) -> Result<PathBuf> {
    let as_dir = path.is_dir() || path.extension().is_none();
    if as_dir {
        std::fs::create_dir_all(&path)?;
        Ok(path.join(default_name))
    } else {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        Ok(path)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
