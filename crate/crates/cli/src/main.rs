//! `l1chain`: simulate → calibrate → process → evaluate.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};

use l1chain::eval::{multitemporal_accuracy, power_spectrum_ratio, snr_report, Region};
use l1chain::geocal::{MatchOptions, Raster};
use l1chain::geom::Mode;
use l1chain::products::{
    calibrate_bbr, calibrate_geolocation_set, calibrate_tilt_drift, process, write_json, CalibrationSet, Persist,
    RunConfig,
};
use l1chain::radiometry::FrameStack;
use l1chain::sim::{generate_scene, simulate_acquisition, Scene};
use l1chain::tdi::{Kernel, Level, ProductGrid};
use l1chain::{Error, ErrorClass};

/// Environment variable holding the worker-thread count.
const THREADS_ENV: &str = "L1CHAIN_THREADS";

#[derive(Parser)]
#[command(name = "l1chain", version, about = "Level-0 to Level-1 processing chain with a truth simulator")]
struct Cli {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    level: Option<LevelArg>,
    #[arg(long, global = true, value_enum)]
    kernel: Option<KernelArg>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Primary output file of the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Fail instead of falling back to nominal calibration.
    #[arg(long, global = true)]
    require_calibration: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lac,
    Gac,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    L1b,
    L1c,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Exp,
    Nn,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scene and render raw frames with the configured effects.
    Simulate,
    /// Radiometric correction and ground TDI to L1B or L1C.
    Process {
        /// Raw-frame container (defaults to the configured path).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Band-to-band registration relative to band 7.
    CalibrateBbr {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Alignment bias and interior calibration against the reference scene.
    CalibrateGeo {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Pitch drift versus tilt over acquisitions at several tilts.
    CalibrateTilt {
        /// Raw-frame containers, one per tilt setting.
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
    },
    /// SNR, power spectrum and multi-temporal registration of a product.
    Evaluate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        snr: bool,
        /// Power-spectrum ratios against the reference scene.
        #[arg(long)]
        spectrum: bool,
        /// Second L1C product of the same area.
        #[arg(long)]
        multitemporal: Option<PathBuf>,
        #[arg(long)]
        band: Option<u8>,
    },
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Domain => 3,
        ErrorClass::Geometry => 4,
        ErrorClass::Calibration => 5,
        ErrorClass::Container => 6,
        ErrorClass::Config => 7,
        ErrorClass::Io => 8,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = cli.mode {
        cfg.acquisition.mode = match m {
            ModeArg::Lac => Mode::Lac,
            ModeArg::Gac => Mode::Gac,
        };
    }
    if let Some(l) = cli.level {
        cfg.tdi.level = match l {
            LevelArg::L1b => Level::L1b,
            LevelArg::L1c => Level::L1c,
        };
    }
    if let Some(k) = cli.kernel {
        cfg.tdi.kernel = match k {
            KernelArg::Exp => Kernel::Exponential,
            KernelArg::Nn => Kernel::Nearest,
        };
    }
    if let Some(s) = cli.sigma {
        cfg.tdi.sigma = s;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.acquisition.seed = cfg.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn load_calibration(path: &Path, stack: &FrameStack, cfg: &RunConfig, require: bool) -> Result<CalibrationSet, Error> {
    if path.exists() {
        return CalibrationSet::read(path);
    }
    if require {
        return Err(Error::CalibrationMissing(format!("no calibration set at {}", path.display())));
    }
    warn!("no calibration set at {}; using nominal calibration", path.display());
    Ok(CalibrationSet::nominal(stack, cfg.acquisition.gain, cfg.acquisition.offset))
}

fn geolocation_band(cfg: &RunConfig, bands: &[u8]) -> Result<u8, Error> {
    let b = cfg.calibration.geolocation_band.unwrap_or(if bands.contains(&10) { 10 } else { bands[0] });
    if !bands.contains(&b) {
        return Err(Error::Domain(format!("geolocation band {b} not acquired")));
    }
    Ok(b)
}

fn write_report(path: &Path, text: &str) -> Result<(), Error> {
    print!("{text}");
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = load_config(cli)?;
    let paths = &cfg.paths;
    match &cli.command {
        Command::Simulate => {
            let extent = cfg.acquisition.scene_extent(cfg.scene_margin)?;
            let scene = generate_scene(cfg.seed, extent, &cfg.acquisition.bands, &cfg.texture)?;
            let (stack, truth) = simulate_acquisition(&scene, &cfg.acquisition, &cfg.effects)?;
            let raw = cli.out.clone().unwrap_or_else(|| paths.raw.clone());
            scene.write(&paths.scene)?;
            stack.write(&raw)?;
            write_json(&truth, &paths.truth)?;
            CalibrationSet::from_truth(&stack, &truth)?.write(&paths.calibration)?;
            println!(
                "simulated {} frames ({} bands, {}) -> {}",
                stack.frames.len(),
                stack.bands().len(),
                stack.mode,
                raw.display()
            );
        }
        Command::Process { input } => {
            let stack = FrameStack::read(input.as_ref().unwrap_or(&paths.raw))?;
            let cal = load_calibration(&paths.calibration, &stack, &cfg, cli.require_calibration)?;
            let product = process(&stack, &cal, &cfg.tdi)?;
            let out = cli.out.clone().unwrap_or_else(|| paths.product.clone());
            product.write(&out)?;
            println!(
                "{:?} product {}x{} ({} bands, calibration {}) -> {}",
                product.level,
                product.rows,
                product.cols,
                product.bands.len(),
                product.metadata.calibration_version,
                out.display()
            );
        }
        Command::CalibrateBbr { input } => {
            let stack = FrameStack::read(input.as_ref().unwrap_or(&paths.raw))?;
            let cal = load_calibration(&paths.calibration, &stack, &cfg, cli.require_calibration)?;
            let (next, profiles) = calibrate_bbr(&stack, &cal, &cfg.tdi, &cfg.calibration.bbr)?;
            next.write(cli.out.as_ref().unwrap_or(&paths.calibration))?;
            let mut text = String::from("band  along fit (px)                              across fit (px)\n");
            for p in &profiles {
                text += &format!("{:>4}  {:>44}  {:>44}\n", p.band, format!("{:.4?}", p.along_fit), format!("{:.4?}", p.across_fit));
            }
            write_report(&paths.report, &text)?;
        }
        Command::CalibrateGeo { input } => {
            let stack = FrameStack::read(input.as_ref().unwrap_or(&paths.raw))?;
            let cal = load_calibration(&paths.calibration, &stack, &cfg, cli.require_calibration)?;
            let scene = Scene::read(&paths.scene)?;
            let band = geolocation_band(&cfg, &stack.bands())?;
            let reference = |lat: f64, lon: f64| scene.sample_band(band, lat, lon);
            let (next, report, corr) = calibrate_geolocation_set(
                &stack,
                &cal,
                &cfg.tdi,
                band,
                &reference,
                &cfg.calibration.geolocation,
                &cfg.calibration.attitude,
            )?;
            next.write(cli.out.as_ref().unwrap_or(&paths.calibration))?;
            let m = &report.metres;
            let text = format!(
                "geolocation band {band}, {} tie points\n\
                 along  median {:.1} m  LB {:.1}  UB {:.1}  mean {:.1}  3σ {:.1}\n\
                 across median {:.1} m  LB {:.1}  UB {:.1}  mean {:.1}  3σ {:.1}\n\
                 CE90 {:.1} m\ncorrection roll {:.6e} rad, pitch {:.6e} rad (UB/LB: 95th/5th percentile of per-column medians)\n",
                m.count, m.along.median, m.along.lb, m.along.ub, m.along.mean, m.along.three_sigma, m.across.median,
                m.across.lb, m.across.ub, m.across.mean, m.across.three_sigma, m.ce90, corr.roll, corr.pitch
            );
            write_report(&paths.report, &text)?;
        }
        Command::CalibrateTilt { inputs } => {
            let stacks = inputs.iter().map(|p| FrameStack::read(p)).collect::<Result<Vec<_>, _>>()?;
            let cal = load_calibration(&paths.calibration, &stacks[0], &cfg, cli.require_calibration)?;
            let scene = Scene::read(&paths.scene)?;
            let band = geolocation_band(&cfg, &stacks[0].bands())?;
            let reference = |lat: f64, lon: f64| scene.sample_band(band, lat, lon);
            let (next, model, samples) =
                calibrate_tilt_drift(&stacks, &cal, &cfg.tdi, band, &reference, &cfg.calibration.geolocation)?;
            next.write(cli.out.as_ref().unwrap_or(&paths.calibration))?;
            let mut text = String::from("tilt (deg)  pitch residual (rad)\n");
            for (t, p) in samples {
                text += &format!("{t:>10.3}  {p:>19.6e}\n");
            }
            text += &format!("slope {:.6e} rad/deg, intercept {:.6e} rad, rms {:.3e}\n", model.slope, model.intercept, model.residual_rms);
            write_report(&paths.report, &text)?;
        }
        Command::Evaluate { input, snr, spectrum, multitemporal, band } => {
            let product = ProductGrid::read(input.as_ref().unwrap_or(&paths.product))?;
            let band = band.unwrap_or(product.bands[0]);
            let mut text = String::new();
            if *snr {
                let region = match cfg.eval.snr_region {
                    Some(r) => r,
                    None => {
                        let (r0, c0, rows, cols) =
                            product.filled_window().ok_or_else(|| Error::Domain("product is empty".into()))?;
                        Region::new(r0 + rows / 4, c0 + cols / 4, rows / 2, cols / 2)
                    }
                };
                let report = snr_report(&product, &region)?;
                text += &report.table();
                for e in &report.entries {
                    if let Some(min) = cfg.eval.snr_thresholds.get(&e.band.to_string()) {
                        let verdict = if e.snr >= *min { "meets" } else { "below" };
                        text += &format!("band {} SNR {:.1} {verdict} threshold {min}\n", e.band, e.snr);
                    }
                }
            }
            if *spectrum {
                let scene = Scene::read(&paths.scene)?;
                let (r0, c0, rows, cols) =
                    product.filled_window().ok_or_else(|| Error::Domain("product is empty".into()))?;
                let (r0, c0, rows, cols) = (r0 + rows / 8, c0 + cols / 8, rows * 3 / 4, cols * 3 / 4);
                let image = Raster::from_product(&product, band)?.window(r0, c0, rows, cols)?;
                let truth =
                    Raster::resample_at(&product, |la, lo| scene.sample_band(band, la, lo)).window(r0, c0, rows, cols)?;
                let r = power_spectrum_ratio(&image, &truth)?;
                text += &format!("spectrum band {band}: low {:.4} mid {:.4} high {:.4}\n", r.low(), r.mid(), r.high());
            }
            if let Some(other) = multitemporal {
                let b = ProductGrid::read(other)?;
                let r = multitemporal_accuracy(&product, &b, band, &MatchOptions::default())?;
                let p = &r.pixels;
                text += &format!(
                    "multi-temporal band {band}: {} tie points, median along {:.3} px across {:.3} px, CE90 {:.3} px ({:.1} m)\n",
                    r.tie_points, p.along.median, p.across.median, p.ce90, r.metres.ce90
                );
            }
            if text.is_empty() {
                return Err(Error::Config("evaluate needs --snr, --spectrum or --multitemporal".into()));
            }
            write_report(cli.out.as_ref().unwrap_or(&paths.report), &text)?;
        }
    }
    info!("done");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var(THREADS_ENV) {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    warn!("could not size the worker pool: {e}");
                }
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got {n:?}");
                return ExitCode::from(exit_code(ErrorClass::Config));
            }
        }
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
