use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memflux::config::Config;
use memflux::heatmap::emit_heatmap;
use memflux::material::{catalog, catalog_to_toml, preset, spec_from_toml, MagnetState};
use memflux::protocol::run_protocol;
use memflux::sweep::{format_sig, run_sweep, METRIC_COLUMNS};
use memflux::{Error, Result};
use serde_json::json;

/// Exit status when a sweep finished but some grid points failed.
const EXIT_ROW_ERRORS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "memflux",
    version,
    about = "Variable-flux memory motor magnetization-state simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the descending major-loop branch of a material as CSV.
    Curve(CurveArgs),
    /// Run the five-interval protocol at one load point and print the result as JSON.
    Simulate(SimulateArgs),
    /// Run the load-point grid, write the CSV table and optional heatmaps.
    Sweep(SweepArgs),
    /// List the material presets.
    Materials(MaterialsArgs),
}

#[derive(Args)]
struct CurveArgs {
    /// Preset name (see `memflux materials`).
    #[arg(long, default_value = "studied-LCF", conflicts_with = "material_file")]
    material: String,
    /// TOML file holding one magnet spec, or an exported catalog (first record is used).
    #[arg(long)]
    material_file: Option<PathBuf>,
    /// Lower end of the field range, kA/m.
    #[arg(long, default_value_t = -300.0, allow_hyphen_values = true)]
    h_min: f64,
    /// Upper end of the field range, kA/m.
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    h_max: f64,
    #[arg(long, default_value_t = 701)]
    samples: usize,
    /// Override the knee round radius, kA/m.
    #[arg(long)]
    round_radius: Option<f64>,
    /// Also export the recoil line with this remanence, T.
    #[arg(long, allow_hyphen_values = true)]
    recoil: Option<f64>,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Load-interval d-axis current, A.
    #[arg(long, allow_hyphen_values = true)]
    id: f64,
    /// Load-interval q-axis current, A.
    #[arg(long, allow_hyphen_values = true)]
    iq: f64,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); defaults to `sweep.parallelism`.
    #[arg(long)]
    parallel: Option<usize>,
    /// Metric column to summarize and plot; repeatable. Defaults to all.
    #[arg(long)]
    metric: Vec<String>,
    /// Write an SVG heatmap per selected metric.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct MaterialsArgs {
    /// Write the catalog as TOML to this path.
    #[arg(long)]
    export: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
            _ => Ok(()),
        },
    }
}

fn curve(args: &CurveArgs) -> Result<()> {
    let mut spec = match &args.material_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            spec_from_toml(&text)?
        }
        None => preset(&args.material)?,
    };
    if let Some(r) = args.round_radius {
        spec = spec.with_round_radius(r * 1e3);
    }
    spec.validate()?;
    if args.samples < 2 {
        return Err(Error::Input("curve needs at least 2 samples".into()));
    }
    if !(args.h_min.is_finite() && args.h_max.is_finite() && args.h_min < args.h_max) {
        return Err(Error::Input(format!(
            "empty field range [{}, {}] kA/m",
            args.h_min, args.h_max
        )));
    }
    let major = spec.major_loop();
    let recoil = args.recoil.map(|remanence| MagnetState { remanence });

    let mut text = String::from("H_A_per_m,J_T,B_T");
    if recoil.is_some() {
        text.push_str(",J_recoil_T,B_recoil_T");
    }
    text.push('\n');
    let (lo, hi) = (args.h_min * 1e3, args.h_max * 1e3);
    for k in 0..args.samples {
        let h = lo + (hi - lo) * k as f64 / (args.samples - 1) as f64;
        let j = major.descending_j(h);
        let _ = write!(
            text,
            "{},{},{}",
            format_sig(h),
            format_sig(j),
            format_sig(major.descending_b(h))
        );
        if let Some(state) = recoil {
            let _ = write!(
                text,
                ",{},{}",
                format_sig(state.recoil_j(&major, h)),
                format_sig(state.recoil_b(&major, h))
            );
        }
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let result = run_protocol(&config.setup()?, args.id, args.iq)?;
    let mut text = serde_json::to_string_pretty(&result).expect("run result serializes");
    text.push('\n');
    write_output(args.out.as_deref(), &text)
}

fn sweep(args: &SweepArgs) -> Result<ExitCode> {
    let config = load_config(args.config.as_deref())?;
    let metrics: Vec<&str> = if args.metric.is_empty() {
        METRIC_COLUMNS.to_vec()
    } else {
        args.metric.iter().map(String::as_str).collect()
    };
    for m in &metrics {
        if !METRIC_COLUMNS.contains(m) {
            return Err(Error::UnknownColumn(m.to_string()));
        }
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
        path: out_dir.clone(),
        source: e,
    })?;

    let parallelism = args.parallel.unwrap_or(config.sweep.parallelism);
    let table = run_sweep(&config.grid()?, &config.setup()?, parallelism)?;
    let csv_path = out_dir.join("sweep.csv");
    table.emit_csv(&csv_path)?;
    println!("wrote {} ({} points)", csv_path.display(), table.rows.len());

    if args.plot {
        for m in &metrics {
            let path = out_dir.join(format!("heatmap_{m}.svg"));
            emit_heatmap(&table, m, &path)?;
            println!("wrote {}", path.display());
        }
    }

    println!("{:<10} {:>14} {:>14}", "metric", "min", "max");
    for m in &metrics {
        match table.column_range(m)? {
            Some((lo, hi)) => println!("{m:<10} {:>14} {:>14}", format_sig(lo), format_sig(hi)),
            None => println!("{m:<10} {:>14} {:>14}", "-", "-"),
        }
    }

    let failed = table.error_count();
    if failed == 0 {
        return Ok(ExitCode::SUCCESS);
    }
    for row in &table.rows {
        if let Err(message) = &row.outcome {
            let record = json!({
                "kind": "row",
                "i_d": row.point.i_d,
                "i_q": row.point.i_q,
                "message": message,
            });
            eprintln!("{record}");
        }
    }
    eprintln!(
        "{}",
        json!({ "kind": "summary", "failed_rows": failed, "rows": table.rows.len() })
    );
    Ok(ExitCode::from(EXIT_ROW_ERRORS))
}

fn materials(args: &MaterialsArgs) -> Result<()> {
    let presets = catalog();
    println!(
        "{:<12} {:<6} {:>6} {:>10} {:>7} {:>6} {:>8}  temperature",
        "name", "family", "Br_T", "iHc_kA/m", "mu_rec", "mu_g", "R_kA/m"
    );
    for p in &presets {
        let s = &p.spec;
        println!(
            "{:<12} {:<6} {:>6} {:>10} {:>7} {:>6} {:>8}  {}",
            s.name,
            p.family,
            format_sig(s.br),
            format_sig(s.ihc / 1e3),
            format_sig(s.mu_rec),
            format_sig(s.mu_g),
            format_sig(s.round_radius / 1e3),
            p.temperature_sensitivity
        );
    }
    if let Some(path) = &args.export {
        fs::write(path, catalog_to_toml(&presets)).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Curve(a) => curve(a).map(|()| ExitCode::SUCCESS),
        Command::Simulate(a) => simulate(a).map(|()| ExitCode::SUCCESS),
        Command::Sweep(a) => sweep(a),
        Command::Materials(a) => materials(a).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", json!({ "kind": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
