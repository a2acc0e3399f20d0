use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use diabatic::config::{GateSource, MatrixSource, RunConfig, SpectrumSection};
use diabatic::device::DeviceParams;
use diabatic::io::{parse_matrix_json, MatrixFile};
use diabatic::landscape::{optimize, sweep, sync_spectrum, trace};
use diabatic::linalg::CMatrix;
use diabatic::propagator::{effective_unitary, frame_blocks, PropagationOptions};
use diabatic::unitary_fit::{build_unitary, fit_unitary_auto};
use diabatic::xeb::{render_counts_csv, run_xeb, TwoQubitAction};

const TOOL: &str = concat!("diabatic ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "diabatic", version, about = "Diabatic two-transmon gate simulation and benchmarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Integration step in ns; overrides `numerics.dt`.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Swap and leakage error versus one pulse parameter, with detected dips.
    Trace(Common),
    /// Swap and leakage error grids for each configured axis pair.
    Landscape(Common),
    /// Synchronization frequencies and hold times.
    SyncSpectrum(Common),
    /// Tune hold time and overshoot at a fixed interaction frequency.
    Optimize(Common),
    /// Fit the five-angle model to a matrix.
    FitUnitary {
        #[command(flatten)]
        common: Common,
        /// Matrix JSON (`{"real": [[..]], "imag": [[..]]}`); replaces the config section.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Cross-entropy benchmarking with purity and leakage analysis.
    Xeb(Common),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Simulation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Simulation(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn sim(e: impl std::fmt::Display) -> Failure {
    Failure::Simulation(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Simulation(m) => eprintln!("simulation failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

/// Loaded configuration plus its fingerprint.
struct Context {
    config: RunConfig,
    hash: String,
    out: PathBuf,
}

impl Context {
    fn load(common: &Common) -> Result<Self, Failure> {
        let path = common.config.as_ref().ok_or_else(|| usage("--config is required"))?;
        let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        if let Some(seed) = common.seed {
            config.seed = seed;
        }
        if let Some(dt) = common.dt {
            config.numerics.dt = dt;
        }
        config.validate().map_err(usage)?;
        if let Some(n) = common.threads {
            if n == 0 {
                return Err(usage("--threads must be >= 1"));
            }
            // A second initialization (only possible in-process) keeps the first pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let canonical = serde_json::to_string(&config).expect("config serializes");
        let out = common
            .out
            .clone()
            .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { hash: sha256_hex(canonical.as_bytes()), config, out })
    }

    fn device(&self) -> DeviceParams {
        self.config.device.resolve().expect("validated")
    }

    fn opts(&self) -> PropagationOptions {
        self.config.numerics.propagation()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn header(command: &str, hash: &str) -> String {
    format!("# tool={TOOL} command={command} config_hash={hash}\n")
}

/// Files are collected first and written by a single writer at the end.
struct Outputs {
    dir: PathBuf,
    command: &'static str,
    hash: String,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(dir: &Path, command: &'static str, hash: &str) -> Self {
        Self { dir: dir.to_path_buf(), command, hash: hash.to_string(), files: Vec::new() }
    }

    fn csv(&mut self, name: impl Into<String>, body: String) {
        self.files.push((name.into(), header(self.command, &self.hash) + &body));
    }

    fn json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let doc = json!({
            "meta": { "tool": TOOL, "command": self.command, "config_hash": self.hash },
            "data": value,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("output serializes");
        text.push('\n');
        self.files.push((name.into(), text));
    }

    fn write(self) -> Result<Vec<PathBuf>, Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| usage(format!("{}: {e}", self.dir.display())))?;
        let mut written = Vec::new();
        for (name, body) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn run(command: Command) -> Result<Vec<PathBuf>, Failure> {
    match command {
        Command::Trace(c) => cmd_trace(&Context::load(&c)?),
        Command::Landscape(c) => cmd_landscape(&Context::load(&c)?),
        Command::SyncSpectrum(c) => cmd_sync_spectrum(&Context::load(&c)?),
        Command::Optimize(c) => cmd_optimize(&Context::load(&c)?),
        Command::FitUnitary { common, matrix } => cmd_fit_unitary(&common, matrix.as_deref()),
        Command::Xeb(c) => cmd_xeb(&Context::load(&c)?),
    }
}

fn cmd_trace(ctx: &Context) -> Result<Vec<PathBuf>, Failure> {
    let section = ctx.config.trace.ok_or_else(|| usage("config has no `trace` section"))?;
    let pulse = ctx.config.pulse().map_err(usage)?;
    let t = trace(pulse, section.axis, &section.range, &ctx.device(), &ctx.opts()).map_err(sim)?;
    let leak = t.leak_dips();
    let spacing: Vec<f64> = leak.windows(2).map(|w| w[1].x - w[0].x).collect();
    let mut out = Outputs::new(&ctx.out, "trace", &ctx.hash);
    out.csv("trace.csv", t.to_csv());
    out.json(
        "dips.json",
        &json!({
            "axis": section.axis,
            "leak_dips": leak,
            "leak_dip_spacing": spacing,
            "swap_dips": t.swap_dips(),
            "missing_points": t.eps_swap.iter().filter(|v| v.is_none()).count(),
        }),
    );
    out.write()
}

fn cmd_landscape(ctx: &Context) -> Result<Vec<PathBuf>, Failure> {
    if ctx.config.landscape.is_empty() {
        return Err(usage("config has no `landscape` sections"));
    }
    let mut out = Outputs::new(&ctx.out, "landscape", &ctx.hash);
    for (k, section) in ctx.config.landscape.iter().enumerate() {
        let spec = ctx.config.sweep_spec(section).map_err(usage)?;
        let grid = sweep(&spec, &ctx.device(), &ctx.opts()).map_err(sim)?;
        let name = |a: diabatic::landscape::Axis| serde_json::to_value(a).unwrap().as_str().unwrap().to_string();
        out.csv(format!("landscape_{k}_{}_{}.csv", name(spec.axis_x), name(spec.axis_y)), grid.to_csv());
    }
    out.write()
}

fn cmd_sync_spectrum(ctx: &Context) -> Result<Vec<PathBuf>, Failure> {
    let s = ctx.config.spectrum.unwrap_or_default();
    let points = spectrum(ctx, &s)?;
    let mut out = Outputs::new(&ctx.out, "sync-spectrum", &ctx.hash);
    out.json("spectrum.json", &points);
    out.write()
}

fn spectrum(ctx: &Context, s: &SpectrumSection) -> Result<Vec<diabatic::landscape::SyncPoint>, Failure> {
    sync_spectrum(&ctx.device(), s.freq_range, s.n_min..=s.n_max, &ctx.opts()).map_err(sim)
}

fn cmd_optimize(ctx: &Context) -> Result<Vec<PathBuf>, Failure> {
    let section = ctx.config.optimize.ok_or_else(|| usage("config has no `optimize` section"))?;
    let mut base = *ctx.config.pulse().map_err(usage)?;
    let (f_interact, order) = match section.interaction_freq {
        Some(f) => (f, None),
        None => {
            let s = ctx.config.spectrum.unwrap_or_default();
            let first = spectrum(ctx, &s)?
                .into_iter()
                .next()
                .ok_or_else(|| sim("no synchronization point in the configured band"))?;
            (first.interaction_freq, Some(first.n))
        }
    };
    base.f_interact = f_interact;
    let best = optimize(
        &ctx.device(),
        &base,
        (section.initial_hold, section.initial_overshoot),
        &ctx.opts(),
        section.max_iter,
    )
    .map_err(sim)?;
    let mut out = Outputs::new(&ctx.out, "optimize", &ctx.hash);
    out.json(
        "optimize.json",
        &json!({
            "interaction_freq": f_interact,
            "sync_order": order,
            "result": best,
            "objective": best.objective(),
        }),
    );
    out.write()
}

fn cmd_fit_unitary(common: &Common, matrix: Option<&Path>) -> Result<Vec<PathBuf>, Failure> {
    let (target, hash, dir): (CMatrix<4>, String, PathBuf) = match matrix {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let m = parse_matrix_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            (m, sha256_hex(text.as_bytes()), dir)
        }
        None => {
            let ctx = Context::load(common)?;
            let source = ctx.config.fit_unitary.clone().ok_or_else(|| usage("config has no `fit_unitary` section"))?;
            let m = match source {
                MatrixSource::Matrix(f) => f.to_matrix().map_err(usage)?,
                MatrixSource::Angles(a) => build_unitary(&a),
                MatrixSource::Pulse => {
                    let pulse = ctx.config.pulse().map_err(usage)?;
                    effective_unitary(pulse, &ctx.device(), &ctx.opts()).map_err(sim)?
                }
            };
            (m, ctx.hash.clone(), ctx.out.clone())
        }
    };
    let fit = fit_unitary_auto(&target).map_err(sim)?;
    let mut out = Outputs::new(&dir, "fit-unitary", &hash);
    out.json("fit.json", &json!({ "fit": fit, "matrix": MatrixFile::from_matrix(&target) }));
    out.write()
}

fn cmd_xeb(ctx: &Context) -> Result<Vec<PathBuf>, Failure> {
    let section = ctx.config.xeb.clone().ok_or_else(|| usage("config has no `xeb` section"))?;
    let spec = ctx.config.xeb_spec(&section);
    let (action, expected, gate_info): (TwoQubitAction, _, Value) = match section.gate {
        GateSource::Ideal(a) => (TwoQubitAction::Ideal(a), a, json!({ "ideal": a })),
        GateSource::Pulse => {
            let pulse = ctx.config.pulse().map_err(usage)?;
            let blocks = frame_blocks(pulse, &ctx.device(), &ctx.opts()).map_err(sim)?;
            let fit = fit_unitary_auto(&blocks.computational()).map_err(sim)?;
            (
                TwoQubitAction::Blocks(blocks),
                fit.angles,
                json!({ "pulse_fit": fit, "single_gate_leakage": blocks.leakage() }),
            )
        }
    };
    let run = run_xeb(&spec, &action, &expected).map_err(sim)?;
    let mut out = Outputs::new(&ctx.out, "xeb", &ctx.hash);
    out.json("xeb_report.json", &json!({ "gate": gate_info, "report": run.report }));
    out.csv("alpha.csv", run.report.alpha.to_csv());
    out.csv("purity.csv", run.report.purity.to_csv());
    out.csv("leakage.csv", run.report.leakage.to_csv());
    if let Some(counts) = &run.counts {
        out.csv("counts.csv", render_counts_csv(counts));
    }
    out.write()
}
