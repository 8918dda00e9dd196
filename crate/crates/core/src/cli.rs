//! Command-line front end. Exit codes: 0 success, 1 no path found, 2 usage
//! or configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{run_suite, write_report, SuiteManifest};
use crate::codec::{enumerate_tuples, LatticePath, Side};
use crate::gridmap::{generate_map, load_map, save_map, MapRecipe, OccupancyGrid};
use crate::objective::{default_penalty, path_length};
use crate::optimizers::{run_on_grid, OptimizerConfig, OptimizerKind};
use crate::render::{render_svg, RenderSpec};
use crate::sampler::{sample, SamplerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_PATH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker threads used by `bench`.
pub const THREADS_ENV: &str = "LATTICEPLAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "latticeplan", version, about = "Lattice-path sampling and metaheuristic path planning on occupancy grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn on(self) -> bool {
        self == Toggle::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Above,
    Below,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Above => Side::Above,
            SideArg::Below => Side::Below,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a map from a JSON recipe.
    GenerateMap {
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one lattice path and print it as JSON.
    Sample {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SideArg::Above)]
        side: SideArg,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        strict_collision: Toggle,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize alpha for one map and print the result JSON.
    Optimize {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum)]
        optimizer: OptimizerKind,
        /// JSON optimizer parameters; `kind` and `seed` are overridden by the flags.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        evals: usize,
        #[arg(long, value_enum, default_value_t = SideArg::Above)]
        side: SideArg,
        #[arg(long, value_enum, default_value_t = Toggle::On)]
        strict_collision: Toggle,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a benchmark suite and write its result directory.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        evals: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a map and any number of path JSON files to SVG.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, num_args = 0..)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        cell_size: u32,
        #[arg(long, default_value_t = 0.15)]
        opacity: f64,
    },
    /// Print every valid tuple of length n, one per line.
    Enumerate {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn no_path(message: impl Into<String>) -> Self {
        Self { code: EXIT_NO_PATH, message: message.into() }
    }
}

type CliResult = Result<(), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::usage(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult {
    match out {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_grid(path: &Path) -> Result<OccupancyGrid, CliError> {
    let text = read(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    load_map(&text, name).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

#[derive(Serialize)]
struct SampleOutput {
    map: String,
    side: Side,
    alpha: f64,
    seed: u64,
    strict_collision: bool,
    length: f64,
    tuple: Vec<usize>,
    path: Vec<[usize; 2]>,
}

fn path_pairs(p: &LatticePath) -> Vec<[usize; 2]> {
    p.nodes().iter().map(|&(x, y)| [x, y]).collect()
}

#[derive(Serialize)]
struct OptimizeOutput {
    map: String,
    optimizer: OptimizerKind,
    seed: u64,
    evaluations: usize,
    side: Side,
    strict_collision: bool,
    success: bool,
    best_alpha: Option<f64>,
    best_length: Option<f64>,
    tuple: Option<Vec<usize>>,
    path: Option<Vec<[usize; 2]>>,
}

fn cmd_generate_map(recipe: &Path, out: &Path) -> CliResult {
    let text = read(recipe)?;
    let recipe: MapRecipe =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", recipe.display())))?;
    let grid = generate_map(&recipe).map_err(|e| CliError::usage(format!("invalid recipe: {e}")))?;
    write(out, &save_map(&grid))
}

fn cmd_sample(map: &Path, cfg: SamplerConfig, out: Option<&Path>) -> CliResult {
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let grid = load_grid(map)?;
    let g = sample(&grid, &cfg).map_err(|b| {
        CliError::no_path(format!("no path: collision in column {} at height {}", b.column, b.height))
    })?;
    let output = SampleOutput {
        map: grid.name().to_string(),
        side: cfg.side,
        alpha: cfg.alpha,
        seed: cfg.rng_seed,
        strict_collision: cfg.strict_collision,
        length: path_length(&g.path),
        tuple: g.tuple.entries().to_vec(),
        path: path_pairs(&g.path),
    };
    emit(out, &to_json(&output))
}

#[allow(clippy::too_many_arguments)]
fn cmd_optimize(
    map: &Path,
    kind: OptimizerKind,
    config: Option<&Path>,
    seed: u64,
    evals: usize,
    side: Side,
    strict: bool,
    out: Option<&Path>,
    trace: Option<&Path>,
) -> CliResult {
    let mut cfg = match config {
        Some(p) => serde_json::from_str::<OptimizerConfig>(&read(p)?)
            .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        None => OptimizerConfig::default(),
    };
    cfg.kind = kind;
    cfg.seed = seed;
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let grid = load_grid(map)?;
    let r = run_on_grid(&grid, side, strict, &cfg, evals).map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(t) = trace {
        write(t, &r.trace.to_csv())?;
    }
    let success = r.best_fitness.is_some_and(|f| f < default_penalty(grid.size()));
    let output = OptimizeOutput {
        map: grid.name().to_string(),
        optimizer: kind,
        seed,
        evaluations: r.evaluations,
        side,
        strict_collision: strict,
        success,
        best_alpha: r.best_alpha,
        best_length: r.incumbent.as_ref().map(|i| i.length),
        tuple: r.incumbent.as_ref().map(|i| i.tuple.entries().to_vec()),
        path: r.incumbent.as_ref().map(|i| path_pairs(&i.path)),
    };
    emit(out, &to_json(&output))?;
    if success {
        Ok(())
    } else {
        Err(CliError::no_path("no feasible path found within the evaluation budget"))
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::usage(e.to_string()))
}

fn cmd_bench(manifest: &Path, out: &Path, runs: Option<usize>, evals: Option<usize>, seed: Option<u64>) -> CliResult {
    let mut m = SuiteManifest::from_json(&read(manifest)?).map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(r) = runs {
        m.runs = r;
    }
    if let Some(e) = evals {
        m.evals = e;
    }
    if let Some(s) = seed {
        m.base_seed = s;
    }
    let base = manifest.parent().unwrap_or(Path::new("."));
    let pool = thread_pool()?;
    let report = pool.install(|| run_suite(&m, base)).map_err(|e| CliError::usage(e.to_string()))?;
    write_report(&report, out).map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(t) = &report.trend {
        eprintln!(
            "trend on narrow-passage maps: sade {:.3} vs debest {:.3} ({})",
            t.sade_success,
            t.debest_success,
            if t.holds { "holds" } else { "reversed" }
        );
    }
    Ok(())
}

/// Accepts either a bare `[[x,y],...]` array or an object with a `path` field
/// (the output of `sample`).
fn load_path(path: &Path) -> Result<LatticePath, CliError> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let nodes = match value.get("path") {
        Some(p) => p.clone(),
        None => value,
    };
    LatticePath::from_json(&nodes.to_string()).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_render(map: &Path, paths: &[PathBuf], out: &Path, spec: RenderSpec) -> CliResult {
    let grid = load_grid(map)?;
    let paths: Vec<LatticePath> = paths.iter().map(|p| load_path(p)).collect::<Result<_, _>>()?;
    if let Some(p) = paths.iter().find(|p| p.tree_size() != grid.size()) {
        let n = grid.size();
        return Err(CliError::usage(format!("path with {} columns does not fit a {n}x{n} map", p.tree_size())));
    }
    write(out, &render_svg(&grid, &paths, &spec))
}

fn cmd_enumerate(n: usize) -> CliResult {
    let tuples = enumerate_tuples(n).map_err(|e| CliError::usage(e.to_string()))?;
    let mut s = String::new();
    for t in tuples {
        s.push_str(&t.to_line());
        s.push('\n');
    }
    print!("{s}");
    Ok(())
}

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::GenerateMap { recipe, out } => cmd_generate_map(&recipe, &out),
        Command::Sample { map, alpha, seed, side, strict_collision, out } => {
            let cfg = SamplerConfig::new(alpha).with_side(side.into()).with_seed(seed).with_strict(strict_collision.on());
            cmd_sample(&map, cfg, out.as_deref())
        }
        Command::Optimize { map, optimizer, config, seed, evals, side, strict_collision, out, trace } => cmd_optimize(
            &map,
            optimizer,
            config.as_deref(),
            seed,
            evals,
            side.into(),
            strict_collision.on(),
            out.as_deref(),
            trace.as_deref(),
        ),
        Command::Bench { manifest, out, runs, evals, seed } => cmd_bench(&manifest, &out, runs, evals, seed),
        Command::Render { map, paths, out, cell_size, opacity } => {
            if !(0.0..=1.0).contains(&opacity) || cell_size == 0 {
                return Err(CliError::usage("opacity must lie in [0, 1] and cell size must be positive"));
            }
            let spec = RenderSpec { cell_size, path_opacity: opacity, ..RenderSpec::default() };
            cmd_render(&map, &paths, &out, spec)
        }
        Command::Enumerate { n } => cmd_enumerate(n),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
