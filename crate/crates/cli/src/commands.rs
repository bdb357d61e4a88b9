//! Subcommand implementations behind the `octogrid` binary.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use octogrid::downsample::{calibrate_voxel_size, downsample_tree, voxel_filter, with_workers};
use octogrid::grid::{rasterize_adaptive, rasterize_fixed};
use octogrid::io::{read_binary, read_xyz, write_binary, write_grid_json, write_obj, write_path_json, write_pgm, write_xyz};
use octogrid::mapgen::{gen_perlin_cloud, gen_shape_cloud, place_start_goal, shape_scene};
use octogrid::planner::{jps_plan, plan_with_refinement};
use octogrid::rng::derive_seed;
use octogrid::{aabb_of, compute_depth, Aabb, Error, GridPath, McrSpec, OctoTree, PlanRequest, Point, PointCloud, UniformGridMap};
use rayon::prelude::*;
use serde_json::Value;

use crate::campaign::{aggregate, padded_domain, run_campaign, write_csv};
use crate::config::BenchConfig;

/// Exit status when the start or goal cell is occupied.
pub const EXIT_OCCUPIED: i32 = 3;
/// Exit status when no path exists.
pub const EXIT_NO_PATH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "octogrid", version, about = "Adaptive octree mapping, downsampling and grid planning")]
pub struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides the config file.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic point cloud.
    #[command(subcommand)]
    Generate(GenerateKind),
    /// Build the adaptive tree and report its structure and build time.
    Build(BuildArgs),
    /// Downsample a cloud with per-leaf convex hulls or a voxel grid.
    Downsample(DownsampleArgs),
    /// Rasterize a planar cloud into an occupancy grid.
    Rasterize(RasterizeArgs),
    /// Plan a path on a fixed or adaptive grid.
    Plan(PlanArgs),
    /// Run the fixed versus adaptive planning campaign.
    Bench(BenchArgs),
    /// Tune the Perlin sampling density and report fixed-grid solvability.
    CalibratePerlin(CalibrateArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Thresholded Perlin obstacle field on the benchmark map.
    Perlin {
        #[arg(long)]
        out: PathBuf,
        /// Bench config supplying the Perlin parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        samples_per_m: Option<f64>,
    },
    /// The 3-D test scene of cuboids, cylinders, arches and helices.
    Shapes {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 110_000)]
        points: usize,
        /// Shell thickness in meters.
        #[arg(long, default_value_t = 0.0)]
        thickness: f64,
    },
}

/// Input cloud and its domain.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// `.xyz` text or `.bin` binary cloud.
    #[arg(long)]
    pub input: PathBuf,
    /// Domain as `x0,y0,x1,y1` or `x0,y0,z0,x1,y1,z1`; defaults to the cloud's bounding box.
    #[arg(long, value_parser = parse_domain)]
    pub domain: Option<Aabb>,
}

/// Tree depth, given directly or derived from a target cell size.
#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub depth: Option<u32>,
    /// Target leaf size in meters, converted to a depth by the MCR rule.
    #[arg(long)]
    pub cell_size: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub mcr_k: f64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub depth: DepthArgs,
    /// Builds to time; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DownsampleMethod {
    Convex,
    Voxel,
}

#[derive(Debug, Args)]
pub struct DownsampleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub depth: DepthArgs,
    #[arg(long, value_enum, default_value_t = DownsampleMethod::Convex)]
    pub method: DownsampleMethod,
    #[arg(long)]
    pub voxel_size: Option<f64>,
    /// Pick the voxel size whose retention matches this fraction.
    #[arg(long)]
    pub target_retention: Option<f64>,
    /// OBJ file receiving the per-leaf hulls.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Retained cloud.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapMode {
    Fixed,
    Adaptive,
}

#[derive(Debug, Args)]
pub struct RasterizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub depth: DepthArgs,
    #[arg(long, value_enum, default_value_t = MapMode::Fixed)]
    pub mode: MapMode,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub depth: DepthArgs,
    #[arg(long, value_enum, default_value_t = MapMode::Adaptive)]
    pub mode: MapMode,
    /// Start as `x,y` in meters.
    #[arg(long, value_parser = parse_point)]
    pub start: Point,
    /// Goal as `x,y` in meters.
    #[arg(long, value_parser = parse_point)]
    pub goal: Point,
    #[arg(long, default_value_t = 2)]
    pub max_rounds: usize,
    /// Path JSON output.
    #[arg(long)]
    pub path_out: Option<PathBuf>,
    /// PGM of the final map with the path drawn in.
    #[arg(long)]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Desired mean number of points per map.
    #[arg(long, default_value_t = 1_200_000)]
    pub target_points: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Cell size at which fixed-grid solvability is measured.
    #[arg(long, default_value_t = 3.0)]
    pub cell_size: f64,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_point(s: &str) -> Result<Point, String> {
    Point::new(&parse_floats(s)?).map_err(|e| e.to_string())
}

fn parse_domain(s: &str) -> Result<Aabb, String> {
    let v = parse_floats(s)?;
    if v.len() != 4 && v.len() != 6 {
        return Err("expected 4 or 6 comma-separated numbers".into());
    }
    let (lo, hi) = v.split_at(v.len() / 2);
    Aabb::from_bounds(lo, hi).map_err(|e| e.to_string())
}

/// Ordered key/value summary of one command result.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report(pub Vec<(String, Value)>);

impl Report {
    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn json(&self) -> String {
        let fields: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("{}:{}", Value::from(k.as_str()), v))
            .collect();
        format!("{{{}}}", fields.join(","))
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Renders reports as one JSON value or as CSV with a header row.
pub fn render(reports: &[Report], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => reports[0].json() + "\n",
        Format::Json => {
            let rows: Vec<String> = reports.iter().map(Report::json).collect();
            format!("[{}]\n", rows.join(","))
        }
        Format::Csv => {
            let mut out = String::new();
            if let Some(first) = reports.first() {
                let keys: Vec<&str> = first.0.iter().map(|(k, _)| k.as_str()).collect();
                out += &keys.join(",");
                out.push('\n');
            }
            for r in reports {
                let cells: Vec<String> = r.0.iter().map(|(_, v)| csv_cell(v)).collect();
                out += &cells.join(",");
                out.push('\n');
            }
            out
        }
    }
}

/// Process exit status for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_start_or_goal_occupied() => EXIT_OCCUPIED,
        Some(Error::NoPathAtMaxDepth { .. }) => EXIT_NO_PATH,
        _ => 1,
    }
}

struct Ctx {
    seed: Option<u64>,
    workers: Option<usize>,
    out_dir: Option<PathBuf>,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    fn output(&self, path: &Path) -> anyhow::Result<PathBuf> {
        let full = match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = full.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(full)
    }

    fn create(&self, path: &Path) -> anyhow::Result<(PathBuf, BufWriter<File>)> {
        let full = self.output(path)?;
        let f = File::create(&full).with_context(|| format!("creating {}", full.display()))?;
        Ok((full, BufWriter::new(f)))
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

/// Reads a cloud by extension. Without an explicit dimension a cloud whose
/// z coordinates are all zero is treated as planar.
pub fn load_cloud(path: &Path, dim: Option<usize>) -> anyhow::Result<PointCloud> {
    let open = || -> anyhow::Result<BufReader<File>> {
        Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
    };
    let read = |d: usize| -> anyhow::Result<PointCloud> {
        let cloud = if is_binary(path) { read_binary(open()?, d)? } else { read_xyz(open()?, d)? };
        Ok(cloud)
    };
    if let Some(d) = dim {
        return read(d).with_context(|| format!("reading {}", path.display()));
    }
    let cloud = match read(3) {
        Ok(c) => c,
        Err(_) if !is_binary(path) => return read(2).with_context(|| format!("reading {}", path.display())),
        Err(e) => return Err(e.context(format!("reading {}", path.display()))),
    };
    if !cloud.is_empty() && cloud.iter().all(|p| p.coords()[2] == 0.0) {
        let planar = cloud.iter().map(|p| Point::xy(p.coords()[0], p.coords()[1])).collect();
        return Ok(PointCloud::from_points(2, planar)?);
    }
    Ok(cloud)
}

pub fn save_cloud(cloud: &PointCloud, path: &Path) -> anyhow::Result<()> {
    let w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    if is_binary(path) {
        write_binary(cloud, w)?;
    } else {
        write_xyz(cloud, w)?;
    }
    Ok(())
}

fn load_input(args: &InputArgs) -> anyhow::Result<(PointCloud, Aabb)> {
    let cloud = load_cloud(&args.input, args.domain.map(|d| d.dim()))?;
    let domain = match args.domain {
        Some(d) => d,
        None if cloud.is_empty() => bail!("{} is empty; pass --domain", args.input.display()),
        None => aabb_of(&cloud)?,
    };
    Ok((cloud, domain))
}

fn resolve_depth(args: &DepthArgs, domain: &Aabb) -> anyhow::Result<u32> {
    match (args.depth, args.cell_size) {
        (Some(d), _) => Ok(d),
        (None, Some(c)) => Ok(compute_depth(domain.longest_edge(), &McrSpec::for_cell_size(c, args.mcr_k)?)?),
        (None, None) => bail!("pass --depth or --cell-size"),
    }
}

/// Tree whose leaves are exactly `cell_size` wide when a cell size is given,
/// plus the window its grid must be cropped to.
fn build_tree(cloud: &PointCloud, domain: &Aabb, args: &DepthArgs) -> anyhow::Result<(OctoTree, Option<Aabb>)> {
    let depth = resolve_depth(args, domain)?;
    match (args.depth, args.cell_size) {
        (None, Some(c)) if domain.dim() == 2 => {
            Ok((OctoTree::build(cloud, padded_domain(domain, c, depth)?, depth)?, Some(*domain)))
        }
        _ => Ok((OctoTree::build(cloud, *domain, depth)?, None)),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn load_config(path: Option<&Path>, ctx: &Ctx) -> anyhow::Result<BenchConfig> {
    let mut cfg = match path {
        Some(p) => BenchConfig::load(p)?,
        None => BenchConfig::default(),
    };
    if let Some(s) = ctx.seed {
        cfg.seed = s;
    }
    if let Some(w) = ctx.workers {
        cfg.workers = w;
    }
    if let Some(d) = &ctx.out_dir {
        cfg.out_dir = d.clone();
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns the summary rows.
pub fn run(cli: Cli) -> anyhow::Result<Vec<Report>> {
    let ctx = Ctx {
        seed: cli.seed,
        workers: cli.workers,
        out_dir: cli.out_dir,
    };
    match cli.command {
        Command::Generate(kind) => generate(&ctx, kind),
        Command::Build(a) => build(&ctx, a),
        Command::Downsample(a) => downsample(&ctx, a),
        Command::Rasterize(a) => rasterize(&ctx, a),
        Command::Plan(a) => plan(&ctx, a),
        Command::Bench(a) => bench(&ctx, a),
        Command::CalibratePerlin(a) => calibrate(&ctx, a),
    }
}

fn generate(ctx: &Ctx, kind: GenerateKind) -> anyhow::Result<Vec<Report>> {
    let (cloud, out) = match kind {
        GenerateKind::Perlin { out, config, threshold, samples_per_m } => {
            let mut cfg = load_config(config.as_deref(), ctx)?;
            cfg.perlin_threshold = threshold.unwrap_or(cfg.perlin_threshold);
            cfg.perlin_samples_per_m = samples_per_m.unwrap_or(cfg.perlin_samples_per_m);
            cfg.validate()?;
            (gen_perlin_cloud(&cfg.perlin(cfg.seed))?, out)
        }
        GenerateKind::Shapes { out, points, thickness } => {
            (gen_shape_cloud(&shape_scene(points, thickness), ctx.seed())?, out)
        }
    };
    let path = ctx.output(&out)?;
    save_cloud(&cloud, &path)?;
    Ok(vec![Report::default()
        .with("points", cloud.len())
        .with("dim", cloud.dim())
        .with("out", path_str(&path))])
}

fn build(_ctx: &Ctx, a: BuildArgs) -> anyhow::Result<Vec<Report>> {
    let (cloud, domain) = load_input(&a.input)?;
    let repeats = a.repeats.max(1);
    let mut times = Vec::with_capacity(repeats);
    let mut tree = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let built = build_tree(&cloud, &domain, &a.depth)?.0;
        times.push(ms(t.elapsed()));
        tree = Some(built);
    }
    let tree = tree.expect("at least one build");
    Ok(vec![Report::default()
        .with("points", tree.len())
        .with("dim", tree.dim())
        .with("depth", tree.depth())
        .with("nodes", tree.node_count())
        .with("occupied_leaves", tree.leaf_ids().len())
        .with("leaf_edge_m", tree.leaf_edge(0))
        .with("build_ms_median", median(times.clone()))
        .with("build_ms_min", times.iter().copied().fold(f64::INFINITY, f64::min))])
}

fn downsample(ctx: &Ctx, a: DownsampleArgs) -> anyhow::Result<Vec<Report>> {
    let (cloud, domain) = load_input(&a.input)?;
    let (retained, elapsed, meshes) = match a.method {
        DownsampleMethod::Convex => {
            let (tree, _) = build_tree(&cloud, &domain, &a.depth)?;
            let r = downsample_tree(&tree, ctx.workers())?;
            (r.retained.clone(), r.elapsed(), Some(r.per_leaf_meshes))
        }
        DownsampleMethod::Voxel => {
            let size = match (a.voxel_size, a.target_retention) {
                (Some(s), _) => s,
                (None, Some(f)) => calibrate_voxel_size(&cloud, f)?,
                (None, None) => bail!("voxel downsampling needs --voxel-size or --target-retention"),
            };
            let t = Instant::now();
            let kept = voxel_filter(&cloud, size)?;
            (kept, t.elapsed(), None)
        }
    };
    if let Some(mesh) = &a.mesh {
        let Some(meshes) = &meshes else {
            bail!("--mesh is only available with --method convex");
        };
        let (_, w) = ctx.create(mesh)?;
        write_obj(meshes, w)?;
    }
    if let Some(out) = &a.out {
        save_cloud(&retained, &ctx.output(out)?)?;
    }
    let rate = if cloud.is_empty() { 1.0 } else { retained.len() as f64 / cloud.len() as f64 };
    Ok(vec![Report::default()
        .with("input_size", cloud.len())
        .with("retained", retained.len())
        .with("retention_rate", rate)
        .with("elapsed_ms", ms(elapsed))])
}

fn make_map(cloud: &PointCloud, domain: &Aabb, mode: MapMode, depth: &DepthArgs) -> anyhow::Result<(UniformGridMap, Option<OctoTree>, Option<Aabb>)> {
    if domain.dim() != 2 {
        return Err(Error::NotPlanar(domain.dim()).into());
    }
    match mode {
        MapMode::Fixed => {
            let Some(c) = depth.cell_size else {
                bail!("fixed maps need --cell-size");
            };
            Ok((rasterize_fixed(cloud, domain, c)?, None, None))
        }
        MapMode::Adaptive => {
            let (tree, window) = build_tree(cloud, domain, depth)?;
            let full = rasterize_adaptive(&tree);
            let map = match &window {
                Some(w) => full.window(w)?,
                None => full,
            };
            Ok((map, Some(tree), window))
        }
    }
}

fn map_report(map: &UniformGridMap) -> Report {
    Report::default()
        .with("dims", map.dims().to_vec())
        .with("cell_size_m", map.cell_size()[0])
        .with("occupied_cells", map.occupied_count())
        .with("cells", map.len())
}

fn rasterize(ctx: &Ctx, a: RasterizeArgs) -> anyhow::Result<Vec<Report>> {
    let (cloud, domain) = load_input(&a.input)?;
    let (map, _, _) = make_map(&cloud, &domain, a.mode, &a.depth)?;
    if let Some(p) = &a.pgm {
        write_pgm(&map, None, ctx.create(p)?.1)?;
    }
    if let Some(p) = &a.json {
        write_grid_json(&map, ctx.create(p)?.1)?;
    }
    Ok(vec![map_report(&map)])
}

fn write_plan_outputs(ctx: &Ctx, a: &PlanArgs, map: &UniformGridMap, path: Option<&GridPath>) -> anyhow::Result<()> {
    if let Some(p) = &a.pgm {
        write_pgm(map, path, ctx.create(p)?.1)?;
    }
    if let (Some(out), Some(path)) = (&a.path_out, path) {
        write_path_json(path, map, ctx.create(out)?.1)?;
    }
    Ok(())
}

fn plan(ctx: &Ctx, a: PlanArgs) -> anyhow::Result<Vec<Report>> {
    let (cloud, domain) = load_input(&a.input)?;
    let (map, tree, window) = make_map(&cloud, &domain, a.mode, &a.depth)?;
    let t = Instant::now();
    let (path, map, round) = match (a.mode, tree) {
        (MapMode::Adaptive, Some(mut tree)) => {
            match plan_with_refinement(&mut tree, &a.start, &a.goal, a.max_rounds, window.as_ref()) {
                Ok(p) => (p.path, p.map, p.round),
                Err(e) => {
                    write_plan_outputs(ctx, &a, &map, None)?;
                    return Err(e.into());
                }
            }
        }
        _ => {
            let s = map.cell_of(&a.start).ok_or(Error::StartOutOfBounds)?;
            let g = map.cell_of(&a.goal).ok_or(Error::GoalOutOfBounds)?;
            let found = jps_plan(&map, &PlanRequest::new(s, g));
            match found {
                Ok(Some(p)) => (p, map, 0),
                Ok(None) => {
                    write_plan_outputs(ctx, &a, &map, None)?;
                    return Err(Error::NoPathAtMaxDepth { rounds: 0 }.into());
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    let plan_ms = ms(t.elapsed());
    write_plan_outputs(ctx, &a, &map, Some(&path))?;
    Ok(vec![map_report(&map)
        .with("round", round)
        .with("steps", path.len().saturating_sub(1))
        .with("cost_cells", path.cost)
        .with("metric_length_m", path.metric_length(&map))
        .with("plan_ms", plan_ms)])
}

fn bench(ctx: &Ctx, a: BenchArgs) -> anyhow::Result<Vec<Report>> {
    let mut cfg = load_config(a.config.as_deref(), ctx)?;
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    let records = run_campaign(&cfg)?;
    let agg = aggregate(&cfg, &records);
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let csv_path = cfg.out_dir.join("trials.csv");
    write_csv(&records, BufWriter::new(File::create(&csv_path)?))?;
    let mut json = serde_json::to_string_pretty(&agg)?;
    json.push('\n');
    std::fs::write(cfg.out_dir.join("aggregate.json"), json)?;
    std::fs::write(cfg.out_dir.join("config.toml"), cfg.to_toml())?;
    Ok(agg
        .cells
        .iter()
        .map(|c| {
            Report::default()
                .with("cell_size_m", c.cell_size_m)
                .with("trials", c.trials)
                .with("fixed_successes", c.fixed_successes)
                .with("adaptive_successes", c.adaptive_successes)
                .with("fixed_only_successes", c.fixed_only_successes)
                .with("joint_successes", c.joint_successes)
                .with("success_improvement_pct", c.success_improvement_pct)
                .with("length_improvement_pct", c.length_improvement_pct)
        })
        .collect())
}

fn calibrate(ctx: &Ctx, a: CalibrateArgs) -> anyhow::Result<Vec<Report>> {
    let mut cfg = load_config(a.config.as_deref(), ctx)?;
    if a.trials == 0 || a.target_points == 0 {
        bail!("trials and target points must be positive");
    }
    let seeds: Vec<u64> = (0..a.trials).map(|t| derive_seed(cfg.seed, t as u64)).collect();
    let mean_points = |cfg: &BenchConfig| -> anyhow::Result<f64> {
        let counts = with_workers(cfg.workers, || {
            seeds
                .par_iter()
                .map(|&s| gen_perlin_cloud(&cfg.perlin(s)).map(|c| c.len()))
                .collect::<Result<Vec<usize>, Error>>()
        })??;
        Ok(counts.iter().sum::<usize>() as f64 / counts.len() as f64)
    };
    // The point count grows with the square of the sampling density.
    for _ in 0..3 {
        let n = mean_points(&cfg)?;
        if n == 0.0 {
            bail!("the threshold leaves no obstacle points");
        }
        cfg.perlin_samples_per_m *= (a.target_points as f64 / n).sqrt();
    }
    let points = mean_points(&cfg)?;
    let map_box = cfg.domain()?;
    let min_sep = cfg.min_separation_fraction * map_box.edge(0).hypot(map_box.edge(1));
    let solved = with_workers(cfg.workers, || {
        seeds
            .par_iter()
            .map(|&s| -> anyhow::Result<bool> {
                let cloud = gen_perlin_cloud(&cfg.perlin(s))?;
                let map = rasterize_fixed(&cloud, &map_box, a.cell_size)?;
                let Some((st, go)) = place_start_goal(&map, derive_seed(s, 1), min_sep, cfg.placement_attempts) else {
                    return Ok(false);
                };
                Ok(jps_plan(&map, &PlanRequest::new(st, go))?.is_some())
            })
            .collect::<anyhow::Result<Vec<bool>>>()
    })??;
    let rate = solved.iter().filter(|&&s| s).count() as f64 / solved.len() as f64;
    Ok(vec![Report::default()
        .with("perlin_samples_per_m", cfg.perlin_samples_per_m)
        .with("mean_points", points)
        .with("cell_size_m", a.cell_size)
        .with("fixed_solvable_fraction", rate)])
}

/// Writes the rendered reports of `cli` to `out`, returning the exit status.
pub fn main_with<W: Write>(cli: Cli, mut out: W, mut err: impl Write) -> i32 {
    let format = cli.format;
    match run(cli) {
        Ok(reports) => {
            let _ = out.write_all(render(&reports, format).as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_domains_and_points() {
        let d = parse_domain("0,0,10,5").unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.edge(0), 10.0);
        assert!(parse_domain("0,0,1").is_err());
        assert!(parse_domain("1,0,0,5").is_err());
        assert_eq!(parse_point("1.5, 2").unwrap(), Point::xy(1.5, 2.0));
    }

    #[test]
    fn renders_json_and_csv() {
        let r = Report::default().with("a", 1).with("b", "x").with("c", Value::Null);
        assert_eq!(render(&[r.clone()], Format::Json), "{\"a\":1,\"b\":\"x\",\"c\":null}\n");
        assert_eq!(render(&[r.clone(), r], Format::Csv), "a,b,c\n1,x,\n1,x,\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::StartOccupied { round: 0 }.into()), EXIT_OCCUPIED);
        assert_eq!(exit_code(&Error::GoalOccupied { round: 2 }.into()), EXIT_OCCUPIED);
        assert_eq!(exit_code(&Error::NoPathAtMaxDepth { rounds: 2 }.into()), EXIT_NO_PATH);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
