//! Fixed-grid versus adaptive-grid planning campaigns on Perlin maps.
//!
//! For every trial and configured cell size `c`:
//!
//! 1. The fixed map rasterizes the cloud at `c` over the map domain.
//! 2. Start and goal are drawn among its free cells (centers at least
//!    `min_separation_fraction` of the diagonal apart) and planned with JPS.
//! 3. The adaptive tree uses the MCR depth for `c` on the longest axis. Its
//!    domain is padded to `c * 2^depth` per axis so that its leaves are exactly
//!    `c` wide, and the adaptive grid is cropped back to the map domain. Both
//!    maps therefore have identical dimensions and cell size.
//! 4. The adaptive plan runs the refinement loop (dynamic partition on failure).

use std::io::Write;
use std::time::Instant;

use octogrid::downsample::with_workers;
use octogrid::grid::rasterize_fixed;
use octogrid::mapgen::{gen_perlin_cloud, place_start_goal};
use octogrid::planner::{jps_plan, plan_with_refinement};
use octogrid::rng::derive_seed;
use octogrid::{compute_depth, Aabb, McrSpec, OctoTree, PlanRequest, PointCloud};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::BenchConfig;

/// Outcome of one (trial, cell size) pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub cell_size: f64,
    pub effective_cell_size: f64,
    pub depth: u32,
    pub points: usize,
    /// Whether a start/goal pair satisfying the separation rule was found.
    pub placed: bool,
    pub start: Option<[f64; 2]>,
    pub goal: Option<[f64; 2]>,
    pub fixed_success: bool,
    pub adaptive_success: bool,
    /// Refinement round at which the adaptive plan succeeded.
    pub adaptive_round: Option<usize>,
    pub fixed_metric_length: Option<f64>,
    pub adaptive_metric_length: Option<f64>,
    pub build_us: f64,
    pub fixed_plan_us: f64,
    pub adaptive_plan_us: f64,
}

/// Header of the trial CSV; timing columns come last.
pub const CSV_HEADER: &str = "trial,seed,cell_size_m,effective_cell_size_m,depth,points,placed,\
start_x_m,start_y_m,goal_x_m,goal_y_m,fixed_success,adaptive_success,adaptive_round,\
fixed_metric_length_m,adaptive_metric_length_m,build_us,fixed_plan_us,adaptive_plan_us";

/// Number of leading CSV columns that are deterministic for a given config.
pub const CSV_DETERMINISTIC_COLUMNS: usize = 16;

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        let coord = |p: Option<[f64; 2]>, a: usize| opt(p.map(|p| p[a]));
        [
            self.trial.to_string(),
            self.seed.to_string(),
            self.cell_size.to_string(),
            self.effective_cell_size.to_string(),
            self.depth.to_string(),
            self.points.to_string(),
            self.placed.to_string(),
            coord(self.start, 0),
            coord(self.start, 1),
            coord(self.goal, 0),
            coord(self.goal, 1),
            self.fixed_success.to_string(),
            self.adaptive_success.to_string(),
            opt(self.adaptive_round),
            opt(self.fixed_metric_length),
            opt(self.adaptive_metric_length),
            format!("{:.3}", self.build_us),
            format!("{:.3}", self.fixed_plan_us),
            format!("{:.3}", self.adaptive_plan_us),
        ]
        .join(",")
    }
}

pub fn write_csv<W: Write>(records: &[TrialRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

/// Tree domain anchored at `map.min` whose depth-`depth` leaves are exactly `cell` wide.
pub fn padded_domain(map: &Aabb, cell: f64, depth: u32) -> anyhow::Result<Aabb> {
    let side = cell * (1u64 << depth) as f64;
    let lo = map.min().coords().to_vec();
    let hi: Vec<f64> = lo.iter().map(|l| l + side).collect();
    Ok(Aabb::from_bounds(&lo, &hi)?)
}

/// Runs every cell size of one trial on an already generated cloud.
pub fn run_trial_on_cloud(
    cfg: &BenchConfig,
    trial: usize,
    seed: u64,
    cloud: &PointCloud,
) -> anyhow::Result<Vec<TrialRecord>> {
    let map_box = cfg.domain()?;
    let min_sep = cfg.min_separation_fraction * map_box.edge(0).hypot(map_box.edge(1));
    let mut out = Vec::with_capacity(cfg.cell_sizes_m.len());
    for (ci, &cell) in cfg.cell_sizes_m.iter().enumerate() {
        let depth = compute_depth(map_box.longest_edge(), &McrSpec::for_cell_size(cell, cfg.mcr_k)?)?;
        let mut rec = TrialRecord {
            trial,
            seed,
            cell_size: cell,
            effective_cell_size: cell,
            depth,
            points: cloud.len(),
            placed: false,
            start: None,
            goal: None,
            fixed_success: false,
            adaptive_success: false,
            adaptive_round: None,
            fixed_metric_length: None,
            adaptive_metric_length: None,
            build_us: 0.0,
            fixed_plan_us: 0.0,
            adaptive_plan_us: 0.0,
        };
        let fixed = rasterize_fixed(cloud, &map_box, cell)?;
        let placement = place_start_goal(
            &fixed,
            derive_seed(seed, ci as u64 + 1),
            min_sep,
            cfg.placement_attempts,
        );
        let Some((s, g)) = placement else {
            out.push(rec);
            continue;
        };
        let (sp, gp) = (fixed.cell_center(&s), fixed.cell_center(&g));
        rec.placed = true;
        rec.start = Some([sp[0], sp[1]]);
        rec.goal = Some([gp[0], gp[1]]);

        let t = Instant::now();
        let fixed_path = jps_plan(&fixed, &PlanRequest::new(s, g))?;
        rec.fixed_plan_us = t.elapsed().as_secs_f64() * 1e6;
        if let Some(p) = fixed_path {
            rec.fixed_success = true;
            rec.fixed_metric_length = Some(p.metric_length(&fixed));
        }

        let t = Instant::now();
        let mut tree = OctoTree::build(cloud, padded_domain(&map_box, cell, depth)?, depth)?;
        rec.build_us = t.elapsed().as_secs_f64() * 1e6;
        let t = Instant::now();
        let adaptive = plan_with_refinement(
            &mut tree,
            &sp,
            &gp,
            cfg.max_refinement_rounds,
            Some(&map_box),
        );
        rec.adaptive_plan_us = t.elapsed().as_secs_f64() * 1e6;
        if let Ok(plan) = adaptive {
            rec.adaptive_success = true;
            rec.adaptive_round = Some(plan.round);
            rec.adaptive_metric_length = Some(plan.path.metric_length(&plan.map));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Seed of trial `trial`, independent of execution order.
pub fn trial_seed(cfg: &BenchConfig, trial: usize) -> u64 {
    derive_seed(cfg.seed, trial as u64)
}

pub fn run_trial(cfg: &BenchConfig, trial: usize) -> anyhow::Result<Vec<TrialRecord>> {
    let seed = trial_seed(cfg, trial);
    let cloud = gen_perlin_cloud(&cfg.perlin(seed))?;
    run_trial_on_cloud(cfg, trial, seed, &cloud)
}

/// All trials on `cfg.workers` threads, in trial order. A trial that errors
/// is recorded as a double failure rather than aborting the campaign.
pub fn run_campaign(cfg: &BenchConfig) -> anyhow::Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let per_trial: Vec<Vec<TrialRecord>> = with_workers(cfg.workers, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t).unwrap_or_else(|_| failed_trial(cfg, t)))
            .collect()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

fn failed_trial(cfg: &BenchConfig, trial: usize) -> Vec<TrialRecord> {
    cfg.cell_sizes_m
        .iter()
        .map(|&cell| TrialRecord {
            trial,
            seed: trial_seed(cfg, trial),
            cell_size: cell,
            effective_cell_size: cell,
            depth: 0,
            points: 0,
            placed: false,
            start: None,
            goal: None,
            fixed_success: false,
            adaptive_success: false,
            adaptive_round: None,
            fixed_metric_length: None,
            adaptive_metric_length: None,
            build_us: 0.0,
            fixed_plan_us: 0.0,
            adaptive_plan_us: 0.0,
        })
        .collect()
}

/// Per-cell-size summary of a campaign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell_size_m: f64,
    pub effective_cell_size_m: f64,
    pub trials: usize,
    pub placed: usize,
    pub fixed_successes: usize,
    pub adaptive_successes: usize,
    /// Trials where the fixed map succeeded and the adaptive map failed.
    pub fixed_only_successes: usize,
    pub adaptive_only_successes: usize,
    pub joint_successes: usize,
    /// Adaptive successes by refinement round.
    pub adaptive_rounds: Vec<usize>,
    pub mean_fixed_length_m: Option<f64>,
    pub mean_adaptive_length_m: Option<f64>,
    /// `(adaptive - fixed) / fixed` successes, in percent.
    pub success_improvement_pct: Option<f64>,
    /// `(fixed - adaptive) / fixed` mean length over joint successes, in percent.
    pub length_improvement_pct: Option<f64>,
    pub timing: TimingSummary,
}

/// Mean timings in microseconds; excluded from determinism checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimingSummary {
    pub mean_build_us: f64,
    pub mean_fixed_plan_us: f64,
    pub mean_adaptive_plan_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: usize,
    pub seed: u64,
    pub cells: Vec<CellSummary>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(cfg: &BenchConfig, records: &[TrialRecord]) -> Aggregate {
    let cells = cfg
        .cell_sizes_m
        .iter()
        .map(|&cell| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.cell_size == cell).collect();
            let count = |f: &dyn Fn(&TrialRecord) -> bool| rs.iter().filter(|r| f(r)).count();
            let fixed = count(&|r| r.fixed_success);
            let adaptive = count(&|r| r.adaptive_success);
            let joint: Vec<&&TrialRecord> =
                rs.iter().filter(|r| r.fixed_success && r.adaptive_success).collect();
            let mean_fixed = mean(joint.iter().filter_map(|r| r.fixed_metric_length));
            let mean_adaptive = mean(joint.iter().filter_map(|r| r.adaptive_metric_length));
            let max_round = rs.iter().filter_map(|r| r.adaptive_round).max().unwrap_or(0);
            let mut rounds = vec![0; max_round + 1];
            for r in rs.iter().filter_map(|r| r.adaptive_round) {
                rounds[r] += 1;
            }
            CellSummary {
                cell_size_m: cell,
                effective_cell_size_m: rs.first().map_or(cell, |r| r.effective_cell_size),
                trials: rs.len(),
                placed: count(&|r| r.placed),
                fixed_successes: fixed,
                adaptive_successes: adaptive,
                fixed_only_successes: count(&|r| r.fixed_success && !r.adaptive_success),
                adaptive_only_successes: count(&|r| r.adaptive_success && !r.fixed_success),
                joint_successes: joint.len(),
                adaptive_rounds: rounds,
                mean_fixed_length_m: mean_fixed,
                mean_adaptive_length_m: mean_adaptive,
                success_improvement_pct: (fixed > 0)
                    .then(|| (adaptive as f64 - fixed as f64) / fixed as f64 * 100.0),
                length_improvement_pct: match (mean_fixed, mean_adaptive) {
                    (Some(f), Some(a)) if f > 0.0 => Some((f - a) / f * 100.0),
                    _ => None,
                },
                timing: TimingSummary {
                    mean_build_us: mean(rs.iter().map(|r| r.build_us)).unwrap_or(0.0),
                    mean_fixed_plan_us: mean(rs.iter().map(|r| r.fixed_plan_us)).unwrap_or(0.0),
                    mean_adaptive_plan_us: mean(rs.iter().map(|r| r.adaptive_plan_us)).unwrap_or(0.0),
                },
            }
        })
        .collect();
    Aggregate {
        trials: cfg.trials,
        seed: cfg.seed,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(threshold: f64) -> BenchConfig {
        BenchConfig {
            trials: 2,
            domain_x_m: 40.0,
            domain_y_m: 30.0,
            cell_sizes_m: vec![2.0, 3.0],
            perlin_threshold: threshold,
            perlin_samples_per_m: 3.0,
            perlin_frequency_per_m: 0.08,
            workers: 1,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn obstacle_free_map_both_succeed_equally() {
        let cfg = BenchConfig { trials: 1, ..tiny(1.5) };
        let recs = run_campaign(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert_eq!(r.points, 0);
            assert!(r.fixed_success && r.adaptive_success);
            assert_eq!(r.fixed_metric_length, r.adaptive_metric_length);
            assert_eq!(r.adaptive_round, Some(0));
        }
    }

    #[test]
    fn csv_is_deterministic_apart_from_timings() {
        let cfg = tiny(0.1);
        let strip = |recs: &[TrialRecord]| {
            let mut buf = Vec::new();
            write_csv(recs, &mut buf).unwrap();
            String::from_utf8(buf)
                .unwrap()
                .lines()
                .map(|l| l.split(',').take(CSV_DETERMINISTIC_COLUMNS).collect::<Vec<_>>().join(","))
                .collect::<Vec<_>>()
        };
        let a = run_campaign(&cfg).unwrap();
        let b = run_campaign(&BenchConfig { workers: 2, ..cfg.clone() }).unwrap();
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(CSV_HEADER.split(',').count(), CSV_DETERMINISTIC_COLUMNS + 3);
    }

    #[test]
    fn padded_domain_has_exact_leaves() {
        let map = Aabb::from_bounds(&[0.0, 0.0], &[200.0, 150.0]).unwrap();
        let d = padded_domain(&map, 2.6, 7).unwrap();
        assert_eq!(d.edge(0) / 128.0, 2.6);
        assert_eq!(d.edge(1), d.edge(0));
    }
}
