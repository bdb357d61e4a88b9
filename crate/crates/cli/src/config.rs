//! Benchmark configuration: a flat TOML table whose keys carry their units.
//!
//! ```toml
//! trials = 200
//! seed = 1
//! domain_x_m = 200.0
//! domain_y_m = 150.0
//! cell_sizes_m = [2.6, 3.0, 3.4]
//! mcr_k = 2.0
//! max_refinement_rounds = 2
//! perlin_frequency_per_m = 0.03
//! perlin_octaves = 4
//! perlin_persistence = 0.5
//! perlin_threshold = 0.07
//! perlin_samples_per_m = 11.0
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use octogrid::mapgen::PerlinParams;
use octogrid::{Aabb, McrSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub trials: usize,
    pub seed: u64,
    pub domain_x_m: f64,
    pub domain_y_m: f64,
    pub cell_sizes_m: Vec<f64>,
    pub mcr_k: f64,
    pub max_refinement_rounds: usize,
    pub perlin_frequency_per_m: f64,
    pub perlin_octaves: u32,
    pub perlin_persistence: f64,
    pub perlin_threshold: f64,
    pub perlin_samples_per_m: f64,
    /// Start and goal must be at least this fraction of the domain diagonal apart.
    pub min_separation_fraction: f64,
    pub placement_attempts: usize,
    /// Worker threads for trials; 0 uses every available core.
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let p = PerlinParams::bench_default(0);
        Self {
            trials: 200,
            seed: 1,
            domain_x_m: p.domain.edge(0),
            domain_y_m: p.domain.edge(1),
            cell_sizes_m: vec![2.6, 3.0, 3.4],
            mcr_k: 2.0,
            max_refinement_rounds: 2,
            perlin_frequency_per_m: p.frequency,
            perlin_octaves: p.octaves,
            perlin_persistence: p.persistence,
            perlin_threshold: p.threshold,
            perlin_samples_per_m: p.samples_per_meter,
            min_separation_fraction: 0.8,
            placement_attempts: 200,
            workers: 0,
            out_dir: PathBuf::from("bench_out"),
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid bench config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.cell_sizes_m.is_empty() || self.cell_sizes_m.iter().any(|c| !(*c > 0.0)) {
            bail!("cell_sizes_m must be a non-empty list of positive sizes");
        }
        if !(self.min_separation_fraction >= 0.0) {
            bail!("min_separation_fraction must be non-negative");
        }
        self.domain()?;
        self.perlin(0).validate()?;
        McrSpec::new(1.0, self.mcr_k)?;
        Ok(())
    }

    pub fn domain(&self) -> anyhow::Result<Aabb> {
        if !(self.domain_x_m > 0.0 && self.domain_y_m > 0.0) {
            bail!("domain sizes must be positive");
        }
        Ok(Aabb::from_bounds(&[0.0, 0.0], &[self.domain_x_m, self.domain_y_m])?)
    }

    /// Perlin parameters of one trial.
    pub fn perlin(&self, seed: u64) -> PerlinParams {
        PerlinParams {
            seed,
            domain: Aabb::from_bounds(&[0.0, 0.0], &[self.domain_x_m.max(1e-9), self.domain_y_m.max(1e-9)])
                .expect("positive box"),
            frequency: self.perlin_frequency_per_m,
            octaves: self.perlin_octaves,
            persistence: self.perlin_persistence,
            threshold: self.perlin_threshold,
            samples_per_meter: self.perlin_samples_per_m,
        }
    }
}
