//! Run configuration: a TOML file that selects codes and methods, seeds
//! the stochastic searches, tunes each search family, and names the
//! output paths. Absent keys fall back to the module defaults, so an
//! empty file is a complete configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::decoder::{DecConfig, Decoder};
use crate::ets::EtsConfig;
use crate::latent::LatentConfig;
use crate::lift::{default_patterns, default_splits, CrtSplit, SearchBudget};
use crate::witness::Method;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown method {0:?}; expected lat, blk, fib, crt, dir, ets, dec, or exact")]
    UnknownMethod(String),
    #[error("unknown decoder {0:?}; expected sum-product or min-sum")]
    UnknownDecoder(String),
    #[error("dec.p = {0} out of range; need 0 < p < 0.5")]
    BadProbability(f64),
}

/// Whole-run settings. Every field has a working default; a config file
/// only overrides what it mentions. Unknown keys are rejected so typos
/// fail loudly instead of silently running the defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog file; a CLI --catalog flag takes precedence.
    pub catalog: Option<PathBuf>,
    /// Code ids to run; empty means every catalog entry.
    pub codes: Vec<String>,
    /// Method names to run; empty means all seven witness searches.
    pub methods: Vec<String>,
    /// Master seed for the stochastic methods. Section-level seeds
    /// (dir.seed, dec.seed) override it.
    pub seed: Option<u64>,
    /// Worker threads; results are invariant in this by construction.
    pub workers: Option<usize>,
    pub out: OutPaths,
    pub lat: LatSection,
    pub blk: BlkSection,
    pub fib: FibSection,
    pub crt: CrtSection,
    pub dir: DirSection,
    pub ets: EtsSection,
    pub dec: DecSection,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    /// Witness-search methods to dispatch, in fixed canonical order so
    /// runs are independent of the order the config listed them in.
    pub fn selected_methods(&self) -> Result<Vec<Method>, ConfigError> {
        if self.methods.is_empty() {
            return Ok(Method::ALL.to_vec());
        }
        let mut picked = Vec::new();
        for name in &self.methods {
            if name == "exact" {
                continue;
            }
            let m: Method = name
                .parse()
                .map_err(|_| ConfigError::UnknownMethod(name.clone()))?;
            if !picked.contains(&m) {
                picked.push(m);
            }
        }
        picked.sort();
        Ok(picked)
    }

    /// Whether the exact latent certification was named in `methods`.
    /// It runs through its own command (it needs a block factor and a
    /// threshold), so the search dispatcher only reports the selection.
    pub fn exact_selected(&self) -> bool {
        self.methods.iter().any(|m| m == "exact")
    }

    /// Fails if any selected method's section cannot be resolved.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let methods = self.selected_methods()?;
        if methods.contains(&Method::Dec) {
            self.dec.resolve(self.seed)?;
        }
        Ok(())
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or(1).max(1)
    }

    /// Budget for the quotient-level searches (blk, fib, crt), seeded
    /// from the global seed when one is set.
    pub fn quotient_budget(&self) -> SearchBudget {
        let mut b = SearchBudget::quotient_default();
        if let Some(seed) = self.seed {
            b.seed = seed;
        }
        b
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutPaths {
    pub store: PathBuf,
    pub report_text: PathBuf,
    pub report_csv: PathBuf,
    /// Directory for CNF exports from the exact certification.
    pub cnf_dir: PathBuf,
}

impl Default for OutPaths {
    fn default() -> Self {
        OutPaths {
            store: "out/witnesses.jsonl".into(),
            report_text: "out/report.txt".into(),
            report_csv: "out/report.csv".into(),
            cnf_dir: "out/cnf".into(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatSection {
    pub periods: Option<Vec<u64>>,
    pub max_pairs: Option<usize>,
    pub pair_pool: Option<usize>,
    pub budget: Option<usize>,
}

impl LatSection {
    pub fn resolve(&self) -> LatentConfig {
        let mut cfg = LatentConfig::default();
        cfg.periods = self.periods.clone();
        if let Some(v) = self.max_pairs {
            cfg.max_pairs = v;
        }
        if let Some(v) = self.pair_pool {
            cfg.pair_pool = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        cfg
    }
}

/// Divisors of p in [2, 8]: the default block-factor schedule. Small
/// factors keep the quotient dimension large enough to be useful.
fn divisor_schedule(p: usize) -> Vec<usize> {
    (2..=8).filter(|m| p % m == 0).collect()
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlkSection {
    pub m_list: Option<Vec<usize>>,
}

impl BlkSection {
    /// Block factors to run for a code with block length p. A configured
    /// list is filtered to divisors of p so one list can serve a whole
    /// catalog; codes it cannot divide are skipped, not errors.
    pub fn m_list(&self, p: usize) -> Vec<usize> {
        match &self.m_list {
            Some(list) => {
                let mut out: Vec<usize> =
                    list.iter().copied().filter(|&m| m >= 2 && p % m == 0).collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            None => divisor_schedule(p),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FibSection {
    pub m_list: Option<Vec<usize>>,
    /// Fiber patterns shared across block factors; entries with indices
    /// outside 0..m are skipped for that m. None selects the built-in
    /// proper-pattern schedule per factor.
    pub patterns: Option<Vec<Vec<usize>>>,
}

impl FibSection {
    pub fn m_list(&self, p: usize) -> Vec<usize> {
        match &self.m_list {
            Some(list) => {
                let mut out: Vec<usize> =
                    list.iter().copied().filter(|&m| m >= 2 && p % m == 0).collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            None => divisor_schedule(p),
        }
    }

    pub fn patterns(&self, m: usize) -> Vec<Vec<usize>> {
        match &self.patterns {
            Some(list) => list
                .iter()
                .filter(|s| {
                    !s.is_empty()
                        && s.len() < m
                        && s.windows(2).all(|w| w[0] < w[1])
                        && s.iter().all(|&j| j < m)
                })
                .cloned()
                .collect(),
            None => default_patterns(m),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrtSection {
    /// Coprime splits as [q1, q2] pairs; invalid pairs for a given p are
    /// skipped. None selects every coprime factorization, both orders.
    pub splits: Option<Vec<[usize; 2]>>,
    /// Largest number of restricted-kernel basis vectors combined.
    pub combo_max: Option<usize>,
}

impl CrtSection {
    pub fn splits(&self, p: usize) -> Vec<CrtSplit> {
        match &self.splits {
            Some(list) => list
                .iter()
                .filter_map(|&[q1, q2]| CrtSplit::new(p, q1, q2).ok())
                .collect(),
            None => default_splits(p),
        }
    }

    pub fn combo_max(&self) -> usize {
        self.combo_max.unwrap_or(3)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirSection {
    pub sizes: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

impl DirSection {
    pub fn budget(&self, global_seed: Option<u64>) -> SearchBudget {
        let mut b = SearchBudget::dir_default();
        if let Some(sizes) = &self.sizes {
            b.sizes = sizes.clone();
        }
        if let Some(t) = self.trials {
            b.trials_per_size = t;
        }
        if let Some(seed) = self.seed.or(global_seed) {
            b.seed = seed;
        }
        b
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtsSection {
    pub max_stage: Option<usize>,
    pub cycle_budget: Option<usize>,
    pub frontier_cap: Option<usize>,
    pub pair_cap: Option<usize>,
}

impl EtsSection {
    pub fn resolve(&self) -> EtsConfig {
        let mut cfg = EtsConfig::default();
        if let Some(v) = self.max_stage {
            cfg.max_stage = v;
        }
        if let Some(v) = self.cycle_budget {
            cfg.cycle_budget = v;
        }
        if let Some(v) = self.frontier_cap {
            cfg.frontier_cap = v;
        }
        if let Some(v) = self.pair_cap {
            cfg.pair_cap = v;
        }
        cfg
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecSection {
    pub p: Option<f64>,
    pub trials: Option<usize>,
    pub max_iters: Option<usize>,
    pub decoder: Option<String>,
    pub seed: Option<u64>,
}

impl DecSection {
    pub fn resolve(&self, global_seed: Option<u64>) -> Result<DecConfig, ConfigError> {
        let mut cfg = DecConfig::default();
        if let Some(p) = self.p {
            if !(p > 0.0 && p < 0.5) {
                return Err(ConfigError::BadProbability(p));
            }
            cfg.p = p;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(it) = self.max_iters {
            cfg.max_iters = it;
        }
        if let Some(name) = &self.decoder {
            cfg.decoder = match name.as_str() {
                "sum-product" => Decoder::SumProduct,
                "min-sum" => Decoder::MinSum,
                other => return Err(ConfigError::UnknownDecoder(other.to_string())),
            };
        }
        if let Some(seed) = self.seed.or(global_seed) {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}
