use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BenchmarkSystem, DynamicalSystem, LinearGaussianSystem};
use crate::optimizer::GaParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Benchmark,
    LinearGaussian {
        a: f64,
        c: f64,
        q: f64,
        r: f64,
        #[serde(default)]
        initial_mean: f64,
        #[serde(default = "one")]
        initial_variance: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramConfig {
    pub bins: usize,
    pub min: f64,
    pub max: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bins: 101,
            min: -1.5,
            max: 1.0,
        }
    }
}

/// Everything a command needs. Serialized as TOML; every field has a default
/// matching the published benchmark setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Worker threads; 0 means one per available core. Not echoed into
    /// summaries, which must not depend on where or how fast a run happened.
    #[serde(skip_serializing)]
    pub workers: usize,
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
    pub horizon: usize,
    pub budget: usize,
    pub particles: usize,
    /// Monte Carlo draws per cost evaluation (`K`).
    pub draws: usize,
    /// Paired draws for the gain statistics.
    pub gain_draws: usize,
    pub common_random_numbers: bool,
    pub system: SystemConfig,
    pub ga: GaParams,
    pub histogram: HistogramConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            workers: 0,
            out_dir: PathBuf::from("out"),
            horizon: 60,
            budget: 21,
            particles: 500,
            draws: 1000,
            gain_draws: 100_000,
            common_random_numbers: false,
            system: SystemConfig::Benchmark,
            ga: GaParams::default(),
            histogram: HistogramConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.budget == 0 || self.budget > self.horizon + 1 {
            return fail(format!(
                "budget must be in [1, horizon + 1 = {}], got {}",
                self.horizon + 1,
                self.budget
            ));
        }
        if self.particles == 0 || self.draws == 0 || self.gain_draws == 0 {
            return fail("particles, draws and gain_draws must be positive".into());
        }
        if self.histogram.bins == 0 || self.histogram.min.partial_cmp(&self.histogram.max) != Some(std::cmp::Ordering::Less) {
            return fail("histogram needs bins >= 1 and min < max".into());
        }
        self.ga.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.build_system().map(|_| ())
    }

    pub fn build_system(&self) -> Result<Box<dyn DynamicalSystem>> {
        Ok(match self.system {
            SystemConfig::Benchmark => Box::new(BenchmarkSystem::new(self.horizon)),
            SystemConfig::LinearGaussian {
                a,
                c,
                q,
                r,
                initial_mean,
                initial_variance,
            } => {
                let system = LinearGaussianSystem::new(self.horizon, a, c, q, r)
                    .with_initial(initial_mean, initial_variance);
                system.validate().map_err(|e| Error::Config(e.to_string()))?;
                Box::new(system)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_benchmark_setup() {
        let c = ExperimentConfig::default();
        assert_eq!((c.horizon, c.budget, c.particles, c.draws), (60, 21, 500, 1000));
        assert_eq!((c.ga.population_size, c.ga.generations), (50, 25));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let mut c = ExperimentConfig::default();
        c.system = SystemConfig::LinearGaussian {
            a: 0.9,
            c: 1.0,
            q: 1.0,
            r: 1.0,
            initial_mean: 0.0,
            initial_variance: 2.0,
        };
        c.ga.generations = 3;
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_files_use_defaults() {
        let c = ExperimentConfig::from_toml(
            "seed = 9\nparticles = 100\n[ga]\ngenerations = 4\n[system]\nkind = \"linear-gaussian\"\na = 1.0\nc = 2.0\nq = 0.5\nr = 0.5\n",
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.ga.generations, 4);
        assert_eq!(c.ga.population_size, 50);
        assert!(matches!(c.system, SystemConfig::LinearGaussian { initial_variance, .. } if initial_variance == 1.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for text in [
            "budget = 70",
            "particles = 0",
            "unknown_key = 1",
            "[ga]\npopulation_size = 5",
            "[system]\nkind = \"linear-gaussian\"\na = 1.0\nc = 1.0\nq = -1.0\nr = 1.0",
            "[histogram]\nmin = 1.0\nmax = 0.0",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }
}
