use std::path::Path;

use anyhow::{bail, Context, Result};
use goalshot::aim::AimConfig;
use goalshot::dynamics::DynamicsConfig;
use goalshot::experiment::{ExperimentConfig, KeeperModel};
use goalshot::geometry::FieldConfig;
use goalshot::mlp::TrainConfig;
use goalshot::policy::PolicyConfig;
use goalshot::scene::GenConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub games: usize,
    pub shots_per_game: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { games: 100, shots_per_game: 10 }
    }
}

/// Everything a run needs, read from a TOML file.
///
/// The top-level `seed` drives every random stream (generation, split,
/// balancing, weight init, shuffling, experiments).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub field: FieldConfig,
    pub dynamics: DynamicsConfig,
    pub aim: AimConfig,
    #[serde(skip_serializing)]
    pub train: TrainConfig,
    pub policy: PolicyConfig,
    /// keeper facing the experiment shots; defaults to `gen.keeper`
    pub keeper: Option<KeeperModel>,
    pub gen: GenConfig,
    pub experiment: ExperimentSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        Self::parse(&text).with_context(|| format!("{}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| anyhow::anyhow!("{}", e.message()))?;
        if table.get("train").and_then(|t| t.get("seed")).is_some() {
            bail!("`train.seed` is not accepted; set the top-level `seed`");
        }
        let cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| anyhow::anyhow!("{}", e.message()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate().context("[field]")?;
        self.dynamics.validate().context("[dynamics]")?;
        self.aim.validate(&self.field).context("[aim]")?;
        self.train.validate().context("[train]")?;
        self.policy.validate().context("[policy]")?;
        self.keeper().validate().context("[keeper]")?;
        self.gen.validate(&self.field).context("[gen]")?;
        if self.experiment.games == 0 || self.experiment.shots_per_game == 0 {
            bail!("[experiment]: games and shots_per_game must be at least 1");
        }
        Ok(())
    }

    pub fn keeper(&self) -> KeeperModel {
        self.keeper.unwrap_or(self.gen.keeper)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            games: self.experiment.games,
            shots_per_game: self.experiment.shots_per_game,
            keeper: self.keeper(),
            gen: self.gen,
            dynamics: self.dynamics,
            field: self.field,
            seed: self.seed,
        }
    }

    /// The effective configuration as TOML, loadable by [`RunConfig::parse`].
    pub fn to_toml(&self) -> Result<String> {
        let mut table = toml::Table::try_from(self)?;
        let mut train = toml::Table::try_from(&self.train)?;
        train.remove("seed");
        table.insert("train".into(), toml::Value::Table(train));
        Ok(toml::to_string(&table)?)
    }
}
