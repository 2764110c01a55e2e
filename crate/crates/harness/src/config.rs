//! Experiment configuration: scenario + environment + agent + run shape,
//! loaded from JSON with strict schema checking.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use leoris_core::env::EnvConfig;
use leoris_core::ScenarioConfig;
use leoris_rl::a3c::A3cConfig;
use leoris_rl::td3::Td3Config;
use leoris_rl::trpo::TrpoConfig;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] leoris_core::CoreError),

    #[error(transparent)]
    Rl(#[from] leoris_rl::RlError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentConfig {
    Td3(Td3Config),
    A3c(A3cConfig),
    Trpo(TrpoConfig),
}

impl AgentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AgentConfig::Td3(_) => "td3",
            AgentConfig::A3c(_) => "a3c",
            AgentConfig::Trpo(_) => "trpo",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    /// Training episodes per seed.
    pub episodes: usize,
    pub seeds: Vec<u64>,
    /// Episodes per frozen-policy evaluation.
    pub eval_episodes: usize,
    pub out_dir: String,
    /// Also dump every transition as JSON lines (diagnostics; large).
    pub dump_transitions: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioConfig::default(),
            env: EnvConfig::default(),
            agent: AgentConfig::Td3(Td3Config::default()),
            episodes: 300,
            seeds: vec![1, 2, 3, 4, 5],
            eval_episodes: 10,
            out_dir: "runs/out".to_string(),
            dump_transitions: false,
        }
    }
}

impl ExperimentConfig {
    /// Laptop-scale defaults: reduced scenario, 64-unit networks, reward
    /// scaling that puts per-step rewards at O(1).
    pub fn desk(agent: AgentConfig) -> Self {
        ExperimentConfig {
            scenario: ScenarioConfig::desk(),
            env: EnvConfig { reward_scale: 100.0, lambda: 20.0, ..EnvConfig::default() },
            agent,
            ..ExperimentConfig::default()
        }
    }

    /// Desk TD3: short-horizon credit assignment, light networks, one
    /// gradient update per two environment steps.
    pub fn desk_td3() -> Self {
        Self::desk(AgentConfig::Td3(Td3Config {
            hidden: vec![64, 64],
            batch_size: 64,
            update_every: 2,
            start_steps: 1000,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.9,
            ..Td3Config::default()
        }))
    }

    /// Desk A3C: single deterministic worker, default learning rates.
    pub fn desk_a3c() -> Self {
        Self::desk(AgentConfig::A3c(A3cConfig {
            hidden: vec![64, 64],
            workers: 1,
            gamma: 0.9,
            init_log_std: -1.0,
            ..A3cConfig::default()
        }))
    }

    /// Desk TRPO: one-episode batches with a generous trust region and a
    /// fast value fit.
    pub fn desk_trpo() -> Self {
        Self::desk(AgentConfig::Trpo(TrpoConfig {
            hidden: vec![64, 64],
            steps_per_update: 200,
            value_iters: 15,
            value_lr: 3e-3,
            gamma: 0.9,
            kl_delta: 0.1,
            cg_damping: 0.1,
            init_log_std: -2.0,
            ..TrpoConfig::default()
        }))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Schema(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Schema(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<Vec<String>, HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Schema("seeds must be non-empty".into()));
        }
        if self.episodes == 0 {
            return Err(HarnessError::Schema("episodes must be >= 1".into()));
        }
        if self.eval_episodes == 0 {
            return Err(HarnessError::Schema("eval_episodes must be >= 1".into()));
        }
        Ok(self.scenario.validate()?)
    }

    /// FNV-1a hash of the canonical JSON encoding; stamped into every CSV
    /// so outputs are traceable to the exact configuration.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }

    pub fn save_snapshot(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        fs::write(dir.join("config.json"), text)?;
        Ok(())
    }
}
