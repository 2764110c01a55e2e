//! Environment adapter that accumulates per-episode statistics from the
//! full transition records while exposing the lean `Environment` trait to
//! the agents.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use leoris_core::env::{Environment, Observation, RsmaEnv, StepOutcome, Transition};

use crate::metrics::EpisodeStats;

#[derive(Default)]
struct Accumulator {
    steps: usize,
    reward: f64,
    ee: f64,
    sum_rate: f64,
    psi_common: f64,
    psi_private: f64,
    psi_sat_power: f64,
    psi_ris_power: f64,
    psi_structural: f64,
    satisfied_steps: usize,
}

impl Accumulator {
    fn add(&mut self, t: &Transition) {
        self.steps += 1;
        self.reward += t.reward;
        self.ee += t.info.report.ee;
        self.sum_rate += t.info.report.sum_rate;
        self.psi_common += t.info.psi.common_sinr;
        let private_mean = if t.info.psi.private_sinr.is_empty() {
            0.0
        } else {
            t.info.psi.private_sinr.iter().sum::<f64>() / t.info.psi.private_sinr.len() as f64
        };
        self.psi_private += private_mean;
        self.psi_sat_power += t.info.psi.sat_power;
        self.psi_ris_power += t.info.psi.ris_power;
        self.psi_structural += t.info.psi.structural_sum();
        if t.info.psi.all_satisfied() {
            self.satisfied_steps += 1;
        }
    }

    fn finish(&mut self, seed: u64, episode: usize, wall_clock_s: f64) -> EpisodeStats {
        let n = self.steps.max(1) as f64;
        let stats = EpisodeStats {
            seed,
            episode,
            mean_reward: self.reward / n,
            mean_ee: self.ee / n,
            mean_sum_rate: self.sum_rate / n,
            psi_common: self.psi_common / n,
            psi_private: self.psi_private / n,
            psi_sat_power: self.psi_sat_power / n,
            psi_ris_power: self.psi_ris_power / n,
            psi_structural: self.psi_structural / n,
            reliability: self.satisfied_steps as f64 / n,
            wall_clock_s,
        };
        *self = Accumulator::default();
        stats
    }
}

/// Wraps an [`RsmaEnv`]: every completed episode pushes an
/// [`EpisodeStats`] row into the shared sink. Optionally dumps each
/// transition as a JSON line.
pub struct RecordingEnv {
    inner: RsmaEnv,
    sink: Arc<Mutex<Vec<EpisodeStats>>>,
    seed: u64,
    episode: usize,
    acc: Accumulator,
    started: Instant,
    dump_path: Option<PathBuf>,
}

impl RecordingEnv {
    pub fn new(inner: RsmaEnv, seed: u64, sink: Arc<Mutex<Vec<EpisodeStats>>>) -> Self {
        RecordingEnv {
            inner,
            sink,
            seed,
            episode: 0,
            acc: Accumulator::default(),
            started: Instant::now(),
            dump_path: None,
        }
    }

    /// Enables JSON-lines transition dumping to the given file.
    pub fn with_dump(mut self, path: PathBuf) -> Self {
        self.dump_path = Some(path);
        self
    }

    pub fn inner(&self) -> &RsmaEnv {
        &self.inner
    }

    fn dump(&self, t: &Transition) {
        if let Some(path) = &self.dump_path {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).ok();
            }
            if let Ok(mut f) = fs::OpenOptions::new().create(true).append(true).open(path) {
                if let Ok(line) = serde_json::to_string(t) {
                    writeln!(f, "{line}").ok();
                }
            }
        }
    }
}

impl Environment for RecordingEnv {
    fn obs_dim(&self) -> usize {
        self.inner.obs_dim()
    }

    fn action_dim(&self) -> usize {
        self.inner.action_dim()
    }

    fn reset(&mut self) -> Observation {
        self.inner.reset_env().expect("environment reset failed")
    }

    fn step(&mut self, action: &[f64]) -> StepOutcome {
        let t = self.inner.step_env(action).expect("environment step failed");
        self.acc.add(&t);
        if self.dump_path.is_some() {
            self.dump(&t);
        }
        if t.done {
            let wall = self.started.elapsed().as_secs_f64();
            let stats = self.acc.finish(self.seed, self.episode, wall);
            self.episode += 1;
            self.sink.lock().unwrap().push(stats);
        }
        StepOutcome { obs: t.next_obs, reward: t.reward, done: t.done }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use leoris_core::env::EnvConfig;
    use leoris_core::ScenarioConfig;

    #[test]
    fn records_one_row_per_episode() {
        let env_cfg = EnvConfig { horizon: 4, ..EnvConfig::default() };
        let inner = RsmaEnv::new(ScenarioConfig::desk(), env_cfg, 3).unwrap();
        let sink = Arc::new(Mutex::new(Vec::new()));
        let mut env = RecordingEnv::new(inner, 3, sink.clone());
        let d = env.action_dim();
        for _ in 0..2 {
            let mut _obs = env.reset();
            loop {
                let out = env.step(&vec![0.1; d]);
                if out.done {
                    break;
                }
            }
        }
        let rows = sink.lock().unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].episode, 0);
        assert_eq!(rows[1].episode, 1);
        assert!(rows[0].reliability >= 0.0 && rows[0].reliability <= 1.0);
        assert!(rows[0].mean_ee.is_finite());
    }
}
