//! Training, evaluation and sweep drivers.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use leoris_core::env::{Environment, RsmaEnv};
use leoris_core::seeding::{subseed, tags};
use leoris_core::{CoreError, RisMode, UserLayout};
use leoris_rl::a3c::A3cLearner;
use leoris_rl::checkpoint::{self, Section};
use leoris_rl::diag::DiagWriter;
use leoris_rl::mlp::Mlp;
use leoris_rl::replay::{BufferItem, ReplayBuffer};
use leoris_rl::td3::Td3Agent;
use leoris_rl::trpo::TrpoAgent;

use crate::config::{AgentConfig, ExperimentConfig, HarnessError};
use crate::metrics::{
    iqr, median, write_metrics_csv, EpisodeStats,
};
use crate::recording::RecordingEnv;

pub struct SeedResult {
    pub seed: u64,
    pub episodes: Vec<EpisodeStats>,
    pub sections: Vec<Section>,
}

fn build_env(cfg: &ExperimentConfig, seed: u64, worker: u64) -> Result<RsmaEnv, CoreError> {
    RsmaEnv::new(
        cfg.scenario.clone(),
        cfg.env.clone(),
        subseed(seed, &[tags::ENV, worker]),
    )
}

/// Trains one agent on one seed; returns per-episode stats and the final
/// parameter sections. Writes per-update diagnostics when `out` is given.
pub fn train_one_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    out: Option<&Path>,
) -> Result<SeedResult, HarnessError> {
    let sink: Arc<Mutex<Vec<EpisodeStats>>> = Arc::new(Mutex::new(Vec::new()));
    let dump = |w: u64| -> Option<PathBuf> {
        if cfg.dump_transitions {
            out.map(|d| d.join(format!("transitions_seed{seed}_w{w}.jsonl")))
        } else {
            None
        }
    };
    let wrap = |env: RsmaEnv, w: u64, sink: Arc<Mutex<Vec<EpisodeStats>>>| {
        let rec = RecordingEnv::new(env, seed, sink);
        match dump(w) {
            Some(path) => rec.with_dump(path),
            None => rec,
        }
    };

    let sections = match &cfg.agent {
        AgentConfig::Td3(acfg) => {
            let mut env = wrap(build_env(cfg, seed, 0)?, 0, sink.clone());
            let obs_dim = env.obs_dim();
            let act_dim = env.action_dim();
            let mut agent = Td3Agent::new(obs_dim, act_dim, acfg.clone(), seed);
            let mut buffer = ReplayBuffer::new(acfg.buffer_capacity);
            let mut diag = out.map(|d| {
                DiagWriter::new(
                    d.join(format!("diag_td3_seed{seed}.csv")),
                    &["update", "critic1_loss", "critic2_loss", "actor_loss", "q1_mean", "critic_grad_norm", "actor_grad_norm"],
                )
            });
            let mut obs = env.reset();
            let mut steps = 0usize;
            for _ep in 0..cfg.episodes {
                loop {
                    let action = if steps < acfg.start_steps {
                        agent.random_action()
                    } else {
                        agent.select_action(&obs, true)
                    };
                    let outcm = env.step(&action);
                    steps += 1;
                    buffer.push(BufferItem {
                        obs: std::mem::take(&mut obs),
                        action,
                        reward: outcm.reward,
                        next_obs: outcm.obs.clone(),
                        done: outcm.done,
                    });
                    obs = outcm.obs;
                    let warm = steps >= acfg.start_steps && buffer.len() >= acfg.batch_size;
                    if warm && steps % acfg.update_every.max(1) == 0 {
                        let d = agent.update(&buffer, acfg.batch_size)?;
                        if let Some(w) = diag.as_mut() {
                            w.append(&[
                                agent.update_count() as f64,
                                d.critic1_loss,
                                d.critic2_loss,
                                d.actor_loss.unwrap_or(f64::NAN),
                                d.q1_mean,
                                d.critic_grad_norm,
                                d.actor_grad_norm,
                            ])?;
                        }
                    }
                    if outcm.done {
                        break;
                    }
                }
                obs = env.reset();
            }
            vec![
                Section::new("actor", agent.actor.widths().to_vec(), agent.actor.flat_params()),
                Section::new("critic1", agent.critic1.widths().to_vec(), agent.critic1.flat_params()),
                Section::new("critic2", agent.critic2.widths().to_vec(), agent.critic2.flat_params()),
                Section::new(
                    "target_actor",
                    agent.target_actor.widths().to_vec(),
                    agent.target_actor.flat_params(),
                ),
                Section::new(
                    "target_critic1",
                    agent.target_critic1.widths().to_vec(),
                    agent.target_critic1.flat_params(),
                ),
                Section::new(
                    "target_critic2",
                    agent.target_critic2.widths().to_vec(),
                    agent.target_critic2.flat_params(),
                ),
            ]
        }
        AgentConfig::A3c(acfg) => {
            let probe = build_env(cfg, seed, 0)?;
            let (obs_dim, act_dim) = (probe.obs_dim(), probe.action_dim());
            drop(probe);
            let learner = A3cLearner::new(obs_dim, act_dim, acfg.clone(), seed);
            let sink_for_factory = sink.clone();
            let cfg_ref = &*cfg;
            learner.train(
                move |w| {
                    wrap(
                        build_env(cfg_ref, seed, w as u64).expect("worker env"),
                        w as u64,
                        sink_for_factory.clone(),
                    )
                },
                cfg.episodes,
            )?;
            {
                // Re-index: completion order across workers.
                let mut rows = sink.lock().unwrap();
                rows.truncate(cfg.episodes);
                for (i, row) in rows.iter_mut().enumerate() {
                    row.episode = i;
                    row.seed = seed;
                }
            }
            if let Some(d) = out {
                let mut w = DiagWriter::new(
                    d.join(format!("diag_a3c_seed{seed}.csv")),
                    &["update", "actor_grad_norm", "critic_grad_norm", "mean_advantage", "entropy"],
                );
                let store = learner.store.lock().unwrap();
                for row in &store.diag {
                    w.append(&[
                        row.update as f64,
                        row.actor_grad_norm,
                        row.critic_grad_norm,
                        row.mean_advantage,
                        row.entropy,
                    ])?;
                }
            }
            let store = learner.store.lock().unwrap();
            vec![
                Section::new(
                    "policy_mean",
                    store.policy.mean.widths().to_vec(),
                    store.policy.mean.flat_params(),
                ),
                Section::new("log_std", vec![store.policy.log_std.len()], store.policy.log_std.clone()),
                Section::new("critic", store.critic.widths().to_vec(), store.critic.flat_params()),
            ]
        }
        AgentConfig::Trpo(acfg) => {
            let mut env = wrap(build_env(cfg, seed, 0)?, 0, sink.clone());
            let obs_dim = env.obs_dim();
            let act_dim = env.action_dim();
            let mut agent = TrpoAgent::new(obs_dim, act_dim, acfg.clone(), seed);
            let mut diag = out.map(|d| {
                DiagWriter::new(
                    d.join(format!("diag_trpo_seed{seed}.csv")),
                    &["update", "accepted", "kl", "surrogate", "step_scale", "backtracks", "value_loss", "grad_norm"],
                )
            });
            loop {
                let done = { sink.lock().unwrap().len() >= cfg.episodes };
                if done {
                    break;
                }
                let (d, _) = agent.train_update(&mut env)?;
                if let Some(w) = diag.as_mut() {
                    w.append(&[
                        d.update as f64,
                        if d.accepted { 1.0 } else { 0.0 },
                        d.kl,
                        d.surrogate,
                        d.step_scale,
                        d.backtracks as f64,
                        d.value_loss,
                        d.grad_norm,
                    ])?;
                }
            }
            sink.lock().unwrap().truncate(cfg.episodes);
            vec![
                Section::new(
                    "policy_mean",
                    agent.policy.mean.widths().to_vec(),
                    agent.policy.mean.flat_params(),
                ),
                Section::new("log_std", vec![agent.policy.log_std.len()], agent.policy.log_std.clone()),
                Section::new("value", agent.value.widths().to_vec(), agent.value.flat_params()),
            ]
        }
    };

    let episodes = Arc::try_unwrap(sink)
        .map(|m| m.into_inner().unwrap())
        .unwrap_or_else(|arc| arc.lock().unwrap().clone());
    Ok(SeedResult { seed, episodes, sections })
}

/// Full training campaign: every seed (in parallel), metrics.csv, config
/// snapshot and one checkpoint per seed. Returns all episode rows in seed
/// order.
pub fn run_training(cfg: &ExperimentConfig) -> Result<Vec<EpisodeStats>, HarnessError> {
    cfg.validate()?;
    let out = PathBuf::from(&cfg.out_dir);
    cfg.save_snapshot(&out)?;

    let results: Vec<Result<SeedResult, HarnessError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for &seed in &cfg.seeds {
            let out_ref = out.clone();
            handles.push(scope.spawn(move || train_one_seed(cfg, seed, Some(&out_ref))));
        }
        handles.into_iter().map(|h| h.join().expect("seed thread panicked")).collect()
    });

    let mut rows = Vec::new();
    for result in results {
        let res = result?;
        let ckpt = out.join(format!("checkpoint_seed{}.ckpt", res.seed));
        let metadata = serde_json::json!({
            "format": "NNCKPT01",
            "agent": cfg.agent.name(),
            "config_hash": cfg.hash(),
            "seed": res.seed,
            "sections": res.sections.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        });
        checkpoint::save(&ckpt, &res.sections, &metadata)?;
        rows.extend(res.episodes);
    }
    write_metrics_csv(&out.join("metrics.csv"), &cfg.hash(), &rows)?;
    Ok(rows)
}

/// Frozen-policy evaluation summary.
#[derive(Debug, Clone, Default)]
pub struct EvalAggregate {
    pub episodes: usize,
    pub mean_reward: f64,
    pub mean_ee: f64,
    pub mean_sum_rate: f64,
    pub reliability: f64,
}

enum GreedyPolicy {
    Deterministic(Mlp),
    MeanHead(Mlp),
}

impl GreedyPolicy {
    fn act(&self, obs: &[f64]) -> Vec<f64> {
        match self {
            GreedyPolicy::Deterministic(net) => {
                net.forward(obs).expect("actor forward").iter().map(|v| v.tanh()).collect()
            }
            GreedyPolicy::MeanHead(net) => net
                .forward(obs)
                .expect("policy forward")
                .iter()
                .map(|v| v.clamp(-1.0, 1.0))
                .collect(),
        }
    }
}

fn greedy_from_sections(
    agent_kind: &str,
    sections: &[Section],
    obs_dim: usize,
    act_dim: usize,
) -> Result<GreedyPolicy, HarnessError> {
    let (name, wrap): (&str, fn(Mlp) -> GreedyPolicy) = match agent_kind {
        "td3" => ("actor", GreedyPolicy::Deterministic),
        "a3c" | "trpo" => ("policy_mean", GreedyPolicy::MeanHead),
        other => {
            return Err(HarnessError::Schema(format!("unknown agent kind `{other}` in checkpoint")))
        }
    };
    let section = checkpoint::find(sections, name)?;
    let net = Mlp::from_flat(&section.widths, section.params.clone())?;
    if net.input_dim() != obs_dim || net.output_dim() != act_dim {
        return Err(HarnessError::Rl(leoris_rl::RlError::checkpoint(format!(
            "checkpoint network is {}x{} but the scenario needs {obs_dim}x{act_dim}",
            net.input_dim(),
            net.output_dim()
        ))));
    }
    Ok(wrap(net))
}

/// Greedy (mean-action) evaluation of a checkpoint file under a config.
pub fn evaluate_checkpoint(
    ckpt_path: &Path,
    cfg: &ExperimentConfig,
    episodes: usize,
    seed: u64,
) -> Result<(EvalAggregate, Vec<EpisodeStats>), HarnessError> {
    let (sections, metadata) = checkpoint::load(ckpt_path)?;
    let kind = metadata
        .get("agent")
        .and_then(|v| v.as_str())
        .map(|s| s.to_string())
        .unwrap_or_else(|| cfg.agent.name().to_string());
    evaluate_sections(&kind, &sections, cfg, episodes, seed)
}

/// Evaluation from in-memory sections (used by sweeps).
pub fn evaluate_sections(
    agent_kind: &str,
    sections: &[Section],
    cfg: &ExperimentConfig,
    episodes: usize,
    seed: u64,
) -> Result<(EvalAggregate, Vec<EpisodeStats>), HarnessError> {
    let env_inner = RsmaEnv::new(
        cfg.scenario.clone(),
        cfg.env.clone(),
        subseed(seed, &[tags::EVAL]),
    )?;
    let sink: Arc<Mutex<Vec<EpisodeStats>>> = Arc::new(Mutex::new(Vec::new()));
    let mut env = RecordingEnv::new(env_inner, seed, sink.clone());
    let policy = greedy_from_sections(agent_kind, sections, env.obs_dim(), env.action_dim())?;

    for _ in 0..episodes {
        let mut obs = env.reset();
        loop {
            let out = env.step(&policy.act(&obs));
            obs = out.obs;
            if out.done {
                break;
            }
        }
    }
    let rows = sink.lock().unwrap().clone();
    let n = rows.len().max(1) as f64;
    let agg = EvalAggregate {
        episodes: rows.len(),
        mean_reward: rows.iter().map(|r| r.mean_reward).sum::<f64>() / n,
        mean_ee: rows.iter().map(|r| r.mean_ee).sum::<f64>() / n,
        mean_sum_rate: rows.iter().map(|r| r.mean_sum_rate).sum::<f64>() / n,
        reliability: rows.iter().map(|r| r.reliability).sum::<f64>() / n,
    };
    Ok((agg, rows))
}

/// Applies one sweep value onto a copy of the configuration.
pub fn apply_sweep_value(
    base: &ExperimentConfig,
    var: &str,
    value: &str,
) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = base.clone();
    let parse_f64 = |value: &str| -> Result<f64, HarnessError> {
        value
            .parse()
            .map_err(|_| HarnessError::Schema(format!("value `{value}` for `{var}` is not a number")))
    };
    let parse_usize = |value: &str| -> Result<usize, HarnessError> {
        value.parse().map_err(|_| {
            HarnessError::Schema(format!("value `{value}` for `{var}` is not an integer"))
        })
    };
    match var {
        "p_sat_max" => {
            let v = parse_f64(value)?;
            cfg.scenario.sat_power_max_w = v;
            // The satellite operates at its budget; coefficients scale it.
            cfg.scenario.sat_power_w = v;
        }
        "p_ris_max" => cfg.scenario.ris_power_max_w = parse_f64(value)?,
        "uav_altitude" => cfg.scenario.uav_altitude_m = parse_f64(value)?,
        "csi_error_variance" => cfg.scenario.csi_error_variance = parse_f64(value)?,
        "num_users" => {
            cfg.scenario.num_users = parse_usize(value)?;
            if !matches!(cfg.scenario.users, UserLayout::RandomInBox) {
                return Err(HarnessError::Schema(
                    "num_users sweep requires users = random_in_box".into(),
                ));
            }
        }
        "num_ris_elements" => cfg.scenario.num_ris_elements = parse_usize(value)?,
        "num_sat_antennas" => cfg.scenario.num_sat_antennas = parse_usize(value)?,
        "ris_mode" => cfg.scenario.ris_mode = RisMode::parse(value)?,
        other => {
            return Err(HarnessError::Schema(format!(
                "unknown sweep variable `{other}` (expected p_sat_max, p_ris_max, uav_altitude, \
                 csi_error_variance, num_users, num_ris_elements, num_sat_antennas or ris_mode)"
            )))
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub enum SweepMode {
    /// Retrain on every (value, seed) cell.
    Train,
    /// Evaluate frozen per-seed checkpoints from a finished training run.
    Eval { checkpoint_dir: PathBuf },
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: String,
    pub n_seeds: usize,
    pub median_ee: f64,
    pub iqr_ee: f64,
    pub median_sum_rate: f64,
    pub iqr_sum_rate: f64,
    pub median_reliability: f64,
    pub iqr_reliability: f64,
    pub median_reward: f64,
}

/// Runs a sweep over `values`, aggregating medians and interquartile
/// ranges across seeds, and writes `sweep.csv` under the config's out_dir.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    var: &str,
    values: &[String],
    mode: &SweepMode,
) -> Result<Vec<SweepRow>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Schema("sweep needs at least one value".into()));
    }
    if matches!(mode, SweepMode::Eval { .. })
        && matches!(var, "num_users" | "num_ris_elements" | "num_sat_antennas")
    {
        return Err(HarnessError::Schema(format!(
            "`{var}` changes network dimensions; sweep it with --mode train"
        )));
    }

    let mut out_rows = Vec::new();
    for value in values {
        let cell_cfg = apply_sweep_value(cfg, var, value)?;
        let mut ee = Vec::new();
        let mut rate = Vec::new();
        let mut reliability = Vec::new();
        let mut reward = Vec::new();

        match mode {
            SweepMode::Eval { checkpoint_dir } => {
                let cells: Vec<Result<EvalAggregate, HarnessError>> =
                    std::thread::scope(|scope| {
                        let cell_cfg = &cell_cfg;
                        let mut handles = Vec::new();
                        for &seed in &cfg.seeds {
                            let ckpt = checkpoint_dir.join(format!("checkpoint_seed{seed}.ckpt"));
                            handles.push(scope.spawn(move || {
                                evaluate_checkpoint(&ckpt, cell_cfg, cell_cfg.eval_episodes, seed)
                                    .map(|(agg, _)| agg)
                            }));
                        }
                        handles.into_iter().map(|h| h.join().expect("eval thread")).collect()
                    });
                for cell in cells {
                    let agg = cell?;
                    ee.push(agg.mean_ee);
                    rate.push(agg.mean_sum_rate);
                    reliability.push(agg.reliability);
                    reward.push(agg.mean_reward);
                }
            }
            SweepMode::Train => {
                let cells: Vec<Result<SeedResult, HarnessError>> = std::thread::scope(|scope| {
                    let cell_cfg = &cell_cfg;
                    let mut handles = Vec::new();
                    for &seed in &cfg.seeds {
                        handles.push(scope.spawn(move || train_one_seed(cell_cfg, seed, None)));
                    }
                    handles.into_iter().map(|h| h.join().expect("train thread")).collect()
                });
                for cell in cells {
                    let res = cell?;
                    // Final 20% of training episodes summarise the cell.
                    let tail = res.episodes.len().max(5) / 5;
                    let last = &res.episodes[res.episodes.len().saturating_sub(tail)..];
                    let n = last.len().max(1) as f64;
                    ee.push(last.iter().map(|r| r.mean_ee).sum::<f64>() / n);
                    rate.push(last.iter().map(|r| r.mean_sum_rate).sum::<f64>() / n);
                    reliability.push(last.iter().map(|r| r.reliability).sum::<f64>() / n);
                    reward.push(last.iter().map(|r| r.mean_reward).sum::<f64>() / n);
                }
            }
        }

        out_rows.push(SweepRow {
            value: value.clone(),
            n_seeds: cfg.seeds.len(),
            median_ee: median(&ee),
            iqr_ee: iqr(&ee),
            median_sum_rate: median(&rate),
            iqr_sum_rate: iqr(&rate),
            median_reliability: median(&reliability),
            iqr_reliability: iqr(&reliability),
            median_reward: median(&reward),
        });
    }

    let out = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&out)?;
    let mut text = format!("# config_hash={}\n", cfg.hash());
    text.push_str(
        "var,value,n_seeds,median_ee,iqr_ee,median_sum_rate,iqr_sum_rate,median_reliability,iqr_reliability,median_reward\n",
    );
    for r in &out_rows {
        text.push_str(&format!(
            "{var},{},{},{},{},{},{},{},{},{}\n",
            r.value,
            r.n_seeds,
            r.median_ee,
            r.iqr_ee,
            r.median_sum_rate,
            r.iqr_sum_rate,
            r.median_reliability,
            r.iqr_reliability,
            r.median_reward
        ));
    }
    std::fs::write(out.join("sweep.csv"), text)?;
    Ok(out_rows)
}
