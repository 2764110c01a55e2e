//! Twin delayed deterministic policy gradient: twin critics trained on the
//! clipped double-Q target at a smoothed target action, delayed actor
//! updates, Polyak-averaged target copies.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::adam::AdamState;
use crate::error::RlError;
use crate::mlp::{l2_norm, polyak_update, Mlp};
use crate::replay::ReplayBuffer;
use leoris_core::seeding::substream;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Td3Config {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub gamma: f64,
    /// Polyak coefficient for the target copies.
    pub tau: f64,
    /// Std of the clipped exploration noise.
    pub explore_noise: f64,
    /// Std of the target-action smoothing noise.
    pub target_noise: f64,
    /// Clip bound for both noises.
    pub noise_clip: f64,
    /// Actor (and target) update period in critic updates.
    pub policy_delay: u64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Uniform-random warmup actions before the policy takes over.
    pub start_steps: usize,
    /// Environment steps per gradient update (training-loop setting).
    pub update_every: usize,
}

impl Default for Td3Config {
    fn default() -> Self {
        Td3Config {
            hidden: vec![128, 128],
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            gamma: 0.99,
            tau: 0.005,
            explore_noise: 0.1,
            target_noise: 0.2,
            noise_clip: 0.5,
            policy_delay: 2,
            batch_size: 256,
            buffer_capacity: 100_000,
            start_steps: 1000,
            update_every: 1,
        }
    }
}

/// Per-update diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Td3Diag {
    pub critic1_loss: f64,
    pub critic2_loss: f64,
    /// Present only on delayed updates.
    pub actor_loss: Option<f64>,
    pub q1_mean: f64,
    pub critic_grad_norm: f64,
    pub actor_grad_norm: f64,
}

pub struct Td3Agent {
    pub cfg: Td3Config,
    obs_dim: usize,
    act_dim: usize,
    pub actor: Mlp,
    pub critic1: Mlp,
    pub critic2: Mlp,
    pub target_actor: Mlp,
    pub target_critic1: Mlp,
    pub target_critic2: Mlp,
    opt_actor: AdamState,
    opt_critic1: AdamState,
    opt_critic2: AdamState,
    rng: ChaCha8Rng,
    updates: u64,
    actor_updates: u64,
}

impl Td3Agent {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: Td3Config, seed: u64) -> Self {
        let mut rng = substream(seed, &[0x7d3]);
        let mut actor_widths = vec![obs_dim];
        actor_widths.extend_from_slice(&cfg.hidden);
        actor_widths.push(act_dim);
        let mut critic_widths = vec![obs_dim + act_dim];
        critic_widths.extend_from_slice(&cfg.hidden);
        critic_widths.push(1);

        let actor = Mlp::new(&actor_widths, 0.01, &mut rng);
        let critic1 = Mlp::new(&critic_widths, 1.0, &mut rng);
        let critic2 = Mlp::new(&critic_widths, 1.0, &mut rng);
        let opt_actor = AdamState::new(actor.param_count(), cfg.actor_lr);
        let opt_critic1 = AdamState::new(critic1.param_count(), cfg.critic_lr);
        let opt_critic2 = AdamState::new(critic2.param_count(), cfg.critic_lr);
        Td3Agent {
            target_actor: actor.clone(),
            target_critic1: critic1.clone(),
            target_critic2: critic2.clone(),
            actor,
            critic1,
            critic2,
            opt_actor,
            opt_critic1,
            opt_critic2,
            rng,
            updates: 0,
            actor_updates: 0,
            cfg,
            obs_dim,
            act_dim,
        }
    }

    pub fn update_count(&self) -> u64 {
        self.updates
    }

    pub fn actor_update_count(&self) -> u64 {
        self.actor_updates
    }

    fn deterministic_action(actor: &Mlp, obs: &[f64]) -> Vec<f64> {
        actor.forward(obs).expect("actor forward").iter().map(|v| v.tanh()).collect()
    }

    /// Policy action, optionally with clipped Gaussian exploration noise;
    /// always inside [-1, 1]^d.
    pub fn select_action(&mut self, obs: &[f64], explore: bool) -> Vec<f64> {
        let mut a = Self::deterministic_action(&self.actor, obs);
        if explore && self.cfg.explore_noise > 0.0 {
            let c = self.cfg.noise_clip;
            for v in a.iter_mut() {
                let noise = (self.rng.sample::<f64, _>(StandardNormal) * self.cfg.explore_noise)
                    .clamp(-c, c);
                *v = (*v + noise).clamp(-1.0, 1.0);
            }
        }
        a
    }

    /// Uniform warmup action.
    pub fn random_action(&mut self) -> Vec<f64> {
        (0..self.act_dim).map(|_| self.rng.random_range(-1.0..1.0)).collect()
    }

    fn critic_value(critic: &Mlp, obs: &[f64], action: &[f64]) -> f64 {
        let mut input = Vec::with_capacity(obs.len() + action.len());
        input.extend_from_slice(obs);
        input.extend_from_slice(action);
        critic.forward(&input).expect("critic forward")[0]
    }

    /// Bootstrap targets `y = r + gamma * min(q1_bar, q2_bar)` at the
    /// smoothed target action. Uses target copies only.
    pub fn targets(&mut self, items: &[&crate::replay::BufferItem]) -> Vec<f64> {
        let c = self.cfg.noise_clip;
        items
            .iter()
            .map(|item| {
                let mut a = Self::deterministic_action(&self.target_actor, &item.next_obs);
                if self.cfg.target_noise > 0.0 {
                    for v in a.iter_mut() {
                        let eps = (self.rng.sample::<f64, _>(StandardNormal)
                            * self.cfg.target_noise)
                            .clamp(-c, c);
                        *v = (*v + eps).clamp(-1.0, 1.0);
                    }
                }
                let q1 = Self::critic_value(&self.target_critic1, &item.next_obs, &a);
                let q2 = Self::critic_value(&self.target_critic2, &item.next_obs, &a);
                item.reward + self.cfg.gamma * q1.min(q2)
            })
            .collect()
    }

    /// One gradient update from a uniform replay batch. Every
    /// `policy_delay`-th call also updates the actor and the target copies.
    pub fn update(&mut self, buffer: &ReplayBuffer, batch_size: usize) -> Result<Td3Diag, RlError> {
        if buffer.len() < batch_size || batch_size == 0 {
            return Err(RlError::precondition(format!(
                "replay buffer holds {} items, batch needs {batch_size}",
                buffer.len()
            )));
        }
        let idx = buffer.sample_indices(batch_size, &mut self.rng);
        let items: Vec<&crate::replay::BufferItem> = idx.iter().map(|&i| buffer.get(i)).collect();
        let y = self.targets(&items);

        let mut diag = Td3Diag::default();
        let inv_b = 1.0 / batch_size as f64;

        // Critic regression on the shared targets.
        for which in 0..2 {
            let critic = if which == 0 { &self.critic1 } else { &self.critic2 };
            let mut grad = vec![0.0; critic.param_count()];
            let mut loss = 0.0;
            let mut q_acc = 0.0;
            for (item, yk) in items.iter().zip(y.iter()) {
                let mut input = Vec::with_capacity(self.obs_dim + self.act_dim);
                input.extend_from_slice(&item.obs);
                input.extend_from_slice(&item.action);
                let cache = critic.forward_cached(&input)?;
                let q = cache.output[0];
                let err = q - yk;
                loss += err * err * inv_b;
                q_acc += q * inv_b;
                critic.backward_accumulate(&cache, &[2.0 * err * inv_b], &mut grad)?;
            }
            if which == 0 {
                diag.critic1_loss = loss;
                diag.q1_mean = q_acc;
                diag.critic_grad_norm = l2_norm(&grad);
                self.opt_critic1.step(self.critic1.params_mut(), &grad);
            } else {
                diag.critic2_loss = loss;
                self.opt_critic2.step(self.critic2.params_mut(), &grad);
            }
        }

        self.updates += 1;

        // Delayed deterministic policy-gradient step and target refresh.
        if self.updates % self.cfg.policy_delay == 0 {
            let mut grad = vec![0.0; self.actor.param_count()];
            let mut loss = 0.0;
            for item in &items {
                let acache = self.actor.forward_cached(&item.obs)?;
                let squashed: Vec<f64> = acache.output.iter().map(|v| v.tanh()).collect();
                let mut input = Vec::with_capacity(self.obs_dim + self.act_dim);
                input.extend_from_slice(&item.obs);
                input.extend_from_slice(&squashed);
                let qcache = self.critic1.forward_cached(&input)?;
                loss -= qcache.output[0] * inv_b;
                // d(-q)/d(input), then through tanh into the actor head.
                let (_, dinput) = self.critic1.backward(&qcache, &[-inv_b])?;
                let upstream: Vec<f64> = dinput[self.obs_dim..]
                    .iter()
                    .zip(squashed.iter())
                    .map(|(d, a)| d * (1.0 - a * a))
                    .collect();
                self.actor.backward_accumulate(&acache, &upstream, &mut grad)?;
            }
            diag.actor_loss = Some(loss);
            diag.actor_grad_norm = l2_norm(&grad);
            self.opt_actor.step(self.actor.params_mut(), &grad);
            self.actor_updates += 1;

            let tau = self.cfg.tau;
            polyak_update(self.target_actor.params_mut(), self.actor.params(), tau);
            polyak_update(self.target_critic1.params_mut(), self.critic1.params(), tau);
            polyak_update(self.target_critic2.params_mut(), self.critic2.params(), tau);
        }
        Ok(diag)
    }
}
