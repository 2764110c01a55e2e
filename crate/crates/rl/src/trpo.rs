//! Trust-region policy optimization: natural-gradient steps from a
//! conjugate-gradient solve against Fisher-vector products, scaled to the
//! KL radius and accepted through a backtracking line search; the value
//! network is fitted by plain gradient steps.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adam::AdamState;
use crate::error::RlError;
use crate::gae::estimate_advantages;
use crate::gaussian::{kl_diag_gaussian, log_prob_from_mean, log_prob_grads, GaussianPolicy};
use crate::mlp::{l2_norm, Mlp};
use leoris_core::env::Environment;
use leoris_core::seeding::substream;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrpoConfig {
    pub hidden: Vec<usize>,
    pub value_lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    /// Trust-region radius on the mean batch KL.
    pub kl_delta: f64,
    pub cg_iters: usize,
    pub cg_damping: f64,
    pub backtrack_coeff: f64,
    pub backtrack_iters: usize,
    /// Value-network gradient steps per policy update.
    pub value_iters: usize,
    /// Environment steps collected per update (rounded up to whole
    /// episodes).
    pub steps_per_update: usize,
    pub init_log_std: f64,
}

impl Default for TrpoConfig {
    fn default() -> Self {
        TrpoConfig {
            hidden: vec![128, 128],
            value_lr: 1e-3,
            gamma: 0.99,
            gae_lambda: 0.95,
            kl_delta: 0.01,
            cg_iters: 10,
            cg_damping: 0.1,
            backtrack_coeff: 0.8,
            backtrack_iters: 10,
            value_iters: 20,
            steps_per_update: 800,
            init_log_std: -0.5,
        }
    }
}

/// One collected on-policy batch (whole episodes).
#[derive(Debug, Clone, Default)]
pub struct TrpoBatch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub episode_returns: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrpoDiag {
    pub update: u64,
    pub accepted: bool,
    pub kl: f64,
    pub surrogate: f64,
    pub step_scale: f64,
    pub backtracks: usize,
    pub value_loss: f64,
    pub grad_norm: f64,
}

pub struct TrpoAgent {
    pub cfg: TrpoConfig,
    obs_dim: usize,
    act_dim: usize,
    pub policy: GaussianPolicy,
    pub value: Mlp,
    opt_value: AdamState,
    rng: ChaCha8Rng,
    updates: u64,
}

/// Solves `F x = b` for positive-definite `F` given through matrix-vector
/// products.
pub fn conjugate_gradient(
    fvp: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    iters: usize,
    residual_tol: f64,
) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..iters {
        if rr <= residual_tol {
            break;
        }
        let ap = fvp(&p);
        let pap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    x
}

impl TrpoAgent {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: TrpoConfig, seed: u64) -> Self {
        let mut rng = substream(seed, &[0x74b0]);
        let mut policy_widths = vec![obs_dim];
        policy_widths.extend_from_slice(&cfg.hidden);
        policy_widths.push(act_dim);
        let mut value_widths = vec![obs_dim];
        value_widths.extend_from_slice(&cfg.hidden);
        value_widths.push(1);
        let policy = GaussianPolicy::new(&policy_widths, cfg.init_log_std, &mut rng);
        let value = Mlp::new(&value_widths, 1.0, &mut rng);
        let opt_value = AdamState::new(value.param_count(), cfg.value_lr);
        TrpoAgent { cfg, obs_dim, act_dim, policy, value, opt_value, rng, updates: 0 }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.obs_dim, self.act_dim)
    }

    pub fn update_count(&self) -> u64 {
        self.updates
    }

    /// Mean action (used for evaluation).
    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        self.policy.mean.forward(obs).expect("policy forward")
    }

    /// Collects whole episodes until at least `min_steps` steps.
    pub fn collect_batch<E: Environment>(
        &mut self,
        env: &mut E,
        min_steps: usize,
    ) -> Result<TrpoBatch, RlError> {
        let mut batch = TrpoBatch::default();
        while batch.rewards.len() < min_steps {
            let mut obs = env.reset();
            let mut ep_return = 0.0;
            loop {
                let (action, _) = self.policy.sample(&obs, &mut self.rng)?;
                let outcome = env.step(&action);
                batch.obs.push(obs);
                batch.actions.push(action);
                batch.rewards.push(outcome.reward);
                batch.dones.push(outcome.done);
                ep_return += outcome.reward;
                obs = outcome.obs;
                if outcome.done {
                    batch.episode_returns.push(ep_return);
                    break;
                }
            }
        }
        Ok(batch)
    }

    /// One trust-region policy update plus value-network fitting.
    pub fn update_from_batch(&mut self, batch: &TrpoBatch) -> Result<TrpoDiag, RlError> {
        let t_len = batch.rewards.len();
        if t_len == 0 {
            return Err(RlError::precondition("empty batch"));
        }

        // Values with a zero bootstrap after the final (terminal) step.
        let mut values = Vec::with_capacity(t_len + 1);
        for obs in &batch.obs {
            values.push(self.value.forward(obs)?[0]);
        }
        values.push(0.0);
        let (adv, returns) = estimate_advantages(
            &batch.rewards,
            &values,
            &batch.dones,
            self.cfg.gamma,
            self.cfg.gae_lambda,
            true,
        );
        if adv.iter().any(|a| !a.is_finite()) {
            return Err(RlError::precondition("non-finite advantage in batch"));
        }

        // Old-policy quantities, cached per step.
        let old_log_std = self.policy.log_std.clone();
        let mut old_means = Vec::with_capacity(t_len);
        let mut mean_caches = Vec::with_capacity(t_len);
        let mut old_logps = Vec::with_capacity(t_len);
        for (obs, action) in batch.obs.iter().zip(batch.actions.iter()) {
            let cache = self.policy.mean.forward_cached(obs)?;
            old_logps.push(log_prob_from_mean(&cache.output, &old_log_std, action));
            old_means.push(cache.output.clone());
            mean_caches.push(cache);
        }

        // Ascent gradient of the surrogate at the old policy:
        // mean_t grad log pi(a_t|s_t) * A_t.
        let split = self.policy.mean.param_count();
        let n_params = self.policy.param_count();
        let inv_t = 1.0 / t_len as f64;
        let mut g = vec![0.0; n_params];
        for t in 0..t_len {
            let (d_mean, d_ls) = log_prob_grads(&old_means[t], &old_log_std, &batch.actions[t]);
            let upstream: Vec<f64> = d_mean.iter().map(|v| v * adv[t] * inv_t).collect();
            self.policy.mean.backward_accumulate(&mean_caches[t], &upstream, &mut g[..split])?;
            for (slot, dls) in g[split..].iter_mut().zip(d_ls.iter()) {
                *slot += dls * adv[t] * inv_t;
            }
        }
        let grad_norm = l2_norm(&g);
        let mut diag = TrpoDiag {
            update: self.updates + 1,
            grad_norm,
            value_loss: f64::NAN,
            ..TrpoDiag::default()
        };
        self.updates += 1;

        if grad_norm > 1e-12 {
            // Fisher-vector products of the diagonal-Gaussian policy:
            // mean block J^T diag(1/sigma^2) J averaged over states, a
            // constant 2 per log-std coordinate, plus damping.
            let inv_var: Vec<f64> = old_log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
            let policy_mean = &self.policy.mean;
            let obs_list = &batch.obs;
            let caches = &mean_caches;
            let damping = self.cfg.cg_damping;
            let fvp = |v: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; v.len()];
                for t in 0..t_len {
                    let jv = policy_mean.jvp(&obs_list[t], &v[..split]).expect("jvp");
                    let upstream: Vec<f64> =
                        jv.iter().zip(inv_var.iter()).map(|(a, b)| a * b * inv_t).collect();
                    policy_mean
                        .backward_accumulate(&caches[t], &upstream, &mut out[..split])
                        .expect("fvp backward");
                }
                for (o, vi) in out[split..].iter_mut().zip(v[split..].iter()) {
                    *o = 2.0 * vi;
                }
                for (o, vi) in out.iter_mut().zip(v.iter()) {
                    *o += damping * vi;
                }
                out
            };

            let direction = conjugate_gradient(&fvp, &g, self.cfg.cg_iters, 1e-10);
            let shs: f64 =
                direction.iter().zip(fvp(&direction).iter()).map(|(a, b)| a * b).sum();
            if shs > 1e-12 {
                let full_scale = (2.0 * self.cfg.kl_delta / shs).sqrt();
                diag.step_scale = full_scale;

                let theta_old = self.policy.flat_params();
                let surrogate_old = adv.iter().sum::<f64>() * inv_t;
                let mut accepted = false;
                let mut coeff = 1.0;
                for attempt in 0..self.cfg.backtrack_iters {
                    let theta_try: Vec<f64> = theta_old
                        .iter()
                        .zip(direction.iter())
                        .map(|(p, d)| p + coeff * full_scale * d)
                        .collect();
                    self.policy.set_flat_params(&theta_try)?;
                    // Surrogate and KL of the candidate (after log-std clamping).
                    let mut surrogate = 0.0;
                    let mut kl = 0.0;
                    for t in 0..t_len {
                        let mean_new = self.policy.mean.forward(&batch.obs[t])?;
                        let logp_new =
                            log_prob_from_mean(&mean_new, &self.policy.log_std, &batch.actions[t]);
                        surrogate += (logp_new - old_logps[t]).exp() * adv[t] * inv_t;
                        kl += kl_diag_gaussian(
                            &old_means[t],
                            &old_log_std,
                            &mean_new,
                            &self.policy.log_std,
                        ) * inv_t;
                    }
                    if surrogate > surrogate_old && kl <= self.cfg.kl_delta && kl.is_finite() {
                        accepted = true;
                        diag.kl = kl;
                        diag.surrogate = surrogate;
                        diag.backtracks = attempt;
                        break;
                    }
                    coeff *= self.cfg.backtrack_coeff;
                }
                if !accepted {
                    self.policy.set_flat_params(&theta_old)?;
                    diag.kl = 0.0;
                    diag.surrogate = surrogate_old;
                }
                diag.accepted = accepted;
            }
        }

        // Value-network fitting: 0.5 * mean (V - R)^2.
        let mut value_loss = 0.0;
        for iter in 0..self.cfg.value_iters {
            let mut grad = vec![0.0; self.value.param_count()];
            let mut loss = 0.0;
            for t in 0..t_len {
                let cache = self.value.forward_cached(&batch.obs[t])?;
                let err = cache.output[0] - returns[t];
                loss += 0.5 * err * err * inv_t;
                self.value.backward_accumulate(&cache, &[err * inv_t], &mut grad)?;
            }
            self.opt_value.step(self.value.params_mut(), &grad);
            if iter == 0 {
                value_loss = loss;
            }
        }
        diag.value_loss = value_loss;
        Ok(diag)
    }

    /// Collect-and-update convenience wrapper.
    pub fn train_update<E: Environment>(&mut self, env: &mut E) -> Result<(TrpoDiag, Vec<f64>), RlError> {
        let batch = self.collect_batch(env, self.cfg.steps_per_update)?;
        let diag = self.update_from_batch(&batch)?;
        Ok((diag, batch.episode_returns))
    }
}
