//! Diagonal-Gaussian policy head over an MLP mean, with closed-form
//! log-density, entropy and KL divergence. The per-dimension log standard
//! deviations are free parameters clamped to [-5, 2].

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::RlError;
use crate::mlp::Mlp;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct GaussianPolicy {
    pub mean: Mlp,
    pub log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(widths: &[usize], init_log_std: f64, rng: &mut R) -> Self {
        let mean = Mlp::new(widths, 0.01, rng);
        let act_dim = mean.output_dim();
        GaussianPolicy { mean, log_std: vec![init_log_std.clamp(LOG_STD_MIN, LOG_STD_MAX); act_dim] }
    }

    pub fn action_dim(&self) -> usize {
        self.mean.output_dim()
    }

    /// Total parameter count: mean network plus the log-std vector.
    pub fn param_count(&self) -> usize {
        self.mean.param_count() + self.log_std.len()
    }

    /// Flat view `[mean params, log_std]` (used by the trust-region solver).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = self.mean.flat_params();
        out.extend_from_slice(&self.log_std);
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<(), RlError> {
        if flat.len() != self.param_count() {
            return Err(RlError::structure(format!(
                "policy flat vector has {} entries, expected {}",
                flat.len(),
                self.param_count()
            )));
        }
        let split = self.mean.param_count();
        self.mean.set_flat_params(&flat[..split])?;
        self.log_std.copy_from_slice(&flat[split..]);
        self.clamp_log_std();
        Ok(())
    }

    pub fn clamp_log_std(&mut self) {
        for v in self.log_std.iter_mut() {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// Draws an action; returns the action and the mean output.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>), RlError> {
        let mean = self.mean.forward(obs)?;
        let action = mean
            .iter()
            .zip(self.log_std.iter())
            .map(|(m, ls)| m + ls.exp() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok((action, mean))
    }

    pub fn log_prob(&self, obs: &[f64], action: &[f64]) -> Result<f64, RlError> {
        let mean = self.mean.forward(obs)?;
        Ok(log_prob_from_mean(&mean, &self.log_std, action))
    }

    /// Entropy of the policy distribution (state-independent for a
    /// diagonal Gaussian with fixed log-std).
    pub fn entropy(&self) -> f64 {
        let d = self.log_std.len() as f64;
        self.log_std.iter().sum::<f64>() + 0.5 * d * (1.0 + TAU.ln())
    }
}

/// `log N(action; mean, diag(exp(log_std))^2)`.
pub fn log_prob_from_mean(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    debug_assert_eq!(mean.len(), action.len());
    let mut lp = -0.5 * mean.len() as f64 * TAU.ln();
    for ((m, ls), a) in mean.iter().zip(log_std.iter()).zip(action.iter()) {
        let inv_var = (-2.0 * ls).exp();
        lp -= ls + 0.5 * (a - m) * (a - m) * inv_var;
    }
    lp
}

/// Gradients of the log-density with respect to the mean output and the
/// log-std vector: `(d logp / d mean, d logp / d log_std)`.
pub fn log_prob_grads(mean: &[f64], log_std: &[f64], action: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut d_mean = Vec::with_capacity(mean.len());
    let mut d_log_std = Vec::with_capacity(mean.len());
    for ((m, ls), a) in mean.iter().zip(log_std.iter()).zip(action.iter()) {
        let inv_var = (-2.0 * ls).exp();
        let centered = a - m;
        d_mean.push(centered * inv_var);
        d_log_std.push(centered * centered * inv_var - 1.0);
    }
    (d_mean, d_log_std)
}

/// `KL(old || new)` between diagonal Gaussians, summed over dimensions.
pub fn kl_diag_gaussian(
    old_mean: &[f64],
    old_log_std: &[f64],
    new_mean: &[f64],
    new_log_std: &[f64],
) -> f64 {
    let mut kl = 0.0;
    for k in 0..old_mean.len() {
        let lso = old_log_std[k];
        let lsn = new_log_std[k];
        let var_o = (2.0 * lso).exp();
        let inv_var_n = (-2.0 * lsn).exp();
        let dm = old_mean[k] - new_mean[k];
        kl += lsn - lso + 0.5 * (var_o + dm * dm) * inv_var_n - 0.5;
    }
    kl
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_policies_have_zero_kl() {
        let mean = vec![0.3, -0.7, 1.2];
        let ls = vec![0.1, -0.4, 0.0];
        assert_eq!(kl_diag_gaussian(&mean, &ls, &mean, &ls), 0.0);
    }

    #[test]
    fn kl_nonnegative_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let d = 4;
            let draw = |rng: &mut ChaCha8Rng| -> (Vec<f64>, Vec<f64>) {
                (
                    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
                    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.5).collect(),
                )
            };
            let (m1, s1) = draw(&mut rng);
            let (m2, s2) = draw(&mut rng);
            let kl = kl_diag_gaussian(&m1, &s1, &m2, &s2);
            assert!(kl >= -1e-12, "kl = {kl}");
            if m1 != m2 {
                assert!(kl > 0.0);
            }
        }
    }

    #[test]
    fn log_density_at_the_mode_unit_variance() {
        // d-dimensional unit Gaussian at its mean: -(d/2) log(2 pi).
        let mean = vec![0.5, -0.25];
        let ls = vec![0.0, 0.0];
        let lp = log_prob_from_mean(&mean, &ls, &mean);
        assert!((lp + TAU.ln()).abs() < 1e-14);
    }

    #[test]
    fn entropy_unit_gaussian_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut policy = GaussianPolicy::new(&[3, 8, 2], 0.0, &mut rng);
        policy.log_std = vec![0.0, 0.0];
        let want = 0.5 * 2.0 * (1.0 + TAU.ln());
        assert!((policy.entropy() - want).abs() < 1e-14);
    }

    #[test]
    fn log_prob_grads_match_finite_differences() {
        let mean = vec![0.2, -0.5, 1.0];
        let ls = vec![-0.3, 0.4, 0.0];
        let action = vec![0.0, 0.1, 1.5];
        let (d_mean, d_ls) = log_prob_grads(&mean, &ls, &action);
        let h = 1e-6;
        for k in 0..3 {
            let mut mp = mean.clone();
            mp[k] += h;
            let mut mm = mean.clone();
            mm[k] -= h;
            let fd = (log_prob_from_mean(&mp, &ls, &action) - log_prob_from_mean(&mm, &ls, &action))
                / (2.0 * h);
            assert!((fd - d_mean[k]).abs() < 1e-8);

            let mut lp = ls.clone();
            lp[k] += h;
            let mut lm = ls.clone();
            lm[k] -= h;
            let fd = (log_prob_from_mean(&mean, &lp, &action)
                - log_prob_from_mean(&mean, &lm, &action))
                / (2.0 * h);
            assert!((fd - d_ls[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(13);
        let policy = GaussianPolicy::new(&[2, 4, 2], -0.5, &mut rng1);
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        let obs = [0.1, -0.2];
        assert_eq!(policy.sample(&obs, &mut a).unwrap(), policy.sample(&obs, &mut b).unwrap());
    }

    #[test]
    fn flat_params_round_trip_includes_log_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut policy = GaussianPolicy::new(&[2, 4, 3], -0.5, &mut rng);
        let mut flat = policy.flat_params();
        assert_eq!(flat.len(), policy.param_count());
        let n = flat.len();
        flat[n - 1] = 1.5;
        policy.set_flat_params(&flat).unwrap();
        assert_eq!(policy.log_std[2], 1.5);
    }

    use rand_distr::StandardNormal;
}
