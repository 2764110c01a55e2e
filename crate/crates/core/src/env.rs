//! The constrained MDP: observation encoding, action decoding onto the
//! feasible set, constraint-violation measurement, penalty reward and the
//! step/reset lifecycle.
//!
//! Feasibility split: the structural constraints (power simplex,
//! coefficient ranges, beam norms, RIS block symmetry/spectrum, UAV box)
//! are guaranteed by construction in [`decode_action`], so only the SINR
//! floors and the two power caps can carry positive violation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bdris::{project_block, project_diag, ris_output_power, BdRisMatrix, Block2};
use crate::channel::{build_channels, ChannelSet};
use crate::config::{RisMode, ScenarioConfig, UserLayout};
use crate::error::CoreError;
use crate::linalg::{norm, C64};
use crate::power::{total_power, PowerBreakdown};
use crate::rsma::{energy_efficiency, equivalent_channel, rates, LinkReport, RsmaAction};
use crate::seeding::{substream, tags};

/// Flat real observation vector: interleaved re/im of the estimated
/// channels in the order h_1..h_I, H_u, g_1..g_I, optionally followed by
/// the normalised UAV position.
pub type Observation = Vec<f64>;

/// Environment parameters that are not physics: episode structure, penalty
/// shaping and observation options.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    /// Episode length in steps.
    pub horizon: usize,
    /// Penalty factor on the summed violations.
    pub lambda: f64,
    /// Multiplier applied to the energy efficiency before the penalty.
    pub reward_scale: f64,
    /// Redraw the small-scale fading every step (block fading). When
    /// false the per-episode fading realisation is frozen and only the
    /// UAV position moves the channels.
    pub block_fading: bool,
    /// Append I action dimensions that learn the common-rate shares;
    /// otherwise the shares are uniform.
    pub learn_delta: bool,
    /// Append the normalised UAV position to the observation.
    pub obs_includes_uav: bool,
    /// Report energy efficiency in bit/J (scaled by bandwidth) instead of
    /// bit/J/Hz.
    pub ee_scaled_by_bandwidth: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            horizon: 200,
            lambda: 1.0,
            reward_scale: 1.0,
            block_fading: true,
            learn_delta: false,
            obs_includes_uav: false,
            ee_scaled_by_bandwidth: false,
        }
    }
}

/// Non-negative violation measure per constraint, each normalised to its
/// own threshold so the penalty factor is scale-free. Zero means satisfied.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ViolationVector {
    /// Common-stream SINR floor (worst user).
    pub common_sinr: f64,
    /// Private-stream SINR floor, per user.
    pub private_sinr: Vec<f64>,
    /// Satellite allocated-power cap.
    pub sat_power: f64,
    /// RIS emitted-power cap.
    pub ris_power: f64,
    /// Power-coefficient simplex bound (by construction zero).
    pub simplex: f64,
    /// Coefficient range [0, 1] (by construction zero).
    pub coeff_range: f64,
    /// RIS block spectral bound (by construction zero after projection).
    pub block_spectrum: f64,
    /// RIS block symmetry (structurally zero in this representation).
    pub block_symmetry: f64,
    /// UAV box constraints (by construction zero).
    pub uav_box: f64,
}

impl ViolationVector {
    pub fn sum(&self) -> f64 {
        self.common_sinr
            + self.private_sinr.iter().sum::<f64>()
            + self.sat_power
            + self.ris_power
            + self.simplex
            + self.coeff_range
            + self.block_spectrum
            + self.block_symmetry
            + self.uav_box
    }

    pub fn all_satisfied(&self) -> bool {
        self.sum() == 0.0
    }

    /// Mean of the structural entries that decode_action guarantees zero.
    pub fn structural_sum(&self) -> f64 {
        self.simplex + self.coeff_range + self.block_spectrum + self.block_symmetry + self.uav_box
    }
}

/// Extra diagnostics carried with each transition.
#[derive(Debug, Clone, Serialize)]
pub struct StepInfo {
    pub report: LinkReport,
    pub power: PowerBreakdown,
    pub psi: ViolationVector,
    /// RIS emitted power, watts.
    pub ris_out_w: f64,
    /// Decoded UAV position, metres.
    pub uav_xy: [f64; 2],
}

/// One MDP transition record.
#[derive(Debug, Clone, Serialize)]
pub struct Transition {
    pub obs: Observation,
    pub raw_action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Observation,
    pub done: bool,
    pub info: StepInfo,
}

/// Outcome of a trait-level step, the lean view agents consume.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
}

/// Minimal contract between environments and learning agents. Every
/// environment instance is single-caller; concurrency comes from running
/// independently seeded instances.
pub trait Environment: Send {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self) -> Observation;
    fn step(&mut self, action: &[f64]) -> StepOutcome;
}

/// Raw action layout: power coefficients, common beam, private beams, RIS
/// blocks (6 reals per group), UAV position, optional delta shares.
pub fn action_dim(cfg: &ScenarioConfig, env_cfg: &EnvConfig) -> usize {
    let i = cfg.num_users;
    let n = cfg.num_sat_antennas;
    let m = cfg.num_ris_elements;
    (i + 1) + 2 * n * (i + 1) + 3 * m + 2 + if env_cfg.learn_delta { i } else { 0 }
}

/// Observation length: 2 (I N + M N + I M), plus 2 if the UAV position is
/// appended.
pub fn obs_dim(cfg: &ScenarioConfig, env_cfg: &EnvConfig) -> usize {
    let i = cfg.num_users;
    let n = cfg.num_sat_antennas;
    let m = cfg.num_ris_elements;
    2 * (i * n + m * n + i * m) + if env_cfg.obs_includes_uav { 2 } else { 0 }
}

/// Maps a raw vector in [-1, 1]^d onto a feasible [`RsmaAction`].
/// Out-of-range entries are clipped; a wrong dimension is a structural
/// error.
pub fn decode_action(
    raw: &[f64],
    cfg: &ScenarioConfig,
    env_cfg: &EnvConfig,
) -> Result<RsmaAction, CoreError> {
    let want = action_dim(cfg, env_cfg);
    if raw.len() != want {
        return Err(CoreError::structure(format!(
            "decode_action: raw action has {} entries, expected {want}",
            raw.len()
        )));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::domain("decode_action: non-finite action entry"));
    }
    let i = cfg.num_users;
    let n = cfg.num_sat_antennas;
    let m = cfg.num_ris_elements;
    let u = |v: f64| v.clamp(-1.0, 1.0);
    let mut at = 0usize;

    // Power coefficients: v = (u+1)/2, rescaled onto the simplex when the
    // sum exceeds 1.
    let mut coeffs: Vec<f64> = raw[at..at + i + 1].iter().map(|&v| (u(v) + 1.0) / 2.0).collect();
    at += i + 1;
    let total: f64 = coeffs.iter().sum();
    if total > 1.0 {
        for c in coeffs.iter_mut() {
            *c /= total;
        }
    }
    let a_c = coeffs[0];
    let a = coeffs[1..].to_vec();

    // Beamformers: 2N reals each, unit-normalised, first-basis fallback.
    let beam = |at: &mut usize| -> Vec<C64> {
        let mut w: Vec<C64> =
            (0..n).map(|k| C64::new(u(raw[*at + 2 * k]), u(raw[*at + 2 * k + 1]))).collect();
        *at += 2 * n;
        let nrm = norm(&w);
        if nrm < 1e-12 {
            let mut e1 = vec![C64::new(0.0, 0.0); n];
            e1[0] = C64::new(1.0, 0.0);
            return e1;
        }
        for z in w.iter_mut() {
            *z /= nrm;
        }
        w
    };
    let w_c = beam(&mut at);
    let w: Vec<Vec<C64>> = (0..i).map(|_| beam(&mut at)).collect();

    // RIS: 6 reals per group scaled by the amplitude bound, then projected
    // onto the feasible set. Diagonal modes reuse the per-element entries
    // and ignore the coupling dims, so sweeps across modes share one
    // action layout.
    let groups = m / 2;
    let bound = match cfg.ris_mode {
        RisMode::DiagPassive => 1.0,
        _ => cfg.ris_amp_max,
    };
    let phi = match cfg.ris_mode {
        RisMode::BdActive => {
            let mut blocks = Vec::with_capacity(groups);
            for g in 0..groups {
                let b = &raw[at + 6 * g..at + 6 * g + 6];
                let raw_block = Block2::new(
                    C64::new(u(b[0]), u(b[1])) * bound,
                    C64::new(u(b[2]), u(b[3])) * bound,
                    C64::new(u(b[4]), u(b[5])) * bound,
                );
                blocks.push(project_block(&raw_block, bound)?);
            }
            BdRisMatrix::BdActive { blocks, a_max: bound }
        }
        RisMode::DiagActive | RisMode::DiagPassive => {
            let mut coeffs = Vec::with_capacity(m);
            for g in 0..groups {
                let b = &raw[at + 6 * g..at + 6 * g + 6];
                coeffs.push(project_diag(C64::new(u(b[0]), u(b[1])) * bound, bound));
                coeffs.push(project_diag(C64::new(u(b[2]), u(b[3])) * bound, bound));
            }
            if cfg.ris_mode == RisMode::DiagActive {
                BdRisMatrix::DiagActive { coeffs, a_max: bound }
            } else {
                BdRisMatrix::DiagPassive { coeffs }
            }
        }
    };
    at += 6 * groups;

    // UAV position: affine map of [-1, 1] onto the box.
    let uav_xy = [
        (u(raw[at]) + 1.0) / 2.0 * cfg.x_max_m,
        (u(raw[at + 1]) + 1.0) / 2.0 * cfg.y_max_m,
    ];
    at += 2;

    // Common-rate shares.
    let delta = if env_cfg.learn_delta {
        let vals: Vec<f64> = raw[at..at + i].iter().map(|&v| (u(v) + 1.0) / 2.0).collect();
        let s: f64 = vals.iter().sum();
        if s <= 1e-12 {
            vec![1.0 / i as f64; i]
        } else {
            vals.iter().map(|v| v / s).collect()
        }
    } else {
        vec![1.0 / i as f64; i]
    };

    Ok(RsmaAction { a_c, a, w_c, w, phi, uav_xy, delta })
}

/// Full link evaluation on the given (true) channels.
pub struct Evaluation {
    pub report: LinkReport,
    pub power: PowerBreakdown,
    pub psi: ViolationVector,
    pub ris_out_w: f64,
    pub ee: f64,
}

pub fn evaluate(
    action: &RsmaAction,
    channels: &ChannelSet,
    cfg: &ScenarioConfig,
    env_cfg: &EnvConfig,
) -> Result<Evaluation, CoreError> {
    let heq: Vec<Vec<C64>> = (0..cfg.num_users)
        .map(|i| equivalent_channel(&channels.h[i], &channels.g[i], &action.phi, &channels.h_u))
        .collect::<Result<_, _>>()?;
    let mut report = rates(&heq, action, cfg.sat_power_w, cfg.noise_power_w)?;
    let ris_out_w = ris_output_power(&action.phi, &channels.h_u, action, cfg.sat_power_w)?;
    let power = total_power(action, cfg.sat_power_w, ris_out_w, cfg)?;
    let ee = energy_efficiency(&report, power.p_total, cfg.bandwidth_hz, env_cfg.ee_scaled_by_bandwidth)?;
    report.ee = ee;

    // psi = 0 iff satisfied within 1e-12: sub-tolerance residues (float
    // dust from rescaling/projection) snap to exactly zero.
    let snap = |v: f64| if v <= 1e-12 { 0.0 } else { v };
    let rel_gap = |value: f64, floor: f64| snap(((floor - value) / floor).max(0.0));
    let rel_excess = |value: f64, cap: f64| snap(((value - cap) / cap).max(0.0));
    let min_common =
        report.sinr_common.iter().copied().fold(f64::INFINITY, f64::min).min(f64::MAX);
    let psi = ViolationVector {
        common_sinr: rel_gap(min_common, cfg.gamma_min_common),
        private_sinr: report
            .sinr_private
            .iter()
            .map(|&g| rel_gap(g, cfg.gamma_min_private))
            .collect(),
        sat_power: rel_excess(power.p_sat_alloc, cfg.sat_power_max_w),
        ris_power: rel_excess(ris_out_w, cfg.ris_power_max_w),
        simplex: snap((action.a_c + action.a.iter().sum::<f64>() - 1.0).max(0.0)),
        coeff_range: snap(
            std::iter::once(action.a_c)
                .chain(action.a.iter().copied())
                .map(|v| (-v).max(0.0) + (v - 1.0).max(0.0))
                .fold(0.0, f64::max),
        ),
        block_spectrum: rel_excess(action.phi.spectral_norm(), action.phi.amp_bound()),
        block_symmetry: 0.0,
        uav_box: {
            let ex = (action.uav_xy[0] - cfg.x_max_m).max(0.0) + (-action.uav_xy[0]).max(0.0);
            let ey = (action.uav_xy[1] - cfg.y_max_m).max(0.0) + (-action.uav_xy[1]).max(0.0);
            snap(ex / cfg.x_max_m + ey / cfg.y_max_m)
        },
    };
    Ok(Evaluation { report, power, psi, ris_out_w, ee })
}

/// Constraint-violation measurement alone.
pub fn violations(
    action: &RsmaAction,
    channels: &ChannelSet,
    cfg: &ScenarioConfig,
) -> Result<ViolationVector, CoreError> {
    Ok(evaluate(action, channels, cfg, &EnvConfig::default())?.psi)
}

/// Penalty reward: `scale * ee / (1 + lambda * sum(psi))`.
pub fn reward(ee: f64, psi: &ViolationVector, lambda: f64, scale: f64) -> f64 {
    scale * ee / (1.0 + lambda * psi.sum())
}

/// The simulator as a sequential environment.
pub struct RsmaEnv {
    cfg: ScenarioConfig,
    env_cfg: EnvConfig,
    base_seed: u64,
    episode: u64,
    step_idx: usize,
    users: Vec<[f64; 2]>,
    channels: Option<ChannelSet>,
    last_obs: Observation,
    uav_xy: [f64; 2],
}

impl RsmaEnv {
    pub fn new(cfg: ScenarioConfig, env_cfg: EnvConfig, seed: u64) -> Result<Self, CoreError> {
        cfg.validate()?;
        if env_cfg.horizon == 0 {
            return Err(CoreError::config("horizon must be >= 1"));
        }
        Ok(RsmaEnv {
            cfg,
            env_cfg,
            base_seed: seed,
            episode: 0,
            step_idx: 0,
            users: Vec::new(),
            channels: None,
            last_obs: Vec::new(),
            uav_xy: [0.0, 0.0],
        })
    }

    pub fn cfg(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn env_cfg(&self) -> &EnvConfig {
        &self.env_cfg
    }

    pub fn obs_dim(&self) -> usize {
        obs_dim(&self.cfg, &self.env_cfg)
    }

    pub fn action_dim(&self) -> usize {
        action_dim(&self.cfg, &self.env_cfg)
    }

    fn fading_stream(&self, step: usize) -> ChaCha8Rng {
        // Frozen fading replays the per-episode stream at every step.
        let t = if self.env_cfg.block_fading { step as u64 + 1 } else { 0 };
        substream(self.base_seed, &[tags::ENV, tags::EPISODE, self.episode, t])
    }

    fn encode_obs(&self, channels: &ChannelSet) -> Observation {
        let mut out = Vec::with_capacity(self.obs_dim());
        // Express each block in units of its class reference amplitude so
        // the network sees O(1) features.
        let s_h = self.cfg.link_gain_scale.sat_user.sqrt();
        let s_hu = self.cfg.link_gain_scale.sat_uav.sqrt();
        let s_g = self.cfg.link_gain_scale.uav_user.sqrt();
        for h in &channels.h_hat {
            for z in h {
                out.push(z.re / s_h);
                out.push(z.im / s_h);
            }
        }
        for z in &channels.h_u_hat.data {
            out.push(z.re / s_hu);
            out.push(z.im / s_hu);
        }
        for g in &channels.g_hat {
            for z in g {
                out.push(z.re / s_g);
                out.push(z.im / s_g);
            }
        }
        if self.env_cfg.obs_includes_uav {
            out.push(self.uav_xy[0] / self.cfg.x_max_m);
            out.push(self.uav_xy[1] / self.cfg.y_max_m);
        }
        debug_assert_eq!(out.len(), self.obs_dim());
        out
    }

    /// Starts a new episode: draws user positions (when configured random),
    /// builds channels at the box centre and returns the first observation.
    pub fn reset_env(&mut self) -> Result<Observation, CoreError> {
        self.episode += 1;
        self.step_idx = 0;
        self.users = match &self.cfg.users {
            UserLayout::Fixed(pos) => pos.clone(),
            UserLayout::RandomInBox => {
                let mut urng = substream(self.base_seed, &[tags::USERS, self.episode]);
                (0..self.cfg.num_users)
                    .map(|_| {
                        [
                            urng.random_range(0.0..self.cfg.x_max_m),
                            urng.random_range(0.0..self.cfg.y_max_m),
                        ]
                    })
                    .collect()
            }
        };
        self.uav_xy = [self.cfg.x_max_m / 2.0, self.cfg.y_max_m / 2.0];
        let mut rng = self.fading_stream(0);
        let channels = build_channels(&self.cfg, &self.users, self.uav_xy, &mut rng)?;
        self.last_obs = self.encode_obs(&channels);
        self.channels = Some(channels);
        Ok(self.last_obs.clone())
    }

    /// Advances one step: decode, move the UAV, redraw fading, evaluate on
    /// true channels, penalised reward, encode the next observation from
    /// the estimated channels.
    pub fn step_env(&mut self, raw_action: &[f64]) -> Result<Transition, CoreError> {
        if self.channels.is_none() {
            return Err(CoreError::lifecycle("step called before reset"));
        }
        let action = decode_action(raw_action, &self.cfg, &self.env_cfg)?;
        self.uav_xy = action.uav_xy;
        self.step_idx += 1;

        let mut rng = self.fading_stream(self.step_idx);
        let channels = build_channels(&self.cfg, &self.users, self.uav_xy, &mut rng)?;
        let eval = evaluate(&action, &channels, &self.cfg, &self.env_cfg)?;
        let r = reward(eval.ee, &eval.psi, self.env_cfg.lambda, self.env_cfg.reward_scale);

        let next_obs = self.encode_obs(&channels);
        let obs = std::mem::replace(&mut self.last_obs, next_obs.clone());
        self.channels = Some(channels);
        let done = self.step_idx >= self.env_cfg.horizon;
        Ok(Transition {
            obs,
            raw_action: raw_action.to_vec(),
            reward: r,
            next_obs,
            done,
            info: StepInfo {
                report: eval.report,
                power: eval.power,
                psi: eval.psi,
                ris_out_w: eval.ris_out_w,
                uav_xy: action.uav_xy,
            },
        })
    }
}

impl Environment for RsmaEnv {
    fn obs_dim(&self) -> usize {
        RsmaEnv::obs_dim(self)
    }

    fn action_dim(&self) -> usize {
        RsmaEnv::action_dim(self)
    }

    fn reset(&mut self) -> Observation {
        self.reset_env().expect("environment reset failed")
    }

    fn step(&mut self, action: &[f64]) -> StepOutcome {
        let t = self.step_env(action).expect("environment step failed");
        StepOutcome { obs: t.next_obs, reward: t.reward, done: t.done }
    }
}
