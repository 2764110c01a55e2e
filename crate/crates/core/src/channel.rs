//! Channel generation: geometry, large-scale gain, Rician small-scale
//! fading and imperfect CSI for all satellite/UAV/user links.
//!
//! Channel amplitudes are expressed in normalised units: the mean-square
//! entry gain of each link class equals `link_gain_scale.<class>` at the
//! reference geometry (receiver directly below the transmitter), and the
//! physical path-gain ratio modulates around that reference. Small-scale
//! structure is a Rician mix of a steering-vector LoS term and unit-variance
//! CSCG scattering; the per-entry CSI error variance is relative to the same
//! normalised units, so `csi_error_variance` is comparable across links.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bessel::{j1_over_2x, j3_36_over_x3};
use crate::config::ScenarioConfig;
use crate::error::CoreError;
use crate::linalg::{C64, CMat};

/// True and estimated channels for one coherence interval.
///
/// `h[i]` is the satellite-to-user-i vector (length N), `g[i]` the
/// UAV-to-user-i vector (length M) and `h_u` the satellite-to-UAV matrix
/// (M x N). `*_hat` are the estimated counterparts.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub h: Vec<Vec<C64>>,
    pub g: Vec<Vec<C64>>,
    pub h_u: CMat,
    pub h_hat: Vec<Vec<C64>>,
    pub g_hat: Vec<Vec<C64>>,
    pub h_u_hat: CMat,
}

impl ChannelSet {
    pub fn is_finite(&self) -> bool {
        let vecs_ok = |vs: &Vec<Vec<C64>>| {
            vs.iter().all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        };
        vecs_ok(&self.h)
            && vecs_ok(&self.g)
            && vecs_ok(&self.h_hat)
            && vecs_ok(&self.g_hat)
            && self.h_u.is_finite()
            && self.h_u_hat.is_finite()
    }

    pub fn dims_match(&self, cfg: &ScenarioConfig) -> bool {
        let (i, n, m) = (cfg.num_users, cfg.num_sat_antennas, cfg.num_ris_elements);
        self.h.len() == i
            && self.g.len() == i
            && self.h.iter().all(|v| v.len() == n)
            && self.g.iter().all(|v| v.len() == m)
            && self.h_u.rows == m
            && self.h_u.cols == n
            && self.h_u_hat.rows == m
            && self.h_u_hat.cols == n
    }
}

/// Satellite transmit gain as a function of the deviation angle from
/// boresight (nadir): `G = g_max [J1(v)/(2v) + 36 J3(v)/v^3]^2` with
/// `v = 2.07123 sin(theta)/sin(theta_3db)`. Continuous at v = 0 where the
/// bracket equals 1; the 2.07123 constant puts the half-power point at
/// `theta = theta_3db`.
pub fn satellite_gain(theta: f64, theta_3db: f64, g_max: f64) -> Result<f64, CoreError> {
    if !theta.is_finite() || !theta_3db.is_finite() || !g_max.is_finite() {
        return Err(CoreError::domain("satellite_gain: non-finite input"));
    }
    if theta_3db <= 0.0 {
        return Err(CoreError::domain("satellite_gain: theta_3db must be positive"));
    }
    if g_max < 0.0 {
        return Err(CoreError::domain("satellite_gain: g_max must be non-negative"));
    }
    if !(0.0..FRAC_PI_2).contains(&theta) {
        return Err(CoreError::domain(format!(
            "satellite_gain: theta must be in [0, pi/2), got {theta}"
        )));
    }
    let v = 2.07123 * theta.sin() / theta_3db.sin();
    let pattern = j1_over_2x(v) + j3_36_over_x3(v);
    Ok(g_max * pattern * pattern)
}

/// LoS amplitude `sqrt(g_tx g_rx) (c / (4 pi f_c d))^l`. The random phase
/// factor `e^{j pi ς}` is applied by the caller.
pub fn amplitude_path_gain(
    d: f64,
    cfg: &ScenarioConfig,
    g_tx: f64,
    g_rx: f64,
) -> Result<f64, CoreError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(CoreError::domain(format!("amplitude_path_gain: distance must be > 0, got {d}")));
    }
    if !(g_tx.is_finite() && g_rx.is_finite() && g_tx >= 0.0 && g_rx >= 0.0) {
        return Err(CoreError::domain("amplitude_path_gain: gains must be finite and non-negative"));
    }
    let ratio = cfg.speed_of_light_m_s / (4.0 * PI * cfg.carrier_frequency_hz * d);
    Ok((g_tx * g_rx).sqrt() * ratio.powf(cfg.path_loss_exponent))
}

/// One unit-variance circularly-symmetric complex Gaussian draw.
#[inline]
pub fn cscg_unit<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// Rician mix `sqrt(K/(K+1)) los + sqrt(1/(K+1)) W`, `W` iid unit-variance
/// CSCG. `k >= 1e12` is treated as the pure-LoS limit and consumes no
/// randomness.
pub fn sample_rician<R: Rng + ?Sized>(
    los: &[C64],
    k: f64,
    rng: &mut R,
) -> Result<Vec<C64>, CoreError> {
    if k.is_nan() || k < 0.0 {
        return Err(CoreError::domain(format!("sample_rician: K must be >= 0, got {k}")));
    }
    if los.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::domain("sample_rician: non-finite LoS component"));
    }
    if k >= 1e12 {
        return Ok(los.to_vec());
    }
    let los_w = (k / (k + 1.0)).sqrt();
    let nlos_w = (1.0 / (k + 1.0)).sqrt();
    Ok(los.iter().map(|l| los_w * l + nlos_w * cscg_unit(rng)).collect())
}

/// Splits `x` into an estimate and an error: returns `x_hat` such that
/// `x = x_hat + dx` with `dx` iid CSCG of per-entry variance `var`.
pub fn apply_csi_error<R: Rng + ?Sized>(
    x: &[C64],
    var: f64,
    rng: &mut R,
) -> Result<Vec<C64>, CoreError> {
    if !(var.is_finite() && var >= 0.0) {
        return Err(CoreError::domain(format!("apply_csi_error: variance must be >= 0, got {var}")));
    }
    if var == 0.0 {
        return Ok(x.to_vec());
    }
    let sd = var.sqrt();
    Ok(x.iter().map(|z| z - sd * cscg_unit(rng)).collect())
}

/// Factors `n` into uniform-rectangular-array dimensions `(p, q)` with
/// `p <= q`, `p` the largest divisor not exceeding sqrt(n).
fn ura_dims(n: usize) -> (usize, usize) {
    let mut p = 1;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            p = d;
        }
        d += 1;
    }
    (p, n / p)
}

/// Steering vector of an `n`-element half-wavelength URA in the horizontal
/// plane toward the unit direction `(u, v, .)`: entry phase
/// `pi (p' u + q' v)` with centred element indices.
fn ura_steering(n: usize, u: f64, v: f64) -> Vec<C64> {
    let (p, q) = ura_dims(n);
    let mut out = Vec::with_capacity(n);
    for a in 0..p {
        for b in 0..q {
            let pa = a as f64 - (p as f64 - 1.0) / 2.0;
            let qb = b as f64 - (q as f64 - 1.0) / 2.0;
            let phase = PI * (pa * u + qb * v);
            out.push(C64::new(phase.cos(), phase.sin()));
        }
    }
    out
}

struct Geometry {
    /// Per-user distance satellite -> user and boresight deviation angle.
    sat_user: Vec<(f64, f64)>,
    /// Distance and angle for satellite -> UAV.
    sat_uav: (f64, f64),
    /// Per-user distance UAV -> user.
    uav_user: Vec<f64>,
    /// Direction cosines for steering.
    sat_to_user_dir: Vec<(f64, f64)>,
    sat_to_uav_dir: (f64, f64),
    uav_to_sat_dir: (f64, f64),
    uav_to_user_dir: Vec<(f64, f64)>,
}

fn geometry(cfg: &ScenarioConfig, users: &[[f64; 2]], uav_xy: [f64; 2]) -> Geometry {
    let sat = [cfg.sat_ground_track_m[0], cfg.sat_ground_track_m[1], cfg.sat_altitude_m];
    let uav = [uav_xy[0], uav_xy[1], cfg.uav_altitude_m];

    let mut sat_user = Vec::with_capacity(users.len());
    let mut uav_user = Vec::with_capacity(users.len());
    let mut sat_to_user_dir = Vec::with_capacity(users.len());
    let mut uav_to_user_dir = Vec::with_capacity(users.len());
    for u in users {
        let du = [u[0] - sat[0], u[1] - sat[1], -sat[2]];
        let d_si = (du[0] * du[0] + du[1] * du[1] + du[2] * du[2]).sqrt();
        // Deviation from nadir boresight.
        let theta = (sat[2] / d_si).clamp(-1.0, 1.0).acos();
        sat_user.push((d_si, theta));
        sat_to_user_dir.push((du[0] / d_si, du[1] / d_si));

        let dv = [u[0] - uav[0], u[1] - uav[1], -uav[2]];
        let d_ui = (dv[0] * dv[0] + dv[1] * dv[1] + dv[2] * dv[2]).sqrt();
        uav_user.push(d_ui);
        uav_to_user_dir.push((dv[0] / d_ui, dv[1] / d_ui));
    }

    let ds = [uav[0] - sat[0], uav[1] - sat[1], uav[2] - sat[2]];
    let d_su = (ds[0] * ds[0] + ds[1] * ds[1] + ds[2] * ds[2]).sqrt();
    let theta_su = (((sat[2] - uav[2]) / d_su).clamp(-1.0, 1.0)).acos();

    Geometry {
        sat_user,
        sat_uav: (d_su, theta_su),
        uav_user,
        sat_to_user_dir,
        sat_to_uav_dir: (ds[0] / d_su, ds[1] / d_su),
        uav_to_sat_dir: (-ds[0] / d_su, -ds[1] / d_su),
        uav_to_user_dir,
    }
}

/// Normalised LoS amplitude for one link: physical amplitude at the actual
/// geometry divided by the amplitude at the class reference geometry,
/// scaled to the class mean-square gain.
fn normalised_amp(
    cfg: &ScenarioConfig,
    class_scale: f64,
    d: f64,
    d_ref: f64,
    g_tx: f64,
    g_tx_ref: f64,
    g_rx: f64,
) -> Result<f64, CoreError> {
    let phys = amplitude_path_gain(d, cfg, g_tx, g_rx)?;
    let reference = amplitude_path_gain(d_ref, cfg, g_tx_ref, g_rx)?;
    Ok(class_scale.sqrt() * phys / reference)
}

/// Builds all channels (true and estimated) for one coherence interval.
/// Pure function of `(cfg, users, uav_xy, rng state)`.
pub fn build_channels<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    users: &[[f64; 2]],
    uav_xy: [f64; 2],
    rng: &mut R,
) -> Result<ChannelSet, CoreError> {
    if users.len() != cfg.num_users {
        return Err(CoreError::structure(format!(
            "build_channels: {} user positions for num_users = {}",
            users.len(),
            cfg.num_users
        )));
    }
    if !(0.0..=cfg.x_max_m).contains(&uav_xy[0]) || !(0.0..=cfg.y_max_m).contains(&uav_xy[1]) {
        return Err(CoreError::domain(format!(
            "build_channels: uav position ({}, {}) outside [0, {}] x [0, {}]",
            uav_xy[0], uav_xy[1], cfg.x_max_m, cfg.y_max_m
        )));
    }

    let geo = geometry(cfg, users, uav_xy);
    let n = cfg.num_sat_antennas;
    let m = cfg.num_ris_elements;
    let var = cfg.csi_error_variance;

    let mut h = Vec::with_capacity(users.len());
    let mut h_hat = Vec::with_capacity(users.len());
    let mut g = Vec::with_capacity(users.len());
    let mut g_hat = Vec::with_capacity(users.len());

    // Satellite -> user links.
    for i in 0..users.len() {
        let (d, theta) = geo.sat_user[i];
        let g_sat = satellite_gain(theta, cfg.theta_3db_rad, cfg.sat_gain_max_linear)?;
        let amp = normalised_amp(
            cfg,
            cfg.link_gain_scale.sat_user,
            d,
            cfg.sat_altitude_m,
            g_sat,
            cfg.sat_gain_max_linear,
            cfg.user_gain_linear,
        )?;
        let varsigma: f64 = rng.random_range(0.0..2.0);
        let phase = C64::new((PI * varsigma).cos(), (PI * varsigma).sin());
        let (u, v) = geo.sat_to_user_dir[i];
        let steer = ura_steering(n, u, v);
        let fade = sample_rician(&steer, cfg.rician_k.sat_user, rng)?;
        let fade_hat = apply_csi_error(&fade, var, rng)?;
        h.push(fade.iter().map(|z| amp * phase * z).collect());
        h_hat.push(fade_hat.iter().map(|z| amp * phase * z).collect());
    }

    // Satellite -> UAV matrix (rank-1 LoS: RIS response outer satellite response).
    let (d_su, theta_su) = geo.sat_uav;
    let g_sat_uav = satellite_gain(theta_su, cfg.theta_3db_rad, cfg.sat_gain_max_linear)?;
    let amp_su = normalised_amp(
        cfg,
        cfg.link_gain_scale.sat_uav,
        d_su,
        cfg.sat_altitude_m - cfg.uav_altitude_m,
        g_sat_uav,
        cfg.sat_gain_max_linear,
        1.0,
    )?;
    let varsigma: f64 = rng.random_range(0.0..2.0);
    let phase_su = C64::new((PI * varsigma).cos(), (PI * varsigma).sin());
    let a_ris_in = ura_steering(m, geo.uav_to_sat_dir.0, geo.uav_to_sat_dir.1);
    let a_sat_out = ura_steering(n, geo.sat_to_uav_dir.0, geo.sat_to_uav_dir.1);
    let mut los_flat = Vec::with_capacity(m * n);
    for r in 0..m {
        for c in 0..n {
            los_flat.push(a_ris_in[r] * a_sat_out[c]);
        }
    }
    let fade_flat = sample_rician(&los_flat, cfg.rician_k.sat_uav, rng)?;
    let fade_hat_flat = apply_csi_error(&fade_flat, var, rng)?;
    let mut h_u = CMat::zeros(m, n);
    let mut h_u_hat = CMat::zeros(m, n);
    for (idx, (z, zh)) in fade_flat.iter().zip(fade_hat_flat.iter()).enumerate() {
        h_u.data[idx] = amp_su * phase_su * z;
        h_u_hat.data[idx] = amp_su * phase_su * zh;
    }

    // UAV -> user links.
    for i in 0..users.len() {
        let d = geo.uav_user[i];
        let amp = normalised_amp(
            cfg,
            cfg.link_gain_scale.uav_user,
            d,
            cfg.uav_altitude_m,
            1.0,
            1.0,
            cfg.user_gain_linear,
        )?;
        let varsigma: f64 = rng.random_range(0.0..2.0);
        let phase = C64::new((PI * varsigma).cos(), (PI * varsigma).sin());
        let (u, v) = geo.uav_to_user_dir[i];
        let steer = ura_steering(m, u, v);
        let fade = sample_rician(&steer, cfg.rician_k.uav_user, rng)?;
        let fade_hat = apply_csi_error(&fade, var, rng)?;
        g.push(fade.iter().map(|z| amp * phase * z).collect());
        g_hat.push(fade_hat.iter().map(|z| amp * phase * z).collect());
    }

    let set = ChannelSet { h, g, h_u, h_hat, g_hat, h_u_hat };
    debug_assert!(set.is_finite());
    Ok(set)
}
