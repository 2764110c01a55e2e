//! Power consumption models: satellite allocation, BD active RIS, UAV
//! hover and baseband processing.

use crate::config::{HoverParams, RisMode, ScenarioConfig};
use crate::error::CoreError;
use crate::rsma::RsmaAction;

/// Per-component power accounting, watts.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct PowerBreakdown {
    pub p_sat_alloc: f64,
    pub p_bdaris: f64,
    pub p_proc: f64,
    pub p_uav_hover: f64,
    pub p_total: f64,
}

/// RIS power: amplifier draw proportional to the emitted power plus per
/// group phase-shifter and DC-bias terms,
/// `theta_ris * p_out + (m/2)(p_d + p_dc)`.
pub fn bdaris_power(
    p_out: f64,
    m: usize,
    theta_ris: f64,
    p_d: f64,
    p_dc: f64,
) -> Result<f64, CoreError> {
    if m % 2 != 0 {
        return Err(CoreError::structure(format!("bdaris_power: element count {m} must be even")));
    }
    if !(p_out >= 0.0 && p_d >= 0.0 && p_dc >= 0.0) {
        return Err(CoreError::domain("bdaris_power: powers must be non-negative"));
    }
    if theta_ris < 1.0 {
        return Err(CoreError::domain(format!(
            "bdaris_power: theta_ris is a reciprocal efficiency and must be >= 1, got {theta_ris}"
        )));
    }
    Ok(theta_ris * p_out + (m as f64 / 2.0) * (p_d + p_dc))
}

/// Rotary-wing hover power: blade profile plus induced,
/// `(delta/8) rho s A Omega^3 R^3 + (1 + k) W^{3/2} / sqrt(2 rho A)`.
pub fn hover_power(hp: &HoverParams) -> Result<f64, CoreError> {
    hp.validate()?;
    let p0 = hp.drag_coefficient / 8.0
        * hp.air_density
        * hp.rotor_solidity
        * hp.disc_area_m2
        * hp.angular_velocity_rad_s.powi(3)
        * hp.rotor_radius_m.powi(3);
    let pi = (1.0 + hp.induced_power_factor) * hp.weight_n.powf(1.5)
        / (2.0 * hp.air_density * hp.disc_area_m2).sqrt();
    Ok(p0 + pi)
}

/// Total consumed power for one interval. The satellite term is the
/// allocated power `p_s (a_c + sum a_i)`; the RIS amplifier term is
/// dropped in passive mode (no amplifiers on a passive surface).
pub fn total_power(
    action: &RsmaAction,
    p_s: f64,
    p_out: f64,
    cfg: &ScenarioConfig,
) -> Result<PowerBreakdown, CoreError> {
    let alloc: f64 = action.a_c + action.a.iter().sum::<f64>();
    let p_sat_alloc = p_s * alloc;
    let amplified_out = match cfg.ris_mode {
        RisMode::DiagPassive => 0.0,
        RisMode::BdActive | RisMode::DiagActive => p_out,
    };
    let p_bdaris = bdaris_power(
        amplified_out,
        cfg.num_ris_elements,
        cfg.ris_amp_efficiency_inv,
        cfg.phase_shifter_power_w,
        cfg.dc_bias_power_w,
    )?;
    let p_uav_hover = hover_power(&cfg.hover)?;
    let p_proc = cfg.proc_power_w;
    Ok(PowerBreakdown {
        p_sat_alloc,
        p_bdaris,
        p_proc,
        p_uav_hover,
        p_total: p_sat_alloc + p_bdaris + p_proc + p_uav_hover,
    })
}
