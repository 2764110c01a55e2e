//! Scenario parameters: geometry, radio, RIS hardware, power models and
//! constraint thresholds. `ScenarioConfig::default()` carries the full-scale
//! values (32 satellite antennas, 64 RIS elements, 3 users); `desk()` is a
//! reduced configuration sized for laptop-scale training runs.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::units::{db_to_linear, dbm_to_watts};

/// Reflection-matrix hardware model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisMode {
    /// Group-connected (2x2 symmetric blocks) active surface.
    BdActive,
    /// Per-element active surface (diagonal reflection matrix, |phi| <= a_max).
    DiagActive,
    /// Per-element passive surface (diagonal, |phi| <= 1).
    DiagPassive,
}

impl RisMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RisMode::BdActive => "bd_active",
            RisMode::DiagActive => "diag_active",
            RisMode::DiagPassive => "diag_passive",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CoreError> {
        match s {
            "bd_active" => Ok(RisMode::BdActive),
            "diag_active" => Ok(RisMode::DiagActive),
            "diag_passive" => Ok(RisMode::DiagPassive),
            other => Err(CoreError::config(format!(
                "unknown ris mode `{other}` (expected bd_active, diag_active or diag_passive)"
            ))),
        }
    }
}

/// Rician K-factor per link class (linear power ratio LoS/NLoS).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicianK {
    pub sat_user: f64,
    pub sat_uav: f64,
    pub uav_user: f64,
}

impl Default for RicianK {
    fn default() -> Self {
        RicianK { sat_user: 10.0, sat_uav: 10.0, uav_user: 5.0 }
    }
}

/// Mean-square channel-entry gain per link class, evaluated at the
/// reference geometry (node directly overhead). Channel amplitudes are
/// expressed in these normalised units; distance, antenna-pattern and
/// fading variations then modulate around the reference. The default of
/// 1e-4 matches the stated average effective channel gain of the scenario.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkGainScale {
    pub sat_user: f64,
    pub sat_uav: f64,
    pub uav_user: f64,
}

impl Default for LinkGainScale {
    fn default() -> Self {
        LinkGainScale { sat_user: 1e-4, sat_uav: 1e-4, uav_user: 1e-4 }
    }
}

/// Ground-user placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserLayout {
    /// Fixed coordinates on the ground plane, one `[x, y]` pair per user.
    Fixed(Vec<[f64; 2]>),
    /// Drawn uniformly in `[0, x_max] x [0, y_max]` at every episode reset.
    RandomInBox,
}

/// Rotary-wing hover power parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoverParams {
    pub rotor_solidity: f64,
    /// kg/m^3.
    pub air_density: f64,
    pub drag_coefficient: f64,
    /// m^2; should equal pi * rotor_radius^2 within 1% (warned otherwise).
    pub disc_area_m2: f64,
    /// rad/s.
    pub angular_velocity_rad_s: f64,
    /// m.
    pub rotor_radius_m: f64,
    /// N.
    pub weight_n: f64,
    /// Induced-power correction factor k.
    pub induced_power_factor: f64,
}

impl Default for HoverParams {
    fn default() -> Self {
        // Numeric values bound by symbol as printed in the scenario table;
        // weight and induced-power factor are repo defaults (not tabulated).
        HoverParams {
            rotor_solidity: 0.05,
            air_density: 0.02,
            drag_coefficient: 0.05,
            disc_area_m2: 0.503,
            angular_velocity_rad_s: 300.0,
            rotor_radius_m: 0.4,
            weight_n: 20.0,
            induced_power_factor: 0.1,
        }
    }
}

impl HoverParams {
    pub fn validate(&self) -> Result<Vec<String>, CoreError> {
        let fields = [
            ("rotor_solidity", self.rotor_solidity),
            ("air_density", self.air_density),
            ("drag_coefficient", self.drag_coefficient),
            ("disc_area_m2", self.disc_area_m2),
            ("angular_velocity_rad_s", self.angular_velocity_rad_s),
            ("rotor_radius_m", self.rotor_radius_m),
            ("weight_n", self.weight_n),
            ("induced_power_factor", self.induced_power_factor),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::domain(format!(
                    "hover parameter {name} must be strictly positive, got {v}"
                )));
            }
        }
        let mut warnings = Vec::new();
        let ideal = std::f64::consts::PI * self.rotor_radius_m * self.rotor_radius_m;
        if (self.disc_area_m2 - ideal).abs() > 0.01 * ideal {
            warnings.push(format!(
                "disc_area_m2 = {} differs from pi*R^2 = {ideal:.4} by more than 1%",
                self.disc_area_m2
            ));
        }
        Ok(warnings)
    }
}

/// All physical and system parameters of the scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    // --- geometry (metres) ---
    pub sat_altitude_m: f64,
    pub uav_altitude_m: f64,
    /// Horizontal position of the sub-satellite point.
    pub sat_ground_track_m: [f64; 2],
    pub x_max_m: f64,
    pub y_max_m: f64,
    pub users: UserLayout,
    pub num_users: usize,

    // --- radio ---
    pub carrier_frequency_hz: f64,
    pub speed_of_light_m_s: f64,
    pub path_loss_exponent: f64,
    /// Peak satellite antenna gain, linear.
    pub sat_gain_max_linear: f64,
    /// Half-power beamwidth angle of the satellite antenna, radians.
    pub theta_3db_rad: f64,
    /// User terminal gain, linear (0 dBi default).
    pub user_gain_linear: f64,
    /// AWGN power at each receiver, watts.
    pub noise_power_w: f64,
    pub bandwidth_hz: f64,
    /// Per-entry variance of the channel-estimation error, relative to the
    /// link's reference gain.
    pub csi_error_variance: f64,
    pub rician_k: RicianK,
    pub link_gain_scale: LinkGainScale,

    // --- array sizes ---
    pub num_sat_antennas: usize,
    /// Must be even (group size 2).
    pub num_ris_elements: usize,

    // --- power and constraints ---
    /// Operating satellite transmit power P_s, watts.
    pub sat_power_w: f64,
    /// Satellite power cap, watts.
    pub sat_power_max_w: f64,
    /// RIS emitted-power cap, watts.
    pub ris_power_max_w: f64,
    /// SINR floor for the common stream (linear).
    pub gamma_min_common: f64,
    /// SINR floor for each private stream (linear).
    pub gamma_min_private: f64,

    // --- RIS hardware ---
    pub ris_mode: RisMode,
    /// Maximum per-block singular value (amplitude gain bound); 1.0 for a
    /// strictly passive surface.
    pub ris_amp_max: f64,
    /// Reciprocal of the RIS amplifier efficiency (>= 1).
    pub ris_amp_efficiency_inv: f64,
    /// Per phase shifter, watts.
    pub phase_shifter_power_w: f64,
    /// Per element DC biasing, watts.
    pub dc_bias_power_w: f64,
    /// UAV baseband processing power, watts.
    pub proc_power_w: f64,
    pub hover: HoverParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            sat_altitude_m: 520e3,
            uav_altitude_m: 10e3,
            sat_ground_track_m: [2500.0, 2500.0],
            x_max_m: 5000.0,
            y_max_m: 5000.0,
            users: UserLayout::RandomInBox,
            num_users: 3,
            carrier_frequency_hz: 8e9,
            speed_of_light_m_s: 3e8,
            path_loss_exponent: 2.0,
            sat_gain_max_linear: db_to_linear(6.6),
            theta_3db_rad: 0.07,
            user_gain_linear: 1.0,
            noise_power_w: 1e-10,
            bandwidth_hz: 5e6,
            csi_error_variance: 1e-2,
            rician_k: RicianK::default(),
            link_gain_scale: LinkGainScale::default(),
            num_sat_antennas: 32,
            num_ris_elements: 64,
            sat_power_w: dbm_to_watts(56.0),
            sat_power_max_w: dbm_to_watts(56.0),
            ris_power_max_w: dbm_to_watts(33.0),
            gamma_min_common: 0.01,
            gamma_min_private: 0.01,
            ris_mode: RisMode::BdActive,
            ris_amp_max: 4.0,
            ris_amp_efficiency_inv: 1.25,
            phase_shifter_power_w: dbm_to_watts(-10.0),
            dc_bias_power_w: dbm_to_watts(-5.0),
            proc_power_w: 3.0,
            hover: HoverParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Reduced scenario for laptop-scale runs: 8 satellite antennas, 8 RIS
    /// elements, 2 users at fixed positions, UAV at 2 km so that placement
    /// has a visible effect on the UAV-user links.
    ///
    /// The regime is relay-dominant: the direct satellite-user legs are
    /// heavily obstructed (the deployment case a UAV-mounted surface
    /// exists for), so throughput flows through the surface and its
    /// hardware class matters; the noise floor sits where rates respond
    /// to transmit power, and the SINR floors bind often enough that
    /// reliability responds to estimation quality.
    pub fn desk() -> Self {
        ScenarioConfig {
            num_sat_antennas: 8,
            num_ris_elements: 8,
            num_users: 2,
            users: UserLayout::Fixed(vec![[1200.0, 1800.0], [3600.0, 2800.0]]),
            uav_altitude_m: 2000.0,
            link_gain_scale: LinkGainScale { sat_user: 1e-6, sat_uav: 1e-4, uav_user: 5e-2 },
            noise_power_w: 1e-3,
            rician_k: RicianK { sat_user: 50.0, sat_uav: 50.0, uav_user: 4.0 },
            csi_error_variance: 1e-4,
            gamma_min_common: 0.05,
            gamma_min_private: 0.1,
            ..ScenarioConfig::default()
        }
    }

    pub fn num_groups(&self) -> usize {
        self.num_ris_elements / 2
    }

    /// Validates invariants; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>, CoreError> {
        if self.num_ris_elements == 0 || self.num_ris_elements % 2 != 0 {
            return Err(CoreError::structure(format!(
                "num_ris_elements must be even and positive, got {}",
                self.num_ris_elements
            )));
        }
        if self.num_users == 0 {
            return Err(CoreError::config("num_users must be >= 1"));
        }
        if self.num_sat_antennas == 0 {
            return Err(CoreError::config("num_sat_antennas must be >= 1"));
        }
        if let UserLayout::Fixed(pos) = &self.users {
            if pos.len() != self.num_users {
                return Err(CoreError::config(format!(
                    "users lists {} positions but num_users = {}",
                    pos.len(),
                    self.num_users
                )));
            }
        }
        let positive = [
            ("sat_altitude_m", self.sat_altitude_m),
            ("uav_altitude_m", self.uav_altitude_m),
            ("x_max_m", self.x_max_m),
            ("y_max_m", self.y_max_m),
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("speed_of_light_m_s", self.speed_of_light_m_s),
            ("sat_gain_max_linear", self.sat_gain_max_linear),
            ("theta_3db_rad", self.theta_3db_rad),
            ("user_gain_linear", self.user_gain_linear),
            ("noise_power_w", self.noise_power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("sat_power_w", self.sat_power_w),
            ("sat_power_max_w", self.sat_power_max_w),
            ("ris_power_max_w", self.ris_power_max_w),
            ("gamma_min_common", self.gamma_min_common),
            ("gamma_min_private", self.gamma_min_private),
            ("ris_amp_max", self.ris_amp_max),
            ("proc_power_w", self.proc_power_w),
            ("link_gain_scale.sat_user", self.link_gain_scale.sat_user),
            ("link_gain_scale.sat_uav", self.link_gain_scale.sat_uav),
            ("link_gain_scale.uav_user", self.link_gain_scale.uav_user),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::config(format!("{name} must be strictly positive, got {v}")));
            }
        }
        let non_negative = [
            ("path_loss_exponent", self.path_loss_exponent),
            ("csi_error_variance", self.csi_error_variance),
            ("phase_shifter_power_w", self.phase_shifter_power_w),
            ("dc_bias_power_w", self.dc_bias_power_w),
            ("rician_k.sat_user", self.rician_k.sat_user),
            ("rician_k.sat_uav", self.rician_k.sat_uav),
            ("rician_k.uav_user", self.rician_k.uav_user),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CoreError::config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.ris_amp_efficiency_inv < 1.0 {
            return Err(CoreError::config(format!(
                "ris_amp_efficiency_inv is a reciprocal efficiency and must be >= 1, got {}",
                self.ris_amp_efficiency_inv
            )));
        }
        self.hover.validate()
    }
}
