//! Rate-splitting link math: equivalent channels, common/private SINRs,
//! achievable rates and the energy-efficiency objective.

use crate::bdris::BdRisMatrix;
use crate::config::RisMode;
use crate::error::CoreError;
use crate::linalg::{conj_vec, dot, CMat, C64};

/// Decoded decision variables for one transmission interval.
#[derive(Debug, Clone)]
pub struct RsmaAction {
    /// Power allocation for the common stream, in [0, 1].
    pub a_c: f64,
    /// Power allocation per private stream, in [0, 1].
    pub a: Vec<f64>,
    /// Unit-norm common beamformer (length N).
    pub w_c: Vec<C64>,
    /// Unit-norm private beamformers (I of length N).
    pub w: Vec<Vec<C64>>,
    /// RIS reflection matrix.
    pub phi: BdRisMatrix,
    /// UAV horizontal position, metres.
    pub uav_xy: [f64; 2],
    /// Common-rate shares, on the simplex.
    pub delta: Vec<f64>,
}

impl RsmaAction {
    /// Neutral action used by unit tests: single-basis beams, zero surface.
    pub fn test_stub(n: usize, m: usize, users: usize) -> Self {
        let mut e1 = vec![C64::new(0.0, 0.0); n];
        e1[0] = C64::new(1.0, 0.0);
        RsmaAction {
            a_c: 0.5,
            a: vec![0.5 / users as f64; users],
            w_c: e1.clone(),
            w: vec![e1; users],
            phi: BdRisMatrix::zero(RisMode::BdActive, m, 1.0).expect("even m"),
            uav_xy: [0.0, 0.0],
            delta: vec![1.0 / users as f64; users],
        }
    }

    /// Checks the structural invariants (coefficient ranges, beam norms,
    /// simplex) within `tol`.
    pub fn validate(&self, n: usize, users: usize, tol: f64) -> Result<(), CoreError> {
        if self.a.len() != users || self.w.len() != users || self.delta.len() != users {
            return Err(CoreError::structure("action arity does not match user count"));
        }
        let total: f64 = self.a_c + self.a.iter().sum::<f64>();
        if total > 1.0 + tol {
            return Err(CoreError::structure(format!("power coefficients sum to {total} > 1")));
        }
        for &v in std::iter::once(&self.a_c).chain(self.a.iter()) {
            if !(v.is_finite() && (-tol..=1.0 + tol).contains(&v)) {
                return Err(CoreError::structure(format!("coefficient {v} outside [0, 1]")));
            }
        }
        for w in std::iter::once(&self.w_c).chain(self.w.iter()) {
            if w.len() != n {
                return Err(CoreError::structure("beamformer length mismatch"));
            }
            let norm = crate::linalg::norm(w);
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CoreError::structure(format!("beamformer norm {norm} != 1")));
            }
        }
        let dsum: f64 = self.delta.iter().sum();
        if (dsum - 1.0).abs() > 1e-9 || self.delta.iter().any(|d| *d < -tol) {
            return Err(CoreError::structure("delta is not on the simplex"));
        }
        Ok(())
    }
}

/// Per-user SINRs and rates for one interval. `ee` is filled in once the
/// power breakdown is known.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct LinkReport {
    /// Common-stream SINR per user (linear).
    pub sinr_common: Vec<f64>,
    /// Private-stream SINR per user (linear).
    pub sinr_private: Vec<f64>,
    /// Per-user common rate log2(1 + sinr_common[i]), bit/s/Hz.
    pub rate_common_per_user: Vec<f64>,
    /// Decodable common rate: min over users.
    pub rate_common: f64,
    /// Private rate per user, bit/s/Hz.
    pub rate_private: Vec<f64>,
    /// Total per-user rate: private + delta_i * common.
    pub rate_total: Vec<f64>,
    /// Sum over users of rate_total, bit/s/Hz.
    pub sum_rate: f64,
    /// Energy efficiency, bit/J/Hz (0 until filled by the caller).
    pub ee: f64,
}

/// `H_eq,i = h_i^H + g_i^H Phi H_u`, returned as a row vector of length N.
/// Uses the symmetry of the reflection matrix (`Phi^T = Phi`) to apply it
/// block-wise from the left.
pub fn equivalent_channel(
    h_i: &[C64],
    g_i: &[C64],
    phi: &BdRisMatrix,
    h_u: &CMat,
) -> Result<Vec<C64>, CoreError> {
    if h_u.cols != h_i.len() {
        return Err(CoreError::structure(format!(
            "equivalent_channel: H_u has {} columns but h_i has length {}",
            h_u.cols,
            h_i.len()
        )));
    }
    if h_u.rows != g_i.len() || g_i.len() != phi.elements() {
        return Err(CoreError::structure(format!(
            "equivalent_channel: H_u has {} rows, g_i length {}, surface {} elements",
            h_u.rows,
            g_i.len(),
            phi.elements()
        )));
    }
    // g^H Phi = (Phi^T conj(g))^T = (Phi conj(g))^T for symmetric Phi.
    let left = phi.apply(&conj_vec(g_i))?;
    let cascaded = h_u.row_vec_mul(&left)?;
    Ok(conj_vec(h_i).iter().zip(cascaded.iter()).map(|(a, b)| a + b).collect())
}

fn beam_gain(heq_row: &[C64], w: &[C64]) -> f64 {
    dot(heq_row, w).norm_sqr()
}

/// SINR for decoding the common stream at user `i`: every private stream
/// is interference.
pub fn sinr_common(
    i: usize,
    heq: &[Vec<C64>],
    action: &RsmaAction,
    p_s: f64,
    sigma2: f64,
) -> Result<f64, CoreError> {
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(CoreError::domain(format!("sinr_common: sigma2 must be > 0, got {sigma2}")));
    }
    if !(p_s.is_finite() && p_s >= 0.0) {
        return Err(CoreError::domain(format!("sinr_common: p_s must be >= 0, got {p_s}")));
    }
    let row = heq
        .get(i)
        .ok_or_else(|| CoreError::structure(format!("sinr_common: user index {i} out of range")))?;
    let signal = p_s * action.a_c * beam_gain(row, &action.w_c);
    let interference: f64 = action
        .a
        .iter()
        .zip(action.w.iter())
        .map(|(a_j, w_j)| p_s * a_j * beam_gain(row, w_j))
        .sum();
    Ok(signal / (interference + sigma2))
}

/// SINR for decoding the private stream at user `i` after the common
/// stream has been removed by SIC.
pub fn sinr_private(
    i: usize,
    heq: &[Vec<C64>],
    action: &RsmaAction,
    p_s: f64,
    sigma2: f64,
) -> Result<f64, CoreError> {
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(CoreError::domain(format!("sinr_private: sigma2 must be > 0, got {sigma2}")));
    }
    if !(p_s.is_finite() && p_s >= 0.0) {
        return Err(CoreError::domain(format!("sinr_private: p_s must be >= 0, got {p_s}")));
    }
    let row = heq
        .get(i)
        .ok_or_else(|| CoreError::structure(format!("sinr_private: user index {i} out of range")))?;
    let signal = p_s * action.a[i] * beam_gain(row, &action.w[i]);
    let interference: f64 = action
        .a
        .iter()
        .zip(action.w.iter())
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (a_j, w_j))| p_s * a_j * beam_gain(row, w_j))
        .sum();
    Ok(signal / (interference + sigma2))
}

/// Full rate report: per-user SINRs, common rate limited by the worst
/// user, and per-user totals with the common-rate shares `delta`.
pub fn rates(
    heq: &[Vec<C64>],
    action: &RsmaAction,
    p_s: f64,
    sigma2: f64,
) -> Result<LinkReport, CoreError> {
    let users = heq.len();
    let mut report = LinkReport::default();
    for i in 0..users {
        let gc = sinr_common(i, heq, action, p_s, sigma2)?;
        let gp = sinr_private(i, heq, action, p_s, sigma2)?;
        report.sinr_common.push(gc);
        report.sinr_private.push(gp);
        report.rate_common_per_user.push((1.0 + gc).log2());
        report.rate_private.push((1.0 + gp).log2());
    }
    report.rate_common = report.rate_common_per_user.iter().copied().fold(f64::INFINITY, f64::min);
    if !report.rate_common.is_finite() {
        report.rate_common = 0.0;
    }
    for i in 0..users {
        report.rate_total.push(report.rate_private[i] + action.delta[i] * report.rate_common);
    }
    report.sum_rate = report.rate_total.iter().sum();
    Ok(report)
}

/// Energy efficiency: sum rate divided by total power; `scaled` multiplies
/// by the bandwidth to express bit/J instead of bit/J/Hz.
pub fn energy_efficiency(
    report: &LinkReport,
    p_total: f64,
    bandwidth_hz: f64,
    scaled: bool,
) -> Result<f64, CoreError> {
    if !(p_total.is_finite() && p_total > 0.0) {
        return Err(CoreError::domain(format!(
            "energy_efficiency: p_total must be > 0, got {p_total}"
        )));
    }
    let ee = report.sum_rate / p_total;
    Ok(if scaled { ee * bandwidth_hz } else { ee })
}
