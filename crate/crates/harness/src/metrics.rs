//! Per-episode metrics, CSV persistence and small aggregation helpers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::HarnessError;

/// One row per (seed, episode).
#[derive(Debug, Clone, Default, Serialize)]
pub struct EpisodeStats {
    pub seed: u64,
    pub episode: usize,
    pub mean_reward: f64,
    pub mean_ee: f64,
    pub mean_sum_rate: f64,
    pub psi_common: f64,
    pub psi_private: f64,
    pub psi_sat_power: f64,
    pub psi_ris_power: f64,
    pub psi_structural: f64,
    /// Fraction of steps with every constraint satisfied.
    pub reliability: f64,
    pub wall_clock_s: f64,
}

pub const METRICS_COLUMNS: &[&str] = &[
    "seed",
    "episode",
    "mean_reward",
    "mean_ee",
    "mean_sum_rate",
    "psi_common",
    "psi_private",
    "psi_sat_power",
    "psi_ris_power",
    "psi_structural",
    "reliability",
    "wall_clock_s",
];

impl EpisodeStats {
    fn row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.episode,
            self.mean_reward,
            self.mean_ee,
            self.mean_sum_rate,
            self.psi_common,
            self.psi_private,
            self.psi_sat_power,
            self.psi_ris_power,
            self.psi_structural,
            self.reliability,
            self.wall_clock_s
        )
    }
}

/// Writes `metrics.csv`: a config-hash comment, a header row, then one row
/// per (seed, episode) in seed order.
pub fn write_metrics_csv(
    path: &Path,
    config_hash: &str,
    rows: &[EpisodeStats],
) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    writeln!(f, "# config_hash={config_hash}")?;
    writeln!(f, "{}", METRICS_COLUMNS.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.row())?;
    }
    Ok(())
}

/// Reads back the numeric columns of a metrics CSV (drops comments).
pub fn read_metrics_csv(path: &Path) -> Result<Vec<Vec<f64>>, HarnessError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect();
        out.push(row);
    }
    Ok(out)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Interquartile range (linear-interpolated quartiles).
pub fn iqr(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let w = idx - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    };
    q(0.75) - q(0.25)
}

/// Kendall rank correlation between x and y (tau-a).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[j] - x[i];
            let dy = y[j] - y[i];
            let s = dx * dy;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    (concordant - discordant) as f64 / pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_iqr_hand_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
    }

    #[test]
    fn kendall_tau_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let inc = [1.0, 5.0, 7.0, 9.0];
        let dec = [9.0, 7.0, 5.0, 1.0];
        assert_eq!(kendall_tau(&x, &inc), 1.0);
        assert_eq!(kendall_tau(&x, &dec), -1.0);
        let flat_ish = [1.0, 2.0, 1.5, 2.5];
        let tau = kendall_tau(&x, &flat_ish);
        assert!(tau > 0.0 && tau < 1.0);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let dir = std::env::temp_dir().join("leoris_metrics_test");
        std::fs::remove_dir_all(&dir).ok();
        let path = dir.join("metrics.csv");
        let rows = vec![
            EpisodeStats { seed: 1, episode: 0, mean_reward: 0.5, ..Default::default() },
            EpisodeStats { seed: 1, episode: 1, mean_reward: 0.75, ..Default::default() },
        ];
        write_metrics_csv(&path, "deadbeef00000000", &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# config_hash=deadbeef00000000\nseed,episode"));
        let back = read_metrics_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1][2], 0.75);
        std::fs::remove_dir_all(&dir).ok();
    }
}
