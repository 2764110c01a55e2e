//! Generalized advantage estimation over collected step sequences.

/// Advantages and returns for one batch.
///
/// `values` must hold one entry per step plus the bootstrap value of the
/// state after the last step; `dones[t]` cuts the bootstrap at episode
/// boundaries. Returns satisfy `ret[t] = adv_raw[t] + values[t]`; when
/// `normalize` is set the returned advantages are shifted/scaled to zero
/// mean and unit variance (guarded against a degenerate spread).
pub fn estimate_advantages(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    gamma: f64,
    lambda: f64,
    normalize: bool,
) -> (Vec<f64>, Vec<f64>) {
    let t_len = rewards.len();
    assert_eq!(values.len(), t_len + 1, "values must include the bootstrap entry");
    assert_eq!(dones.len(), t_len);
    let mut adv = vec![0.0; t_len];
    let mut acc = 0.0;
    for t in (0..t_len).rev() {
        let cont = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * values[t + 1] * cont - values[t];
        acc = delta + gamma * lambda * cont * acc;
        adv[t] = acc;
    }
    let returns: Vec<f64> = adv.iter().zip(values.iter()).map(|(a, v)| a + v).collect();
    if normalize && t_len > 1 {
        let mean = adv.iter().sum::<f64>() / t_len as f64;
        let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / t_len as f64;
        let sd = var.sqrt();
        if sd > 1e-8 {
            for a in adv.iter_mut() {
                *a = (*a - mean) / sd;
            }
        } else {
            for a in adv.iter_mut() {
                *a -= mean;
            }
        }
    }
    (adv, returns)
}
