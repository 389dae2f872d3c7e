//! Closed-form reference for the scalar linear-Gaussian model.

/// Filtering posterior (mean, variance) of a random walk observed with
/// Gaussian noise. The first state is drawn from the prior, later ones add
/// `transition_var` to the previous state.
pub fn kalman_oracle(
    prior_mean: f64,
    prior_var: f64,
    transition_var: f64,
    obs_var: f64,
    observations: &[Option<f64>],
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(observations.len());
    let (mut m, mut v) = (prior_mean, prior_var);
    for (t, y) in observations.iter().enumerate() {
        if t > 0 {
            v += transition_var;
        }
        if let Some(y) = y {
            let gain = v / (v + obs_var);
            m += gain * (y - m);
            v *= obs_var / (v + obs_var);
        }
        out.push((m, v));
    }
    out
}
