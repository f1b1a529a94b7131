//! Recombining binomial tree for `S = exp(sigma W - sigma^2 t / 2)`, zero rates.
//! Deliberately shares nothing with the regression pricer.

/// Bermudan put (or European if `exercise_steps` holds only the last step).
///
/// `steps` tree steps span `[0, horizon]`; exercise is allowed at the listed
/// step indices.
pub fn bermudan_put(strike: f64, sigma: f64, horizon: f64, steps: usize, exercise_steps: &[usize]) -> f64 {
    let dt = horizon / steps as f64;
    let dx = sigma * dt.sqrt();
    let (u, d) = (dx.exp(), (-dx).exp());
    let p = (1.0 - d) / (u - d);
    let payoff = |i: usize, j: usize| (strike - ((2.0 * j as f64 - i as f64) * dx).exp()).max(0.0);
    let mut v: Vec<f64> = (0..=steps).map(|j| payoff(steps, j)).collect();
    for i in (0..steps).rev() {
        for j in 0..=i {
            v[j] = p * v[j + 1] + (1.0 - p) * v[j];
        }
        v.truncate(i + 1);
        if exercise_steps.contains(&i) {
            for (j, x) in v.iter_mut().enumerate() {
                *x = x.max(payoff(i, j));
            }
        }
    }
    v[0]
}
