use statrs::distribution::{ContinuousCDF, Normal};

use crate::HarnessError;

/// Wilson score interval for the proportion `hits / trials`.
pub fn wilson_interval(hits: u64, trials: u64, confidence: f64) -> Result<(f64, f64), HarnessError> {
    if trials == 0 || hits > trials {
        return Err(HarnessError::Domain(format!("need 0 ≤ hits ≤ trials, trials ≥ 1; got {hits}/{trials}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(HarnessError::Domain(format!("confidence {confidence} not in (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // At the endpoints the exact bound is 0 or 1; clamp away rounding.
    let low = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    Ok((low, high))
}

/// Binomial standard error `√(p(1−p)/n)`.
pub fn proportion_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Least-squares line `y = a + b·x`; returns `(a, b, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((a, b, r2))
}
