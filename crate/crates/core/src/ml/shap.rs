/// Exact SHAP values of a linear score `w.x + b` against an
/// independent-feature background with the given means:
/// `phi_i = w_i (x_i - mean_i)`.
pub fn linear_shap(weights: &[f64], x: &[f64], background_means: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .zip(x.iter().zip(background_means))
        .map(|(w, (xi, m))| w * (xi - m))
        .collect()
}

/// Mean absolute SHAP value per feature over `rows`, with the rows' own
/// column means as background.
pub fn shap_importance(weights: &[f64], rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.is_empty() {
        return vec![0.0; weights.len()];
    }
    let n = rows.len() as f64;
    let means: Vec<f64> = (0..weights.len())
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let mut acc = vec![0.0; weights.len()];
    for r in rows {
        for (a, phi) in acc.iter_mut().zip(linear_shap(weights, r, &means)) {
            *a += phi.abs() / n;
        }
    }
    acc
}
