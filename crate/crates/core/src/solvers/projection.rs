//! Best k-term selection and projection onto the sparse ball.

use crate::error::{Error, Result};
use crate::linalg::project_to_ball;

/// Indices of the `k` largest-magnitude entries of `v`, ties broken by
/// lowest index, returned sorted. Always exactly `k` indices.
pub fn top_k_support(v: &[f64], k: usize) -> Result<Vec<usize>> {
    if k > v.len() {
        return Err(Error::InvalidConfig(format!(
            "k={k} exceeds vector length {}",
            v.len()
        )));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    let mut picked = order[..k].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Zero-fills `v` outside its top-`k` support (the best k-term
/// approximation `[v]_k`).
pub fn truncate_top_k(v: &[f64], k: usize) -> Result<Vec<f64>> {
    let support = top_k_support(v, k)?;
    let mut out = vec![0.0; v.len()];
    for &i in &support {
        out[i] = v[i];
    }
    Ok(out)
}

/// Euclidean projection of `x` onto `{w : ||w||_0 <= s, ||w||_2 <= r}`:
/// best s-term truncation followed by scaling with `min(1, r/||x_s||)`.
///
/// Truncation picks the largest-magnitude entries, and scaling a point
/// already inside the ball would only move it away, so the scale factor is
/// the ball projection's `min`, never `max`.
pub fn bounded_sparse_projection(x: &[f64], s: usize, r: f64) -> Result<Vec<f64>> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidConfig(format!("radius {r} must be positive")));
    }
    let mut out = truncate_top_k(x, s.min(x.len()))?;
    if s > x.len() {
        return Err(Error::InvalidConfig(format!(
            "s={s} exceeds vector length {}",
            x.len()
        )));
    }
    project_to_ball(&mut out, r);
    Ok(out)
}
