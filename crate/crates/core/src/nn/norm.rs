//! ScaleNorm: projection of a vector onto the hypersphere of learned radius
//! `r`, i.e. `y = r * x / ||x||`.

/// Guard added to the denominator when `||x||` falls below it.
pub const NORM_EPS: f64 = 1e-8;

#[inline]
fn denom(norm: f64) -> f64 {
    if norm < NORM_EPS {
        norm + NORM_EPS
    } else {
        norm
    }
}

/// `r * x / ||x||`, with the near-zero guard on the denominator.
pub fn scale_norm(x: &[f64], r: f64) -> Vec<f64> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d = denom(norm);
    x.iter().map(|v| r * v / d).collect()
}

/// Gradients of `L` with respect to `x` and `r`, given `dL/dy`.
///
/// With `n = ||x||` and `y_i = r x_i / n`:
/// `dL/dx_j = r/n * g_j - r (x.g) x_j / n^3` and `dL/dr = (x.g)/n`.
pub fn scale_norm_backward(x: &[f64], r: f64, d_out: &[f64]) -> (Vec<f64>, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d = denom(norm);
    let xg: f64 = x.iter().zip(d_out).map(|(a, b)| a * b).sum();
    let d_r = xg / d;
    if norm == 0.0 {
        // x = 0: y = 0 identically in r; only the direct term survives.
        return (d_out.iter().map(|g| r * g / d).collect(), 0.0);
    }
    let d_x = x
        .iter()
        .zip(d_out)
        .map(|(xj, gj)| r * gj / d - r * xg * xj / (norm * d * d))
        .collect();
    (d_x, d_r)
}
