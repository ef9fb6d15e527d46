//! Minimal feedforward network engine: dense layers with exact reverse-mode
//! gradients, ScaleNorm, Adam, and global-norm gradient clipping. All
//! arithmetic is in `f64`.

pub mod adam;
pub mod layer;
pub mod net;
pub mod norm;

pub use adam::{AdamHyper, AdamState};
pub use layer::{Activation, DenseLayer, LayerGrads};
pub use net::{AgentNet, Forward, ForwardCache, NetGrads, NetSpec};
pub use norm::{scale_norm, scale_norm_backward, NORM_EPS};

/// L2 norm of a flat gradient vector.
pub fn global_grad_norm(flat: &[f64]) -> f64 {
    flat.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Scales `flat` in place so its global norm is at most `max_norm`.
pub fn clip_grad_norm(flat: &mut [f64], max_norm: f64) -> f64 {
    let norm = global_grad_norm(flat);
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for g in flat.iter_mut() {
            *g *= s;
        }
    }
    norm
}
