//! One agent's private network: observation encoder, optional message
//! encoder, and identity action/value heads on the concatenated trunk.
//!
//! The forward pass returns an activation cache; `backward` replays it for
//! exact analytic gradients. Gradients stop at the inbox — the communication
//! channel is non-differentiable by construction, so `NetGrads` has no slot
//! for inbox entries.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::layer::{Activation, DenseLayer, LayerGrads};
use crate::nn::norm::{scale_norm, scale_norm_backward};

/// Gain for orthogonal init of hidden layers.
const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
/// Small-gain init for the action head keeps the initial policy near uniform.
const ACTION_GAIN: f64 = 0.01;
const VALUE_GAIN: f64 = 1.0;

/// Static shape of an [`AgentNet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub obs_dim: usize,
    /// Flat width of the encoded inbox; 0 means no message encoder.
    pub msg_input_width: usize,
    pub num_actions: usize,
    /// Hidden width; also the representation dimensionality d.
    pub hidden: usize,
    /// Apply ScaleNorm to the observation-encoder output.
    pub spherical: bool,
}

impl NetSpec {
    pub fn feature_dim(&self) -> usize {
        if self.msg_input_width > 0 {
            2 * self.hidden
        } else {
            self.hidden
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentNet {
    pub spec: NetSpec,
    pub obs_encoder: Vec<DenseLayer>,
    pub msg_encoder: Vec<DenseLayer>,
    pub action_head: DenseLayer,
    pub value_head: DenseLayer,
    pub scale_radius: Option<f64>,
    /// Bumped on every parameter mutation; caches record the version they
    /// were produced under so a stale backward is rejected.
    #[serde(skip)]
    version: u64,
}

/// Activation record from one forward pass; input to `backward`.
#[derive(Debug)]
pub struct ForwardCache {
    version: u64,
    obs: Vec<f64>,
    inbox: Vec<f64>,
    /// Post-activation output of each obs_encoder layer (pre-ScaleNorm).
    obs_acts: Vec<Vec<f64>>,
    msg_acts: Vec<Vec<f64>>,
    /// Head input: representation, then message features if present.
    features: Vec<f64>,
    logits: Vec<f64>,
    value: f64,
}

/// Forward-pass outputs.
#[derive(Debug)]
pub struct Forward {
    pub representation: Vec<f64>,
    pub logits: Vec<f64>,
    pub value: f64,
    pub cache: ForwardCache,
}

/// Parameter gradients, shaped like the net. No inbox slot exists.
#[derive(Debug, Clone)]
pub struct NetGrads {
    pub obs_encoder: Vec<LayerGrads>,
    pub msg_encoder: Vec<LayerGrads>,
    pub action_head: LayerGrads,
    pub value_head: LayerGrads,
    pub d_radius: f64,
    has_radius: bool,
}

impl AgentNet {
    /// Randomly initialized net: orthogonal-style hidden layers, small-gain
    /// action head, unit-gain value head, radius √d when spherical.
    pub fn new(spec: NetSpec, rng: &mut ChaCha8Rng) -> Self {
        let h = spec.hidden;
        let obs_encoder = vec![
            DenseLayer::orthogonal(spec.obs_dim, h, HIDDEN_GAIN, Activation::Tanh, rng),
            DenseLayer::orthogonal(h, h, HIDDEN_GAIN, Activation::Tanh, rng),
        ];
        let msg_encoder = if spec.msg_input_width > 0 {
            vec![
                DenseLayer::orthogonal(spec.msg_input_width, h, HIDDEN_GAIN, Activation::Tanh, rng),
                DenseLayer::orthogonal(h, h, HIDDEN_GAIN, Activation::Tanh, rng),
            ]
        } else {
            Vec::new()
        };
        let feat = spec.feature_dim();
        Self {
            spec,
            obs_encoder,
            msg_encoder,
            action_head: DenseLayer::orthogonal(
                feat,
                spec.num_actions,
                ACTION_GAIN,
                Activation::Identity,
                rng,
            ),
            value_head: DenseLayer::orthogonal(feat, 1, VALUE_GAIN, Activation::Identity, rng),
            scale_radius: spec.spherical.then(|| (h as f64).sqrt()),
            version: 0,
        }
    }

    /// All-zero parameters (radius still √d when spherical); test scaffolding.
    pub fn zeros(spec: NetSpec) -> Self {
        let h = spec.hidden;
        let obs_encoder = vec![
            DenseLayer::zeros(spec.obs_dim, h, Activation::Tanh),
            DenseLayer::zeros(h, h, Activation::Tanh),
        ];
        let msg_encoder = if spec.msg_input_width > 0 {
            vec![
                DenseLayer::zeros(spec.msg_input_width, h, Activation::Tanh),
                DenseLayer::zeros(h, h, Activation::Tanh),
            ]
        } else {
            Vec::new()
        };
        let feat = spec.feature_dim();
        Self {
            spec,
            obs_encoder,
            msg_encoder,
            action_head: DenseLayer::zeros(feat, spec.num_actions, Activation::Identity),
            value_head: DenseLayer::zeros(feat, 1, Activation::Identity),
            scale_radius: spec.spherical.then(|| (h as f64).sqrt()),
            version: 0,
        }
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn forward(&self, obs: &[f64], inbox: &[f64]) -> Result<Forward> {
        if obs.len() != self.spec.obs_dim {
            return Err(Error::Config(format!(
                "observation length {} does not match obs_encoder layer 0 input width {}",
                obs.len(),
                self.spec.obs_dim
            )));
        }
        if inbox.len() != self.spec.msg_input_width {
            return Err(Error::Config(format!(
                "inbox length {} does not match message-input width {} ({})",
                inbox.len(),
                self.spec.msg_input_width,
                if self.spec.msg_input_width == 0 {
                    "net has no msg_encoder"
                } else {
                    "msg_encoder layer 0"
                }
            )));
        }

        let mut obs_acts: Vec<Vec<f64>> = Vec::with_capacity(self.obs_encoder.len());
        let mut cur = obs;
        for layer in &self.obs_encoder {
            let mut out = Vec::new();
            layer.forward(cur, &mut out);
            obs_acts.push(out);
            cur = obs_acts.last().unwrap();
        }
        let representation = match self.scale_radius {
            Some(r) => scale_norm(obs_acts.last().unwrap(), r),
            None => obs_acts.last().unwrap().clone(),
        };

        let mut msg_acts: Vec<Vec<f64>> = Vec::with_capacity(self.msg_encoder.len());
        let mut cur = inbox;
        for layer in &self.msg_encoder {
            let mut out = Vec::new();
            layer.forward(cur, &mut out);
            msg_acts.push(out);
            cur = msg_acts.last().unwrap();
        }

        let mut features = representation.clone();
        if let Some(m) = msg_acts.last() {
            features.extend_from_slice(m);
        }

        let mut logits = Vec::new();
        self.action_head.forward(&features, &mut logits);
        let mut value_out = Vec::new();
        self.value_head.forward(&features, &mut value_out);
        let value = value_out[0];

        Ok(Forward {
            representation: representation.clone(),
            logits: logits.clone(),
            value,
            cache: ForwardCache {
                version: self.version,
                obs: obs.to_vec(),
                inbox: inbox.to_vec(),
                obs_acts,
                msg_acts,
                features,
                logits,
                value,
            },
        })
    }

    /// Gradients of `L = grad_logits · logits + grad_value * value` with
    /// respect to every parameter, accumulated into `grads`.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        grad_logits: &[f64],
        grad_value: f64,
        grads: &mut NetGrads,
    ) -> Result<()> {
        if cache.version != self.version {
            return Err(Error::Contract(format!(
                "stale activation cache: net at version {}, cache from version {}",
                self.version, cache.version
            )));
        }
        if grad_logits.len() != self.spec.num_actions {
            return Err(Error::Contract(format!(
                "grad_logits length {} does not match {} actions",
                grad_logits.len(),
                self.spec.num_actions
            )));
        }

        let mut d_feat_a = Vec::new();
        self.action_head.backward(
            &cache.features,
            &cache.logits,
            grad_logits,
            &mut grads.action_head,
            &mut d_feat_a,
        );
        let mut d_feat_v = Vec::new();
        self.value_head.backward(
            &cache.features,
            &[cache.value],
            &[grad_value],
            &mut grads.value_head,
            &mut d_feat_v,
        );
        let d_features: Vec<f64> = d_feat_a
            .iter()
            .zip(&d_feat_v)
            .map(|(a, v)| a + v)
            .collect();

        let d = self.spec.hidden;
        let (d_repr, d_msg_feat) = d_features.split_at(d);

        // Observation branch, undoing ScaleNorm first when present.
        let mut cur: Vec<f64> = match self.scale_radius {
            Some(r) => {
                let pre = cache.obs_acts.last().unwrap();
                let (d_x, d_r) = scale_norm_backward(pre, r, d_repr);
                grads.d_radius += d_r;
                d_x
            }
            None => d_repr.to_vec(),
        };
        let mut scratch = Vec::new();
        for i in (0..self.obs_encoder.len()).rev() {
            let input: &[f64] = if i == 0 { &cache.obs } else { &cache.obs_acts[i - 1] };
            self.obs_encoder[i].backward(
                input,
                &cache.obs_acts[i],
                &cur,
                &mut grads.obs_encoder[i],
                &mut scratch,
            );
            std::mem::swap(&mut cur, &mut scratch);
        }

        // Message branch; the gradient reaching the inbox is discarded — the
        // channel is non-differentiable.
        if !self.msg_encoder.is_empty() {
            let mut cur = d_msg_feat.to_vec();
            for i in (0..self.msg_encoder.len()).rev() {
                let input: &[f64] = if i == 0 {
                    &cache.inbox
                } else {
                    &cache.msg_acts[i - 1]
                };
                self.msg_encoder[i].backward(
                    input,
                    &cache.msg_acts[i],
                    &cur,
                    &mut grads.msg_encoder[i],
                    &mut scratch,
                );
                std::mem::swap(&mut cur, &mut scratch);
            }
        }
        Ok(())
    }

    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_logits: &[f64],
        grad_value: f64,
    ) -> Result<NetGrads> {
        let mut grads = NetGrads::zeros_like(self);
        self.backward_into(cache, grad_logits, grad_value, &mut grads)?;
        Ok(grads)
    }

    pub fn param_count(&self) -> usize {
        self.layers()
            .map(DenseLayer::param_count)
            .sum::<usize>()
            + usize::from(self.scale_radius.is_some())
    }

    fn layers(&self) -> impl Iterator<Item = &DenseLayer> {
        self.obs_encoder
            .iter()
            .chain(self.msg_encoder.iter())
            .chain(std::iter::once(&self.action_head))
            .chain(std::iter::once(&self.value_head))
    }

    /// Canonical flattening: obs_encoder, msg_encoder, action head, value
    /// head — weights then biases per layer — then the radius if present.
    /// [`NetGrads::to_flat`] uses the same order.
    pub fn param_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.layers() {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        if let Some(r) = self.scale_radius {
            out.push(r);
        }
        out
    }

    pub fn set_param_vec(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Contract(format!(
                "parameter vector length {} does not match net parameter count {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        let take = |dst: &mut [f64], offset: &mut usize| {
            dst.copy_from_slice(&params[*offset..*offset + dst.len()]);
            *offset += dst.len();
        };
        for layer in self
            .obs_encoder
            .iter_mut()
            .chain(self.msg_encoder.iter_mut())
            .chain(std::iter::once(&mut self.action_head))
            .chain(std::iter::once(&mut self.value_head))
        {
            take(&mut layer.weights, &mut offset);
            take(&mut layer.biases, &mut offset);
        }
        if let Some(r) = &mut self.scale_radius {
            *r = params[offset];
            offset += 1;
        }
        debug_assert_eq!(offset, params.len());
        self.version += 1;
        Ok(())
    }

    /// Hex SHA-256 over the parameter bytes; distinguishes agents' private
    /// parameters without storing full copies.
    pub fn param_fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for p in self.param_vec() {
            hasher.update(p.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in digest {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl NetGrads {
    pub fn zeros_like(net: &AgentNet) -> Self {
        Self {
            obs_encoder: net.obs_encoder.iter().map(LayerGrads::zeros_like).collect(),
            msg_encoder: net.msg_encoder.iter().map(LayerGrads::zeros_like).collect(),
            action_head: LayerGrads::zeros_like(&net.action_head),
            value_head: LayerGrads::zeros_like(&net.value_head),
            d_radius: 0.0,
            has_radius: net.scale_radius.is_some(),
        }
    }

    /// Same canonical order as [`AgentNet::param_vec`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let all = self
            .obs_encoder
            .iter()
            .chain(self.msg_encoder.iter())
            .chain(std::iter::once(&self.action_head))
            .chain(std::iter::once(&self.value_head));
        for g in all {
            out.extend_from_slice(&g.d_weights);
            out.extend_from_slice(&g.d_biases);
        }
        if self.has_radius {
            out.push(self.d_radius);
        }
        out
    }
}
