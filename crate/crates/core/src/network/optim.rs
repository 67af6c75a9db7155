use serde::{Deserialize, Serialize};

use super::{Params, SparseNet, Srelu, WeightInit};
use crate::error::{Error, Result};

/// Optimizer and schedule settings shared by every training command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Scale of freshly initialised networks.
    #[serde(default)]
    pub weight_init: WeightInit,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 1e-6,
            batch_size: 128,
            epochs: 30,
            seed: 0,
            weight_init: WeightInit::SparseGlorot,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight decay must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        Ok(())
    }
}

/// SGD with Nesterov momentum:
///
/// ```text
/// g' = g + wd * w        (edge weights only)
/// v  = momentum * v + g'
/// w  = w - lr * (g' + momentum * v)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Nesterov {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    velocity: Params,
}

impl Nesterov {
    pub fn new(like: &Params, config: &TrainConfig) -> Self {
        Self {
            learning_rate: config.learning_rate,
            momentum: config.momentum,
            weight_decay: config.weight_decay,
            velocity: like.zeros_like(),
        }
    }

    pub fn velocity(&self) -> &Params {
        &self.velocity
    }

    /// Velocity buffers, e.g. to follow edges across a rewiring.
    pub fn velocity_mut(&mut self) -> &mut Params {
        &mut self.velocity
    }

    pub fn step(&mut self, params: &mut Params, grads: &Params) -> Result<()> {
        if !params.same_shape(grads) || !params.same_shape(&self.velocity) {
            return Err(Error::Dimension(
                "parameters, gradients and velocity differ in shape".into(),
            ));
        }
        let (lr, mu, wd) = (self.learning_rate, self.momentum, self.weight_decay);
        let update = |w: &mut f64, g: f64, v: &mut f64, decay: f64| {
            let g = g + decay * *w;
            *v = mu * *v + g;
            *w -= lr * (g + mu * *v);
        };
        for ((w, g), v) in params.weights.iter_mut().zip(&grads.weights).zip(&mut self.velocity.weights) {
            for ((w, &g), v) in w.iter_mut().zip(g).zip(v) {
                update(w, g, v, wd);
            }
        }
        for ((b, g), v) in params.biases.iter_mut().zip(&grads.biases).zip(&mut self.velocity.biases) {
            for ((b, &g), v) in b.iter_mut().zip(g).zip(v) {
                update(b, g, v, 0.0);
            }
        }
        for ((s, g), v) in params.srelu.iter_mut().zip(&grads.srelu).zip(&mut self.velocity.srelu) {
            for ((s, g), v) in s.iter_mut().zip(g).zip(v.iter_mut()) {
                let mut sa = s.as_array();
                let mut va = v.as_array();
                for ((p, &gp), vp) in sa.iter_mut().zip(&g.as_array()).zip(&mut va) {
                    update(p, gp, vp, 0.0);
                }
                *s = Srelu::from_array(sa);
                *v = Srelu::from_array(va);
            }
        }
        Ok(())
    }
}

/// One optimizer step on a network; `opt` carries the velocity between calls.
pub fn sgd_step(net: &mut SparseNet, grads: &Params, opt: &mut Nesterov) -> Result<()> {
    opt.step(net.params_mut(), grads)
}
