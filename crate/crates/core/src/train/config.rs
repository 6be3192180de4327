use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glove::{ALPHA, X_MAX};

/// Which graph quantity replaces the vector dot product in the GloVe loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `−d_G(i, j)`
    Distance,
    /// `½(d²(i,0) + d²(j,0) − d²(i,j))`
    DotProduct,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" | "d" => Ok(LossKind::Distance),
            "dot_product" | "dot" => Ok(LossKind::DotProduct),
            _ => Err(Error::invalid("loss", format!("unknown loss kind {s:?} (distance|dot)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub loss_kind: LossKind,
    /// Coefficient of the mean edge probability penalty.
    pub lambda: f64,
    /// Nearest neighbours per word in the initial graph.
    pub k_neighbors: usize,
    /// Uniformly random extra edges per word in the initial graph.
    pub m_random: usize,
    /// Zero-node edges in the initial graph.
    pub r_zero: usize,
    pub b_anchors: usize,
    pub n_per_anchor: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub x_max: f64,
    pub alpha: f64,
    pub seed: u64,
    pub steps: usize,
    /// Stop once the pruned graph reaches this many parameters per token.
    pub target_params_per_token: Option<f64>,
    /// Momentum of the running-mean score-function baseline.
    pub baseline_momentum: f64,
    pub init_prob: f64,
    pub bias_std: f64,
    pub zero_edge_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss_kind: LossKind::Distance,
            lambda: 0.0,
            k_neighbors: 64,
            m_random: 10,
            r_zero: 64,
            b_anchors: 64,
            n_per_anchor: 10_000,
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            x_max: X_MAX,
            alpha: ALPHA,
            seed: 0,
            steps: 1000,
            target_params_per_token: None,
            baseline_momentum: 0.99,
            init_prob: 0.9,
            bias_std: 0.1,
            zero_edge_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be positive, got {v}")))
            }
        };
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if self.k_neighbors == 0 {
            return Err(Error::invalid("k_neighbors", "must be at least 1"));
        }
        if self.b_anchors == 0 {
            return Err(Error::invalid("b_anchors", "must be at least 1"));
        }
        if self.n_per_anchor == 0 {
            return Err(Error::invalid("n_per_anchor", "must be at least 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps", "must be at least 1"));
        }
        positive("lr", self.lr)?;
        positive("adam_eps", self.adam_eps)?;
        positive("x_max", self.x_max)?;
        positive("zero_edge_weight", self.zero_edge_weight)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("alpha", "must lie in (0, 1]"));
        }
        for (field, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("baseline_momentum", self.baseline_momentum)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(field, "must lie in [0, 1)"));
            }
        }
        if !(self.init_prob > 0.0 && self.init_prob < 1.0) {
            return Err(Error::invalid("init_prob", "must lie in (0, 1)"));
        }
        if !(self.bias_std >= 0.0) {
            return Err(Error::invalid("bias_std", "must be non-negative"));
        }
        if let Some(t) = self.target_params_per_token {
            if !(t >= 1.0) {
                return Err(Error::invalid("target_params_per_token", "must be at least 1"));
            }
        }
        Ok(())
    }
}
