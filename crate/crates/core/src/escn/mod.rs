//! Evolving stochastic configuration network: the base learner of each
//! stack layer.

mod density;
mod fwgrls;
mod layer;
mod node;

pub use density::DensityStats;
pub use fwgrls::fwgrls_update;
pub use layer::{predict_class, EscnLayer, GrowDecision, Inference, LayerReport};
pub use node::{
    chebyshev_expand, log_type_reduce, node_activation, project_radii, type_reduce, Antecedent, HiddenNode,
    IntervalFiring, LogFiring,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EscnConfig {
    /// Type-reduction coefficient shared by every output.
    pub q: f64,
    /// Initial output covariance scale.
    pub omega: f64,
    /// Weight-decay rate in the FWGRLS update.
    pub decay: f64,
    /// Interval half-width as a fraction of the chunk's per-feature std.
    pub center_spread: f64,
    /// Mahalanobis radius used to project covariances onto each axis.
    pub radius: f64,
    /// Prune nodes whose relevance exceeds mean + this many stds.
    pub prune_threshold: f64,
    /// Significance level of the replacement test.
    pub replace_level: f64,
}

impl Default for EscnConfig {
    fn default() -> Self {
        Self {
            q: 0.5,
            omega: 1e5,
            decay: 1e-5,
            center_spread: 0.05,
            radius: 1.0,
            prune_threshold: 2.0,
            replace_level: 0.05,
        }
    }
}

impl EscnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("escn.{msg}")));
        if !(0.0..=1.0).contains(&self.q) {
            return bad("q must lie in [0, 1]");
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega must be positive");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be non-negative");
        }
        if !(self.center_spread >= 0.0 && self.center_spread.is_finite()) {
            return bad("center_spread must be non-negative");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be positive");
        }
        if !(self.prune_threshold >= 0.0) {
            return bad("prune_threshold must be non-negative");
        }
        if !(self.replace_level > 0.0 && self.replace_level < 1.0) {
            return bad("replace_level must lie in (0, 1)");
        }
        Ok(())
    }
}
