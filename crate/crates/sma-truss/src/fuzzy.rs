//! Single-input TSK fuzzy inference over the combined tracking error.
//!
//! The rule base is `If s is S_r then d_hat_r = D_r` with one fuzzy set per
//! partition center. Interior sets are triangles spanning their two
//! neighbors; the border sets keep membership 1 beyond the outermost
//! centers (trapezoidal shoulders). Adjacent-center overlap makes the
//! firing strengths sum to exactly 1 everywhere, so the weighted average
//! of Eq.-style TSK inference never divides by zero.

use crate::{Error, Result};

/// Default clamp on the rule consequents.
pub const DEFAULT_CONSEQUENT_LIMIT: f64 = 10.0;

/// Default adaptation gain for the online consequent update.
pub const DEFAULT_LEARNING_RATE: f64 = 2.0;

/// Strictly increasing membership centers with triangular interior sets and
/// saturating border shoulders.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipPartition {
    centers: Vec<f64>,
}

impl MembershipPartition {
    pub fn new(centers: Vec<f64>) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidParams(
                "membership partition needs at least two centers".into(),
            ));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParams("membership centers must be finite".into()));
        }
        if centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "membership centers must be strictly increasing".into(),
            ));
        }
        Ok(Self { centers })
    }

    /// The six-center partition used for the stabilization study:
    /// {-1.00, -0.50, -0.02, 0.02, 0.50, 1.00} x 1e-1.
    pub fn six_center_default() -> Self {
        Self {
            centers: vec![-0.100, -0.050, -0.002, 0.002, 0.050, 0.100],
        }
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Number of rules (equal to the number of centers; at least two).
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    /// Normalized firing strengths at `s`. At most two entries are nonzero
    /// and the entries sum to 1 by construction.
    pub fn memberships(&self, s: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.centers.len()];
        let (i, wi, j, wj) = self.active(s);
        w[i] += wi;
        w[j] += wj;
        w
    }

    /// The one or two rules active at `s` as (index, weight) pairs; the
    /// weights sum to 1. When a single rule fires, the second pair repeats
    /// the index with weight 0.
    fn active(&self, s: f64) -> (usize, f64, usize, f64) {
        let c = &self.centers;
        let n = c.len();
        if s <= c[0] {
            return (0, 1.0, 0, 0.0);
        }
        if s >= c[n - 1] {
            return (n - 1, 1.0, n - 1, 0.0);
        }
        // c[k] <= s < c[k+1]
        let k = match c.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(exact) => return (exact, 1.0, exact, 0.0),
            Err(ins) => ins - 1,
        };
        let t = (s - c[k]) / (c[k + 1] - c[k]);
        (k, 1.0 - t, k + 1, t)
    }
}

impl Default for MembershipPartition {
    fn default() -> Self {
        Self::six_center_default()
    }
}

/// Crisp rule outputs D_r, clamped to a windup limit.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleConsequents {
    values: Vec<f64>,
    limit: f64,
}

impl RuleConsequents {
    /// All-zero consequents: inference starts out contributing nothing.
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n], limit: DEFAULT_CONSEQUENT_LIMIT }
    }

    pub fn new(values: Vec<f64>, limit: f64) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("consequents must be finite".into()));
        }
        if !(limit > 0.0) {
            return Err(Error::InvalidParams(format!(
                "consequent limit must be positive, got {limit}"
            )));
        }
        if values.iter().any(|v| v.abs() > limit) {
            return Err(Error::InvalidParams("consequents exceed the clamp limit".into()));
        }
        Ok(Self { values, limit })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }
}

/// Weighted-average TSK output: d_hat(s) = D^T Psi(s).
pub fn infer(s: f64, partition: &MembershipPartition, consequents: &RuleConsequents) -> f64 {
    debug_assert_eq!(partition.len(), consequents.values.len());
    let (i, wi, j, wj) = partition.active(s);
    consequents.values[i] * wi + consequents.values[j] * wj
}

/// Gradient-type consequent update `D += phi * s * Psi(s) * dtau`, clamped
/// to the windup limit. With `phi = 0` the table is static.
pub fn adapt(
    consequents: &mut RuleConsequents,
    s: f64,
    partition: &MembershipPartition,
    phi: f64,
    dtau: f64,
) {
    debug_assert!(phi >= 0.0);
    if phi == 0.0 {
        return;
    }
    let (i, wi, j, wj) = partition.active(s);
    let limit = consequents.limit;
    let step = phi * s * dtau;
    consequents.values[i] = (consequents.values[i] + step * wi).clamp(-limit, limit);
    if j != i {
        consequents.values[j] = (consequents.values[j] + step * wj).clamp(-limit, limit);
    }
}

/// Inference plus online adaptation, packaged per controller instance.
#[derive(Debug, Clone)]
pub struct FuzzyCompensator {
    pub partition: MembershipPartition,
    pub consequents: RuleConsequents,
    /// Adaptation gain phi; zero freezes the table.
    pub learning_rate: f64,
}

impl FuzzyCompensator {
    /// Zero-initialized compensator on the given partition, so the fuzzy
    /// controller starts out identical to plain feedback linearization.
    pub fn new(partition: MembershipPartition, learning_rate: f64, limit: f64) -> Result<Self> {
        if !(learning_rate >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "learning rate must be non-negative, got {learning_rate}"
            )));
        }
        let consequents = RuleConsequents::new(vec![0.0; partition.len()], limit)?;
        Ok(Self { partition, consequents, learning_rate })
    }

    pub fn infer(&self, s: f64) -> f64 {
        infer(s, &self.partition, &self.consequents)
    }

    pub fn adapt(&mut self, s: f64, dtau: f64) {
        adapt(&mut self.consequents, s, &self.partition, self.learning_rate, dtau);
    }
}

impl Default for FuzzyCompensator {
    fn default() -> Self {
        Self::new(
            MembershipPartition::six_center_default(),
            DEFAULT_LEARNING_RATE,
            DEFAULT_CONSEQUENT_LIMIT,
        )
        .unwrap()
    }
}
