//! Level-set front positions.

use serde::{Deserialize, Serialize};

use crate::field::Field2;

/// Which space profile the front is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlicePolicy {
    /// `u(t, x, 0)`.
    #[default]
    Center,
    /// `max_y u(t, x, y)`.
    MaxOverY,
}

impl SlicePolicy {
    pub fn extract(self, field: &Field2) -> Vec<f64> {
        match self {
            SlicePolicy::Center => field.column(field.y.center()),
            SlicePolicy::MaxOverY => field
                .rows()
                .map(|r| r.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect(),
        }
    }
}

/// Outermost crossings `(X_-, X_+)` of the level `theta`, linearly interpolated
/// between nodes; `None` when the profile stays below `theta`.
pub fn level_crossings(nodes: &[f64], profile: &[f64], theta: f64) -> Option<(f64, f64)> {
    let first = profile.iter().position(|v| *v >= theta)?;
    let last = profile.iter().rposition(|v| *v >= theta)?;
    let cross = |a: usize, b: usize| {
        // profile[a] >= theta > profile[b]
        let s = (profile[a] - theta) / (profile[a] - profile[b]);
        nodes[a] + s * (nodes[b] - nodes[a])
    };
    let left = if first == 0 {
        nodes[0]
    } else {
        cross(first, first - 1)
    };
    let right = if last + 1 == profile.len() {
        nodes[last]
    } else {
        cross(last, last + 1)
    };
    Some((left, right))
}

/// Front positions of `field` at level `theta` under the given slice policy.
pub fn front_position(field: &Field2, theta: f64, policy: SlicePolicy) -> Option<(f64, f64)> {
    level_crossings(field.x.nodes(), &policy.extract(field), theta)
}
