//! Three-valued check outcomes.
//!
//! Exact checks (ground scalars, finite tables) return `Proved` or `Refuted`.
//! Checks that could only be sampled (function-space comparisons, grid
//! estimates) return `SampledOk` with the number of points inspected, so a
//! caller can never mistake a sampled pass for an exact proof.

use serde::{Deserialize, Serialize};

/// A concrete reason a check failed, kept as structured JSON so reports can
/// replay it and tests can assert on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness(pub serde_json::Value);

impl Witness {
    pub fn text(msg: impl Into<String>) -> Self {
        Witness(serde_json::Value::String(msg.into()))
    }

    pub fn object(fields: Vec<(&str, serde_json::Value)>) -> Self {
        let mut map = serde_json::Map::new();
        for (k, v) in fields {
            map.insert(k.to_string(), v);
        }
        Witness(serde_json::Value::Object(map))
    }
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail")]
pub enum Verdict {
    /// Held exactly, with no sampling anywhere on the checked path.
    Proved,
    /// Failed, with a replayable witness.
    Refuted(Witness),
    /// Held on every one of the recorded sample points.
    SampledOk { samples: usize },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        !matches!(self, Verdict::Refuted(_))
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved)
    }

    /// Conjunction: any refutation wins, otherwise sampling taints the result.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Refuted(w), _) | (_, Verdict::Refuted(w)) => Verdict::Refuted(w),
            (Verdict::Proved, v) | (v, Verdict::Proved) => v,
            (Verdict::SampledOk { samples: a }, Verdict::SampledOk { samples: b }) => {
                Verdict::SampledOk { samples: a + b }
            }
        }
    }

    /// Folds a sequence of verdicts, short-circuiting on the first refutation.
    pub fn all(iter: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut acc = Verdict::Proved;
        for v in iter {
            acc = acc.and(v);
            if !acc.holds() {
                return acc;
            }
        }
        acc
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Refuted(w) => Some(w),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjunction_prefers_refutation() {
        let refuted = Verdict::Refuted(Witness::text("bad"));
        assert!(!Verdict::Proved.and(refuted.clone()).holds());
        assert!(!refuted.clone().and(Verdict::SampledOk { samples: 3 }).holds());
    }

    #[test]
    fn sampling_taints_proved() {
        let v = Verdict::Proved.and(Verdict::SampledOk { samples: 5 });
        assert_eq!(v, Verdict::SampledOk { samples: 5 });
    }
}
