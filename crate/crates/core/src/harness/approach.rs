use serde::{Deserialize, Serialize};

use crate::params::Params;
use crate::planner::{DecisionPolicy, HeuristicWeights};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    /// Distance-only A*.
    Shortest,
    /// A* on the inferred density and battery costs.
    Causal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproachConfig {
    pub name: String,
    pub routing: Routing,
    /// Whether tasks whose predicted battery use would breach the threshold are refused.
    pub refusal: bool,
    pub weights: HeuristicWeights,
    pub policy: DecisionPolicy,
}

/// Command-line names of the four ablation arms, in report order.
pub const APPROACH_NAMES: [&str; 4] = ["baseline", "causal-routing", "refusal-only", "full-causal"];

impl ApproachConfig {
    pub fn new(name: &str, routing: Routing, refusal: bool, params: &Params) -> Self {
        ApproachConfig {
            name: name.to_string(),
            routing,
            refusal,
            weights: match routing {
                Routing::Shortest => HeuristicWeights::shortest(),
                Routing::Causal => HeuristicWeights::new(
                    params.planner.lambda_delta,
                    params.planner.lambda_d,
                    params.planner.lambda_l,
                ),
            },
            policy: DecisionPolicy {
                b_min: params.task.b_min,
                query_velocity: params.query_velocity(),
            },
        }
    }

    pub fn baseline(params: &Params) -> Self {
        Self::new("baseline", Routing::Shortest, false, params)
    }

    pub fn causal_routing(params: &Params) -> Self {
        Self::new("causal-routing", Routing::Causal, false, params)
    }

    pub fn refusal_only(params: &Params) -> Self {
        Self::new("refusal-only", Routing::Shortest, true, params)
    }

    pub fn full_causal(params: &Params) -> Self {
        Self::new("full-causal", Routing::Causal, true, params)
    }

    pub fn all(params: &Params) -> Vec<Self> {
        vec![
            Self::baseline(params),
            Self::causal_routing(params),
            Self::refusal_only(params),
            Self::full_causal(params),
        ]
    }

    /// Parses one of [`APPROACH_NAMES`] (case-insensitive; `_` and spaces accepted for `-`).
    pub fn by_name(name: &str, params: &Params) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        match key.as_str() {
            "baseline" => Ok(Self::baseline(params)),
            "causal-routing" => Ok(Self::causal_routing(params)),
            "refusal-only" => Ok(Self::refusal_only(params)),
            "full-causal" => Ok(Self::full_causal(params)),
            _ => Err(Error::invalid(
                "approach",
                format!("unknown approach '{name}', expected one of {}", APPROACH_NAMES.join(", ")),
            )),
        }
    }

    /// Whether planning needs the fitted model.
    pub fn needs_model(&self) -> bool {
        self.routing == Routing::Causal || self.refusal
    }

    /// Name used in tables.
    pub fn display_name(&self) -> String {
        match self.name.as_str() {
            "baseline" => "Baseline".into(),
            "causal-routing" => "Causal Routing".into(),
            "refusal-only" => "Refusal-Only".into(),
            "full-causal" => "Full Causal".into(),
            other => other.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_arms() {
        let p = Params::default();
        let all = ApproachConfig::all(&p);
        let arms: Vec<_> = all.iter().map(|a| (a.routing, a.refusal)).collect();
        assert_eq!(
            arms,
            vec![
                (Routing::Shortest, false),
                (Routing::Causal, false),
                (Routing::Shortest, true),
                (Routing::Causal, true)
            ]
        );
        assert_eq!(all[1].weights, HeuristicWeights::new(1.0, 10.0, 5.0));
        assert_eq!(all[2].weights, HeuristicWeights::shortest());
        assert!(!all[0].needs_model());
    }

    #[test]
    fn parse_names() {
        let p = Params::default();
        assert_eq!(ApproachConfig::by_name("Full_Causal", &p).unwrap().name, "full-causal");
        assert_eq!(ApproachConfig::by_name("refusal only", &p).unwrap().display_name(), "Refusal-Only");
        assert!(ApproachConfig::by_name("greedy", &p).is_err());
    }
}
