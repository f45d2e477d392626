//! Weighted discrete-time Markov chains with absorbing states.
//!
//! Each edge carries a transition probability and an integer weight (the
//! price paid for using it). Walking the chain accumulates weight as capital,
//! which the evolution engine tracks as the exponent of `t`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Support;
use crate::rational::{fraction_str, Rational};

pub type StateId = String;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: StateId,
    pub dst: StateId,
    #[serde(with = "fraction_str")]
    pub prob: Rational,
    pub weight: i64,
}

/// Serialized form: `{transient, absorbing, edges: [{src, dst, prob: "p/q", weight}], support: {min, max}}`,
/// optionally with `start` (default: the first transient state) and
/// `initial_capital` (default 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedMarkovChain {
    pub transient: Vec<StateId>,
    pub absorbing: Vec<StateId>,
    pub edges: Vec<Edge>,
    pub support: Support,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<StateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_capital: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateState(StateId),
    InvertedSupport(Support),
    UnknownSource { edge: usize, src: StateId },
    UnknownDestination { edge: usize, dst: StateId },
    EdgeFromAbsorbing { edge: usize, state: StateId },
    NonPositiveProbability { edge: usize, prob: Rational },
    ProbabilitySum { state: StateId, sum: Rational },
    StartNotTransient(StateId),
    InitialOutOfSupport(i64),
    NoTransientStates,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rational::format_fraction as frac;
        match self {
            Violation::DuplicateState(s) => write!(f, "state {s:?} is declared more than once"),
            Violation::InvertedSupport(s) => write!(f, "support {s} has min > max"),
            Violation::UnknownSource { edge, src } => {
                write!(f, "edge {edge}: source {src:?} is not a declared state")
            }
            Violation::UnknownDestination { edge, dst } => {
                write!(f, "edge {edge}: destination {dst:?} is not a declared state")
            }
            Violation::EdgeFromAbsorbing { edge, state } => {
                write!(f, "edge {edge}: absorbing state {state:?} must have no outgoing edges")
            }
            Violation::NonPositiveProbability { edge, prob } => {
                write!(f, "edge {edge}: probability {} is not positive", frac(prob))
            }
            Violation::ProbabilitySum { state, sum } => {
                write!(f, "state {state:?}: outgoing probabilities sum to {}, not 1", frac(sum))
            }
            Violation::StartNotTransient(s) => write!(f, "start {s:?} is not a transient state"),
            Violation::InitialOutOfSupport(c) => write!(f, "initial capital {c} is outside the support"),
            Violation::NoTransientStates => write!(f, "the chain has no transient state to start from"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid chain:\n{}", .0.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("chain JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl WeightedMarkovChain {
    /// Every broken structural rule, in a stable order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        if self.support.min > self.support.max {
            violations.push(Violation::InvertedSupport(self.support));
        }

        let mut seen = HashSet::new();
        for id in self.transient.iter().chain(&self.absorbing) {
            if !seen.insert(id.as_str()) {
                violations.push(Violation::DuplicateState(id.clone()));
            }
        }
        let transient: HashSet<&str> = self.transient.iter().map(String::as_str).collect();
        let absorbing: HashSet<&str> = self.absorbing.iter().map(String::as_str).collect();

        let mut sums: BTreeMap<&str, Rational> = BTreeMap::new();
        for (k, edge) in self.edges.iter().enumerate() {
            if absorbing.contains(edge.src.as_str()) {
                violations.push(Violation::EdgeFromAbsorbing { edge: k, state: edge.src.clone() });
            } else if !transient.contains(edge.src.as_str()) {
                violations.push(Violation::UnknownSource { edge: k, src: edge.src.clone() });
            }
            if !seen.contains(edge.dst.as_str()) {
                violations.push(Violation::UnknownDestination { edge: k, dst: edge.dst.clone() });
            }
            if !edge.prob.is_positive() {
                violations.push(Violation::NonPositiveProbability { edge: k, prob: edge.prob.clone() });
            }
            *sums.entry(edge.src.as_str()).or_insert_with(Rational::zero) += &edge.prob;
        }

        for state in &self.transient {
            let sum = sums.get(state.as_str()).cloned().unwrap_or_else(Rational::zero);
            if !sum.is_one() {
                violations.push(Violation::ProbabilitySum { state: state.clone(), sum });
            }
        }
        if self.transient.is_empty() {
            violations.push(Violation::NoTransientStates);
        }
        if let Some(start) = &self.start {
            if !transient.contains(start.as_str()) {
                violations.push(Violation::StartNotTransient(start.clone()));
            }
        }
        if let Some(c) = self.initial_capital {
            if !self.support.contains(c) {
                violations.push(Violation::InitialOutOfSupport(c));
            }
        }
        violations
    }

    /// The declared start state, else the first transient state.
    pub fn start_state(&self) -> Option<&str> {
        self.start.as_deref().or(self.transient.first().map(String::as_str))
    }

    pub fn initial(&self) -> i64 {
        self.initial_capital.unwrap_or(0)
    }

    pub fn ensure_valid(&self) -> Result<(), ChainError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ChainError::Invalid(violations))
        }
    }

    pub fn is_transient(&self, id: &str) -> bool {
        self.transient.iter().any(|s| s == id)
    }

    pub fn is_absorbing(&self, id: &str) -> bool {
        self.absorbing.iter().any(|s| s == id)
    }

    pub fn from_json(text: &str) -> Result<Self, ChainError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serialization is infallible")
    }

    /// Fewest edges from `start` to any absorbing state, if one is reachable.
    pub fn shortest_absorption(&self, start: &str) -> Option<usize> {
        let mut frontier = vec![start];
        let mut visited: HashSet<&str> = HashSet::from([start]);
        let mut depth = 0;
        while !frontier.is_empty() {
            if frontier.iter().any(|s| self.is_absorbing(s)) {
                return Some(depth);
            }
            let mut next = Vec::new();
            for state in frontier {
                for edge in self.edges.iter().filter(|e| e.src == state) {
                    if visited.insert(edge.dst.as_str()) {
                        next.push(edge.dst.as_str());
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        None
    }
}
