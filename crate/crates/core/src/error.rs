use std::fmt;

use thiserror::Error;

use crate::biset::Biset;

/// Why an instance (or one stage of a solver) has no feasible solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Infeasibility {
    /// Even the full candidate set leaves this demand short.
    Demand {
        source: usize,
        target: usize,
        achieved: u64,
        required: u64,
    },
    /// A source location demand left short even by `S = V`.
    NodeDemand {
        node: usize,
        achieved: u64,
        required: u64,
    },
    /// Minimum flow cost to `node` exceeds its bound even with every source open.
    Budget {
        node: usize,
        min_flow_cost: String,
        bound: String,
    },
    /// A hyperedge with no selectable node.
    EmptyHyperedge(usize),
    /// A biset the candidate edges cannot cover.
    Uncovered { stage: usize, witness: Biset },
    /// The greedy stalled with no element of positive gain before the target.
    Stalled { reached: String, target: String },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Demand {
                source,
                target,
                achieved,
                required,
            } => write!(
                f,
                "demand {source}->{target} reaches connectivity {achieved} < requirement {required}"
            ),
            Infeasibility::NodeDemand {
                node,
                achieved,
                required,
            } => write!(
                f,
                "node {node} reaches connectivity {achieved} < demand {required}"
            ),
            Infeasibility::Budget {
                node,
                min_flow_cost,
                bound,
            } => write!(
                f,
                "node {node}: minimum flow cost {min_flow_cost} exceeds bound {bound}"
            ),
            Infeasibility::EmptyHyperedge(i) => write!(f, "hyperedge {i} has no selectable node"),
            Infeasibility::Uncovered { stage, witness } => {
                write!(f, "stage {stage}: biset {witness} cannot be covered")
            }
            Infeasibility::Stalled { reached, target } => {
                write!(f, "progress stalled at {reached} below target {target}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("node {0} has capacity 0; capacities must be at least 1")]
    ZeroCapacity(usize),
    #[error("{0}")]
    Incompatible(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error("{what} has size {size}, above the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
