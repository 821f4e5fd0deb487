//! Explicit labelled transition systems with multi-action labels.
//!
//! State identifiers are dense naturals in discovery order, which makes the
//! output of every algorithm in this crate reproducible. A finished [`Lts`]
//! is immutable and can be shared freely.

mod aut;
mod label;
mod minimise;

pub use aut::{read_aut, to_aut_string, write_aut, AutError};
pub use label::{ActionValue, MultiActionValue};
pub use minimise::{check_bisim, minimise_bisim, BisimResult};

/// One labelled transition between state identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub src: usize,
    pub label: MultiActionValue,
    pub dst: usize,
}

impl Transition {
    pub fn new(src: usize, label: MultiActionValue, dst: usize) -> Self {
        Transition { src, label, dst }
    }
}

/// A finite labelled transition system.
#[derive(Debug, Clone, Default)]
pub struct Lts {
    pub num_states: usize,
    pub initial: usize,
    /// Duplicate-free; the order is the generation order and is part of the
    /// deterministic output contract.
    pub transitions: Vec<Transition>,
    /// Optional per-state annotations (rendered parameter values) kept for
    /// debugging and traces.
    pub state_labels: Option<Vec<String>>,
    /// Set when some `Nat` domain was cut off while generating this system;
    /// results are then only trustworthy up to the chosen bound.
    pub truncated: bool,
}

impl Lts {
    pub fn new(num_states: usize, initial: usize, transitions: Vec<Transition>) -> Self {
        debug_assert!(initial < num_states.max(1));
        debug_assert!(transitions
            .iter()
            .all(|t| t.src < num_states && t.dst < num_states));
        Lts {
            num_states,
            initial,
            transitions,
            state_labels: None,
            truncated: false,
        }
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    /// Outgoing adjacency lists, indexed by source state.
    pub fn outgoing(&self) -> Vec<Vec<(&MultiActionValue, usize)>> {
        let mut out = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            out[t.src].push((&t.label, t.dst));
        }
        out
    }

    /// The distinct labels of this system, in canonical order.
    pub fn label_set(&self) -> Vec<&MultiActionValue> {
        let mut labels: Vec<&MultiActionValue> = self.transitions.iter().map(|t| &t.label).collect();
        labels.sort();
        labels.dedup();
        labels
    }
}
