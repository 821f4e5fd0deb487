//! The algebra of communicating processes: communication, allowing, hiding
//! and parallel composition over process instances or pre-explored
//! transition systems, with on-the-fly exploration of composition
//! expressions.
//!
//! A parallel step is any interleaved left step, interleaved right step, or
//! synchronous pair whose label is the multiset sum of the component labels.
//! Communication rewrites labels, hiding erases them, and allowing keeps
//! exactly the transitions whose data-stripped label is in the allow set.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::data::Value;
use crate::explore::{summand_steps, ExploreError, LimitKind, Limits};
use crate::lpe::{validate_lpe, MultiActionExpr, ProcessInstance};
use crate::lts::{ActionValue, Lts, MultiActionValue, Transition};

/// A multiset of action labels, sorted with multiplicities as repetition.
/// Used for allow sets and as the result of stripping data from a label.
pub type LabelMultiset = Vec<String>;

/// Builds the canonical form of a label multiset.
pub fn label_multiset(labels: impl IntoIterator<Item = impl Into<String>>) -> LabelMultiset {
    let mut out: Vec<String> = labels.into_iter().map(Into::into).collect();
    out.sort();
    out
}

/// A communication rule `a0|...|an -> c`: when all left-hand labels occur
/// with the same data, they fuse into the right-hand label carrying that
/// data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CommRule {
    /// Left-hand label multiset, canonically sorted, at least one label.
    pub lhs: LabelMultiset,
    pub rhs: String,
}

impl CommRule {
    pub fn new(
        lhs: impl IntoIterator<Item = impl Into<String>>,
        rhs: impl Into<String>,
    ) -> Self {
        CommRule {
            lhs: label_multiset(lhs),
            rhs: rhs.into(),
        }
    }
}

impl fmt::Display for CommRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs.join("|"), self.rhs)
    }
}

/// Problems found by [`validate_comms`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommsViolation {
    EmptyLhs { rule: usize },
    /// A label occurs in the left-hand sides of two different rules, which
    /// would make the rewriting order observable.
    SharedLhsLabel { label: String },
    /// A right-hand label occurs in the left-hand side of another rule.
    RhsInOtherLhs { label: String },
    /// `a -> a` never terminates when applied repeatedly.
    IdentityRule { rule: usize },
}

impl fmt::Display for CommsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommsViolation::EmptyLhs { rule } => {
                write!(f, "rule {rule} has an empty left-hand side")
            }
            CommsViolation::SharedLhsLabel { label } => {
                write!(f, "label '{label}' occurs in two left-hand sides")
            }
            CommsViolation::RhsInOtherLhs { label } => write!(
                f,
                "result label '{label}' occurs in another rule's left-hand side"
            ),
            CommsViolation::IdentityRule { rule } => {
                write!(f, "rule {rule} maps a label to itself")
            }
        }
    }
}

/// Checks that a set of communication rules is unambiguous: left-hand sides
/// of different rules share no label, and no result label occurs in another
/// rule's left-hand side.
pub fn validate_comms(rules: &[CommRule]) -> Vec<CommsViolation> {
    let mut problems = Vec::new();
    for (i, rule) in rules.iter().enumerate() {
        if rule.lhs.is_empty() {
            problems.push(CommsViolation::EmptyLhs { rule: i });
        }
        if rule.lhs.len() == 1 && rule.lhs[0] == rule.rhs {
            problems.push(CommsViolation::IdentityRule { rule: i });
        }
        for (j, other) in rules.iter().enumerate() {
            if i < j {
                if let Some(shared) = rule.lhs.iter().find(|l| other.lhs.contains(l)) {
                    problems.push(CommsViolation::SharedLhsLabel {
                        label: shared.clone(),
                    });
                }
            }
            if i != j && other.lhs.contains(&rule.rhs) {
                problems.push(CommsViolation::RhsInOtherLhs {
                    label: rule.rhs.clone(),
                });
            }
        }
    }
    problems
}

/// Applies communication rules to a label: as long as some rule's left-hand
/// labels all occur carrying pairwise-equal data, they are removed and
/// replaced by the result label with that data. The rules' validity
/// guarantees the outcome does not depend on application order.
pub fn gamma_apply(rules: &[CommRule], label: &MultiActionValue) -> MultiActionValue {
    let mut counts: BTreeMap<ActionValue, usize> = BTreeMap::new();
    for factor in label.factors() {
        *counts.entry(factor.clone()).or_insert(0) += 1;
    }

    for rule in rules {
        let mut need: BTreeMap<&str, usize> = BTreeMap::new();
        for l in &rule.lhs {
            *need.entry(l.as_str()).or_insert(0) += 1;
        }
        loop {
            // Candidate data tuples come from occurrences of the first
            // left-hand label.
            let first = rule.lhs[0].as_str();
            let candidate = counts
                .iter()
                .filter(|(factor, &count)| count > 0 && factor.label == first)
                .map(|(factor, _)| factor.args.clone())
                .find(|args| {
                    need.iter().all(|(l, &n)| {
                        counts
                            .get(&ActionValue::new(*l, args.clone()))
                            .is_some_and(|&have| have >= n)
                    })
                });
            match candidate {
                Some(args) => {
                    for (l, n) in &need {
                        *counts
                            .get_mut(&ActionValue::new(*l, args.clone()))
                            .expect("candidate checked") -= n;
                    }
                    *counts
                        .entry(ActionValue::new(rule.rhs.clone(), args))
                        .or_insert(0) += 1;
                }
                None => break,
            }
        }
    }

    let mut factors = Vec::new();
    for (factor, count) in counts {
        for _ in 0..count {
            factors.push(factor.clone());
        }
    }
    MultiActionValue::from_factors(factors)
}

/// Erases every occurrence of a hidden label, keeping the rest.
pub fn hide_apply(hidden: &BTreeSet<String>, label: &MultiActionValue) -> MultiActionValue {
    label.retain_labels(|l| !hidden.contains(l))
}

/// Drops the data from a label, leaving the multiset of action names.
pub fn strip_data(label: &MultiActionValue) -> LabelMultiset {
    label_multiset(label.factors().iter().map(|f| f.label.clone()))
}

/// [`strip_data`] for syntactic multi-actions.
pub fn strip_multi_action_expr(action: &MultiActionExpr) -> LabelMultiset {
    label_multiset(action.factors.iter().map(|f| f.label.clone()))
}

/// A component of a parallel composition: either a process instance stepped
/// by the summand engine, or a pre-explored (typically minimised)
/// transition system.
#[derive(Debug, Clone)]
pub enum ProcessLeaf {
    Instance(ProcessInstance),
    Lts(Arc<Lts>),
}

/// A composition expression: a tree of communication, allow, hide and
/// parallel operators over process leaves.
#[derive(Debug, Clone)]
pub enum CompositionExpr {
    Comm(Vec<CommRule>, Box<CompositionExpr>),
    Allow(BTreeSet<LabelMultiset>, Box<CompositionExpr>),
    Hide(BTreeSet<String>, Box<CompositionExpr>),
    Par(Box<CompositionExpr>, Box<CompositionExpr>),
    Leaf(ProcessLeaf),
}

impl CompositionExpr {
    pub fn comm(rules: Vec<CommRule>, child: CompositionExpr) -> Self {
        CompositionExpr::Comm(rules, Box::new(child))
    }

    pub fn allow(allowed: BTreeSet<LabelMultiset>, child: CompositionExpr) -> Self {
        CompositionExpr::Allow(allowed, Box::new(child))
    }

    pub fn hide(
        hidden: impl IntoIterator<Item = impl Into<String>>,
        child: CompositionExpr,
    ) -> Self {
        CompositionExpr::Hide(
            hidden.into_iter().map(Into::into).collect(),
            Box::new(child),
        )
    }

    pub fn par(left: CompositionExpr, right: CompositionExpr) -> Self {
        CompositionExpr::Par(Box::new(left), Box::new(right))
    }

    pub fn instance(instance: ProcessInstance) -> Self {
        CompositionExpr::Leaf(ProcessLeaf::Instance(instance))
    }

    pub fn lts(lts: Arc<Lts>) -> Self {
        CompositionExpr::Leaf(ProcessLeaf::Lts(lts))
    }

    fn leaves<'a>(&'a self, out: &mut Vec<&'a ProcessLeaf>) {
        match self {
            CompositionExpr::Comm(_, c) | CompositionExpr::Allow(_, c) | CompositionExpr::Hide(_, c) => {
                c.leaves(out)
            }
            CompositionExpr::Par(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
            CompositionExpr::Leaf(leaf) => out.push(leaf),
        }
    }

    fn leaf_count(&self) -> usize {
        match self {
            CompositionExpr::Comm(_, c) | CompositionExpr::Allow(_, c) | CompositionExpr::Hide(_, c) => {
                c.leaf_count()
            }
            CompositionExpr::Par(l, r) => l.leaf_count() + r.leaf_count(),
            CompositionExpr::Leaf(_) => 1,
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            CompositionExpr::Comm(rules, c) => {
                let problems = validate_comms(rules);
                if !problems.is_empty() {
                    let rendered: Vec<String> =
                        problems.iter().map(|p| p.to_string()).collect();
                    return Err(format!("invalid communication set: {}", rendered.join("; ")));
                }
                c.validate()
            }
            CompositionExpr::Allow(allowed, c) => {
                if allowed.is_empty() {
                    return Err("allow set must be non-empty".into());
                }
                c.validate()
            }
            CompositionExpr::Hide(hidden, c) => {
                if hidden.is_empty() {
                    return Err("hide set must be non-empty".into());
                }
                c.validate()
            }
            CompositionExpr::Par(l, r) => {
                l.validate()?;
                r.validate()
            }
            CompositionExpr::Leaf(ProcessLeaf::Instance(instance)) => {
                let report = validate_lpe(&instance.lpe);
                if !report.is_valid() {
                    return Err(format!("invalid process '{}': {report}", instance.lpe.name));
                }
                Ok(())
            }
            CompositionExpr::Leaf(ProcessLeaf::Lts(_)) => Ok(()),
        }
    }
}

// Per-leaf state store: interns instance state vectors to dense local ids
// and memoises the outgoing steps of every discovered local state.
enum LeafStates {
    Instance {
        instance: ProcessInstance,
        nat_bound: u64,
        ids: HashMap<Vec<Value>, usize>,
        states: Vec<Vec<Value>>,
        steps: Vec<Option<Vec<(MultiActionValue, usize)>>>,
        truncated: bool,
    },
    Lts {
        lts: Arc<Lts>,
        outgoing: Vec<Vec<(MultiActionValue, usize)>>,
    },
}

impl LeafStates {
    fn new(leaf: &ProcessLeaf, nat_bound: u64) -> Self {
        match leaf {
            ProcessLeaf::Instance(instance) => {
                let init = instance.init.clone();
                LeafStates::Instance {
                    instance: instance.clone(),
                    nat_bound,
                    ids: HashMap::from([(init.clone(), 0)]),
                    states: vec![init],
                    steps: vec![None],
                    truncated: false,
                }
            }
            ProcessLeaf::Lts(lts) => {
                let mut outgoing = vec![Vec::new(); lts.num_states];
                for t in &lts.transitions {
                    outgoing[t.src].push((t.label.clone(), t.dst));
                }
                LeafStates::Lts {
                    lts: lts.clone(),
                    outgoing,
                }
            }
        }
    }

    fn initial(&self) -> usize {
        match self {
            LeafStates::Instance { .. } => 0,
            LeafStates::Lts { lts, .. } => lts.initial,
        }
    }

    fn truncated(&self) -> bool {
        match self {
            LeafStates::Instance { truncated, .. } => *truncated,
            LeafStates::Lts { lts, .. } => lts.truncated,
        }
    }

    fn successors(&mut self, local: usize) -> Result<Vec<(MultiActionValue, usize)>, ExploreError> {
        match self {
            LeafStates::Instance {
                instance,
                nat_bound,
                ids,
                states,
                steps,
                truncated,
            } => {
                if let Some(cached) = &steps[local] {
                    return Ok(cached.clone());
                }
                let step_set = summand_steps(&instance.lpe, &states[local].clone(), *nat_bound)?;
                *truncated |= step_set.truncated;
                let mut out = Vec::with_capacity(step_set.steps.len());
                for (label, next) in step_set.steps {
                    let id = match ids.get(&next) {
                        Some(&id) => id,
                        None => {
                            let id = states.len();
                            ids.insert(next.clone(), id);
                            states.push(next);
                            steps.push(None);
                            id
                        }
                    };
                    out.push((label, id));
                }
                steps[local] = Some(out.clone());
                Ok(out)
            }
            LeafStates::Lts { outgoing, .. } => Ok(outgoing[local].clone()),
        }
    }

    fn render(&self, local: usize) -> String {
        match self {
            LeafStates::Instance { instance, states, .. } => {
                let mut out = format!("{}(", instance.lpe.name);
                for (i, v) in states[local].iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&v.to_string());
                }
                out.push(')');
                out
            }
            LeafStates::Lts { lts, .. } => match &lts.state_labels {
                Some(annotations) => annotations[local].clone(),
                None => format!("#{local}"),
            },
        }
    }
}

// Structural successor computation: the state slice covers the leaves of
// the node in left-to-right order.
fn node_successors(
    expr: &CompositionExpr,
    state: &[usize],
    leaves: &mut [LeafStates],
    leaf_offset: usize,
) -> Result<Vec<(MultiActionValue, Vec<usize>)>, ExploreError> {
    match expr {
        CompositionExpr::Leaf(_) => {
            let steps = leaves[leaf_offset].successors(state[0])?;
            Ok(steps
                .into_iter()
                .map(|(label, next)| (label, vec![next]))
                .collect())
        }
        CompositionExpr::Par(left, right) => {
            let split = left.leaf_count();
            let (left_state, right_state) = state.split_at(split);
            let left_steps = node_successors(left, left_state, leaves, leaf_offset)?;
            let right_steps = node_successors(right, right_state, leaves, leaf_offset + split)?;

            let mut out = Vec::new();
            // Interleaved left moves.
            for (label, next_left) in &left_steps {
                let mut next = next_left.clone();
                next.extend_from_slice(right_state);
                out.push((label.clone(), next));
            }
            // Interleaved right moves.
            for (label, next_right) in &right_steps {
                let mut next = left_state.to_vec();
                next.extend_from_slice(next_right);
                out.push((label.clone(), next));
            }
            // Synchronous pairs.
            for (left_label, next_left) in &left_steps {
                for (right_label, next_right) in &right_steps {
                    let mut next = next_left.clone();
                    next.extend_from_slice(next_right);
                    out.push((left_label.sum(right_label), next));
                }
            }
            Ok(out)
        }
        CompositionExpr::Comm(rules, child) => {
            let steps = node_successors(child, state, leaves, leaf_offset)?;
            Ok(steps
                .into_iter()
                .map(|(label, next)| (gamma_apply(rules, &label), next))
                .collect())
        }
        CompositionExpr::Hide(hidden, child) => {
            let steps = node_successors(child, state, leaves, leaf_offset)?;
            Ok(steps
                .into_iter()
                .map(|(label, next)| (hide_apply(hidden, &label), next))
                .collect())
        }
        CompositionExpr::Allow(allowed, child) => {
            let steps = node_successors(child, state, leaves, leaf_offset)?;
            Ok(steps
                .into_iter()
                .filter(|(label, _)| allowed.contains(&strip_data(label)))
                .collect())
        }
    }
}

/// Explores the state space of a composition expression breadth-first.
///
/// Leaves step either through the summand engine (process instances) or
/// through their transition relation (pre-explored systems); the operators
/// transform and filter the labels structurally. States are tuples of
/// per-leaf states, interned in discovery order.
pub fn explore_composition(
    expr: &CompositionExpr,
    limits: Limits,
) -> Result<Lts, ExploreError> {
    expr.validate().map_err(ExploreError::InvalidProcess)?;

    let mut leaf_refs = Vec::new();
    expr.leaves(&mut leaf_refs);
    let mut leaves: Vec<LeafStates> = leaf_refs
        .iter()
        .map(|l| LeafStates::new(l, limits.nat_bound))
        .collect();

    let initial: Vec<usize> = leaves.iter().map(|l| l.initial()).collect();
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::from([(initial.clone(), 0)]);
    let mut states: Vec<Vec<usize>> = vec![initial];
    let mut queue = VecDeque::from([0usize]);
    let mut transitions: Vec<Transition> = Vec::new();

    let render = |states: &[Vec<usize>], leaves: &[LeafStates]| -> Vec<String> {
        states
            .iter()
            .map(|composite| {
                composite
                    .iter()
                    .enumerate()
                    .map(|(i, &local)| leaves[i].render(local))
                    .collect::<Vec<_>>()
                    .join(" || ")
            })
            .collect()
    };

    let finish = |states: &[Vec<usize>],
                  transitions: Vec<Transition>,
                  leaves: &[LeafStates]| {
        let mut lts = Lts::new(states.len(), 0, transitions);
        lts.state_labels = Some(render(states, leaves));
        lts.truncated = leaves.iter().any(|l| l.truncated());
        lts
    };

    while let Some(src) = queue.pop_front() {
        let successors = node_successors(expr, &states[src].clone(), &mut leaves, 0)?;
        let mut seen = HashSet::new();
        for (label, next) in successors {
            if !seen.insert((label.clone(), next.clone())) {
                continue;
            }
            let dst = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= limits.max_states {
                        return Err(ExploreError::LimitExceeded {
                            kind: LimitKind::States,
                            partial: Box::new(finish(&states, transitions, &leaves)),
                        });
                    }
                    let id = states.len();
                    ids.insert(next.clone(), id);
                    states.push(next);
                    queue.push_back(id);
                    id
                }
            };
            if transitions.len() >= limits.max_transitions {
                return Err(ExploreError::LimitExceeded {
                    kind: LimitKind::Transitions,
                    partial: Box::new(finish(&states, transitions, &leaves)),
                });
            }
            transitions.push(Transition::new(src, label, dst));
        }
    }

    Ok(finish(&states, transitions, &leaves))
}
