//! State-space generation for a process instance.
//!
//! States are vectors of evaluated parameter values; two syntactically
//! different update expressions that evaluate to the same values reach the
//! same state, so the generated system is the representative one. Discovery
//! is breadth-first with dense identifiers in discovery order, which makes
//! runs reproducible and counterexamples minimal-depth.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::data::{enumerate_sort, Environment, ExprError, Value};
use crate::lpe::{Lpe, MultiActionExpr, ProcessInstance};
use crate::lts::{ActionValue, Lts, MultiActionValue, Transition};

/// Evaluates a syntactic multi-action to its concrete label.
pub fn eval_multi_action(
    action: &MultiActionExpr,
    env: &Environment,
) -> Result<MultiActionValue, ExprError> {
    let mut factors = Vec::with_capacity(action.factors.len());
    for factor in &action.factors {
        let args = factor
            .args
            .iter()
            .map(|a| a.evaluate(env))
            .collect::<Result<Vec<_>, _>>()?;
        factors.push(ActionValue::new(factor.label.clone(), args));
    }
    Ok(MultiActionValue::from_factors(factors))
}

/// Bounds on exploration and on `Nat` domains.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Sum variables (and oracle enumerations) over `Nat` range over
    /// `0..=nat_bound`; crossing the bound marks the result as truncated.
    pub nat_bound: u64,
    pub max_states: usize,
    pub max_transitions: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            nat_bound: 64,
            max_states: 10_000_000,
            max_transitions: 100_000_000,
        }
    }
}

impl Limits {
    pub fn with_nat_bound(nat_bound: u64) -> Self {
        Limits {
            nat_bound,
            ..Limits::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    States,
    Transitions,
}

#[derive(Debug, Error)]
pub enum ExploreError {
    /// The exploration hit a limit; the partial system generated so far is
    /// attached.
    #[error("{kind:?} limit exceeded after {} states and {} transitions", partial.num_states, partial.num_transitions())]
    LimitExceeded { kind: LimitKind, partial: Box<Lts> },

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("invalid process: {0}")]
    InvalidProcess(String),
}

/// The enabled steps of one state: evaluated labels and successor vectors,
/// duplicate-free in generation order.
#[derive(Debug, Clone)]
pub struct StepSet {
    pub steps: Vec<(MultiActionValue, Vec<Value>)>,
    pub truncated: bool,
}

/// Computes the enabled steps of `state` by walking the summands in order
/// and enumerating each summand's sum variables over their (possibly
/// truncated) domains.
pub fn summand_steps(lpe: &Lpe, state: &[Value], nat_bound: u64) -> Result<StepSet, ExprError> {
    let mut env = Environment::new();
    for ((name, _), value) in lpe.params.iter().zip(state) {
        env.bind(name.clone(), value.clone());
    }

    let mut steps = Vec::new();
    let mut seen = HashSet::new();
    let mut truncated = false;

    for summand in &lpe.summands {
        let domains: Vec<_> = summand
            .sum_vars
            .iter()
            .map(|(_, sort)| enumerate_sort(sort, nat_bound))
            .collect();
        truncated |= domains.iter().any(|d| d.truncated);

        // Odometer over the sum-variable domains; rightmost varies fastest.
        let mut choice = vec![0usize; domains.len()];
        'assignments: loop {
            for ((name, _), (domain, &index)) in summand
                .sum_vars
                .iter()
                .zip(domains.iter().zip(choice.iter()))
            {
                env.bind(name.clone(), domain.values[index].clone());
            }

            if summand.condition.eval_bool(&env)? {
                let label = eval_multi_action(&summand.action, &env)?;
                let next = summand
                    .updates
                    .iter()
                    .map(|u| u.evaluate(&env))
                    .collect::<Result<Vec<_>, _>>()?;
                if seen.insert((label.clone(), next.clone())) {
                    steps.push((label, next));
                }
            }

            for position in (0..choice.len()).rev() {
                choice[position] += 1;
                if choice[position] < domains[position].values.len() {
                    continue 'assignments;
                }
                choice[position] = 0;
            }
            break;
        }
    }

    Ok(StepSet { steps, truncated })
}

fn render_state(lpe: &Lpe, state: &[Value]) -> String {
    let mut out = format!("{}(", lpe.name);
    for (i, v) in state.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&v.to_string());
    }
    out.push(')');
    out
}

/// Generates the reachable state space of a process instance.
///
/// The process must be well-formed (see [`crate::lpe::validate_lpe`]).
/// Exceeding a limit aborts with the partial system attached; transitions
/// into states beyond the state limit are dropped so the partial system
/// stays consistent.
pub fn explore_lpe(instance: &ProcessInstance, limits: Limits) -> Result<Lts, ExploreError> {
    let lpe = &instance.lpe;
    let report = crate::lpe::validate_lpe(lpe);
    if !report.is_valid() {
        return Err(ExploreError::InvalidProcess(report.to_string()));
    }

    let mut ids: HashMap<Vec<Value>, usize> = HashMap::new();
    let mut states: Vec<Vec<Value>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut transitions = Vec::new();
    let mut truncated = false;

    ids.insert(instance.init.clone(), 0);
    states.push(instance.init.clone());
    queue.push_back(0usize);

    let partial = |states: &[Vec<Value>], transitions: Vec<Transition>, truncated: bool| {
        let mut lts = Lts::new(states.len(), 0, transitions);
        lts.state_labels = Some(states.iter().map(|s| render_state(lpe, s)).collect());
        lts.truncated = truncated;
        lts
    };

    while let Some(src) = queue.pop_front() {
        let step_set = summand_steps(lpe, &states[src].clone(), limits.nat_bound)?;
        truncated |= step_set.truncated;
        for (label, next) in step_set.steps {
            let dst = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= limits.max_states {
                        return Err(ExploreError::LimitExceeded {
                            kind: LimitKind::States,
                            partial: Box::new(partial(&states, transitions, truncated)),
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
                    partial: Box::new(partial(&states, transitions, truncated)),
                });
            }
            transitions.push(Transition::new(src, label, dst));
        }
    }

    Ok(partial(&states, transitions, truncated))
}
