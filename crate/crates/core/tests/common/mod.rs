//! Shared fixtures and independent oracles for the integration tests.
//!
//! The naive bisimulation oracle here is deliberately separate from the
//! library's partition-refinement kernel: it computes the greatest
//! bisimulation as a relation fixpoint in O(n^2) and is only feasible for
//! small systems, which is exactly what makes it a trustworthy yardstick.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;

use lpecleave::{
    parse_spec, ActionValue, CleavePlan, EnumSort, Expression, FreshNames, Lpe, Lts,
    MultiActionExpr, MultiActionValue, ProcessInstance, SeparationTuple, Sort, SpecFile,
    Transition, Value,
};

pub const MACHINE_SPEC: &str = "\
% A machine that alternates between two modes, counting down in between.
act count;
act toggle;
proc Machine(n: Nat, s: Bool) =
    (n > 0)  -> count  . Machine(n - 1, s)
  + (n == 0) -> toggle . Machine(if(!s, 3, 1), !s);
init Machine(0, false);
";

pub const OVERLAP_SPEC: &str = "\
% Two flags with overlapping multi-actions: a|b can only fire jointly.
act a;
act b;
proc P(x: Bool, y: Bool) =
    x         -> a   . P(false, y)
  + y         -> b   . P(x, false)
  + (x && !y) -> a|b . P(false, false);
init P(true, true);
";

pub fn machine_spec() -> SpecFile {
    parse_spec(MACHINE_SPEC).expect("machine spec parses")
}

pub fn overlap_spec() -> SpecFile {
    parse_spec(OVERLAP_SPEC).expect("overlap spec parses")
}

/// The hand-written decomposition that synchronises the whole parameter
/// vector on every summand: both components cover both summands, nothing is
/// independent, and the payload is `<n, s>` everywhere.
pub fn machine_naive_plan(machine: &Lpe) -> CleavePlan {
    let n = || Expression::var("n", Sort::Nat);
    let s = || Expression::var("s", Sort::Bool);
    let full_payload = vec![n(), s()];
    let conditions: BTreeMap<usize, Expression> = BTreeMap::from([
        (0, n().greater(Expression::nat(0))),
        (1, n().equals(Expression::nat(0))),
    ]);
    let payload: BTreeMap<usize, Vec<Expression>> =
        BTreeMap::from([(0, full_payload.clone()), (1, full_payload)]);

    let tuple = |params: BTreeSet<usize>, actions: BTreeMap<usize, MultiActionExpr>| {
        SeparationTuple {
            params,
            independent: BTreeSet::new(),
            covered: BTreeSet::from([0, 1]),
            conditions: conditions.clone(),
            actions,
            sync_payload: payload.clone(),
        }
    };
    let count = MultiActionExpr::from_factors(vec![lpecleave::ActionExpr::plain("count")]);
    let toggle = MultiActionExpr::from_factors(vec![lpecleave::ActionExpr::plain("toggle")]);
    CleavePlan {
        tuple_v: tuple(
            BTreeSet::from([0]),
            BTreeMap::from([(0, count), (1, MultiActionExpr::silent())]),
        ),
        tuple_w: tuple(
            BTreeSet::from([1]),
            BTreeMap::from([(0, MultiActionExpr::silent()), (1, toggle)]),
        ),
        names: FreshNames::for_lpe(machine),
    }
}

/// Number of strong-bisimulation equivalence classes over all states,
/// computed by shrinking the all-pairs relation until it is a bisimulation.
pub fn naive_bisim_classes(lts: &Lts) -> usize {
    let n = lts.num_states;
    let outgoing = lts.outgoing();

    let mut related = vec![vec![true; n]; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            for t in 0..n {
                if !related[s][t] {
                    continue;
                }
                let simulates = |from: usize, to: usize, related: &Vec<Vec<bool>>| {
                    outgoing[from].iter().all(|(label, from_next)| {
                        outgoing[to].iter().any(|(other_label, to_next)| {
                            label == other_label && related[*from_next][*to_next]
                        })
                    })
                };
                if !simulates(s, t, &related) || !simulates(t, s, &related) {
                    related[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut class_of = vec![usize::MAX; n];
    let mut classes = 0;
    for s in 0..n {
        if class_of[s] != usize::MAX {
            continue;
        }
        for t in s..n {
            if related[s][t] && class_of[t] == usize::MAX {
                class_of[t] = classes;
            }
        }
        classes += 1;
    }
    classes
}

/// A random system with `max_states` states and labels drawn from a small
/// alphabet; some states stay unreachable on purpose.
pub fn random_lts(rng: &mut StdRng, max_states: usize, num_labels: usize) -> Lts {
    let num_states = rng.gen_range(1..=max_states);
    let labels: Vec<MultiActionValue> = (0..num_labels)
        .map(|i| {
            MultiActionValue::single(ActionValue::plain(format!(
                "{}",
                (b'a' + i as u8) as char
            )))
        })
        .collect();
    let mut transitions = Vec::new();
    let mut seen = HashSet::new();
    let density = rng.gen_range(0..=3 * num_states);
    for _ in 0..density {
        let src = rng.gen_range(0..num_states);
        let dst = rng.gen_range(0..num_states);
        let label = labels[rng.gen_range(0..labels.len())].clone();
        if seen.insert((src, label.clone(), dst)) {
            transitions.push(Transition::new(src, label, dst));
        }
    }
    Lts::new(num_states, 0, transitions)
}

// Sort pool for random processes: booleans, small naturals and two fixed
// enumerations.
fn enum_pool() -> Vec<Arc<EnumSort>> {
    vec![
        EnumSort::new("Color", ["red", "green", "blue"]).unwrap(),
        EnumSort::new("Flag", ["up", "down"]).unwrap(),
    ]
}

fn random_sort(rng: &mut StdRng, enums: &[Arc<EnumSort>]) -> Sort {
    match rng.gen_range(0..4) {
        0 | 1 => Sort::Bool,
        2 => Sort::Nat,
        _ => Sort::Enum(enums[rng.gen_range(0..enums.len())].clone()),
    }
}

fn random_value(rng: &mut StdRng, sort: &Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(rng.gen()),
        Sort::Nat => Value::Nat(rng.gen_range(0..=2)),
        Sort::Enum(e) => Value::Ctor(e.clone(), rng.gen_range(0..e.constructors.len())),
    }
}

// A term of the given sort over the variables in scope; all naturals stay
// at most 4, so the reachable data is covered by a bound of 5.
fn random_term(rng: &mut StdRng, sort: &Sort, scope: &[(String, Sort)]) -> Expression {
    let vars_of_sort: Vec<&(String, Sort)> =
        scope.iter().filter(|(_, s)| s == sort).collect();
    let use_var = !vars_of_sort.is_empty() && rng.gen_bool(0.5);
    if use_var {
        let (name, sort) = vars_of_sort[rng.gen_range(0..vars_of_sort.len())];
        let var = Expression::var(name.clone(), sort.clone());
        if *sort == Sort::Nat && rng.gen_bool(0.3) {
            return var.monus(Expression::nat(rng.gen_range(1..=2)));
        }
        if *sort == Sort::Bool && rng.gen_bool(0.3) {
            return var.not();
        }
        return var;
    }
    match sort {
        Sort::Nat => Expression::nat(rng.gen_range(0..=4)),
        _ => Expression::lit(random_value(rng, sort)),
    }
}

// One atomic condition over a single variable in scope.
fn random_atom(rng: &mut StdRng, scope: &[(String, Sort)]) -> Expression {
    if scope.is_empty() {
        return Expression::boolean(true);
    }
    let (name, sort) = &scope[rng.gen_range(0..scope.len())];
    let var = || Expression::var(name.clone(), sort.clone());
    match sort {
        Sort::Bool => {
            if rng.gen_bool(0.5) {
                var()
            } else {
                var().not()
            }
        }
        Sort::Nat => {
            let bound = Expression::nat(rng.gen_range(0..=3));
            match rng.gen_range(0..4) {
                0 => var().equals(bound),
                1 => var().less(bound),
                2 => var().less_eq(bound),
                _ => var().greater(bound),
            }
        }
        Sort::Enum(e) => {
            let ctor = Value::Ctor(e.clone(), rng.gen_range(0..e.constructors.len()));
            let expr = var().equals(Expression::lit(ctor));
            if rng.gen_bool(0.3) {
                expr.not()
            } else {
                expr
            }
        }
    }
}

/// A random well-formed process instance with a random parameter partition:
/// at most 4 parameters over Bool, small enumerations and Nat <= 4, at most
/// 5 summands, conditions built from per-variable atoms so that conjunct
/// splitting has something to do.
pub fn random_instance(rng: &mut StdRng) -> (ProcessInstance, Vec<String>, Vec<String>) {
    let enums = enum_pool();
    let num_params = rng.gen_range(1..=4);
    let params: Vec<(String, Sort)> = (0..num_params)
        .map(|i| (format!("p{i}"), random_sort(rng, &enums)))
        .collect();

    let actions: BTreeMap<String, Vec<Sort>> = BTreeMap::from([
        ("a".to_string(), vec![]),
        ("b".to_string(), vec![Sort::Nat]),
        ("c".to_string(), vec![Sort::Bool]),
        ("d".to_string(), vec![]),
    ]);
    let action_names = ["a", "b", "c", "d"];

    let num_summands = rng.gen_range(1..=5);
    let mut summands = Vec::new();
    for i in 0..num_summands {
        let mut sum_vars: Vec<(String, Sort)> = Vec::new();
        if rng.gen_bool(0.3) {
            sum_vars.push((format!("e{i}"), random_sort(rng, &enums)));
        }
        let scope: Vec<(String, Sort)> =
            params.iter().chain(&sum_vars).cloned().collect();

        let mut condition = random_atom(rng, &scope);
        for _ in 0..rng.gen_range(0..=2) {
            condition = condition.and(random_atom(rng, &scope));
        }

        let mut factors = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            let label = action_names[rng.gen_range(0..action_names.len())];
            let args = match label {
                "b" => vec![random_term(rng, &Sort::Nat, &scope)],
                "c" => vec![random_term(rng, &Sort::Bool, &scope)],
                _ => vec![],
            };
            factors.push(lpecleave::ActionExpr::new(label, args));
        }

        let updates: Vec<Expression> = params
            .iter()
            .map(|(name, sort)| {
                if rng.gen_bool(0.6) {
                    Expression::var(name.clone(), sort.clone())
                } else {
                    random_term(rng, sort, &scope)
                }
            })
            .collect();

        summands.push(lpecleave::Summand {
            sum_vars,
            condition,
            action: MultiActionExpr::from_factors(factors),
            updates,
        });
    }

    let lpe = Lpe {
        name: "R".to_string(),
        params: params.clone(),
        actions,
        summands,
    };
    let init: Vec<Value> = params.iter().map(|(_, s)| random_value(rng, s)).collect();
    let instance = ProcessInstance::new(Arc::new(lpe), init).expect("generated init fits");

    let mut v_names = Vec::new();
    let mut w_names = Vec::new();
    for (name, _) in &params {
        if rng.gen_bool(0.5) {
            v_names.push(name.clone());
        } else {
            w_names.push(name.clone());
        }
    }
    (instance, v_names, w_names)
}
