//! State invariants and restricted processes.
//!
//! A state invariant is a boolean predicate over the parameters that every
//! enabled summand preserves; when it holds initially it holds in every
//! reachable state. Conjoining it onto summand conditions never changes the
//! reachable behaviour of the monolithic process, but inside the components
//! of a decomposition it prunes the blind enumeration of foreign
//! parameters, which can shrink component state spaces dramatically.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cleave::{context_over_leaves, induce_component, CleaveError, CleavePlan, Side};
use crate::compose::{CompositionExpr, ProcessLeaf};
use crate::data::{enumerate_environments, Environment, ExprError, Expression, Sort, Value};
use crate::lpe::{project, Lpe, ProcessInstance};

/// A candidate state invariant: a boolean expression over the process
/// parameters.
#[derive(Debug, Clone)]
pub struct Invariant {
    pub psi: Expression,
}

impl Invariant {
    /// Wraps an expression after checking it is boolean and mentions only
    /// parameters of the given process.
    pub fn for_lpe(lpe: &Lpe, psi: Expression) -> Result<Self, InvariantError> {
        let sort = psi.sort_of().map_err(InvariantError::Expr)?;
        if sort != Sort::Bool {
            return Err(InvariantError::NotBoolean {
                found: sort.to_string(),
            });
        }
        let params: BTreeSet<&str> = lpe.params.iter().map(|(n, _)| n.as_str()).collect();
        if let Some(stray) = psi.free_vars().into_iter().find(|v| !params.contains(v.as_str())) {
            return Err(InvariantError::UnknownParameter { name: stray });
        }
        Ok(Invariant { psi })
    }
}

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("invariant must be boolean, found {found}")]
    NotBoolean { found: String },

    #[error("invariant mentions '{name}', which is not a parameter")]
    UnknownParameter { name: String },

    #[error("invariant does not hold for the initial values")]
    ViolatedAtInit,

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error(transparent)]
    Cleave(#[from] CleaveError),
}

/// A summand and an assignment under which it breaks the invariant.
#[derive(Debug, Clone)]
pub struct InvariantViolation {
    pub summand: usize,
    pub env: Vec<(String, Value)>,
}

#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub violations: Vec<InvariantViolation>,
    /// Some `Nat` domain was cut at the bound; holding is then only
    /// established up to it.
    pub truncated: bool,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `psi` is a state invariant by bounded enumeration: for every
/// summand and every assignment of parameters and sum variables satisfying
/// the condition and `psi`, the updated parameters must satisfy `psi`
/// again.
pub fn check_invariant(
    lpe: &Lpe,
    invariant: &Invariant,
    nat_bound: u64,
) -> Result<InvariantReport, ExprError> {
    let psi = &invariant.psi;
    let mut violations = Vec::new();
    let mut truncated = false;

    for (i, summand) in lpe.summands.iter().enumerate() {
        let mut vars = lpe.params.clone();
        vars.extend(summand.sum_vars.iter().cloned());
        let (envs, cut) = enumerate_environments(&vars, nat_bound);
        truncated |= cut;

        for env in &envs {
            if !summand.condition.eval_bool(env)? || !psi.eval_bool(env)? {
                continue;
            }
            let mut after = Environment::new();
            for ((name, _), update) in lpe.params.iter().zip(&summand.updates) {
                after.bind(name.clone(), update.evaluate(env)?);
            }
            if !psi.eval_bool(&after)? {
                violations.push(InvariantViolation {
                    summand: i,
                    env: vars
                        .iter()
                        .map(|(name, _)| {
                            (name.clone(), env.get(name).expect("enumerated").clone())
                        })
                        .collect(),
                });
            }
        }
    }

    Ok(InvariantReport {
        violations,
        truncated,
    })
}

/// Strengthens the conditions of the selected summands with `psi`, leaving
/// the others untouched. The name gets a suffix so restricted processes are
/// recognisable in output.
pub fn restrict_lpe(lpe: &Lpe, psi: &Expression, summands: &BTreeSet<usize>) -> Lpe {
    strengthen(
        lpe,
        &summands
            .iter()
            .map(|&i| (i, psi.clone()))
            .collect::<BTreeMap<_, _>>(),
    )
}

// Conjoins a per-summand expression onto the selected conditions.
fn strengthen(lpe: &Lpe, extra: &BTreeMap<usize, Expression>) -> Lpe {
    let mut out = lpe.clone();
    out.name = format!("{}_inv", lpe.name);
    for (i, summand) in out.summands.iter_mut().enumerate() {
        if let Some(expr) = extra.get(&i) {
            summand.condition = summand.condition.clone().and(expr.clone());
        }
    }
    out
}

/// Induces both components of a plan and strengthens their synchronising
/// summands with a state invariant of the original process.
///
/// Only the synchronising summands are strengthened; independent summands
/// cannot mention foreign parameters anyway. Inside a component the foreign
/// parameters appear as the extra sum variables of those summands, so `psi`
/// is well-scoped there and prunes their enumeration. With `on_update` the
/// invariant is instead applied to the update expressions, which avoids
/// introducing deadlock states in place of invariant-violating ones.
pub fn restrict_components(
    lpe: &Lpe,
    plan: &CleavePlan,
    invariant: &Invariant,
    use_tag: bool,
    on_update: bool,
) -> Result<(Lpe, Lpe), InvariantError> {
    let joint: BTreeSet<usize> = plan
        .tuple_v
        .covered
        .intersection(&plan.tuple_w.covered)
        .copied()
        .collect();

    // The strengthening expression per original summand index: psi itself,
    // or psi with every parameter replaced by that summand's update.
    let mut per_summand: BTreeMap<usize, Expression> = BTreeMap::new();
    for &i in &joint {
        let expr = if on_update {
            let map: BTreeMap<String, Expression> = lpe
                .params
                .iter()
                .zip(&lpe.summands[i].updates)
                .map(|((name, _), update)| (name.clone(), update.clone()))
                .collect();
            invariant.psi.substitute(&map)?
        } else {
            invariant.psi.clone()
        };
        per_summand.insert(i, expr);
    }

    let mut components = Vec::new();
    for (tuple, side) in [(&plan.tuple_v, Side::V), (&plan.tuple_w, Side::W)] {
        let induced = induce_component(lpe, tuple, side, &plan.names, use_tag)?;
        // Map original summand indices to positions in the induced process.
        let extra: BTreeMap<usize, Expression> = tuple
            .covered
            .iter()
            .enumerate()
            .filter_map(|(position, original)| {
                per_summand
                    .get(original)
                    .map(|expr| (position, expr.clone()))
            })
            .collect();
        components.push(strengthen(&induced, &extra));
    }
    let component_w = components.pop().expect("two components");
    let component_v = components.pop().expect("two components");
    Ok((component_v, component_w))
}

/// Builds the recombination expression for a plan with both components
/// restricted by a state invariant (see [`restrict_components`]).
///
/// Requires `psi` to be a state invariant (see [`check_invariant`]) that
/// holds for the initial values.
pub fn build_invariant_context(
    lpe: &Lpe,
    plan: &CleavePlan,
    invariant: &Invariant,
    init: &[Value],
    use_tag: bool,
    on_update: bool,
) -> Result<CompositionExpr, InvariantError> {
    let mut at_init = Environment::new();
    for ((name, _), value) in lpe.params.iter().zip(init) {
        at_init.bind(name.clone(), value.clone());
    }
    if !invariant.psi.eval_bool(&at_init)? {
        return Err(InvariantError::ViolatedAtInit);
    }

    let (component_v, component_w) =
        restrict_components(lpe, plan, invariant, use_tag, on_update)?;
    let mut leaves = Vec::new();
    for (component, tuple) in [(component_v, &plan.tuple_v), (component_w, &plan.tuple_w)] {
        let instance = ProcessInstance::new(
            component.into(),
            project(init, &tuple.params)
                .map_err(|e| CleaveError::InvalidTuple { message: e.to_string() })?,
        )
        .map_err(|e| CleaveError::Instance(e.to_string()))?;
        leaves.push(ProcessLeaf::Instance(instance));
    }
    let leaf_w = leaves.pop().expect("two components");
    let leaf_v = leaves.pop().expect("two components");
    Ok(context_over_leaves(lpe, plan, use_tag, leaf_v, leaf_w))
}
