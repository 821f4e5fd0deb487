//! Decomposing a monolithic process into two communicating components.
//!
//! A separation tuple assigns a component a subset of the parameters, the
//! summands it covers, and, for summands that need the other component,
//! a local condition, a local action part and a synchronisation payload.
//! The induced component executes covered summands either independently
//! (extended with a `tag` action) or jointly with the other component
//! through a fresh `sync` action carrying the payload both sides must agree
//! on. The recombination context forces those synchronisations, hides their
//! trace, and allows exactly the multi-actions of the original process.
//!
//! [`auto_cleave`] derives the two tuples from a parameter partition by a
//! free-variable analysis; [`check_cleave_oracle`] verifies the four
//! requirements under which the recombined components are strongly
//! bisimilar to the original process, enumerating the (bounded) data
//! domains for the two semantic requirements.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::compose::{strip_multi_action_expr, CommRule, CompositionExpr, ProcessLeaf};
use crate::data::{
    enumerate_environments, Environment, ExprError, Expression, Sort, Value,
};
use crate::explore::eval_multi_action;
use crate::lpe::{complement, project, ActionExpr, Lpe, MultiActionExpr, ProcessInstance, Summand};
use crate::lts::MultiActionValue;

/// Which of the two components a tuple describes; only affects naming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    V,
    W,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::V => write!(f, "V"),
            Side::W => write!(f, "W"),
        }
    }
}

/// The fresh action labels used by the decomposition: `sync{i}_V`,
/// `sync{i}_W` and `sync{i}` per summand, plus `tag`. If any of those
/// collide with a declared action the whole family gets underscores
/// appended until fresh.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    suffix: String,
}

impl FreshNames {
    pub fn for_lpe(lpe: &Lpe) -> Self {
        let mut names = FreshNames::default();
        while !names.fresh_for(lpe) {
            names.suffix.push('_');
        }
        names
    }

    fn fresh_for(&self, lpe: &Lpe) -> bool {
        if lpe.actions.contains_key(&self.tag()) {
            return false;
        }
        (0..lpe.summands.len()).all(|i| {
            !lpe.actions.contains_key(&self.sync(i, Side::V))
                && !lpe.actions.contains_key(&self.sync(i, Side::W))
                && !lpe.actions.contains_key(&self.sync_joint(i))
        })
    }

    pub fn sync(&self, summand: usize, side: Side) -> String {
        format!("sync{summand}_{side}{}", self.suffix)
    }

    pub fn sync_joint(&self, summand: usize) -> String {
        format!("sync{summand}{}", self.suffix)
    }

    pub fn tag(&self) -> String {
        format!("tag{}", self.suffix)
    }
}

/// One side of a decomposition: owned parameter indices `params`,
/// independent summands `independent` (K), covered summands `covered` (J),
/// and, for each covered dependent summand, its local condition, local
/// action and synchronisation payload.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationTuple {
    pub params: BTreeSet<usize>,
    pub independent: BTreeSet<usize>,
    pub covered: BTreeSet<usize>,
    pub conditions: BTreeMap<usize, Expression>,
    pub actions: BTreeMap<usize, MultiActionExpr>,
    pub sync_payload: BTreeMap<usize, Vec<Expression>>,
}

impl SeparationTuple {
    /// Covered summands that synchronise with the other component.
    pub fn dependent(&self) -> BTreeSet<usize> {
        self.covered
            .difference(&self.independent)
            .copied()
            .collect()
    }

    // Structural checks: K ⊆ J ⊆ I, indices in range, and the per-summand
    // maps defined exactly on the dependent summands.
    fn validate(&self, lpe: &Lpe) -> Result<(), CleaveError> {
        let num_summands = lpe.summands.len();
        let bad = |message: String| Err(CleaveError::InvalidTuple { message });
        if let Some(&i) = self.params.iter().find(|&&i| i >= lpe.params.len()) {
            return bad(format!("parameter index {i} out of range"));
        }
        if let Some(&i) = self.covered.iter().find(|&&i| i >= num_summands) {
            return bad(format!("summand index {i} out of range"));
        }
        if !self.independent.is_subset(&self.covered) {
            return bad("independent summands must be covered".into());
        }
        for i in self.dependent() {
            if !self.conditions.contains_key(&i)
                || !self.actions.contains_key(&i)
                || !self.sync_payload.contains_key(&i)
            {
                return bad(format!(
                    "dependent summand {i} needs a condition, action and payload"
                ));
            }
        }
        Ok(())
    }
}

/// A full decomposition plan: the two separation tuples and the fresh-name
/// table.
#[derive(Debug, Clone)]
pub struct CleavePlan {
    pub tuple_v: SeparationTuple,
    pub tuple_w: SeparationTuple,
    pub names: FreshNames,
}

#[derive(Debug, Error)]
pub enum CleaveError {
    #[error("invalid separation tuple: {message}")]
    InvalidTuple { message: String },

    #[error("fresh action label '{label}' collides with a declared action")]
    FreshNameCollision { label: String },

    #[error("invalid parameter partition: {message}")]
    PartitionInvalid { message: String },

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("{0}")]
    Instance(String),
}

/// Builds the component an LPE induces for one separation tuple.
///
/// Covered summands keep their original position order. An independent
/// summand keeps its condition and action (extended with `tag` unless
/// `use_tag` is off) and projects its updates. A dependent summand
/// additionally binds the foreign parameters as extra sum variables, takes
/// the tuple's condition and action, and extends the action with the
/// side's `sync` carrying the payload.
pub fn induce_component(
    lpe: &Lpe,
    tuple: &SeparationTuple,
    side: Side,
    names: &FreshNames,
    use_tag: bool,
) -> Result<Lpe, CleaveError> {
    tuple.validate(lpe)?;

    let own_params = project(&lpe.params, &tuple.params)
        .map_err(|e| CleaveError::InvalidTuple { message: e.to_string() })?;
    let foreign = complement(&tuple.params, lpe.params.len());
    let foreign_params = project(&lpe.params, &foreign).expect("complement is in range");

    let mut actions = lpe.actions.clone();
    let mut fresh = |label: String, signature: Vec<Sort>| -> Result<String, CleaveError> {
        if lpe.actions.contains_key(&label) {
            return Err(CleaveError::FreshNameCollision { label });
        }
        actions.insert(label.clone(), signature);
        Ok(label)
    };

    let mut summands = Vec::new();
    for i in 0..lpe.summands.len() {
        if !tuple.covered.contains(&i) {
            continue;
        }
        let original = &lpe.summands[i];
        let updates = project(&original.updates, &tuple.params)
            .map_err(|e| CleaveError::InvalidTuple { message: e.to_string() })?;

        if tuple.independent.contains(&i) {
            let action = if use_tag {
                let tag = fresh(names.tag(), Vec::new())?;
                original.action.extended(ActionExpr::plain(tag))
            } else {
                original.action.clone()
            };
            summands.push(Summand {
                sum_vars: original.sum_vars.clone(),
                condition: original.condition.clone(),
                action,
                updates,
            });
        } else {
            let payload = &tuple.sync_payload[&i];
            let signature = payload
                .iter()
                .map(|e| e.sort_of())
                .collect::<Result<Vec<_>, _>>()?;
            let sync = fresh(names.sync(i, side), signature)?;
            let mut sum_vars = original.sum_vars.clone();
            sum_vars.extend(foreign_params.iter().cloned());
            summands.push(Summand {
                sum_vars,
                condition: tuple.conditions[&i].clone(),
                action: tuple.actions[&i].extended(ActionExpr::new(sync, payload.clone())),
                updates,
            });
        }
    }

    Ok(Lpe {
        name: format!("{}_{}", lpe.name, side),
        params: own_params,
        actions,
        summands,
    })
}

/// The context around two component leaves: communication fuses the
/// per-summand sync pair into a joint sync, which is hidden; the allow set
/// admits the original multi-actions plus, for independent summands, their
/// tagged variants; finally the tag itself is hidden.
///
/// Taking the leaves explicitly supports both modes of recombination:
/// process instances for a direct product, or pre-explored (minimised)
/// component state spaces for compositional minimisation.
pub fn context_over_leaves(
    lpe: &Lpe,
    plan: &CleavePlan,
    use_tag: bool,
    leaf_v: ProcessLeaf,
    leaf_w: ProcessLeaf,
) -> CompositionExpr {
    let summand_count = lpe.summands.len();
    let names = &plan.names;

    let rules: Vec<CommRule> = (0..summand_count)
        .map(|i| {
            CommRule::new(
                [names.sync(i, Side::V), names.sync(i, Side::W)],
                names.sync_joint(i),
            )
        })
        .collect();
    let sync_hide: BTreeSet<String> = (0..summand_count).map(|i| names.sync_joint(i)).collect();

    let mut allowed: BTreeSet<Vec<String>> = lpe
        .summands
        .iter()
        .map(|s| strip_multi_action_expr(&s.action))
        .collect();
    if use_tag {
        let tagged: BTreeSet<usize> = plan
            .tuple_v
            .independent
            .union(&plan.tuple_w.independent)
            .copied()
            .collect();
        for &i in &tagged {
            let mut labels = strip_multi_action_expr(&lpe.summands[i].action);
            labels.push(names.tag());
            labels.sort();
            allowed.insert(labels);
        }
    }

    let mut expr = CompositionExpr::par(
        CompositionExpr::Leaf(leaf_v),
        CompositionExpr::Leaf(leaf_w),
    );
    expr = CompositionExpr::comm(rules, expr);
    if !sync_hide.is_empty() {
        expr = CompositionExpr::Hide(sync_hide, Box::new(expr));
    }
    expr = CompositionExpr::allow(allowed, expr);
    if use_tag {
        expr = CompositionExpr::hide([names.tag()], expr);
    }
    expr
}

/// Builds the full recombination expression for a plan: induced components
/// instantiated with the projected initial values, wrapped in the
/// communication/hide/allow context.
pub fn build_cleave_context(
    lpe: &Lpe,
    plan: &CleavePlan,
    init: &[Value],
    use_tag: bool,
) -> Result<CompositionExpr, CleaveError> {
    let lpe_v = induce_component(lpe, &plan.tuple_v, Side::V, &plan.names, use_tag)?;
    let lpe_w = induce_component(lpe, &plan.tuple_w, Side::W, &plan.names, use_tag)?;
    let init_v = project(init, &plan.tuple_v.params)
        .map_err(|e| CleaveError::InvalidTuple { message: e.to_string() })?;
    let init_w = project(init, &plan.tuple_w.params)
        .map_err(|e| CleaveError::InvalidTuple { message: e.to_string() })?;
    let leaf_v = ProcessLeaf::Instance(
        ProcessInstance::new(Arc::new(lpe_v), init_v)
            .map_err(|e| CleaveError::Instance(e.to_string()))?,
    );
    let leaf_w = ProcessLeaf::Instance(
        ProcessInstance::new(Arc::new(lpe_w), init_w)
            .map_err(|e| CleaveError::Instance(e.to_string()))?,
    );
    Ok(context_over_leaves(lpe, plan, use_tag, leaf_v, leaf_w))
}

// Splits a condition into its top-level conjuncts.
fn split_conjuncts(expr: &Expression) -> Vec<Expression> {
    match expr {
        Expression::Binary(crate::data::BinOp::And, l, r) => {
            let mut out = split_conjuncts(l);
            out.extend(split_conjuncts(r));
            out
        }
        other => vec![other.clone()],
    }
}

fn conjoin(conjuncts: Vec<Expression>) -> Expression {
    let mut iter = conjuncts.into_iter();
    match iter.next() {
        None => Expression::boolean(true),
        Some(first) => iter.fold(first, |acc, c| acc.and(c)),
    }
}

fn names_of(params: &[(String, Sort)], indices: &BTreeSet<usize>) -> BTreeSet<String> {
    indices.iter().map(|&i| params[i].0.clone()).collect()
}

/// Derives a decomposition plan from a parameter partition by static
/// analysis.
///
/// A summand is independent for a side when its condition, action arguments
/// and own updates only mention that side's parameters (plus its sum
/// variables) and it leaves the other side's parameters untouched; ties go
/// to the first component. Each remaining summand is split: condition
/// conjuncts and action factors whose free variables fall entirely on one
/// side go there (mixed conjuncts and mixed-argument factors go to the
/// first component; data-less factors follow the side that uses their label
/// independently, or the side that contributed no condition). Every
/// variable a side still needs from the other side becomes part of the
/// synchronisation payload, ordered by parameter position, followed by the
/// sum variables both sides use.
pub fn auto_cleave(
    lpe: &Lpe,
    v_names: &[String],
    w_names: &[String],
) -> Result<CleavePlan, CleaveError> {
    let invalid = |message: String| CleaveError::PartitionInvalid { message };

    let mut v_params = BTreeSet::new();
    let mut w_params = BTreeSet::new();
    for (names, set) in [(v_names, &mut v_params), (w_names, &mut w_params)] {
        for name in names {
            let index = lpe
                .param_index(name)
                .ok_or_else(|| invalid(format!("unknown parameter '{name}'")))?;
            if !set.insert(index) {
                return Err(invalid(format!("parameter '{name}' listed twice")));
            }
        }
    }
    if let Some(&shared) = v_params.intersection(&w_params).next() {
        return Err(invalid(format!(
            "parameter '{}' is assigned to both components",
            lpe.params[shared].0
        )));
    }
    if v_params.len() + w_params.len() != lpe.params.len() {
        let missing: Vec<&str> = (0..lpe.params.len())
            .filter(|i| !v_params.contains(i) && !w_params.contains(i))
            .map(|i| lpe.params[i].0.as_str())
            .collect();
        return Err(invalid(format!(
            "parameters not assigned to a component: {}",
            missing.join(", ")
        )));
    }

    let names = FreshNames::for_lpe(lpe);
    let v_param_names = names_of(&lpe.params, &v_params);
    let w_param_names = names_of(&lpe.params, &w_params);
    let all_indices = lpe.summand_indices();

    let scope = |own: &BTreeSet<String>, summand: &Summand| -> BTreeSet<String> {
        let mut out = own.clone();
        out.extend(summand.sum_vars.iter().map(|(n, _)| n.clone()));
        out
    };
    let update_fv = |summand: &Summand, params: &BTreeSet<usize>| -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for &k in params {
            out.extend(summand.updates[k].free_vars());
        }
        out
    };
    // A summand is independent for a side when everything it does is local
    // to that side and it keeps the other side's parameters unchanged.
    let qualifies = |summand: &Summand,
                     own_params: &BTreeSet<usize>,
                     own_names: &BTreeSet<String>,
                     other_params: &BTreeSet<usize>|
     -> bool {
        let local = scope(own_names, summand);
        let mut used = summand.condition.free_vars();
        used.extend(summand.action.free_vars());
        used.extend(update_fv(summand, own_params));
        if !used.is_subset(&local) {
            return false;
        }
        other_params.iter().all(|&k| {
            summand.updates[k] == Expression::Var(lpe.params[k].0.clone(), lpe.params[k].1.clone())
        })
    };

    let mut independent_v = BTreeSet::new();
    let mut independent_w = BTreeSet::new();
    for (i, summand) in lpe.summands.iter().enumerate() {
        if qualifies(summand, &v_params, &v_param_names, &w_params) {
            independent_v.insert(i);
        } else if qualifies(summand, &w_params, &w_param_names, &v_params) {
            independent_w.insert(i);
        }
    }

    let covered_v: BTreeSet<usize> = all_indices.difference(&independent_w).copied().collect();
    let covered_w: BTreeSet<usize> = all_indices.difference(&independent_v).copied().collect();

    let mut conditions_v = BTreeMap::new();
    let mut conditions_w = BTreeMap::new();
    let mut actions_v = BTreeMap::new();
    let mut actions_w = BTreeMap::new();
    let mut payload_v = BTreeMap::new();
    let mut payload_w = BTreeMap::new();

    let occurs_independently = |label: &str, independent: &BTreeSet<usize>| {
        independent
            .iter()
            .any(|&j| lpe.summands[j].action.factors.iter().any(|f| f.label == label))
    };

    for (i, summand) in lpe.summands.iter().enumerate() {
        if independent_v.contains(&i) || independent_w.contains(&i) {
            continue;
        }
        let scope_v = scope(&v_param_names, summand);
        let scope_w = scope(&w_param_names, summand);

        let mut conjuncts_v = Vec::new();
        let mut conjuncts_w = Vec::new();
        for conjunct in split_conjuncts(&summand.condition) {
            let fv = conjunct.free_vars();
            if fv.is_subset(&scope_v) {
                conjuncts_v.push(conjunct);
            } else if fv.is_subset(&scope_w) {
                conjuncts_w.push(conjunct);
            } else {
                // Mixed conjunct; the first component keeps it and receives
                // the missing variables through the payload.
                conjuncts_v.push(conjunct);
            }
        }
        let w_unguarded = conjuncts_w.is_empty();

        let mut factors_v = Vec::new();
        let mut factors_w = Vec::new();
        for factor in &summand.action.factors {
            let mut fv = BTreeSet::new();
            for arg in &factor.args {
                fv.extend(arg.free_vars());
            }
            if !fv.is_empty() && fv.is_subset(&scope_v) {
                factors_v.push(factor.clone());
            } else if !fv.is_empty() && fv.is_subset(&scope_w) {
                factors_w.push(factor.clone());
            } else if !fv.is_empty() {
                factors_v.push(factor.clone());
            } else {
                // No data to decide by: follow the side that already uses
                // this label independently, otherwise give it to the side
                // that contributed no condition.
                let in_v = occurs_independently(&factor.label, &independent_v);
                let in_w = occurs_independently(&factor.label, &independent_w);
                if in_v && !in_w {
                    factors_v.push(factor.clone());
                } else if (in_w && !in_v) || w_unguarded {
                    factors_w.push(factor.clone());
                } else {
                    factors_v.push(factor.clone());
                }
            }
        }

        let condition_v = conjoin(conjuncts_v);
        let condition_w = conjoin(conjuncts_w);
        let action_v = MultiActionExpr::from_factors(factors_v);
        let action_w = MultiActionExpr::from_factors(factors_w);

        let side_fv = |condition: &Expression,
                       action: &MultiActionExpr,
                       own: &BTreeSet<usize>|
         -> BTreeSet<String> {
            let mut out = condition.free_vars();
            out.extend(action.free_vars());
            out.extend(update_fv(summand, own));
            out
        };
        let fv_v = side_fv(&condition_v, &action_v, &v_params);
        let fv_w = side_fv(&condition_w, &action_w, &w_params);

        // Parameters a side borrows from the other side, in parameter
        // order, then the sum variables both sides mention. Both tuples
        // carry the same payload so agreement is by construction.
        let mut payload = Vec::new();
        for (k, (name, sort)) in lpe.params.iter().enumerate() {
            let foreign_to_v = w_params.contains(&k) && fv_v.contains(name);
            let foreign_to_w = v_params.contains(&k) && fv_w.contains(name);
            if foreign_to_v || foreign_to_w {
                payload.push(Expression::var(name.clone(), sort.clone()));
            }
        }
        for (name, sort) in &summand.sum_vars {
            if fv_v.contains(name) && fv_w.contains(name) {
                payload.push(Expression::var(name.clone(), sort.clone()));
            }
        }

        conditions_v.insert(i, condition_v);
        conditions_w.insert(i, condition_w);
        actions_v.insert(i, action_v);
        actions_w.insert(i, action_w);
        payload_v.insert(i, payload.clone());
        payload_w.insert(i, payload);
    }

    Ok(CleavePlan {
        tuple_v: SeparationTuple {
            params: v_params,
            independent: independent_v,
            covered: covered_v,
            conditions: conditions_v,
            actions: actions_v,
            sync_payload: payload_v,
        },
        tuple_w: SeparationTuple {
            params: w_params,
            independent: independent_w,
            covered: covered_w,
            conditions: conditions_w,
            actions: actions_w,
            sync_payload: payload_w,
        },
        names,
    })
}

/// An offending assignment found by the oracle, rendered as variable/value
/// pairs in declaration order.
pub type Assignment = Vec<(String, Value)>;

#[derive(Debug, Clone)]
pub struct R3Violation {
    pub summand: usize,
    pub env: Assignment,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct R4Violation {
    pub summand: usize,
    pub env_v: Assignment,
    pub env_w: Assignment,
}

/// The oracle's verdict on the four decomposition requirements.
#[derive(Debug, Clone)]
pub struct CleaveOracleReport {
    /// Each component covers every summand the other does not own
    /// independently.
    pub r1: bool,
    /// Independent summands leave the other component's parameters
    /// unchanged, syntactically.
    pub r2: bool,
    /// Whenever the original condition holds, both local conditions hold,
    /// the payloads agree and the local actions compose to the original.
    pub r3_violations: Vec<R3Violation>,
    /// Whenever both components can jointly fire a summand, the original
    /// process can match it.
    pub r4_violations: Vec<R4Violation>,
    /// Enumeration crossed a `Nat` bound somewhere; the verdict is sound
    /// only up to that bound.
    pub truncated: bool,
}

impl CleaveOracleReport {
    pub fn passed(&self) -> bool {
        self.r1 && self.r2 && self.r3_violations.is_empty() && self.r4_violations.is_empty()
    }
}

impl fmt::Display for CleaveOracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "R1 (coverage):        {}", if self.r1 { "pass" } else { "FAIL" })?;
        writeln!(f, "R2 (foreign updates): {}", if self.r2 { "pass" } else { "FAIL" })?;
        writeln!(
            f,
            "R3 (joint enabling):  {}",
            if self.r3_violations.is_empty() {
                "pass".to_string()
            } else {
                format!("FAIL ({} violations)", self.r3_violations.len())
            }
        )?;
        writeln!(
            f,
            "R4 (joint soundness): {}",
            if self.r4_violations.is_empty() {
                "pass".to_string()
            } else {
                format!("FAIL ({} violations)", self.r4_violations.len())
            }
        )?;
        if self.truncated {
            writeln!(f, "note: Nat domains truncated; verdict sound up to the bound")?;
        }
        Ok(())
    }
}

fn assignment_of(vars: &[(String, Sort)], env: &Environment) -> Assignment {
    vars.iter()
        .map(|(name, _)| (name.clone(), env.get(name).expect("enumerated var").clone()))
        .collect()
}

/// Checks the four requirements a pair of separation tuples must satisfy
/// for the recombined components to be strongly bisimilar to the original
/// process. R1 and R2 are syntactic; R3 and R4 enumerate all assignments of
/// the parameters and the summand's sum variables up to `nat_bound`.
pub fn check_cleave_oracle(
    lpe: &Lpe,
    plan: &CleavePlan,
    nat_bound: u64,
) -> Result<CleaveOracleReport, ExprError> {
    let all = lpe.summand_indices();
    let tuple_v = &plan.tuple_v;
    let tuple_w = &plan.tuple_w;

    let r1 = tuple_v.covered == all.difference(&tuple_w.independent).copied().collect()
        && tuple_w.covered == all.difference(&tuple_v.independent).copied().collect();

    let untouched = |summand: &Summand, other: &BTreeSet<usize>| {
        other.iter().all(|&k| {
            summand.updates[k] == Expression::Var(lpe.params[k].0.clone(), lpe.params[k].1.clone())
        })
    };
    let r2 = tuple_v
        .independent
        .iter()
        .all(|&r| untouched(&lpe.summands[r], &tuple_w.params))
        && tuple_w
            .independent
            .iter()
            .all(|&r| untouched(&lpe.summands[r], &tuple_v.params));

    let joint: Vec<usize> = tuple_v
        .dependent()
        .intersection(&tuple_w.dependent())
        .copied()
        .collect();

    let mut r3_violations = Vec::new();
    let mut r4_violations = Vec::new();
    let mut truncated = false;

    for &r in &joint {
        let summand = &lpe.summands[r];
        let mut vars = lpe.params.clone();
        vars.extend(summand.sum_vars.iter().cloned());
        let (envs, cut) = enumerate_environments(&vars, nat_bound);
        truncated |= cut;

        let condition_v = &tuple_v.conditions[&r];
        let condition_w = &tuple_w.conditions[&r];
        let action_v = &tuple_v.actions[&r];
        let action_w = &tuple_w.actions[&r];
        let payload_v = &tuple_v.sync_payload[&r];
        let payload_w = &tuple_w.sync_payload[&r];

        let eval_payload = |payload: &[Expression], env: &Environment| {
            payload
                .iter()
                .map(|e| e.evaluate(env))
                .collect::<Result<Vec<_>, _>>()
        };

        // R3: the original step implies the joint step with agreeing
        // payloads and the same visible multi-action.
        for env in &envs {
            if !summand.condition.eval_bool(env)? {
                continue;
            }
            let mut reasons = Vec::new();
            if !condition_v.eval_bool(env)? {
                reasons.push("left condition fails");
            }
            if !condition_w.eval_bool(env)? {
                reasons.push("right condition fails");
            }
            if eval_payload(payload_v, env)? != eval_payload(payload_w, env)? {
                reasons.push("payloads disagree");
            }
            let joined = eval_multi_action(&action_v.joined(action_w), env)?;
            if joined != eval_multi_action(&summand.action, env)? {
                reasons.push("actions do not compose to the original");
            }
            if !reasons.is_empty() {
                r3_violations.push(R3Violation {
                    summand: r,
                    env: assignment_of(&vars, env),
                    reason: reasons.join(", "),
                });
            }
        }

        // R4: every joint step with agreeing payloads must be matched by
        // the original summand under some assignment that coincides with
        // the left component on its parameters and with the right component
        // on the others. Assignments are deduplicated by everything the
        // requirement can observe about them: own parameter values, payload
        // value, action value and own update values.
        type Observation = (Vec<Value>, Vec<Value>, MultiActionValue, Vec<Value>);
        let mut reps_v: HashMap<Observation, Environment> = HashMap::new();
        let mut reps_w: HashMap<Observation, Environment> = HashMap::new();
        let param_values = |indices: &BTreeSet<usize>, env: &Environment| {
            indices
                .iter()
                .map(|&k| env.get(&lpe.params[k].0).expect("param bound").clone())
                .collect::<Vec<_>>()
        };
        let update_values = |indices: &BTreeSet<usize>, env: &Environment| {
            indices
                .iter()
                .map(|&k| summand.updates[k].evaluate(env))
                .collect::<Result<Vec<_>, _>>()
        };
        for env in &envs {
            if condition_v.eval_bool(env)? {
                let key = (
                    param_values(&tuple_v.params, env),
                    eval_payload(payload_v, env)?,
                    eval_multi_action(action_v, env)?,
                    update_values(&tuple_v.params, env)?,
                );
                reps_v.entry(key).or_insert_with(|| env.clone());
            }
            if condition_w.eval_bool(env)? {
                let key = (
                    param_values(&tuple_w.params, env),
                    eval_payload(payload_w, env)?,
                    eval_multi_action(action_w, env)?,
                    update_values(&tuple_w.params, env)?,
                );
                reps_w.entry(key).or_insert_with(|| env.clone());
            }
        }

        let (sum_envs, cut) = enumerate_environments(&summand.sum_vars, nat_bound);
        truncated |= cut;

        for ((v_params_vals, v_payload, v_action, v_updates), env_v) in &reps_v {
            for ((w_params_vals, w_payload, w_action, w_updates), env_w) in &reps_w {
                if v_payload != w_payload {
                    continue;
                }
                let joint_action = v_action.sum(w_action);

                let mut matched = false;
                for sums in &sum_envs {
                    let mut rho = Environment::new();
                    for (&k, value) in tuple_v.params.iter().zip(v_params_vals) {
                        rho.bind(lpe.params[k].0.clone(), value.clone());
                    }
                    for (&k, value) in tuple_w.params.iter().zip(w_params_vals) {
                        rho.bind(lpe.params[k].0.clone(), value.clone());
                    }
                    for (name, _) in &summand.sum_vars {
                        rho.bind(name.clone(), sums.get(name).expect("sum bound").clone());
                    }
                    if !summand.condition.eval_bool(&rho)? {
                        continue;
                    }
                    if eval_multi_action(&summand.action, &rho)? != joint_action {
                        continue;
                    }
                    if update_values(&tuple_v.params, &rho)? != *v_updates {
                        continue;
                    }
                    if update_values(&tuple_w.params, &rho)? != *w_updates {
                        continue;
                    }
                    matched = true;
                    break;
                }
                if !matched {
                    r4_violations.push(R4Violation {
                        summand: r,
                        env_v: assignment_of(&vars, env_v),
                        env_w: assignment_of(&vars, env_w),
                    });
                }
            }
        }
    }

    Ok(CleaveOracleReport {
        r1,
        r2,
        r3_violations,
        r4_violations,
        truncated,
    })
}


/// A human-readable dump of a plan, for audit: both tuples with their
/// summand sets and per-summand condition, action and payload.
pub fn render_plan(lpe: &Lpe, plan: &CleavePlan) -> String {
    let mut out = String::new();
    let set = |s: &BTreeSet<usize>| {
        let items: Vec<String> = s.iter().map(|i| i.to_string()).collect();
        format!("{{{}}}", items.join(", "))
    };
    for (side, tuple) in [(Side::V, &plan.tuple_v), (Side::W, &plan.tuple_w)] {
        let params: Vec<&str> = tuple
            .params
            .iter()
            .map(|&i| lpe.params[i].0.as_str())
            .collect();
        out.push_str(&format!(
            "component {side}: parameters [{}]\n",
            params.join(", ")
        ));
        out.push_str(&format!("  independent K = {}\n", set(&tuple.independent)));
        out.push_str(&format!("  covered     J = {}\n", set(&tuple.covered)));
        for i in tuple.dependent() {
            let payload: Vec<String> = tuple.sync_payload[&i]
                .iter()
                .map(|e| e.to_string())
                .collect();
            out.push_str(&format!(
                "  summand {i}: condition {} | action {} | payload <{}>\n",
                tuple.conditions[&i], tuple.actions[&i], payload.join(", ")
            ));
        }
    }
    out.push_str(&format!(
        "fresh labels: sync<i>_V / sync<i>_W / sync<i>, tag = {}\n",
        plan.names.tag()
    ));
    out
}
