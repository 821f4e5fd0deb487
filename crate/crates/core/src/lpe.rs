//! The monolithic process model: linear process equations, their
//! well-formedness, and parameter-vector projection.
//!
//! An LPE is a single recursive equation over a parameter vector, given as a
//! list of summands `sum vars . condition -> multi-action . P(updates)`. The
//! semantics live in [`crate::explore`]; this module owns the structure and
//! the static checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::data::{Expression, Sort, Value};

/// One data-parameterised action occurrence, `label(args...)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionExpr {
    pub label: String,
    pub args: Vec<Expression>,
}

impl ActionExpr {
    pub fn new(label: impl Into<String>, args: Vec<Expression>) -> Self {
        ActionExpr {
            label: label.into(),
            args,
        }
    }

    pub fn plain(label: impl Into<String>) -> Self {
        Self::new(label, Vec::new())
    }
}

impl fmt::Display for ActionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A syntactic multi-action: a list of action occurrences that happen
/// simultaneously. The empty list is the internal step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiActionExpr {
    pub factors: Vec<ActionExpr>,
}

impl MultiActionExpr {
    /// The empty multi-action (the internal step, written `tau`).
    pub fn silent() -> Self {
        Self::default()
    }

    pub fn single(factor: ActionExpr) -> Self {
        MultiActionExpr {
            factors: vec![factor],
        }
    }

    pub fn from_factors(factors: Vec<ActionExpr>) -> Self {
        MultiActionExpr { factors }
    }

    pub fn is_silent(&self) -> bool {
        self.factors.is_empty()
    }

    /// A copy with `factor` appended.
    pub fn extended(&self, factor: ActionExpr) -> Self {
        let mut factors = self.factors.clone();
        factors.push(factor);
        MultiActionExpr { factors }
    }

    /// Concatenation of the two factor lists.
    pub fn joined(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        MultiActionExpr { factors }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for factor in &self.factors {
            for arg in &factor.args {
                out.extend(arg.free_vars());
            }
        }
        out
    }
}

impl fmt::Display for MultiActionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "tau");
        }
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

/// One condition-action-effect alternative of an LPE.
///
/// `updates` is positional: entry `k` is the next value of parameter `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Summand {
    pub sum_vars: Vec<(String, Sort)>,
    pub condition: Expression,
    pub action: MultiActionExpr,
    pub updates: Vec<Expression>,
}

/// A linear process equation: named parameters and an ordered list of
/// summands, together with the declared action signatures.
#[derive(Debug, Clone)]
pub struct Lpe {
    pub name: String,
    pub params: Vec<(String, Sort)>,
    /// Declared action labels and their argument sorts.
    pub actions: BTreeMap<String, Vec<Sort>>,
    pub summands: Vec<Summand>,
}

impl Lpe {
    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|(n, _)| n == name)
    }

    /// All summand indices.
    pub fn summand_indices(&self) -> BTreeSet<usize> {
        (0..self.summands.len()).collect()
    }
}

/// An LPE together with initial parameter values.
#[derive(Debug, Clone)]
pub struct ProcessInstance {
    pub lpe: Arc<Lpe>,
    pub init: Vec<Value>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("process '{name}' expects {expected} initial values, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("initial value for parameter '{param}' has sort {found}, expected {expected}")]
    Sort {
        param: String,
        expected: String,
        found: String,
    },
}

impl ProcessInstance {
    pub fn new(lpe: Arc<Lpe>, init: Vec<Value>) -> Result<Self, InstanceError> {
        if init.len() != lpe.params.len() {
            return Err(InstanceError::Arity {
                name: lpe.name.clone(),
                expected: lpe.params.len(),
                found: init.len(),
            });
        }
        for ((name, sort), value) in lpe.params.iter().zip(&init) {
            if value.sort() != *sort {
                return Err(InstanceError::Sort {
                    param: name.clone(),
                    expected: sort.to_string(),
                    found: value.sort().to_string(),
                });
            }
        }
        Ok(ProcessInstance { lpe, init })
    }
}

/// One well-formedness violation found by [`validate_lpe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateParameter {
        name: String,
    },
    /// A free variable of a condition, action argument or update that is
    /// neither a parameter nor a sum variable of its summand, or that is
    /// used at the wrong sort.
    UndeclaredVariable {
        summand: usize,
        variable: String,
    },
    VariableSort {
        summand: usize,
        variable: String,
        expected: String,
        found: String,
    },
    SumShadowsParameter {
        summand: usize,
        name: String,
    },
    DuplicateSumVariable {
        summand: usize,
        name: String,
    },
    ConditionNotBool {
        summand: usize,
        found: String,
    },
    UpdateArity {
        summand: usize,
        expected: usize,
        found: usize,
    },
    UpdateSort {
        summand: usize,
        param: String,
        expected: String,
        found: String,
    },
    UnknownAction {
        summand: usize,
        label: String,
    },
    ActionArity {
        summand: usize,
        label: String,
        expected: usize,
        found: usize,
    },
    ActionArgSort {
        summand: usize,
        label: String,
        arg: usize,
        expected: String,
        found: String,
    },
    IllSorted {
        summand: usize,
        message: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateParameter { name } => {
                write!(f, "parameter '{name}' declared twice")
            }
            Violation::UndeclaredVariable { summand, variable } => {
                write!(f, "summand {summand}: variable '{variable}' is not declared")
            }
            Violation::VariableSort {
                summand,
                variable,
                expected,
                found,
            } => write!(
                f,
                "summand {summand}: variable '{variable}' has sort {expected} but is used at {found}"
            ),
            Violation::SumShadowsParameter { summand, name } => {
                write!(f, "summand {summand}: sum variable '{name}' shadows a parameter")
            }
            Violation::DuplicateSumVariable { summand, name } => {
                write!(f, "summand {summand}: sum variable '{name}' declared twice")
            }
            Violation::ConditionNotBool { summand, found } => {
                write!(f, "summand {summand}: condition has sort {found}, expected Bool")
            }
            Violation::UpdateArity {
                summand,
                expected,
                found,
            } => write!(
                f,
                "summand {summand}: {found} update expressions for {expected} parameters"
            ),
            Violation::UpdateSort {
                summand,
                param,
                expected,
                found,
            } => write!(
                f,
                "summand {summand}: update for '{param}' has sort {found}, expected {expected}"
            ),
            Violation::UnknownAction { summand, label } => {
                write!(f, "summand {summand}: action '{label}' is not declared")
            }
            Violation::ActionArity {
                summand,
                label,
                expected,
                found,
            } => write!(
                f,
                "summand {summand}: action '{label}' takes {expected} arguments, found {found}"
            ),
            Violation::ActionArgSort {
                summand,
                label,
                arg,
                expected,
                found,
            } => write!(
                f,
                "summand {summand}: argument {arg} of '{label}' has sort {found}, expected {expected}"
            ),
            Violation::IllSorted { summand, message } => {
                write!(f, "summand {summand}: {message}")
            }
        }
    }
}

/// The outcome of [`validate_lpe`]; empty means well-formed.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

// Checks every expression variable against the summand scope: it must be a
// parameter or sum variable and be used at its declared sort.
fn check_vars(
    expr: &Expression,
    scope: &BTreeMap<&str, &Sort>,
    summand: usize,
    out: &mut Vec<Violation>,
) {
    for (name, sorts) in expr.typed_vars() {
        match scope.get(name.as_str()) {
            None => out.push(Violation::UndeclaredVariable {
                summand,
                variable: name.clone(),
            }),
            Some(declared) => {
                for used in sorts {
                    if used != **declared {
                        out.push(Violation::VariableSort {
                            summand,
                            variable: name.clone(),
                            expected: declared.to_string(),
                            found: used.to_string(),
                        });
                    }
                }
            }
        }
    }
}

/// Checks the structural invariants of an LPE and reports every violation:
/// free variables of each summand confined to parameters plus that summand's
/// sum variables, one well-sorted update per parameter, action arguments
/// matching the declared signatures, and a boolean condition.
pub fn validate_lpe(lpe: &Lpe) -> ValidationReport {
    let mut violations = Vec::new();

    for (i, (name, _)) in lpe.params.iter().enumerate() {
        if lpe.params[..i].iter().any(|(n, _)| n == name) {
            violations.push(Violation::DuplicateParameter { name: name.clone() });
        }
    }

    for (i, summand) in lpe.summands.iter().enumerate() {
        let mut scope: BTreeMap<&str, &Sort> =
            lpe.params.iter().map(|(n, s)| (n.as_str(), s)).collect();
        for (j, (name, sort)) in summand.sum_vars.iter().enumerate() {
            if lpe.params.iter().any(|(n, _)| n == name) {
                violations.push(Violation::SumShadowsParameter {
                    summand: i,
                    name: name.clone(),
                });
            }
            if summand.sum_vars[..j].iter().any(|(n, _)| n == name) {
                violations.push(Violation::DuplicateSumVariable {
                    summand: i,
                    name: name.clone(),
                });
            }
            scope.insert(name.as_str(), sort);
        }

        check_vars(&summand.condition, &scope, i, &mut violations);
        match summand.condition.sort_of() {
            Ok(Sort::Bool) => {}
            Ok(other) => violations.push(Violation::ConditionNotBool {
                summand: i,
                found: other.to_string(),
            }),
            Err(e) => violations.push(Violation::IllSorted {
                summand: i,
                message: e.to_string(),
            }),
        }

        for factor in &summand.action.factors {
            match lpe.actions.get(&factor.label) {
                None => violations.push(Violation::UnknownAction {
                    summand: i,
                    label: factor.label.clone(),
                }),
                Some(signature) => {
                    if signature.len() != factor.args.len() {
                        violations.push(Violation::ActionArity {
                            summand: i,
                            label: factor.label.clone(),
                            expected: signature.len(),
                            found: factor.args.len(),
                        });
                    } else {
                        for (k, (arg, expected)) in
                            factor.args.iter().zip(signature).enumerate()
                        {
                            check_vars(arg, &scope, i, &mut violations);
                            match arg.sort_of() {
                                Ok(s) if s == *expected => {}
                                Ok(s) => violations.push(Violation::ActionArgSort {
                                    summand: i,
                                    label: factor.label.clone(),
                                    arg: k,
                                    expected: expected.to_string(),
                                    found: s.to_string(),
                                }),
                                Err(e) => violations.push(Violation::IllSorted {
                                    summand: i,
                                    message: e.to_string(),
                                }),
                            }
                        }
                    }
                }
            }
        }

        if summand.updates.len() != lpe.params.len() {
            violations.push(Violation::UpdateArity {
                summand: i,
                expected: lpe.params.len(),
                found: summand.updates.len(),
            });
        } else {
            for ((param, sort), update) in lpe.params.iter().zip(&summand.updates) {
                check_vars(update, &scope, i, &mut violations);
                match update.sort_of() {
                    Ok(s) if s == *sort => {}
                    Ok(s) => violations.push(Violation::UpdateSort {
                        summand: i,
                        param: param.clone(),
                        expected: sort.to_string(),
                        found: s.to_string(),
                    }),
                    Err(e) => violations.push(Violation::IllSorted {
                        summand: i,
                        message: e.to_string(),
                    }),
                }
            }
        }
    }

    ValidationReport { violations }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectionError {
    #[error("projection index {index} out of range for a vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Projects a vector onto a set of positions, in ascending index order.
/// `project(v, {})` is empty and projecting onto all indices is the
/// identity.
pub fn project<T: Clone>(
    items: &[T],
    indices: &BTreeSet<usize>,
) -> Result<Vec<T>, ProjectionError> {
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let item = items.get(i).ok_or(ProjectionError::IndexOutOfRange {
            index: i,
            len: items.len(),
        })?;
        out.push(item.clone());
    }
    Ok(out)
}

/// The indices `0..len` not contained in `indices`.
pub fn complement(indices: &BTreeSet<usize>, len: usize) -> BTreeSet<usize> {
    (0..len).filter(|i| !indices.contains(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Expression;

    // The two-mode machine with a countdown: the running example throughout
    // the test suite.
    pub(crate) fn machine() -> Lpe {
        let n = || Expression::var("n", Sort::Nat);
        let s = || Expression::var("s", Sort::Bool);
        Lpe {
            name: "Machine".into(),
            params: vec![("n".into(), Sort::Nat), ("s".into(), Sort::Bool)],
            actions: BTreeMap::from([("count".into(), vec![]), ("toggle".into(), vec![])]),
            summands: vec![
                Summand {
                    sum_vars: vec![],
                    condition: n().greater(Expression::nat(0)),
                    action: MultiActionExpr::single(ActionExpr::plain("count")),
                    updates: vec![n().monus(Expression::nat(1)), s()],
                },
                Summand {
                    sum_vars: vec![],
                    condition: n().equals(Expression::nat(0)),
                    action: MultiActionExpr::single(ActionExpr::plain("toggle")),
                    updates: vec![
                        Expression::ite(s().not(), Expression::nat(3), Expression::nat(1)),
                        s().not(),
                    ],
                },
            ],
        }
    }

    #[test]
    fn machine_is_well_formed() {
        let report = validate_lpe(&machine());
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn undeclared_condition_variable_is_reported() {
        let mut lpe = machine();
        lpe.summands[0].condition =
            Expression::var("t", Sort::Nat).greater(Expression::nat(0));
        let report = validate_lpe(&lpe);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::UndeclaredVariable { summand: 0, variable } if variable == "t"
        )));
    }

    #[test]
    fn short_update_vector_is_an_arity_violation() {
        let mut lpe = machine();
        lpe.summands[1].updates.pop();
        let report = validate_lpe(&lpe);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::UpdateArity {
                summand: 1,
                expected: 2,
                found: 1
            }
        )));
    }

    #[test]
    fn undeclared_action_is_reported() {
        let mut lpe = machine();
        lpe.summands[0].action = MultiActionExpr::single(ActionExpr::plain("beep"));
        let report = validate_lpe(&lpe);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::UnknownAction { label, .. } if label == "beep")));
    }

    #[test]
    fn projection_examples() {
        let v = ["n", "s"];
        assert_eq!(project(&v, &BTreeSet::from([0])).unwrap(), vec!["n"]);
        assert_eq!(project(&v, &BTreeSet::new()).unwrap(), Vec::<&str>::new());
        let w = ["a", "b", "c"];
        assert_eq!(project(&w, &BTreeSet::from([0, 2])).unwrap(), vec!["a", "c"]);
        assert!(project(&w, &BTreeSet::from([3])).is_err());
    }

    #[test]
    fn projection_splits_and_reassembles() {
        let v = [10, 20, 30, 40, 50];
        let idx = BTreeSet::from([1, 3]);
        let co = complement(&idx, v.len());
        let left = project(&v, &idx).unwrap();
        let right = project(&v, &co).unwrap();
        assert_eq!(left.len() + right.len(), v.len());
        let mut rebuilt = vec![0; v.len()];
        for (slot, &i) in idx.iter().enumerate() {
            rebuilt[i] = left[slot];
        }
        for (slot, &i) in co.iter().enumerate() {
            rebuilt[i] = right[slot];
        }
        assert_eq!(rebuilt, v);
    }
}
