use std::cmp::Ordering;
use std::fmt;

use crate::data::Value;

/// One concrete action occurrence: a label with evaluated data arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionValue {
    pub label: String,
    pub args: Vec<Value>,
}

impl ActionValue {
    pub fn new(label: impl Into<String>, args: Vec<Value>) -> Self {
        ActionValue {
            label: label.into(),
            args,
        }
    }

    pub fn plain(label: impl Into<String>) -> Self {
        Self::new(label, Vec::new())
    }
}

impl fmt::Display for ActionValue {
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

// Canonical factor order: data-less actions first, then by label, then by
// arguments. Keeps rendered labels like `toggle|sync1_W(false)` and
// `count|tag` stable.
fn canonical_cmp(a: &ActionValue, b: &ActionValue) -> Ordering {
    (!a.args.is_empty(), &a.label, &a.args).cmp(&(!b.args.is_empty(), &b.label, &b.args))
}

/// A multiset of concrete action occurrences: the label of a transition.
///
/// Stored canonically sorted with multiplicities as repetition, so that two
/// multi-actions are equal exactly when their multisets are. The empty
/// multi-action is the internal step and renders as `tau`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiActionValue {
    factors: Vec<ActionValue>,
}

impl MultiActionValue {
    pub fn silent() -> Self {
        Self::default()
    }

    pub fn single(factor: ActionValue) -> Self {
        Self::from_factors(vec![factor])
    }

    pub fn from_factors(mut factors: Vec<ActionValue>) -> Self {
        factors.sort_by(canonical_cmp);
        MultiActionValue { factors }
    }

    pub fn factors(&self) -> &[ActionValue] {
        &self.factors
    }

    pub fn is_silent(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Multiset sum, used for synchronous parallel steps.
    pub fn sum(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_factors(factors)
    }

    /// Multiplicity of a factor.
    pub fn count(&self, factor: &ActionValue) -> usize {
        self.factors.iter().filter(|f| *f == factor).count()
    }

    pub fn contains_label(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    /// A copy without the factors whose label satisfies the predicate.
    pub fn retain_labels(&self, keep: impl Fn(&str) -> bool) -> Self {
        MultiActionValue {
            factors: self
                .factors
                .iter()
                .filter(|f| keep(&f.label))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for MultiActionValue {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_ignores_construction_order() {
        let a = MultiActionValue::from_factors(vec![
            ActionValue::plain("a"),
            ActionValue::new("b", vec![Value::Nat(5)]),
        ]);
        let b = MultiActionValue::from_factors(vec![
            ActionValue::new("b", vec![Value::Nat(5)]),
            ActionValue::plain("a"),
        ]);
        assert_eq!(a, b);
    }

    #[test]
    fn rendering_is_canonical() {
        let l = MultiActionValue::from_factors(vec![
            ActionValue::new("sync1_W", vec![Value::Bool(false)]),
            ActionValue::plain("toggle"),
        ]);
        assert_eq!(l.to_string(), "toggle|sync1_W(false)");
        let m = MultiActionValue::from_factors(vec![
            ActionValue::plain("tag"),
            ActionValue::plain("count"),
        ]);
        assert_eq!(m.to_string(), "count|tag");
        assert_eq!(MultiActionValue::silent().to_string(), "tau");
    }

    #[test]
    fn multiplicities_render_as_repetition() {
        let l = MultiActionValue::from_factors(vec![
            ActionValue::plain("a"),
            ActionValue::plain("a"),
        ]);
        assert_eq!(l.to_string(), "a|a");
        assert_eq!(l.count(&ActionValue::plain("a")), 2);
    }

    #[test]
    fn sum_is_a_multiset_union() {
        let a = MultiActionValue::single(ActionValue::plain("a"));
        let ab = a.sum(&MultiActionValue::single(ActionValue::plain("b")));
        assert_eq!(ab.to_string(), "a|b");
        let aa = a.sum(&a);
        assert_eq!(aa.count(&ActionValue::plain("a")), 2);
    }
}
