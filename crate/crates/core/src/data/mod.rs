//! Sorts, values, data expressions, substitution and evaluation.
//!
//! Every other module builds on these: conditions, action arguments and
//! update expressions of a process are [`Expression`]s, states are vectors of
//! [`Value`]s, and sum variables and the requirements oracle enumerate sort
//! domains through [`enumerate_sort`].

mod expr;
mod sort;

pub use expr::{enumerate_environments, BinOp, Environment, ExprError, Expression};
pub use sort::{enumerate_sort, EnumSort, Sort, SortValues, Value};
