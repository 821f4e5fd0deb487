//! A toolkit for monolithic linear process equations (LPEs) with
//! multi-actions.
//!
//! The crate parses LPE specifications, generates their state spaces as
//! explicit labelled transition systems, minimises those modulo strong
//! bisimulation, and cleaves an LPE into two communicating components that
//! recombine, under a synchronisation context, into a system that is strongly
//! bisimilar to the original. State invariants can be used to restrict the
//! components further, which often makes the decomposed state spaces smaller
//! than the monolithic one.
//!
//! The entry points, roughly bottom-up:
//!
//! * [`data`]: sorts, values, expressions, substitution and evaluation;
//! * [`lpe`]: the linear process equation structure and its well-formedness;
//! * [`lts`]: labelled transition systems, minimisation and AUT files;
//! * [`explore`]: state-space generation for a process instance;
//! * [`compose`]: the algebra of communicating processes (comm, allow,
//!   hide, parallel) and on-the-fly exploration of composition expressions;
//! * [`cleave`]: separation tuples, induced components, the recombination
//!   context and the semantic requirements oracle;
//! * [`invariant`]: state invariants and restricted processes;
//! * [`parse`]: the textual specification language;
//! * [`pipeline`]: the explore/cleave/minimise/compose/compare pipeline
//!   used by the command line tool.

pub mod cleave;
pub mod compose;
pub mod data;
pub mod explore;
pub mod invariant;
pub mod lpe;
pub mod lts;
pub mod parse;
pub mod pipeline;

pub use cleave::{
    auto_cleave, build_cleave_context, check_cleave_oracle, context_over_leaves,
    induce_component, render_plan, CleaveError, CleaveOracleReport, CleavePlan, FreshNames,
    SeparationTuple, Side,
};
pub use compose::{
    explore_composition, gamma_apply, hide_apply, strip_data, strip_multi_action_expr, CommRule,
    CompositionExpr, ProcessLeaf,
};
pub use data::{
    enumerate_environments, enumerate_sort, BinOp, EnumSort, Environment, ExprError, Expression,
    Sort, SortValues, Value,
};
pub use explore::{eval_multi_action, explore_lpe, ExploreError, Limits};
pub use invariant::{
    build_invariant_context, check_invariant, restrict_components, restrict_lpe, Invariant,
    InvariantError, InvariantReport,
};
pub use lpe::{
    complement, project, validate_lpe, ActionExpr, Lpe, MultiActionExpr, ProcessInstance,
    ProjectionError, Summand, ValidationReport, Violation,
};
pub use lts::{
    check_bisim, minimise_bisim, read_aut, to_aut_string, write_aut, ActionValue, AutError,
    BisimResult, Lts, MultiActionValue, Transition,
};
pub use parse::{parse_expression, parse_partition, parse_spec, SpecError, SpecFile};
pub use pipeline::{
    render_metrics_kv, render_metrics_text, run_pipeline, MetricsRow, PipelineError,
    PipelineOptions, PipelineOutcome,
};
