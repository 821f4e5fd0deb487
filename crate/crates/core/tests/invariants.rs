//! State invariants: checking, restriction, and invariant-strengthened
//! recombination.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{machine_naive_plan, machine_spec};
use lpecleave::{
    auto_cleave, build_invariant_context, check_bisim, check_invariant, explore_composition,
    explore_lpe, induce_component, restrict_components, restrict_lpe, Expression, Invariant,
    InvariantError, Limits, ProcessInstance, Side, Sort, Value,
};

fn n_at_most(bound: u64) -> Expression {
    Expression::var("n", Sort::Nat).less_eq(Expression::nat(bound))
}

#[test]
fn countdown_bound_is_an_invariant() {
    let spec = machine_spec();
    let invariant = Invariant::for_lpe(&spec.process, n_at_most(3)).unwrap();
    let report = check_invariant(&spec.process, &invariant, 16).unwrap();
    assert!(report.holds());
    assert!(report.truncated);
}

#[test]
fn false_is_vacuously_an_invariant() {
    let spec = machine_spec();
    let invariant = Invariant::for_lpe(&spec.process, Expression::boolean(false)).unwrap();
    assert!(check_invariant(&spec.process, &invariant, 8).unwrap().holds());
}

#[test]
fn too_tight_a_bound_is_refuted_with_a_witness() {
    let spec = machine_spec();
    let invariant = Invariant::for_lpe(&spec.process, n_at_most(2)).unwrap();
    let report = check_invariant(&spec.process, &invariant, 16).unwrap();
    assert!(!report.holds());
    // Toggling from (0, false) resets the countdown to 3.
    let first = &report.violations[0];
    assert_eq!(first.summand, 1);
    assert_eq!(
        first.env,
        vec![
            ("n".to_string(), Value::Nat(0)),
            ("s".to_string(), Value::Bool(false)),
        ]
    );
}

#[test]
fn invariants_must_be_boolean_over_parameters() {
    let spec = machine_spec();
    assert!(matches!(
        Invariant::for_lpe(&spec.process, Expression::nat(1)),
        Err(InvariantError::NotBoolean { .. })
    ));
    let stray = Expression::var("z", Sort::Bool);
    assert!(matches!(
        Invariant::for_lpe(&spec.process, stray),
        Err(InvariantError::UnknownParameter { .. })
    ));
}

#[test]
fn restriction_preserves_the_monolithic_behaviour() {
    let spec = machine_spec();
    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    for summands in [BTreeSet::from([0, 1]), BTreeSet::from([0]), BTreeSet::new()] {
        let restricted = restrict_lpe(&spec.process, &n_at_most(3), &summands);
        assert_eq!(restricted.name, "Machine_inv");
        let instance =
            ProcessInstance::new(Arc::new(restricted), spec.init.init.clone()).unwrap();
        let lts = explore_lpe(&instance, Limits::default()).unwrap();
        assert!(check_bisim(&monolithic, &lts).bisimilar);
    }
}

#[test]
fn restricting_nothing_changes_nothing_but_the_name() {
    let spec = machine_spec();
    let restricted = restrict_lpe(&spec.process, &n_at_most(3), &BTreeSet::new());
    assert_eq!(restricted.summands, spec.process.summands);
}

#[test]
fn restriction_caps_the_naive_synchronisation_branching() {
    let spec = machine_spec();
    let plan = machine_naive_plan(&spec.process);
    let component_w =
        induce_component(&spec.process, &plan.tuple_w, Side::W, &plan.names, true).unwrap();
    let restricted = restrict_lpe(&component_w, &n_at_most(3), &BTreeSet::from([0, 1]));
    let instance =
        ProcessInstance::new(Arc::new(restricted), vec![Value::Bool(false)]).unwrap();

    let lts = explore_lpe(&instance, Limits::with_nat_bound(64)).unwrap();
    assert_eq!(lts.num_states, 2);
    // Three enabled countdown values plus the toggle, per mode, instead of
    // one transition per enumerated natural.
    assert_eq!(lts.num_transitions(), 8);

    let unrestricted_instance = ProcessInstance::new(
        Arc::new(
            induce_component(&spec.process, &plan.tuple_w, Side::W, &plan.names, true).unwrap(),
        ),
        vec![Value::Bool(false)],
    )
    .unwrap();
    let unrestricted = explore_lpe(&unrestricted_instance, Limits::with_nat_bound(64)).unwrap();
    assert_eq!(unrestricted.num_transitions(), 2 * 65);

    // Restriction never enlarges the reachable value sets.
    let restricted_states: BTreeSet<_> = lts.state_labels.clone().unwrap().into_iter().collect();
    let unrestricted_states: BTreeSet<_> = unrestricted
        .state_labels
        .clone()
        .unwrap()
        .into_iter()
        .map(|s| s.replace("Machine_W(", "Machine_W_inv("))
        .collect();
    assert!(restricted_states.is_subset(&unrestricted_states));
}

#[test]
fn strengthened_recombination_tames_the_naive_plan() {
    let spec = machine_spec();
    let plan = machine_naive_plan(&spec.process);
    let invariant = Invariant::for_lpe(&spec.process, n_at_most(3)).unwrap();
    assert!(check_invariant(&spec.process, &invariant, 16).unwrap().holds());

    let (component_v, component_w) =
        restrict_components(&spec.process, &plan, &invariant, true, false).unwrap();
    let w_instance =
        ProcessInstance::new(Arc::new(component_w.clone()), vec![Value::Bool(false)]).unwrap();
    let w_lts = explore_lpe(&w_instance, Limits::with_nat_bound(64)).unwrap();
    assert_eq!(w_lts.num_states, 2);
    assert_eq!(w_lts.num_transitions(), 8);
    let v_instance =
        ProcessInstance::new(Arc::new(component_v), vec![Value::Nat(0)]).unwrap();
    assert_eq!(
        explore_lpe(&v_instance, Limits::with_nat_bound(64))
            .unwrap()
            .num_states,
        4
    );

    let context =
        build_invariant_context(&spec.process, &plan, &invariant, &spec.init.init, true, false)
            .unwrap();
    let composed = explore_composition(&context, Limits::with_nat_bound(64)).unwrap();
    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert!(check_bisim(&monolithic, &composed).bisimilar);
}

#[test]
fn strengthened_recombination_keeps_the_refined_plan_exact() {
    let spec = machine_spec();
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();
    let invariant = Invariant::for_lpe(&spec.process, n_at_most(3)).unwrap();

    let (component_v, _) =
        restrict_components(&spec.process, &plan, &invariant, true, false).unwrap();
    let v_instance = ProcessInstance::new(Arc::new(component_v), vec![Value::Nat(0)]).unwrap();
    let v_lts = explore_lpe(&v_instance, Limits::default()).unwrap();
    assert_eq!(v_lts.num_states, 4);
    assert_eq!(v_lts.num_transitions(), 5);

    let context =
        build_invariant_context(&spec.process, &plan, &invariant, &spec.init.init, true, false)
            .unwrap();
    let composed = explore_composition(&context, Limits::default()).unwrap();
    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert!(check_bisim(&monolithic, &composed).bisimilar);
}

#[test]
fn trivial_invariant_changes_no_state_space() {
    let spec = machine_spec();
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();
    let trivial = Invariant::for_lpe(&spec.process, Expression::boolean(true)).unwrap();

    let strengthened =
        build_invariant_context(&spec.process, &plan, &trivial, &spec.init.init, true, false)
            .unwrap();
    let plain =
        lpecleave::build_cleave_context(&spec.process, &plan, &spec.init.init, true).unwrap();

    let a = explore_composition(&strengthened, Limits::default()).unwrap();
    let b = explore_composition(&plain, Limits::default()).unwrap();
    assert_eq!(a.num_states, b.num_states);
    assert_eq!(a.transitions, b.transitions);
}

#[test]
fn invariant_on_updates_also_recombines_correctly() {
    let spec = machine_spec();
    let plan = machine_naive_plan(&spec.process);
    let invariant = Invariant::for_lpe(&spec.process, n_at_most(3)).unwrap();
    let context =
        build_invariant_context(&spec.process, &plan, &invariant, &spec.init.init, true, true)
            .unwrap();
    let composed = explore_composition(&context, Limits::with_nat_bound(64)).unwrap();
    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert!(check_bisim(&monolithic, &composed).bisimilar);
}

#[test]
fn initial_values_must_satisfy_the_invariant() {
    let spec = machine_spec();
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();
    let wrong = Invariant {
        psi: Expression::var("s", Sort::Bool),
    };
    assert!(matches!(
        build_invariant_context(&spec.process, &plan, &wrong, &spec.init.init, true, false),
        Err(InvariantError::ViolatedAtInit)
    ));
}
