//! The acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test -p lpecleave --test acceptance -- --nocapture` to
//! see the lines.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{machine_naive_plan, naive_bisim_classes, random_instance, random_lts};
use lpecleave::{
    auto_cleave, build_cleave_context, build_invariant_context, check_bisim, check_cleave_oracle,
    check_invariant, explore_composition, explore_lpe, minimise_bisim, parse_expression,
    parse_partition, parse_spec, render_metrics_kv, render_metrics_text, run_pipeline, Expression,
    Invariant, Limits, PipelineOptions, ProcessInstance, SpecFile, Sort, Value,
};

fn spec_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn load(name: &str) -> SpecFile {
    let text = fs::read_to_string(spec_dir().join(name)).unwrap();
    parse_spec(&text).unwrap()
}

fn bundled_invariant(spec: &SpecFile, name: &str) -> Expression {
    let text = fs::read_to_string(spec_dir().join(name)).unwrap();
    parse_expression(&text, spec).unwrap()
}

fn bundled_partition(name: &str) -> (Vec<String>, Vec<String>) {
    let text = fs::read_to_string(spec_dir().join(name)).unwrap();
    parse_partition(&text).unwrap()
}

#[test]
fn criterion_01_machine_monolithic_state_space() {
    let start = Instant::now();
    let spec = load("machine.lpe");
    let lts = explore_lpe(&spec.init, Limits::default()).unwrap();

    assert_eq!(lts.num_states, 6);
    assert_eq!(lts.num_transitions(), 6);
    let rendered: Vec<(usize, String, usize)> = lts
        .transitions
        .iter()
        .map(|t| (t.src, t.label.to_string(), t.dst))
        .collect();
    assert_eq!(
        rendered,
        vec![
            (0, "toggle".into(), 1),
            (1, "count".into(), 2),
            (2, "count".into(), 3),
            (3, "count".into(), 4),
            (4, "toggle".into(), 5),
            (5, "count".into(), 0),
        ]
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1: PASS machine state space is exactly the 6-state/6-transition cycle ({elapsed:?})");
}

#[test]
fn criterion_02_machine_cleave_tuples_and_components() {
    let spec = load("machine.lpe");
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();

    assert_eq!(plan.tuple_v.independent, BTreeSet::from([0]));
    assert_eq!(plan.tuple_v.covered, BTreeSet::from([0, 1]));
    assert_eq!(plan.tuple_v.conditions[&1].to_string(), "n == 0");
    assert!(plan.tuple_v.actions[&1].is_silent());
    assert_eq!(
        plan.tuple_v.sync_payload[&1],
        vec![Expression::var("s", Sort::Bool)]
    );
    assert!(plan.tuple_w.independent.is_empty());
    assert_eq!(plan.tuple_w.covered, BTreeSet::from([1]));
    assert_eq!(plan.tuple_w.conditions[&1], Expression::boolean(true));
    assert_eq!(plan.tuple_w.actions[&1].to_string(), "toggle");
    assert_eq!(
        plan.tuple_w.sync_payload[&1],
        vec![Expression::var("s", Sort::Bool)]
    );

    let component = |tuple, side| {
        let lpe =
            lpecleave::induce_component(&spec.process, tuple, side, &plan.names, true).unwrap();
        let init = lpecleave::project(&spec.init.init, &tuple.params).unwrap();
        let instance = ProcessInstance::new(Arc::new(lpe), init).unwrap();
        explore_lpe(&instance, Limits::default()).unwrap()
    };
    let lts_v = component(&plan.tuple_v, lpecleave::Side::V);
    assert_eq!((lts_v.num_states, lts_v.num_transitions()), (4, 5));
    let lts_w = component(&plan.tuple_w, lpecleave::Side::W);
    assert_eq!((lts_w.num_states, lts_w.num_transitions()), (2, 2));
    println!("criterion 2: PASS refined tuples reproduced; components explore to 4/5 and 2/2");
}

#[test]
fn criterion_03_machine_recombination_is_bisimilar() {
    let spec = load("machine.lpe");
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();
    let context = build_cleave_context(&spec.process, &plan, &spec.init.init, true).unwrap();

    let composed = explore_composition(&context, Limits::default()).unwrap();
    assert_eq!((composed.num_states, composed.num_transitions()), (6, 6));
    let (minimised, _) = minimise_bisim(&composed);
    assert_eq!((minimised.num_states, minimised.num_transitions()), (6, 6));

    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert!(check_bisim(&monolithic, &composed).bisimilar);
    println!("criterion 3: PASS recombination bisimilar to the monolithic space; 6/6 before and after minimisation");
}

#[test]
fn criterion_04_tag_necessity() {
    let spec = load("tag_counterexample.lpe");
    let (v, w) = bundled_partition("tag_counterexample.partition");

    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert_eq!(monolithic.num_states, 4);

    let tagged = run_pipeline(&spec, &v, &w, &PipelineOptions::default()).unwrap();
    assert!(tagged.bisimilar);

    let untagged = run_pipeline(
        &spec,
        &v,
        &w,
        &PipelineOptions {
            use_tag: false,
            ..PipelineOptions::default()
        },
    )
    .unwrap();
    assert!(!untagged.bisimilar);
    let witness = untagged.witness.unwrap();
    assert_eq!(witness[0].to_string(), "a|b");
    println!("criterion 4: PASS tags recombine exactly; omitting them is caught with witness a|b");
}

#[test]
fn criterion_05_oracle_calibration() {
    let spec = load("machine.lpe");
    let plan = auto_cleave(&spec.process, &["n".into()], &["s".into()]).unwrap();

    let clean = check_cleave_oracle(&spec.process, &plan, 8).unwrap();
    assert!(clean.r1 && clean.r2);
    assert!(clean.r3_violations.is_empty());
    assert!(clean.r4_violations.is_empty());

    let mut no_payload = plan.clone();
    no_payload.tuple_v.sync_payload.insert(1, vec![]);
    no_payload.tuple_w.sync_payload.insert(1, vec![]);
    let report = check_cleave_oracle(&spec.process, &no_payload, 8).unwrap();
    assert!(report.r1 && report.r2);
    assert!(report.r3_violations.is_empty());
    assert!(!report.r4_violations.is_empty());

    let mut false_side = plan.clone();
    false_side
        .tuple_w
        .conditions
        .insert(1, Expression::boolean(false));
    let report = check_cleave_oracle(&spec.process, &false_side, 8).unwrap();
    assert!(!report.r3_violations.is_empty());
    println!("criterion 5: PASS oracle accepts the refined plan, rejects the broken variants on the right requirement");
}

#[test]
fn criterion_06_invariant_suite() {
    let spec = load("machine.lpe");

    let loose = Invariant::for_lpe(&spec.process, bundled_invariant(&spec, "machine.inv")).unwrap();
    assert!(check_invariant(&spec.process, &loose, 16).unwrap().holds());

    let tight = Invariant::for_lpe(
        &spec.process,
        parse_expression("n <= 2", &spec).unwrap(),
    )
    .unwrap();
    let report = check_invariant(&spec.process, &tight, 16).unwrap();
    assert!(!report.holds());
    let first = &report.violations[0];
    assert_eq!(first.summand, 1);
    assert_eq!(
        first.env,
        vec![
            ("n".to_string(), Value::Nat(0)),
            ("s".to_string(), Value::Bool(false)),
        ]
    );

    // The fully synchronised plan becomes usable once the invariant caps
    // the enumeration of the countdown.
    let plan = machine_naive_plan(&spec.process);
    let context =
        build_invariant_context(&spec.process, &plan, &loose, &spec.init.init, true, false)
            .unwrap();
    let composed = explore_composition(&context, Limits::with_nat_bound(64)).unwrap();
    let (component_v, component_w) =
        lpecleave::restrict_components(&spec.process, &plan, &loose, true, false).unwrap();
    let w_lts = explore_lpe(
        &ProcessInstance::new(Arc::new(component_w), vec![Value::Bool(false)]).unwrap(),
        Limits::with_nat_bound(64),
    )
    .unwrap();
    assert_eq!((w_lts.num_states, w_lts.num_transitions()), (2, 8));
    let v_lts = explore_lpe(
        &ProcessInstance::new(Arc::new(component_v), vec![Value::Nat(0)]).unwrap(),
        Limits::with_nat_bound(64),
    )
    .unwrap();
    assert_eq!(v_lts.num_states, 4);

    let monolithic = explore_lpe(&spec.init, Limits::default()).unwrap();
    assert!(check_bisim(&monolithic, &composed).bisimilar);
    println!("criterion 6: PASS invariant checking verdicts and the strengthened recombination are exact");
}

#[test]
fn criterion_07_random_validity() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(2024);
    let limits = Limits {
        nat_bound: 5,
        max_states: 50_000,
        max_transitions: 500_000,
    };

    let total = 220;
    let mut oracle_passes = 0;
    for index in 0..total {
        let (instance, v, w) = random_instance(&mut rng);
        let plan = auto_cleave(&instance.lpe, &v, &w)
            .unwrap_or_else(|e| panic!("instance {index}: partition rejected: {e}"));
        let report = check_cleave_oracle(&instance.lpe, &plan, limits.nat_bound)
            .unwrap_or_else(|e| panic!("instance {index}: oracle error: {e}"));
        if !report.passed() {
            continue;
        }
        oracle_passes += 1;

        let context =
            build_cleave_context(&instance.lpe, &plan, &instance.init, true).unwrap();
        let monolithic = explore_lpe(&instance, limits).unwrap();
        let composed = explore_composition(&context, limits).unwrap();
        let verdict = check_bisim(&monolithic, &composed);
        assert!(
            verdict.bisimilar,
            "instance {index}: recombination not bisimilar (witness {:?})\nprocess: {:?}\npartition: {v:?} / {w:?}",
            verdict.witness, instance.lpe
        );
    }

    let elapsed = start.elapsed();
    assert!(
        oracle_passes >= 150,
        "only {oracle_passes}/{total} plans passed the oracle"
    );
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 7: PASS {oracle_passes}/{total} random plans passed the oracle and every one recombined bisimilarly ({elapsed:?})"
    );
}

#[test]
fn criterion_08_minimisation_kernel() {
    let mut rng = StdRng::seed_from_u64(4711);
    for _ in 0..100 {
        let lts = random_lts(&mut rng, 50, 3);
        let (quotient, _) = minimise_bisim(&lts);
        assert_eq!(quotient.num_states, naive_bisim_classes(&lts));

        let (again, _) = minimise_bisim(&quotient);
        assert_eq!(again.num_states, quotient.num_states);
        assert_eq!(again.initial, quotient.initial);
        assert_eq!(again.transitions, quotient.transitions);
    }
    println!("criterion 8: PASS quotient block counts match the naive fixpoint on 100 random systems; minimisation idempotent");
}

#[test]
fn criterion_09_protocol_pipeline() {
    let start = Instant::now();
    let spec = load("abp_like.lpe");
    let (v, w) = bundled_partition("abp_like.partition");
    let psi = bundled_invariant(&spec, "abp_like.inv");

    let outcome = run_pipeline(
        &spec,
        &v,
        &w,
        &PipelineOptions {
            invariant: Some(psi),
            ..PipelineOptions::default()
        },
    )
    .unwrap();
    assert!(outcome.bisimilar);

    let monolithic = &outcome.rows[0];
    let composition = outcome.rows.last().unwrap();
    assert_eq!(monolithic.key, "monolithic");
    assert_eq!(composition.key, "composition");
    assert_eq!(
        monolithic.states_minimised,
        composition.states_minimised
    );
    assert_eq!(
        monolithic.transitions_minimised,
        composition.transitions_minimised
    );
    // The recombined state space is itself smaller than the monolithic one.
    assert!(composition.states_original < monolithic.states_original);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 9: PASS protocol pipeline bisimilar; minimised counts agree ({} states/{} transitions) ({elapsed:?})",
        monolithic.states_minimised, monolithic.transitions_minimised
    );
}

#[test]
fn criterion_10_determinism() {
    let bundles = [
        ("machine.lpe", "machine.partition", Some("machine.inv")),
        (
            "machine_drill.lpe",
            "machine_drill.partition",
            Some("machine_drill.inv"),
        ),
        (
            "tag_counterexample.lpe",
            "tag_counterexample.partition",
            None,
        ),
        ("abp_like.lpe", "abp_like.partition", Some("abp_like.inv")),
    ];
    for (spec_name, partition_name, invariant_name) in bundles {
        let spec = load(spec_name);
        let (v, w) = bundled_partition(partition_name);
        let invariant = invariant_name.map(|name| bundled_invariant(&spec, name));

        let out_base = Path::new(env!("CARGO_TARGET_TMPDIR")).join(spec_name.replace('.', "_"));
        let run = |suffix: &str| {
            let out_dir = out_base.join(suffix);
            let options = PipelineOptions {
                invariant: invariant.clone(),
                out_dir: Some(out_dir.clone()),
                ..PipelineOptions::default()
            };
            let outcome = run_pipeline(&spec, &v, &w, &options).unwrap();
            assert!(outcome.bisimilar, "{spec_name}: recombination must be bisimilar");
            (outcome, out_dir)
        };
        let (first, dir_a) = run("a");
        let (second, dir_b) = run("b");

        assert_eq!(
            render_metrics_text(&first, false),
            render_metrics_text(&second, false),
            "{spec_name}: text tables differ"
        );
        assert_eq!(
            render_metrics_kv(&first, false),
            render_metrics_kv(&second, false),
            "{spec_name}: kv tables differ"
        );
        assert_eq!(first.artefacts.len(), 8);
        for (a, b) in first.artefacts.iter().zip(&second.artefacts) {
            assert_eq!(
                fs::read(a).unwrap(),
                fs::read(b).unwrap(),
                "{spec_name}: {} differs between runs",
                a.display()
            );
            assert_ne!(dir_a, dir_b);
        }

        // Every emitted table respects minimised <= original.
        for row in &first.rows {
            assert!(row.states_minimised <= row.states_original);
            assert!(row.transitions_minimised <= row.transitions_original);
        }
    }
    println!("criterion 10: PASS two pipeline runs of every bundled spec are byte-identical (timing aside)");
}
