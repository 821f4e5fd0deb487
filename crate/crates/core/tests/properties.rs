//! Property tests: expression semantics, the minimisation kernel against
//! the naive relational oracle, and label-algebra laws on random inputs.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{naive_bisim_classes, random_lts};
use lpecleave::{
    check_bisim, gamma_apply, minimise_bisim, ActionValue, CommRule, Environment, Expression,
    MultiActionValue, Sort, Value,
};

// Typed expression generator over the fixed scope x,y: Bool, m,n: Nat.
fn arb_bool_expr(depth: u32) -> BoxedStrategy<Expression> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expression::boolean),
        Just(Expression::var("x", Sort::Bool)),
        Just(Expression::var("y", Sort::Bool)),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let sub = arb_bool_expr(depth - 1);
    let nat = arb_nat_expr(depth - 1);
    prop_oneof![
        leaf,
        sub.clone().prop_map(|e| e.not()),
        (sub.clone(), sub.clone()).prop_map(|(a, b)| a.and(b)),
        (sub.clone(), sub.clone()).prop_map(|(a, b)| a.or(b)),
        (sub.clone(), sub.clone()).prop_map(|(a, b)| a.implies(b)),
        (nat.clone(), nat.clone()).prop_map(|(a, b)| a.equals(b)),
        (nat.clone(), nat.clone()).prop_map(|(a, b)| a.less(b)),
        (nat.clone(), nat.clone()).prop_map(|(a, b)| a.less_eq(b)),
        (nat.clone(), nat).prop_map(|(a, b)| a.greater(b)),
        (sub.clone(), sub.clone(), sub).prop_map(|(c, t, e)| Expression::ite(c, t, e)),
    ]
    .boxed()
}

fn arb_nat_expr(depth: u32) -> BoxedStrategy<Expression> {
    let leaf = prop_oneof![
        (0u64..=6).prop_map(Expression::nat),
        Just(Expression::var("m", Sort::Nat)),
        Just(Expression::var("n", Sort::Nat)),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let sub = arb_nat_expr(depth - 1);
    let cond = arb_bool_expr(depth - 1);
    prop_oneof![
        leaf,
        (sub.clone(), sub.clone()).prop_map(|(a, b)| a.plus(b)),
        (sub.clone(), sub.clone()).prop_map(|(a, b)| a.monus(b)),
        (cond, sub.clone(), sub).prop_map(|(c, t, e)| Expression::ite(c, t, e)),
    ]
    .boxed()
}

fn arb_env() -> impl Strategy<Value = Environment> {
    (any::<bool>(), any::<bool>(), 0u64..=8, 0u64..=8).prop_map(|(x, y, m, n)| {
        Environment::new()
            .with("x", Value::Bool(x))
            .with("y", Value::Bool(y))
            .with("m", Value::Nat(m))
            .with("n", Value::Nat(n))
    })
}

proptest! {
    // Evaluation only looks at the free variables.
    #[test]
    fn evaluation_ignores_unused_bindings(
        e in arb_bool_expr(3),
        env in arb_env(),
        noise in arb_env(),
    ) {
        let free = e.free_vars();
        let mut scrambled = Environment::new();
        for name in ["x", "y", "m", "n"] {
            let source = if free.contains(name) { &env } else { &noise };
            scrambled.bind(name, source.get(name).unwrap().clone());
        }
        prop_assert_eq!(e.evaluate(&env).unwrap(), e.evaluate(&scrambled).unwrap());
    }

    // Replacing a variable by data-equivalent closed expressions cannot be
    // observed through evaluation.
    #[test]
    fn substitution_respects_data_equivalence(
        e in arb_nat_expr(3),
        g in arb_nat_expr(2),
        env in arb_env(),
    ) {
        let closed = {
            let map = BTreeMap::from([
                ("m".to_string(), Expression::nat(env.get("m").unwrap().to_string().parse().unwrap())),
                ("n".to_string(), Expression::nat(env.get("n").unwrap().to_string().parse().unwrap())),
            ]);
            g.substitute(&map).unwrap()
        };
        // Same value, different syntax.
        let noisy = closed.clone().plus(Expression::nat(0));
        let via_closed = e.substitute(&BTreeMap::from([("m".to_string(), closed)])).unwrap();
        let via_noisy = e.substitute(&BTreeMap::from([("m".to_string(), noisy)])).unwrap();
        prop_assert_eq!(
            via_closed.evaluate(&env).unwrap(),
            via_noisy.evaluate(&env).unwrap()
        );
    }

    // Substituting literals for variables and closing the environment agree.
    #[test]
    fn substitution_agrees_with_the_environment(
        e in arb_bool_expr(3),
        env in arb_env(),
    ) {
        let map: BTreeMap<String, Expression> = ["x", "y", "m", "n"]
            .into_iter()
            .map(|name| (name.to_string(), Expression::lit(env.get(name).unwrap().clone())))
            .collect();
        let closed = e.substitute(&map).unwrap();
        prop_assert!(closed.free_vars().is_empty());
        prop_assert_eq!(
            closed.evaluate(&Environment::new()).unwrap(),
            e.evaluate(&env).unwrap()
        );
    }
}

#[test]
fn minimisation_matches_the_naive_oracle_and_is_idempotent() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..60 {
        let lts = random_lts(&mut rng, 30, 3);
        let (quotient, partition) = minimise_bisim(&lts);
        assert_eq!(quotient.num_states, naive_bisim_classes(&lts));
        assert_eq!(partition.len(), lts.num_states);

        let (again, _) = minimise_bisim(&quotient);
        assert_eq!(again.num_states, quotient.num_states);
        assert_eq!(again.transitions, quotient.transitions);
        assert_eq!(again.initial, quotient.initial);

        assert!(check_bisim(&lts, &quotient).bisimilar);
    }
}

#[test]
fn bisimilarity_is_an_equivalence_on_a_random_corpus() {
    let mut rng = StdRng::seed_from_u64(23);
    let corpus: Vec<_> = (0..8).map(|_| random_lts(&mut rng, 12, 2)).collect();

    for lts in &corpus {
        assert!(check_bisim(lts, lts).bisimilar);
    }
    for a in &corpus {
        for b in &corpus {
            assert_eq!(check_bisim(a, b).bisimilar, check_bisim(b, a).bisimilar);
        }
    }
    for a in &corpus {
        for b in &corpus {
            for c in &corpus {
                if check_bisim(a, b).bisimilar && check_bisim(b, c).bisimilar {
                    assert!(check_bisim(a, c).bisimilar);
                }
            }
        }
    }
}

#[test]
fn communication_is_order_independent_and_counts_labels() {
    let mut rng = StdRng::seed_from_u64(37);
    let labels = ["a", "b", "c", "d", "e", "f"];
    for _ in 0..200 {
        // Two rules over disjoint labels, results outside every left-hand
        // side; such sets always validate.
        let rules = vec![
            CommRule::new(["a", "b"], "r"),
            CommRule::new(["c", "d"], "s"),
        ];
        let mut shuffled = rules.clone();
        shuffled.reverse();

        let size = rng.gen_range(0..6);
        let factors: Vec<ActionValue> = (0..size)
            .map(|_| {
                let label = labels[rng.gen_range(0..labels.len())];
                let args = if rng.gen_bool(0.4) {
                    vec![Value::Nat(rng.gen_range(0..2))]
                } else {
                    vec![]
                };
                ActionValue::new(label, args)
            })
            .collect();
        let label = MultiActionValue::from_factors(factors);

        let forward = gamma_apply(&rules, &label);
        let backward = gamma_apply(&shuffled, &label);
        assert_eq!(forward, backward);

        // Every firing trades the left-hand labels for a single result.
        let fired_r = forward.factors().iter().filter(|f| f.label == "r").count();
        let fired_s = forward.factors().iter().filter(|f| f.label == "s").count();
        assert_eq!(forward.len() + fired_r + fired_s, label.len());
    }
}
