mod common;

use std::collections::BTreeSet;

use common::{brute_ft, myhill_nerode_size, reach, same_behaviour};
use freeterm_core::algebra::{
    check_maximal_states_ft, check_top_in_range_ft, is_inflationary, is_monotone_query,
    minimal_true_states, natural_order, threshold_query,
};
use freeterm_core::distsim::check_domain_distinct_monotone;
use freeterm_core::format::{from_json, to_json, AutomatonFile};
use freeterm_core::minimize::{
    check_equivalence, collapse_closure, collapse_fixpoint, minimize_moore, moore_partition,
};
use freeterm_core::relational::{active_domain, Expr, Fact, Instance};
use freeterm_core::{
    all_ft_states, build_graph, Antichain, LabelId, Query, Semiautomaton, StateId, Value,
};
use proptest::prelude::*;

fn labels(k: usize) -> Vec<String> {
    (0..k).map(|l| format!("l{l}")).collect()
}

fn build(n: usize, k: usize, targets: &[usize], values: &[i64]) -> (Semiautomaton, Query) {
    let rows = (0..n)
        .map(|s| targets[s * k..(s + 1) * k].to_vec())
        .collect();
    let a = Semiautomaton::new(n, labels(k), rows, Some(0)).unwrap();
    (
        a,
        Query::new(values.iter().map(|&v| Value::Int(v)).collect()),
    )
}

/// Any deterministic system on up to ten states with a three-valued query.
fn system() -> impl Strategy<Value = (Semiautomaton, Query)> {
    (1usize..=10, 1usize..=3).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(0..n, n * k),
            prop::collection::vec(0i64..3, n),
        )
            .prop_map(move |(t, v)| build(n, k, &t, &v))
    })
}

/// Systems whose transitions never decrease the state index: acyclic up to
/// self-loops.
fn acyclic_system() -> impl Strategy<Value = (Semiautomaton, Query)> {
    (1usize..=10, 1usize..=3).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(any::<usize>(), n * k),
            prop::collection::vec(0i64..2, n),
        )
            .prop_map(move |(r, v)| {
                let t: Vec<usize> = (0..n * k).map(|i| i / k + r[i] % (n - i / k)).collect();
                build(n, k, &t, &v)
            })
    })
}

fn bool_query(q: &Query) -> Query {
    Query::from_fn(q.len(), |s| Value::Bool(q.values()[s] == Value::Int(1)))
}

/// Naive Moore refinement: split by class and successor classes until stable.
fn naive_partition(a: &Semiautomaton, initial: &[u32]) -> Vec<u32> {
    let mut cls = initial.to_vec();
    loop {
        let sigs: Vec<(u32, Vec<u32>)> = a
            .states()
            .map(|s| {
                (
                    cls[s.index()],
                    a.row(s).iter().map(|&t| cls[t as usize]).collect(),
                )
            })
            .collect();
        let distinct: Vec<_> = sigs.iter().collect::<BTreeSet<_>>().into_iter().collect();
        let next: Vec<u32> = sigs
            .iter()
            .map(|s| distinct.binary_search(&s).unwrap() as u32)
            .collect();
        if same_blocks(&next, &cls) {
            return next;
        }
        cls = next;
    }
}

fn same_blocks(x: &[u32], y: &[u32]) -> bool {
    (0..x.len()).all(|i| (0..x.len()).all(|j| (x[i] == x[j]) == (y[i] == y[j])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reach_sets_grow_and_stabilize((a, _) in system()) {
        let g = build_graph(&a);
        let n = a.num_states();
        for s in a.states() {
            let mut prev = g.reach_set(s, Some(0)).unwrap();
            prop_assert_eq!(&prev, &vec![s]);
            for k in 1..=n {
                let cur = g.reach_set(s, Some(k)).unwrap();
                prop_assert!(prev.iter().all(|x| cur.contains(x)));
                prev = cur;
            }
            let full: BTreeSet<StateId> = g.reach_set(s, None).unwrap().into_iter().collect();
            prop_assert_eq!(&prev.into_iter().collect::<BTreeSet<_>>(), &full);
            let oracle: BTreeSet<StateId> =
                reach(&a, s.index()).iter().enumerate().filter(|p| *p.1).map(|p| StateId(p.0 as u32)).collect();
            prop_assert_eq!(full, oracle);
        }
    }

    #[test]
    fn reachability_is_transitive((a, _) in system()) {
        let g = build_graph(&a);
        for x in a.states() {
            for y in a.states() {
                for z in a.states() {
                    if g.reaches(x, y).unwrap() && g.reaches(y, z).unwrap() {
                        prop_assert!(g.reaches(x, z).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn edge_count_is_states_times_labels((a, _) in system()) {
        prop_assert_eq!(build_graph(&a).num_edges(), a.num_states() * a.num_labels());
    }

    #[test]
    fn linear_ft_matches_definition((a, q) in system()) {
        let v = all_ft_states(&build_graph(&a), &q).unwrap();
        prop_assert_eq!(v.per_state(), brute_ft(&a, &q));
    }

    #[test]
    fn ft_closed_under_scc_and_reach((a, q) in system()) {
        let g = build_graph(&a);
        let v = all_ft_states(&g, &q).unwrap();
        for s in a.states().filter(|&s| v.is_ft(s)) {
            for &m in g.scc_members(g.scc_of(s)) {
                prop_assert!(v.is_ft(m));
            }
            for t in g.reach_set(s, None).unwrap() {
                prop_assert!(v.is_ft(t));
                prop_assert_eq!(q.value(t), q.value(s));
            }
        }
    }

    #[test]
    fn natural_order_is_a_valid_inflationary_order((a, q) in acyclic_system()) {
        let g = build_graph(&a);
        let order = natural_order(&g).unwrap();
        order.validate().unwrap();
        prop_assert!(is_inflationary(&g, &order));
        for x in a.states() {
            for y in a.states() {
                prop_assert_eq!(order.le(x, y), reach(&a, x.index())[y.index()]);
            }
        }
        prop_assert!(check_maximal_states_ft(&g, &order, &q).unwrap().is_pass());
    }

    #[test]
    fn top_values_are_free((a, q) in acyclic_system()) {
        let g = build_graph(&a);
        let order = natural_order(&g).unwrap();
        let b = bool_query(&q);
        let v = check_top_in_range_ft(&g, &order, &b, &b.order_or_natural()).unwrap();
        prop_assert!(!v.is_fail());
        if is_monotone_query(&b, &order, &b.order_or_natural()).unwrap() {
            prop_assert!(v.is_pass());
        }
    }

    #[test]
    fn threshold_queries_are_monotone_and_recoverable(
        (a, _) in acyclic_system(),
        picks in prop::collection::vec(any::<bool>(), 10),
    ) {
        let g = build_graph(&a);
        let order = natural_order(&g).unwrap();
        let chosen: Vec<StateId> = a.states().filter(|s| picks[s.index()]).collect();
        let minimal: Vec<StateId> = chosen
            .iter()
            .copied()
            .filter(|&c| !chosen.iter().any(|&d| order.lt(d, c)))
            .collect();
        let c = Antichain::new(&order, minimal).unwrap();
        let q = threshold_query(&order, &c);
        prop_assert!(is_monotone_query(&q, &order, &q.order_or_natural()).unwrap());
        let back = Antichain::new(&order, minimal_true_states(&g, &q).unwrap()).unwrap();
        prop_assert_eq!(threshold_query(&order, &back), q);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn minimal_true_states_are_the_order_minima((a, q) in acyclic_system()) {
        let g = build_graph(&a);
        let order = natural_order(&g).unwrap();
        let b = bool_query(&q);
        let truth = |s: StateId| b.value(s) == &Value::Bool(true);
        let expect: Vec<StateId> =
            a.states().filter(|&s| truth(s) && !a.states().any(|t| truth(t) && order.lt(t, s))).collect();
        prop_assert_eq!(minimal_true_states(&g, &b).unwrap(), expect);
    }

    #[test]
    fn collapsing_a_free_state_preserves_behaviour((a, q) in system()) {
        let v = all_ft_states(&build_graph(&a), &q).unwrap();
        for s in v.ft_states() {
            let c = collapse_closure(&a, &q, s).unwrap();
            prop_assert!(c.automaton.num_states() <= a.num_states());
            prop_assert!(check_equivalence(&a, &q, &c.automaton, &c.query).unwrap().is_none());
            prop_assert!(same_behaviour(&a, &q, &c.automaton, &c.query, 6));
        }
    }

    #[test]
    fn collapse_fixpoint_free_iff_self_loops((a, q) in system()) {
        let c = collapse_fixpoint(&a, &q).unwrap();
        let g = build_graph(&c.automaton);
        let ft = brute_ft(&c.automaton, &c.query);
        for s in c.automaton.states() {
            prop_assert_eq!(ft[s.index()], g.only_self_loops(s));
        }
        prop_assert!(check_equivalence(&a, &q, &c.automaton, &c.query).unwrap().is_none());
    }

    #[test]
    fn minimization_is_minimal_and_idempotent((a, q) in system()) {
        let m = minimize_moore(&a, &q).unwrap();
        let reachable = reach(&a, 0).iter().filter(|&&b| b).count();
        prop_assert!(m.automaton.num_states() <= reachable);
        prop_assert_eq!(m.automaton.num_states(), myhill_nerode_size(&a, &q, a.num_states()));
        prop_assert!(check_equivalence(&a, &q, &m.automaton, &m.query).unwrap().is_none());
        let again = minimize_moore(&m.automaton, &m.query).unwrap();
        prop_assert_eq!(again.automaton.num_states(), m.automaton.num_states());
    }

    #[test]
    fn moore_partition_matches_naive_refinement((a, q) in system()) {
        let fast = moore_partition(&a, q.classes());
        prop_assert!(same_blocks(&fast, &naive_partition(&a, q.classes())));
    }

    #[test]
    fn json_round_trip((a, q) in system()) {
        let file = AutomatonFile::new(a.clone(), q.clone());
        let text = to_json(&file);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back.automaton, &a);
        prop_assert_eq!(&back.query, &q);
        prop_assert_eq!(to_json(&back), text);
    }

    #[test]
    fn run_from_start_stays_in_reach((a, _) in system(), seq in prop::collection::vec(0u32..3, 0..12)) {
        let seq: Vec<LabelId> = seq.into_iter().map(|l| LabelId(l % a.num_labels() as u32)).collect();
        let end = a.apply_sequence(StateId(0), &seq).unwrap();
        prop_assert!(reach(&a, 0)[end.index()]);
    }
}

fn universe() -> Vec<Fact> {
    common::facts(&["R(a)", "R(b)", "R(c)", "S(a,b)", "S(b,c)"])
}

fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("R(a)".to_string()),
        Just("R(c)".to_string()),
        Just("S(a,b)".to_string()),
        Just("S(b,c)".to_string()),
        Just("(exists R)".to_string()),
        Just("(exists S)".to_string()),
        Just("(count-ge 2 R)".to_string()),
        Just("true".to_string()),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("(not {e})")),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| format!("(and {x} {y})")),
            (inner.clone(), inner).prop_map(|(x, y)| format!("(or {x} {y})")),
        ]
    })
}

/// Domain-distinct monotonicity from the definition over explicit sets.
fn ddm_oracle(q: &Expr, u: &[Fact]) -> bool {
    let sub = |m: usize| -> Instance {
        (0..u.len())
            .filter(|b| m >> b & 1 == 1)
            .map(|b| u[b].clone())
            .collect()
    };
    (0..1usize << u.len()).all(|im| {
        let i = sub(im);
        if !q.eval(&i) {
            return true;
        }
        let adom = active_domain(&i);
        (0..1usize << u.len()).all(|jm| {
            let j = sub(jm);
            let distinct = j.iter().all(|f| f.tuple.iter().any(|c| !adom.contains(c)));
            !distinct || q.eval(&i.union(&j).cloned().collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn domain_distinct_monotone_matches_definition(text in expr_text()) {
        let q = Expr::parse(&text).unwrap();
        let u = universe();
        prop_assert_eq!(check_domain_distinct_monotone(&q, &u).unwrap(), ddm_oracle(&q, &u), "{}", text);
    }
}
