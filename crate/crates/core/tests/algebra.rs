mod common;

use common::{brute_ft, facts, ft_set, named, reach};
use freeterm_core::algebra::{
    all_invertible, check_commutativity_ft_props, check_inverse_curse, check_semilattice_ft_props,
    extract_antichain, ft_of_threshold, identity_states, is_acyclic, is_antitone_query,
    is_commutative_query, is_commutative_query_with_bound, is_commutative_update, is_deflationary,
    is_inflationary, is_join_semilattice, is_monotone_query, join_table, natural_order,
    threshold_query, PropVerdict,
};
use freeterm_core::models::{
    fig1, grow_only_set, modular_addition, modular_counter, powerset_union, random_acyclic,
    random_query, random_strongly_connected, string_count, two_phase_set, Fig1Variant, Model,
};
use freeterm_core::relational::Expr;
use freeterm_core::{
    build_graph, Antichain, Error, PartialOrder, Query, Semiautomaton, StateId, Value, ValueOrder,
};

fn powerset(universe: &[&str], q: &str) -> Model {
    powerset_union(&facts(universe), &Expr::parse(q).unwrap()).unwrap()
}

fn fig2() -> Model {
    powerset(&["a", "b", "c"], "a")
}

fn state(m: &Model, name: &str) -> StateId {
    m.automaton
        .states()
        .find(|&s| m.automaton.state_name(s) == name)
        .unwrap()
}

fn subset(a: usize, b: usize) -> bool {
    a & !b == 0
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

#[test]
fn acyclicity_examples() {
    assert!(is_acyclic(&build_graph(&fig2().automaton)));
    assert!(!is_acyclic(&build_graph(&fig1(Fig1Variant::C).automaton)));
    let loops = Semiautomaton::from_fn(4, vec!["x".into(), "y".into()], Some(0), |s, _| s).unwrap();
    assert!(is_acyclic(&build_graph(&loops)));
}

#[test]
fn natural_order_of_fig2_is_subset_order() {
    let m = fig2();
    let o = natural_order(&build_graph(&m.automaton)).unwrap();
    assert!(o.le(state(&m, "{b}"), state(&m, "{a,b}")));
    assert!(!o.le(state(&m, "{a}"), state(&m, "{b,c}")));
    for a in 0..8 {
        for b in 0..8 {
            assert_eq!(o.le(StateId(a as u32), StateId(b as u32)), subset(a, b));
        }
        assert!(o.le(StateId(a as u32), StateId(a as u32)));
    }
    o.validate().unwrap();
    assert!(matches!(
        natural_order(&build_graph(&fig1(Fig1Variant::C).automaton)),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn chain_order_is_total() {
    let chain = Semiautomaton::new(
        3,
        vec!["x".into()],
        vec![vec![1], vec![2], vec![2]],
        Some(0),
    )
    .unwrap();
    let o = natural_order(&build_graph(&chain)).unwrap();
    for a in 0..3u32 {
        for b in 0..3u32 {
            assert!(o.comparable(StateId(a), StateId(b)));
        }
    }
}

#[test]
fn inflationary_examples() {
    let m = fig2();
    let g = build_graph(&m.automaton);
    let subsets = PartialOrder::from_fn(8, subset).unwrap();
    assert!(is_inflationary(&g, &subsets));
    assert!(!is_deflationary(&g, &subsets));
    for seed in 0..30 {
        let g = build_graph(&random_acyclic(25, 3, seed).unwrap());
        assert!(is_inflationary(&g, &natural_order(&g).unwrap()));
    }
    let g = build_graph(&fig1(Fig1Variant::C).automaton);
    assert!(!is_inflationary(&g, &PartialOrder::discrete(2).unwrap()));
}

#[test]
fn monotone_query_examples() {
    let m = fig2();
    let o = natural_order(&build_graph(&m.automaton)).unwrap();
    assert!(is_monotone_query(&m.query, &o, &ValueOrder::Natural).unwrap());
    assert!(!is_antitone_query(&m.query, &o, &ValueOrder::Natural).unwrap());

    let m = powerset(&["R(a)", "R(c)", "S(c)"], "(and R(c) (not S(c)))");
    let o = natural_order(&build_graph(&m.automaton)).unwrap();
    assert!(!is_monotone_query(&m.query, &o, &ValueOrder::Natural).unwrap());
    assert!(!is_antitone_query(&m.query, &o, &ValueOrder::Natural).unwrap());

    let c = Query::constant(8, false.into());
    assert!(is_monotone_query(&c, &o, &ValueOrder::Natural).unwrap());
    assert!(is_antitone_query(&c, &o, &ValueOrder::Natural).unwrap());

    let partial = ValueOrder::explicit(vec![(Value::Bool(false), Value::Bool(false))], []).unwrap();
    assert!(is_monotone_query(&m.query, &o, &partial).is_err());
}

#[test]
fn threshold_query_examples() {
    let m = fig2();
    let o = natural_order(&build_graph(&m.automaton)).unwrap();

    let c = Antichain::new(&o, vec![state(&m, "{a}")]).unwrap();
    assert_eq!(threshold_query(&o, &c), m.query);

    let bottom = Antichain::new(&o, vec![state(&m, "{}")]).unwrap();
    assert!(threshold_query(&o, &bottom)
        .values()
        .iter()
        .all(|v| *v == Value::Bool(true)));

    let c = Antichain::new(&o, vec![state(&m, "{a,b}"), state(&m, "{c}")]).unwrap();
    let q = threshold_query(&o, &c);
    let oracle: Vec<bool> = (0..8)
        .map(|s| subset(0b011, s) || subset(0b100, s))
        .collect();
    assert_eq!(q, Query::from_bools(&oracle));
    let truthy: Vec<String> = (0..8)
        .filter(|&s| oracle[s])
        .map(|s| m.automaton.state_name(StateId(s as u32)))
        .collect();
    assert_eq!(
        sorted(truthy),
        ["{a,b,c}", "{a,b}", "{a,c}", "{b,c}", "{c}"]
    );
    assert!(is_monotone_query(&q, &o, &ValueOrder::Natural).unwrap());

    assert!(Antichain::new(&o, vec![state(&m, "{a}"), state(&m, "{a,b}")]).is_err());
}

#[test]
fn ft_of_threshold_examples() {
    let m = fig2();
    let g = build_graph(&m.automaton);
    let o = natural_order(&g).unwrap();
    let c = Antichain::new(&o, vec![state(&m, "{a}")]).unwrap();
    let ft: Vec<String> = ft_of_threshold(&g, &o, &c)
        .unwrap()
        .into_iter()
        .map(|s| m.automaton.state_name(s))
        .collect();
    assert_eq!(sorted(ft), ["{a,b,c}", "{a,b}", "{a,c}", "{a}"]);

    let top = Antichain::new(&o, vec![state(&m, "{a,b,c}")]).unwrap();
    assert_eq!(
        ft_of_threshold(&g, &o, &top).unwrap(),
        vec![state(&m, "{a,b,c}")]
    );

    let gc = build_graph(&fig1(Fig1Variant::C).automaton);
    let d = PartialOrder::discrete(2).unwrap();
    let c = Antichain::new(&d, vec![StateId(0)]).unwrap();
    assert!(matches!(
        ft_of_threshold(&gc, &d, &c),
        Err(Error::Precondition(_))
    ));
}

/// A pseudo-random antichain: scan states in a scrambled order and keep
/// those incomparable with everything kept so far.
fn scrambled_antichain(o: &PartialOrder, n: usize, seed: u64) -> Antichain {
    let mut chosen: Vec<StateId> = Vec::new();
    for i in 0..n {
        let s = StateId(((i as u64 * 7 + seed) % n as u64) as u32);
        if (s.0 as u64 + seed).is_multiple_of(3) && chosen.iter().all(|&c| !o.comparable(c, s)) {
            chosen.push(s);
        }
    }
    if chosen.is_empty() {
        chosen.push(StateId(n as u32 - 1));
    }
    Antichain::new(o, chosen).unwrap()
}

#[test]
fn ft_of_threshold_matches_oracle_on_random_acyclic() {
    for seed in 0..100 {
        let a = random_acyclic(30, 3, seed).unwrap();
        let g = build_graph(&a);
        let o = natural_order(&g).unwrap();
        let c = scrambled_antichain(&o, 30, seed);
        let q = threshold_query(&o, &c);
        let oracle = ft_set(&brute_ft(&a, &q));
        let got: Vec<usize> = ft_of_threshold(&g, &o, &c)
            .unwrap()
            .into_iter()
            .map(|s| s.index())
            .collect();
        assert_eq!(got, oracle, "seed {seed}");
    }
}

#[test]
fn extract_antichain_examples() {
    let m = fig2();
    let g = build_graph(&m.automaton);
    let c = extract_antichain(&g, &m.query).unwrap();
    assert_eq!(named(&m.automaton, &[c.elements()[0].index()]), ["{a}"]);
    assert_eq!(c.len(), 1);

    let chain = Semiautomaton::new(
        4,
        vec!["x".into()],
        vec![vec![1], vec![2], vec![3], vec![3]],
        Some(0),
    )
    .unwrap();
    let c = extract_antichain(&build_graph(&chain), &Query::constant(4, 1i64.into())).unwrap();
    assert_eq!(c.elements(), [StateId(0)]);

    // true exactly on supersets of {a,b} or {a,c}
    let bits: Vec<bool> = (0..8)
        .map(|s| subset(0b011, s) || subset(0b101, s))
        .collect();
    let c = extract_antichain(&g, &Query::from_bools(&bits)).unwrap();
    let names: Vec<String> = c
        .elements()
        .iter()
        .map(|&s| m.automaton.state_name(s))
        .collect();
    assert_eq!(sorted(names), ["{a,b}", "{a,c}"]);

    let c1 = fig1(Fig1Variant::C);
    assert!(extract_antichain(&build_graph(&c1.automaton), &c1.query).is_err());
}

/// Two bottoms below two incomparable tops.
fn butterfly() -> Semiautomaton {
    Semiautomaton::new(
        4,
        vec!["x".into(), "y".into()],
        vec![vec![2, 3], vec![2, 3], vec![2, 2], vec![3, 3]],
        None,
    )
    .unwrap()
}

#[test]
fn join_semilattice_examples() {
    let m = fig2();
    let o = natural_order(&build_graph(&m.automaton)).unwrap();
    assert!(is_join_semilattice(&o).unwrap());
    let t = join_table(&o).unwrap().unwrap();
    for a in 0..8u32 {
        for b in 0..8u32 {
            assert_eq!(t.join(StateId(a), StateId(b)), StateId(a | b));
        }
    }
    assert!(is_join_semilattice(&PartialOrder::discrete(1).unwrap()).unwrap());
    let o = natural_order(&build_graph(&butterfly())).unwrap();
    assert!(!is_join_semilattice(&o).unwrap());
    assert!(join_table(&o).unwrap().is_none());
}

#[test]
fn semilattice_props_examples() {
    let m = fig2();
    let g = build_graph(&m.automaton);
    let v = check_semilattice_ft_props(&g, &m.query).unwrap();
    assert!(v.same_value.is_pass() && v.ft_reachable.is_pass());

    // A finite semilattice has a top, which is always free, so every
    // query on one has a free state.
    for seed in 0..20 {
        let q = random_query(8, 3, seed);
        assert!(brute_ft(&m.automaton, &q)[7]);
        let v = check_semilattice_ft_props(&g, &q).unwrap();
        assert!(!v.same_value.is_fail() && !v.ft_reachable.is_fail());
    }

    let gs = grow_only_set(
        &facts(&["a", "b", "c"]),
        true,
        Some(&Expr::parse("(count-ge 2)").unwrap()),
    )
    .unwrap();
    let g = build_graph(&gs.automaton);
    let v = check_semilattice_ft_props(&g, &gs.query).unwrap();
    assert!(v.same_value.is_pass() && v.ft_reachable.is_pass());
    let ft = brute_ft(&gs.automaton, &gs.query);
    assert!(ft_set(&ft)
        .iter()
        .all(|&s| gs.query.values()[s] == Value::Bool(true)));

    assert!(check_semilattice_ft_props(
        &build_graph(&butterfly()),
        &Query::from_bools(&[false; 4])
    )
    .is_err());
    let c = fig1(Fig1Variant::C);
    assert!(check_semilattice_ft_props(&build_graph(&c.automaton), &c.query).is_err());
}

fn identity_oracle(a: &Semiautomaton) -> Vec<usize> {
    (0..a.num_states())
        .filter(|&s| reach(a, s).iter().all(|&b| b))
        .collect()
}

#[test]
fn identity_examples() {
    let z6 = modular_counter(6).unwrap();
    let g = build_graph(&z6.automaton);
    assert_eq!(identity_states(&g).len(), 6);
    assert_eq!(identity_oracle(&z6.automaton).len(), 6);
    assert!(all_invertible(&g));

    let a = fig1(Fig1Variant::A);
    let g = build_graph(&a.automaton);
    assert_eq!(identity_states(&g), vec![StateId(0)]);
    assert_eq!(identity_oracle(&a.automaton), vec![0]);
    assert!(!all_invertible(&g));

    let one = Semiautomaton::new(1, vec!["x".into()], vec![vec![0]], Some(0)).unwrap();
    let g = build_graph(&one);
    assert_eq!(identity_states(&g), vec![StateId(0)]);
    assert!(all_invertible(&g));
}

#[test]
fn identity_matches_oracle_on_random() {
    for seed in 0..100 {
        let a = freeterm_core::models::random_automaton(12, 2, seed).unwrap();
        let g = build_graph(&a);
        let got: Vec<usize> = identity_states(&g).into_iter().map(|s| s.index()).collect();
        let oracle = identity_oracle(&a);
        assert_eq!(got, oracle, "seed {seed}");
        let invertible = (0..12).all(|s| oracle.iter().any(|&i| reach(&a, s)[i]));
        assert_eq!(all_invertible(&g), invertible, "seed {seed}");
    }
}

#[test]
fn inverse_curse_examples() {
    let z6 = modular_counter(6).unwrap();
    let g = build_graph(&z6.automaton);
    assert_eq!(
        check_inverse_curse(&g, &z6.query).unwrap(),
        PropVerdict::Pass
    );
    assert!(ft_set(&brute_ft(&z6.automaton, &z6.query)).is_empty());

    let c = Query::constant(6, 3i64.into());
    assert!(matches!(
        check_inverse_curse(&g, &c).unwrap(),
        PropVerdict::NotApplicable { .. }
    ));

    let z5 = modular_addition(5).unwrap();
    let g = build_graph(&z5.automaton);
    assert_eq!(
        check_inverse_curse(&g, &z5.query).unwrap(),
        PropVerdict::Pass
    );
    assert_eq!(identity_oracle(&z5.automaton).len(), 5);
    assert!(ft_set(&brute_ft(&z5.automaton, &z5.query)).is_empty());
}

#[test]
fn inverse_curse_on_random_strongly_connected() {
    for seed in 0..200 {
        let a = random_strongly_connected(20, 3, seed).unwrap();
        let q = random_query(20, 2 + (seed % 2) as usize, seed + 1000);
        if q.is_constant() {
            continue;
        }
        assert_eq!(
            check_inverse_curse(&build_graph(&a), &q).unwrap(),
            PropVerdict::Pass,
            "seed {seed}"
        );
        assert!(ft_set(&brute_ft(&a, &q)).is_empty());
    }
}

#[test]
fn commutativity_examples() {
    let m = fig2();
    assert!(is_commutative_update(&m.automaton));
    let single =
        Semiautomaton::from_fn(7, vec!["x".into()], Some(0), |s, _| (s * s + 1) % 7).unwrap();
    assert!(is_commutative_update(&single));

    let s = string_count(3).unwrap();
    assert!(!is_commutative_update(&s.automaton));
    assert!(is_commutative_query(&s.automaton, &s.query).unwrap());
    assert!(is_commutative_query_with_bound(&s.automaton, &s.query, 3).unwrap());
}

#[test]
fn commutativity_props_examples() {
    let m = fig2();
    let v = check_commutativity_ft_props(&m.automaton, &m.query).unwrap();
    assert!(v.same_value.is_pass() && v.ft_reachable.is_pass());

    let c = fig1(Fig1Variant::C);
    assert!(is_commutative_update(&c.automaton));
    let v = check_commutativity_ft_props(&c.automaton, &c.query).unwrap();
    assert!(v.same_value.is_pass());

    let t = two_phase_set(&facts(&["a"]), Some(&Expr::parse("a").unwrap())).unwrap();
    let v = check_commutativity_ft_props(&t.automaton, &t.query).unwrap();
    assert!(v.same_value.is_pass() && v.ft_reachable.is_pass());
    let ft = ft_set(&brute_ft(&t.automaton, &t.query));
    assert!(!ft.is_empty());
    assert!(ft
        .iter()
        .all(|&s| t.query.values()[s] == Value::Bool(false)));

    let no_start = Semiautomaton::new(1, vec!["x".into()], vec![vec![0]], None).unwrap();
    assert!(check_commutativity_ft_props(&no_start, &Query::from_bools(&[true])).is_err());
}

/// Query commutativity straight from the definition, over all pairs of
/// sequences up to `bound` labels from every state.
fn commutative_query_oracle(a: &Semiautomaton, q: &Query, bound: usize) -> bool {
    let k = a.num_labels();
    let mut seqs: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for s in &frontier {
            for l in 0..k {
                let mut t: Vec<usize> = s.clone();
                t.push(l);
                next.push(t);
            }
        }
        seqs.extend(next.iter().cloned());
        frontier = next;
    }
    let run = |s: usize, w: &[usize]| {
        w.iter().fold(s, |u, &l| {
            a.step(StateId(u as u32), freeterm_core::LabelId(l as u32))
                .index()
        })
    };
    for s in 0..a.num_states() {
        for x in &seqs {
            for y in &seqs {
                let xy = run(run(s, x), y);
                let yx = run(run(s, y), x);
                if q.values()[xy] != q.values()[yx] {
                    return false;
                }
            }
        }
    }
    true
}

#[test]
fn exact_query_commutativity_matches_enumeration() {
    for seed in 0..150 {
        let a = freeterm_core::models::random_automaton(5, 2, seed).unwrap();
        // Few distinct values make commutative queries common enough.
        let q = random_query(5, 2, seed * 31);
        let exact = is_commutative_query(&a, &q).unwrap();
        assert_eq!(exact, commutative_query_oracle(&a, &q, 4), "seed {seed}");
    }
    let s = string_count(3).unwrap();
    assert!(commutative_query_oracle(&s.automaton, &s.query, 4));
}
