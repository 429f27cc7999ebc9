use std::path::PathBuf;

use freeterm_core::algebra::{
    algebra_report, check_antichain_property, check_commutativity_ft_props, check_inverse_curse,
    check_maximal_states_ft, check_semilattice_ft_props, check_threshold_ft, check_top_in_range_ft,
    extract_antichain, is_acyclic, minimal_true_states, natural_order, PropVerdict,
};
use freeterm_core::dot::{to_dot, DotOptions};
use freeterm_core::format::{to_json, AutomatonFile};
use freeterm_core::ft::{classify_verdict, FtReport};
use freeterm_core::minimize::{
    check_equivalence, check_minimal_ft_acyclicity, collapse_fixpoint, minimize_moore,
};
use freeterm_core::{
    all_ft_states, build_graph, ft_oracle, Antichain, Error, Query, Semiautomaton, StateId,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{AnalyzeArgs, CheckArgs, Global, MinimizeArgs, Prop};
use crate::io::{emit, load_automaton, write, CliResult, Failure, EXIT_FAIL};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Unmet preconditions become a "not applicable" verdict.
fn or_not_applicable<T: Serialize>(r: freeterm_core::Result<T>) -> CliResult<Value> {
    match r {
        Ok(v) => Ok(to_value(&v)),
        Err(Error::Precondition(reason)) => Ok(to_value(&PropVerdict::not_applicable(reason))),
        Err(e) => Err(e.into()),
    }
}

fn names(a: &Semiautomaton, states: impl IntoIterator<Item = StateId>) -> Vec<String> {
    states.into_iter().map(|s| a.state_name(s)).collect()
}

pub fn run_analyze(args: &AnalyzeArgs, global: &Global) -> CliResult<u8> {
    let file = load_automaton(&args.input)?;
    let (a, q) = (&file.automaton, &file.query);
    let g = build_graph(a);
    let verdict = all_ft_states(&g, q)?;
    let category = classify_verdict(&g, q, &verdict);
    let ft = FtReport::new(&verdict, category, |s| a.state_name(s));
    let algebra = algebra_report(a, &g, q)?;
    let antichain = if algebra.acyclic && verdict.num_ft() > 0 {
        extract_antichain(&g, q)
            .ok()
            .map(|c| names(a, c.elements().iter().copied()))
    } else {
        None
    };
    let report = json!({
        "states": a.num_states(),
        "labels": a.num_labels(),
        "start": a.start().map(|s| a.state_name(s)),
        "ft_states": ft.ft_states,
        "category": ft.category,
        "witnesses": ft.witnesses,
        "algebra": algebra,
        "antichain": antichain,
        "inverse_curse": check_inverse_curse(&g, q)?,
        "semilattice": or_not_applicable(check_semilattice_ft_props(&g, q))?,
        "commutativity": or_not_applicable(check_commutativity_ft_props(a, q))?,
    });
    if let Some(dot) = &args.dot {
        let opts = DotOptions {
            accept: None,
            highlight: Some(verdict.per_state().to_vec()),
        };
        write(dot, &to_dot(a, q, &opts))?;
    }
    emit(&report, global.format, args.out.as_deref())?;
    Ok(0)
}

fn sidecar_path(out: &std::path::Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".map.json");
    PathBuf::from(name)
}

pub fn run_minimize(args: &MinimizeArgs, global: &Global) -> CliResult<u8> {
    let input = load_automaton(args.input())?;
    let (a, q) = (&input.automaton, &input.query);
    let result = if args.collapse_only {
        collapse_fixpoint(a, q)?
    } else {
        minimize_moore(a, q)?
    };
    let dropped = result.map.old_to_new.iter().filter(|t| t.is_none()).count();
    if dropped > 0 {
        log::info!("dropped {dropped} states unreachable from the start state");
    }
    let equivalent = check_equivalence(a, q, &result.automaton, &result.query)?.is_none();
    let mut out = AutomatonFile::new(result.automaton.clone(), result.query.clone());
    out.provenance = input.provenance.clone();
    write(&args.out, &to_json(&out))?;

    let old_to_new: serde_json::Map<String, Value> = a
        .states()
        .map(|s| {
            let target = result.map.image(s).map(|t| result.automaton.state_name(t));
            (a.state_name(s), to_value(&target))
        })
        .collect();
    let sidecar = json!({
        "old_to_new": result.map.old_to_new,
        "new_states": result.map.new_states,
        "by_name": old_to_new,
    });
    let map_path = sidecar_path(&args.out);
    write(
        &map_path,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&sidecar).expect("plain data")
        ),
    )?;
    if let Some(dot) = &args.dot {
        let g = build_graph(&result.automaton);
        let ft = all_ft_states(&g, &result.query)?;
        let opts = DotOptions {
            accept: None,
            highlight: Some(ft.per_state().to_vec()),
        };
        write(dot, &to_dot(&result.automaton, &result.query, &opts))?;
    }
    let report = json!({
        "input_states": a.num_states(),
        "output_states": result.automaton.num_states(),
        "dropped_unreachable": dropped,
        "equivalent": equivalent,
        "out": args.out.display().to_string(),
        "map": map_path.display().to_string(),
    });
    emit(&report, global.format, None)?;
    Ok(if equivalent { 0 } else { EXIT_FAIL })
}

fn differing(a: &Semiautomaton, x: &[bool], y: &[bool]) -> Vec<StateId> {
    a.states()
        .filter(|s| x[s.index()] != y[s.index()])
        .collect()
}

fn pick(v: Value, field: &str) -> Value {
    match v.get(field) {
        Some(inner) => inner.clone(),
        None => v,
    }
}

/// Verdict of one proposition as JSON.
pub fn check_prop(a: &Semiautomaton, q: &Query, prop: Prop) -> CliResult<Value> {
    let g = build_graph(a);
    let acyclic = is_acyclic(&g);
    let cyclic = || {
        to_value(&PropVerdict::not_applicable(
            "graph is cyclic, no natural order",
        ))
    };
    Ok(match prop {
        Prop::OracleAgreement => {
            let fast = all_ft_states(&g, q)?;
            let slow = ft_oracle(&g, q)?;
            let diff = differing(a, fast.per_state(), slow.per_state());
            to_value(&if diff.is_empty() {
                PropVerdict::Pass
            } else {
                PropVerdict::fail(diff, "linear algorithm and oracle disagree")
            })
        }
        Prop::MaximalStatesFt if acyclic => {
            to_value(&check_maximal_states_ft(&g, &natural_order(&g)?, q)?)
        }
        Prop::TopInRangeFt if acyclic => to_value(&check_top_in_range_ft(
            &g,
            &natural_order(&g)?,
            q,
            &q.order_or_natural(),
        )?),
        Prop::ThresholdFt if acyclic => {
            if !q.is_boolean() {
                to_value(&PropVerdict::not_applicable("query is not Boolean"))
            } else {
                let order = natural_order(&g)?;
                let c = Antichain::new(&order, minimal_true_states(&g, q)?)?;
                to_value(&check_threshold_ft(&g, &order, &c)?)
            }
        }
        Prop::MaximalStatesFt | Prop::TopInRangeFt | Prop::ThresholdFt => cyclic(),
        Prop::Antichain => to_value(&check_antichain_property(&g, q)?),
        Prop::SemilatticeFtSameValue => pick(
            or_not_applicable(check_semilattice_ft_props(&g, q))?,
            "same_value",
        ),
        Prop::SemilatticeFtsReachable => pick(
            or_not_applicable(check_semilattice_ft_props(&g, q))?,
            "ft_reachable",
        ),
        Prop::InverseCurse => to_value(&check_inverse_curse(&g, q)?),
        Prop::CommutativitySameValue => pick(
            or_not_applicable(check_commutativity_ft_props(a, q))?,
            "same_value",
        ),
        Prop::CommutativityFtsReachable => pick(
            or_not_applicable(check_commutativity_ft_props(a, q))?,
            "ft_reachable",
        ),
        Prop::MinimalFtAcyclic => to_value(&check_minimal_ft_acyclicity(a, q)?),
        Prop::CollapsedFixpoint => {
            let ft = all_ft_states(&g, q)?;
            let loops: Vec<bool> = a.states().map(|s| g.only_self_loops(s)).collect();
            let diff = differing(a, ft.per_state(), &loops);
            to_value(&if diff.is_empty() {
                PropVerdict::Pass
            } else {
                PropVerdict::fail(diff, "free states and self-loop-only states differ")
            })
        }
    })
}

pub fn run_check(args: &CheckArgs, global: &Global) -> CliResult<u8> {
    let file = load_automaton(&args.input)?;
    let verdict = check_prop(&file.automaton, &file.query, args.prop)?;
    let failed = verdict.get("status").and_then(Value::as_str) == Some("fail");
    let name = clap::ValueEnum::to_possible_value(&args.prop).map(|p| p.get_name().to_owned());
    let mut report = json!({ "prop": name });
    if let (Value::Object(r), Value::Object(v)) = (&mut report, verdict) {
        r.extend(v);
    } else {
        return Err(Failure::input("verdict is not an object"));
    }
    emit(&report, global.format, None)?;
    Ok(if failed { EXIT_FAIL } else { 0 })
}
