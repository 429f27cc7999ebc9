use freeterm_core::format::{to_json, AutomatonFile};
use freeterm_core::models::{generate, CounterQuery, Fig1Variant, ModelSpec, TcQuery};
use serde_json::json;

use crate::cli::{GenArgs, GenKind, Global};
use crate::io::{emit, load_json, write, CliResult, Failure};

fn need<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| Failure::input(format!("missing --{flag}")))
}

/// Splits a comma list at top level, so `R(1,2),S(3)` gives two items.
pub fn split_list(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_owned());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_owned());
    }
    out
}

fn parse_edges(text: &str) -> CliResult<Vec<(u32, u32)>> {
    split_list(text)
        .iter()
        .map(|e| {
            let (a, b) = e
                .split_once('-')
                .ok_or_else(|| Failure::input(format!("edge {e:?} is not `u-v`")))?;
            let n = |s: &str| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Failure::input(format!("bad node in edge {e:?}")))
            };
            Ok((n(a)?, n(b)?))
        })
        .collect()
}

fn parse_tc_query(text: &str) -> CliResult<TcQuery> {
    if text == "cycle" {
        return Ok(TcQuery::Cycle);
    }
    let bad = || Failure::input(format!("expected `path:S,T` or `cycle`, got {text:?}"));
    let (s, t) = text
        .strip_prefix("path:")
        .and_then(|p| p.split_once(','))
        .ok_or_else(bad)?;
    Ok(TcQuery::Path(
        s.trim().parse().map_err(|_| bad())?,
        t.trim().parse().map_err(|_| bad())?,
    ))
}

fn counter_query(args: &GenArgs) -> CliResult<CounterQuery> {
    args.counter_query
        .as_deref()
        .map_or(Ok(CounterQuery::Sum), |s| s.parse().map_err(Failure::input))
}

pub fn spec_from_args(args: &GenArgs, seed: u64) -> CliResult<ModelSpec> {
    let universe = || need(&args.universe, "universe").map(|u| split_list(&u));
    Ok(match args.kind {
        GenKind::Fig1 => ModelSpec::Fig1 {
            variant: need(&args.variant, "variant")?
                .parse::<Fig1Variant>()
                .map_err(Failure::input)?,
        },
        GenKind::PowersetUnion => ModelSpec::PowersetUnion {
            universe: universe()?,
            query: need(&args.query, "query")?,
        },
        GenKind::GrowOnlySet => ModelSpec::GrowOnlySet {
            universe: universe()?,
            with_merge: !args.no_merge_labels,
            query: args.query.clone(),
        },
        GenKind::TwoPhaseSet => ModelSpec::TwoPhaseSet {
            universe: universe()?,
            query: args.query.clone(),
        },
        GenKind::GCounter => ModelSpec::GCounter {
            replicas: need(&args.replicas, "replicas")?,
            cap: need(&args.cap, "cap")?,
            with_merge: !args.no_merge_labels,
            query: counter_query(args)?,
        },
        GenKind::PnCounter => ModelSpec::PnCounter {
            replicas: need(&args.replicas, "replicas")?,
            cap: need(&args.cap, "cap")?,
            query: counter_query(args)?,
        },
        GenKind::TcFixpoint => ModelSpec::TcFixpoint {
            edges: parse_edges(&need(&args.edges, "edges")?)?,
            query: parse_tc_query(&need(&args.tc_query, "tc-query")?)?,
        },
        GenKind::ModularCounter => ModelSpec::ModularCounter {
            n: need(&args.n, "n")?,
        },
        GenKind::ModularAddition => ModelSpec::ModularAddition {
            n: need(&args.n, "n")?,
        },
        GenKind::StringCount => ModelSpec::StringCount {
            cap: need(&args.n, "n")?,
        },
        GenKind::RandomAcyclic => ModelSpec::RandomAcyclic {
            states: need(&args.states, "states")?,
            labels: need(&args.labels, "labels")?,
            values: args.values.unwrap_or(2),
            seed,
        },
        GenKind::RandomStronglyConnected => ModelSpec::RandomStronglyConnected {
            states: need(&args.states, "states")?,
            labels: need(&args.labels, "labels")?,
            values: args.values.unwrap_or(2),
            seed,
        },
        GenKind::Spec => load_json(&need(&args.spec, "spec")?)?,
    })
}

pub fn run(args: &GenArgs, global: &Global) -> CliResult<u8> {
    let spec = spec_from_args(args, global.seed)?;
    let model = generate(&spec)?;
    let n = model.automaton.num_states();
    let k = model.automaton.num_labels();
    let mut file = AutomatonFile::new(model.automaton, model.query);
    file.provenance = Some(model.provenance);
    write(&args.out, &to_json(&file))?;
    log::info!("wrote {n} states, {k} labels to {}", args.out.display());
    let report = json!({
        "out": args.out.display().to_string(),
        "states": n,
        "labels": k,
        "spec": spec,
    });
    emit(&report, global.format, None)?;
    Ok(0)
}
