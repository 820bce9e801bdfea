//! Spoilers for countable suprema and infima.
//!
//! Supremum: given increasing `g_0, g_1, …` and an upper bound `h`, build
//! another upper bound `f` with `f(⟨a_n, x⟩) = g_n(x)` and `h ≰ f`.
//! Infimum: given decreasing `g_0, g_1, …` and a lower bound `h`, build
//! another lower bound `f` with `f(a_e) = g*_e(a_e)` and `f ≰ h`, where
//! `g*_e = g_0 ∩ … ∩ g_e` reads radix tuples `(e_0, …, e_e, x)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::certificate::{
    Action as AnyAction, BoundedAnswer, BoundedHaltingOracle, Evidence, HaltAnswer, Measure, OracleRef, Restraint,
    StageCertificate, Status,
};
use super::{claim, claim_with, mismatch, Claim, Params, Transcript};
use crate::error::Error;
use crate::machine::{decode, encode, run_dialogue, Budget, Native, Program};
use crate::pairing::{decode_radix, encode_radix, pair, triple, unpair, Nat};
use crate::partialfn::{answer_of, OracleAnswer, PartialFn};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum SupCase {
    /// Case (1): `Φ_e[f](input)` asks `⟨column, x⟩` beyond `a_e`; that point stays undefined.
    Declared { input: Nat, point: Nat, column: Nat, x: Nat },
    /// Case (2): no tested run looks beyond `a_e`; `escape` is an input where `Φ_e[f]` misses `h`.
    Local { escape: Option<Nat> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupAction {
    pub e: Nat,
    pub a_e: Nat,
    pub case: SupCase,
    pub next: Nat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfAction {
    pub e: Nat,
    /// The tuple `(e_0, …, e_e, x)` chosen, with `x` and `g*_e(a_e)`.
    pub a_e: Option<Nat>,
    pub x: Option<Nat>,
    pub value: Option<Nat>,
    /// Candidates passed over because `g*_e` or `Φ_e[h]` was only budget-limited.
    pub skipped_unknown: u64,
    /// Whether the nested binary meet agrees with `g*_e` at `a_e`.
    pub fold_agrees: Option<bool>,
}

fn g_name(i: usize) -> String {
    format!("g{i}")
}

fn gs_of(t: &Transcript) -> Vec<PartialFn> {
    (0..).map_while(|i| t.objects.get(&g_name(i)).cloned()).collect()
}

fn named(gs: &[PartialFn], h: &PartialFn) -> BTreeMap<String, PartialFn> {
    let mut objects: BTreeMap<String, PartialFn> = gs.iter().enumerate().map(|(i, g)| (g_name(i), g.clone())).collect();
    objects.insert("h".into(), h.clone());
    objects
}

/// Claims that `gs` is strictly monotone on `grid`, increasing when `up`.
fn strictness(
    objects: &BTreeMap<String, PartialFn>,
    n: usize,
    up: bool,
    index_bound: Nat,
    grid: &[Nat],
    b: &Budget,
) -> Result<Vec<Claim>, Error> {
    let mut claims = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let (lo, hi) = if up { (g_name(i), g_name(i + 1)) } else { (g_name(i + 1), g_name(i)) };
        claims.push(claim(&format!("{lo} reduces to {hi}"), (&lo, &hi), objects, index_bound, grid, b, true)?);
        claims.push(claim(&format!("{hi} does not reduce to {lo}"), (&hi, &lo), objects, index_bound, grid, b, false)?);
    }
    Ok(claims)
}

/// Column table `⟨a_n, x⟩ ↦ g_n(x)` for `x < width`.
fn columns(gs: &[PartialFn], starts: &[Nat], width: Nat, fuel: u64) -> Result<BTreeMap<Nat, Nat>, Error> {
    let mut out = BTreeMap::new();
    for (g, &a) in gs.iter().zip(starts) {
        for x in 0..width {
            match g.eval(x, fuel) {
                OracleAnswer::Defined(v) => {
                    let k = pair(a, x).ok_or_else(|| Error::IndexOverflow(format!("column {a}, row {x}")))?;
                    out.insert(k, v);
                }
                OracleAnswer::Undefined => {}
                OracleAnswer::Unknown => return Err(Error::ContractAbort(format!("a column function is unknown at {x}"))),
            }
        }
    }
    Ok(out)
}

/// Finds the first logged run that queries a column beyond `a_e`.
fn beyond(log: &[BoundedAnswer], a_e: Nat) -> Option<(Nat, Nat)> {
    log.iter().find_map(|a| match a.answer {
        HaltAnswer::Frozen { query } if unpair(query).0 > a_e => Some((a.input, query)),
        _ => None,
    })
}

fn misses(out: &crate::machine::DialogueOutcome, v: Nat) -> bool {
    out.never_halts() || out.halted().is_some_and(|w| w != v)
}

/// Builds `f ≥ g_n` for every `n`, defeating `Φ_0, …, Φ_{E}` as reductions of
/// `h` on `dom(h) ∩ [0, input_bound)`. Columns hold `x < column_width`.
pub fn spoil_supremum(
    gs: &[PartialFn],
    h: &PartialFn,
    e_max: Nat,
    input_bound: Nat,
    column_width: Nat,
    index_bound: Nat,
    b: &Budget,
) -> Result<Transcript, Error> {
    let fuel = b.oracle_fuel;
    let grid: Vec<Nat> = (0..input_bound).collect();
    let mut objects = named(gs, h);
    let mut claims = strictness(&objects, gs.len(), true, index_bound, &grid, b)?;
    for i in 0..gs.len() {
        let gi = g_name(i);
        claims.push(claim(&format!("h does not reduce to {gi}"), ("h", &gi), &objects, index_bound, &grid, b, false)?);
    }
    let dom_h: Vec<Nat> = grid.iter().copied().filter(|&n| h.eval(n, fuel).is_defined()).collect();

    let mut starts = vec![0];
    let mut stages = Vec::new();
    for e in 0..=e_max {
        let p = decode(e);
        let a_e = starts[e as usize];
        let built = columns(gs, &starts, column_width, fuel)?;
        let current = PartialFn::table(built.clone());
        let mut oracle = BoundedHaltingOracle::new(*b);
        let mut found = None;
        for &n in &dom_h {
            if let (HaltAnswer::Frozen { query }, _) = oracle.ask("locality", &p, &current, n) {
                if unpair(query).0 > a_e {
                    found = Some((n, query));
                    break;
                }
            }
        }
        let log = oracle.take_log();
        let mut evidence = Vec::new();
        let (case, next, status) = match found {
            Some((input, point)) => {
                let (column, x) = unpair(point);
                evidence.push(Evidence::run("declared", &p, OracleRef::inline(current.clone()), &objects, input, b));
                (SupCase::Declared { input, point, column, x }, column + 1, Status::Satisfied)
            }
            None => {
                let escape = dom_h.iter().copied().find(|&n| {
                    let v = h.eval(n, fuel).value().expect("n is in dom(h)");
                    misses(&run_dialogue(&p, &current, n, b), v)
                });
                let status = match escape {
                    Some(n) => {
                        evidence.push(Evidence::run("escape", &p, OracleRef::inline(current.clone()), &objects, n, b));
                        Status::Satisfied
                    }
                    None => Status::Inconclusive { reason: "Φ_e[f] agrees with h on every tested input".into() },
                };
                (SupCase::Local { escape }, a_e + 1, status)
            }
        };
        let mut cert = StageCertificate::new(e, AnyAction::SupSpoiler(SupAction { e, a_e, case, next }), status);
        cert.evidence = evidence;
        cert.bounded_oracle_answers = log;
        cert.restraints.push(Restraint::snapshot("f", &built, Measure::Column, a_e + 1));
        stages.push(cert);
        starts.push(next);
    }
    while starts.len() < gs.len() {
        let last = *starts.last().expect("starts is nonempty");
        starts.push(last + 1);
    }
    objects.insert("f".into(), PartialFn::table(columns(gs, &starts, column_width, fuel)?));
    // Every stage's run must give the same outcome over the final f.
    for s in &mut stages {
        let AnyAction::SupSpoiler(act) = &s.action else { unreachable!() };
        let label = if matches!(act.case, SupCase::Declared { .. }) { "declared" } else { "escape" };
        if let Ok(ev) = s.find(label) {
            let ev = Evidence::run(format!("{label} over f"), &ev.program, OracleRef::named("f"), &objects, ev.input, b);
            s.evidence.push(ev);
        }
    }
    let width: Vec<Nat> = (0..column_width).collect();
    for (i, &a) in starts.iter().enumerate().take(gs.len()) {
        let w = Program::native(Native::QueryPair { column: a });
        let gi = g_name(i);
        claims.push(claim_with(&format!("{gi} reduces to f"), (&gi, "f"), &objects, &w, &width, b)?);
    }
    if stages.iter().all(|s| s.status == Status::Satisfied) {
        claims.push(claim("h does not reduce to f", ("h", "f"), &objects, e_max, &grid, b, false)?);
    }
    let params = Params::SupSpoiler { e_max, input_bound, column_width, index_bound };
    Ok(Transcript::new(params, *b, claims, objects, stages))
}

fn tuple(legs: &[Nat], x: Nat) -> Option<Nat> {
    let mut comps = legs.to_vec();
    comps.push(x);
    encode_radix(&comps)
}

/// `g*_e` through nested binary meets: `((g_0 ∩ g_1) ∩ g_2) ∩ …`, asked at
/// the matching nested triple.
fn fold_eval(gs: &[PartialFn], legs: &[Nat], x: Nat, b: &Budget) -> Result<OracleAnswer, Error> {
    let mut acc = gs[0].clone();
    let mut index = legs[0];
    for i in 1..legs.len() {
        let left = index;
        acc = acc.meet(&gs[i], *b);
        index = encode(&Program::native(Native::MeetQuery { left, right: legs[i] }))?;
        if i + 1 == legs.len() {
            let q = triple(left, legs[i], x).ok_or_else(|| Error::IndexOverflow("meet triple".into()))?;
            return Ok(acc.eval(q, b.oracle_fuel));
        }
    }
    Ok(answer_of(&run_dialogue(&decode(index), &acc, x, b)))
}

/// Builds `f ≤ g_n` for every `n`, defeating `Φ_0, …, Φ_{E}` as reductions
/// of `f` to `h`. Stage `e` picks `x < input_bound` and sets `a_e` to the
/// tuple of `legs[0..=e]` and `x`.
pub fn spoil_infimum(
    gs: &[PartialFn],
    h: &PartialFn,
    e_max: Nat,
    legs: &[Nat],
    input_bound: Nat,
    index_bound: Nat,
    b: &Budget,
) -> Result<Transcript, Error> {
    let fuel = b.oracle_fuel;
    let grid: Vec<Nat> = (0..input_bound).collect();
    let mut objects = named(gs, h);
    let mut claims = strictness(&objects, gs.len(), false, index_bound, &grid, b)?;
    let echo = Program::echo();
    for i in 0..gs.len() {
        let gi = g_name(i);
        claims.push(claim_with(&format!("h reduces to {gi}"), ("h", &gi), &objects, &echo, &grid, b)?);
    }
    let stage_count = (e_max + 1).min(gs.len() as Nat).min(legs.len() as Nat);
    for e in 0..stage_count as usize {
        objects.insert(format!("gstar{e}"), PartialFn::multi_meet(&gs[..=e], *b));
    }

    let mut table = BTreeMap::new();
    let mut previous: Option<Nat> = None;
    let mut stages = Vec::new();
    for e in 0..stage_count {
        let p = decode(e);
        let ei = e as usize;
        let gstar = &objects[&format!("gstar{ei}")];
        let mut skipped_unknown = 0;
        let mut chosen = None;
        for x in 0..input_bound {
            let Some(a) = tuple(&legs[..=ei], x) else { continue };
            if previous.is_some_and(|p| a <= p) {
                continue;
            }
            let v = match gstar.eval(a, fuel) {
                OracleAnswer::Defined(v) => v,
                OracleAnswer::Undefined => continue,
                OracleAnswer::Unknown => {
                    skipped_unknown += 1;
                    continue;
                }
            };
            let out = run_dialogue(&p, h, a, b);
            if misses(&out, v) {
                chosen = Some((a, x, v));
                break;
            }
            if !out.is_final() {
                skipped_unknown += 1;
            }
        }
        let mut evidence = Vec::new();
        let action = match chosen {
            Some((a, x, v)) => {
                evidence.push(Evidence::run("chosen", &p, OracleRef::named("h"), &objects, a, b));
                for (i, &leg) in legs[..=ei].iter().enumerate() {
                    evidence.push(Evidence::run(format!("leg {i}"), &decode(leg), OracleRef::named(&g_name(i)), &objects, x, b));
                }
                let fold = fold_eval(gs, &legs[..=ei], x, b)?;
                table.insert(a, v);
                previous = Some(a);
                InfAction { e, a_e: Some(a), x: Some(x), value: Some(v), skipped_unknown, fold_agrees: Some(fold == OracleAnswer::Defined(v)) }
            }
            None => InfAction { e, a_e: None, x: None, value: None, skipped_unknown, fold_agrees: None },
        };
        let status = if action.a_e.is_some() {
            Status::Satisfied
        } else {
            Status::Inconclusive { reason: format!("no tuple with x < {input_bound} escapes Φ_e[h]") }
        };
        let mut cert = StageCertificate::new(e, AnyAction::InfSpoiler(action), status);
        cert.evidence = evidence;
        cert.restraints.push(Restraint::snapshot("f", &table, Measure::Point, previous.map_or(0, |a| a + 1)));
        stages.push(cert);
    }
    let dom_f: Vec<Nat> = table.keys().copied().collect();
    objects.insert("f".into(), PartialFn::table(table.clone()));
    for n in 0..stage_count as usize {
        let early: Vec<(Nat, Nat)> = table.iter().filter(|(&a, _)| decode_radix(a).is_some_and(|c| c.len() < n + 2)).map(|(&a, &v)| (a, v)).collect();
        let w = Program::native(Native::Override {
            table: early,
            program: Box::new(Program::native(Native::TruncateQuery { keep: n as Nat })),
        });
        let gs_n = format!("gstar{n}");
        claims.push(claim_with(&format!("f reduces to {gs_n}"), ("f", &gs_n), &objects, &w, &dom_f, b)?);
    }
    // Only Φ_0, …, Φ_E are defeated, so the claim is checked up to index E.
    if !dom_f.is_empty() && stages.iter().all(|s| s.status == Status::Satisfied) {
        claims.push(claim("f does not reduce to h", ("f", "h"), &objects, e_max, &dom_f, b, false)?);
    }
    let params = Params::InfSpoiler { e_max, legs: legs.to_vec(), input_bound, index_bound };
    Ok(Transcript::new(params, *b, claims, objects, stages))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let gs = gs_of(t);
    let h = t.object("h")?;
    match &t.header.params {
        &Params::SupSpoiler { e_max, input_bound, column_width, index_bound } => {
            spoil_supremum(&gs, h, e_max, input_bound, column_width, index_bound, &b)
        }
        Params::InfSpoiler { e_max, legs, input_bound, index_bound } => {
            spoil_infimum(&gs, h, *e_max, legs, *input_bound, *index_bound, &b)
        }
        _ => unreachable!(),
    }
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    match &t.header.params {
        Params::SupSpoiler { input_bound, column_width, .. } => check_sup(t, *input_bound, *column_width),
        Params::InfSpoiler { legs, .. } => check_inf(t, legs),
        _ => unreachable!(),
    }
}

fn check_sup(t: &Transcript, input_bound: Nat, column_width: Nat) -> Result<(), Error> {
    let b = t.header.budget;
    let gs = gs_of(t);
    let h = t.object("h")?;
    let f = t.object("f")?;
    let dom_h: Vec<Nat> = (0..input_bound).filter(|&n| h.eval(n, b.oracle_fuel).is_defined()).collect();
    let mut starts = vec![0];
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let fail = |d: String| mismatch(&loc, d);
        let AnyAction::SupSpoiler(act) = &s.action else { return Err(fail("wrong action kind".into())) };
        if act.a_e != *starts.last().expect("starts is nonempty") {
            return Err(fail("column start differs from the previous stage".into()));
        }
        let current = PartialFn::table(columns(&gs, &starts, column_width, b.oracle_fuel)?);
        let asked: Vec<Nat> = s.bounded_oracle_answers.iter().map(|a| a.input).collect();
        if s.bounded_oracle_answers.iter().any(|a| a.oracle != OracleRef::inline(current.clone()) || a.program != decode(act.e)) {
            return Err(fail("locality questions were not asked over f at this stage".into()));
        }
        match &act.case {
            SupCase::Declared { input, point, column, x } => {
                if beyond(&s.bounded_oracle_answers, act.a_e) != Some((*input, *point)) || pair(*column, *x) != Some(*point) {
                    return Err(fail("declared point is not the first query beyond a_e".into()));
                }
                if act.next != column + 1 || f.eval(*point, 1).is_defined() {
                    return Err(fail("declared point is defined or the next column is wrong".into()));
                }
                let over_f = s.find("declared over f").map_err(fail)?;
                if over_f.outcome.frozen() != Some(*point) {
                    return Err(fail("the final f does not freeze at the declared point".into()));
                }
            }
            SupCase::Local { escape } => {
                if asked != dom_h || beyond(&s.bounded_oracle_answers, act.a_e).is_some() || act.next != act.a_e + 1 {
                    return Err(fail("locality log is incomplete or looks beyond a_e".into()));
                }
                if let Some(n) = escape {
                    let v = h.eval(*n, b.oracle_fuel).value().ok_or_else(|| fail("escape outside dom(h)".into()))?;
                    let ev = s.find("escape").map_err(fail)?;
                    let over_f = s.find("escape over f").map_err(fail)?;
                    if ev.input != *n || !misses(&ev.outcome, v) || over_f.outcome != ev.outcome {
                        return Err(fail("escape evidence does not miss h over the final f".into()));
                    }
                }
            }
        }
        starts.push(act.next);
    }
    while starts.len() < gs.len() {
        let last = *starts.last().expect("starts is nonempty");
        starts.push(last + 1);
    }
    if f.entries() != Some(&columns(&gs, &starts, column_width, b.oracle_fuel)?) {
        return Err(mismatch("objects", "f is not the column table of the g_n".into()));
    }
    Ok(())
}

fn check_inf(t: &Transcript, legs: &[Nat]) -> Result<(), Error> {
    let b = t.header.budget;
    let gs = gs_of(t);
    let h = t.object("h")?;
    let f = t.object("f")?;
    let mut graph = BTreeMap::new();
    let mut previous = None;
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let fail = |d: String| mismatch(&loc, d);
        let AnyAction::InfSpoiler(act) = &s.action else { return Err(fail("wrong action kind".into())) };
        let (Some(a), Some(x), Some(v)) = (act.a_e, act.x, act.value) else { continue };
        let ei = act.e as usize;
        if tuple(&legs[..=ei], x) != Some(a) || previous.is_some_and(|p| a <= p) {
            return Err(fail("a_e is not a fresh tuple of the legs".into()));
        }
        let gstar = t.object(&format!("gstar{ei}"))?;
        if gstar.eval(a, b.oracle_fuel) != OracleAnswer::Defined(v) {
            return Err(fail("recorded value differs from g*_e(a_e)".into()));
        }
        let chosen = s.find("chosen").map_err(fail)?;
        if chosen.input != a || chosen.oracle != OracleRef::named("h") || !misses(&chosen.outcome, v) {
            return Err(fail("Φ_e[h](a_e) does not miss g*_e(a_e)".into()));
        }
        if run_dialogue(&decode(act.e), h, a, &b) != chosen.outcome {
            return Err(fail("chosen evidence does not reproduce".into()));
        }
        for i in 0..=ei {
            let leg = s.find(&format!("leg {i}")).map_err(fail)?;
            if leg.outcome.halted() != Some(v) {
                return Err(fail(format!("leg {i} does not halt with the common value")));
            }
        }
        let fold = fold_eval(&gs, &legs[..=ei], x, &b)?;
        if act.fold_agrees != Some(fold == OracleAnswer::Defined(v)) || fold != OracleAnswer::Defined(v) {
            return Err(fail("nested binary meet disagrees with g*_e".into()));
        }
        graph.insert(a, v);
        previous = Some(a);
    }
    if f.entries() != Some(&graph) {
        return Err(mismatch("objects", "f is not supported exactly on the chosen tuples".into()));
    }
    Ok(())
}
