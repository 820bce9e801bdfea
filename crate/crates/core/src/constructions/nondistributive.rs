//! Non-distributivity: build `f : ω×2×2 → ω` and `g, h : ω → 2` with
//! `(f ⊕ g) ∩ (f ⊕ h) ≰ f ⊕ (g ∩ h)`.
//!
//! Requirement `R_e` is met at level `n_e`: with `c`, `d` the indices of
//! `Ψ = LevelRead{n_e, 0}` and `Γ = LevelRead{n_e, 1}`, both auxiliary
//! functionals output `f(n_e, g(n_e), 0) = f(n_e, h(n_e), 1) = v` on input `x`,
//! while `Φ_e[f ⊕ (g ∩ h)](⟨c, d, x⟩)` freezes, diverges, or outputs `w ≠ v`.
//! The strategy simulates that computation round by round and answers meet
//! queries by looking inside both legs. Levels skipped by a declaration stay
//! undefined.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::certificate::{Action as AnyAction, Evidence, Measure, OracleRef, Restraint, StageCertificate, Status};
use super::{mismatch, Params, Transcript};
use crate::error::Error;
use crate::machine::{decode, encode, run_dialogue, Budget, DialogueOutcome, ExhaustReason, Meter, Native, Outcome, Program, Step};
use crate::pairing::{triple, untriple, Nat};
use crate::partialfn::{OracleAnswer, PartialFn};

/// Finite approximations at the start of a stage: everything below level
/// `n` is settled, nothing at or above it is defined.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NondistributiveState {
    pub f: BTreeMap<Nat, Nat>,
    pub g: BTreeMap<Nat, Nat>,
    pub h: BTreeMap<Nat, Nat>,
    pub n: Nat,
    /// The input `x` fed to `Ψ`, `Γ` and `Φ_e`.
    pub x: Nat,
    /// Points promised to stay undefined forever.
    pub declared: BTreeSet<(Side, Nat)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    F,
    G,
    H,
}

/// How a round that did not end the stage was answered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub query: Nat,
    /// `f_below` for a settled `f` point, `2b` or `3d` for a meet query.
    pub case: String,
    pub answer: Nat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Terminal {
    /// `Φ_e` output `w` after settled queries only.
    #[serde(rename = "1a")]
    Output { w: Nat },
    /// `Φ_e` itself provably never halts.
    #[serde(rename = "1a_divergent")]
    Divergent,
    /// `Φ_e` asked a settled `f` point outside `dom(f)`.
    #[serde(rename = "1a_frozen")]
    FrozenBelow { query: Nat },
    /// `Φ_e` asked an `f` point of level `≥ n_e`, now declared undefined.
    #[serde(rename = "1b")]
    HighF { point: Nat },
    /// A meet leg never halts on settled values.
    #[serde(rename = "2a")]
    LegStuck { query: Nat },
    /// Both legs halt on settled values with different outputs.
    #[serde(rename = "2b_disagree")]
    LegsDisagree { query: Nat },
    /// A leg asks a point above `n_e`, now declared undefined.
    #[serde(rename = "2c")]
    LegHigh { query: Nat, side: Side, point: Nat },
    #[serde(rename = "3a")]
    ComboStuck { query: Nat, combo: (Nat, Nat) },
    #[serde(rename = "3b")]
    ComboHigh { query: Nat, combo: (Nat, Nat), side: Side, point: Nat },
    #[serde(rename = "3c")]
    ComboDisagree { query: Nat, combo: (Nat, Nat) },
    /// Every round continued until the round cap: presumed non-halting.
    #[serde(rename = "round_cap")]
    RoundCap,
    #[serde(rename = "inconclusive")]
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub e: Nat,
    /// Levels passed over because a declaration makes them unusable.
    pub skipped: Vec<Nat>,
    pub n_e: Nat,
    pub n_next: Nat,
    pub c: Nat,
    pub d: Nat,
    pub input: Nat,
    pub rounds: Vec<Round>,
    pub terminal: Terminal,
    pub g_value: Nat,
    pub h_value: Nat,
    pub v: Nat,
    pub declared: Vec<(Side, Nat)>,
}

impl Action {
    fn satisfied(&self) -> bool {
        !matches!(self.terminal, Terminal::Inconclusive { .. })
    }
}

/// `(c, d, ⟨c, d, x⟩)` for level `n`.
pub fn requirement_input(n: Nat, x: Nat) -> Result<(Nat, Nat, Nat), Error> {
    let c = encode(&Program::native(Native::LevelRead { level: n, side: 0 }))?;
    let d = encode(&Program::native(Native::LevelRead { level: n, side: 1 }))?;
    let input = triple(c, d, x).ok_or_else(|| Error::IndexOverflow(format!("requirement input at level {n}")))?;
    Ok((c, d, input))
}

/// One leg's run, as the meet oracle would perform it.
struct Leg {
    side: Side,
    out: DialogueOutcome,
}

enum MeetView {
    Value(Nat),
    /// A leg never halts on settled values, or both halt and disagree.
    Stuck { disagree: bool },
    /// A leg froze at level `m`; `m == n` is the open case.
    Froze { side: Side, point: Nat },
    Unknown,
}

/// Evaluates `(g ∩ h)(⟨a, b, y⟩)` exactly as the lazy meet does, keeping the leg runs.
fn meet_legs(a: Nat, bi: Nat, y: Nat, g: &PartialFn, h: &PartialFn, b: &Budget) -> Vec<Leg> {
    let mut remaining = b.step_fuel.min(b.oracle_fuel);
    let mut legs = Vec::new();
    for (side, e, oracle) in [(Side::G, a, g), (Side::H, bi, h)] {
        if remaining == 0 {
            break;
        }
        let budget = Budget { step_fuel: remaining, ..*b };
        let out = run_dialogue(&decode(e), oracle, y, &budget);
        remaining -= out.steps.min(remaining);
        let stop = out.never_halts() || legs.iter().any(|l: &Leg| l.out.halted().zip(out.halted()).is_some_and(|(p, q)| p != q));
        legs.push(Leg { side, out });
        if stop {
            break;
        }
    }
    legs
}

/// Reads a meet evaluation relative to the open level `n`.
fn view(legs: &[Leg], n: Nat) -> MeetView {
    for l in legs {
        if l.out.is_divergent() || l.out.frozen().is_some_and(|m| m < n) {
            return MeetView::Stuck { disagree: false };
        }
    }
    let values: Vec<Nat> = legs.iter().filter_map(|l| l.out.halted()).collect();
    if values.len() == 2 && values[0] != values[1] {
        return MeetView::Stuck { disagree: true };
    }
    if let Some(l) = legs.iter().find(|l| l.out.frozen().is_some_and(|m| m > n)) {
        return MeetView::Froze { side: l.side, point: l.out.frozen().expect("frozen") };
    }
    if let Some(l) = legs.iter().find(|l| l.out.frozen().is_some()) {
        return MeetView::Froze { side: l.side, point: n };
    }
    if legs.len() == 2 && values.len() == 2 {
        return MeetView::Value(values[0]);
    }
    MeetView::Unknown
}

fn with(table: &BTreeMap<Nat, Nat>, n: Nat, v: Nat) -> PartialFn {
    let mut t = table.clone();
    t.insert(n, v);
    PartialFn::table(t)
}

enum Reply {
    Answer(Round),
    End(Terminal, Vec<(Side, Nat)>, Option<(Nat, Nat)>),
}

/// Decides a meet query `⟨a, b, y⟩` at open level `n`.
fn meet_case(q: Nat, s: &NondistributiveState, b: &Budget) -> Reply {
    let (a, bi, y) = untriple(q / 2);
    let g = PartialFn::table(s.g.clone());
    let h = PartialFn::table(s.h.clone());
    match view(&meet_legs(a, bi, y, &g, &h, b), s.n) {
        MeetView::Value(w) => Reply::Answer(Round { query: q, case: "2b".into(), answer: w }),
        MeetView::Stuck { disagree: false } => Reply::End(Terminal::LegStuck { query: q }, vec![], None),
        MeetView::Stuck { disagree: true } => Reply::End(Terminal::LegsDisagree { query: q }, vec![], None),
        MeetView::Froze { side, point } if point > s.n => {
            Reply::End(Terminal::LegHigh { query: q, side, point }, vec![(side, point)], None)
        }
        MeetView::Froze { .. } => {
            let mut common = BTreeSet::new();
            let mut unknown = false;
            for combo in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let g = with(&s.g, s.n, combo.0);
                let h = with(&s.h, s.n, combo.1);
                match view(&meet_legs(a, bi, y, &g, &h, b), s.n + 1) {
                    MeetView::Value(w) => {
                        common.insert(w);
                    }
                    MeetView::Stuck { disagree: false } => {
                        return Reply::End(Terminal::ComboStuck { query: q, combo }, vec![], Some(combo))
                    }
                    MeetView::Stuck { disagree: true } => {
                        return Reply::End(Terminal::ComboDisagree { query: q, combo }, vec![], Some(combo))
                    }
                    MeetView::Froze { side, point } => {
                        let t = Terminal::ComboHigh { query: q, combo, side, point };
                        return Reply::End(t, vec![(side, point)], Some(combo));
                    }
                    MeetView::Unknown => unknown = true,
                }
            }
            match (unknown, common.len()) {
                (false, 1) => {
                    let w = *common.first().expect("one value");
                    Reply::Answer(Round { query: q, case: "3d".into(), answer: w })
                }
                _ => Reply::End(Terminal::Inconclusive { reason: "a meet leg is only budget-limited".into() }, vec![], None),
            }
        }
        MeetView::Unknown => {
            Reply::End(Terminal::Inconclusive { reason: "a meet leg is only budget-limited".into() }, vec![], None)
        }
    }
}

/// A level can carry `R_e` when `g`, `h` and all four `f` points there are
/// still free to be defined.
fn usable(s: &NondistributiveState, n: Nat) -> Result<bool, Error> {
    if s.declared.contains(&(Side::G, n)) || s.declared.contains(&(Side::H, n)) {
        return Ok(false);
    }
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let key = triple(n, i, j).ok_or_else(|| Error::IndexOverflow(format!("level {n}")))?;
        if s.declared.contains(&(Side::F, key)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs stage `e` on `state`, leaving it ready for stage `e + 1`. The
/// returned certificate carries the action, status and restraints; evidence
/// is attached once the final objects exist.
pub fn nondistributive_strategy(e: Nat, state: &mut NondistributiveState, b: &Budget) -> Result<StageCertificate, Error> {
    let mut skipped = Vec::new();
    while !usable(state, state.n)? {
        skipped.push(state.n);
        state.n += 1;
    }
    let n = state.n;
    let (c, d, input) = requirement_input(n, state.x)?;
    let p = decode(e);
    let mut answers: Vec<Nat> = Vec::new();
    let mut rounds = Vec::new();
    let mut steps = 0;
    let (terminal, declared, combo) = loop {
        let mut meter = Meter::new(b.step_fuel - steps);
        let step = p.step(input, &answers, &mut meter);
        steps += meter.used;
        let q = match step {
            Step::Output(w) => break (Terminal::Output { w }, vec![], None),
            Step::Diverges => break (Terminal::Divergent, vec![], None),
            Step::OutOfFuel => {
                break (Terminal::Inconclusive { reason: "Φ_e ran out of steps".into() }, vec![], None);
            }
            Step::Query(q) => q,
        };
        if answers.len() as u64 >= b.round_cap {
            break (Terminal::RoundCap, vec![], None);
        }
        let reply = if q % 2 == 0 {
            let y = q / 2;
            let level = untriple(y).0;
            if level >= n {
                Reply::End(Terminal::HighF { point: y }, vec![(Side::F, y)], None)
            } else if let Some(&a) = state.f.get(&y) {
                Reply::Answer(Round { query: q, case: "f_below".into(), answer: a })
            } else {
                Reply::End(Terminal::FrozenBelow { query: q }, vec![], None)
            }
        } else {
            meet_case(q, state, b)
        };
        match reply {
            Reply::Answer(r) => {
                answers.push(r.answer);
                rounds.push(r);
            }
            Reply::End(t, declared, combo) => break (t, declared, combo),
        }
    };

    let (g_value, h_value) = match (&terminal, combo) {
        (_, Some(combo)) => combo,
        (Terminal::HighF { point }, None) => {
            let i = untriple(*point).1;
            let other = if i == 0 { 1 } else { 0 };
            (other, other)
        }
        _ => (0, 0),
    };
    let v = match terminal {
        Terminal::Output { w: 0 } => 1,
        _ => 0,
    };
    let n_next = n + 1;
    for i in 0..2 {
        for j in 0..2 {
            let key = triple(n, i, j).ok_or_else(|| Error::IndexOverflow(format!("level {n}")))?;
            if declared.contains(&(Side::F, key)) {
                continue;
            }
            let coded = (j == 0 && i == g_value) || (j == 1 && i == h_value);
            state.f.insert(key, if coded { v } else { 0 });
        }
    }
    state.g.insert(n, g_value);
    state.h.insert(n, h_value);
    state.n = n_next;
    state.declared.extend(declared.iter().copied());

    let action = Action { e, skipped, n_e: n, n_next, c, d, input, rounds, terminal, g_value, h_value, v, declared };
    let status = if action.satisfied() {
        Status::Satisfied
    } else {
        let Terminal::Inconclusive { reason } = &action.terminal else { unreachable!() };
        Status::Inconclusive { reason: reason.clone() }
    };
    let mut cert = StageCertificate::new(e, AnyAction::Nondistributive(action), status);
    cert.restraints.push(Restraint::snapshot("f", &state.f, Measure::TripleLevel, n_next));
    cert.restraints.push(Restraint::snapshot("g", &state.g, Measure::Point, n_next));
    cert.restraints.push(Restraint::snapshot("h", &state.h, Measure::Point, n_next));
    Ok(cert)
}

fn objects_of(s: &NondistributiveState, b: &Budget) -> BTreeMap<String, PartialFn> {
    let f = PartialFn::table(s.f.clone());
    let g = PartialFn::table(s.g.clone());
    let h = PartialFn::table(s.h.clone());
    let fg = f.join(&g);
    let fh = f.join(&h);
    let mut objects = BTreeMap::new();
    objects.insert("oracle".to_string(), f.join(&g.meet(&h, *b)));
    objects.insert("target".to_string(), fg.meet(&fh, *b));
    objects.insert("f_join_g".to_string(), fg);
    objects.insert("f_join_h".to_string(), fh);
    objects.insert("f".to_string(), f);
    objects.insert("g".to_string(), g);
    objects.insert("h".to_string(), h);
    objects
}

/// Runs stages `0..stages` from the empty state with input `x`.
pub fn build_nondistributive(stages: Nat, x: Nat, b: &Budget) -> Result<Transcript, Error> {
    let mut state = NondistributiveState { x, ..Default::default() };
    let mut certs = Vec::new();
    for e in 0..stages {
        certs.push(nondistributive_strategy(e, &mut state, b)?);
    }
    let objects = objects_of(&state, b);
    for cert in &mut certs {
        let AnyAction::Nondistributive(act) = &cert.action else { unreachable!() };
        let (p, input, n) = (decode(act.e), act.input, act.n_e);
        let psi = Program::native(Native::LevelRead { level: n, side: 0 });
        let gamma = Program::native(Native::LevelRead { level: n, side: 1 });
        cert.evidence.push(Evidence::run("requirement", &p, OracleRef::named("oracle"), &objects, input, b));
        cert.evidence.push(Evidence::run("psi", &psi, OracleRef::named("f_join_g"), &objects, x, b));
        cert.evidence.push(Evidence::run("gamma", &gamma, OracleRef::named("f_join_h"), &objects, x, b));
    }
    Ok(Transcript::new(Params::Nondistributive { stages, x }, *b, Vec::new(), objects, certs))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let Params::Nondistributive { stages, x } = t.header.params else { unreachable!() };
    build_nondistributive(stages, x, &b)
}

/// Whether `out` defeats the target value `v`, and how.
fn defeats(out: &DialogueOutcome, v: Nat) -> bool {
    match out.outcome {
        Outcome::Halted(w) => w != v,
        Outcome::Frozen(_) => true,
        Outcome::Exhausted { certified_divergent, reason } => certified_divergent || reason == ExhaustReason::RoundCap,
    }
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    let Params::Nondistributive { x, .. } = t.header.params else { unreachable!() };
    let b = t.header.budget;
    let (f, g, h) = (t.object("f")?, t.object("g")?, t.object("h")?);
    let target = t.object("target")?;
    let mut n = 0;
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let fail = |d: String| mismatch(&loc, d);
        let AnyAction::Nondistributive(act) = &s.action else { return Err(fail("wrong action kind".into())) };
        let expected_skip: Vec<Nat> = (n..act.n_e).collect();
        if act.skipped != expected_skip || act.n_next != act.n_e + 1 {
            return Err(fail("skipped levels do not lead to n_e".into()));
        }
        for &m in &act.skipped {
            if g.eval(m, 1).is_defined() && h.eval(m, 1).is_defined() {
                return Err(fail(format!("skipped level {m} carries values")));
            }
        }
        let level = act.n_e;
        if (act.c, act.d, act.input) != requirement_input(level, x)? {
            return Err(fail("level or requirement input differs".into()));
        }
        let v = act.v;
        if g.eval(level, 1) != OracleAnswer::Defined(act.g_value) || h.eval(level, 1) != OracleAnswer::Defined(act.h_value) {
            return Err(fail("g(n_e) or h(n_e) differs from the action".into()));
        }
        for (side, point) in &act.declared {
            let obj = match side {
                Side::F => f,
                Side::G => g,
                Side::H => h,
            };
            if obj.eval(*point, 1).is_defined() {
                return Err(fail(format!("declared point {point} is defined")));
            }
        }
        let psi = s.find("psi").map_err(fail)?;
        let gamma = s.find("gamma").map_err(fail)?;
        if psi.outcome.halted() != Some(v) || gamma.outcome.halted() != Some(v) {
            return Err(fail("Ψ and Γ do not both output v".into()));
        }
        if target.eval(act.input, b.oracle_fuel) != OracleAnswer::Defined(v) {
            return Err(fail("(f ⊕ g) ∩ (f ⊕ h) is not v at the requirement input".into()));
        }
        if act.satisfied() {
            let req = s.find("requirement").map_err(fail)?;
            if req.input != act.input || req.program != decode(act.e) || !defeats(&req.outcome, v) {
                return Err(fail("Φ_e[f ⊕ (g ∩ h)] does not miss v".into()));
            }
            let expected = match &act.terminal {
                Terminal::RoundCap => matches!(req.outcome.outcome, Outcome::Exhausted { reason: ExhaustReason::RoundCap, .. }),
                Terminal::Output { w } => req.outcome.halted() == Some(*w),
                Terminal::Divergent => req.outcome.is_divergent(),
                _ => req.outcome.frozen().is_some(),
            };
            if !expected {
                return Err(fail("the requirement run does not end in the recorded case".into()));
            }
            let answers: Vec<Nat> = act.rounds.iter().map(|r| r.answer).collect();
            let replayed: Vec<Nat> = req.outcome.trace.iter().map(|&(_, a)| a).collect();
            if !replayed.starts_with(&answers) {
                return Err(fail("the final oracle answers differently from the simulated rounds".into()));
            }
        }
        n = act.n_next;
    }
    Ok(())
}
