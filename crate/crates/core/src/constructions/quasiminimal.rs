//! Quasiminimal degree below a noncomputable `f`: build `A` so that `f ↾ A`
//! escapes every `φ_e` (action 1) while `A` avoids a point of each
//! `W_e^f` above the current restraint (action 2).
//!
//! The same two-action engine drives the density construction, with `φ_e`
//! replaced by `Φ_e[g]` and `W_e^f` by `W_e^{α ⊕ f}`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::certificate::{Action as AnyAction, Evidence, Measure, OracleRef, Restraint, StageCertificate, Status};
use super::{claim, mismatch, Claim, Params, Transcript};
use crate::error::Error;
use crate::machine::{decode, run_dialogue, Budget};
use crate::pairing::Nat;
use crate::partialfn::{OracleAnswer, PartialFn};
use crate::search::ce_enumerate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub e: Nat,
    /// Every point chosen before this stage is `≤ r_e`.
    pub r_e: Option<Nat>,
    /// `n > r_e` in `A ∩ dom(f)` with `Φ_e[oracle](n) ≠ f(n)`.
    pub diagonal: Option<Nat>,
    /// Candidates skipped because their run was only budget-limited.
    pub skipped_unknown: u64,
    pub u_e: Option<Nat>,
    /// A point of the enumeration above `u_e`, kept out of `A`.
    pub excluded: Option<Nat>,
    /// No enumerated point above `u_e` within the universe.
    pub finite_at_bound: bool,
}

/// Names of the objects the engine reads.
pub(crate) struct Roles<'a> {
    /// The function being restricted.
    pub f: &'a str,
    /// Oracle of the diagonalized computations.
    pub diag: &'a str,
    /// Oracle of the enumerations.
    pub enumerate: &'a str,
}

pub(crate) struct EngineRun {
    pub a: BTreeSet<Nat>,
    pub stages: Vec<StageCertificate>,
}

/// Stages `e = 0..=e_max` over inputs below `universe`.
pub(crate) fn run_engine(
    objects: &BTreeMap<String, PartialFn>,
    roles: &Roles,
    e_max: Nat,
    universe: Nat,
    b: &Budget,
    wrap: fn(Action) -> AnyAction,
) -> EngineRun {
    let f = &objects[roles.f];
    let diag = &objects[roles.diag];
    let en = &objects[roles.enumerate];
    let mut a: BTreeSet<Nat> = BTreeSet::new();
    let mut excluded: BTreeSet<Nat> = BTreeSet::new();
    let mut stages = Vec::new();
    for e in 0..=e_max {
        let p = decode(e);
        let top = |a: &BTreeSet<Nat>, x: &BTreeSet<Nat>| a.iter().chain(x.iter()).copied().max();
        let r_e = top(&a, &excluded);
        let mut evidence = Vec::new();
        let mut diagonal = None;
        let mut skipped_unknown = 0;
        let start = r_e.map_or(0, |r| r + 1);
        for n in start..universe {
            let Some(v) = f.eval(n, b.oracle_fuel).value() else { continue };
            let out = run_dialogue(&p, diag, n, b);
            if out.never_halts() || out.halted().is_some_and(|w| w != v) {
                a.insert(n);
                diagonal = Some(n);
                evidence.push(Evidence::run("diagonal", &p, OracleRef::named(roles.diag), objects, n, b));
                break;
            }
            if !out.is_final() {
                skipped_unknown += 1;
            }
        }
        let u_e = top(&a, &excluded);
        let above = u_e.map_or(0, |u| u + 1);
        let w = ce_enumerate(e, en, universe.saturating_sub(1), b);
        let excluded_now = w.range(above..).next().copied();
        if let Some(n) = excluded_now {
            excluded.insert(n);
            evidence.push(Evidence::run("enumerated", &p, OracleRef::named(roles.enumerate), objects, n, b));
        }
        let status = if diagonal.is_some() {
            Status::Satisfied
        } else {
            Status::Inconclusive { reason: format!("no diagonalization point below {universe}") }
        };
        let action = Action {
            e,
            r_e,
            diagonal,
            skipped_unknown,
            u_e,
            excluded: excluded_now,
            finite_at_bound: excluded_now.is_none(),
        };
        let mut cert = StageCertificate::new(e, wrap(action), status);
        cert.evidence = evidence;
        let protect = top(&a, &excluded).map_or(0, |t| t + 1);
        cert.restraints.push(Restraint::snapshot("A", &indicator(&a), Measure::Point, protect));
        stages.push(cert);
    }
    EngineRun { a, stages }
}

pub(crate) fn indicator(a: &BTreeSet<Nat>) -> BTreeMap<Nat, Nat> {
    a.iter().map(|&n| (n, 1)).collect()
}

pub(crate) fn set_of(obj: &PartialFn) -> Option<BTreeSet<Nat>> {
    obj.entries().map(|m| m.keys().copied().collect())
}

/// Semantic checks shared with density.
pub(crate) fn check_engine(t: &Transcript, roles: &Roles, universe: Nat, unwrap: fn(&AnyAction) -> Option<&Action>) -> Result<(), Error> {
    let b = t.header.budget;
    let f = t.object(roles.f)?;
    let en = t.object(roles.enumerate)?;
    let a = set_of(t.object("A")?).ok_or_else(|| mismatch("objects", "`A` is not a finite table".into()))?;
    let mut diagonals = BTreeSet::new();
    let mut chosen: BTreeSet<Nat> = BTreeSet::new();
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let act = unwrap(&s.action).ok_or_else(|| mismatch(&loc, "wrong action kind".into()))?;
        let fail = |d: &str| mismatch(&loc, d.to_string());
        if act.e != s.stage || act.r_e != chosen.iter().copied().max() {
            return Err(fail("restraint r_e does not cover earlier choices"));
        }
        if let Some(n) = act.diagonal {
            let ev = s.find("diagonal").map_err(|d| fail(&d))?;
            let v = f.eval(n, b.oracle_fuel).value().ok_or_else(|| fail("diagonal point outside dom(f)"))?;
            let escapes = ev.outcome.never_halts() || ev.outcome.halted().is_some_and(|w| w != v);
            if ev.input != n || ev.program != decode(act.e) || ev.oracle != OracleRef::named(roles.diag) || !escapes {
                return Err(fail("diagonal evidence does not show Φ_e ≠ f at the point"));
            }
            if act.r_e.is_some_and(|r| n <= r) || !a.contains(&n) {
                return Err(fail("diagonal point is not a fresh member of A"));
            }
            diagonals.insert(n);
            chosen.insert(n);
        }
        if act.u_e != chosen.iter().copied().max() {
            return Err(fail("restraint u_e does not cover the stage's choices"));
        }
        match act.excluded {
            Some(n) => {
                let ev = s.find("enumerated").map_err(|d| fail(&d))?;
                if ev.input != n || ev.outcome.halted().is_none() || ev.oracle != OracleRef::named(roles.enumerate) {
                    return Err(fail("excluded point is not enumerated"));
                }
                if a.contains(&n) || act.u_e.is_some_and(|u| n <= u) {
                    return Err(fail("excluded point is in A or below u_e"));
                }
                chosen.insert(n);
            }
            None => {
                let above = act.u_e.map_or(0, |u| u + 1);
                if ce_enumerate(act.e, en, universe.saturating_sub(1), &b).range(above..).next().is_some() {
                    return Err(fail("finiteness flag set but the enumeration has a point above u_e"));
                }
            }
        }
    }
    if diagonals != a {
        return Err(mismatch("objects", "A is not the set of diagonalization points".into()));
    }
    Ok(())
}

fn wrap(a: Action) -> AnyAction {
    AnyAction::Quasiminimal(a)
}

fn unwrap(a: &AnyAction) -> Option<&Action> {
    match a {
        AnyAction::Quasiminimal(x) => Some(x),
        _ => None,
    }
}

const ROLES: Roles<'static> = Roles { f: "f", diag: "empty", enumerate: "f" };

/// Builds `A` with `f ↾ A` escaping `φ_0, …, φ_{E}` and avoiding a point of
/// each nonempty `W_e^f` above the restraint, on inputs below `universe`.
///
/// Refuses when a program of index `≤ index_bound` computes `f` on the grid.
pub fn build_quasiminimal(f: &PartialFn, e_max: Nat, universe: Nat, index_bound: Nat, b: &Budget) -> Result<Transcript, Error> {
    let mut objects = BTreeMap::new();
    objects.insert("f".to_string(), f.clone());
    objects.insert("empty".to_string(), PartialFn::empty());
    let grid: Vec<Nat> = (0..universe).collect();
    if f.sample(universe, b.oracle_fuel).iter().any(|(_, a)| *a == OracleAnswer::Unknown) {
        return Err(Error::ContractAbort("f answers unknown on the universe".into()));
    }
    let claims: Vec<Claim> =
        vec![claim("f is not computable", ("f", "empty"), &objects, index_bound, &grid, b, false)?];
    let run = run_engine(&objects, &ROLES, e_max, universe, b, wrap);
    objects.insert("A".to_string(), PartialFn::table(indicator(&run.a)));
    objects.insert("f_on_A".to_string(), f.restrict(run.a.iter().copied()));
    Ok(Transcript::new(Params::Quasiminimal { e_max, universe, index_bound }, *b, claims, objects, run.stages))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let Params::Quasiminimal { e_max, universe, index_bound } = t.header.params else { unreachable!() };
    build_quasiminimal(t.object("f")?, e_max, universe, index_bound, &b)
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    let Params::Quasiminimal { universe, .. } = t.header.params else { unreachable!() };
    check_engine(t, &ROLES, universe, unwrap)
}
