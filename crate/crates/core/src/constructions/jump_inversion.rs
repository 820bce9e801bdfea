//! Jump inversion: code `h` into `f` at increasing locations `a_0 < a_1 < …`
//! so that `Φ_e[f](e)` is already decided by `f ↾ (a_{e-1} + 1)`.
//!
//! Stage `e` asks the bounded halting oracle, for every `σ` defined only on
//! `{a_k}_{k<e}` with values from a finite value set, where `Φ_e[σ](e)` and
//! `Φ_e[σ](n)` (`n < input_bound`) first query above `a_{e-1}`; `a_e` lies past
//! all those queries. The three-case decision of `K(f)(e)` is then read off
//! the truncated run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::certificate::{
    Action as AnyAction, BoundedHaltingOracle, Evidence, HaltAnswer, Measure, OracleRef, Restraint, StageCertificate,
    Status,
};
use super::{mismatch, Params, Transcript};
use crate::error::Error;
use crate::machine::{decode, Budget};
use crate::pairing::Nat;
use crate::partialfn::{k_jump, JumpAnswer, OracleAnswer, PartialFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// The truncated run freezes, at a point off the coding locations or beyond them.
    Frozen,
    /// The truncated run halts.
    Halts,
    /// Neither: certified divergence, or only budget-limited.
    Otherwise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub e: Nat,
    /// `a_{e-1}`, absent at stage 0.
    pub previous: Option<Nat>,
    pub a_e: Nat,
    /// `h(e)`, written at `a_e` when defined.
    pub coded: Option<Nat>,
    pub case: Case,
    pub k_value: JumpAnswer,
}

/// Every `σ` on `locations` with values `⊥` or from `values`.
fn partial_strings(locations: &[Nat], values: &[Nat]) -> Vec<PartialFn> {
    let radix = values.len() + 1;
    let total = radix.pow(locations.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut m = BTreeMap::new();
            for &a in locations {
                let d = code % radix;
                code /= radix;
                if d > 0 {
                    m.insert(a, values[d - 1]);
                }
            }
            PartialFn::table(m)
        })
        .collect()
}

fn case_of(answer: JumpAnswer) -> Case {
    match answer {
        JumpAnswer::UndefinedFrozen { .. } => Case::Frozen,
        JumpAnswer::One => Case::Halts,
        _ => Case::Otherwise,
    }
}

fn answer_of(out: &crate::machine::DialogueOutcome) -> JumpAnswer {
    match HaltAnswer::of(out) {
        HaltAnswer::Halts { .. } => JumpAnswer::One,
        HaltAnswer::Frozen { query } => JumpAnswer::UndefinedFrozen { query },
        HaltAnswer::CertifiedDivergent => JumpAnswer::ZeroCertified,
        HaltAnswer::NoHaltByBudget => match out.outcome {
            crate::machine::Outcome::Exhausted { reason, .. } => JumpAnswer::Unknown { reason },
            _ => unreachable!("only exhausted runs lack a halting answer"),
        },
    }
}

/// Next coding location from the logged answers: past every first query at
/// or above `threshold`.
fn next_location(answers: &[super::certificate::BoundedAnswer], threshold: Nat) -> Nat {
    answers
        .iter()
        .filter_map(|a| match a.answer {
            HaltAnswer::Frozen { query } if query >= threshold => Some(query + 1),
            _ => None,
        })
        .fold(threshold, Nat::max)
}

/// Builds `f` with `f(a_k) = h(k)` for `k ≤ e_max`, undefined elsewhere.
///
/// `σ` values range over `0..=value_bound` and the values of `h`.
pub fn build_jump_inversion(
    h: &PartialFn,
    e_max: Nat,
    value_bound: Nat,
    input_bound: Nat,
    b: &Budget,
) -> Result<Transcript, Error> {
    let mut coded = Vec::new();
    for k in 0..=e_max {
        match h.eval(k, b.oracle_fuel) {
            OracleAnswer::Unknown => return Err(Error::ContractAbort(format!("h answers unknown at {k}"))),
            a => coded.push(a.value()),
        }
    }
    let values: Vec<Nat> =
        (0..=value_bound).chain(coded.iter().flatten().copied()).collect::<BTreeSet<_>>().into_iter().collect();

    let mut locations: Vec<Nat> = Vec::new();
    let mut table: BTreeMap<Nat, Nat> = BTreeMap::new();
    let mut pending = Vec::new();
    for e in 0..=e_max {
        let p = decode(e);
        let previous = locations.last().copied();
        let threshold = previous.map_or(0, |a| a + 1);
        let mut oracle = BoundedHaltingOracle::new(*b);
        for sigma in partial_strings(&locations, &values) {
            oracle.ask("at e", &p, &sigma, e);
            for n in 0..input_bound {
                oracle.ask("some n", &p, &sigma, n);
            }
        }
        let log = oracle.take_log();
        let a_e = next_location(&log, threshold);

        let truncated = PartialFn::table(table.clone());
        let mut probe = BoundedHaltingOracle::new(*b);
        let (_, out) = probe.ask("decide", &p, &truncated, e);
        let k_value = answer_of(&out);
        let mut cert = StageCertificate::new(
            e,
            AnyAction::JumpInversion(Action { e, previous, a_e, coded: coded[e as usize], case: case_of(k_value), k_value }),
            match k_value {
                JumpAnswer::Unknown { .. } => Status::Inconclusive { reason: "K(f)(e) is only budget-limited".into() },
                _ => Status::Satisfied,
            },
        );
        cert.bounded_oracle_answers = log;
        cert.bounded_oracle_answers.extend(probe.take_log());
        cert.evidence.push(Evidence::run("truncated", &p, OracleRef::inline(truncated), &BTreeMap::new(), e, b));
        pending.push(cert);

        locations.push(a_e);
        if let Some(v) = coded[e as usize] {
            table.insert(a_e, v);
        }
    }

    let mut objects = BTreeMap::new();
    objects.insert("h".to_string(), h.clone());
    objects.insert("f".to_string(), PartialFn::table(table.clone()));
    let mut stages = Vec::new();
    for mut cert in pending {
        let e = cert.stage;
        cert.evidence.push(Evidence::run("final", &decode(e), OracleRef::named("f"), &objects, e, b));
        let AnyAction::JumpInversion(act) = &cert.action else { unreachable!() };
        cert.restraints.push(Restraint::snapshot("f", &table, Measure::Point, act.a_e + 1));
        stages.push(cert);
    }
    Ok(Transcript::new(Params::JumpInversion { e_max, value_bound, input_bound }, *b, Vec::new(), objects, stages))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let Params::JumpInversion { e_max, value_bound, input_bound } = t.header.params else { unreachable!() };
    build_jump_inversion(t.object("h")?, e_max, value_bound, input_bound, &b)
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    let b = t.header.budget;
    let f = t.object("f")?;
    let h = t.object("h")?;
    let mut graph = BTreeMap::new();
    let mut previous = None;
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let fail = |d: String| mismatch(&loc, d);
        let AnyAction::JumpInversion(act) = &s.action else { return Err(fail("wrong action kind".into())) };
        if act.previous != previous {
            return Err(fail("previous coding location differs".into()));
        }
        let threshold = previous.map_or(0, |a| a + 1);
        let searched: Vec<_> = s.bounded_oracle_answers.iter().filter(|a| a.label != "decide").cloned().collect();
        if act.a_e != next_location(&searched, threshold) {
            return Err(fail(format!("a_e = {} is not past the logged queries", act.a_e)));
        }
        if act.coded != h.eval(act.e, b.oracle_fuel).value() {
            return Err(fail("coded value differs from h".into()));
        }

        let truncated = s.find("truncated").map_err(fail)?;
        let last = s.find("final").map_err(fail)?;
        let OracleRef::Inline { function } = &truncated.oracle else { return Err(fail("truncation is not inline".into())) };
        let expected: BTreeMap<Nat, Nat> = graph.clone();
        if function.entries() != Some(&expected) {
            return Err(fail("truncation is not f below a_{e-1} + 1".into()));
        }
        if truncated.outcome != last.outcome {
            return Err(fail("Φ_e[f](e) differs from the truncated run".into()));
        }
        let k = k_jump(f, act.e, &b);
        if k != act.k_value || case_of(k) != act.case || answer_of(&truncated.outcome) != k {
            return Err(fail(format!("K(f)(e) is {}, recorded {}", k.label(), act.k_value.label())));
        }
        if let Some(v) = act.coded {
            graph.insert(act.a_e, v);
        }
        previous = Some(act.a_e);
    }
    if f.entries() != Some(&graph) {
        return Err(mismatch("objects", "f is not supported exactly on the coding locations".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_strings_count() {
        assert_eq!(partial_strings(&[], &[0, 1]).len(), 1);
        let all = partial_strings(&[3, 7], &[0, 1]);
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], PartialFn::empty());
    }

    #[test]
    fn coding_locations_increase() {
        let h = PartialFn::table([(0, 3), (1, 1)]);
        let b = Budget::new(20_000, 64, 5_000).unwrap();
        let t = build_jump_inversion(&h, 3, 1, 2, &b).unwrap();
        let locs: Vec<Nat> = t
            .stages
            .iter()
            .map(|s| match &s.action {
                AnyAction::JumpInversion(a) => a.a_e,
                _ => unreachable!(),
            })
            .collect();
        assert!(locs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t.object("f").unwrap().entries().unwrap().len(), 2);
        check(&t).unwrap();
    }
}
