use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{antichain, jump_inversion, nondistributive, quasiminimal, spoilers};
use crate::machine::{run_dialogue, Budget, DialogueOutcome, Program};
use crate::pairing::{unpair, untriple, Nat};
use crate::partialfn::PartialFn;

/// The oracle a recorded dialogue ran against: a final object of the
/// transcript, or a finite approximation embedded in place.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleRef {
    Named { name: String },
    Inline { function: PartialFn },
}

impl OracleRef {
    pub fn named(name: &str) -> OracleRef {
        OracleRef::Named { name: name.into() }
    }

    pub fn inline(function: PartialFn) -> OracleRef {
        OracleRef::Inline { function }
    }

    pub(crate) fn resolve<'a>(&'a self, objects: &'a BTreeMap<String, PartialFn>) -> Result<&'a PartialFn, String> {
        match self {
            OracleRef::Named { name } => objects.get(name).ok_or_else(|| format!("unknown object `{name}`")),
            OracleRef::Inline { function } => Ok(function),
        }
    }
}

/// A dialogue the stage relied on, with its full outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub label: String,
    pub program: Program,
    pub oracle: OracleRef,
    pub input: Nat,
    pub budget: Budget,
    pub outcome: DialogueOutcome,
}

impl Evidence {
    pub(crate) fn run(
        label: impl Into<String>,
        program: &Program,
        oracle: OracleRef,
        objects: &BTreeMap<String, PartialFn>,
        input: Nat,
        budget: &Budget,
    ) -> Evidence {
        let outcome = {
            let g = oracle.resolve(objects).expect("construction refers to its own objects");
            run_dialogue(program, g, input, budget)
        };
        Evidence { label: label.into(), program: program.clone(), oracle, input, budget: *budget, outcome }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum HaltAnswer {
    Halts { value: Nat },
    Frozen { query: Nat },
    CertifiedDivergent,
    NoHaltByBudget,
}

impl HaltAnswer {
    pub fn of(out: &DialogueOutcome) -> HaltAnswer {
        if let Some(value) = out.halted() {
            HaltAnswer::Halts { value }
        } else if let Some(query) = out.frozen() {
            HaltAnswer::Frozen { query }
        } else if out.is_divergent() {
            HaltAnswer::CertifiedDivergent
        } else {
            HaltAnswer::NoHaltByBudget
        }
    }
}

/// One logged question to the bounded halting oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundedAnswer {
    pub label: String,
    pub program: Program,
    pub oracle: OracleRef,
    pub input: Nat,
    pub budget: Budget,
    pub answer: HaltAnswer,
}

/// Finite stand-in for `∅′`: answers "does `Φ[g](n)` halt?" by running it for
/// at most `budget`, memoizing and logging every distinct question.
#[derive(Debug)]
pub struct BoundedHaltingOracle {
    pub budget: Budget,
    memo: HashMap<(Program, OracleRef, Nat), (HaltAnswer, DialogueOutcome)>,
    log: Vec<BoundedAnswer>,
}

impl BoundedHaltingOracle {
    pub fn new(budget: Budget) -> BoundedHaltingOracle {
        BoundedHaltingOracle { budget, memo: HashMap::new(), log: Vec::new() }
    }

    /// Asks about `Φ_program[oracle](input)`; the full outcome is returned for
    /// the caller's inspection.
    pub fn ask(&mut self, label: &str, program: &Program, oracle: &PartialFn, input: Nat) -> (HaltAnswer, DialogueOutcome) {
        let key = (program.clone(), OracleRef::inline(oracle.clone()), input);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = run_dialogue(program, oracle, input, &self.budget);
        let answer = HaltAnswer::of(&out);
        self.log.push(BoundedAnswer {
            label: label.into(),
            program: program.clone(),
            oracle: key.1.clone(),
            input,
            budget: self.budget,
            answer,
        });
        self.memo.insert(key, (answer, out.clone()));
        (answer, out)
    }

    /// The questions asked since the last call.
    pub fn take_log(&mut self) -> Vec<BoundedAnswer> {
        std::mem::take(&mut self.log)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Protect keys below the bound.
    Point,
    /// Protect keys `⟨t, i, j⟩` of level `t` below the bound.
    TripleLevel,
    /// Protect keys `⟨b, x⟩` of column `b` below the bound.
    Column,
}

/// The part of a finite object below a restraint, as it stood when the stage
/// ended; later stages must leave it exactly as recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Restraint {
    pub object: String,
    pub measure: Measure,
    pub below: Nat,
    pub values: Vec<(Nat, Nat)>,
}

impl Restraint {
    pub(crate) fn snapshot(object: &str, table: &BTreeMap<Nat, Nat>, measure: Measure, below: Nat) -> Restraint {
        Restraint {
            object: object.into(),
            measure,
            below,
            values: table.iter().filter(|(&k, _)| measure.level(k) < below).map(|(&k, &v)| (k, v)).collect(),
        }
    }

    pub(crate) fn check(&self, objects: &BTreeMap<String, PartialFn>) -> Result<(), String> {
        let entries = objects
            .get(&self.object)
            .and_then(PartialFn::entries)
            .ok_or_else(|| format!("restraint names `{}`, which is not a finite table", self.object))?;
        let now: Vec<(Nat, Nat)> = entries
            .iter()
            .filter(|(&k, _)| self.measure.level(k) < self.below)
            .map(|(&k, &v)| (k, v))
            .collect();
        if now != self.values {
            return Err(format!("`{}` changed below restraint {}", self.object, self.below));
        }
        Ok(())
    }
}

impl Measure {
    fn level(self, k: Nat) -> Nat {
        match self {
            Measure::Point => k,
            Measure::TripleLevel => untriple(k).0,
            Measure::Column => unpair(k).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Inconclusive { reason: String },
}

/// Per-construction record of what a stage chose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Quasiminimal(quasiminimal::Action),
    Density(quasiminimal::Action),
    Antichain(antichain::Action),
    JumpInversion(jump_inversion::Action),
    SupSpoiler(spoilers::SupAction),
    InfSpoiler(spoilers::InfAction),
    Nondistributive(nondistributive::Action),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCertificate {
    pub stage: Nat,
    pub action: Action,
    pub evidence: Vec<Evidence>,
    pub bounded_oracle_answers: Vec<BoundedAnswer>,
    pub restraints: Vec<Restraint>,
    pub status: Status,
    /// SHA-256 of the certificate serialized with an empty digest.
    pub digest: String,
}

impl StageCertificate {
    pub(crate) fn new(stage: Nat, action: Action, status: Status) -> StageCertificate {
        StageCertificate {
            stage,
            action,
            evidence: Vec::new(),
            bounded_oracle_answers: Vec::new(),
            restraints: Vec::new(),
            status,
            digest: String::new(),
        }
    }

    fn compute_digest(&self) -> String {
        let mut blank = self.clone();
        blank.digest.clear();
        let bytes = serde_json::to_vec(&blank).expect("certificates serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub(crate) fn seal(&mut self) {
        self.digest = self.compute_digest();
    }

    pub(crate) fn check_digest(&self) -> Result<(), String> {
        if self.compute_digest() != self.digest {
            return Err("digest does not match the certificate contents".into());
        }
        Ok(())
    }

    pub(crate) fn replay_evidence(&self, objects: &BTreeMap<String, PartialFn>) -> Result<u64, String> {
        for ev in &self.evidence {
            let g = ev.oracle.resolve(objects)?;
            let out = run_dialogue(&ev.program, g, ev.input, &ev.budget);
            if out != ev.outcome {
                return Err(format!("evidence `{}` does not reproduce", ev.label));
            }
        }
        Ok(self.evidence.len() as u64)
    }

    pub(crate) fn replay_answers(&self, objects: &BTreeMap<String, PartialFn>) -> Result<u64, String> {
        for a in &self.bounded_oracle_answers {
            let g = a.oracle.resolve(objects)?;
            let out = run_dialogue(&a.program, g, a.input, &a.budget);
            if HaltAnswer::of(&out) != a.answer {
                return Err(format!("bounded answer `{}` does not reproduce", a.label));
            }
        }
        Ok(self.bounded_oracle_answers.len() as u64)
    }

    pub(crate) fn find(&self, label: &str) -> Result<&Evidence, String> {
        self.evidence
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| format!("no evidence labelled `{label}`"))
    }
}
