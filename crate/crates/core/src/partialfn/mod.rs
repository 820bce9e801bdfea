//! Partial functions on the naturals and the degree algebra built on them.
//!
//! A [`PartialFn`] is queried with [`PartialFn::eval`], which answers
//! `Defined(v)`, `Undefined`, or `Unknown` when the fuel it was given does not
//! settle the question. Finite tables never answer `Unknown`; the lazy
//! combinators (meet, jump, dialogue images) may.

mod jump;
mod witness;

pub use jump::{inflation_index, k0, k_jump, monotone_transfer, JumpAnswer, JumpKind, K0Answer};
pub use witness::{
    canonical_witnesses, domain_via_k0, finite_program, jump_decode, meet_universality, CanonicalWitnesses,
};

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::machine::{run_dialogue, Budget, DialogueOutcome, Program};
use crate::pairing::{decode_radix, unpair, untriple, Nat};

/// Three-way answer of an oracle at a finite budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleAnswer {
    Defined(Nat),
    Undefined,
    Unknown,
}

impl OracleAnswer {
    pub fn value(self) -> Option<Nat> {
        match self {
            OracleAnswer::Defined(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, OracleAnswer::Defined(_))
    }
}

/// Domain of a restriction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Set { members: BTreeSet<Nat> },
    /// `n ∈ A` iff `Φ_program[∅](n)` halts with a nonzero value.
    Predicate { program: Program, budget: Budget },
}

impl Domain {
    fn contains(&self, n: Nat, fuel: u64) -> Option<bool> {
        match self {
            Domain::Set { members } => Some(members.contains(&n)),
            Domain::Predicate { program, budget } => {
                lazy_run(program, &PartialFn::empty(), n, budget, fuel).halted().map(|v| v != 0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartialFn {
    Table {
        #[serde(with = "pairs")]
        entries: BTreeMap<Nat, Nat>,
    },
    /// `Φ_program[∅]` on inputs below `range`; every such input settled
    /// within `budget` when the value was built, and inputs from `range` on
    /// answer `Unknown`.
    ByProgram { program: Program, budget: Budget, range: Nat },
    Restrict { base: Arc<PartialFn>, domain: Domain },
    Join { left: Arc<PartialFn>, right: Arc<PartialFn> },
    /// Defined at `⟨d, e, n⟩` when `Φ_d[left](n)` and `Φ_e[right](n)` halt
    /// with the same value; both dialogues draw from one step pool.
    Meet { left: Arc<PartialFn>, right: Arc<PartialFn>, budget: Budget },
    /// Flat meet of several functions, on radix tuples `(e_0, …, e_m, n)`.
    MultiMeet { parts: Vec<Arc<PartialFn>>, budget: Budget },
    Graph { base: Arc<PartialFn> },
    Jump { base: Arc<PartialFn>, budget: Budget, op: JumpKind },
    /// `Φ_program[base]`.
    Dialogue { program: Program, base: Arc<PartialFn>, budget: Budget },
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::pairing::Nat;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Nat, Nat>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(Nat, Nat)> = m.iter().map(|(&k, &v)| (k, v)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Nat, Nat>, D::Error> {
        let v: Vec<(Nat, Nat)> = Vec::deserialize(d)?;
        let mut m = BTreeMap::new();
        for (k, x) in v {
            if m.insert(k, x).is_some() {
                return Err(serde::de::Error::custom(format!("duplicate table key {k}")));
            }
        }
        Ok(m)
    }
}

/// Caps a stored budget by the fuel the caller is willing to spend.
fn lazy_budget(stored: &Budget, fuel: u64) -> Budget {
    Budget { step_fuel: stored.step_fuel.min(fuel), ..*stored }
}

fn lazy_run(p: &Program, g: &PartialFn, n: Nat, stored: &Budget, fuel: u64) -> DialogueOutcome {
    run_dialogue(p, g, n, &lazy_budget(stored, fuel))
}

/// Reads a dialogue as an oracle answer: frozen or certified divergent
/// computations are undefined, budget-limited ones unknown.
pub fn answer_of(out: &DialogueOutcome) -> OracleAnswer {
    if let Some(v) = out.halted() {
        OracleAnswer::Defined(v)
    } else if out.never_halts() {
        OracleAnswer::Undefined
    } else {
        OracleAnswer::Unknown
    }
}

impl PartialFn {
    pub fn empty() -> PartialFn {
        PartialFn::Table { entries: BTreeMap::new() }
    }

    pub fn table(entries: impl IntoIterator<Item = (Nat, Nat)>) -> PartialFn {
        PartialFn::Table { entries: entries.into_iter().collect() }
    }

    /// Pre-runs `Φ_program[∅]` on `0..range` and refuses when any input is
    /// not settled within `budget`.
    pub fn by_program(program: Program, budget: Budget, range: Nat) -> Result<PartialFn, Error> {
        for n in 0..range {
            let out = run_dialogue(&program, &PartialFn::empty(), n, &budget);
            if !out.is_final() {
                return Err(Error::InvalidArgument(format!(
                    "program not settled at input {n} within {} steps",
                    budget.step_fuel
                )));
            }
        }
        Ok(PartialFn::ByProgram { program, budget, range })
    }

    pub fn restrict(&self, members: impl IntoIterator<Item = Nat>) -> PartialFn {
        PartialFn::Restrict {
            base: Arc::new(self.clone()),
            domain: Domain::Set { members: members.into_iter().collect() },
        }
    }

    pub fn restrict_by(&self, program: Program, budget: Budget) -> PartialFn {
        PartialFn::Restrict { base: Arc::new(self.clone()), domain: Domain::Predicate { program, budget } }
    }

    pub fn join(&self, other: &PartialFn) -> PartialFn {
        PartialFn::Join { left: Arc::new(self.clone()), right: Arc::new(other.clone()) }
    }

    pub fn meet(&self, other: &PartialFn, budget: Budget) -> PartialFn {
        PartialFn::Meet { left: Arc::new(self.clone()), right: Arc::new(other.clone()), budget }
    }

    pub fn multi_meet(parts: &[PartialFn], budget: Budget) -> PartialFn {
        PartialFn::MultiMeet { parts: parts.iter().cloned().map(Arc::new).collect(), budget }
    }

    pub fn graph(&self) -> PartialFn {
        PartialFn::Graph { base: Arc::new(self.clone()) }
    }

    /// The lazy jump `K(f)` (or `K₀(f)`) at `budget`.
    pub fn jump(&self, budget: Budget, op: JumpKind) -> PartialFn {
        PartialFn::Jump { base: Arc::new(self.clone()), budget, op }
    }

    pub fn image(program: Program, base: &PartialFn, budget: Budget) -> PartialFn {
        PartialFn::Dialogue { program, base: Arc::new(base.clone()), budget }
    }

    pub fn eval(&self, n: Nat, fuel: u64) -> OracleAnswer {
        use OracleAnswer::*;
        match self {
            PartialFn::Table { entries } => entries.get(&n).map_or(Undefined, |&v| Defined(v)),
            PartialFn::ByProgram { program, budget, range } => {
                if n >= *range {
                    return Unknown;
                }
                answer_of(&run_dialogue(program, &PartialFn::empty(), n, budget))
            }
            PartialFn::Restrict { base, domain } => match domain.contains(n, fuel) {
                None => Unknown,
                Some(false) => Undefined,
                Some(true) => base.eval(n, fuel),
            },
            PartialFn::Join { left, right } => {
                if n % 2 == 0 {
                    left.eval(n / 2, fuel)
                } else {
                    right.eval(n / 2, fuel)
                }
            }
            PartialFn::Meet { left, right, budget } => {
                let (d, e, x) = untriple(n);
                meet_eval(&[(d, left.as_ref()), (e, right.as_ref())], x, budget, fuel)
            }
            PartialFn::MultiMeet { parts, budget } => match decode_radix(n) {
                Some(comps) if comps.len() == parts.len() + 1 => {
                    let x = comps[parts.len()];
                    let legs: Vec<(Nat, &PartialFn)> =
                        comps.iter().zip(parts.iter()).map(|(&e, p)| (e, p.as_ref())).collect();
                    meet_eval(&legs, x, budget, fuel)
                }
                _ => Undefined,
            },
            PartialFn::Graph { base } => {
                let (x, m) = unpair(n);
                match base.eval(x, fuel) {
                    Defined(v) => Defined((v == m) as Nat),
                    other => other,
                }
            }
            PartialFn::Jump { base, budget, op } => {
                let b = lazy_budget(budget, fuel);
                match op {
                    JumpKind::K => match k_jump(base, n, &b) {
                        JumpAnswer::One => Defined(1),
                        JumpAnswer::ZeroCertified => Defined(0),
                        JumpAnswer::UndefinedFrozen { .. } => Undefined,
                        JumpAnswer::Unknown { .. } => Unknown,
                    },
                    JumpKind::K0 => k0(base, n, &b).value.map_or(Unknown, Defined),
                }
            }
            PartialFn::Dialogue { program, base, budget } => answer_of(&lazy_run(program, base, n, budget, fuel)),
        }
    }

    /// Evaluates every input below `bound`.
    pub fn sample(&self, bound: Nat, fuel: u64) -> Vec<(Nat, OracleAnswer)> {
        (0..bound).map(|n| (n, self.eval(n, fuel))).collect()
    }

    /// The defined part below `bound` as a table, or `None` if any input is unknown.
    pub fn to_table(&self, bound: Nat, fuel: u64) -> Option<BTreeMap<Nat, Nat>> {
        let mut out = BTreeMap::new();
        for (n, a) in self.sample(bound, fuel) {
            match a {
                OracleAnswer::Defined(v) => {
                    out.insert(n, v);
                }
                OracleAnswer::Undefined => {}
                OracleAnswer::Unknown => return None,
            }
        }
        Some(out)
    }

    /// Entries of a finite table; `None` for the other representations.
    pub fn entries(&self) -> Option<&BTreeMap<Nat, Nat>> {
        match self {
            PartialFn::Table { entries } => Some(entries),
            _ => None,
        }
    }
}

/// Runs `Φ_{e_i}[g_i](x)` for every leg in order from a single step pool.
fn meet_eval(legs: &[(Nat, &PartialFn)], x: Nat, stored: &Budget, fuel: u64) -> OracleAnswer {
    let mut remaining = stored.step_fuel.min(fuel);
    let mut common: Option<Nat> = None;
    let mut unknown = false;
    for &(e, g) in legs {
        if remaining == 0 {
            unknown = true;
            break;
        }
        let b = Budget { step_fuel: remaining, ..*stored };
        let out = run_dialogue(&crate::machine::decode(e), g, x, &b);
        remaining -= out.steps.min(remaining);
        match out.halted() {
            Some(v) => match common {
                Some(c) if c != v => return OracleAnswer::Undefined,
                _ => common = Some(v),
            },
            None if out.never_halts() => return OracleAnswer::Undefined,
            None => unknown = true,
        }
    }
    match (unknown, common) {
        (false, Some(v)) => OracleAnswer::Defined(v),
        _ => OracleAnswer::Unknown,
    }
}
