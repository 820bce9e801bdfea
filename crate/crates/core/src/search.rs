//! Bounded verification and search for reductions `f ≤ g`.
//!
//! Every claim made here is relative to a finite grid of inputs, an index
//! bound and a [`Budget`]; a refutation says that no program up to the bound
//! works at that budget, nothing more.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::machine::{decode, encode, run_dialogue, Budget, DialogueOutcome, Native, Program};
use crate::pairing::Nat;
use crate::partialfn::{OracleAnswer, PartialFn};

/// Evidence that `f ⊆ Φ_p[g]` on a grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionWitness {
    pub program: Program,
    pub program_index: Option<Nat>,
    pub tested_domain: Vec<Nat>,
    pub budget: Budget,
    pub outcomes: BTreeMap<Nat, DialogueOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Halted with a wrong value, froze, or provably diverged.
    Refuted,
    /// The budget ran out, or `f` itself answered `Unknown`.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub kind: FailureKind,
    pub input: Nat,
    pub expected: Option<Nat>,
    pub outcome: Option<DialogueOutcome>,
}

impl VerifyFailure {
    pub fn describe(&self) -> String {
        let got = match &self.outcome {
            None => "target unknown".to_string(),
            Some(o) => match (o.halted(), o.frozen()) {
                (Some(v), _) => format!("halted {v}"),
                (_, Some(q)) => format!("frozen at {q}"),
                _ if o.is_divergent() => "diverges".to_string(),
                _ => "budget exhausted".to_string(),
            },
        };
        match self.expected {
            Some(v) => format!("input {}: expected {v}, {got}", self.input),
            None => format!("input {}: {got}", self.input),
        }
    }
}

/// Checks `f(n) = Φ_p[g](n)` for every `n ∈ D ∩ dom(f)`, in ascending order.
///
/// A refutation anywhere on the grid wins over an earlier inconclusive input.
pub fn verify_reduction(
    p: &Program,
    f: &PartialFn,
    g: &PartialFn,
    domain: &[Nat],
    b: &Budget,
) -> Result<ReductionWitness, VerifyFailure> {
    let mut grid: Vec<Nat> = domain.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let mut outcomes = BTreeMap::new();
    let mut first_unknown: Option<VerifyFailure> = None;
    for &n in &grid {
        let expected = match f.eval(n, b.oracle_fuel) {
            OracleAnswer::Undefined => continue,
            OracleAnswer::Unknown => {
                first_unknown.get_or_insert(VerifyFailure {
                    kind: FailureKind::Inconclusive,
                    input: n,
                    expected: None,
                    outcome: None,
                });
                continue;
            }
            OracleAnswer::Defined(v) => v,
        };
        let out = run_dialogue(p, g, n, b);
        if out.halted() == Some(expected) {
            outcomes.insert(n, out);
            continue;
        }
        let kind = if out.halted().is_some() || out.never_halts() {
            FailureKind::Refuted
        } else {
            FailureKind::Inconclusive
        };
        let failure = VerifyFailure { kind, input: n, expected: Some(expected), outcome: Some(out) };
        if kind == FailureKind::Refuted {
            return Err(failure);
        }
        first_unknown.get_or_insert(failure);
    }
    match first_unknown {
        Some(f) => Err(f),
        None => Ok(ReductionWitness {
            program_index: encode(p).ok(),
            program: p.clone(),
            tested_domain: grid,
            budget: *b,
            outcomes,
        }),
    }
}

impl ReductionWitness {
    /// Re-runs the witness against `f` and `g` at its own grid and budget.
    pub fn recheck(&self, f: &PartialFn, g: &PartialFn) -> Result<ReductionWitness, VerifyFailure> {
        verify_reduction(&self.program, f, g, &self.tested_domain, &self.budget)
    }
}

/// No index `≤ index_bound` witnesses `f ≤ g` on the grid at the budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonReductionCertificate {
    pub index_bound: Nat,
    pub tested_domain: Vec<Nat>,
    pub budget: Budget,
    pub failures: BTreeMap<Nat, VerifyFailure>,
    /// Entries whose failure is only budget-limited.
    pub unknown_count: u64,
}

impl NonReductionCertificate {
    pub fn is_exact(&self) -> bool {
        self.unknown_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SearchResult {
    Witness(ReductionWitness),
    Refuted(NonReductionCertificate),
}

impl SearchResult {
    pub fn witness(&self) -> Option<&ReductionWitness> {
        match self {
            SearchResult::Witness(w) => Some(w),
            SearchResult::Refuted(_) => None,
        }
    }
}

const CHUNK: Nat = 128;

/// Tries indices `0..=index_bound` in order and returns the least one that
/// verifies, else a certificate listing each index's failure.
pub fn search_reduction(
    f: &PartialFn,
    g: &PartialFn,
    index_bound: Nat,
    domain: &[Nat],
    b: &Budget,
) -> SearchResult {
    let mut failures = BTreeMap::new();
    let mut start: Nat = 0;
    loop {
        let end = start.saturating_add(CHUNK - 1).min(index_bound);
        let results: Vec<(Nat, Result<ReductionWitness, VerifyFailure>)> = (start..=end)
            .into_par_iter()
            .map(|e| (e, verify_reduction(&decode(e), f, g, domain, b)))
            .collect();
        for (e, r) in results {
            match r {
                Ok(w) => return SearchResult::Witness(w),
                Err(fail) => {
                    failures.insert(e, fail);
                }
            }
        }
        if end >= index_bound {
            break;
        }
        start = end + 1;
    }
    let unknown_count = failures.values().filter(|v| v.kind == FailureKind::Inconclusive).count() as u64;
    let mut grid = domain.to_vec();
    grid.sort_unstable();
    grid.dedup();
    SearchResult::Refuted(NonReductionCertificate {
        index_bound,
        tested_domain: grid,
        budget: *b,
        failures,
        unknown_count,
    })
}

/// Which queries [`trace_queries`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Every query, as asked.
    All,
    /// Queries `2y` to a join, reported as `y`.
    Even,
    /// Queries `2y + 1` to a join, reported as `y`.
    Odd,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QueryTrace {
    pub per_input: BTreeMap<Nat, BTreeSet<Nat>>,
    pub union: BTreeSet<Nat>,
}

/// The answered queries of `Φ_p[g](n)` for each `n ∈ D`.
pub fn trace_queries(p: &Program, g: &PartialFn, domain: &[Nat], b: &Budget, side: Side) -> QueryTrace {
    let mut t = QueryTrace::default();
    for &n in domain {
        let out = run_dialogue(p, g, n, b);
        let qs: BTreeSet<Nat> = out
            .queries()
            .filter_map(|q| match side {
                Side::All => Some(q),
                Side::Even => (q % 2 == 0).then_some(q / 2),
                Side::Odd => (q % 2 == 1).then_some(q / 2),
            })
            .collect();
        t.union.extend(qs.iter().copied());
        t.per_input.insert(n, qs);
    }
    t
}

/// Outcome of pushing a witness of `target ≤ left ⊕ right` through the
/// query-set argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySetExtraction {
    /// `Q`: the left-side points the witness actually asked.
    pub left_queries: BTreeSet<Nat>,
    /// The witness re-verified over `(left ↾ Q) ⊕ right`.
    pub restricted: ReductionWitness,
    /// A program with `left ↾ Q` built in, verified over `right` alone.
    pub hard_coded: ReductionWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionFailure {
    /// The given program is not a witness to begin with.
    NotAWitness(VerifyFailure),
    Restricted(VerifyFailure),
    HardCoded(VerifyFailure),
    /// `left` answered `Unknown` at a traced point.
    LeftUnknown(Nat),
}

/// Given `p` witnessing `target ≤ left ⊕ right` on `D`, restricts `left` to
/// the traced set `Q` and re-verifies, then hard-codes `left ↾ Q` into a
/// program that reduces `target` to `right`.
pub fn extract_query_set(
    p: &Program,
    target: &PartialFn,
    left: &PartialFn,
    right: &PartialFn,
    domain: &[Nat],
    b: &Budget,
) -> Result<QuerySetExtraction, ExtractionFailure> {
    let joined = left.join(right);
    let w = verify_reduction(p, target, &joined, domain, b).map_err(ExtractionFailure::NotAWitness)?;
    let q: BTreeSet<Nat> = w
        .outcomes
        .values()
        .flat_map(|o| o.queries())
        .filter(|q| q % 2 == 0)
        .map(|q| q / 2)
        .collect();
    let restricted = verify_reduction(p, target, &left.restrict(q.iter().copied()).join(right), domain, b)
        .map_err(ExtractionFailure::Restricted)?;
    let mut table = Vec::with_capacity(q.len());
    for &x in &q {
        match left.eval(x, b.oracle_fuel) {
            OracleAnswer::Defined(v) => table.push((x, v)),
            _ => return Err(ExtractionFailure::LeftUnknown(x)),
        }
    }
    let patched = Program::Native(Native::Patch { table, program: Box::new(p.clone()) });
    let hard_coded =
        verify_reduction(&patched, target, right, domain, b).map_err(ExtractionFailure::HardCoded)?;
    Ok(QuerySetExtraction { left_queries: q, restricted, hard_coded })
}

/// `{n ≤ input_bound : Φ_e[f](n) halts within b}`, found by dovetailing:
/// every pending input gets a fuel slice per pass, the slice doubling each
/// pass up to the full step budget.
pub fn ce_enumerate(e: Nat, f: &PartialFn, input_bound: Nat, b: &Budget) -> BTreeSet<Nat> {
    let p = decode(e);
    let mut pending: Vec<Nat> = (0..=input_bound).collect();
    let mut found = BTreeSet::new();
    let mut slice = b.step_fuel.min(64);
    loop {
        let slice_budget = Budget { step_fuel: slice, ..*b };
        pending.retain(|&n| {
            let out = run_dialogue(&p, f, n, &slice_budget);
            if out.halted().is_some() {
                found.insert(n);
            }
            !out.is_final()
        });
        if pending.is_empty() || slice >= b.step_fuel {
            break;
        }
        slice = slice.saturating_mul(2).min(b.step_fuel);
    }
    found
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `f ≤ g`.
    pub forward: SearchResult,
    /// `g ≤ f`.
    pub backward: SearchResult,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.forward.witness().is_some() && self.backward.witness().is_some()
    }
}

pub fn check_equivalence(
    f: &PartialFn,
    g: &PartialFn,
    index_bound: Nat,
    domain: &[Nat],
    b: &Budget,
) -> EquivalenceReport {
    EquivalenceReport {
        forward: search_reduction(f, g, index_bound, domain, b),
        backward: search_reduction(g, f, index_bound, domain, b),
    }
}
