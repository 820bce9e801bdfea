//! Finite-stage degree constructions.
//!
//! Each construction runs stage by stage over `e = 0, 1, …`, and every stage
//! emits a [`StageCertificate`]: the chosen numbers, the dialogues that
//! justified them, and the bounded halting questions it asked. A finished run
//! is a [`Transcript`]; [`replay`] re-executes all of it.

mod antichain;
mod certificate;
mod density;
mod jump_inversion;
mod nondistributive;
mod quasiminimal;
pub mod scenarios;
mod spoilers;

pub use antichain::build_antichain;
pub use certificate::{
    BoundedAnswer, BoundedHaltingOracle, Evidence, HaltAnswer, Measure, OracleRef, Restraint, StageCertificate,
    Status,
};
pub use density::build_density;
pub use jump_inversion::build_jump_inversion;
pub use nondistributive::{build_nondistributive, nondistributive_strategy, requirement_input, NondistributiveState};
pub use quasiminimal::build_quasiminimal;
pub use spoilers::{spoil_infimum, spoil_supremum};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::machine::{Budget, Program};
use crate::pairing::Nat;
use crate::partialfn::PartialFn;
use crate::search::{search_reduction, verify_reduction, SearchResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionName {
    Quasiminimal,
    Density,
    Antichain,
    JumpInversion,
    SupSpoiler,
    InfSpoiler,
    Nondistributive,
}

impl ConstructionName {
    pub const ALL: [ConstructionName; 7] = [
        ConstructionName::Quasiminimal,
        ConstructionName::Density,
        ConstructionName::Antichain,
        ConstructionName::JumpInversion,
        ConstructionName::SupSpoiler,
        ConstructionName::InfSpoiler,
        ConstructionName::Nondistributive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionName::Quasiminimal => "quasiminimal",
            ConstructionName::Density => "density",
            ConstructionName::Antichain => "antichain",
            ConstructionName::JumpInversion => "jump-inversion",
            ConstructionName::SupSpoiler => "sup-spoiler",
            ConstructionName::InfSpoiler => "inf-spoiler",
            ConstructionName::Nondistributive => "nondistributive",
        }
    }
}

impl fmt::Display for ConstructionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstructionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstructionName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown construction `{s}`")))
    }
}

/// Construction parameters, stored in the transcript header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case")]
pub enum Params {
    Quasiminimal { e_max: Nat, universe: Nat, index_bound: Nat },
    Density { e_max: Nat, universe: Nat, index_bound: Nat },
    Antichain { k: u32, e_max: Nat, universe: Nat, index_bound: Nat, extension_bits: u32 },
    JumpInversion { e_max: Nat, value_bound: Nat, input_bound: Nat },
    SupSpoiler { e_max: Nat, input_bound: Nat, column_width: Nat, index_bound: Nat },
    InfSpoiler { e_max: Nat, legs: Vec<Nat>, input_bound: Nat, index_bound: Nat },
    Nondistributive { stages: Nat, x: Nat },
}

impl Params {
    pub fn name(&self) -> ConstructionName {
        match self {
            Params::Quasiminimal { .. } => ConstructionName::Quasiminimal,
            Params::Density { .. } => ConstructionName::Density,
            Params::Antichain { .. } => ConstructionName::Antichain,
            Params::JumpInversion { .. } => ConstructionName::JumpInversion,
            Params::SupSpoiler { .. } => ConstructionName::SupSpoiler,
            Params::InfSpoiler { .. } => ConstructionName::InfSpoiler,
            Params::Nondistributive { .. } => ConstructionName::Nondistributive,
        }
    }
}

/// A reduction fact checked at the working bounds: a hypothesis verified
/// before stage 0, or a property of the finished objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    pub reduced: String,
    pub oracle: String,
    pub index_bound: Nat,
    pub domain: Vec<Nat>,
    pub expect_witness: bool,
    pub witness: Option<Program>,
    pub refuted_indices: u64,
    pub unknown_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub params: Params,
    pub budget: Budget,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub stages: u64,
    pub satisfied: u64,
    pub inconclusive: u64,
}

impl Summary {
    fn of(stages: &[StageCertificate]) -> Summary {
        let satisfied = stages.iter().filter(|s| s.status == Status::Satisfied).count() as u64;
        Summary { stages: stages.len() as u64, satisfied, inconclusive: stages.len() as u64 - satisfied }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub header: Header,
    pub objects: BTreeMap<String, PartialFn>,
    pub stages: Vec<StageCertificate>,
    pub summary: Summary,
}

impl Transcript {
    pub(crate) fn new(
        params: Params,
        budget: Budget,
        claims: Vec<Claim>,
        objects: BTreeMap<String, PartialFn>,
        mut stages: Vec<StageCertificate>,
    ) -> Transcript {
        for s in &mut stages {
            s.seal();
        }
        let summary = Summary::of(&stages);
        Transcript {
            header: Header { schema_version: SCHEMA_VERSION, params, budget, claims },
            objects,
            stages,
            summary,
        }
    }

    pub fn object(&self, name: &str) -> Result<&PartialFn, Error> {
        self.objects
            .get(name)
            .ok_or_else(|| mismatch("objects", format!("missing object `{name}`")))
    }

    /// Pretty JSON with a trailing newline; the only accepted on-disk form.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("transcripts serialize");
        v.push(b'\n');
        v
    }

    /// Parses a transcript and insists that the bytes are exactly its canonical form.
    pub fn from_bytes(bytes: &[u8]) -> Result<Transcript, Error> {
        let t: Transcript = serde_json::from_slice(bytes).map_err(|e| {
            let offset = line_offset(bytes, e.line());
            mismatch(location_of(bytes, offset), format!("does not parse: {e}"))
        })?;
        let canonical = t.to_bytes();
        if canonical != bytes {
            let offset = canonical.iter().zip(bytes).position(|(a, b)| a != b).unwrap_or(bytes.len());
            return Err(mismatch(
                location_of(bytes, offset),
                "bytes differ from the canonical serialization".into(),
            ));
        }
        Ok(t)
    }
}

fn line_offset(bytes: &[u8], line: usize) -> usize {
    if line <= 1 {
        return 0;
    }
    bytes.iter().enumerate().filter(|(_, &b)| b == b'\n').nth(line - 2).map_or(bytes.len(), |(i, _)| i + 1)
}

/// Names the stage whose certificate contains byte `offset` of a pretty
/// printed transcript, found from the last `"stage"` field before it.
fn location_of(bytes: &[u8], offset: usize) -> String {
    let head = &bytes[..offset.min(bytes.len())];
    let Some(stages) = head.windows(12).rposition(|w| w == b"\n  \"stages\":") else {
        return "transcript".into();
    };
    let text = String::from_utf8_lossy(&head[stages..]);
    if text.contains("\n  \"summary\":") {
        return "summary".into();
    }
    let count = text.lines().filter(|l| *l == "    {").count();
    let e = text.lines().filter_map(|l| l.strip_prefix("      \"stage\": ")).last();
    match e {
        Some(e) if count > 0 => format!("stage {} (e = {})", count - 1, e.trim_end_matches(',')),
        _ if count > 0 => format!("stage {}", count - 1),
        _ => "transcript".into(),
    }
}

pub(crate) fn mismatch(location: impl Into<String>, detail: String) -> Error {
    Error::ReplayMismatch { location: location.into(), detail }
}

/// Searches for a reduction and aborts the construction unless the outcome
/// is the expected one.
pub(crate) fn claim(
    claim: &str,
    names: (&str, &str),
    objects: &BTreeMap<String, PartialFn>,
    index_bound: Nat,
    domain: &[Nat],
    b: &Budget,
    expect_witness: bool,
) -> Result<Claim, Error> {
    let (reduced, oracle) = names;
    let f = &objects[reduced];
    let g = &objects[oracle];
    let res = search_reduction(f, g, index_bound, domain, b);
    let (witness, refuted_indices, unknown_count) = match &res {
        SearchResult::Witness(w) => (Some(w.program.clone()), 0, 0),
        SearchResult::Refuted(c) => (None, c.failures.len() as u64, c.unknown_count),
    };
    if witness.is_some() != expect_witness {
        let what = match res.witness() {
            Some(w) => format!("a witness was found: {:?}", w.program),
            None => "no witness found".to_string(),
        };
        return Err(Error::ContractAbort(format!("{claim}: {what} up to index {index_bound}")));
    }
    Ok(Claim {
        claim: claim.into(),
        reduced: reduced.into(),
        oracle: oracle.into(),
        index_bound,
        domain: domain.to_vec(),
        expect_witness,
        witness,
        refuted_indices,
        unknown_count,
    })
}

/// Like [`claim`] but for an already known witness program.
pub(crate) fn claim_with(
    claim: &str,
    names: (&str, &str),
    objects: &BTreeMap<String, PartialFn>,
    program: &Program,
    domain: &[Nat],
    b: &Budget,
) -> Result<Claim, Error> {
    let (reduced, oracle) = names;
    verify_reduction(program, &objects[reduced], &objects[oracle], domain, b)
        .map_err(|f| Error::ContractAbort(format!("{claim}: {}", f.describe())))?;
    Ok(Claim {
        claim: claim.into(),
        reduced: reduced.into(),
        oracle: oracle.into(),
        index_bound: 0,
        domain: domain.to_vec(),
        expect_witness: true,
        witness: Some(program.clone()),
        refuted_indices: 0,
        unknown_count: 0,
    })
}

/// Rebuilds the transcript from its header and input objects.
fn regenerate(t: &Transcript) -> Result<Transcript, Error> {
    let b = t.header.budget;
    match &t.header.params {
        Params::Quasiminimal { .. } => quasiminimal::regenerate(t, b),
        Params::Density { .. } => density::regenerate(t, b),
        Params::Antichain { .. } => antichain::regenerate(t, b),
        Params::JumpInversion { .. } => jump_inversion::regenerate(t, b),
        Params::SupSpoiler { .. } | Params::InfSpoiler { .. } => spoilers::regenerate(t, b),
        Params::Nondistributive { .. } => nondistributive::regenerate(t, b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub construction: ConstructionName,
    pub stages: u64,
    pub evidence_runs: u64,
    pub bounded_answers: u64,
    pub satisfied: u64,
    pub inconclusive: u64,
}

/// Re-verifies a transcript: digests, every recorded dialogue and bounded
/// answer, restraints against the final objects, the construction's own
/// claims, and finally a rebuild from the header that must match exactly.
pub fn replay(t: &Transcript) -> Result<ReplayReport, Error> {
    if t.header.schema_version != SCHEMA_VERSION {
        return Err(mismatch("header", format!("schema version {}", t.header.schema_version)));
    }
    // integrity of every certificate first, then re-execution
    for (i, s) in t.stages.iter().enumerate() {
        s.check_digest().map_err(|d| mismatch(format!("stage {i} (e = {})", s.stage), d))?;
    }
    let mut evidence_runs = 0;
    let mut bounded_answers = 0;
    for (i, s) in t.stages.iter().enumerate() {
        let loc = format!("stage {i} (e = {})", s.stage);
        evidence_runs += s.replay_evidence(&t.objects).map_err(|d| mismatch(&loc, d))?;
        bounded_answers += s.replay_answers(&t.objects).map_err(|d| mismatch(&loc, d))?;
        for r in &s.restraints {
            r.check(&t.objects).map_err(|d| mismatch(&loc, d))?;
        }
    }
    if t.summary != Summary::of(&t.stages) {
        return Err(mismatch("summary", "counts disagree with the stages".into()));
    }
    match &t.header.params {
        Params::Quasiminimal { .. } => quasiminimal::check(t)?,
        Params::Density { .. } => density::check(t)?,
        Params::Antichain { .. } => antichain::check(t)?,
        Params::JumpInversion { .. } => jump_inversion::check(t)?,
        Params::SupSpoiler { .. } | Params::InfSpoiler { .. } => spoilers::check(t)?,
        Params::Nondistributive { .. } => nondistributive::check(t)?,
    }
    let again = regenerate(t)?;
    if again != *t {
        let at = again
            .stages
            .iter()
            .zip(&t.stages)
            .position(|(a, b)| a != b)
            .map_or("transcript".to_string(), |i| format!("stage {i}"));
        return Err(mismatch(at, "rebuilding from the header gives a different transcript".into()));
    }
    Ok(ReplayReport {
        construction: t.header.params.name(),
        stages: t.summary.stages,
        evidence_runs,
        bounded_answers,
        satisfied: t.summary.satisfied,
        inconclusive: t.summary.inconclusive,
    })
}

/// Parses and replays transcript bytes.
pub fn replay_bytes(bytes: &[u8]) -> Result<ReplayReport, Error> {
    replay(&Transcript::from_bytes(bytes)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub construction: ConstructionName,
    pub requested: Nat,
    pub satisfied: u64,
    pub inconclusive: u64,
    pub replay_failures: u64,
    pub transcript: Option<Transcript>,
}

/// Runs a bundled construction over the first `count` requirements and
/// replays the result. `count = 0` gives an empty report.
pub fn run_requirement_suite(name: ConstructionName, count: Nat, b: &Budget) -> Result<SuiteReport, Error> {
    if count == 0 {
        return Ok(SuiteReport {
            construction: name,
            requested: 0,
            satisfied: 0,
            inconclusive: 0,
            replay_failures: 0,
            transcript: None,
        });
    }
    let t = scenarios::bundled(name, Some(count - 1), b)?;
    let replay_failures = match replay_bytes(&t.to_bytes()) {
        Ok(_) => 0,
        Err(_) => 1,
    };
    Ok(SuiteReport {
        construction: name,
        requested: count,
        satisfied: t.summary.satisfied,
        inconclusive: t.summary.inconclusive,
        replay_failures,
        transcript: Some(t),
    })
}
