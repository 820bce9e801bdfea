use serde::{Deserialize, Serialize};

use super::{decode, encode, Meter, Native, Program, Step};
use crate::error::Error;
use crate::pairing::Nat;
use crate::partialfn::{OracleAnswer, PartialFn};

/// Finite stand-in for unbounded computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BudgetRepr")]
pub struct Budget {
    /// Machine steps summed over all rounds of one dialogue.
    pub step_fuel: u64,
    /// Maximum number of answered oracle queries.
    pub round_cap: u64,
    /// Step fuel handed to a lazy oracle for each query.
    pub oracle_fuel: u64,
}

#[derive(Deserialize)]
struct BudgetRepr {
    step_fuel: u64,
    round_cap: u64,
    oracle_fuel: u64,
}

impl TryFrom<BudgetRepr> for Budget {
    type Error = Error;

    fn try_from(r: BudgetRepr) -> Result<Self, Self::Error> {
        Budget::new(r.step_fuel, r.round_cap, r.oracle_fuel)
    }
}

impl Budget {
    pub fn new(step_fuel: u64, round_cap: u64, oracle_fuel: u64) -> Result<Budget, Error> {
        if step_fuel == 0 || round_cap == 0 || oracle_fuel == 0 {
            return Err(Error::InvalidBudget(format!(
                "all budget fields must be positive (steps {step_fuel}, rounds {round_cap}, oracle {oracle_fuel})"
            )));
        }
        Ok(Budget { step_fuel, round_cap, oracle_fuel })
    }

    pub fn scaled(&self, factor: u64) -> Budget {
        Budget {
            step_fuel: self.step_fuel.saturating_mul(factor),
            round_cap: self.round_cap.saturating_mul(factor),
            oracle_fuel: self.oracle_fuel.saturating_mul(factor),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget { step_fuel: 200_000, round_cap: 256, oracle_fuel: 50_000 }
    }
}

/// Outcome of one `Φ(n, a_0, …, a_{s-1})` evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum StepFunctionalResult {
    /// `i = 1`: output `q`; `i = 0`: query `q`.
    HaltPair { i: u8, q: Nat },
    Exhausted { steps: u64 },
    CertifiedDivergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExhaustReason {
    StepBudget,
    RoundCap,
    OracleBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Halted(Nat),
    /// The first query outside the oracle's domain.
    Frozen(Nat),
    /// `certified_divergent` marks a round in which `Φ` itself provably never
    /// halts, i.e. `Φ[g](n)↑` without an out-of-domain query.
    Exhausted { reason: ExhaustReason, certified_divergent: bool },
}

/// `Φ[g](n)` at a budget, with the full query/answer history.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "OutcomeRepr", try_from = "OutcomeRepr")]
pub struct DialogueOutcome {
    pub outcome: Outcome,
    pub trace: Vec<(Nat, Nat)>,
    pub steps: u64,
}

impl DialogueOutcome {
    pub fn halted(&self) -> Option<Nat> {
        match self.outcome {
            Outcome::Halted(v) => Some(v),
            _ => None,
        }
    }

    pub fn frozen(&self) -> Option<Nat> {
        match self.outcome {
            Outcome::Frozen(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.outcome, Outcome::Exhausted { certified_divergent: true, .. })
    }

    /// Halted, frozen, or certified divergent: answers that more budget cannot change.
    pub fn is_final(&self) -> bool {
        !matches!(self.outcome, Outcome::Exhausted { certified_divergent: false, .. })
    }

    /// Certainly not halting: frozen or certified divergent.
    pub fn never_halts(&self) -> bool {
        self.frozen().is_some() || self.is_divergent()
    }

    pub fn queries(&self) -> impl Iterator<Item = Nat> + '_ {
        self.trace.iter().map(|&(q, _)| q)
    }
}

#[derive(Serialize, Deserialize)]
struct OutcomeRepr {
    outcome: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    value: Option<Nat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    query: Option<Nat>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    reason: Option<ExhaustReason>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    divergent: Option<bool>,
    trace: Vec<(Nat, Nat)>,
    steps: u64,
}

impl From<DialogueOutcome> for OutcomeRepr {
    fn from(d: DialogueOutcome) -> Self {
        let mut r = OutcomeRepr {
            outcome: String::new(),
            value: None,
            query: None,
            reason: None,
            divergent: None,
            trace: d.trace,
            steps: d.steps,
        };
        match d.outcome {
            Outcome::Halted(v) => {
                r.outcome = "halted".into();
                r.value = Some(v);
            }
            Outcome::Frozen(q) => {
                r.outcome = "frozen".into();
                r.query = Some(q);
            }
            Outcome::Exhausted { reason, certified_divergent } => {
                r.outcome = "exhausted".into();
                r.reason = Some(reason);
                r.divergent = Some(certified_divergent);
            }
        }
        r
    }
}

impl TryFrom<OutcomeRepr> for DialogueOutcome {
    type Error = Error;

    fn try_from(r: OutcomeRepr) -> Result<Self, Self::Error> {
        let bad = || Error::Parse(format!("malformed outcome `{}`", r.outcome));
        let outcome = match r.outcome.as_str() {
            "halted" => Outcome::Halted(r.value.ok_or_else(bad)?),
            "frozen" => Outcome::Frozen(r.query.ok_or_else(bad)?),
            "exhausted" => Outcome::Exhausted {
                reason: r.reason.ok_or_else(bad)?,
                certified_divergent: r.divergent.ok_or_else(bad)?,
            },
            _ => return Err(bad()),
        };
        Ok(DialogueOutcome { outcome, trace: r.trace, steps: r.steps })
    }
}

/// Evaluates `Φ(n, answers)` once with the given fuel.
pub fn step_functional(p: &Program, n: Nat, answers: &[Nat], fuel: u64) -> StepFunctionalResult {
    let mut meter = Meter::new(fuel);
    match p.step(n, answers, &mut meter) {
        Step::Output(v) => StepFunctionalResult::HaltPair { i: 1, q: v },
        Step::Query(q) => StepFunctionalResult::HaltPair { i: 0, q },
        Step::Diverges => StepFunctionalResult::CertifiedDivergent,
        Step::OutOfFuel => StepFunctionalResult::Exhausted { steps: meter.used },
    }
}

/// Runs the sequential oracle protocol: each round re-evaluates `Φ` on the
/// input and all answers so far; an output halts, a query is put to `g`, and a
/// query outside `dom(g)` freezes the computation.
pub fn run_dialogue(p: &Program, g: &PartialFn, n: Nat, b: &Budget) -> DialogueOutcome {
    let mut answers: Vec<Nat> = Vec::new();
    let mut trace: Vec<(Nat, Nat)> = Vec::new();
    let mut steps: u64 = 0;
    let exhausted = |reason, certified_divergent| Outcome::Exhausted { reason, certified_divergent };
    let outcome = loop {
        let mut meter = Meter::new(b.step_fuel - steps);
        let step = p.step(n, &answers, &mut meter);
        steps += meter.used;
        match step {
            Step::Output(v) => break Outcome::Halted(v),
            Step::Diverges => break exhausted(ExhaustReason::StepBudget, true),
            Step::OutOfFuel => break exhausted(ExhaustReason::StepBudget, false),
            Step::Query(q) => {
                if trace.len() as u64 >= b.round_cap {
                    break exhausted(ExhaustReason::RoundCap, false);
                }
                match g.eval(q, b.oracle_fuel) {
                    OracleAnswer::Defined(a) => {
                        answers.push(a);
                        trace.push((q, a));
                    }
                    OracleAnswer::Undefined => break Outcome::Frozen(q),
                    OracleAnswer::Unknown => break exhausted(ExhaustReason::OracleBudget, false),
                }
            }
        }
    };
    DialogueOutcome { outcome, trace, steps }
}

/// The application `e ∗_f n ≃ Φ_e[f](n)` of the relativized Kleene algebra.
pub fn apply_pca(e: Nat, n: Nat, f: &PartialFn, b: &Budget) -> DialogueOutcome {
    run_dialogue(&decode(e), f, n, b)
}

/// A program `r` with `Φ_r[h] ⊇ Φ_p[Φ_q[h]]`.
pub fn compose(p: &Program, q: &Program) -> Program {
    Program::Native(Native::Compose { outer: Box::new(p.clone()), inner: Box::new(q.clone()) })
}

/// The least index `d ≥ k` reached from `e` by appending meaningless lines,
/// or `e` itself when `e ≥ k`.
pub fn pad(e: Nat, k: Nat) -> Result<Nat, Error> {
    let mut p = decode(e);
    let mut d = e;
    while d < k {
        p = p.padded();
        d = encode(&p)?;
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceVerdict {
    CertifiedDivergent,
    Unknown,
}

/// Sound, incomplete divergence check: runs `Φ(n, answers)` until a machine
/// configuration repeats or `memo_cap` configurations have been stored.
pub fn certify_divergence(p: &Program, n: Nat, answers: &[Nat], memo_cap: usize) -> DivergenceVerdict {
    let mut meter = Meter::new(u64::MAX);
    meter.memo_cap = memo_cap;
    meter.stop_on_memo_full = true;
    match p.step(n, answers, &mut meter) {
        Step::Diverges => DivergenceVerdict::CertifiedDivergent,
        _ => DivergenceVerdict::Unknown,
    }
}
