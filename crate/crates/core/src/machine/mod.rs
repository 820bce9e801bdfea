//! The register machine, its Gödel numbering, and the dialogue executor.

mod dialogue;
mod exec;
mod native;
mod program;

pub use dialogue::{
    apply_pca, certify_divergence, compose, pad, run_dialogue, step_functional, Budget,
    DialogueOutcome, DivergenceVerdict, ExhaustReason, Outcome, StepFunctionalResult,
};
pub use program::{decode, encode, Instr, Native, Program};

use crate::pairing::Nat;

/// Default number of configurations the cycle detector stores per evaluation.
pub const DEFAULT_MEMO_CAP: usize = 1 << 14;

/// Result of evaluating `Φ(n, a_0, …, a_{s-1})` once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Step {
    Output(Nat),
    Query(Nat),
    Diverges,
    OutOfFuel,
}

/// Step counter shared by nested evaluations.
#[derive(Debug)]
pub(crate) struct Meter {
    pub used: u64,
    limit: u64,
    pub memo_cap: usize,
    /// Set when the cycle detector had to stop storing configurations.
    pub memo_full: bool,
    /// In certification mode a full memo ends the run.
    pub stop_on_memo_full: bool,
}

impl Meter {
    pub fn new(limit: u64) -> Meter {
        Meter { used: 0, limit, memo_cap: DEFAULT_MEMO_CAP, memo_full: false, stop_on_memo_full: false }
    }

    pub fn tick(&mut self) -> bool {
        self.tick_n(1)
    }

    pub fn tick_n(&mut self, k: u64) -> bool {
        if self.limit - self.used < k {
            self.used = self.limit;
            false
        } else {
            self.used += k;
            true
        }
    }
}

impl Program {
    pub(crate) fn step(&self, n: Nat, answers: &[Nat], meter: &mut Meter) -> Step {
        match self {
            Program::Code(code) => exec::run_code(code, n, answers, meter),
            Program::Native(native) => native::step_native(native, n, answers, meter),
        }
    }
}
