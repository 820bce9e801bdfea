use serde::{Deserialize, Serialize};

use super::PartialFn;
use crate::error::Error;
use crate::machine::{compose, decode, encode, run_dialogue, Budget, ExhaustReason, Native, Outcome, Program};
use crate::pairing::Nat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpKind {
    /// `K(f)(e)`: `1` on halting, `0` on divergence without a query outside
    /// `dom(f)`, undefined on a freeze.
    K,
    /// `K₀(f)(e)`: `1` on halting, `0` otherwise.
    K0,
}

/// Classification of `Φ_e[f](e)` at a budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum JumpAnswer {
    One,
    ZeroCertified,
    UndefinedFrozen { query: Nat },
    Unknown { reason: ExhaustReason },
}

impl JumpAnswer {
    /// `K(f)(e)` when it is settled and defined.
    pub fn value(self) -> Option<Nat> {
        match self {
            JumpAnswer::One => Some(1),
            JumpAnswer::ZeroCertified => Some(0),
            _ => None,
        }
    }

    /// Everything except `Unknown` is stable under larger budgets.
    pub fn is_final(self) -> bool {
        !matches!(self, JumpAnswer::Unknown { .. })
    }

    pub fn label(self) -> &'static str {
        match self {
            JumpAnswer::One => "one",
            JumpAnswer::ZeroCertified => "zero_certified",
            JumpAnswer::UndefinedFrozen { .. } => "undefined_frozen",
            JumpAnswer::Unknown { .. } => "unknown",
        }
    }
}

/// `K₀` keeps the four-way classification and adds its own 0/1 reading, in
/// which a freeze counts as non-halting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct K0Answer {
    pub class: JumpAnswer,
    pub value: Option<Nat>,
}

pub fn k_jump(f: &PartialFn, e: Nat, b: &Budget) -> JumpAnswer {
    let out = run_dialogue(&decode(e), f, e, b);
    match out.outcome {
        Outcome::Halted(_) => JumpAnswer::One,
        Outcome::Frozen(query) => JumpAnswer::UndefinedFrozen { query },
        Outcome::Exhausted { certified_divergent: true, .. } => JumpAnswer::ZeroCertified,
        Outcome::Exhausted { reason, .. } => JumpAnswer::Unknown { reason },
    }
}

pub fn k0(f: &PartialFn, e: Nat, b: &Budget) -> K0Answer {
    let class = k_jump(f, e, b);
    let value = match class {
        JumpAnswer::One => Some(1),
        JumpAnswer::ZeroCertified | JumpAnswer::UndefinedFrozen { .. } => Some(0),
        JumpAnswer::Unknown { .. } => None,
    };
    K0Answer { class, value }
}

/// `i(n)`: an index with `Φ_{i(n)}[f](x) ≃ f(n)` for every `x`.
pub fn inflation_index(n: Nat) -> Result<Nat, Error> {
    encode(&Program::query_const(n))
}

/// `b(d, e)`: an index with `Φ_{b(d,e)}[g](x) ≃ Φ_e[Φ_d[g]](e)` for every `x`,
/// so `K(Φ_d[g])(e)` is read off `K(g)` at `b(d, e)`.
pub fn monotone_transfer(d: Nat, e: Nat) -> Result<Nat, Error> {
    let composite = compose(&decode(e), &decode(d));
    encode(&Program::Native(Native::FixInput { program: Box::new(composite), input: e }))
}
