use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::pairing::{decode_list, encode_list, pair, unpair, Nat};

/// One instruction of the register machine.
///
/// `DecJ(r, l)` jumps to `l` when register `r` is zero and otherwise
/// decrements it and falls through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instr {
    Inc(Nat),
    DecJ(Nat, Nat),
    Jmp(Nat),
    Halt(Nat),
    Nop,
}

impl Instr {
    /// Bijective instruction code: `0` is `NOP`, otherwise the low two bits of
    /// `code - 1` pick the opcode and the rest is the operand.
    pub fn code(&self) -> Option<Nat> {
        let (kind, operand) = match *self {
            Instr::Nop => return Some(0),
            Instr::Inc(r) => (0, r),
            Instr::DecJ(r, l) => (1, pair(r, l)?),
            Instr::Jmp(l) => (2, l),
            Instr::Halt(r) => (3, r),
        };
        operand.checked_mul(4)?.checked_add(kind + 1)
    }

    pub fn from_code(code: Nat) -> Instr {
        if code == 0 {
            return Instr::Nop;
        }
        let k = code - 1;
        let operand = k / 4;
        match k % 4 {
            0 => Instr::Inc(operand),
            1 => {
                let (r, l) = unpair(operand);
                Instr::DecJ(r, l)
            }
            2 => Instr::Jmp(operand),
            _ => Instr::Halt(operand),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Inc(r) => write!(f, "INC {r}"),
            Instr::DecJ(r, l) => write!(f, "DECJ {r} {l}"),
            Instr::Jmp(l) => write!(f, "JMP {l}"),
            Instr::Halt(r) => write!(f, "HALT {r}"),
            Instr::Nop => write!(f, "NOP"),
        }
    }
}

impl FromStr for Instr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<Nat, Error> {
            words
                .get(i)
                .ok_or_else(|| Error::Parse(format!("missing operand in `{s}`")))?
                .parse::<Nat>()
                .map_err(|e| Error::Parse(format!("bad operand in `{s}`: {e}")))
        };
        let arity = |n: usize| -> Result<(), Error> {
            if words.len() == n + 1 {
                Ok(())
            } else {
                Err(Error::Parse(format!("wrong operand count in `{s}`")))
            }
        };
        let op = words.first().ok_or_else(|| Error::Parse("empty instruction".into()))?;
        match op.to_ascii_uppercase().as_str() {
            "INC" => arity(1).and_then(|_| Ok(Instr::Inc(num(1)?))),
            "DECJ" => arity(2).and_then(|_| Ok(Instr::DecJ(num(1)?, num(2)?))),
            "JMP" => arity(1).and_then(|_| Ok(Instr::Jmp(num(1)?))),
            "HALT" => arity(1).and_then(|_| Ok(Instr::Halt(num(1)?))),
            "NOP" => arity(0).map(|_| Instr::Nop),
            other => Err(Error::Parse(format!("unknown opcode `{other}`"))),
        }
    }
}

impl Serialize for Instr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Instr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Functionals implemented directly by the executor.
///
/// The register machine only sees a bounded window of the answer history and
/// works in unary, so functionals that decode indices, simulate other
/// programs, or build coded queries are provided natively. Each still obeys the
/// round protocol: given `(n, a_0, …, a_{s-1})` it outputs `⟨1, v⟩`, a query
/// `⟨0, q⟩`, or diverges, and every evaluation is charged against fuel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Native {
    /// Query the input, output the answer.
    Echo,
    /// Query `2n`, output the answer.
    JoinLeft,
    /// Query `2n + 1`, output the answer.
    JoinRight,
    /// On `⟨n, m⟩`: query `n`, output `1` if the answer is `m`, else `0`.
    GraphFwd,
    /// Query `⟨n, 0⟩, ⟨n, 1⟩, …` until an answer is `1`, output the count.
    GraphBwd,
    /// On `⟨d, e, n⟩`: behave as program `d` on input `n`.
    RelayLeft,
    /// On `⟨d, e, n⟩`: behave as program `e` on input `n`.
    RelayRight,
    /// Query `i(n)`, the inflation index of `n`, output the answer.
    InflationQuery,
    /// Query `QueryEquals(n, 0), QueryEquals(n, 1), …` until an answer is `1`, output the count.
    JumpDecode,
    Const { value: Nat },
    /// Query `m` regardless of input, output the answer.
    QueryConst { query: Nat },
    /// Query `n`; halt with `1` if the answer is `m`, otherwise loop forever.
    QueryEquals { query: Nat, expected: Nat },
    /// Query `⟨d, e, n⟩`, output the answer.
    MeetQuery { left: Nat, right: Nat },
    /// Run `outer` over the oracle computed by `inner`.
    Compose { outer: Box<Program>, inner: Box<Program> },
    /// Behave as `program` on the fixed input `input`.
    FixInput { program: Box<Program>, input: Nat },
    /// Behave as `even` on `n` for input `2n`, as `odd` on `n` for input `2n + 1`.
    Cases { even: Box<Program>, odd: Box<Program> },
    /// Query `2n + 1` for `b`, then `2⟨n, b, side⟩`, output the second answer.
    LevelRead { level: Nat, side: Nat },
    /// Query `⟨column, n⟩`, output the answer.
    QueryPair { column: Nat },
    /// On a radix tuple `(e_0, …, e_m, x)` with `m ≥ keep`: query
    /// `(e_0, …, e_keep, x)`, output the answer.
    TruncateQuery { keep: Nat },
    /// Behaves exactly as `program`.
    Pad { program: Box<Program> },
    /// Output the first listed value for the input, else behave as `program`.
    Override { table: Vec<(Nat, Nat)>, program: Box<Program> },
    /// Run `program` over `t ⊕ β` where `t` is the listed table and `β` the
    /// real oracle: even queries are answered from the table (a miss
    /// diverges), odd queries `2y + 1` are forwarded as `y`.
    Patch { table: Vec<(Nat, Nat)>, program: Box<Program> },
}

const FIXED: [Native; 9] = [
    Native::Echo,
    Native::JoinLeft,
    Native::JoinRight,
    Native::GraphFwd,
    Native::GraphBwd,
    Native::RelayLeft,
    Native::RelayRight,
    Native::InflationQuery,
    Native::JumpDecode,
];
const TAGS: u64 = 13;

/// A dialogue functional `Φ`: either register-machine code or a native.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Program {
    Code(Vec<Instr>),
    Native(Native),
}

impl Program {
    pub fn native(n: Native) -> Program {
        Program::Native(n)
    }

    pub fn echo() -> Program {
        Program::Native(Native::Echo)
    }

    pub fn constant(value: Nat) -> Program {
        Program::Native(Native::Const { value })
    }

    pub fn query_const(query: Nat) -> Program {
        Program::Native(Native::QueryConst { query })
    }

    /// `JMP 0`.
    pub fn self_loop() -> Program {
        Program::Code(vec![Instr::Jmp(0)])
    }

    pub fn parse(text: &str) -> Result<Program, Error> {
        let mut code = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            code.push(line.parse()?);
        }
        Ok(Program::Code(code))
    }

    /// Text form for machine code; natives have none.
    pub fn to_text(&self) -> Option<String> {
        match self {
            Program::Code(code) => Some(code.iter().map(|i| format!("{i}\n")).collect()),
            Program::Native(_) => None,
        }
    }

    /// Appends one meaningless line: `NOP` for code, a `Pad` wrapper for natives.
    pub fn padded(&self) -> Program {
        match self {
            Program::Code(code) => {
                let mut code = code.clone();
                code.push(Instr::Nop);
                Program::Code(code)
            }
            Program::Native(_) => Program::Native(Native::Pad { program: Box::new(self.clone()) }),
        }
    }

    pub fn instruction_count(&self) -> usize {
        match self {
            Program::Code(code) => code.len(),
            Program::Native(Native::Pad { program }) => 1 + program.instruction_count(),
            Program::Native(_) => 0,
        }
    }
}

/// Gödel number of `p`. Even numbers are machine code, odd numbers natives.
pub fn encode(p: &Program) -> Result<Nat, Error> {
    let too_big = || Error::IndexOverflow(format!("{p:?}"));
    match p {
        Program::Code(code) => {
            let codes: Option<Vec<Nat>> = code.iter().map(Instr::code).collect();
            let list = encode_list(&codes.ok_or_else(too_big)?).ok_or_else(too_big)?;
            list.checked_mul(2).ok_or_else(too_big)
        }
        Program::Native(n) => {
            let k = encode_native(n).ok_or_else(too_big)?;
            k.checked_mul(2).and_then(|v| v.checked_add(1)).ok_or_else(too_big)
        }
    }
}

/// Total inverse of [`encode`].
pub fn decode(index: Nat) -> Program {
    if index % 2 == 0 {
        Program::Code(decode_list(index / 2).into_iter().map(Instr::from_code).collect())
    } else {
        Program::Native(decode_native((index - 1) / 2))
    }
}

fn idx(p: &Program) -> Option<Nat> {
    encode(p).ok()
}

fn encode_table(t: &[(Nat, Nat)]) -> Option<Nat> {
    let items: Option<Vec<Nat>> = t.iter().map(|&(k, v)| pair(k, v)).collect();
    encode_list(&items?)
}

fn decode_table(code: Nat) -> Vec<(Nat, Nat)> {
    decode_list(code).into_iter().map(unpair).collect()
}

fn encode_native(n: &Native) -> Option<Nat> {
    if let Some(pos) = FIXED.iter().position(|f| f == n) {
        return Some(pos as Nat);
    }
    let (tag, payload) = match n {
        Native::Const { value } => (0, *value),
        Native::QueryConst { query } => (1, *query),
        Native::QueryEquals { query, expected } => (2, pair(*query, *expected)?),
        Native::MeetQuery { left, right } => (3, pair(*left, *right)?),
        Native::Compose { outer, inner } => (4, pair(idx(outer)?, idx(inner)?)?),
        Native::FixInput { program, input } => (5, pair(idx(program)?, *input)?),
        Native::Cases { even, odd } => (6, pair(idx(even)?, idx(odd)?)?),
        Native::LevelRead { level, side } => (7, pair(*level, *side)?),
        Native::QueryPair { column } => (8, *column),
        Native::TruncateQuery { keep } => (9, *keep),
        Native::Pad { program } => (10, idx(program)?),
        Native::Override { table, program } => (11, pair(encode_table(table)?, idx(program)?)?),
        Native::Patch { table, program } => (12, pair(encode_table(table)?, idx(program)?)?),
        _ => unreachable!("fixed natives handled above"),
    };
    payload.checked_mul(TAGS)?.checked_add(tag)?.checked_add(FIXED.len() as Nat)
}

fn decode_native(k: Nat) -> Native {
    if (k as usize) < FIXED.len() {
        return FIXED[k as usize].clone();
    }
    let k = k - FIXED.len() as Nat;
    let (tag, payload) = (k % TAGS, k / TAGS);
    let b = |i: Nat| Box::new(decode(i));
    match tag {
        0 => Native::Const { value: payload },
        1 => Native::QueryConst { query: payload },
        2 => {
            let (query, expected) = unpair(payload);
            Native::QueryEquals { query, expected }
        }
        3 => {
            let (left, right) = unpair(payload);
            Native::MeetQuery { left, right }
        }
        4 => {
            let (o, i) = unpair(payload);
            Native::Compose { outer: b(o), inner: b(i) }
        }
        5 => {
            let (p, input) = unpair(payload);
            Native::FixInput { program: b(p), input }
        }
        6 => {
            let (e, o) = unpair(payload);
            Native::Cases { even: b(e), odd: b(o) }
        }
        7 => {
            let (level, side) = unpair(payload);
            Native::LevelRead { level, side }
        }
        8 => Native::QueryPair { column: payload },
        9 => Native::TruncateQuery { keep: payload },
        10 => Native::Pad { program: b(payload) },
        _ => {
            let (t, p) = unpair(payload);
            let table = decode_table(t);
            if tag == 11 {
                Native::Override { table, program: b(p) }
            } else {
                Native::Patch { table, program: b(p) }
            }
        }
    }
}
