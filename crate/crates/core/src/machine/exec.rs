use std::collections::HashSet;

use super::{Instr, Meter, Step};
use crate::pairing::Nat;

#[derive(Clone, Copy)]
enum Op {
    Inc(usize),
    DecJ(usize, Nat),
    Jmp(Nat),
    Halt(usize),
    Nop,
}

/// Runs machine code on input `n` with answers `a_0, …`.
///
/// Registers start as `r0 = n`, `r1 = s` (the number of answers) and
/// `r(2 + i) = a_i`; all others are zero. `HALT r` outputs the pair
/// `⟨i, q⟩ = 2q + i` held in `r`. Falling off the end never halts.
pub(super) fn run_code(code: &[Instr], n: Nat, answers: &[Nat], meter: &mut Meter) -> Step {
    let mut ids: Vec<Nat> = code
        .iter()
        .filter_map(|i| match *i {
            Instr::Inc(r) | Instr::DecJ(r, _) | Instr::Halt(r) => Some(r),
            _ => None,
        })
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let slot = |r: Nat| ids.binary_search(&r).expect("register collected above");
    let ops: Vec<Op> = code
        .iter()
        .map(|i| match *i {
            Instr::Inc(r) => Op::Inc(slot(r)),
            Instr::DecJ(r, l) => Op::DecJ(slot(r), l),
            Instr::Jmp(l) => Op::Jmp(l),
            Instr::Halt(r) => Op::Halt(slot(r)),
            Instr::Nop => Op::Nop,
        })
        .collect();
    let mut regs: Vec<Nat> = ids
        .iter()
        .map(|&r| match r {
            0 => n,
            1 => answers.len() as Nat,
            r => answers.get((r - 2) as usize).copied().unwrap_or(0),
        })
        .collect();

    let mut seen: HashSet<(usize, Vec<Nat>)> = HashSet::new();
    let mut pc: usize = 0;
    loop {
        let Some(&op) = ops.get(pc) else {
            return Step::Diverges;
        };
        if !meter.tick() {
            return Step::OutOfFuel;
        }
        let target = match op {
            Op::Inc(s) => {
                regs[s] = regs[s].saturating_add(1);
                pc + 1
            }
            Op::DecJ(s, l) => {
                if regs[s] == 0 {
                    jump(l)
                } else {
                    regs[s] -= 1;
                    pc + 1
                }
            }
            Op::Jmp(l) => jump(l),
            Op::Halt(s) => {
                let v = regs[s];
                return if v & 1 == 1 { Step::Output(v >> 1) } else { Step::Query(v >> 1) };
            }
            Op::Nop => pc + 1,
        };
        // Every cycle passes through a backward transfer, so storing the
        // configurations reached by those is enough to catch any repeat.
        if target <= pc && target < ops.len() {
            let config = (target, regs.clone());
            if seen.contains(&config) {
                return Step::Diverges;
            }
            if seen.len() < meter.memo_cap {
                seen.insert(config);
            } else {
                meter.memo_full = true;
                if meter.stop_on_memo_full {
                    return Step::OutOfFuel;
                }
            }
        }
        pc = target;
    }
}

fn jump(l: Nat) -> usize {
    usize::try_from(l).unwrap_or(usize::MAX)
}
