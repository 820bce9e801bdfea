//! A deliberately plain dialogue interpreter working straight from indices.
//!
//! It shares no code with the library: numbering, instruction decoding,
//! natives and the round protocol are all re-derived here, with every
//! register state remembered for loop detection.

use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Out(u64),
    Ask(u64),
    Loop,
    Fuel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Halted(u64),
    Frozen(u64),
    Diverges,
    OutOfSteps,
    RoundCap,
}

fn tri(k: u64) -> Option<u64> {
    k.checked_mul(k.checked_add(1)?).map(|v| v / 2)
}

fn cantor(x: u64, y: u64) -> Option<u64> {
    tri(x.checked_add(y)?)?.checked_add(y)
}

fn uncantor(z: u64) -> (u64, u64) {
    let mut w: u64 = ((z as f64 * 2.0).sqrt() as u64).saturating_sub(2);
    while tri(w + 1).map_or(false, |t| t <= z) {
        w += 1;
    }
    let y = z - tri(w).unwrap();
    (w - y, y)
}

fn bits_to_list(code: u64) -> Vec<u64> {
    let positions: Vec<u64> = (0..64).filter(|b| code >> b & 1 == 1).collect();
    let mut out = Vec::new();
    for (i, &p) in positions.iter().enumerate() {
        out.push(if i == 0 { p } else { p - positions[i - 1] - 1 });
    }
    out
}

fn native_index(tag: u64, payload: u64) -> Option<u64> {
    let k = payload.checked_mul(13)?.checked_add(tag)?.checked_add(9)?;
    k.checked_mul(2)?.checked_add(1)
}

struct Machine {
    fuel: u64,
}

impl Machine {
    fn spend(&mut self, k: u64) -> bool {
        if self.fuel < k {
            self.fuel = 0;
            false
        } else {
            self.fuel -= k;
            true
        }
    }

    fn eval(&mut self, index: u64, n: u64, ans: &[u64]) -> Step {
        if index % 2 == 0 {
            self.code(&bits_to_list(index / 2), n, ans)
        } else {
            self.native((index - 1) / 2, n, ans)
        }
    }

    fn code(&mut self, codes: &[u64], n: u64, ans: &[u64]) -> Step {
        let mut regs: BTreeMap<u64, u64> = BTreeMap::new();
        let reg_of = |c: u64| -> Option<u64> {
            if c == 0 {
                return None;
            }
            let operand = (c - 1) / 4;
            match (c - 1) % 4 {
                1 => Some(uncantor(operand).0),
                2 => None,
                _ => Some(operand),
            }
        };
        for r in codes.iter().filter_map(|&c| reg_of(c)) {
            let v = match r {
                0 => n,
                1 => ans.len() as u64,
                r => ans.get((r - 2) as usize).copied().unwrap_or(0),
            };
            regs.insert(r, v);
        }
        let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
        let mut pc = 0usize;
        loop {
            if pc >= codes.len() {
                return Step::Loop;
            }
            if !seen.insert((pc, regs.values().copied().collect())) {
                return Step::Loop;
            }
            if !self.spend(1) {
                return Step::Fuel;
            }
            let c = codes[pc];
            if c == 0 {
                pc += 1;
                continue;
            }
            let operand = (c - 1) / 4;
            match (c - 1) % 4 {
                0 => {
                    let r = regs.get_mut(&operand).unwrap();
                    *r = r.saturating_add(1);
                    pc += 1;
                }
                1 => {
                    let (r, l) = uncantor(operand);
                    let v = regs.get_mut(&r).unwrap();
                    if *v == 0 {
                        pc = usize::try_from(l).unwrap_or(usize::MAX);
                    } else {
                        *v -= 1;
                        pc += 1;
                    }
                }
                2 => pc = usize::try_from(operand).unwrap_or(usize::MAX),
                _ => {
                    let v = regs[&operand];
                    return if v % 2 == 1 { Step::Out(v / 2) } else { Step::Ask(v / 2) };
                }
            }
        }
    }

    fn ask_or(q: Option<u64>, ans: &[u64]) -> Step {
        match (ans.first(), q) {
            (Some(&a), _) => Step::Out(a),
            (None, Some(q)) => Step::Ask(q),
            (None, None) => Step::Loop,
        }
    }

    fn search(&mut self, ans: &[u64], q: impl Fn(u64) -> Option<u64>) -> Step {
        let s = ans.len() as u64;
        if !self.spend(s) {
            return Step::Fuel;
        }
        if ans.last() == Some(&1) {
            return Step::Out(s - 1);
        }
        q(s).map_or(Step::Loop, Step::Ask)
    }

    fn native(&mut self, k: u64, n: u64, ans: &[u64]) -> Step {
        if !self.spend(1) {
            return Step::Fuel;
        }
        match k {
            0 => Self::ask_or(Some(n), ans),
            1 => Self::ask_or(n.checked_mul(2), ans),
            2 => Self::ask_or(n.checked_mul(2).and_then(|v| v.checked_add(1)), ans),
            3 => {
                let (x, m) = uncantor(n);
                match ans.first() {
                    None => Step::Ask(x),
                    Some(&a) => Step::Out(u64::from(a == m)),
                }
            }
            4 => self.search(ans, |s| cantor(n, s)),
            5 | 6 => {
                let (d, rest) = uncantor(n);
                let (e, x) = uncantor(rest);
                self.eval(if k == 5 { d } else { e }, x, ans)
            }
            7 => Self::ask_or(native_index(1, n), ans),
            8 => self.search(ans, |s| native_index(2, cantor(n, s)?)),
            _ => {
                let (tag, payload) = ((k - 9) % 13, (k - 9) / 13);
                self.tagged(tag, payload, n, ans)
            }
        }
    }

    fn tagged(&mut self, tag: u64, payload: u64, n: u64, ans: &[u64]) -> Step {
        let (x, y) = uncantor(payload);
        match tag {
            0 => Step::Out(payload),
            1 => Self::ask_or(Some(payload), ans),
            2 => match ans.first() {
                None => Step::Ask(x),
                Some(&a) if a == y => Step::Out(1),
                Some(_) => Step::Loop,
            },
            3 => Self::ask_or(cantor(y, n).and_then(|r| cantor(x, r)), ans),
            4 => self.compose(x, y, n, ans),
            5 => self.eval(x, y, ans),
            6 => self.eval(if n % 2 == 0 { x } else { y }, n / 2, ans),
            7 => match ans.len() {
                0 => x.checked_mul(2).and_then(|v| v.checked_add(1)).map_or(Step::Loop, Step::Ask),
                1 => cantor(ans[0], y)
                    .and_then(|r| cantor(x, r))
                    .and_then(|t| t.checked_mul(2))
                    .map_or(Step::Loop, Step::Ask),
                _ => Step::Out(ans[1]),
            },
            8 => Self::ask_or(cantor(payload, n), ans),
            9 => Self::ask_or(truncate(n, payload), ans),
            10 => self.eval(payload, n, ans),
            11 => {
                let table: Vec<(u64, u64)> = bits_to_list(x).into_iter().map(uncantor).collect();
                match table.iter().find(|e| e.0 == n) {
                    Some(&(_, v)) => Step::Out(v),
                    None => self.eval(y, n, ans),
                }
            }
            _ => self.patch(x, y, n, ans),
        }
    }

    fn compose(&mut self, outer: u64, inner: u64, n: u64, ans: &[u64]) -> Step {
        let mut outer_ans = Vec::new();
        let mut consumed = 0;
        loop {
            let x = match self.eval(outer, n, &outer_ans) {
                Step::Ask(x) => x,
                other => return other,
            };
            let from = consumed;
            let v = loop {
                match self.eval(inner, x, &ans[from..consumed]) {
                    Step::Out(v) => break v,
                    Step::Ask(q) if consumed == ans.len() => return Step::Ask(q),
                    Step::Ask(_) => consumed += 1,
                    other => return other,
                }
            };
            outer_ans.push(v);
        }
    }

    fn patch(&mut self, table: u64, program: u64, n: u64, ans: &[u64]) -> Step {
        let table: Vec<(u64, u64)> = bits_to_list(table).into_iter().map(uncantor).collect();
        let mut seen = Vec::new();
        let mut real = ans.iter();
        loop {
            match self.eval(program, n, &seen) {
                Step::Ask(q) if q % 2 == 0 => match table.iter().find(|e| e.0 == q / 2) {
                    Some(&(_, v)) => seen.push(v),
                    None => return Step::Loop,
                },
                Step::Ask(q) => match real.next() {
                    Some(&a) => seen.push(a),
                    None => return Step::Ask(q / 2),
                },
                other => return other,
            }
        }
    }
}

fn truncate(code: u64, keep: u64) -> Option<u64> {
    let len = code & 0xff;
    if len > 7 || (code >> 8) >> (8 * len) != 0 {
        return None;
    }
    let comps: Vec<u64> = (0..len).map(|i| code >> (8 * (i + 1)) & 0xff).collect();
    let keep = usize::try_from(keep).ok()?;
    if comps.len() < keep.checked_add(2)? {
        return None;
    }
    let mut short: Vec<u64> = comps[..=keep].to_vec();
    short.push(*comps.last()?);
    let mut out = short.len() as u64;
    for (i, c) in short.iter().enumerate() {
        out |= c << (8 * (i + 1));
    }
    Some(out)
}

/// Runs program `index` on `n` against a finite table, re-evaluating the
/// functional from scratch every round.
pub fn run(index: u64, oracle: &BTreeMap<u64, u64>, n: u64, steps: u64, rounds: u64) -> (Verdict, Vec<(u64, u64)>) {
    let mut trace: Vec<(u64, u64)> = Vec::new();
    let mut left = steps;
    loop {
        let answers: Vec<u64> = trace.iter().map(|t| t.1).collect();
        let mut m = Machine { fuel: left };
        let step = m.eval(index, n, &answers);
        left = m.fuel;
        let verdict = match step {
            Step::Out(v) => Verdict::Halted(v),
            Step::Loop => Verdict::Diverges,
            Step::Fuel => Verdict::OutOfSteps,
            Step::Ask(_) if trace.len() as u64 >= rounds => Verdict::RoundCap,
            Step::Ask(q) => match oracle.get(&q) {
                Some(&a) => {
                    trace.push((q, a));
                    continue;
                }
                None => Verdict::Frozen(q),
            },
        };
        return (verdict, trace);
    }
}
