use super::{encode, Meter, Native, Program, Step};
use crate::pairing::{decode_radix, encode_radix, pair, triple, unpair, untriple, Nat};

fn query_then_echo(q: Option<Nat>, answers: &[Nat]) -> Step {
    match answers.first() {
        Some(&a) => Step::Output(a),
        None => q.map_or(Step::Diverges, Step::Query),
    }
}

/// Shared shape of `GraphBwd` and `JumpDecode`: ask `q(0), q(1), …` until the
/// latest answer is `1` and output how many questions preceded it.
fn search_for_one(answers: &[Nat], meter: &mut Meter, q: impl Fn(Nat) -> Option<Nat>) -> Step {
    let s = answers.len() as Nat;
    if !meter.tick_n(s) {
        return Step::OutOfFuel;
    }
    match answers.last() {
        Some(&1) => Step::Output(s - 1),
        _ => q(s).map_or(Step::Diverges, Step::Query),
    }
}

pub(super) fn step_native(native: &Native, n: Nat, ans: &[Nat], meter: &mut Meter) -> Step {
    if !meter.tick() {
        return Step::OutOfFuel;
    }
    match native {
        Native::Echo => query_then_echo(Some(n), ans),
        Native::JoinLeft => query_then_echo(n.checked_mul(2), ans),
        Native::JoinRight => query_then_echo(n.checked_mul(2).and_then(|v| v.checked_add(1)), ans),
        Native::GraphFwd => {
            let (x, m) = unpair(n);
            match ans.first() {
                None => Step::Query(x),
                Some(&a) => Step::Output((a == m) as Nat),
            }
        }
        Native::GraphBwd => search_for_one(ans, meter, |k| pair(n, k)),
        Native::RelayLeft => {
            let (d, _, x) = untriple(n);
            super::decode(d).step(x, ans, meter)
        }
        Native::RelayRight => {
            let (_, e, x) = untriple(n);
            super::decode(e).step(x, ans, meter)
        }
        Native::InflationQuery => query_then_echo(encode(&Program::query_const(n)).ok(), ans),
        Native::JumpDecode => search_for_one(ans, meter, |k| {
            encode(&Program::Native(Native::QueryEquals { query: n, expected: k })).ok()
        }),
        Native::Const { value } => Step::Output(*value),
        Native::QueryConst { query } => query_then_echo(Some(*query), ans),
        Native::QueryEquals { query, expected } => match ans.first() {
            None => Step::Query(*query),
            Some(a) if a == expected => Step::Output(1),
            Some(_) => Step::Diverges,
        },
        Native::MeetQuery { left, right } => query_then_echo(triple(*left, *right, n), ans),
        Native::Compose { outer, inner } => compose_step(outer, inner, n, ans, meter),
        Native::FixInput { program, input } => program.step(*input, ans, meter),
        Native::Cases { even, odd } => {
            if n % 2 == 0 {
                even.step(n / 2, ans, meter)
            } else {
                odd.step(n / 2, ans, meter)
            }
        }
        Native::LevelRead { level, side } => match ans {
            [] => level.checked_mul(2).and_then(|v| v.checked_add(1)).map_or(Step::Diverges, Step::Query),
            [b] => triple(*level, *b, *side)
                .and_then(|p| p.checked_mul(2))
                .map_or(Step::Diverges, Step::Query),
            [_, v, ..] => Step::Output(*v),
        },
        Native::QueryPair { column } => query_then_echo(pair(*column, n), ans),
        Native::TruncateQuery { keep } => {
            let keep = *keep as usize;
            let target = decode_radix(n).and_then(|comps| {
                if comps.len() < keep + 2 {
                    return None;
                }
                let mut short: Vec<Nat> = comps[..=keep].to_vec();
                short.push(*comps.last()?);
                encode_radix(&short)
            });
            query_then_echo(target, ans)
        }
        Native::Pad { program } => program.step(n, ans, meter),
        Native::Override { table, program } => match table.iter().find(|(k, _)| *k == n) {
            Some(&(_, v)) => Step::Output(v),
            None => program.step(n, ans, meter),
        },
        Native::Patch { table, program } => patch_step(table, program, n, ans, meter),
    }
}

/// One round of `Φ_outer[Φ_inner[h]]`: replays the outer dialogue, answering
/// each outer query by replaying an inner dialogue over the real answers.
fn compose_step(outer: &Program, inner: &Program, n: Nat, ans: &[Nat], meter: &mut Meter) -> Step {
    let mut outer_answers: Vec<Nat> = Vec::new();
    let mut used = 0usize;
    loop {
        let x = match outer.step(n, &outer_answers, meter) {
            Step::Query(x) => x,
            other => return other,
        };
        let start = used;
        loop {
            match inner.step(x, &ans[start..used], meter) {
                Step::Output(v) => {
                    outer_answers.push(v);
                    break;
                }
                Step::Query(y) => {
                    if used < ans.len() {
                        used += 1;
                    } else {
                        return Step::Query(y);
                    }
                }
                other => return other,
            }
        }
    }
}

fn patch_step(table: &[(Nat, Nat)], program: &Program, n: Nat, ans: &[Nat], meter: &mut Meter) -> Step {
    let mut virt: Vec<Nat> = Vec::new();
    let mut used = 0usize;
    loop {
        match program.step(n, &virt, meter) {
            Step::Query(q) if q % 2 == 0 => match table.iter().find(|(k, _)| *k == q / 2) {
                Some(&(_, v)) => virt.push(v),
                None => return Step::Diverges,
            },
            Step::Query(q) => {
                if used < ans.len() {
                    virt.push(ans[used]);
                    used += 1;
                } else {
                    return Step::Query(q / 2);
                }
            }
            other => return other,
        }
    }
}
