//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod naive;

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use subt_cli::lattice::{instance, run_suite, SuiteConfig};
use subt_core::constructions::scenarios::default_e_max;
use subt_core::constructions::{replay_bytes, ConstructionName, Transcript};
use subt_core::machine::{
    compose, decode, encode, run_dialogue, step_functional, Budget, DialogueOutcome, ExhaustReason, Instr, Native,
    Outcome, Program, StepFunctionalResult,
};
use subt_core::pairing::{pair, triple, Nat};
use subt_core::partialfn::{
    canonical_witnesses, inflation_index, jump_decode, k_jump, monotone_transfer, JumpKind, OracleAnswer,
    PartialFn,
};
use subt_core::search::{extract_query_set, verify_reduction};

type Verdict = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `query n`, then output the first answer, in machine code.
fn code_echo() -> Program {
    Program::parse("DECJ 1 7\nINC 3\nDECJ 2 6\nINC 3\nINC 3\nJMP 2\nHALT 3\nDECJ 0 11\nINC 4\nINC 4\nJMP 7\nHALT 4")
        .unwrap()
}

fn random_code(r: &mut ChaCha8Rng) -> Program {
    let len: Nat = r.gen_range(1..=20);
    let code = (0..len)
        .map(|_| match r.gen_range(0..10) {
            0..=2 => Instr::Inc(r.gen_range(0..5)),
            3 | 4 => Instr::DecJ(r.gen_range(0..5), r.gen_range(0..=len)),
            5 => Instr::Jmp(r.gen_range(0..=len)),
            6 | 7 => Instr::Halt(r.gen_range(0..5)),
            _ => Instr::Nop,
        })
        .collect();
    Program::Code(code)
}

fn random_program(r: &mut ChaCha8Rng) -> Program {
    match r.gen_range(0..8) {
        0 => Program::echo(),
        1 => Program::Native(Native::GraphBwd),
        2 => Program::query_const(r.gen_range(0..32)),
        3 => compose(&random_code(r), &code_echo()),
        4 => code_echo(),
        _ => random_code(r),
    }
}

fn random_oracle(r: &mut ChaCha8Rng, points: usize, span: Nat, values: Nat) -> BTreeMap<Nat, Nat> {
    let size = r.gen_range(0..=points);
    let mut m = BTreeMap::new();
    while m.len() < size {
        m.insert(r.gen_range(0..span), r.gen_range(0..values));
    }
    m
}

fn table(m: &BTreeMap<Nat, Nat>) -> PartialFn {
    PartialFn::table(m.iter().map(|(&k, &v)| (k, v)))
}

// ---------------------------------------------------------------- criterion 1

fn dialogue_semantics() -> Verdict {
    const NEED: usize = 1000;
    let b = Budget::new(2_000, 32, 1_000).unwrap();
    let big = b.scaled(4);
    let mut counts = [0usize; 5];
    let names = ["use principle", "monotonicity", "freeze exactness", "budget monotonicity", "determinism"];
    let mut r = rng(1);
    let mut attempts = 0;
    while counts.iter().any(|&c| c < NEED) {
        attempts += 1;
        if attempts > 500_000 {
            return Err(format!("too few applicable instances: {counts:?}"));
        }
        let p = random_program(&mut r);
        let g = random_oracle(&mut r, 16, 32, 8);
        let n: Nat = r.gen_range(0..32);
        let out = run_dialogue(&p, &table(&g), n, &b);

        // use principle: only the queried points and the freeze point matter
        let used: BTreeSet<Nat> = out.queries().chain(out.frozen()).collect();
        let mut other: BTreeMap<Nat, Nat> = g.iter().filter(|(k, _)| used.contains(k)).map(|(&k, &v)| (k, v)).collect();
        for _ in 0..r.gen_range(0..8) {
            let k = r.gen_range(0..32);
            if !used.contains(&k) {
                other.insert(k, r.gen_range(0..8));
            }
        }
        if run_dialogue(&p, &table(&other), n, &b) != out {
            return Err(format!("use principle fails for {p:?} on {n}"));
        }
        counts[0] += 1;

        // monotonicity: a halting run over a subfunction survives extension
        let sub: BTreeMap<Nat, Nat> = g.iter().filter(|_| r.gen_bool(0.5)).map(|(&k, &v)| (k, v)).collect();
        let small = run_dialogue(&p, &table(&sub), n, &b);
        if let Some(v) = small.halted() {
            let full = run_dialogue(&p, &table(&g), n, &b);
            if full.halted() != Some(v) || full.trace != small.trace {
                return Err(format!("monotonicity fails for {p:?} on {n}"));
            }
            counts[1] += 1;
        }

        // freeze exactness: the freeze point is the first query off the domain
        if let Some(q) = out.frozen() {
            if g.contains_key(&q) || out.trace.iter().any(|(x, a)| g.get(x) != Some(a)) {
                return Err(format!("freeze at {q} is not exact for {p:?} on {n}"));
            }
            let a = r.gen_range(0..8);
            let mut more = g.clone();
            more.insert(q, a);
            let again = run_dialogue(&p, &table(&more), n, &b);
            let mut expected = out.trace.clone();
            expected.push((q, a));
            if again.trace.len() < expected.len() || again.trace[..expected.len()] != expected[..] {
                return Err(format!("defining {q} does not unfreeze {p:?} on {n}"));
            }
            counts[2] += 1;
        }

        // budget monotonicity: settled outcomes are stable under more budget
        if out.is_final() {
            if run_dialogue(&p, &table(&g), n, &big) != out {
                return Err(format!("more budget changes {p:?} on {n}"));
            }
            counts[3] += 1;
        }

        if run_dialogue(&p, &table(&g), n, &b) != out {
            return Err(format!("rerun differs for {p:?} on {n}"));
        }
        counts[4] += 1;
    }

    // determinism across threads
    let cases: Vec<(Program, BTreeMap<Nat, Nat>, Nat)> = {
        let mut r = rng(2);
        (0..NEED).map(|_| (random_program(&mut r), random_oracle(&mut r, 16, 32, 8), r.gen_range(0..32))).collect()
    };
    let seq: Vec<DialogueOutcome> = cases.iter().map(|(p, g, n)| run_dialogue(p, &table(g), *n, &b)).collect();
    let par: Vec<DialogueOutcome> = cases.par_iter().map(|(p, g, n)| run_dialogue(p, &table(g), *n, &b)).collect();
    if seq != par {
        return Err("parallel runs differ from sequential runs".into());
    }
    let summary: Vec<String> = names.iter().zip(counts).map(|(n, c)| format!("{n} {c}")).collect();
    Ok(summary.join(", "))
}

// ---------------------------------------------------------------- criterion 2

/// A join witness: `target ≤ left ⊕ right` by `program` on `domain`.
struct JoinWitness {
    program: Program,
    target: PartialFn,
    left: PartialFn,
    right: PartialFn,
    domain: Vec<Nat>,
}

fn meet_by_hand(d: Nat, e: Nat, n: Nat, f: &PartialFn, g: &PartialFn, b: &Budget) -> OracleAnswer {
    let l = run_dialogue(&decode(d), f, n, b);
    let r = run_dialogue(&decode(e), g, n, b);
    match (l.halted(), r.halted()) {
        (Some(x), Some(y)) if x == y => OracleAnswer::Defined(x),
        (Some(_), Some(_)) => OracleAnswer::Undefined,
        _ if l.never_halts() || r.never_halts() => OracleAnswer::Undefined,
        _ => OracleAnswer::Unknown,
    }
}

fn lattice_laws(joins: &mut Vec<JoinWitness>) -> Verdict {
    let cfg = SuiteConfig { seed: 0x5eed, instances: 1000, grid: 64, budget: Budget::default(), inject_fault: false };
    let report = run_suite(&cfg);
    if report.violations() > 0 {
        let bad: Vec<String> = report
            .properties
            .iter()
            .filter(|p| p.failed > 0)
            .map(|p| format!("{:?}: {:?}", p.property, p.first_failure))
            .collect();
        return Err(bad.join("; "));
    }
    if report.properties.iter().any(|p| p.passed < 1000) {
        return Err("fewer than 1000 instances per property".into());
    }

    // the lazy meet and graph against values computed by hand
    let b = cfg.budget;
    let pool: Vec<Nat> = [Program::echo(), Program::constant(3), Program::query_const(5)]
        .iter()
        .map(|p| encode(p).unwrap())
        .collect();
    let mut meet_points = 0;
    let mut graph_points = 0;
    for i in 0..1000 {
        let inst = instance(cfg.seed, i);
        let m = inst.f.meet(&inst.g, b);
        for &d in &pool {
            for &e in &pool {
                for n in (0..64).step_by(7) {
                    let expected = meet_by_hand(d, e, n, &inst.f, &inst.g, &b);
                    if m.eval(triple(d, e, n).unwrap(), b.oracle_fuel) != expected {
                        return Err(format!("meet at <{d},{e},{n}> of instance {i} is not {expected:?}"));
                    }
                    meet_points += 1;
                }
            }
        }
        if i < 100 {
            let gf = inst.f.graph();
            for n in 0..64 {
                for v in 0..9 {
                    let expected = match inst.f.eval(n, 1) {
                        OracleAnswer::Defined(w) => OracleAnswer::Defined((w == v) as Nat),
                        _ => OracleAnswer::Undefined,
                    };
                    if gf.eval(pair(n, v).unwrap(), 1) != expected {
                        return Err(format!("graph at ({n}, {v}) of instance {i}"));
                    }
                    graph_points += 1;
                }
            }
        }
        let w = canonical_witnesses();
        let grid: Vec<Nat> = (0..64).collect();
        joins.push(JoinWitness {
            program: w.join_left.clone(),
            target: inst.f.clone(),
            left: inst.f.clone(),
            right: inst.g.clone(),
            domain: grid.clone(),
        });
        joins.push(JoinWitness { program: w.join_right, target: inst.g.clone(), left: inst.f, right: inst.g, domain: grid });
    }
    Ok(format!(
        "7 properties x {} instances, {meet_points} meet points and {graph_points} graph points checked by hand",
        cfg.instances
    ))
}

// ---------------------------------------------------------------- criterion 3

fn chain_pool(r: &mut ChaCha8Rng) -> Program {
    match r.gen_range(0..9) {
        0 => Program::echo(),
        1 => Program::Native(Native::JoinLeft),
        2 => Program::Native(Native::JoinRight),
        3 => Program::query_const(r.gen_range(0..16)),
        4 => Program::constant(r.gen_range(0..8)),
        5 => code_echo(),
        6 => Program::Native(Native::Cases {
            even: Box::new(Program::Native(Native::JoinRight)),
            odd: Box::new(Program::echo()),
        }),
        7 => Program::Native(Native::Override { table: vec![(1, 6), (3, 2)], program: Box::new(Program::echo()) }),
        _ => compose(&Program::echo(), &Program::Native(Native::JoinLeft)),
    }
}

fn image(p: &Program, g: &PartialFn, grid: &[Nat], b: &Budget, r: &mut ChaCha8Rng) -> PartialFn {
    PartialFn::table(grid.iter().filter_map(|&x| {
        let v = run_dialogue(p, g, x, b).halted()?;
        r.gen_bool(0.8).then_some((x, v))
    }))
}

fn transitivity(joins: &mut Vec<JoinWitness>) -> Verdict {
    let b = Budget::new(20_000, 64, 5_000).unwrap();
    let grid: Vec<Nat> = (0..64).collect();
    let mut r = rng(3);
    let mut chains = 0;
    let mut against_join = 0;
    let mut attempts = 0;
    while chains < 200 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!("only {chains} nonempty chains"));
        }
        let a = table(&random_oracle(&mut r, 48, 64, 8));
        let split = r.gen_bool(0.5).then(|| table(&random_oracle(&mut r, 48, 64, 8)));
        let h = match &split {
            Some(c) => a.join(c),
            None => a.clone(),
        };
        let (p, q) = (chain_pool(&mut r), chain_pool(&mut r));
        let g = image(&q, &h, &grid, &b, &mut r);
        let f = image(&p, &g, &grid, &b, &mut r);
        if f.entries().map_or(true, |t| t.is_empty()) {
            continue;
        }
        for (what, prog, lo, hi) in [("f <= g", &p, &f, &g), ("g <= h", &q, &g, &h)] {
            if let Err(e) = verify_reduction(prog, lo, hi, &grid, &b) {
                return Err(format!("{what} does not verify: {}", e.describe()));
            }
        }
        let pq = compose(&p, &q);
        if let Err(e) = verify_reduction(&pq, &f, &h, &grid, &b) {
            return Err(format!("compose({p:?}, {q:?}) fails f <= h: {}", e.describe()));
        }
        chains += 1;
        if let Some(c) = split {
            against_join += 1;
            joins.push(JoinWitness { program: q, target: g, left: a.clone(), right: c.clone(), domain: grid.clone() });
            joins.push(JoinWitness { program: pq, target: f, left: a, right: c, domain: grid.clone() });
        }
    }
    Ok(format!("{chains} chains composed, {against_join} against a join"))
}

// ---------------------------------------------------------------- criterion 4

/// `Φ_e[Φ_d[g]](e)` by running the outer functional round by round and
/// answering each query with a separate inner dialogue.
fn nested(d: &Program, e: Nat, g: &PartialFn, b: &Budget) -> &'static str {
    let outer = decode(e);
    let mut answers = Vec::new();
    loop {
        if answers.len() as u64 >= b.round_cap {
            return "unknown";
        }
        match step_functional(&outer, e, &answers, b.step_fuel) {
            StepFunctionalResult::HaltPair { i: 1, .. } => return "one",
            StepFunctionalResult::HaltPair { q, .. } => {
                let inner = run_dialogue(d, g, q, b);
                match inner.halted() {
                    Some(v) => answers.push(v),
                    None if inner.never_halts() => return "undefined_frozen",
                    None => return "unknown",
                }
            }
            StepFunctionalResult::CertifiedDivergent => return "zero_certified",
            StepFunctionalResult::Exhausted { .. } => return "unknown",
        }
    }
}

fn jump() -> Verdict {
    let b = Budget::new(20_000, 64, 20_000).unwrap();
    let mut r = rng(4);

    // f ≤ K(f) by the decoding witness, dom(f) ≤ K₀(f) by inflation indices
    let mut inflation_cases = 0;
    for _ in 0..100 {
        let f = table(&random_oracle(&mut r, 24, 32, 8));
        let dom: Vec<Nat> = f.entries().unwrap().keys().copied().collect();
        let k = f.jump(b, JumpKind::K);
        if let Err(e) = verify_reduction(&jump_decode(), &f, &k, &dom, &b) {
            return Err(format!("f <= K(f) fails: {}", e.describe()));
        }
        let chi = PartialFn::table((0..32).map(|n| (n, f.entries().unwrap().contains_key(&n) as Nat)));
        let grid: Vec<Nat> = (0..32).collect();
        let k0 = f.jump(b, JumpKind::K0);
        if let Err(e) = verify_reduction(&Program::Native(Native::InflationQuery), &chi, &k0, &grid, &b) {
            return Err(format!("dom(f) <= K0(f) fails: {}", e.describe()));
        }
        for &n in &dom {
            let i = inflation_index(n).map_err(|e| e.to_string())?;
            if k.eval(i, b.oracle_fuel) != OracleAnswer::Defined(1) {
                return Err(format!("K(f) is not 1 at i({n})"));
            }
        }
        inflation_cases += 1;
    }

    // monotone transfer against nested simulation
    let ds = [
        Program::echo(),
        Program::Native(Native::JoinLeft),
        Program::constant(2),
        Program::query_const(3),
        Program::Native(Native::JoinRight),
    ];
    let es: Vec<Nat> = [
        Program::constant(4),
        Program::query_const(1),
        Program::query_const(7),
        Program::self_loop(),
        Program::echo(),
        Program::Native(Native::QueryEquals { query: 0, expected: 5 }),
        Program::Native(Native::QueryEquals { query: 3, expected: 1 }),
        Program::parse("INC 0\nHALT 0").unwrap(),
        Program::Native(Native::JoinLeft),
        Program::query_const(2),
    ]
    .iter()
    .map(|p| encode(p).unwrap())
    .collect();
    let gs = [
        PartialFn::table([(0, 1), (1, 2), (3, 1)]),
        PartialFn::table([(0, 5), (2, 7), (6, 1)]),
        PartialFn::table((0..16).map(|n| (n, n % 3))),
    ];
    let mut classes: BTreeMap<&str, usize> = BTreeMap::new();
    let mut corpus = 0;
    for (i, d) in ds.iter().enumerate() {
        for (j, &e) in es.iter().enumerate() {
            let g = &gs[(i + j) % gs.len()];
            let expected = nested(d, e, g, &b);
            let bde = monotone_transfer(encode(d).unwrap(), e).map_err(|e| e.to_string())?;
            let got = k_jump(g, bde, &b).label();
            if got != expected {
                return Err(format!("transfer of d = {d:?}, e = {e} gives {got}, nested gives {expected}"));
            }
            *classes.entry(got).or_default() += 1;
            corpus += 1;
        }
    }
    for needed in ["one", "zero_certified", "undefined_frozen"] {
        if !classes.contains_key(needed) {
            return Err(format!("corpus has no {needed} row"));
        }
    }

    // K and K₀ agree wherever K is certified on an oracle total on its range
    let mut certified = 0;
    for _ in 0..10 {
        let g = PartialFn::table((0..64).map(|n| (n, r.gen_range(0..4))));
        let k = g.jump(b, JumpKind::K);
        let k0 = g.jump(b, JumpKind::K0);
        for e in 0..400 {
            if let OracleAnswer::Defined(v) = k.eval(e, b.oracle_fuel) {
                if k0.eval(e, b.oracle_fuel) != OracleAnswer::Defined(v) {
                    return Err(format!("K and K0 disagree at {e}"));
                }
                let direct = run_dialogue(&decode(e), &g, e, &b);
                if (direct.halted().is_some() as Nat) != v {
                    return Err(format!("K at {e} is not the halting bit"));
                }
                certified += 1;
            }
        }
    }
    Ok(format!("{inflation_cases} inflation cases, {corpus} transfer rows {classes:?}, {certified} certified K rows"))
}

// ---------------------------------------------------------------- criterion 5

fn query_set_mechanism(joins: &[JoinWitness]) -> Verdict {
    let b = Budget::new(20_000, 64, 5_000).unwrap();
    let failures: Vec<String> = joins
        .par_iter()
        .enumerate()
        .filter_map(|(i, w)| {
            let x = match extract_query_set(&w.program, &w.target, &w.left, &w.right, &w.domain, &b) {
                Ok(x) => x,
                Err(e) => return Some(format!("witness {i}: {e:?}")),
            };
            let joined = w.left.join(&w.right);
            let mut q = BTreeSet::new();
            for &n in &w.domain {
                if w.target.eval(n, b.oracle_fuel).is_defined() {
                    let out = run_dialogue(&w.program, &joined, n, &b);
                    q.extend(out.queries().filter(|q| q % 2 == 0).map(|q| q / 2));
                }
            }
            (q != x.left_queries).then(|| format!("witness {i}: traced set differs"))
        })
        .collect();
    match failures.first() {
        Some(f) => Err(format!("{} of {} fail, first {f}", failures.len(), joins.len())),
        None => Ok(format!("{} join witnesses restricted and hard-coded", joins.len())),
    }
}

// ---------------------------------------------------------------- criterion 6

fn evidence_regions(bytes: &[u8]) -> Vec<(usize, usize)> {
    let text = std::str::from_utf8(bytes).unwrap();
    let mut regions = Vec::new();
    let mut offset = 0;
    let mut open: Option<usize> = None;
    for line in text.split_inclusive('\n') {
        if line == "      \"evidence\": [\n" {
            open = Some(offset + line.len());
        } else if let (Some(start), "      ],\n") = (open, line) {
            regions.push((start, offset));
            open = None;
        }
        offset += line.len();
    }
    regions
}

fn corrupt(byte: u8) -> u8 {
    if byte.is_ascii_digit() {
        b'0' + (byte - b'0' + 1) % 10
    } else {
        byte ^ 0x01
    }
}

fn reseal(t: &mut Transcript, stage: usize) {
    let s = &mut t.stages[stage];
    s.digest.clear();
    s.digest = hex::encode(Sha256::digest(serde_json::to_vec(&*s).unwrap()));
}

fn constructions() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_subt");
    let mut flips = 0;
    let mut mutations = 0;
    let mut notes = Vec::new();
    for name in ConstructionName::ALL {
        let path = dir.path().join(format!("{name}.json"));
        let built = Command::new(bin)
            .args(["construct", name.as_str(), "--out"])
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        if !built.status.success() {
            return Err(format!("construct {name} exited {}", built.status));
        }
        let replay = Command::new(bin).arg("replay").arg(&path).output().map_err(|e| e.to_string())?;
        if !replay.status.success() {
            return Err(format!("replay {name}: {}", String::from_utf8_lossy(&replay.stdout)));
        }
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let t = Transcript::from_bytes(&bytes).map_err(|e| e.to_string())?;
        notes.push(format!("{name} E={} {}/{}", default_e_max(name), t.summary.satisfied, t.summary.stages));

        let regions = evidence_regions(&bytes);
        if regions.is_empty() {
            return Err(format!("{name}: no evidence found in the transcript"));
        }
        for &(lo, hi) in &regions {
            for k in 0..6 {
                let at = lo + (hi - lo) * k / 6;
                let mut bad = bytes.clone();
                bad[at] = corrupt(bad[at]);
                match replay_bytes(&bad) {
                    Ok(_) => return Err(format!("{name}: flipping byte {at} still replays")),
                    Err(e) if !e.to_string().contains("stage") => {
                        return Err(format!("{name}: flipping byte {at} is reported without a stage: {e}"));
                    }
                    Err(_) => flips += 1,
                }
            }
        }

        // a forged outcome with a consistent digest must fail re-execution
        let i = t.stages.iter().position(|s| !s.evidence.is_empty()).unwrap();
        let mut forged = t.clone();
        let out = &mut forged.stages[i].evidence[0].outcome;
        out.outcome = match out.outcome {
            Outcome::Halted(v) => Outcome::Halted(v + 1),
            _ => Outcome::Halted(0),
        };
        reseal(&mut forged, i);
        let bad = forged.to_bytes();
        match replay_bytes(&bad) {
            Ok(_) => return Err(format!("{name}: forged evidence replays")),
            Err(e) if !e.to_string().contains(&format!("stage {i}")) => {
                return Err(format!("{name}: forged evidence at stage {i} reported as {e}"));
            }
            Err(_) => mutations += 1,
        }
        let forged_path = dir.path().join(format!("{name}.forged.json"));
        std::fs::write(&forged_path, &bad).map_err(|e| e.to_string())?;
        let replay = Command::new(bin).arg("replay").arg(&forged_path).output().map_err(|e| e.to_string())?;
        if replay.status.success() || !String::from_utf8_lossy(&replay.stdout).contains("stage") {
            return Err(format!("{name}: CLI replay accepts or does not name the stage of a forgery"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 600.0 {
        return Err(format!("suite took {secs:.0}s"));
    }
    Ok(format!("{}; {flips} byte flips and {mutations} forgeries rejected", notes.join(", ")))
}

// ---------------------------------------------------------------- criterion 7

fn classify(out: &DialogueOutcome) -> naive::Verdict {
    match out.outcome {
        Outcome::Halted(v) => naive::Verdict::Halted(v),
        Outcome::Frozen(q) => naive::Verdict::Frozen(q),
        Outcome::Exhausted { certified_divergent: true, .. } => naive::Verdict::Diverges,
        Outcome::Exhausted { reason: ExhaustReason::RoundCap, .. } => naive::Verdict::RoundCap,
        Outcome::Exhausted { .. } => naive::Verdict::OutOfSteps,
    }
}

fn brute_force() -> Verdict {
    let oracle: BTreeMap<Nat, Nat> = [(0, 1), (1, 0), (2, 3), (5, 2)].into_iter().collect();
    let g = table(&oracle);
    let b = Budget::new(5_000, 16, 100).unwrap();
    let rows: Vec<(Nat, Nat, naive::Verdict, naive::Verdict)> = (0..5000u64)
        .into_par_iter()
        .flat_map_iter(|index| {
            let p = decode(index);
            let (g, oracle) = (&g, &oracle);
            (0..8).map(move |n| {
                let out = run_dialogue(&p, g, n, &b);
                let (plain, trace) = naive::run(index, oracle, n, b.step_fuel, b.round_cap);
                let mine = classify(&out);
                let theirs = if trace == out.trace { plain } else { naive::Verdict::Frozen(u64::MAX) };
                (index, n, mine, theirs)
            })
        })
        .collect();
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for (index, n, mine, theirs) in &rows {
        if mine != theirs {
            return Err(format!("index {index} input {n}: executor {mine:?}, naive {theirs:?}"));
        }
        let key = format!("{mine:?}");
        let key = key.split('(').next().unwrap().to_string();
        *tally.entry(key).or_default() += 1;
    }
    Ok(format!("{} runs agree {tally:?}", rows.len()))
}

// ----------------------------------------------------------------------------

fn main() {
    let mut joins = Vec::new();
    let mut lines = Vec::new();
    let mut run = |n: u32, name: &str, f: &mut dyn FnMut() -> Verdict| {
        let t = Instant::now();
        let v = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &v {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => ("FAIL", d.clone()),
        };
        let line = format!("criterion {n} {name}: {tag} ({detail}; {secs:.1}s)");
        println!("{line}");
        lines.push((v.is_ok(), line));
    };
    run(1, "dialogue semantics", &mut || {
        let t = Instant::now();
        let v = dialogue_semantics()?;
        let secs = t.elapsed().as_secs_f64();
        if secs >= 60.0 {
            return Err(format!("{v} but took {secs:.0}s"));
        }
        Ok(v)
    });
    run(2, "lattice laws", &mut || lattice_laws(&mut joins));
    run(3, "transitivity", &mut || transitivity(&mut joins));
    run(4, "jump", &mut jump);
    run(5, "query-set restriction and hard-coding", &mut || query_set_mechanism(&joins));
    run(6, "constructions replay", &mut constructions);
    run(7, "naive interpreter cross-check", &mut brute_force);
    let failed = lines.iter().filter(|(ok, _)| !ok).count();
    println!("{} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
