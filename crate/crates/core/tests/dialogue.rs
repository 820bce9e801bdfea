use std::collections::BTreeMap;

use proptest::prelude::*;
use subt_core::machine::{decode, encode, run_dialogue, Budget, Instr, Native, Program};
use subt_core::pairing::{decode_list, encode_list, pair, unpair};
use subt_core::partialfn::PartialFn;

fn budget() -> Budget {
    Budget::new(4000, 12, 100).unwrap()
}

fn table(m: &BTreeMap<u64, u64>) -> PartialFn {
    PartialFn::table(m.iter().map(|(&k, &v)| (k, v)))
}

fn small_table() -> impl Strategy<Value = BTreeMap<u64, u64>> {
    prop::collection::btree_map(0u64..24, 0u64..24, 0..12)
}

proptest! {
    #[test]
    fn pairing_inverts(x in 0u64..1 << 20, y in 0u64..1 << 20) {
        prop_assert_eq!(unpair(pair(x, y).unwrap()), (x, y));
    }

    #[test]
    fn lists_round_trip(items in prop::collection::vec(0u64..6, 0..6)) {
        let code = encode_list(&items).unwrap();
        prop_assert_eq!(decode_list(code), items);
    }

    #[test]
    fn numbering_is_onto(i in 0u64..1 << 24) {
        prop_assert_eq!(encode(&decode(i)).unwrap(), i);
    }

    // A halting run only ever looks at the points it queried.
    #[test]
    fn halting_uses_only_its_queries(i in 0u64..1 << 18, g in small_table(), n in 0u64..16) {
        let p = decode(i);
        let out = run_dialogue(&p, &table(&g), n, &budget());
        if let Some(v) = out.halted() {
            let used = PartialFn::table(out.trace.iter().copied());
            let again = run_dialogue(&p, &used, n, &budget());
            prop_assert_eq!(again.halted(), Some(v));
            for (q, a) in &out.trace {
                prop_assert_eq!(g.get(q), Some(a));
            }
        }
    }

    #[test]
    fn extending_the_oracle_keeps_the_answer(
        i in 0u64..1 << 18,
        g in small_table(),
        extra in small_table(),
        n in 0u64..16,
    ) {
        let p = decode(i);
        let out = run_dialogue(&p, &table(&g), n, &budget());
        let mut bigger = extra;
        bigger.extend(g.iter().map(|(&k, &v)| (k, v)));
        let wider = run_dialogue(&p, &table(&bigger), n, &budget());
        if let Some(v) = out.halted() {
            prop_assert_eq!(wider.halted(), Some(v));
            prop_assert_eq!(wider.trace, out.trace);
        }
    }

    #[test]
    fn freezing_happens_exactly_off_the_domain(i in 0u64..1 << 18, g in small_table(), n in 0u64..16) {
        let out = run_dialogue(&decode(i), &table(&g), n, &budget());
        if let Some(q) = out.frozen() {
            prop_assert!(!g.contains_key(&q));
        }
        prop_assert!(out.queries().all(|q| g.contains_key(&q)));
    }
}

#[test]
fn natives_behave_as_described() {
    let g = PartialFn::table([(0, 5), (3, 9), (6, 2), (7, 4)]);
    let b = budget();
    let run = |p: Program, n| run_dialogue(&p, &g, n, &b);
    assert_eq!(run(Program::constant(11), 0).halted(), Some(11));
    assert_eq!(run(Program::echo(), 3).halted(), Some(9));
    assert_eq!(run(Program::echo(), 4).frozen(), Some(4));
    assert_eq!(run(Program::native(Native::JoinLeft), 3).halted(), Some(2));
    assert_eq!(run(Program::native(Native::JoinRight), 3).halted(), Some(4));
    assert_eq!(run(Program::query_const(0), 100).halted(), Some(5));
    let eq = |expected| Program::native(Native::QueryEquals { query: 3, expected });
    assert_eq!(run(eq(9), 0).halted(), Some(1));
    assert!(run(eq(8), 0).is_divergent());
}

#[test]
fn register_code_halts_on_an_odd_register() {
    // r0 holds the input; halting on an odd register value outputs half of it
    let p = Program::Code(vec![Instr::Inc(0), Instr::Inc(0), Instr::Inc(0), Instr::Halt(0)]);
    let out = run_dialogue(&p, &PartialFn::empty(), 4, &budget());
    assert_eq!(out.halted(), Some(3));
    assert!(out.trace.is_empty());
}

#[test]
fn more_fuel_never_changes_a_final_answer() {
    let g = PartialFn::table((0..20).map(|n| (n, n % 3)));
    for i in 0..4000u64 {
        let p = decode(i);
        for n in 0..4 {
            let small = run_dialogue(&p, &g, n, &Budget::new(200, 8, 100).unwrap());
            if small.is_final() {
                let big = run_dialogue(&p, &g, n, &Budget::new(2000, 32, 100).unwrap());
                assert_eq!(big.outcome, small.outcome, "index {i} input {n}");
            }
        }
    }
}
