//! Randomized check of the lattice operations through their canonical witnesses.
//!
//! Each instance is a pair of random finite partial functions `f, g` on
//! `0..64`. Every property is a reduction that must verify on the input grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use subt_core::constructions::SCHEMA_VERSION;
use subt_core::machine::{encode, Budget, Native, Program};
use subt_core::pairing::{pair, triple, Nat};
use subt_core::partialfn::{canonical_witnesses, meet_universality, PartialFn};
use subt_core::search::verify_reduction;

/// Points each random function may be defined on.
pub const POINTS: Nat = 64;
/// Values are drawn below this, so equal values are common.
pub const VALUE_BOUND: Nat = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: u64,
    /// Inputs `0..grid` are checked.
    pub grid: Nat,
    pub budget: Budget,
    /// Swap the two halves of every join, so the projections must fail.
    pub inject_fault: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub f: PartialFn,
    pub g: PartialFn,
}

fn random_fn(rng: &mut ChaCha8Rng) -> PartialFn {
    let mut entries = Vec::new();
    for n in 0..POINTS {
        if rng.gen_bool(0.5) {
            entries.push((n, rng.gen_range(0..VALUE_BOUND)));
        }
    }
    PartialFn::table(entries)
}

/// Instance `i` of the suite for `seed`; independent of every other instance.
pub fn instance(seed: u64, i: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let f = random_fn(&mut rng);
    let g = random_fn(&mut rng);
    Instance { f, g }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    JoinLeft,
    JoinRight,
    JoinLeastUpperBound,
    MeetLowerBound,
    MeetUniversality,
    GraphForward,
    GraphBackward,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::JoinLeft,
        Property::JoinRight,
        Property::JoinLeastUpperBound,
        Property::MeetLowerBound,
        Property::MeetUniversality,
        Property::GraphForward,
        Property::GraphBackward,
    ];
}

/// Small programs used as the `d, e` components of meet points.
fn meet_pool() -> Vec<Nat> {
    [Program::echo(), Program::constant(3), Program::query_const(5)]
        .iter()
        .map(|p| encode(p).expect("small natives encode"))
        .collect()
}

fn verify(p: &Program, f: &PartialFn, g: &PartialFn, domain: &[Nat], b: &Budget) -> Result<(), String> {
    verify_reduction(p, f, g, domain, b).map(|_| ()).map_err(|e| e.describe())
}

fn check(prop: Property, inst: &Instance, cfg: &SuiteConfig) -> Result<(), String> {
    let w = canonical_witnesses();
    let b = &cfg.budget;
    let (f, g) = (&inst.f, &inst.g);
    let grid: Vec<Nat> = (0..cfg.grid).collect();
    let join = |l: &PartialFn, r: &PartialFn| if cfg.inject_fault { r.join(l) } else { l.join(r) };
    match prop {
        Property::JoinLeft => verify(&w.join_left, f, &join(f, g), &grid, b),
        Property::JoinRight => verify(&w.join_right, g, &join(f, g), &grid, b),
        Property::JoinLeastUpperBound => {
            // f ≤ g ⊕ f and g ≤ g ⊕ f, so f ⊕ g ≤ g ⊕ f by cases
            let by_cases = Program::Native(Native::Cases {
                even: Box::new(w.join_right.clone()),
                odd: Box::new(w.join_left.clone()),
            });
            let wide: Vec<Nat> = (0..2 * cfg.grid).collect();
            verify(&by_cases, &join(f, g), &g.join(f), &wide, b)
        }
        Property::MeetLowerBound => {
            let m = f.meet(g, *b);
            let pool = meet_pool();
            let points: Vec<Nat> = pool
                .iter()
                .flat_map(|&d| pool.iter().map(move |&e| (d, e)))
                .flat_map(|(d, e)| grid.iter().filter_map(move |&n| triple(d, e, n)))
                .collect();
            verify(&w.meet_left, &m, f, &points, b)?;
            verify(&w.meet_right, &m, g, &points, b)
        }
        Property::MeetUniversality => {
            let echo = encode(&Program::echo()).expect("echo encodes");
            let agree: Vec<(Nat, Nat)> = f
                .entries()
                .into_iter()
                .flatten()
                .filter(|(n, v)| g.entries().and_then(|t| t.get(n)) == Some(v))
                .map(|(&n, &v)| (n, v))
                .collect();
            let h = PartialFn::table(agree);
            verify(&meet_universality(echo, echo), &h, &f.meet(g, *b), &grid, b)?;
            let bwd = encode(&w.graph_bwd).expect("graph_bwd encodes");
            verify(&meet_universality(echo, bwd), f, &f.meet(&f.graph(), *b), &grid, b)
        }
        Property::GraphForward => {
            let points: Vec<Nat> =
                grid.iter().flat_map(|&n| (0..=VALUE_BOUND).filter_map(move |m| pair(n, m))).collect();
            verify(&w.graph_fwd, &f.graph(), f, &points, b)
        }
        Property::GraphBackward => verify(&w.graph_bwd, f, &f.graph(), &grid, b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub passed: u64,
    pub failed: u64,
    /// The lowest failing instance and what went wrong there.
    pub first_failure: Option<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub properties: Vec<PropertyReport>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn violations(&self) -> u64 {
        self.properties.iter().map(|p| p.failed).sum()
    }
}

/// Runs every property on every instance. Instances are checked in
/// parallel; the report does not depend on the thread count.
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let results: Vec<Vec<Result<(), String>>> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let inst = instance(cfg.seed, i);
            Property::ALL.iter().map(|&p| check(p, &inst, cfg)).collect()
        })
        .collect();
    let properties = Property::ALL
        .iter()
        .enumerate()
        .map(|(k, &property)| {
            let mut r = PropertyReport { property, passed: 0, failed: 0, first_failure: None };
            for (i, row) in results.iter().enumerate() {
                match &row[k] {
                    Ok(()) => r.passed += 1,
                    Err(why) => {
                        r.failed += 1;
                        r.first_failure.get_or_insert((i as u64, why.clone()));
                    }
                }
            }
            r
        })
        .collect();
    let mut warnings = Vec::new();
    if cfg.grid == 0 {
        warnings.push("grid is empty: every property holds vacuously".to_string());
    }
    if cfg.instances == 0 {
        warnings.push("no instances were generated".to_string());
    }
    SuiteReport { schema_version: SCHEMA_VERSION, config: cfg.clone(), properties, warnings }
}
