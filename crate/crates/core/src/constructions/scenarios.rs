//! Bundled inputs for every construction, used by the CLI and the suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    build_antichain, build_density, build_jump_inversion, build_quasiminimal, nondistributive, spoil_infimum,
    spoil_supremum, ConstructionName, Transcript,
};
use crate::error::Error;
use crate::machine::Budget;
use crate::pairing::Nat;
use crate::partialfn::PartialFn;

pub const SEED: u64 = 0x5eed;
pub const UNIVERSE: Nat = 64;
pub const INDEX_BOUND: Nat = 512;

/// The budget the bundled scenarios are tuned for.
pub fn default_budget() -> Budget {
    Budget { step_fuel: 20_000, round_cap: 64, oracle_fuel: 5_000 }
}

/// A total function on `0..len` with values below 1000, fixed by `seed`.
pub fn random_total(seed: u64, len: Nat) -> PartialFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PartialFn::table((0..len).map(|n| (n, rng.gen_range(0..1000))))
}

/// The stage count each construction runs by default.
pub fn default_e_max(name: ConstructionName) -> Nat {
    match name {
        ConstructionName::Quasiminimal | ConstructionName::Density | ConstructionName::JumpInversion => 4,
        ConstructionName::Antichain | ConstructionName::SupSpoiler | ConstructionName::InfSpoiler => 2,
        ConstructionName::Nondistributive => 8,
    }
}

fn prefix(f: &PartialFn, len: Nat) -> PartialFn {
    f.restrict(0..len)
}

/// Runs a construction on its bundled inputs, with stages `0..=e_max`.
pub fn bundled(name: ConstructionName, e_max: Option<Nat>, b: &Budget) -> Result<Transcript, Error> {
    let e_max = e_max.unwrap_or_else(|| default_e_max(name));
    let f = random_total(SEED, UNIVERSE);
    let evens = f.restrict((0..UNIVERSE).filter(|n| n % 2 == 0));
    let wide = random_total(SEED + 1, 96);
    match name {
        ConstructionName::Quasiminimal => build_quasiminimal(&f, e_max, UNIVERSE, INDEX_BOUND, b),
        ConstructionName::Density => build_density(&f, &evens, e_max, UNIVERSE, INDEX_BOUND, b),
        ConstructionName::Antichain => build_antichain(&f, &evens, 2, e_max, UNIVERSE, INDEX_BOUND, 2, b),
        ConstructionName::JumpInversion => {
            let h = PartialFn::table([(0, 3), (1, 1)]);
            build_jump_inversion(&h, e_max, 1, 4, b)
        }
        ConstructionName::SupSpoiler => {
            let gs: Vec<PartialFn> = [32, 48, 64].iter().map(|&l| prefix(&wide, l)).collect();
            spoil_supremum(&gs, &wide, e_max, 96, 64, INDEX_BOUND, b)
        }
        ConstructionName::InfSpoiler => {
            let gs: Vec<PartialFn> = [64, 48, 32].iter().map(|&l| prefix(&wide, l)).collect();
            let legs = vec![1; gs.len()];
            spoil_infimum(&gs, &prefix(&wide, 16), e_max, &legs, 64, INDEX_BOUND, b)
        }
        ConstructionName::Nondistributive => nondistributive::build_nondistributive(e_max + 1, 0, b),
    }
}
