//! Density: given `g < f`, build `h = (f ↾ A) ⊕ g` strictly between them.
//! `A` is chosen by the quasiminimal engine with `Φ_e[g]` as the
//! diagonalized computation and `W_e^{α ⊕ f}` as the enumeration, where `α`
//! is the domain indicator of `g` on the universe.

use std::collections::BTreeMap;

use super::certificate::Action as AnyAction;
use super::quasiminimal::{check_engine, indicator, run_engine, Action, Roles};
use super::{claim, claim_with, Params, Transcript};
use crate::error::Error;
use crate::machine::{Budget, Native, Program};
use crate::pairing::Nat;
use crate::partialfn::{canonical_witnesses, OracleAnswer, PartialFn};

const ROLES: Roles<'static> = Roles { f: "f", diag: "g", enumerate: "alpha_join_f" };

fn wrap(a: Action) -> AnyAction {
    AnyAction::Density(a)
}

fn unwrap(a: &AnyAction) -> Option<&Action> {
    match a {
        AnyAction::Density(x) => Some(x),
        _ => None,
    }
}

/// Refuses unless `g ≤ f` is witnessed and `f ≤ g` refuted up to `index_bound`.
pub fn build_density(
    f: &PartialFn,
    g: &PartialFn,
    e_max: Nat,
    universe: Nat,
    index_bound: Nat,
    b: &Budget,
) -> Result<Transcript, Error> {
    let grid: Vec<Nat> = (0..universe).collect();
    let fuel = b.oracle_fuel;
    let mut alpha = BTreeMap::new();
    for n in 0..universe {
        match g.eval(n, fuel) {
            OracleAnswer::Unknown => return Err(Error::ContractAbort(format!("g answers unknown at {n}"))),
            a => {
                alpha.insert(n, a.is_defined() as Nat);
            }
        }
    }
    let alpha = PartialFn::table(alpha);
    let mut objects = BTreeMap::new();
    objects.insert("f".to_string(), f.clone());
    objects.insert("g".to_string(), g.clone());
    objects.insert("alpha_join_f".to_string(), alpha.join(f));
    objects.insert("alpha".to_string(), alpha);
    let mut claims = vec![
        claim("g reduces to f", ("g", "f"), &objects, index_bound, &grid, b, true)?,
        claim("f does not reduce to g", ("f", "g"), &objects, index_bound, &grid, b, false)?,
    ];
    let g_to_f = claims[0].witness.clone().expect("witnessed above");

    let run = run_engine(&objects, &ROLES, e_max, universe, b, wrap);
    let f_on_a = f.restrict(run.a.iter().copied());
    objects.insert("A".to_string(), PartialFn::table(indicator(&run.a)));
    objects.insert("h".to_string(), f_on_a.join(g));
    objects.insert("f_on_A".to_string(), f_on_a);

    let h_grid: Vec<Nat> = (0..2 * universe).collect();
    let w = canonical_witnesses();
    let h_to_f = Program::Native(Native::Cases { even: Box::new(Program::echo()), odd: Box::new(g_to_f) });
    claims.push(claim_with("g reduces to h", ("g", "h"), &objects, &w.join_right, &grid, b)?);
    claims.push(claim_with("h reduces to f", ("h", "f"), &objects, &h_to_f, &h_grid, b)?);
    claims.push(claim("f does not reduce to h", ("f", "h"), &objects, index_bound, &grid, b, false)?);
    claims.push(claim("h does not reduce to g", ("h", "g"), &objects, index_bound, &h_grid, b, false)?);
    Ok(Transcript::new(Params::Density { e_max, universe, index_bound }, *b, claims, objects, run.stages))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let Params::Density { e_max, universe, index_bound } = t.header.params else { unreachable!() };
    build_density(t.object("f")?, t.object("g")?, e_max, universe, index_bound, &b)
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    let Params::Density { universe, .. } = t.header.params else { unreachable!() };
    check_engine(t, &ROLES, universe, unwrap)
}
