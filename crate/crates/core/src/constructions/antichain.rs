//! Antichain between `g < f`: sets `A_σ` for `σ ∈ 2^k`, each diagonalized
//! like the density set, plus mutual exclusions: for `σ ≠ τ`, a point of
//! `W_e^{α ⊕ A_σ ⊕ f}` kept out of `A_τ`.
//!
//! Each `A_σ` is grown as a characteristic string. An exclusion search runs
//! over extensions `ρ` of the current string of `A_σ` by at most
//! `extension_bits` bits, with `ρ` used as a finite oracle, in order
//! `(|ρ|, ρ, n)`; the found computation survives into the final set because
//! `A_σ` extends `ρ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::certificate::{Action as AnyAction, Evidence, Measure, OracleRef, Restraint, StageCertificate, Status};
use super::{claim, mismatch, Params, Transcript};
use crate::error::Error;
use crate::machine::{decode, pad, run_dialogue, Budget};
use crate::pairing::Nat;
use crate::partialfn::{OracleAnswer, PartialFn};
use crate::search::ce_enumerate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagonal {
    pub sigma: String,
    pub point: Option<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub sigma: String,
    pub tau: String,
    /// The extension of `A_σ`'s string the computation ran on.
    pub rho: Option<String>,
    pub point: Option<Nat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub e: Nat,
    pub diagonals: Vec<Diagonal>,
    pub exclusions: Vec<Exclusion>,
    /// `pad(e, 2^k)` and whether it enumerates the same set as `e`.
    pub padded_index: Nat,
    pub pad_agrees: bool,
}

fn strings(k: u32) -> Vec<String> {
    (0..1u64 << k)
        .map(|i| (0..k).map(|j| if i >> (k - 1 - j) & 1 == 1 { '1' } else { '0' }).collect())
        .collect()
}

fn set_name(sigma: &str) -> String {
    format!("A[{sigma}]")
}

fn enum_name(sigma: &str) -> String {
    format!("enum[{sigma}]")
}

fn bits(s: &[Nat]) -> String {
    s.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

fn table_of(s: &[Nat]) -> PartialFn {
    PartialFn::table(s.iter().enumerate().map(|(i, &v)| (i as Nat, v)))
}

/// The final indicator of `A_σ` on the universe: the string padded with zeros.
fn closed(s: &[Nat], universe: Nat) -> PartialFn {
    PartialFn::table((0..universe).map(|i| (i, s.get(i as usize).copied().unwrap_or(0))))
}

/// All extensions of `base` by `j ≤ extra` bits, shortest first, then lexicographic.
fn extensions(base: &[Nat], extra: u32) -> Vec<Vec<Nat>> {
    let mut out = Vec::new();
    for j in 0..=extra {
        for code in 0..1u64 << j {
            let mut r = base.to_vec();
            r.extend((0..j).map(|i| code >> (j - 1 - i) & 1));
            out.push(r);
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
/// Refuses unless `g ≤ f` is witnessed and `f ≤ g` refuted up to `index_bound`.
pub fn build_antichain(
    f: &PartialFn,
    g: &PartialFn,
    k: u32,
    e_max: Nat,
    universe: Nat,
    index_bound: Nat,
    extension_bits: u32,
    b: &Budget,
) -> Result<Transcript, Error> {
    if k > 6 {
        return Err(Error::InvalidArgument("k is limited to 6".into()));
    }
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
    objects.insert("alpha".to_string(), alpha.clone());
    let claims = vec![
        claim("g reduces to f", ("g", "f"), &objects, index_bound, &grid, b, true)?,
        claim("f does not reduce to g", ("f", "g"), &objects, index_bound, &grid, b, false)?,
    ];

    let sigmas = strings(k);
    let mut chi: BTreeMap<String, Vec<Nat>> = sigmas.iter().map(|s| (s.clone(), Vec::new())).collect();
    let mut stages = Vec::new();
    for e in 0..=e_max {
        let p = decode(e);
        let mut evidence = Vec::new();
        let mut diagonals = Vec::new();
        for s in &sigmas {
            let cur = chi.get_mut(s).expect("every string has a set");
            let mut point = None;
            for n in cur.len() as Nat..universe {
                let Some(v) = f.eval(n, fuel).value() else { continue };
                let out = run_dialogue(&p, g, n, b);
                if out.never_halts() || out.halted().is_some_and(|w| w != v) {
                    cur.resize(n as usize, 0);
                    cur.push(1);
                    point = Some(n);
                    let label = format!("diagonal {s}");
                    evidence.push(Evidence::run(label, &p, OracleRef::named("g"), &objects, n, b));
                    break;
                }
            }
            diagonals.push(Diagonal { sigma: s.clone(), point });
        }

        let mut exclusions = Vec::new();
        for s in &sigmas {
            for t in sigmas.iter().filter(|t| *t != s) {
                let mut found = None;
                'search: for rho in extensions(&chi[s], extension_bits) {
                    let oracle = alpha.join(&table_of(&rho).join(f));
                    for n in 0..universe {
                        if chi[t].get(n as usize) == Some(&1) {
                            continue;
                        }
                        if run_dialogue(&p, &oracle, n, b).halted().is_some() {
                            found = Some((rho, n, oracle));
                            break 'search;
                        }
                    }
                }
                match found {
                    Some((rho, n, oracle)) => {
                        let label = format!("enumerated {s} {t}");
                        evidence.push(Evidence::run(label, &p, OracleRef::inline(oracle), &objects, n, b));
                        let ct = chi.get_mut(t).expect("every string has a set");
                        if (ct.len() as Nat) <= n {
                            ct.resize(n as usize + 1, 0);
                        }
                        exclusions.push(Exclusion {
                            sigma: s.clone(),
                            tau: t.clone(),
                            rho: Some(bits(&rho)),
                            point: Some(n),
                        });
                        chi.insert(s.clone(), rho);
                    }
                    None => exclusions.push(Exclusion { sigma: s.clone(), tau: t.clone(), rho: None, point: None }),
                }
            }
        }

        let probe = alpha.join(&closed(&chi[&sigmas[0]], universe).join(f));
        let padded_index = pad(e, 1 << k)?;
        let pad_agrees = ce_enumerate(padded_index, &probe, universe - 1, b) == ce_enumerate(e, &probe, universe - 1, b);
        let status = if diagonals.iter().all(|d| d.point.is_some()) {
            Status::Satisfied
        } else {
            Status::Inconclusive { reason: format!("a diagonalization point is missing below {universe}") }
        };
        let mut cert =
            StageCertificate::new(e, AnyAction::Antichain(Action { e, diagonals, exclusions, padded_index, pad_agrees }), status);
        cert.evidence = evidence;
        for s in &sigmas {
            let table: BTreeMap<Nat, Nat> = chi[s].iter().enumerate().map(|(i, &v)| (i as Nat, v)).collect();
            cert.restraints.push(Restraint::snapshot(&set_name(s), &table, Measure::Point, chi[s].len() as Nat));
        }
        stages.push(cert);
    }

    for s in &sigmas {
        let set = closed(&chi[s], universe);
        let members: Vec<Nat> = chi[s].iter().enumerate().filter(|(_, &v)| v == 1).map(|(i, _)| i as Nat).collect();
        objects.insert(enum_name(s), alpha.join(&set.join(f)));
        objects.insert(set_name(s), set);
        objects.insert(format!("h[{s}]"), f.restrict(members).join(g));
    }
    let params = Params::Antichain { k, e_max, universe, index_bound, extension_bits };
    Ok(Transcript::new(params, *b, claims, objects, stages))
}

pub(crate) fn regenerate(t: &Transcript, b: Budget) -> Result<Transcript, Error> {
    let Params::Antichain { k, e_max, universe, index_bound, extension_bits } = t.header.params else { unreachable!() };
    build_antichain(t.object("f")?, t.object("g")?, k, e_max, universe, index_bound, extension_bits, &b)
}

pub(crate) fn check(t: &Transcript) -> Result<(), Error> {
    let Params::Antichain { k, universe, .. } = t.header.params else { unreachable!() };
    let b = t.header.budget;
    let f = t.object("f")?;
    for s in &t.stages {
        let loc = format!("stage e = {}", s.stage);
        let fail = |d: String| mismatch(&loc, d);
        let AnyAction::Antichain(act) = &s.action else { return Err(fail("wrong action kind".into())) };
        for d in &act.diagonals {
            let Some(n) = d.point else { continue };
            let ev = s.find(&format!("diagonal {}", d.sigma)).map_err(fail)?;
            let v = f.eval(n, b.oracle_fuel).value().ok_or_else(|| fail("diagonal point outside dom(f)".into()))?;
            let escapes = ev.outcome.never_halts() || ev.outcome.halted().is_some_and(|w| w != v);
            if ev.input != n || ev.program != decode(act.e) || !escapes {
                return Err(fail(format!("diagonal evidence for {} does not escape f", d.sigma)));
            }
            if t.object(&set_name(&d.sigma))?.eval(n, 1) != OracleAnswer::Defined(1) {
                return Err(fail(format!("diagonal point {n} missing from {}", set_name(&d.sigma))));
            }
        }
        for x in &act.exclusions {
            let (Some(rho), Some(n)) = (&x.rho, x.point) else { continue };
            let ev = s.find(&format!("enumerated {} {}", x.sigma, x.tau)).map_err(fail)?;
            if ev.input != n || ev.outcome.halted().is_none() {
                return Err(fail("exclusion evidence does not halt".into()));
            }
            let set = t.object(&set_name(&x.sigma))?;
            let extends = rho.chars().enumerate().all(|(i, c)| set.eval(i as Nat, 1) == OracleAnswer::Defined((c == '1') as Nat));
            if !extends {
                return Err(fail(format!("{} does not extend the string {rho}", set_name(&x.sigma))));
            }
            let out = run_dialogue(&ev.program, t.object(&enum_name(&x.sigma))?, n, &b);
            if out.halted() != ev.outcome.halted() {
                return Err(fail(format!("W_e over the final {} lost the point {n}", set_name(&x.sigma))));
            }
            if t.object(&set_name(&x.tau))?.eval(n, 1) != OracleAnswer::Defined(0) {
                return Err(fail(format!("excluded point {n} is in {}", set_name(&x.tau))));
            }
        }
        if act.padded_index != pad(act.e, 1 << k)? {
            return Err(fail("padded index differs".into()));
        }
        let probe = t.object(&enum_name(&strings(k)[0]))?;
        let agrees = ce_enumerate(act.padded_index, probe, universe - 1, &b) == ce_enumerate(act.e, probe, universe - 1, &b);
        if agrees != act.pad_agrees || !agrees {
            return Err(fail("padding changed the enumeration".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn string_orders() {
        assert_eq!(strings(2), vec!["00", "01", "10", "11"]);
        assert_eq!(strings(0), vec![""]);
        let ext: Vec<String> = extensions(&[1], 2).iter().map(|r| bits(r)).collect();
        assert_eq!(ext, vec!["1", "10", "11", "100", "101", "110", "111"]);
    }
}
