use serde::{Deserialize, Serialize};

use crate::machine::{Native, Program};
use crate::pairing::Nat;

/// Reduction programs behind the lattice operations and the graph encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalWitnesses {
    /// `G_f ≤ f`: ask `f(n)` and compare with `m`.
    pub graph_fwd: Program,
    /// `f ≤ G_f`: ask `G_f(n, 0), G_f(n, 1), …`.
    pub graph_bwd: Program,
    /// `f ≤ f ⊕ g`.
    pub join_left: Program,
    /// `g ≤ f ⊕ g`.
    pub join_right: Program,
    /// `f ∩ g ≤ f`: on `⟨d, e, n⟩` simulate `Φ_d[f](n)`.
    pub meet_left: Program,
    /// `f ∩ g ≤ g`: on `⟨d, e, n⟩` simulate `Φ_e[g](n)`.
    pub meet_right: Program,
}

impl CanonicalWitnesses {
    pub fn named(&self) -> Vec<(&'static str, &Program)> {
        vec![
            ("graph_fwd", &self.graph_fwd),
            ("graph_bwd", &self.graph_bwd),
            ("join_left", &self.join_left),
            ("join_right", &self.join_right),
            ("meet_left", &self.meet_left),
            ("meet_right", &self.meet_right),
        ]
    }
}

pub fn canonical_witnesses() -> CanonicalWitnesses {
    CanonicalWitnesses {
        graph_fwd: Program::Native(Native::GraphFwd),
        graph_bwd: Program::Native(Native::GraphBwd),
        join_left: Program::Native(Native::JoinLeft),
        join_right: Program::Native(Native::JoinRight),
        meet_left: Program::Native(Native::RelayLeft),
        meet_right: Program::Native(Native::RelayRight),
    }
}

/// `h ≤ f ∩ g` from witnesses `d` of `h ≤ f` and `e` of `h ≤ g`: ask `⟨d, e, n⟩`.
pub fn meet_universality(d: Nat, e: Nat) -> Program {
    Program::Native(Native::MeetQuery { left: d, right: e })
}

/// A program computing the finite table over any oracle and diverging
/// elsewhere, so every finite function has the least degree.
pub fn finite_program(table: impl IntoIterator<Item = (Nat, Nat)>) -> Program {
    Program::Native(Native::Override {
        table: table.into_iter().collect(),
        program: Box::new(Program::self_loop()),
    })
}

/// Reads `χ_dom(f)(n)` off `K₀(f)` by asking it at `i(n)`.
pub fn domain_via_k0() -> Program {
    Program::Native(Native::InflationQuery)
}

/// Reads `f(n)` off `K(f)` by asking whether `f(n) = 0, 1, …` in turn.
pub fn jump_decode() -> Program {
    Program::Native(Native::JumpDecode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{encode, run_dialogue, Budget};
    use crate::pairing::pair;
    use crate::partialfn::PartialFn;

    #[test]
    fn join_left_projects() {
        let w = canonical_witnesses();
        let h = PartialFn::table([(0, 4)]).join(&PartialFn::table([(1, 7)]));
        assert_eq!(run_dialogue(&w.join_left, &h, 0, &Budget::default()).halted(), Some(4));
        assert_eq!(run_dialogue(&w.join_right, &h, 1, &Budget::default()).halted(), Some(7));
    }

    #[test]
    fn graph_bwd_asks_six_questions() {
        let w = canonical_witnesses();
        let g = PartialFn::table([(3, 5)]).graph();
        let out = run_dialogue(&w.graph_bwd, &g, 3, &Budget::default());
        assert_eq!(out.halted(), Some(5));
        let qs: Vec<Nat> = out.queries().collect();
        assert_eq!(qs, (0..6).map(|m| pair(3, m).unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn universality_on_identical_sides() {
        let f = PartialFn::table([(0, 1)]);
        let echo = encode(&Program::echo()).unwrap();
        let m = f.meet(&f, Budget::default());
        let out = run_dialogue(&meet_universality(echo, echo), &m, 0, &Budget::default());
        assert_eq!(out.halted(), Some(1));
    }

    #[test]
    fn finite_tables_are_computable() {
        let p = finite_program([(2, 8), (5, 1)]);
        let b = Budget::default();
        assert_eq!(run_dialogue(&p, &PartialFn::empty(), 2, &b).halted(), Some(8));
        assert!(run_dialogue(&p, &PartialFn::empty(), 3, &b).is_divergent());
    }
}
