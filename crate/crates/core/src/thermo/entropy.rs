//! Entropy production of the Pauli equations.

use crate::dynamics::master::{LadderPopulations, PauliRates, Transition};
use crate::Branch;

const NEGLIGIBLE_FLUX: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderEntropy {
    pub sigma: f64,
    /// Transitions with a non-zero forward flux but no reverse flux; they
    /// are left out of `sigma`.
    pub one_sided: usize,
}

/// Reverse partner of each transition: swapped labels, opposite `n`.
fn reverse_index(rates: &PauliRates) -> Vec<Option<usize>> {
    rates
        .transitions
        .iter()
        .map(|t| {
            rates
                .transitions
                .iter()
                .position(|b| b.to == t.from && b.from == t.to && b.n == -t.n)
        })
        .collect()
}

fn pair_term(jf: f64, jb: f64, one_sided: &mut usize) -> f64 {
    if jf < NEGLIGIBLE_FLUX && jb < NEGLIGIBLE_FLUX {
        return 0.0;
    }
    if jf <= 0.0 || jb <= 0.0 {
        *one_sided += 1;
        return 0.0;
    }
    (jf - jb) * (jf / jb).ln()
}

/// `sigma = 1/2 sum (J_f - J_b) ln(J_f / J_b)` over every ordered
/// transition between ladder sites.
pub fn entropy_production_ladder(rates: &PauliRates, p: &LadderPopulations) -> LadderEntropy {
    let rev = reverse_index(rates);
    let mut one_sided = 0;
    let mut sigma = 0.0;
    for zone in p.zones() {
        for (t, back) in rates.transitions.iter().zip(&rev) {
            let ps = p.get(t.from, zone);
            let pr = p.get(t.to, zone - t.n);
            let jf = t.rate * ps;
            let jb = back.map_or(0.0, |b| rates.transitions[b].rate * pr);
            sigma += pair_term(jf, jb, &mut one_sided);
        }
    }
    LadderEntropy {
        sigma: 0.5 * sigma,
        one_sided,
    }
}

/// Entropy production of the collapsed two-level Pauli equation.
pub fn entropy_production_collapsed(rates: &PauliRates, p: [f64; 2]) -> f64 {
    let (plus, minus) = (Branch::Plus, Branch::Minus);
    let jf = rates.collapsed(plus, minus) * p[minus.index()];
    let jb = rates.collapsed(minus, plus) * p[plus.index()];
    let mut ignored = 0;
    pair_term(jf, jb, &mut ignored)
}

/// Entropy production per zone of a translation-invariant ladder
/// `P_n(r) = p_r` (per unit of ladder population).
pub fn entropy_production_per_zone(rates: &PauliRates, p: [f64; 2]) -> f64 {
    let rev = reverse_index(rates);
    let mut ignored = 0;
    let sum: f64 = rates
        .transitions
        .iter()
        .zip(&rev)
        .map(|(t, back): (&Transition, &Option<usize>)| {
            let jf = t.rate * p[t.from.index()];
            let jb = back.map_or(0.0, |b| rates.transitions[b].rate * p[t.to.index()]);
            pair_term(jf, jb, &mut ignored)
        })
        .sum();
    0.5 * sum
}
