//! Qubit and dressed (zone-ladder) states in the Floquet interaction picture.

use crate::channels::{ChannelRegistry, JumpChannel};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm_sqr, Mat2, Vec2, C64};
use crate::Branch;

pub const INITIAL_HALF_WIDTH: i64 = 8;
pub const MAX_HALF_WIDTH: i64 = 4096;
const BOUNDARY_TOL: f64 = 1e-10;

/// Operations shared by both representations, written so that a dressed
/// state occupying one zone performs bit-for-bit the same arithmetic as
/// the corresponding qubit state.
pub trait JumpState: Clone + Send + Sync {
    fn norm_sqr(&self) -> f64;
    /// Multiply every `C^2` block by `m`.
    fn transform(&mut self, m: &Mat2);
    fn scale(&mut self, f: f64);
    /// `sum_blocks |<v_i, c>|^2` for each column `v_i` of `basis`.
    fn eigen_weights(&self, basis: &Mat2) -> [f64; 2];
    /// `||A(omega) psi||^2`, or `||B(omega) Psi||^2` for the dressed state.
    fn jump_weight(&self, channel: &JumpChannel) -> f64;
    /// Unnormalised image under the jump operator.
    fn apply_channel(&self, channel: &JumpChannel) -> Result<Self>;

    fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        self.scale(1.0 / n);
    }
}

/// Amplitudes `(c_+, c_-)` on `{phi_+(0), phi_-(0)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub c: Vec2,
}

impl QubitState {
    pub fn new(plus: C64, minus: C64) -> Self {
        QubitState {
            c: Vec2::new(plus, minus),
        }
    }

    pub fn floquet(r: Branch) -> Self {
        let mut c = Vec2::zeros();
        c[r.index()] = C64::from(1.0);
        QubitState { c }
    }

    pub fn amplitude(&self, r: Branch) -> C64 {
        self.c[r.index()]
    }

    pub fn population(&self, r: Branch) -> f64 {
        self.c[r.index()].norm_sqr()
    }

    pub fn density(&self) -> Mat2 {
        self.c * self.c.adjoint()
    }

    pub fn distance(&self, other: &QubitState) -> f64 {
        norm_sqr(&(self.c - other.c)).sqrt()
    }
}

impl JumpState for QubitState {
    fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.c)
    }

    fn transform(&mut self, m: &Mat2) {
        self.c = m * self.c;
    }

    fn scale(&mut self, f: f64) {
        self.c *= C64::from(f);
    }

    fn eigen_weights(&self, basis: &Mat2) -> [f64; 2] {
        [0, 1].map(|i| inner(&basis.column(i).into_owned(), &self.c).norm_sqr())
    }

    fn jump_weight(&self, channel: &JumpChannel) -> f64 {
        channel.weight(&self.c)
    }

    fn apply_channel(&self, channel: &JumpChannel) -> Result<Self> {
        Ok(QubitState {
            c: channel.apply(&self.c),
        })
    }
}

/// Ladder wavefunction `Psi = sum_{r,n} c_{r,n} phi_{r,n}` on the zone
/// window `[lo, lo + blocks.len() - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    lo: i64,
    blocks: Vec<Vec2>,
}

impl DressedState {
    /// Empty state on the symmetric window `[-half, half]`.
    pub fn zeros(half: i64) -> Self {
        DressedState {
            lo: -half,
            blocks: vec![Vec2::zeros(); (2 * half + 1) as usize],
        }
    }

    /// All amplitude in one zone.
    pub fn single_zone(c: Vec2, zone: i64) -> Result<Self> {
        let mut s = DressedState::zeros(INITIAL_HALF_WIDTH);
        s.ensure_contains(zone, zone)?;
        s.set_block(zone, c);
        Ok(s)
    }

    /// From `(zone, amplitudes)` pairs; later pairs overwrite earlier ones.
    pub fn from_blocks(blocks: &[(i64, Vec2)]) -> Result<Self> {
        let mut s = DressedState::zeros(INITIAL_HALF_WIDTH);
        for (zone, c) in blocks {
            s.ensure_contains(*zone, *zone)?;
            s.set_block(*zone, *c);
        }
        Ok(s)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.blocks.len() as i64 - 1)
    }

    pub fn half_width(&self) -> i64 {
        -self.lo
    }

    pub fn block(&self, zone: i64) -> Vec2 {
        let (lo, hi) = self.window();
        if zone < lo || zone > hi {
            Vec2::zeros()
        } else {
            self.blocks[(zone - lo) as usize]
        }
    }

    fn set_block(&mut self, zone: i64, c: Vec2) {
        let i = (zone - self.lo) as usize;
        self.blocks[i] = c;
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i64, &Vec2)> {
        self.blocks
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    pub fn population(&self, r: Branch, zone: i64) -> f64 {
        self.block(zone)[r.index()].norm_sqr()
    }

    pub fn zone_population(&self, zone: i64) -> f64 {
        norm_sqr(&self.block(zone))
    }

    /// Zones carrying any amplitude.
    pub fn occupied_zones(&self) -> Vec<i64> {
        self.blocks()
            .filter(|(_, c)| norm_sqr(c) > 0.0)
            .map(|(z, _)| z)
            .collect()
    }

    /// `sum_n` of the zone blocks' density matrices.
    pub fn reduced_density(&self) -> Mat2 {
        self.blocks.iter().map(|c| c * c.adjoint()).sum()
    }

    /// Zone-wise distance over the union of both windows.
    pub fn distance(&self, other: &DressedState) -> f64 {
        let lo = self.window().0.min(other.window().0);
        let hi = self.window().1.max(other.window().1);
        (lo..=hi)
            .map(|z| norm_sqr(&(self.block(z) - other.block(z))))
            .sum::<f64>()
            .sqrt()
    }

    /// Grow the symmetric window (doubling) until it holds `[a, b]`
    /// strictly inside its boundary zones.
    pub fn ensure_contains(&mut self, a: i64, b: i64) -> Result<()> {
        let need = a.abs().max(b.abs()) + 1;
        let mut half = self.half_width();
        if need <= half {
            return Ok(());
        }
        while half < need {
            half *= 2;
        }
        if half > MAX_HALF_WIDTH {
            return Err(Error::WindowOverflow {
                detail: format!("zone {need} needs a half-width beyond {MAX_HALF_WIDTH}"),
            });
        }
        let mut grown = DressedState::zeros(half);
        for (z, c) in self.blocks() {
            grown.set_block(z, *c);
        }
        *self = grown;
        Ok(())
    }

    fn boundary_population(&self) -> f64 {
        norm_sqr(&self.blocks[0]) + norm_sqr(self.blocks.last().expect("non-empty window"))
    }
}

impl JumpState for DressedState {
    fn norm_sqr(&self) -> f64 {
        let mut total = 0.0;
        for c in &self.blocks {
            total += norm_sqr(c);
        }
        total
    }

    fn transform(&mut self, m: &Mat2) {
        for c in &mut self.blocks {
            *c = m * *c;
        }
    }

    fn scale(&mut self, f: f64) {
        for c in &mut self.blocks {
            *c *= C64::from(f);
        }
    }

    fn eigen_weights(&self, basis: &Mat2) -> [f64; 2] {
        let v = [basis.column(0).into_owned(), basis.column(1).into_owned()];
        let mut w = [0.0; 2];
        for c in &self.blocks {
            for i in 0..2 {
                w[i] += inner(&v[i], c).norm_sqr();
            }
        }
        w
    }

    fn jump_weight(&self, channel: &JumpChannel) -> f64 {
        let mut total = 0.0;
        for c in &self.blocks {
            total += channel.weight(c);
        }
        total
    }

    /// `B(omega)` moves the amplitude of zone `k + n` into zone `k`.
    fn apply_channel(&self, channel: &JumpChannel) -> Result<Self> {
        let n = channel.n_omega;
        let occupied = self.occupied_zones();
        let mut out = self.clone();
        if let (Some(&a), Some(&b)) = (occupied.first(), occupied.last()) {
            out.ensure_contains(a - n, b - n)?;
        }
        let (lo, hi) = out.window();
        for zone in lo..=hi {
            out.set_block(zone, channel.apply(&self.block(zone + n)));
        }
        if out.boundary_population() > BOUNDARY_TOL * out.norm_sqr() {
            let half = out.half_width();
            out.ensure_contains(-half, half)?;
        }
        Ok(out)
    }
}

/// Dressed state equivalent to the qubit state `psi` with photon counter
/// `mu`: all amplitude sits in zone `-mu`.
pub fn embed_state(psi: &QubitState, mu: i64) -> Result<DressedState> {
    DressedState::single_zone(psi.c, -mu)
}

/// `max_omega | ||A psi||^2 - ||B Psi||^2 |` between a qubit state and its
/// embedding.
pub fn embedding_weight_defect(registry: &ChannelRegistry, psi: &QubitState, mu: i64) -> Result<f64> {
    let dressed = embed_state(psi, mu)?;
    Ok(registry
        .channels()
        .iter()
        .map(|c| (psi.jump_weight(c) - dressed.jump_weight(c)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelEntry;
    use crate::linalg::ONE;

    fn channel(n: i64) -> JumpChannel {
        JumpChannel {
            id: 0,
            omega: 1.0,
            n_omega: n,
            entries: vec![ChannelEntry {
                to: Branch::Minus,
                from: Branch::Plus,
                alpha: ONE,
            }],
            gamma: 1.0,
        }
    }

    #[test]
    fn jump_shifts_zone_by_minus_n() {
        let s = DressedState::single_zone(Vec2::new(ONE, C64::from(0.0)), 2).unwrap();
        let out = s.apply_channel(&channel(3)).unwrap();
        assert_eq!(out.occupied_zones(), vec![-1]);
        assert_eq!(out.population(Branch::Minus, -1), 1.0);
    }

    #[test]
    fn window_doubles_then_overflows() {
        let mut s = DressedState::single_zone(Vec2::new(ONE, C64::from(0.0)), 0).unwrap();
        s.ensure_contains(-20, 0).unwrap();
        assert_eq!(s.half_width(), 32);
        assert!(matches!(s.ensure_contains(0, 5000), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn single_zone_arithmetic_matches_qubit() {
        let q = QubitState::new(C64::new(0.6, 0.1), C64::new(-0.2, 0.7));
        let d = embed_state(&q, 5).unwrap();
        let ch = channel(1);
        assert_eq!(q.jump_weight(&ch), d.jump_weight(&ch));
        assert_eq!(q.norm_sqr(), d.norm_sqr());
        let basis = Mat2::new(
            C64::new(0.6, 0.0),
            C64::new(0.8, 0.0),
            C64::new(0.8, 0.0),
            C64::new(-0.6, 0.0),
        );
        assert_eq!(q.eigen_weights(&basis), d.eigen_weights(&basis));
    }
}
