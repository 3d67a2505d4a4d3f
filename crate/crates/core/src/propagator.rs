//! Deterministic segments between transitions.
//!
//! A segment on pair `(a, b)` moves the bath on the mean surface
//! `(E_a + E_b) / 2` with velocity Verlet and accumulates the adiabatic
//! phase `exp(i w_ab tau)`, with `w_ab` evaluated at the midpoint
//! configuration of the step.

use num_complex::Complex64;

use crate::adiabatic::{frequency_from_gap, SpinBoson, SurfacePair};
use crate::bath::{PhasePoint, MASS};

/// Bath phase point, current surface pair and accumulated adiabatic phase.
///
/// The phase is carried as an angle, so the unit-modulus factor
/// [`SegmentState::phase`] never drifts off the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentState {
    point: PhasePoint,
    pair: SurfacePair,
    phase_angle: f64,
    // gamma(R) for the current positions.
    gamma: f64,
}

impl SegmentState {
    pub fn new(model: &SpinBoson, point: PhasePoint, pair: SurfacePair) -> Self {
        assert_eq!(point.len(), model.n_modes(), "phase point dimension");
        let gamma = model.gamma(&point.positions);
        Self {
            point,
            pair,
            phase_angle: 0.0,
            gamma,
        }
    }

    pub fn point(&self) -> &PhasePoint {
        &self.point
    }

    pub fn pair(&self) -> SurfacePair {
        self.pair
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Accumulated `int w_ab dt`.
    pub fn phase_angle(&self) -> f64 {
        self.phase_angle
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase_angle)
    }

    /// Switches the surface pair and replaces the momenta. Positions are
    /// untouched, so the cached `gamma` stays valid.
    pub(crate) fn jump(&mut self, pair: SurfacePair, momentum_shift: Option<(&[f64], f64)>) {
        self.pair = pair;
        if let Some((direction, delta)) = momentum_shift {
            for (p, u) in self.point.momenta.iter_mut().zip(direction) {
                *p += delta * u;
            }
        }
    }

    /// Flips all momenta (time reversal of the bath).
    pub fn reverse_momenta(&mut self) {
        for p in &mut self.point.momenta {
            *p = -*p;
        }
    }
}

/// Mean-surface force `-w_j^2 R_j + s c_j gamma / G` with `s` the pair's
/// mean surface sign, added as `scale * F` to `out`.
fn kick(model: &SpinBoson, pair: SurfacePair, r: &[f64], gamma: f64, scale: f64, p: &mut [f64]) {
    let s = pair.mean_sign();
    let shift = if s == 0.0 {
        0.0
    } else {
        s * gamma / model.gap_half(gamma)
    };
    let c = model.bath().couplings();
    for (((pj, &w2), &rj), &cj) in p.iter_mut().zip(model.omega_sq()).zip(r).zip(c) {
        *pj += scale * (-w2 * rj + cj * shift);
    }
}

/// Advances the segment by one velocity-Verlet step of length `tau`.
pub fn step_segment(state: &mut SegmentState, tau: f64, model: &SpinBoson) {
    debug_assert!(tau > 0.0);
    let half = 0.5 * tau;
    let gamma_start = state.gamma;
    let pair = state.pair;
    let PhasePoint { positions, momenta } = &mut state.point;

    kick(model, pair, positions, gamma_start, half, momenta);
    for (r, p) in positions.iter_mut().zip(momenta.iter()) {
        *r += tau * p / MASS;
    }
    let gamma_end = model.gamma(positions);
    kick(model, pair, positions, gamma_end, half, momenta);

    if !pair.is_diagonal() {
        // gamma is linear in R, so the midpoint configuration has the mean gamma.
        let gap = model.gap_half(0.5 * (gamma_start + gamma_end));
        state.phase_angle += frequency_from_gap(gap, pair) * tau;
    }
    state.gamma = gamma_end;
}

/// `P^2 / 2M + (E_ket(R) + E_bra(R)) / 2`, conserved along a segment.
pub fn segment_energy(state: &SegmentState, model: &SpinBoson) -> f64 {
    state.point.kinetic_energy() + model.mean_energy(state.pair, &state.point.positions)
}
