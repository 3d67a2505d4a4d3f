//! Stochastic nonadiabatic transitions.
//!
//! A transition changes one index of the current pair `(a, b)` (ket side or
//! bra side) and rescales the bath momenta along the unit coupling
//! direction `u = d_12 / |d_12|` so that the kinetic energy compensates the
//! change of the mean surface, `dE = (E_a' + E_b')/2 - (E_a + E_b)/2`.
//!
//! Its first-order matrix element is `tau (P/M) . d_{current,target}` with
//! `x = |tau (P/M) . d|`. The primitive probability is `x / (1 + x)`. The
//! energy-conserving probability is `x w / (1 + x w)`, where `w` is 1 if the
//! energy residual of the proposed jump lies within `c_energy` and 0
//! otherwise. Accepted transitions multiply the trajectory weight by
//! `matrix_element / probability`. Rejected ones multiply it by
//! `1 / (1 - probability)`.

use serde::{Deserialize, Serialize};

use crate::adiabatic::{dot, SpinBoson, Surface, SurfacePair};
use crate::bath::MASS;
use crate::error::{Error, Result};
use crate::propagator::SegmentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Ket,
    Bra,
}

impl Side {
    pub fn current(self, pair: SurfacePair) -> Surface {
        match self {
            Side::Ket => pair.ket,
            Side::Bra => pair.bra,
        }
    }

    pub fn replaced(self, pair: SurfacePair, s: Surface) -> SurfacePair {
        match self {
            Side::Ket => SurfacePair::new(s, pair.bra),
            Side::Bra => SurfacePair::new(pair.ket, s),
        }
    }
}

/// How the bath momenta respond to a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpRule {
    /// `(u.P')^2 = (u.P)^2 - 2 M dE` with the sign of `u.P` kept.
    /// Energy-exact, frustrated when the right-hand side is negative.
    ExactRescale,
    /// `u.P' = u.P - M dE / (u.P)`, the small-gap expansion of the square
    /// root. Leaves an energy residual of `M dE^2 / (2 (u.P)^2)`.
    FirstOrderShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    Primitive,
    EnergyConserving { c_energy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub variant: Variant,
    pub jump_rule: JumpRule,
}

impl SamplingScheme {
    pub fn primitive(jump_rule: JumpRule) -> Self {
        Self {
            variant: Variant::Primitive,
            jump_rule,
        }
    }

    pub fn energy_conserving(c_energy: f64, jump_rule: JumpRule) -> Result<Self> {
        if !(c_energy > 0.0) {
            return Err(Error::invalid("c_energy", "energy window must be > 0"));
        }
        Ok(Self {
            variant: Variant::EnergyConserving { c_energy },
            jump_rule,
        })
    }

    pub fn c_energy(&self) -> Option<f64> {
        match self.variant {
            Variant::Primitive => None,
            Variant::EnergyConserving { c_energy } => Some(c_energy),
        }
    }
}

/// Momentum response of a proposal, stored as the projection of `P` on the
/// unit coupling direction before and after the jump. Components
/// orthogonal to that direction are unchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumJump {
    Shift { before: f64, after: f64 },
    Frustrated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopProposal {
    pub side: Side,
    pub from: SurfacePair,
    pub to: SurfacePair,
    /// `x = |matrix_element|`.
    pub rate_x: f64,
    /// `tau (P/M) . d_{current,target}`.
    pub matrix_element: f64,
    pub jump: MomentumJump,
    /// Change of the mean-surface potential caused by the index change.
    pub mean_energy_change: f64,
    /// `None` for frustrated proposals.
    pub energy_residual: Option<f64>,
}

impl HopProposal {
    pub fn target(&self) -> Surface {
        self.side.current(self.to)
    }

    pub fn is_frustrated(&self) -> bool {
        matches!(self.jump, MomentumJump::Frustrated)
    }

    /// Post-jump momenta as a full vector. `None` if frustrated.
    pub fn shifted_momenta(&self, state: &SegmentState, model: &SpinBoson) -> Option<Vec<f64>> {
        match self.jump {
            MomentumJump::Frustrated => None,
            MomentumJump::Shift { before, after } => Some(
                state
                    .point()
                    .momenta
                    .iter()
                    .zip(model.coupling_direction())
                    .map(|(p, u)| p + (after - before) * u)
                    .collect(),
            ),
        }
    }

    /// Performs the transition on `state`.
    pub fn apply(&self, state: &mut SegmentState, model: &SpinBoson) {
        match self.jump {
            MomentumJump::Frustrated => panic!("frustrated proposals cannot be applied"),
            MomentumJump::Shift { before, after } => {
                state.jump(self.to, Some((model.coupling_direction(), after - before)))
            }
        }
    }
}

/// Builds the transition that flips the `side` index of the current pair.
pub fn propose_hop(
    state: &SegmentState,
    side: Side,
    tau: f64,
    model: &SpinBoson,
    jump_rule: JumpRule,
) -> Result<HopProposal> {
    if !model.has_coupling() {
        return Err(Error::NoCoupling);
    }
    let from = state.pair();
    let current = side.current(from);
    let to = side.replaced(from, current.other());

    let gamma = state.gamma();
    let gap = model.gap_half(gamma);
    let mean_energy_change = -(to.mean_sign() - from.mean_sign()) * gap;

    let before = dot(model.coupling_direction(), &state.point().momenta);
    // d_12 = k |c| u; d_21 = -d_12.
    let d12_along = model.coupling_scale(gamma) * model.coupling_norm();
    let oriented = match current {
        Surface::Lower => d12_along,
        Surface::Upper => -d12_along,
    };
    let matrix_element = tau * oriented * before / MASS;

    let jump = match jump_rule {
        JumpRule::ExactRescale => {
            let disc = before * before - 2.0 * MASS * mean_energy_change;
            if disc < 0.0 {
                MomentumJump::Frustrated
            } else {
                MomentumJump::Shift {
                    before,
                    after: before.signum() * disc.sqrt(),
                }
            }
        }
        JumpRule::FirstOrderShift => {
            if before == 0.0 {
                MomentumJump::Frustrated
            } else {
                MomentumJump::Shift {
                    before,
                    after: before - MASS * mean_energy_change / before,
                }
            }
        }
    };
    let energy_residual = match jump {
        MomentumJump::Frustrated => None,
        MomentumJump::Shift { before, after } => {
            Some((after * after - before * before) / (2.0 * MASS) + mean_energy_change)
        }
    };

    Ok(HopProposal {
        side,
        from,
        to,
        rate_x: matrix_element.abs(),
        matrix_element,
        jump,
        mean_energy_change,
        energy_residual,
    })
}

/// Total energy change of a transition `old_pair -> new_pair` with
/// momenta `p -> p_new` at fixed configuration `r`.
pub fn energy_residual(
    p: &[f64],
    p_new: &[f64],
    old_pair: SurfacePair,
    new_pair: SurfacePair,
    r: &[f64],
    model: &SpinBoson,
) -> f64 {
    let kin = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / (2.0 * MASS);
    kin(p_new) + model.mean_energy(new_pair, r) - kin(p) - model.mean_energy(old_pair, r)
}

/// Indicator window on the energy residual, inclusive at the boundary.
pub fn energy_weight(residual: f64, c_energy: f64) -> f64 {
    if residual.abs() <= c_energy {
        1.0
    } else {
        0.0
    }
}

/// The effective `w` entering the probability: 1 for the primitive scheme,
/// the energy window for the energy-conserving one, 0 if frustrated.
pub fn effective_weight(proposal: &HopProposal, scheme: &SamplingScheme) -> f64 {
    match (proposal.energy_residual, scheme.variant) {
        (None, _) => 0.0,
        (Some(_), Variant::Primitive) => 1.0,
        (Some(e), Variant::EnergyConserving { c_energy }) => energy_weight(e, c_energy),
    }
}

pub fn hop_probability(proposal: &HopProposal, scheme: &SamplingScheme) -> f64 {
    let xw = proposal.rate_x * effective_weight(proposal, scheme);
    xw / (1.0 + xw)
}

/// Importance-sampling multiplier for the realized branch.
pub fn weight_factor(proposal: &HopProposal, scheme: &SamplingScheme, accepted: bool) -> f64 {
    let prob = hop_probability(proposal, scheme);
    if accepted {
        assert!(prob > 0.0, "accepted a transition with zero probability");
        proposal.matrix_element / prob
    } else {
        1.0 / (1.0 - prob)
    }
}
