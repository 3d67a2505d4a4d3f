//! Reference values for the stochastic engine.
//!
//! [`enumerate_dyson`] sums the short-time propagator concatenation over
//! every per-step branch (no hop, ket hop, bra hop) with the bare matrix
//! elements as coefficients. This is the exact expectation of the engine's
//! importance-sampled estimator from the same start. Physics goes through
//! the same [`propagator`](crate::propagator) and [`hopping`](crate::hopping)
//! routines as the engine; only the control flow differs.

use num_complex::Complex64;

use crate::adiabatic::{sigma_z_element, SpinBoson, SurfacePair};
use crate::bath::PhasePoint;
use crate::error::{Error, Result};
use crate::hopping::{hop_probability, propose_hop, SamplingScheme, Side};
use crate::propagator::{step_segment, SegmentState};

/// Largest step count accepted by [`enumerate_dyson`] (3^n branches).
pub const MAX_ENUMERATION_STEPS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSum {
    pub value: Complex64,
    pub n_branches: u64,
    /// Largest `|coefficient product|` over surviving branches.
    pub max_weight: f64,
}

/// Exact branch sum of `weight * sigma_z^{pair}(R)` after `n_steps` steps
/// from `(x0, pair0)`. Branches that the scheme can never sample (energy
/// window closed, frustrated jump, zero rate) are pruned.
pub fn enumerate_dyson(
    x0: &PhasePoint,
    pair0: SurfacePair,
    n_steps: usize,
    tau: f64,
    model: &SpinBoson,
    scheme: &SamplingScheme,
) -> Result<BranchSum> {
    if n_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::TooManySteps {
            n_steps,
            limit: MAX_ENUMERATION_STEPS,
        });
    }
    let mut sum = BranchSum {
        value: Complex64::new(0.0, 0.0),
        n_branches: 0,
        max_weight: 0.0,
    };
    let start = SegmentState::new(model, x0.clone(), pair0);
    descend(start, 1.0, n_steps, tau, model, scheme, &mut sum);
    Ok(sum)
}

fn descend(
    mut state: SegmentState,
    coefficient: f64,
    steps_left: usize,
    tau: f64,
    model: &SpinBoson,
    scheme: &SamplingScheme,
    sum: &mut BranchSum,
) {
    if steps_left == 0 {
        let sz = sigma_z_element(model.omega(), state.gamma(), state.pair());
        sum.value += state.phase() * (coefficient * sz);
        sum.n_branches += 1;
        sum.max_weight = sum.max_weight.max(coefficient.abs());
        return;
    }
    step_segment(&mut state, tau, model);

    if model.has_coupling() {
        for side in [Side::Ket, Side::Bra] {
            let proposal = propose_hop(&state, side, tau, model, scheme.jump_rule)
                .expect("coupling checked above");
            if hop_probability(&proposal, scheme) > 0.0 {
                let mut hopped = state.clone();
                proposal.apply(&mut hopped, model);
                descend(
                    hopped,
                    coefficient * proposal.matrix_element,
                    steps_left - 1,
                    tau,
                    model,
                    scheme,
                    sum,
                );
            }
        }
    }
    descend(state, coefficient, steps_left - 1, tau, model, scheme, sum);
}

/// `<sigma_z(t)>` of the isolated two-level system started in the up state.
pub fn analytic_uncoupled(t: f64, omega_tunnel: f64) -> f64 {
    (2.0 * omega_tunnel * t).cos()
}
