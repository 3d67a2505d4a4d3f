//! The SSTP trajectory loop and the ensemble runner.
//!
//! Every step first advances the segment, then tests a ket-side transition
//! and, only if that one was rejected, a bra-side transition. Each test
//! multiplies the trajectory weight by the importance-sampling factor of
//! the realized branch. In expectation this reproduces the three-branch sum
//! `no hop + tau J_ket + tau J_bra` of the short-time propagator, which
//! [`crate::oracle::enumerate_dyson`] evaluates exactly.
//!
//! Randomness is drawn from counter-based streams keyed by
//! `(seed, traj_index, purpose)`, and ensemble reductions run over
//! fixed-size blocks merged in index order. Results are therefore
//! independent of the number of worker threads.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{sigma_z_element, SpinBoson, Surface, SurfacePair};
use crate::bath::{discretize_bath, sample_wigner, PhasePoint};
use crate::config::RunConfig;
use crate::error::Result;
use crate::estimator::{Accumulator, ObservableSeries};
use crate::hopping::{
    effective_weight, hop_probability, propose_hop, weight_factor, SamplingScheme, Side, Variant,
};
use crate::propagator::{step_segment, SegmentState};
use crate::rng::{stream, Purpose};

/// Trajectories per reduction block. Fixed so that the summation tree does
/// not depend on the thread pool.
const BLOCK: usize = 32;

/// One accepted transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopEvent {
    pub step: usize,
    pub side: Side,
    pub target: Surface,
    pub energy_residual: f64,
}

/// Counters over all transition tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HopStats {
    pub tests: u64,
    pub accepted: u64,
    pub frustrated: u64,
    /// Non-frustrated proposals with nonzero rate that the energy window
    /// rejected (probability forced to zero).
    pub filtered: u64,
    /// Accepted transitions whose residual falls outside the energy window.
    /// Must stay zero for the energy-conserving scheme.
    pub window_violations: u64,
    pub max_accepted_residual: f64,
}

impl HopStats {
    pub fn merge(&mut self, other: &HopStats) {
        self.tests += other.tests;
        self.accepted += other.accepted;
        self.frustrated += other.frustrated;
        self.filtered += other.filtered;
        self.window_violations += other.window_violations;
        self.max_accepted_residual = self.max_accepted_residual.max(other.max_accepted_residual);
    }
}

/// Segment plus the real importance-sampling amplitude and hop history.
///
/// The complex trajectory weight is `amplitude * exp(i phase)`; the phase
/// lives in the segment.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub segment: SegmentState,
    pub amplitude: f64,
    pub hop_log: Vec<HopEvent>,
}

impl TrajectoryState {
    pub fn new(segment: SegmentState) -> Self {
        Self {
            segment,
            amplitude: 1.0,
            hop_log: Vec::new(),
        }
    }

    pub fn weight(&self) -> Complex64 {
        self.segment.phase() * self.amplitude
    }

    pub fn pair(&self) -> SurfacePair {
        self.segment.pair()
    }
}

/// One recorded point of a sub-trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub pair: SurfacePair,
    pub weight: Complex64,
    /// `sigma_z^{ket,bra}(R)` at the recorded configuration.
    pub sigma_z: f64,
    pub point: Option<PhasePoint>,
}

impl Sample {
    /// `Re[weight * sigma_z^{ket,bra}(R)]`.
    pub fn estimate(&self) -> f64 {
        self.weight.re * self.sigma_z
    }
}

/// Why a trajectory is singled out in the reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryFlags {
    /// Some weight became NaN or infinite; propagation stopped there.
    pub non_finite: bool,
    /// `|weight|` exceeded the configured cap at some recorded time.
    pub over_cap: bool,
}

impl TrajectoryFlags {
    fn merge(&mut self, other: TrajectoryFlags) {
        self.non_finite |= other.non_finite;
        self.over_cap |= other.over_cap;
    }
}

/// A sub-trajectory: one initial surface pair on one bath draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SubTrajectory {
    pub initial_pair: SurfacePair,
    /// Adiabatic density element of the initial pair, times the inverse
    /// selection probability when the pair was drawn at random.
    pub initial_factor: f64,
    pub samples: Vec<Sample>,
    pub hop_log: Vec<HopEvent>,
    pub flags: TrajectoryFlags,
}

/// Output of [`Engine::run_trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub traj_index: u64,
    pub initial_point: PhasePoint,
    pub subs: Vec<SubTrajectory>,
    pub stats: HopStats,
}

impl TrajectoryRecord {
    pub fn flags(&self) -> TrajectoryFlags {
        let mut f = TrajectoryFlags::default();
        for s in &self.subs {
            f.merge(s.flags);
        }
        f
    }

    /// Per-trajectory estimate of `<sigma_z>` at record `k`.
    pub fn estimate(&self, k: usize) -> f64 {
        self.subs
            .iter()
            .map(|s| s.initial_factor * s.samples[k].estimate())
            .sum()
    }
}

/// Aggregated ensemble output.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub series: ObservableSeries,
    /// Largest `|weight|` over all sub-trajectories at each recorded time.
    pub max_weight: Vec<f64>,
    pub stats: HopStats,
    pub n_traj: usize,
    /// Trajectories entering the estimates.
    pub n_used: usize,
    pub n_non_finite: usize,
    pub n_over_cap: usize,
    pub hop_logs: Option<Vec<(u64, SurfacePair, Vec<HopEvent>)>>,
}

/// Bookkeeping handed to [`Engine::propagate`] callbacks.
struct StepOutcome {
    non_finite: bool,
}

/// A configured simulation: model, bath, scheme and run geometry.
#[derive(Debug, Clone)]
pub struct Engine {
    config: RunConfig,
    model: SpinBoson,
    scheme: SamplingScheme,
    n_steps: usize,
}

impl Engine {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let params = config.model_params()?;
        let bath = discretize_bath(&params, config.n_modes, config.omega_c, config.omega_max)?;
        Ok(Self {
            config: config.clone(),
            model: SpinBoson::new(params, bath),
            scheme: config.sampling_scheme()?,
            n_steps: config.n_steps()?,
        })
    }

    /// Replaces the model, keeping the run geometry. Used for hand-built
    /// baths in tests and validation runs.
    pub fn with_model(mut self, model: SpinBoson) -> Self {
        self.model = model;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn model(&self) -> &SpinBoson {
        &self.model
    }

    pub fn scheme(&self) -> &SamplingScheme {
        &self.scheme
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn tau(&self) -> f64 {
        self.config.tau
    }

    pub fn record_times(&self) -> Vec<f64> {
        let stride = self.config.record_stride;
        (0..=self.n_steps / stride)
            .map(|k| (k * stride) as f64 * self.config.tau)
            .collect()
    }

    /// One step: segment, then the ket test, then the bra test if the ket
    /// test did not hop. Always consumes exactly two uniforms.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut TrajectoryState,
        step_index: usize,
        rng: &mut R,
        stats: &mut HopStats,
    ) {
        let tau = self.config.tau;
        step_segment(&mut state.segment, tau, &self.model);

        let u_ket: f64 = rng.random();
        let u_bra: f64 = rng.random();
        if !self.model.has_coupling() {
            return;
        }
        for (side, u) in [(Side::Ket, u_ket), (Side::Bra, u_bra)] {
            let proposal = propose_hop(
                &state.segment,
                side,
                tau,
                &self.model,
                self.scheme.jump_rule,
            )
            .expect("coupling checked above");
            stats.tests += 1;
            if proposal.is_frustrated() {
                stats.frustrated += 1;
            } else if proposal.rate_x > 0.0 && effective_weight(&proposal, &self.scheme) == 0.0 {
                stats.filtered += 1;
            }

            let prob = hop_probability(&proposal, &self.scheme);
            let accepted = u < prob;
            state.amplitude *= weight_factor(&proposal, &self.scheme, accepted);
            if accepted {
                let residual = proposal.energy_residual.expect("accepted implies shift");
                stats.accepted += 1;
                stats.max_accepted_residual = stats.max_accepted_residual.max(residual.abs());
                if let Variant::EnergyConserving { c_energy } = self.scheme.variant {
                    if residual.abs() > c_energy {
                        stats.window_violations += 1;
                    }
                }
                state.hop_log.push(HopEvent {
                    step: step_index,
                    side,
                    target: proposal.target(),
                    energy_residual: residual,
                });
                proposal.apply(&mut state.segment, &self.model);
                break;
            }
        }
    }

    /// Runs `n_steps` steps, calling `record` at step 0 and every
    /// `record_stride` steps. Stops early on a non-finite weight.
    fn propagate<R, F>(
        &self,
        state: &mut TrajectoryState,
        rng: &mut R,
        stats: &mut HopStats,
        mut record: F,
    ) -> StepOutcome
    where
        R: Rng + ?Sized,
        F: FnMut(usize, &TrajectoryState),
    {
        let stride = self.config.record_stride;
        record(0, state);
        for step in 1..=self.n_steps {
            self.step(state, step, rng, stats);
            if step % stride == 0 {
                record(step, state);
            }
            if !state.amplitude.is_finite() {
                return StepOutcome { non_finite: true };
            }
        }
        StepOutcome { non_finite: false }
    }

    /// Initial bath point and the sub-trajectory start list of `traj_index`.
    pub fn initial_conditions(&self, traj_index: u64) -> (PhasePoint, Vec<(u8, SurfacePair, f64)>) {
        let seed = self.config.seed;
        let mut bath_rng = stream(seed, traj_index, Purpose::Bath);
        let point = sample_wigner(self.model.bath(), self.model.params().beta, &mut bath_rng);
        let starts = if self.config.enumerate_pairs {
            SurfacePair::ALL
                .iter()
                .enumerate()
                .map(|(k, &p)| (k as u8, p, self.model.initial_pair_weight(&point.positions, p)))
                .collect()
        } else {
            let mut pick = stream(seed, traj_index, Purpose::PairChoice);
            let k = pick.random_range(0..4usize);
            let p = SurfacePair::ALL[k];
            vec![(
                k as u8,
                p,
                4.0 * self.model.initial_pair_weight(&point.positions, p),
            )]
        };
        (point, starts)
    }

    fn run_sub(
        &self,
        traj_index: u64,
        slot: u8,
        point: &PhasePoint,
        pair: SurfacePair,
        initial_factor: f64,
        keep_points: bool,
        stats: &mut HopStats,
    ) -> SubTrajectory {
        let mut rng = stream(self.config.seed, traj_index, Purpose::Hops(slot));
        let mut state = TrajectoryState::new(SegmentState::new(&self.model, point.clone(), pair));
        let n_records = self.n_steps / self.config.record_stride + 1;
        let mut samples = Vec::with_capacity(n_records);
        let omega = self.model.omega();
        let cap = self.config.weight_cap;
        let mut flags = TrajectoryFlags::default();
        let outcome = self.propagate(&mut state, &mut rng, stats, |step, st| {
            let weight = st.weight();
            if weight.norm() > cap {
                flags.over_cap = true;
            }
            samples.push(Sample {
                step,
                pair: st.pair(),
                weight,
                sigma_z: sigma_z_element(omega, st.segment.gamma(), st.pair()),
                point: keep_points.then(|| st.segment.point().clone()),
            });
        });
        if outcome.non_finite {
            flags.non_finite = true;
            while samples.len() < n_records {
                let step = samples.len() * self.config.record_stride;
                samples.push(Sample {
                    step,
                    pair: state.pair(),
                    weight: Complex64::new(f64::NAN, f64::NAN),
                    sigma_z: f64::NAN,
                    point: None,
                });
            }
        }
        SubTrajectory {
            initial_pair: pair,
            initial_factor,
            samples,
            hop_log: state.hop_log,
            flags,
        }
    }

    /// Runs trajectory `traj_index` with full phase-point history. Fully
    /// determined by `(seed, traj_index)`.
    pub fn run_trajectory(&self, traj_index: u64) -> TrajectoryRecord {
        self.run_trajectory_inner(traj_index, true)
    }

    fn run_trajectory_inner(&self, traj_index: u64, keep_points: bool) -> TrajectoryRecord {
        let (point, starts) = self.initial_conditions(traj_index);
        let mut stats = HopStats::default();
        let subs = starts
            .into_iter()
            .map(|(slot, pair, f)| {
                self.run_sub(traj_index, slot, &point, pair, f, keep_points, &mut stats)
            })
            .collect();
        TrajectoryRecord {
            traj_index,
            initial_point: point,
            subs,
            stats,
        }
    }

    /// Propagates a single sub-trajectory from a fixed start, returning the
    /// final complex estimate `weight * sigma_z^{pair}(R)`. Used to sample
    /// the same quantity that the branch enumeration computes exactly.
    pub fn sample_from<R: Rng + ?Sized>(
        &self,
        point: &PhasePoint,
        pair: SurfacePair,
        rng: &mut R,
        stats: &mut HopStats,
    ) -> Complex64 {
        let mut state = TrajectoryState::new(SegmentState::new(&self.model, point.clone(), pair));
        for step in 1..=self.n_steps {
            self.step(&mut state, step, rng, stats);
        }
        state.weight() * sigma_z_element(self.model.omega(), state.segment.gamma(), state.pair())
    }

    /// Runs all `n_traj` trajectories in parallel and reduces them.
    pub fn run_ensemble(&self, keep_hop_logs: bool) -> EnsembleResult {
        let n_traj = self.config.n_traj;
        let n_records = self.n_steps / self.config.record_stride + 1;
        let n_blocks = n_traj.div_ceil(BLOCK);
        let truncate = self.config.truncate;

        let blocks: Vec<BlockResult> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut out = BlockResult::new(n_records);
                let lo = b * BLOCK;
                let hi = (lo + BLOCK).min(n_traj);
                for i in lo..hi {
                    let rec = self.run_trajectory_inner(i as u64, false);
                    out.absorb(&rec, truncate, keep_hop_logs);
                }
                out
            })
            .collect();

        let mut total = BlockResult::new(n_records);
        for b in &blocks {
            total.merge(b);
        }
        EnsembleResult {
            series: total.acc.series(&self.record_times()),
            max_weight: total.max_weight,
            stats: total.stats,
            n_traj,
            n_used: total.n_used,
            n_non_finite: total.n_non_finite,
            n_over_cap: total.n_over_cap,
            hop_logs: keep_hop_logs.then_some(total.hop_logs),
        }
    }
}

struct BlockResult {
    acc: Accumulator,
    max_weight: Vec<f64>,
    stats: HopStats,
    n_used: usize,
    n_non_finite: usize,
    n_over_cap: usize,
    hop_logs: Vec<(u64, SurfacePair, Vec<HopEvent>)>,
}

impl BlockResult {
    fn new(n_records: usize) -> Self {
        Self {
            acc: Accumulator::new(n_records),
            max_weight: vec![0.0; n_records],
            stats: HopStats::default(),
            n_used: 0,
            n_non_finite: 0,
            n_over_cap: 0,
            hop_logs: Vec::new(),
        }
    }

    fn absorb(&mut self, rec: &TrajectoryRecord, truncate: bool, keep_logs: bool) {
        self.stats.merge(&rec.stats);
        let flags = rec.flags();
        if flags.non_finite {
            self.n_non_finite += 1;
        }
        if flags.over_cap {
            self.n_over_cap += 1;
        }
        if keep_logs {
            for s in &rec.subs {
                self.hop_logs
                    .push((rec.traj_index, s.initial_pair, s.hop_log.clone()));
            }
        }
        if flags.non_finite || (truncate && flags.over_cap) {
            return;
        }
        self.n_used += 1;
        self.acc.push_trajectory(rec);
        for s in &rec.subs {
            for (m, sample) in self.max_weight.iter_mut().zip(&s.samples) {
                *m = m.max(sample.weight.norm());
            }
        }
    }

    fn merge(&mut self, other: &BlockResult) {
        self.acc.merge(&other.acc);
        for (a, b) in self.max_weight.iter_mut().zip(&other.max_weight) {
            *a = a.max(*b);
        }
        self.stats.merge(&other.stats);
        self.n_used += other.n_used;
        self.n_non_finite += other.n_non_finite;
        self.n_over_cap += other.n_over_cap;
        self.hop_logs.extend(other.hop_logs.iter().cloned());
    }
}
