//! Spin-boson model parameters, Ohmic bath discretization and thermal
//! Wigner sampling of the initial bath phase point.
//!
//! Scaled units throughout: bath mass `M = 1` and `hbar = 1`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bath mass in scaled units.
pub const MASS: f64 = 1.0;
/// Reduced Planck constant in scaled units.
pub const HBAR: f64 = 1.0;

/// Subsystem and thermal parameters of the spin-boson Hamiltonian
/// `-Omega sigma_x + sum_j (P_j^2/2 + w_j^2 R_j^2/2 - c_j R_j sigma_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tunnel splitting `Omega`. Must be strictly positive.
    pub omega_tunnel: f64,
    /// Kondo parameter `xi` of the Ohmic spectral density.
    pub kondo_xi: f64,
    /// Inverse temperature of the initial bath distribution.
    pub beta: f64,
}

impl ModelParams {
    pub fn new(omega_tunnel: f64, kondo_xi: f64, beta: f64) -> Result<Self> {
        let params = Self {
            omega_tunnel,
            kondo_xi,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        // Omega = 0 leaves the adiabatic basis undefined where gamma(R) = 0.
        if !(self.omega_tunnel > 0.0 && self.omega_tunnel.is_finite()) {
            return Err(Error::invalid("omega", "tunnel splitting must be > 0"));
        }
        if !(self.kondo_xi >= 0.0 && self.kondo_xi.is_finite()) {
            return Err(Error::invalid("xi", "Kondo parameter must be >= 0"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::invalid("beta", "inverse temperature must be > 0"));
        }
        Ok(())
    }
}

/// Discretized harmonic bath.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    omega_c: f64,
    omega_max: f64,
}

impl BathSpec {
    pub fn n_modes(&self) -> usize {
        self.frequencies.len()
    }

    /// Mode frequencies `w_j`, strictly increasing, last one equal to `omega_max`.
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Linear couplings `c_j` to `sigma_z`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Builds a bath from explicit frequencies and couplings.
    ///
    /// Used by tests that need hand-picked modes; [`discretize_bath`] is the
    /// production constructor.
    pub fn from_modes(frequencies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::invalid("n_modes", "need at least one mode"));
        }
        if frequencies.len() != couplings.len() {
            return Err(Error::invalid(
                "couplings",
                "one coupling per frequency required",
            ));
        }
        if frequencies.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("frequencies", "must be finite and >= 0"));
        }
        let omega_max = frequencies.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            frequencies,
            couplings,
            omega_c: f64::NAN,
            omega_max,
        })
    }
}

/// Logarithmic discretization of the Ohmic spectral density
/// `J(w) = (pi/2) xi w exp(-w/omega_c)` into `n_modes` oscillators:
///
/// ```text
/// w_0 = (omega_c / N) (1 - exp(-omega_max / omega_c))
/// w_j = -omega_c ln(1 - j w_0 / omega_c)
/// c_j = w_j sqrt(xi w_0)
/// ```
pub fn discretize_bath(
    params: &ModelParams,
    n_modes: usize,
    omega_c: f64,
    omega_max: f64,
) -> Result<BathSpec> {
    if n_modes == 0 {
        return Err(Error::invalid("n_modes", "must be >= 1"));
    }
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::invalid("omega_c", "cutoff frequency must be > 0"));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::invalid("omega_max", "truncation frequency must be > 0"));
    }
    if !(params.kondo_xi >= 0.0) {
        return Err(Error::invalid("xi", "Kondo parameter must be >= 0"));
    }

    let n = n_modes as f64;
    let omega_0 = (omega_c / n) * -(-omega_max / omega_c).exp_m1();
    let coupling_scale = (params.kondo_xi * omega_0).sqrt();

    let frequencies: Vec<f64> = (1..=n_modes)
        .map(|j| {
            if j == n_modes {
                // 1 - N w_0 / omega_c = exp(-omega_max / omega_c) exactly.
                omega_max
            } else {
                -omega_c * (-(j as f64) * omega_0 / omega_c).ln_1p()
            }
        })
        .collect();
    let couplings = frequencies.iter().map(|w| w * coupling_scale).collect();

    Ok(BathSpec {
        frequencies,
        couplings,
        omega_c,
        omega_max,
    })
}

/// Bath coordinates and momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
}

impl PhasePoint {
    pub fn new(positions: Vec<f64>, momenta: Vec<f64>) -> Self {
        assert_eq!(positions.len(), momenta.len());
        Self { positions, momenta }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.momenta.iter().map(|p| p * p).sum::<f64>() / (2.0 * MASS)
    }
}

/// Thermal Wigner widths `(Var R_j, Var P_j)` of an uncoupled oscillator.
pub fn wigner_variances(omega: f64, beta: f64) -> (f64, f64) {
    let t = (0.5 * beta * omega).tanh();
    (1.0 / (2.0 * omega * t), omega / (2.0 * t))
}

/// Draws a bath phase point from the product of thermal Wigner
/// distributions of the uncoupled modes.
pub fn sample_wigner<R: Rng + ?Sized>(bath: &BathSpec, beta: f64, rng: &mut R) -> PhasePoint {
    assert!(beta > 0.0, "beta must be positive");
    let n = bath.n_modes();
    let mut point = PhasePoint::zeros(n);
    for (j, &omega) in bath.frequencies.iter().enumerate() {
        let (var_r, var_p) = wigner_variances(omega, beta);
        let zr: f64 = rng.sample(StandardNormal);
        let zp: f64 = rng.sample(StandardNormal);
        point.positions[j] = var_r.sqrt() * zr;
        point.momenta[j] = var_p.sqrt() * zp;
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(xi: f64) -> ModelParams {
        ModelParams::new(0.4, xi, 12.5).unwrap()
    }

    #[test]
    fn single_mode_hits_omega_max() {
        let bath = discretize_bath(&params(0.3), 1, 1.0, 3.0).unwrap();
        assert_eq!(bath.frequencies(), &[3.0]);
    }

    #[test]
    fn zero_xi_gives_zero_couplings() {
        let bath = discretize_bath(&params(0.0), 50, 1.0, 3.0).unwrap();
        assert!(bath.couplings().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn frequencies_increase_and_end_at_omega_max() {
        for &(n, wc, wm) in &[(200, 1.0, 3.0), (7, 0.5, 10.0), (2, 2.0, 0.1)] {
            let bath = discretize_bath(&params(0.09), n, wc, wm).unwrap();
            let w = bath.frequencies();
            assert!(w.windows(2).all(|p| p[0] < p[1]));
            assert!(w[0] > 0.0);
            assert!(((w[n - 1] - wm) / wm).abs() < 1e-12);
            // Closed form at j = N agrees with the pinned endpoint where
            // 1 - N w_0 / omega_c does not cancel catastrophically.
            if wm / wc > 5.0 {
                continue;
            }
            let w0 = (wc / n as f64) * (1.0 - (-wm / wc).exp());
            let direct = -wc * (1.0 - n as f64 * w0 / wc).ln();
            assert!(((direct - wm) / wm).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_discretization_inputs() {
        let p = params(0.1);
        assert!(discretize_bath(&p, 0, 1.0, 3.0).is_err());
        assert!(discretize_bath(&p, 5, 0.0, 3.0).is_err());
        assert!(discretize_bath(&p, 5, 1.0, -1.0).is_err());
    }

    #[test]
    fn rejects_degenerate_model() {
        assert!(ModelParams::new(0.0, 0.1, 1.0).is_err());
        assert!(ModelParams::new(0.4, -0.1, 1.0).is_err());
        assert!(ModelParams::new(0.4, 0.1, 0.0).is_err());
    }

    #[test]
    fn wigner_variance_limits() {
        let (_, vp) = wigner_variances(1.7, 1e4);
        assert!((vp - 0.85).abs() < 1e-12);
        let (vr, vp) = wigner_variances(1e-4, 1e-3);
        assert!((vp - 1e3).abs() / 1e3 < 1e-6);
        assert!((vr - 1e3 / 1e-8).abs() / (1e3 / 1e-8) < 1e-6);
    }

    #[test]
    fn wigner_sample_second_moment() {
        // w = 1, beta = 12.5: Var R = 1 / (2 tanh 6.25).
        let bath = BathSpec::from_modes(vec![1.0], vec![0.0]).unwrap();
        let expected = 1.0 / (2.0 * 6.25f64.tanh());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let x = sample_wigner(&bath, 12.5, &mut rng).positions[0];
            acc += x * x;
        }
        let mean = acc / n as f64;
        assert!(((mean - expected) / expected).abs() < 0.01, "{mean} vs {expected}");
        assert!((expected - 0.500_003_726_667_06).abs() < 1e-12);
    }
}
