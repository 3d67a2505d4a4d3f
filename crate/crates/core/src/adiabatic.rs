//! Closed-form adiabatic quantities of the two-level subsystem.
//!
//! At fixed bath configuration `R` the subsystem Hamiltonian is
//!
//! ```text
//! h(R) = V_b(R) - Omega sigma_x - gamma(R) sigma_z,
//! V_b(R) = sum_j w_j^2 R_j^2 / 2,   gamma(R) = sum_j c_j R_j.
//! ```
//!
//! Writing `G = sqrt(Omega^2 + gamma^2)` and `theta = atan2(Omega, gamma)`
//! (so `theta` lies in `(0, pi)` for `Omega > 0`), the adiabatic states in
//! the `(up, down)` basis are
//!
//! ```text
//! |1;R> = ( cos(theta/2),  sin(theta/2) ),   E_1 = V_b - G
//! |2;R> = ( sin(theta/2), -cos(theta/2) ),   E_2 = V_b + G
//! ```
//!
//! The first component of `|1;R>` is strictly positive. With this gauge the
//! coupling vector is `d_12 = <1|d/dR|2> = -c Omega / (2 G^2)`.

use serde::{Deserialize, Serialize};

use crate::bath::{BathSpec, ModelParams, HBAR};

/// Adiabatic surface index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Surface {
    Lower,
    Upper,
}

impl Surface {
    /// 1 for the lower surface, 2 for the upper one.
    pub fn index(self) -> u8 {
        match self {
            Surface::Lower => 1,
            Surface::Upper => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Surface::Lower),
            2 => Some(Surface::Upper),
            _ => None,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Surface::Lower => Surface::Upper,
            Surface::Upper => Surface::Lower,
        }
    }

    /// `E_alpha = V_b - sign * G`.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Surface::Lower => 1.0,
            Surface::Upper => -1.0,
        }
    }

    fn slot(self) -> usize {
        self.index() as usize - 1
    }
}

/// Ordered pair `(ket, bra)` labelling the matrix element `A_{ket,bra}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfacePair {
    pub ket: Surface,
    pub bra: Surface,
}

impl SurfacePair {
    pub const ALL: [SurfacePair; 4] = [
        SurfacePair::new(Surface::Lower, Surface::Lower),
        SurfacePair::new(Surface::Lower, Surface::Upper),
        SurfacePair::new(Surface::Upper, Surface::Lower),
        SurfacePair::new(Surface::Upper, Surface::Upper),
    ];

    pub const fn new(ket: Surface, bra: Surface) -> Self {
        Self { ket, bra }
    }

    pub fn is_diagonal(self) -> bool {
        self.ket == self.bra
    }

    pub fn swapped(self) -> Self {
        Self::new(self.bra, self.ket)
    }

    /// Position of this pair in [`SurfacePair::ALL`].
    pub fn slot(self) -> usize {
        2 * self.ket.slot() + self.bra.slot()
    }

    /// `(sign_ket + sign_bra) / 2`: the mean surface is `V_b - mean_sign * G`.
    pub(crate) fn mean_sign(self) -> f64 {
        0.5 * (self.ket.sign() + self.bra.sign())
    }
}

impl std::fmt::Display for SurfacePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.ket.index(), self.bra.index())
    }
}

/// Adiabatic energies, forces and nonadiabatic coupling at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticData {
    pub e_low: f64,
    pub e_high: f64,
    pub force_low: Vec<f64>,
    pub force_high: Vec<f64>,
    /// `d_12(R)`; `d_21 = -d_12`.
    pub coupling: Vec<f64>,
    /// `G = sqrt(Omega^2 + gamma^2)`.
    pub gap_half: f64,
    pub gamma: f64,
}

impl AdiabaticData {
    pub fn energy(&self, s: Surface) -> f64 {
        match s {
            Surface::Lower => self.e_low,
            Surface::Upper => self.e_high,
        }
    }

    pub fn force(&self, s: Surface) -> &[f64] {
        match s {
            Surface::Lower => &self.force_low,
            Surface::Upper => &self.force_high,
        }
    }
}

/// Mixing angle of the adiabatic basis, stored as half-angle cosine and sine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mixing {
    pub cos_half: f64,
    pub sin_half: f64,
}

impl Mixing {
    pub fn new(omega: f64, gamma: f64) -> Self {
        let half = 0.5 * omega.atan2(gamma);
        Self {
            cos_half: half.cos(),
            sin_half: half.sin(),
        }
    }

    /// `<s;R|up>`, real in this gauge.
    pub fn overlap_up(self, s: Surface) -> f64 {
        match s {
            Surface::Lower => self.cos_half,
            Surface::Upper => self.sin_half,
        }
    }

    /// Adiabatic states as columns in the `(up, down)` basis.
    pub fn eigenvectors(self) -> [[f64; 2]; 2] {
        let (c, s) = (self.cos_half, self.sin_half);
        [[c, s], [s, -c]]
    }
}

/// Spin-boson model bound to one bath discretization.
///
/// Holds the few bath-derived constants the hot loop needs; everything else
/// is computed on demand from `R`.
#[derive(Debug, Clone)]
pub struct SpinBoson {
    params: ModelParams,
    bath: BathSpec,
    coupling_norm: f64,
    coupling_dir: Vec<f64>,
    omega_sq: Vec<f64>,
}

impl SpinBoson {
    pub fn new(params: ModelParams, bath: BathSpec) -> Self {
        let coupling_norm = bath.couplings().iter().map(|c| c * c).sum::<f64>().sqrt();
        let coupling_dir = if coupling_norm > 0.0 {
            bath.couplings().iter().map(|c| c / coupling_norm).collect()
        } else {
            vec![0.0; bath.n_modes()]
        };
        let omega_sq = bath.frequencies().iter().map(|w| w * w).collect();
        Self {
            params,
            bath,
            coupling_norm,
            coupling_dir,
            omega_sq,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn bath(&self) -> &BathSpec {
        &self.bath
    }

    pub fn omega(&self) -> f64 {
        self.params.omega_tunnel
    }

    pub fn n_modes(&self) -> usize {
        self.bath.n_modes()
    }

    /// `|c|`. Zero exactly when the subsystem is uncoupled.
    pub fn coupling_norm(&self) -> f64 {
        self.coupling_norm
    }

    pub fn has_coupling(&self) -> bool {
        self.coupling_norm > 0.0
    }

    /// Unit vector along `d_12`'s line (`c / |c|`); zero if uncoupled.
    pub fn coupling_direction(&self) -> &[f64] {
        &self.coupling_dir
    }

    pub(crate) fn omega_sq(&self) -> &[f64] {
        &self.omega_sq
    }

    /// `gamma(R) = sum_j c_j R_j`.
    pub fn gamma(&self, r: &[f64]) -> f64 {
        dot(self.bath.couplings(), r)
    }

    /// `V_b(R) = sum_j w_j^2 R_j^2 / 2`.
    pub fn bath_potential(&self, r: &[f64]) -> f64 {
        0.5 * self
            .omega_sq
            .iter()
            .zip(r)
            .map(|(w2, x)| w2 * x * x)
            .sum::<f64>()
    }

    pub fn gap_half(&self, gamma: f64) -> f64 {
        self.params.omega_tunnel.hypot(gamma)
    }

    pub fn mixing(&self, gamma: f64) -> Mixing {
        Mixing::new(self.params.omega_tunnel, gamma)
    }

    pub fn energy(&self, s: Surface, r: &[f64]) -> f64 {
        self.bath_potential(r) - s.sign() * self.gap_half(self.gamma(r))
    }

    /// `(E_ket + E_bra) / 2`.
    pub fn mean_energy(&self, pair: SurfacePair, r: &[f64]) -> f64 {
        self.bath_potential(r) - pair.mean_sign() * self.gap_half(self.gamma(r))
    }

    /// Scalar `k(gamma)` with `d_12 = k c`, i.e. `-Omega / (2 G^2)`.
    pub fn coupling_scale(&self, gamma: f64) -> f64 {
        let g = self.gap_half(gamma);
        -self.params.omega_tunnel / (2.0 * g * g)
    }

    /// Full adiabatic data at `R`.
    pub fn adiabatic_at(&self, r: &[f64]) -> AdiabaticData {
        let gamma = self.gamma(r);
        let g = self.gap_half(gamma);
        let vb = self.bath_potential(r);
        let c = self.bath.couplings();
        let shift = gamma / g;
        let force_low = self
            .omega_sq
            .iter()
            .zip(r)
            .zip(c)
            .map(|((w2, x), cj)| -w2 * x + cj * shift)
            .collect();
        let force_high = self
            .omega_sq
            .iter()
            .zip(r)
            .zip(c)
            .map(|((w2, x), cj)| -w2 * x - cj * shift)
            .collect();
        let k = self.coupling_scale(gamma);
        AdiabaticData {
            e_low: vb - g,
            e_high: vb + g,
            force_low,
            force_high,
            coupling: c.iter().map(|cj| k * cj).collect(),
            gap_half: g,
            gamma,
        }
    }

    /// `<a;R| sigma_z |b;R>` as a row-major 2x2 matrix indexed by surface slot.
    pub fn sigma_z_adiabatic(&self, r: &[f64]) -> [[f64; 2]; 2] {
        sigma_z_matrix(self.params.omega_tunnel, self.gamma(r))
    }

    /// `<bra;R|up><up|ket;R>`, the adiabatic matrix elements of the initial
    /// subsystem density `|up><up|`.
    pub fn initial_pair_weight(&self, r: &[f64], pair: SurfacePair) -> f64 {
        initial_weight(self.mixing(self.gamma(r)), pair)
    }
}

/// `sigma_z` in the adiabatic basis at given `gamma`.
pub fn sigma_z_matrix(omega: f64, gamma: f64) -> [[f64; 2]; 2] {
    let g = omega.hypot(gamma);
    let diag = gamma / g;
    let off = omega / g;
    [[diag, off], [off, -diag]]
}

/// Element `sigma_z^{ket,bra}` at given `gamma`.
pub fn sigma_z_element(omega: f64, gamma: f64, pair: SurfacePair) -> f64 {
    sigma_z_matrix(omega, gamma)[pair.ket.slot()][pair.bra.slot()]
}

pub(crate) fn initial_weight(mixing: Mixing, pair: SurfacePair) -> f64 {
    mixing.overlap_up(pair.bra) * mixing.overlap_up(pair.ket)
}

/// `omega_{ket,bra} = (E_ket - E_bra) / hbar`.
pub fn adiabatic_frequency(data: &AdiabaticData, pair: SurfacePair) -> f64 {
    (data.energy(pair.ket) - data.energy(pair.bra)) / HBAR
}

/// Same as [`adiabatic_frequency`] from `G` alone.
pub(crate) fn frequency_from_gap(gap_half: f64, pair: SurfacePair) -> f64 {
    -(pair.ket.sign() - pair.bra.sign()) * gap_half / HBAR
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::discretize_bath;

    fn model(xi: f64, n: usize) -> SpinBoson {
        let p = ModelParams::new(0.4, xi, 12.5).unwrap();
        let bath = discretize_bath(&p, n, 1.0, 3.0).unwrap();
        SpinBoson::new(p, bath)
    }

    /// Configuration with `gamma(R) = target` along the coupling direction.
    fn r_with_gamma(m: &SpinBoson, target: f64) -> Vec<f64> {
        m.coupling_direction()
            .iter()
            .map(|u| u * target / m.coupling_norm())
            .collect()
    }

    #[test]
    fn energies_at_zero_gamma() {
        let m = model(0.09, 4);
        let r = vec![0.0; 4];
        let d = m.adiabatic_at(&r);
        assert_eq!(d.e_low, -0.4);
        assert_eq!(d.e_high, 0.4);

        let mut r = r_with_gamma(&m, 0.0);
        r[0] = 0.3;
        r[1] = -0.3 * m.bath().couplings()[0] / m.bath().couplings()[1];
        let d = m.adiabatic_at(&r);
        let vb = m.bath_potential(&r);
        assert!(d.gamma.abs() < 1e-15);
        assert!((d.e_low - (vb - 0.4)).abs() < 1e-14);
        assert!((d.e_high - (vb + 0.4)).abs() < 1e-14);
    }

    #[test]
    fn uncoupled_bath_has_no_coupling() {
        let m = model(0.0, 5);
        let r = vec![0.1, -0.2, 0.3, 0.4, -0.5];
        let d = m.adiabatic_at(&r);
        assert!(d.coupling.iter().all(|&x| x == 0.0));
        for (j, w) in m.bath().frequencies().iter().enumerate() {
            assert_eq!(d.force_low[j], -w * w * r[j]);
            assert_eq!(d.force_high[j], -w * w * r[j]);
        }
        assert!(!m.has_coupling());
    }

    #[test]
    fn frequency_examples() {
        let m = model(0.09, 3);
        let d = m.adiabatic_at(&[0.0; 3]);
        let p12 = SurfacePair::new(Surface::Lower, Surface::Upper);
        assert_eq!(adiabatic_frequency(&d, p12), -0.8);
        assert_eq!(adiabatic_frequency(&d, p12.swapped()), 0.8);
        for p in SurfacePair::ALL.iter().filter(|p| p.is_diagonal()) {
            assert_eq!(adiabatic_frequency(&d, *p), 0.0);
        }
        // Omega = 0.4, gamma = 0.3 -> 2 sqrt(0.25) = 1.
        let r = r_with_gamma(&m, 0.3);
        let d = m.adiabatic_at(&r);
        let w = adiabatic_frequency(&d, p12.swapped());
        assert!((w - 1.0).abs() < 1e-12);
        assert!((frequency_from_gap(d.gap_half, p12.swapped()) - w).abs() < 1e-12);
    }

    #[test]
    fn force_sum_cancels_gap_terms() {
        let m = model(0.09, 6);
        let r = [0.3, -0.1, 0.7, 0.2, -0.4, 0.05];
        let d = m.adiabatic_at(&r);
        for j in 0..6 {
            let w2 = m.bath().frequencies()[j].powi(2);
            assert!((d.force_low[j] + d.force_high[j] + 2.0 * w2 * r[j]).abs() < 1e-14);
        }
        assert!(d.e_high - d.e_low >= 0.8);
    }

    #[test]
    fn sigma_z_limits() {
        let m = model(0.09, 2);
        let s = m.sigma_z_adiabatic(&r_with_gamma(&m, 0.0));
        assert!(s[0][0].abs() < 1e-15 && s[1][1].abs() < 1e-15);
        assert!((s[0][1].abs() - 1.0).abs() < 1e-15);

        let s = sigma_z_matrix(0.4, 1e9);
        assert!((s[0][0] - 1.0).abs() < 1e-12);
        assert!((s[1][1] + 1.0).abs() < 1e-12);
        assert!(s[0][1].abs() < 1e-9);
        assert!(s[0][1] == s[1][0]);
    }

    #[test]
    fn initial_weights_at_zero_gamma() {
        let m = model(0.09, 2);
        let r = r_with_gamma(&m, 0.0);
        for p in SurfacePair::ALL {
            assert!((m.initial_pair_weight(&r, p).abs() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn eigenvector_gauge_has_positive_lower_first_component() {
        for gamma in [-1e6, -3.0, -0.01, 0.0, 0.01, 3.0, 1e6] {
            let mix = Mixing::new(0.4, gamma);
            assert!(mix.eigenvectors()[0][0] > 0.0, "gamma = {gamma}");
        }
    }
}
