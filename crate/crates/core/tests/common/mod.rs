//! Helpers shared by the integration test targets.

#![allow(dead_code)]

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sstp::adiabatic::SpinBoson;
use sstp::bath::{discretize_bath, sample_wigner, ModelParams};
use sstp::{Surface, SurfacePair};

pub fn model(omega: f64, xi: f64, beta: f64, n: usize) -> SpinBoson {
    let p = ModelParams::new(omega, xi, beta).unwrap();
    SpinBoson::new(p, discretize_bath(&p, n, 1.0, 3.0).unwrap())
}

pub fn fig2_model() -> SpinBoson {
    model(0.4, 0.09, 12.5, 200)
}

pub fn fig1_model() -> SpinBoson {
    model(1.0 / 3.0, 0.007, 0.3, 200)
}

/// Eigenvalues (ascending) and eigenvectors (as columns, same order) of the
/// 2x2 subsystem Hamiltonian `V_b - Omega sigma_x - gamma sigma_z`, from a
/// general symmetric eigensolver.
pub fn numeric_eigen(model: &SpinBoson, r: &[f64]) -> ([f64; 2], [Vector2<f64>; 2]) {
    let vb = model.bath_potential(r);
    let g = model.gamma(r);
    let om = model.omega();
    let energies = SymmetricEigen::new(Matrix2::new(vb - g, -om, -om, vb + g)).eigenvalues;
    // Eigenvectors do not depend on V_b; dropping it keeps them accurate to
    // roundoff relative to the gap rather than to V_b.
    let eig = SymmetricEigen::new(Matrix2::new(-g, -om, -om, g));
    let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
    let (elo, ehi) = (energies[0].min(energies[1]), energies[0].max(energies[1]));
    (
        [elo, ehi],
        [eig.eigenvectors.column(lo).into_owned(), eig.eigenvectors.column(hi).into_owned()],
    )
}

fn aligned(v: Vector2<f64>, reference: &Vector2<f64>) -> Vector2<f64> {
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v
    }
}

fn rel_err(approx: &[f64], exact: &[f64]) -> f64 {
    let num: f64 = approx.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = exact.iter().map(|b| b * b).sum::<f64>().sqrt();
    num / den
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DerivativeReport {
    pub configurations: usize,
    pub max_force_rel: f64,
    pub max_mean_force_rel: f64,
    pub max_coupling_rel: f64,
}

/// Compares the closed-form forces, mean-surface forces and coupling vector
/// against central finite differences of a numerically diagonalized
/// Hamiltonian at `n_configs` random configurations of each model.
pub fn derivative_check(models: &[SpinBoson], n_configs: usize, seed: u64) -> DerivativeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = DerivativeReport::default();
    let h = 1e-4;
    for model in models {
        for _ in 0..n_configs {
            let mut point = sample_wigner(model.bath(), model.params().beta, &mut rng);
            // Stretch the draw so that gamma ranges from ~0 to several Omega.
            let scale: f64 = rng.random_range(0.05..4.0);
            point.positions.iter_mut().for_each(|x| *x *= scale);
            let r = &point.positions;
            let data = model.adiabatic_at(r);
            let (_, v0) = numeric_eigen(model, r);

            let n = r.len();
            let mut fd_force = [vec![0.0; n], vec![0.0; n]];
            let mut fd_coupling = vec![0.0; n];
            let mut shifted = r.clone();
            for j in 0..n {
                shifted[j] = r[j] + h;
                let (ep, vp) = numeric_eigen(model, &shifted);
                shifted[j] = r[j] - h;
                let (em, vm) = numeric_eigen(model, &shifted);
                shifted[j] = r[j];
                for s in 0..2 {
                    fd_force[s][j] = -(ep[s] - em[s]) / (2.0 * h);
                }
                let dv2 = (aligned(vp[1], &v0[1]) - aligned(vm[1], &v0[1])) / (2.0 * h);
                // d_12 = <1| d/dR |2>, in the gauge fixed by the analytic states.
                let sign1 = if v0[0].dot(&analytic_vec(model, r, Surface::Lower)) < 0.0 { -1.0 } else { 1.0 };
                let sign2 = if v0[1].dot(&analytic_vec(model, r, Surface::Upper)) < 0.0 { -1.0 } else { 1.0 };
                fd_coupling[j] = sign1 * sign2 * v0[0].dot(&dv2);
            }
            rep.max_force_rel = rep
                .max_force_rel
                .max(rel_err(&fd_force[0], &data.force_low))
                .max(rel_err(&fd_force[1], &data.force_high));
            rep.max_coupling_rel = rep.max_coupling_rel.max(rel_err(&fd_coupling, &data.coupling));

            for pair in SurfacePair::ALL {
                let mut fd = vec![0.0; n];
                for j in 0..n {
                    shifted[j] = r[j] + h;
                    let ep = model.mean_energy(pair, &shifted);
                    shifted[j] = r[j] - h;
                    let em = model.mean_energy(pair, &shifted);
                    shifted[j] = r[j];
                    fd[j] = -(ep - em) / (2.0 * h);
                }
                let analytic: Vec<f64> = data
                    .force(pair.ket)
                    .iter()
                    .zip(data.force(pair.bra))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                rep.max_mean_force_rel = rep.max_mean_force_rel.max(rel_err(&fd, &analytic));
            }
            rep.configurations += 1;
        }
    }
    rep
}

fn analytic_vec(model: &SpinBoson, r: &[f64], s: Surface) -> Vector2<f64> {
    let u = model.mixing(model.gamma(r)).eigenvectors();
    let k = (s.index() - 1) as usize;
    Vector2::new(u[0][k], u[1][k])
}
