//! Bath discretization against an extended-precision fixture, and the
//! closed-form adiabatic quantities against numerical diagonalization.

mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;

use sstp::adiabatic::sigma_z_matrix;
use sstp::bath::{discretize_bath, ModelParams};
use sstp::Surface;

const FIXTURE: &str = include_str!("fixtures/bath_n200_xi0.09.csv");

#[test]
fn bath_matches_extended_precision_table() {
    let p = ModelParams::new(0.4, 0.09, 12.5).unwrap();
    let bath = discretize_bath(&p, 200, 1.0, 3.0).unwrap();
    let rows: Vec<(usize, f64, f64)> = FIXTURE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('j'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 200);
    for (j, w, c) in rows {
        assert_relative_eq!(bath.frequencies()[j - 1], w, max_relative = 1e-13);
        assert_relative_eq!(bath.couplings()[j - 1], c, max_relative = 1e-13);
    }
    assert_eq!(bath.frequencies()[199], 3.0);
}

#[test]
fn derivatives_match_finite_differences() {
    let rep = common::derivative_check(&[common::fig2_model(), common::fig1_model()], 60, 11);
    assert!(rep.configurations >= 100);
    assert!(rep.max_force_rel < 1e-6, "{rep:?}");
    assert!(rep.max_mean_force_rel < 1e-6, "{rep:?}");
    assert!(rep.max_coupling_rel < 1e-6, "{rep:?}");
}

#[test]
fn sigma_z_limits() {
    let om = 0.4;
    let far = sigma_z_matrix(om, 1e9);
    assert_relative_eq!(far[0][0], 1.0, epsilon = 1e-12);
    assert_relative_eq!(far[1][1], -1.0, epsilon = 1e-12);
    let near = sigma_z_matrix(om, -1e9);
    assert_relative_eq!(near[0][0], -1.0, epsilon = 1e-12);
    let mid = sigma_z_matrix(om, 0.0);
    assert_eq!(mid, [[0.0, 1.0], [1.0, 0.0]]);
}

proptest! {
    #[test]
    fn closed_form_matches_eigensolver(scale in -3.0f64..3.0, seed in 0u64..1000) {
        let model = common::model(0.4, 0.09, 12.5, 16);
        let r: Vec<f64> = (0..16).map(|j| scale * (((j as u64 * 31 + seed) % 17) as f64 - 8.0) / 8.0).collect();
        let data = model.adiabatic_at(&r);
        let (e, v) = common::numeric_eigen(&model, &r);
        let tol = 1e-12 * (1.0 + e[1].abs());
        prop_assert!((data.energy(Surface::Lower) - e[0]).abs() < tol);
        prop_assert!((data.energy(Surface::Upper) - e[1]).abs() < tol);

        let u = model.mixing(data.gamma).eigenvectors();
        for k in 0..2 {
            let overlap = (u[0][k] * v[k][0] + u[1][k] * v[k][1]).abs();
            prop_assert!((overlap - 1.0).abs() < 1e-12);
        }
        // sigma_z rotated with the numerical eigenvectors, up to their signs.
        let sz = model.sigma_z_adiabatic(&r);
        for a in 0..2 {
            for b in 0..2 {
                let num = v[a][0] * v[b][0] - v[a][1] * v[b][1];
                prop_assert!((sz[a][b].abs() - num.abs()).abs() < 1e-12);
            }
        }
    }
}
