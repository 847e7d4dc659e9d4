//! Junction solves against the examples they are meant to reproduce.

use std::f64::consts::PI;

use thinstar::expansion::expand_alpha1;
use thinstar::junction::{
    solve_inner_inhomogeneous, CutoffProfile, Forcing, JunctionBasis, JunctionMesh, JunctionProvider, NodeDensity,
};
use thinstar::model::{ConstantsSource, JunctionParams, Rho0Expr, StarGraph};

const ELL0: f64 = 0.25;

fn radius() -> f64 {
    0.375 / PI.sqrt()
}

fn params(k: f64, r: f64) -> JunctionParams {
    JunctionParams { spacing: ELL0 / k, truncation: r }
}

#[test]
fn symmetric_forcing_gives_equal_jumps() {
    let b = JunctionBasis::build(ELL0, [radius(); 3], None, 0.1, params(8.0, 6.0)).unwrap();
    let d = b.delta(Forcing::Cutoff { slopes: [-2.0, 1.0, 1.0], profile: CutoffProfile::Quintic }).unwrap();
    assert!((d[0] - d[1]).abs() <= 0.01 * d[0].abs());
    assert_eq!(b.delta(Forcing::Zero).unwrap(), [0.0, 0.0]);
}

#[test]
fn jumps_are_linear_in_the_forcing() {
    let b = JunctionBasis::build(ELL0, [radius(); 3], None, 0.1, params(8.0, 6.0)).unwrap();
    let q = |s: [f64; 3]| b.delta(Forcing::Cutoff { slopes: s, profile: CutoffProfile::Quintic }).unwrap();
    let (x, y) = (q([-1.0, 1.0, 0.0]), q([-1.0, 0.0, 1.0]));
    let z = q([-2.5, 1.0, 1.5]);
    for j in 0..2 {
        assert!((z[j] - (x[j] + 1.5 * y[j])).abs() < 1e-10);
    }
}

#[test]
fn node_source_pairing_matches_the_direct_field() {
    let b = JunctionBasis::build(ELL0, [radius(); 3], None, 0.3, params(8.0, 6.0)).unwrap();
    let l = &b.fine;
    let green =
        thinstar::junction::delta_constant(&l.mesh, &l.n2, &l.n3, Forcing::NodeMass { coefficient: 1.0 }, &l.rho)
            .unwrap();
    assert!((green[0] - l.p.offsets[1]).abs() < 1e-6);
    assert!((green[1] - l.p.offsets[2]).abs() < 1e-6);
}

#[test]
fn zero_data_leaves_a_constant_and_the_mass_integral_scales() {
    let m = JunctionMesh::new(ELL0, [radius(); 3], ELL0 / 8.0, 6.0).unwrap();
    let rho = NodeDensity::sample(&m, None, 0.7).unwrap();
    let sol = solve_inner_inhomogeneous(&m, &rho, 0.0, [0.0; 3]).unwrap();
    assert_eq!(sol.node_integral, 0.0);
}

#[test]
fn unit_density_forces_the_node_volume_out_of_the_caps() {
    let m = JunctionMesh::new(ELL0, [radius(); 3], ELL0 / 8.0, 6.0).unwrap();
    let volume = (2.0 * ELL0).powi(3);
    let rho = NodeDensity::sample(&m, Some(&Rho0Expr::Constant(1.0)), volume).unwrap();
    assert!((rho.scale - 1.0).abs() < 1e-12);
    let s = -volume / (3.0 * m.areas[0]);
    let sol = solve_inner_inhomogeneous(&m, &rho, 1.0, [s; 3]).unwrap();
    assert!(sol.field.flux_residual < 1e-3);
    assert!(solve_inner_inhomogeneous(&m, &rho, 1.0, [0.5 * s; 3]).is_err());
}

fn regime_one_node_integral(k: f64) -> (f64, [f64; 2]) {
    let mut g = StarGraph::constant([1.0, 1.3, 1.6], [radius(); 3], ELL0, 0.4).unwrap();
    g.node.rho0 = Some(Rho0Expr::Gaussian { center: [0.0; 3], width: 0.15, amplitude: 1.0 });
    g.node.constants = ConstantsSource::Computed(params(k, 6.0));
    let s = expand_alpha1(&g, 1, 1).unwrap();
    s.require_complete().unwrap();
    (s.node_integrals[1].unwrap(), s.jumps[1])
}

#[test]
fn regime_one_node_integral_is_mesh_stable() {
    let (coarse, dc) = regime_one_node_integral(8.0);
    let (fine, df) = regime_one_node_integral(16.0);
    assert!((coarse - fine).abs() <= 0.01 * fine.abs(), "{coarse} vs {fine}");
    for j in 0..2 {
        assert!((dc[j] - df[j]).abs() <= 0.01 * df[j].abs().max(1e-3), "{dc:?} vs {df:?}");
    }
}

#[test]
fn oversized_outlets_are_rejected_up_front() {
    let g = StarGraph::constant([1.0; 3], [1.0; 3], ELL0, 0.4).unwrap();
    assert!(JunctionProvider::new(&g, params(8.0, 6.0)).is_err());
}
