//! Preconditioned conjugate gradients for the Neumann Laplacian on a
//! [`JunctionMesh`].
//!
//! The preconditioner adds a Jacobi sweep to an exact solve on aggregates
//! (the node and every outlet layer). Layer aggregates capture the slow
//! axial modes of the long outlets, which plain Jacobi resolves only after
//! `O(layers²)` iterations.

use super::mesh::JunctionMesh;
use crate::{Error, Result};

pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Preconditioner<'a> {
    mesh: &'a JunctionMesh,
    inv_degree: Vec<f64>,
    /// Thomas factors per outlet chain: modified diagonal and multipliers.
    chains: Vec<(Vec<f64>, Vec<f64>)>,
}

impl<'a> Preconditioner<'a> {
    fn new(mesh: &'a JunctionMesh) -> Self {
        let inv_degree = mesh.degree().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 0.0 }).collect();
        let chains = (0..3)
            .map(|i| {
                let n = mesh.outlet_layers[i];
                let w = (mesh.outlet_side[i] * mesh.outlet_side[i]) as f64;
                // Node aggregate pinned to zero; cap end is Neumann.
                let diag: Vec<f64> = (0..n).map(|t| if t + 1 < n { 2.0 * w } else { w }).collect();
                let mut d = vec![0.0; n];
                let mut l = vec![0.0; n];
                d[0] = diag[0];
                for t in 1..n {
                    l[t] = -w / d[t - 1];
                    d[t] = diag[t] - l[t] * (-w);
                }
                (d, l)
            })
            .collect();
        Preconditioner { mesh, inv_degree, chains }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zc, rc), id) in z.iter_mut().zip(r).zip(&self.inv_degree) {
            *zc = rc * id;
        }
        for i in 0..3 {
            let n = self.mesh.outlet_layers[i];
            let w = (self.mesh.outlet_side[i] * self.mesh.outlet_side[i]) as f64;
            let (d, l) = &self.chains[i];
            let mut y: Vec<f64> = (0..n).map(|t| self.mesh.layer_range(i, t).map(|c| r[c]).sum()).collect();
            for t in 1..n {
                y[t] -= l[t] * y[t - 1];
            }
            y[n - 1] /= d[n - 1];
            for t in (0..n - 1).rev() {
                y[t] = (y[t] + w * y[t + 1]) / d[t];
            }
            for (t, yt) in y.iter().enumerate() {
                for c in self.mesh.layer_range(i, t) {
                    z[c] += yt;
                }
            }
        }
    }
}

/// Solves `A x = b` for a compatible right-hand side (`Σ b = 0` up to
/// rounding; the mean is projected out). The returned solution has zero mean.
pub fn solve(mesh: &JunctionMesh, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    let n = mesh.n_cells();
    let mean = b.iter().sum::<f64>() / n as f64;
    let b: Vec<f64> = b.iter().map(|v| v - mean).collect();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let pre = Preconditioner::new(mesh);
    let mut r = b;
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=MAX_ITERATIONS {
        mesh.apply(&p, &mut ap);
        let step = rz / dot(&p, &ap);
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += step * pi;
            *ri -= step * api;
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= TOLERANCE {
            let xm = x.iter().sum::<f64>() / n as f64;
            x.iter_mut().for_each(|v| *v -= xm);
            return Ok((x, SolveStats { iterations: it, relative_residual: rel }));
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::solver(format!(
        "junction conjugate gradients did not reach {TOLERANCE:e} in {MAX_ITERATIONS} iterations"
    )))
}
