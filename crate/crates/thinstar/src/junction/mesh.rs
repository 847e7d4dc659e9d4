//! Cell-centred grid on the model junction: a cube node `[−ℓ₀, ℓ₀]³` with
//! three square outlets leaving through the faces `ξ_i = ℓ₀` along the
//! positive coordinate axes and truncated at `ξ_i = R`.

use crate::{Error, Result};

/// Allowed relative mismatch between a realized outlet area and `πh²`.
pub const AREA_TOL: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct JunctionMesh {
    pub spacing: f64,
    pub ell0: f64,
    /// Effective truncation `ℓ₀ + layers·Δ`.
    pub truncation: f64,
    /// Cells along each side of the node.
    pub node_cells: usize,
    /// Cells along each side of the outlet squares.
    pub outlet_side: [usize; 3],
    pub outlet_layers: [usize; 3],
    /// Realized cross-section areas.
    pub areas: [f64; 3],
    /// Target areas `πh_i²`.
    pub target_areas: [f64; 3],
    faces: Vec<(u32, u32)>,
    degree: Vec<f64>,
    outlet_base: [usize; 3],
    n_cells: usize,
}

/// The two cross-section axes of outlet `i`, in increasing order.
pub fn cross_axes(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl JunctionMesh {
    /// Builds the grid. `radii` are the vertex radii `h_i(0)`.
    pub fn new(ell0: f64, radii: [f64; 3], spacing: f64, truncation: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::config("junction spacing must be positive"));
        }
        let n0f = 2.0 * ell0 / spacing;
        let n0 = n0f.round() as usize;
        if (n0f - n0 as f64).abs() > 1e-9 * n0f || !n0.is_multiple_of(2) || n0 < 2 {
            return Err(Error::config(format!(
                "spacing {spacing} must divide the node side 2*ell0 = {} into an even number of cells",
                2.0 * ell0
            )));
        }
        if truncation < ell0 + 4.0 {
            return Err(Error::config(format!("truncation {truncation} must be at least ell0 + 4")));
        }
        let mut side = [0usize; 3];
        let mut areas = [0.0; 3];
        let mut target = [0.0; 3];
        for i in 0..3 {
            target[i] = std::f64::consts::PI * radii[i] * radii[i];
            let exact = target[i].sqrt() / spacing;
            let lo = 2 * ((exact / 2.0).floor() as usize).max(1);
            let n = [lo, lo + 2]
                .into_iter()
                .min_by(|a, b| {
                    let ea = ((*a as f64 * spacing).powi(2) - target[i]).abs();
                    let eb = ((*b as f64 * spacing).powi(2) - target[i]).abs();
                    ea.total_cmp(&eb)
                })
                .expect("two candidates");
            areas[i] = (n as f64 * spacing).powi(2);
            if (areas[i] - target[i]).abs() > AREA_TOL * target[i] {
                return Err(Error::config(format!(
                    "outlet {} area {:.4} misses pi*h^2 = {:.4} by more than 2% at spacing {spacing}",
                    i + 1,
                    areas[i],
                    target[i]
                )));
            }
            if n > n0 {
                return Err(Error::config(format!(
                    "outlet {} (side {:.4}) does not fit on the node face of side {:.4}",
                    i + 1,
                    n as f64 * spacing,
                    2.0 * ell0
                )));
            }
            side[i] = n;
        }
        let layers_f = (truncation - ell0) / spacing;
        let layers = layers_f.round() as usize;
        let outlet_layers = [layers; 3];
        let mut outlet_base = [0usize; 3];
        let mut acc = n0 * n0 * n0;
        for i in 0..3 {
            outlet_base[i] = acc;
            acc += outlet_layers[i] * side[i] * side[i];
        }
        let mut mesh = JunctionMesh {
            spacing,
            ell0,
            truncation: ell0 + layers as f64 * spacing,
            node_cells: n0,
            outlet_side: side,
            outlet_layers,
            areas,
            target_areas: target,
            faces: Vec::new(),
            degree: Vec::new(),
            outlet_base,
            n_cells: acc,
        };
        mesh.build_faces();
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn node_index(&self, c: [usize; 3]) -> usize {
        let n = self.node_cells;
        c[0] + n * (c[1] + n * c[2])
    }

    /// Cell `(t, u, v)` of outlet `i`: layer `t` from the node, `(u, v)`
    /// along [`cross_axes`].
    pub fn outlet_index(&self, i: usize, t: usize, u: usize, v: usize) -> usize {
        let s = self.outlet_side[i];
        self.outlet_base[i] + t * s * s + u * s + v
    }

    /// Node cell centre coordinate along any axis.
    pub fn node_center(&self, c: usize) -> f64 {
        -self.ell0 + (c as f64 + 0.5) * self.spacing
    }

    /// Axial coordinate `ξ_i` of layer `t`.
    pub fn layer_center(&self, t: usize) -> f64 {
        self.ell0 + (t as f64 + 0.5) * self.spacing
    }

    /// Node cell index range used by outlet `i`'s square on the node face.
    fn face_offset(&self, i: usize) -> usize {
        (self.node_cells - self.outlet_side[i]) / 2
    }

    fn build_faces(&mut self) {
        let n = self.node_cells;
        let mut faces: Vec<(u32, u32)> = Vec::new();
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let c = self.node_index([x, y, z]);
                    if x + 1 < n {
                        faces.push((c as u32, self.node_index([x + 1, y, z]) as u32));
                    }
                    if y + 1 < n {
                        faces.push((c as u32, self.node_index([x, y + 1, z]) as u32));
                    }
                    if z + 1 < n {
                        faces.push((c as u32, self.node_index([x, y, z + 1]) as u32));
                    }
                }
            }
        }
        for i in 0..3 {
            let s = self.outlet_side[i];
            let off = self.face_offset(i);
            let (ja, jb) = cross_axes(i);
            for t in 0..self.outlet_layers[i] {
                for u in 0..s {
                    for v in 0..s {
                        let c = self.outlet_index(i, t, u, v) as u32;
                        if t == 0 {
                            let mut nc = [0usize; 3];
                            nc[i] = n - 1;
                            nc[ja] = off + u;
                            nc[jb] = off + v;
                            faces.push((self.node_index(nc) as u32, c));
                        } else {
                            faces.push((self.outlet_index(i, t - 1, u, v) as u32, c));
                        }
                        if u + 1 < s {
                            faces.push((c, self.outlet_index(i, t, u + 1, v) as u32));
                        }
                        if v + 1 < s {
                            faces.push((c, self.outlet_index(i, t, u, v + 1) as u32));
                        }
                    }
                }
            }
        }
        let mut degree = vec![0.0; self.n_cells];
        for &(a, b) in &faces {
            degree[a as usize] += 1.0;
            degree[b as usize] += 1.0;
        }
        self.faces = faces;
        self.degree = degree;
    }

    /// `y = A x` with `(A x)_c = Σ_{faces} (x_c − x_n)`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yc, d), xc) in y.iter_mut().zip(&self.degree).zip(x) {
            *yc = d * xc;
        }
        for &(a, b) in &self.faces {
            let (a, b) = (a as usize, b as usize);
            y[a] -= x[b];
            y[b] -= x[a];
        }
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// Cells of layer `t` of outlet `i`.
    pub fn layer_range(&self, i: usize, t: usize) -> std::ops::Range<usize> {
        let s = self.outlet_side[i] * self.outlet_side[i];
        let start = self.outlet_base[i] + t * s;
        start..start + s
    }

    pub fn node_range(&self) -> std::ops::Range<usize> {
        0..self.node_cells.pow(3)
    }

    /// Centre of node cell with flat index `idx`.
    pub fn node_cell_center(&self, idx: usize) -> [f64; 3] {
        let n = self.node_cells;
        [self.node_center(idx % n), self.node_center((idx / n) % n), self.node_center(idx / (n * n))]
    }

    /// Restriction to aggregates: the node, then every outlet layer.
    pub fn n_aggregates(&self) -> usize {
        1 + self.outlet_layers.iter().sum::<usize>()
    }
}
