//! Symmetric matrices with the sparsity of a discretized star graph: one
//! tridiagonal chain per edge, each chain coupled to a shared vertex unknown.
//!
//! Eliminating every chain from its far end towards the vertex produces no
//! fill, so factorization, solves and Sylvester inertia counts all cost
//! O(number of unknowns).

/// Unknown ordering of vectors: index 0 is the vertex, followed by the chain
/// unknowns of edge 1, edge 2 and edge 3 (nearest-to-vertex first).
#[derive(Debug, Clone, PartialEq)]
pub struct StarLayout {
    pub chain_len: [usize; 3],
}

impl StarLayout {
    pub fn size(&self) -> usize {
        1 + self.chain_len.iter().sum::<usize>()
    }

    pub fn offset(&self, edge: usize) -> usize {
        1 + self.chain_len[..edge].iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub diag: Vec<f64>,
    /// `off[j]` couples chain unknowns `j` and `j + 1`.
    pub off: Vec<f64>,
    /// Coupling between the vertex and chain unknown 0.
    pub link: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarMatrix {
    pub center: f64,
    pub chains: [Chain; 3],
}

/// Pivots of the far-end-first LDLᵀ elimination.
#[derive(Debug, Clone)]
pub struct StarFactor {
    chains: [(Vec<f64>, Vec<f64>, f64); 3],
    center_pivot: f64,
}

const TINY_PIVOT: f64 = 1e-300;

fn guard(d: f64) -> f64 {
    if d.abs() < TINY_PIVOT {
        -TINY_PIVOT
    } else {
        d
    }
}

impl StarMatrix {
    pub fn zeros(layout: &StarLayout) -> Self {
        let chain = |n: usize| Chain { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)], link: 0.0 };
        StarMatrix {
            center: 0.0,
            chains: [chain(layout.chain_len[0]), chain(layout.chain_len[1]), chain(layout.chain_len[2])],
        }
    }

    pub fn layout(&self) -> StarLayout {
        StarLayout { chain_len: [self.chains[0].diag.len(), self.chains[1].diag.len(), self.chains[2].diag.len()] }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &StarMatrix, b: f64) -> StarMatrix {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| a * x + b * y).collect::<Vec<_>>();
        let chain = |i: usize| Chain {
            diag: mix(&self.chains[i].diag, &other.chains[i].diag),
            off: mix(&self.chains[i].off, &other.chains[i].off),
            link: a * self.chains[i].link + b * other.chains[i].link,
        };
        StarMatrix { center: a * self.center + b * other.center, chains: [chain(0), chain(1), chain(2)] }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let layout = self.layout();
        let mut y = vec![0.0; x.len()];
        y[0] = self.center * x[0];
        for (i, c) in self.chains.iter().enumerate() {
            let o = layout.offset(i);
            let n = c.diag.len();
            if n == 0 {
                continue;
            }
            y[0] += c.link * x[o];
            y[o] += c.link * x[0];
            for j in 0..n {
                y[o + j] += c.diag[j] * x[o + j];
                if j + 1 < n {
                    y[o + j] += c.off[j] * x[o + j + 1];
                    y[o + j + 1] += c.off[j] * x[o + j];
                }
            }
        }
        y
    }

    pub fn factor(&self) -> StarFactor {
        let mut chains: [(Vec<f64>, Vec<f64>, f64); 3] = Default::default();
        let mut center = self.center;
        for (i, c) in self.chains.iter().enumerate() {
            let n = c.diag.len();
            let mut d = vec![0.0; n];
            if n == 0 {
                chains[i] = (d, c.off.clone(), c.link);
                continue;
            }
            d[n - 1] = guard(c.diag[n - 1]);
            for j in (0..n - 1).rev() {
                d[j] = guard(c.diag[j] - c.off[j] * c.off[j] / d[j + 1]);
            }
            center -= c.link * c.link / d[0];
            chains[i] = (d, c.off.clone(), c.link);
        }
        StarFactor { chains, center_pivot: guard(center) }
    }

    /// Number of negative pivots, i.e. the number of negative eigenvalues.
    pub fn negative_count(&self) -> usize {
        self.factor().negative_count()
    }
}

impl StarFactor {
    pub fn negative_count(&self) -> usize {
        let mut count = usize::from(self.center_pivot < 0.0);
        for (d, _, _) in &self.chains {
            count += d.iter().filter(|&&p| p < 0.0).count();
        }
        count
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut offsets = [0usize; 3];
        let mut acc = 1;
        for (i, (d, _, _)) in self.chains.iter().enumerate() {
            offsets[i] = acc;
            acc += d.len();
        }
        let mut z = b.to_vec();
        let mut zc = b[0];
        for (i, (d, off, link)) in self.chains.iter().enumerate() {
            let n = d.len();
            if n == 0 {
                continue;
            }
            let o = offsets[i];
            for j in (0..n - 1).rev() {
                z[o + j] -= off[j] * z[o + j + 1] / d[j + 1];
            }
            zc -= link * z[o] / d[0];
        }
        let mut x = vec![0.0; b.len()];
        x[0] = zc / self.center_pivot;
        for (i, (d, off, link)) in self.chains.iter().enumerate() {
            let n = d.len();
            if n == 0 {
                continue;
            }
            let o = offsets[i];
            x[o] = (z[o] - link * x[0]) / d[0];
            for j in 1..n {
                x[o + j] = (z[o + j] - off[j - 1] * x[o + j - 1]) / d[j];
            }
        }
        x
    }
}
