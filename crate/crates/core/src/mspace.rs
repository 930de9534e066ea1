//! The quotient space `𝕄` attached to a PSD colour matrix, and Brydges–Kennedy
//! interpolation matrices.

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;

use crate::covariance::check_psd;
use crate::error::{Error, Result};

/// `𝕄 = ℂ^m / ker 𝔐` with coordinates of `𝔢_k` in row `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientSpace {
    coords: DMatrix<f64>,
}

impl QuotientSpace {
    pub fn m(&self) -> usize {
        self.coords.nrows()
    }

    pub fn rank(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    /// Coordinates of `𝔢_k`.
    pub fn e(&self, k: usize) -> Vec<f64> {
        self.coords.row(k).iter().copied().collect()
    }

    /// `coords · coordsᵀ`, which reproduces `𝔐`.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.coords * self.coords.transpose()
    }
}

pub fn quotient_space(m: &DMatrix<f64>) -> Result<QuotientSpace> {
    check_psd(m, 1e-8)?;
    let eig = m.clone().symmetric_eigen();
    let norm = eig.eigenvalues.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| eig.eigenvalues[j] > 1e-10 * norm)
        .collect();
    let mut coords = DMatrix::zeros(m.nrows(), kept.len());
    for (col, &j) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        let mut best = 0;
        for i in 1..v.len() {
            if v[i].abs() > v[best].abs() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let s = v[best].signum() * eig.eigenvalues[j].sqrt();
        coords.set_column(col, &(v * s));
    }
    Ok(QuotientSpace { coords })
}

/// Weighted graph on `m` vertices; edges carry weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGraph {
    m: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TreeGraph {
    pub fn new(m: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("graph needs at least one vertex".into()));
        }
        for &(a, b, w) in &edges {
            if a >= m || b >= m || a == b {
                return Err(Error::InvalidParameter(format!("bad edge ({a}, {b})")));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter(format!("edge weight {w} outside [0, 1]")));
            }
        }
        Ok(Self { m, edges })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        if self.edges.len() + 1 != self.m {
            return false;
        }
        let mut uf = UnionFind::<usize>::new(self.m);
        self.edges.iter().all(|&(a, b, _)| uf.union(a, b))
    }
}

/// `M(𝔤, 𝛂, t)_{kl} = ∫₀ᵗ 𝟙[k ~ l in 𝔤 minus edges with 𝛂 ≥ s] ds`, integrated exactly.
pub fn bk_matrix(g: &TreeGraph, t: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t = {t} outside [0, 1]")));
    }
    let mut breaks: Vec<f64> = g
        .edges
        .iter()
        .map(|e| e.2)
        .filter(|&w| w > 0.0 && w < t)
        .collect();
    breaks.push(0.0);
    breaks.push(t);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let m = g.m;
    let mut out = DMatrix::zeros(m, m);
    for win in breaks.windows(2) {
        let (s0, s1) = (win[0], win[1]);
        if s1 <= s0 {
            continue;
        }
        let mid = 0.5 * (s0 + s1);
        let mut uf = UnionFind::<usize>::new(m);
        for &(a, b, w) in &g.edges {
            if w < mid {
                uf.union(a, b);
            }
        }
        let roots: Vec<usize> = (0..m).map(|k| uf.find_mut(k)).collect();
        for k in 0..m {
            for l in 0..m {
                if roots[k] == roots[l] {
                    out[(k, l)] += s1 - s0;
                }
            }
        }
    }
    Ok(out)
}
