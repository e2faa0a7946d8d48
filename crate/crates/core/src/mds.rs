//! Classical (Torgerson) multidimensional scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mdmc::CommunityNetwork;

/// Scale applied to Ω before it is turned into a community distance.
pub const OMEGA_DISPLAY_SCALE: f64 = 10_000.0;

const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// N×dims
    pub coords: Matrix,
    /// Leading eigenvalues of the double-centred matrix, descending,
    /// before negative values are clamped.
    pub eigenvalues: Vec<f64>,
    /// Clamped leading eigenvalue mass over the total absolute eigenvalue
    /// mass; 1 when nothing is lost.
    pub stress_note: f64,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching unit
/// eigenvectors as matrix columns.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if !a.is_square() {
        return Err(Error::invalid("eigen-decomposition needs a square matrix"));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale: f64 = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[(b, b)].total_cmp(&m[(a, a)]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

fn check_dissimilarity(d: &Matrix) -> Result<()> {
    if !d.is_square() || d.rows() == 0 {
        return Err(Error::invalid("dissimilarity matrix must be square and nonempty"));
    }
    let n = d.rows();
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Err(Error::invalid(format!("nonzero diagonal at {i}")));
        }
        for j in 0..i {
            let (a, b) = (d[(i, j)], d[(j, i)]);
            if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::invalid(format!("dissimilarity not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

pub fn classical_mds(d: &Matrix, dims: usize) -> Result<Layout> {
    check_dissimilarity(d)?;
    let n = d.rows();
    if dims == 0 || dims > n {
        return Err(Error::invalid(format!(
            "cannot embed {n} points in {dims} dimensions"
        )));
    }
    let sq = Matrix::from_fn(n, n, |i, j| d[(i, j)] * d[(i, j)]);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    // D² is symmetric so column means equal row means
    let b = Matrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand));
    let (values, vectors) = symmetric_eigen(&b)?;

    let mut coords = Matrix::zeros(n, dims);
    for c in 0..dims {
        let scale = values[c].max(0.0).sqrt();
        let mut pivot = 0;
        for r in 1..n {
            if vectors[(r, c)].abs() > vectors[(pivot, c)].abs() {
                pivot = r;
            }
        }
        let sign = if vectors[(pivot, c)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            coords[(r, c)] = sign * vectors[(r, c)] * scale;
        }
    }
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    let kept: f64 = values[..dims].iter().map(|v| v.max(0.0)).sum();
    Ok(Layout {
        coords,
        eigenvalues: values[..dims].to_vec(),
        stress_note: if total > 0.0 { kept / total } else { 1.0 },
    })
}

/// Distances between community pairs: `1 / (1 + 10000·(Ω_ab + Ω_ba)/2)`.
pub fn omega_dissimilarity(cn: &CommunityNetwork) -> Matrix {
    let m = cn.len();
    Matrix::from_fn(m, m, |a, b| {
        if a == b {
            0.0
        } else {
            let w = (cn.omega[(a, b)] + cn.omega[(b, a)]) / 2.0;
            1.0 / (1.0 + OMEGA_DISPLAY_SCALE * w)
        }
    })
}

pub fn omega_layout(cn: &CommunityNetwork) -> Result<Layout> {
    if cn.len() < 2 {
        return Err(Error::invalid(format!(
            "community layout needs at least 2 communities, got {}",
            cn.len()
        )));
    }
    classical_mds(&omega_dissimilarity(cn), 2)
}

/// Euclidean distances between the rows of `coords`.
pub fn pairwise_distances(coords: &Matrix) -> Matrix {
    let n = coords.rows();
    Matrix::from_fn(n, n, |i, j| {
        coords
            .row(i)
            .iter()
            .zip(coords.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}
