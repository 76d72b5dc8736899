//! Two-mode Gaussian entanglement measures: logarithmic negativity and the
//! Duan inseparability sum.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};

use crate::covariance::{symplectic_form, CovarianceMatrix, Ordering};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-mode subsystem of the 4-mode state, or the two output beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BipartitionId {
    MirrorMirror,
    CavityCavity,
    /// Mirror `m` with its own cavity.
    MirrorCavity(usize),
    /// Mirror `m` with the other cavity.
    MirrorCavityCross(usize),
    /// Output beams; the input must already be 4x4.
    BeamBeam,
}

impl BipartitionId {
    /// Mode indices `(a, b)` into `(mirror 1, mirror 2, cavity 1, cavity 2)`.
    fn modes(self) -> Option<(usize, usize)> {
        match self {
            BipartitionId::MirrorMirror => Some((0, 1)),
            BipartitionId::CavityCavity => Some((2, 3)),
            BipartitionId::MirrorCavity(m) if m < 2 => Some((m, 2 + m)),
            BipartitionId::MirrorCavityCross(m) if m < 2 => Some((m, 3 - m)),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            BipartitionId::MirrorMirror => "mirror_mirror".into(),
            BipartitionId::CavityCavity => "cavity_cavity".into(),
            BipartitionId::MirrorCavity(m) => format!("mirror{}_cavity{}", m + 1, m + 1),
            BipartitionId::MirrorCavityCross(m) => format!("mirror{}_cavity{}", m + 1, 2 - m),
            BipartitionId::BeamBeam => "beam_beam".into(),
        }
    }
}

/// Extracts the 4x4 covariance `(Q_a, P_a, Q_b, P_b)` of a bipartition.
pub fn reduce<T: Real>(
    v: &CovarianceMatrix<T>,
    which: BipartitionId,
) -> Result<CovarianceMatrix<T>> {
    let bad = || Error::BadSelector {
        selector: which.name(),
        dim: v.dim(),
    };
    let rows: [usize; 4] = match (which, v.ordering) {
        (BipartitionId::BeamBeam, Ordering::Pair(BipartitionId::BeamBeam)) if v.dim() == 4 => {
            return Ok(v.clone());
        }
        (BipartitionId::BeamBeam, _) => return Err(bad()),
        (_, Ordering::Full) if v.dim() == 8 => {
            let (a, b) = which.modes().ok_or_else(bad)?;
            [2 * a, 2 * a + 1, 2 * b, 2 * b + 1]
        }
        _ => return Err(bad()),
    };
    let m = DMatrix::from_fn(4, 4, |i, j| v.matrix[(rows[i], rows[j])]);
    Ok(CovarianceMatrix {
        matrix: m,
        ordering: Ordering::Pair(which),
        context: v.context,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport<T> {
    /// `max(0, −ln(2 eta_minus))`.
    pub log_negativity: T,
    /// Smallest symplectic eigenvalue of the partial transpose (block formula).
    pub eta_minus: T,
    pub det_a: T,
    pub det_b: T,
    pub det_c: T,
    pub det_v: T,
}

fn blocks<T: Real>(v: &DMatrix<T>) -> (Matrix2<T>, Matrix2<T>, Matrix2<T>) {
    let blk = |r: usize, c: usize| {
        Matrix2::new(v[(r, c)], v[(r, c + 1)], v[(r + 1, c)], v[(r + 1, c + 1)])
    };
    (blk(0, 0), blk(2, 2), blk(0, 2))
}

fn as_matrix4<T: Real>(v: &CovarianceMatrix<T>) -> Result<Matrix4<T>> {
    if v.dim() != 4 {
        return Err(Error::BadSelector {
            selector: "two-mode".into(),
            dim: v.dim(),
        });
    }
    Ok(Matrix4::from_fn(|i, j| v.matrix[(i, j)]))
}

/// Relative tolerance on the discriminant `Sigma^2 − 4 det V` before the state
/// is declared unphysical.
const DISCRIMINANT_REL_TOL: f64 = 1e-10;

/// Logarithmic negativity of a two-mode covariance `[[A, C], [C^T, B]]` with
/// `eta_minus^2 = (Sigma − sqrt(Sigma^2 − 4 det V)) / 2`,
/// `Sigma = det A + det B − 2 det C`.
pub fn log_negativity<T: Real>(v: &CovarianceMatrix<T>) -> Result<EntanglementReport<T>> {
    let m = as_matrix4(v)?;
    let vd = DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
    let (a, b, c) = blocks(&vd);
    let (det_a, det_b, det_c) = (a.determinant(), b.determinant(), c.determinant());
    let det_v = m.determinant();
    let two = T::lit(2.0);
    let sigma = det_a + det_b - two * det_c;
    let disc = sigma * sigma - T::lit(4.0) * det_v;
    let tol = T::lit(DISCRIMINANT_REL_TOL).max(T::eps() * T::lit(100.0)) * sigma * sigma;
    if !(disc >= -tol) || !(det_v > T::zero()) || !(sigma > T::zero()) {
        return Err(Error::UnphysicalCm(format!(
            "Sigma = {:e}, det V = {:e}, discriminant = {:e}",
            sigma.as_f64(),
            det_v.as_f64(),
            disc.as_f64()
        )));
    }
    // Rationalized smaller root avoids cancellation for nearly pure states.
    let eta2 = two * det_v / (sigma + disc.max(T::zero()).sqrt());
    let eta_minus = eta2.sqrt();
    let log_negativity = (-(two * eta_minus).ln()).max(T::zero());
    Ok(EntanglementReport {
        log_negativity,
        eta_minus,
        det_a,
        det_b,
        det_c,
        det_v,
    })
}

/// Symplectic eigenvalues (ascending) of a positive-definite `2n x 2n` covariance,
/// from the singular values of `V^{1/2} Omega V^{1/2}`.
pub fn symplectic_eigenvalues<T: Real>(v: &DMatrix<T>) -> Result<Vec<T>> {
    let eig = SymmetricEigen::new((v + v.transpose()) * T::lit(0.5));
    if eig.eigenvalues.iter().any(|&l| !(l > T::zero())) {
        return Err(Error::UnphysicalCm(
            "covariance is not positive definite".into(),
        ));
    }
    let sqrt_v = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()))
        * eig.eigenvectors.transpose();
    let k = &sqrt_v * symplectic_form::<T>(v.nrows() / 2) * &sqrt_v;
    let mut sv: Vec<T> = k.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Singular values come in equal pairs.
    Ok(sv.chunks(2).map(|p| (p[0] + p[1]) * T::lit(0.5)).collect())
}

/// `P_b -> −P_b`.
pub fn partial_transpose<T: Real>(v: &DMatrix<T>) -> DMatrix<T> {
    let mut out = v.clone();
    for k in 0..4 {
        if k != 3 {
            out[(3, k)] = -out[(3, k)];
            out[(k, 3)] = -out[(k, 3)];
        }
    }
    out
}

/// `eta_minus` from the symplectic spectrum of the partially transposed matrix.
pub fn eta_minus_symplectic<T: Real>(v: &CovarianceMatrix<T>) -> Result<T> {
    as_matrix4(v)?;
    Ok(symplectic_eigenvalues(&partial_transpose(&v.matrix))?[0])
}

/// Duan sum `Var(Q_a + Q_b) + Var(P_a − P_b)`; a value below 2 certifies entanglement.
pub fn duan<T: Real>(v: &CovarianceMatrix<T>) -> Result<T> {
    let m = as_matrix4(v)?;
    let two = T::lit(2.0);
    Ok(m[(0, 0)] + m[(2, 2)] + two * m[(0, 2)] + m[(1, 1)] + m[(3, 3)] - two * m[(1, 3)])
}

pub const DUAN_BOUND: f64 = 2.0;
