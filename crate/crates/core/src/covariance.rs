//! Steady-state covariance of the fluctuations and the frequency-resolved
//! covariance of the two output beams.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::dynamics::{eigenvalues, index, LinearModel, Mat8, DIM};
use crate::entanglement::{log_negativity, BipartitionId, EntanglementReport};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Quadrature ordering of a covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `(q1, p1, q2, p2, X1, Y1, X2, Y2)`.
    Full,
    /// `(Q_a, P_a, Q_b, P_b)` of a two-mode subsystem.
    Pair(BipartitionId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Context<T> {
    Intracavity,
    /// Output beams at sideband frequency `omega` (rad/s) from the drive.
    Output {
        omega: T,
    },
}

/// Symmetrized second moments `(<f_i f_j + f_j f_i>)/2` of a zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix<T: Real> {
    pub matrix: DMatrix<T>,
    pub ordering: Ordering,
    pub context: Context<T>,
}

impl<T: Real> CovarianceMatrix<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Smallest eigenvalue of `V + (i/2) Omega`; physical states have it >= 0.
    pub fn physicality(&self) -> T {
        uncertainty_min_eigenvalue(&self.matrix)
    }

    pub fn is_physical(&self, tol: T) -> bool {
        self.physicality() >= -tol
    }

    pub fn max_asymmetry(&self) -> T {
        let m = &self.matrix;
        let scale = m.amax().max(T::lit(f64::MIN_POSITIVE));
        (m - m.transpose()).amax() / scale
    }
}

/// Block-diagonal symplectic form with `[[0, 1], [−1, 0]]` per mode.
pub fn symplectic_form<T: Real>(modes: usize) -> DMatrix<T> {
    let mut w = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        w[(2 * k, 2 * k + 1)] = T::one();
        w[(2 * k + 1, 2 * k)] = -T::one();
    }
    w
}

/// Smallest eigenvalue of the Hermitian matrix `V + (i/2) Omega`, from its
/// real symmetric embedding `[[V, −Omega/2], [Omega/2, V]]`.
pub fn uncertainty_min_eigenvalue<T: Real>(v: &DMatrix<T>) -> T {
    let n = v.nrows();
    let half_omega = symplectic_form::<T>(n / 2) * T::lit(0.5);
    let mut emb = DMatrix::zeros(2 * n, 2 * n);
    emb.view_mut((0, 0), (n, n)).copy_from(v);
    emb.view_mut((n, n), (n, n)).copy_from(v);
    emb.view_mut((0, n), (n, n)).copy_from(&(-&half_omega));
    emb.view_mut((n, 0), (n, n)).copy_from(&half_omega);
    let emb = (&emb + emb.transpose()) * T::lit(0.5);
    SymmetricEigen::new(emb).eigenvalues.min()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceOptions<T> {
    /// Required `||A V + V A^T + D|| / ||D||` (Frobenius).
    pub lyapunov_rel_tol: T,
    /// Allowed negative excursion of `min eig(V + i Omega / 2)`.
    pub physicality_tol: T,
}

impl<T: Real> Default for CovarianceOptions<T> {
    fn default() -> Self {
        CovarianceOptions {
            lyapunov_rel_tol: T::tolerance(1e-10, 1e4),
            physicality_tol: T::tolerance(1e-10, 1e4),
        }
    }
}

fn mat8_to_dyn<T: Real>(m: &Mat8<T>) -> DMatrix<T> {
    DMatrix::from_iterator(DIM, DIM, m.iter().copied())
}

/// `I ⊗ A + A ⊗ I`, the column-major vectorization of `V -> A V + V A^T`.
fn lyapunov_operator<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    let mut l = DMatrix::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            for k in 0..n {
                // (A V)_ij = sum_k A_ik V_kj
                l[(row, j * n + k)] += a[(i, k)];
                // (V A^T)_ij = sum_k V_ik A_jk
                l[(row, k * n + i)] += a[(j, k)];
            }
        }
    }
    l
}

fn lyapunov_residual<T: Real>(a: &DMatrix<T>, v: &DMatrix<T>, d: &DMatrix<T>) -> DMatrix<T> {
    a * v + v * a.transpose() + d
}

/// Solves `A V + V A^T + D = 0` for a Hurwitz drift matrix.
pub fn solve_lyapunov<T: Real>(
    model: &LinearModel<T>,
    opts: &CovarianceOptions<T>,
) -> Result<CovarianceMatrix<T>> {
    let max_re = eigenvalues(model)?
        .iter()
        .map(|z| z.re)
        .fold(T::min_value().unwrap(), |a, b| a.max(b));
    if max_re >= T::zero() {
        return Err(Error::UnstableModel {
            max_real_part: max_re.as_f64(),
        });
    }
    // V is invariant under A -> A/s, D -> D/s.
    let s = model.time_scale();
    let a = mat8_to_dyn(&model.drift) / s;
    let d = mat8_to_dyn(&model.diffusion) / s;
    let lu = lyapunov_operator(&a).lu();
    let solve = |rhs: &DMatrix<T>| -> Result<DMatrix<T>> {
        let b = DVector::from_iterator(DIM * DIM, rhs.iter().map(|&x| -x));
        let x = lu.solve(&b).ok_or_else(|| Error::SolverFailure {
            reason: "singular Lyapunov operator".into(),
            residual: f64::INFINITY,
        })?;
        Ok(DMatrix::from_iterator(DIM, DIM, x.iter().copied()))
    };
    let mut v = solve(&d)?;
    for _ in 0..2 {
        let r = lyapunov_residual(&a, &v, &d);
        v += solve(&r)?;
    }
    v = (&v + v.transpose()) * T::lit(0.5);

    let d_norm = d.norm();
    let res = lyapunov_residual(&a, &v, &d).norm();
    let rel = if d_norm > T::zero() {
        res / d_norm
    } else {
        res
    };
    if !(rel < opts.lyapunov_rel_tol) {
        return Err(Error::SolverFailure {
            reason: "Lyapunov residual above tolerance".into(),
            residual: rel.as_f64(),
        });
    }
    let cm = CovarianceMatrix {
        matrix: v,
        ordering: Ordering::Full,
        context: Context::Intracavity,
    };
    let phys = cm.physicality();
    if phys < -opts.physicality_tol {
        return Err(Error::UnphysicalCm(format!(
            "min eig(V + i Omega/2) = {:e}",
            phys.as_f64()
        )));
    }
    Ok(cm)
}

/// Relative Lyapunov residual `||A V + V A^T + D|| / ||D||` of an 8x8 covariance.
pub fn lyapunov_relative_residual<T: Real>(model: &LinearModel<T>, v: &CovarianceMatrix<T>) -> T {
    let s = model.time_scale();
    let a = mat8_to_dyn(&model.drift) / s;
    let d = mat8_to_dyn(&model.diffusion) / s;
    let r = lyapunov_residual(&a, &v.matrix, &d).norm();
    let dn = d.norm();
    if dn > T::zero() {
        r / dn
    } else {
        r
    }
}

/// Affine map `x -> M x + c` on the vectorized covariance.
#[derive(Clone)]
struct Affine<T: Real> {
    m: DMatrix<T>,
    c: DVector<T>,
}

impl<T: Real> Affine<T> {
    /// `self ∘ self`.
    fn squared(&self) -> Self {
        Affine {
            m: &self.m * &self.m,
            c: &self.m * &self.c + &self.c,
        }
    }

    fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.m * x + &self.c
    }
}

/// One classical RK4 step of `v' = L v + d` with step `h`: for an autonomous
/// linear system the four stages collapse to
/// `v -> P(hL) v + h Q(hL) d`, `P = sum_{k<=4} (hL)^k/k!`, `Q = sum_{k<=3} (hL)^k/(k+1)!`.
fn rk4_step_map<T: Real>(l: &DMatrix<T>, d: &DVector<T>, h: T) -> Affine<T> {
    let n = l.nrows();
    let hl = l * h;
    let id = DMatrix::<T>::identity(n, n);
    let hl2 = &hl * &hl;
    let hl3 = &hl2 * &hl;
    let hl4 = &hl3 * &hl;
    let p = &id + &hl + &hl2 * T::lit(0.5) + &hl3 * T::lit(1.0 / 6.0) + &hl4 * T::lit(1.0 / 24.0);
    let q = &id + &hl * T::lit(0.5) + &hl2 * T::lit(1.0 / 6.0) + &hl3 * T::lit(1.0 / 24.0);
    Affine { m: p, c: q * d * h }
}

/// Integrates the moment flow `V' = A V + V A^T + D` from `v0` to `t_final`
/// with fixed-step classical RK4 (step `<= dt`).
///
/// The step map is affine and identical for every step, so `n` steps are
/// applied as binary powers of that map; the result equals stepping one at a
/// time up to rounding.
pub fn propagate_covariance<T: Real>(
    model: &LinearModel<T>,
    v0: &CovarianceMatrix<T>,
    t_final: T,
    dt: T,
) -> Result<CovarianceMatrix<T>> {
    let spectral_radius = eigenvalues(model)?
        .iter()
        .map(|z| z.modulus())
        .fold(T::zero(), |a, b| a.max(b));
    let bound = T::lit(0.1) / spectral_radius;
    if !(dt > T::zero() && dt < bound) {
        return Err(Error::StepTooLarge {
            dt: dt.as_f64(),
            bound: bound.as_f64(),
        });
    }
    if t_final < T::zero() {
        return Err(Error::InvalidParameter {
            field: "t_final",
            reason: "must be >= 0".into(),
        });
    }
    let steps = (t_final / dt).ceil().to_u64().unwrap_or(u64::MAX).max(1);
    let h = t_final / T::lit(steps as f64);

    let s = model.time_scale();
    let a = mat8_to_dyn(&model.drift) / s;
    let d = mat8_to_dyn(&model.diffusion) / s;
    let l = lyapunov_operator(&a);
    let dvec = DVector::from_iterator(DIM * DIM, d.iter().copied());
    let mut power = rk4_step_map(&l, &dvec, h * s);

    let mut x = DVector::from_iterator(DIM * DIM, v0.matrix.iter().copied());
    let limit = T::lit(1e12) * (T::one() + x.amax() + d.amax() * t_final * s);
    let mut remaining = steps;
    let mut done: u64 = 0;
    let mut chunk: u64 = 1;
    while remaining > 0 {
        if remaining & 1 == 1 {
            x = power.apply(&x);
            done += chunk;
            if !x.iter().all(|v| v.is_finite()) || x.amax() > limit {
                return Err(Error::DivergenceDetected {
                    time: (h * T::lit(done as f64)).as_f64(),
                });
            }
        }
        remaining >>= 1;
        if remaining > 0 {
            power = power.squared();
            chunk *= 2;
        }
    }
    let v = DMatrix::from_iterator(DIM, DIM, x.iter().copied());
    Ok(CovarianceMatrix {
        matrix: (&v + v.transpose()) * T::lit(0.5),
        ordering: Ordering::Full,
        context: Context::Intracavity,
    })
}

/// Frequency-resolved covariance of the two output beams.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpectrumPoint<T: Real> {
    /// Sideband frequency relative to the drive (rad/s).
    pub omega: T,
    /// 4x4 covariance of `(X1_out, Y1_out, X2_out, Y2_out)`.
    pub v_out: CovarianceMatrix<T>,
    /// EPR squeezing spectrum `[Var(X1+X2) + Var(Y1−Y2)] / 2`; 1 at shot noise.
    pub s_out: T,
    pub entanglement: EntanglementReport<T>,
}

/// White-noise channel map `B` (8x6, `B B^T = D`) and direct reflection `R`
/// (4x6) of the input noise onto the output quadratures.
fn noise_maps<T: Real>(model: &LinearModel<T>) -> (DMatrix<T>, DMatrix<T>, T) {
    let kappa = -model.drift[(index::x(0), index::x(0))];
    let mut b = DMatrix::zeros(DIM, 6);
    let mut r = DMatrix::zeros(4, 6);
    for m in 0..2 {
        b[(index::p(m), m)] = model.diffusion[(index::p(m), index::p(m))].sqrt();
    }
    for k in 0..4 {
        let row = 4 + k;
        let dk = model.diffusion[(row, row)];
        b[(row, 2 + k)] = dk.sqrt();
        r[(k, 2 + k)] = (dk / (T::lit(2.0) * kappa)).sqrt();
    }
    (b, r, kappa)
}

/// Output-beam covariance at sideband `omega` from the input-output relation
/// `a_out = sqrt(2 kappa) a − a_in` and the stationary white input noise.
pub fn output_covariance<T: Real>(
    model: &LinearModel<T>,
    omega: T,
) -> Result<OutputSpectrumPoint<T>> {
    let v = output_covariance_matrix(model, omega)?;
    let m = &v.matrix;
    let s_out = (m[(0, 0)] + m[(2, 2)] + T::lit(2.0) * m[(0, 2)] + m[(1, 1)] + m[(3, 3)]
        - T::lit(2.0) * m[(1, 3)])
        * T::lit(0.5);
    let entanglement = log_negativity(&v)?;
    Ok(OutputSpectrumPoint {
        omega,
        v_out: v,
        s_out,
        entanglement,
    })
}

fn output_covariance_matrix<T: Real>(
    model: &LinearModel<T>,
    omega: T,
) -> Result<CovarianceMatrix<T>> {
    let s = model.time_scale();
    let (b, r, kappa) = noise_maps(model);
    let w = omega / s;
    let zero = T::zero();
    // -i w I - A, scaled by 1/s.
    let resolvent_lhs = DMatrix::from_fn(DIM, DIM, |i, j| {
        let diag_im = if i == j { -w } else { zero };
        Complex::new(-model.drift[(i, j)] / s, diag_im)
    });
    let rhs = b.map(|x| Complex::new(x, zero));
    let sol = resolvent_lhs
        .lu()
        .solve(&rhs)
        .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
        .ok_or(Error::SingularResolvent {
            omega: omega.as_f64(),
        })?;
    let gain = (T::lit(2.0) * kappa).sqrt() / s;
    let t = DMatrix::from_fn(4, 6, |i, j| {
        sol[(4 + i, j)] * gain - Complex::new(r[(i, j)], zero)
    });
    let spectral = &t * t.adjoint();
    let v = spectral.map(|z| z.re);
    Ok(CovarianceMatrix {
        matrix: (&v + v.transpose()) * T::lit(0.5),
        ordering: Ordering::Pair(BipartitionId::BeamBeam),
        context: Context::Output { omega },
    })
}

/// Output spectrum on a frequency grid; frequencies are evaluated in parallel
/// and returned in grid order.
pub fn output_spectrum<T: Real>(
    model: &LinearModel<T>,
    omegas: &[T],
) -> Vec<Result<OutputSpectrumPoint<T>>> {
    omegas
        .par_iter()
        .map(|&w| output_covariance(model, w))
        .collect()
}

/// `n` evenly spaced values from `min` to `max` inclusive.
pub fn frequency_grid<T: Real>(min: T, max: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n)
            .map(|k| min + (max - min) * T::lit(k as f64) / T::lit((n - 1) as f64))
            .collect(),
    }
}
