#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use std::f64::consts::{SQRT_2, TAU};

use nalgebra::{Complex, DMatrix, SMatrix};
use optomech_core::constants::SPEED_OF_LIGHT;
use optomech_core::model::{DerivedParams, PressureSign};
use optomech_core::{
    build_linear_model, derive, select_working_point, solve_steady_state, BranchPolicy, Coulomb,
    Drive, LinearModel, PhysicalParams, WorkingPoint,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 10 MHz mirrors of 20 ng in 25 mm cavities at 1064 nm, 50 mW,
/// kappa = 0.8 omega_m, gamma_m = 2 pi 100 Hz, 300 mK.
pub fn reference(detuning_ratio: f64, lambda_ratio: f64) -> PhysicalParams<f64> {
    let omega_m = TAU * 10e6;
    PhysicalParams {
        omega_m,
        gamma_m: TAU * 100.0,
        kappa: 0.8 * omega_m,
        omega_c: TAU * SPEED_OF_LIGHT / 1064e-9,
        drive: Drive::Detuning(detuning_ratio * omega_m),
        cavity_length: 25e-3,
        drive_power: 50e-3,
        mirror_mass: 20e-12,
        bath_temperature: 0.3,
        coulomb: Coulomb::Direct {
            lambda: lambda_ratio * omega_m,
        },
        pressure_sign: PressureSign::Uniform,
        symmetric: true,
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, center: f64, factor: f64) -> f64 {
    center * rng.random_range(-factor.ln()..factor.ln()).exp()
}

/// Parameters drawn log-uniformly within a factor 3 of the reference point,
/// detuning in `detuning` (units of omega_m) and |lambda| < 0.9 omega_m.
pub fn random_params(rng: &mut ChaCha8Rng, detuning: (f64, f64)) -> PhysicalParams<f64> {
    let mut p = reference(
        rng.random_range(detuning.0..detuning.1),
        rng.random_range(-0.9..0.9),
    );
    p.kappa = log_uniform(rng, p.kappa, 3.0);
    p.gamma_m = log_uniform(rng, p.gamma_m, 3.0);
    p.drive_power = log_uniform(rng, p.drive_power, 3.0);
    p.bath_temperature = log_uniform(rng, p.bath_temperature, 3.0);
    p.cavity_length = log_uniform(rng, p.cavity_length, 3.0);
    p.mirror_mass = log_uniform(rng, p.mirror_mass, 3.0);
    if rng.random_bool(0.5) {
        p.pressure_sign = PressureSign::Alternating;
    }
    p
}

pub fn working_point(p: &PhysicalParams<f64>) -> (WorkingPoint<f64>, DerivedParams<f64>) {
    let d = derive(p).unwrap();
    let roots = solve_steady_state(&d, &Default::default()).unwrap();
    (
        select_working_point(&roots, BranchPolicy::Physical).unwrap(),
        d,
    )
}

pub fn model(p: &PhysicalParams<f64>) -> LinearModel<f64> {
    let (wp, d) = working_point(p);
    build_linear_model(&wp, &d)
}

/// Right-hand side of the nonlinear Langevin equations (noise dropped) in the
/// fluctuation coordinates `(dq1, dp1, dq2, dp2, dX1, dY1, dX2, dY2)` around
/// `wp`, with the cavity quadratures taken in the frame of the steady field.
pub fn langevin_rhs(wp: &WorkingPoint<f64>, d: &DerivedParams<f64>, f: &[f64; 8]) -> [f64; 8] {
    let sigma = |m: usize| wp.pressure_sign.sign::<f64>(m);
    let mut q = [0.0; 2];
    let mut p = [0.0; 2];
    let mut c = [Complex::new(0.0, 0.0); 2];
    let mut phase = [Complex::new(1.0, 0.0); 2];
    for m in 0..2 {
        q[m] = wp.q_s[m] + f[2 * m];
        p[m] = wp.p_s[m] + f[2 * m + 1];
        let amp = wp.c_s[m].norm();
        phase[m] = if amp > 0.0 {
            wp.c_s[m] / amp
        } else {
            Complex::new(1.0, 0.0)
        };
        let delta = Complex::new(f[4 + 2 * m], f[5 + 2 * m]) / SQRT_2;
        c[m] = phase[m] * (Complex::new(amp, 0.0) + delta);
    }
    let mut out = [0.0; 8];
    for m in 0..2 {
        let o = 1 - m;
        out[2 * m] = d.omega_m * p[m];
        out[2 * m + 1] = -d.omega_m * q[m] - d.gamma_m * p[m]
            + sigma(m) * d.chi * c[m].norm_sqr()
            + d.lambda * q[o];
        let detuning = d.delta0 - sigma(m) * d.chi * q[m];
        let cdot = -Complex::new(d.kappa, detuning) * c[m] + Complex::new(d.eps_p, 0.0);
        let rotated = phase[m].conj() * cdot * SQRT_2;
        out[4 + 2 * m] = rotated.re;
        out[5 + 2 * m] = rotated.im;
    }
    out
}

/// Central finite-difference Jacobian of [`langevin_rhs`] at zero fluctuation.
pub fn finite_difference_jacobian(
    wp: &WorkingPoint<f64>,
    d: &DerivedParams<f64>,
) -> SMatrix<f64, 8, 8> {
    let scale = [
        wp.q_s[0].abs(),
        1.0,
        wp.q_s[1].abs(),
        1.0,
        wp.c_s[0].norm(),
        wp.c_s[0].norm(),
        wp.c_s[1].norm(),
        wp.c_s[1].norm(),
    ];
    let mut j = SMatrix::<f64, 8, 8>::zeros();
    for k in 0..8 {
        let h = 0.1 * scale[k].max(1.0);
        let mut plus = [0.0; 8];
        let mut minus = [0.0; 8];
        plus[k] = h;
        minus[k] = -h;
        let (fp, fm) = (langevin_rhs(wp, d, &plus), langevin_rhs(wp, d, &minus));
        for i in 0..8 {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    j
}

fn symplectic_rotation(n: usize, mode: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    s[(2 * mode, 2 * mode)] = c;
    s[(2 * mode, 2 * mode + 1)] = -si;
    s[(2 * mode + 1, 2 * mode)] = si;
    s[(2 * mode + 1, 2 * mode + 1)] = c;
    s
}

fn symplectic_squeeze(n: usize, mode: usize, r: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    s[(2 * mode, 2 * mode)] = (-r).exp();
    s[(2 * mode + 1, 2 * mode + 1)] = r.exp();
    s
}

fn beam_splitter(n: usize, a: usize, b: usize, theta: f64) -> DMatrix<f64> {
    let mut s = DMatrix::identity(2 * n, 2 * n);
    let (c, si) = (theta.cos(), theta.sin());
    for k in 0..2 {
        let (i, j) = (2 * a + k, 2 * b + k);
        s[(i, i)] = c;
        s[(j, j)] = c;
        s[(i, j)] = si;
        s[(j, i)] = -si;
    }
    s
}

/// Random two-mode Gaussian covariance `S diag(nu) S^T` with symplectic
/// eigenvalues `nu >= 1/2` and `S` a product of random rotations, squeezers
/// and beam splitters.
pub fn random_physical_cm(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let nu: [f64; 2] = [
        0.5 + rng.random_range(0.0..3.0f64).powi(2),
        0.5 + rng.random_range(0.0..3.0f64).powi(2),
    ];
    let mut s = DMatrix::<f64>::identity(4, 4);
    for _ in 0..3 {
        for mode in 0..2 {
            s = symplectic_rotation(2, mode, rng.random_range(0.0..TAU)) * s;
            s = symplectic_squeeze(2, mode, rng.random_range(-1.0..1.0)) * s;
        }
        s = beam_splitter(2, 0, 1, rng.random_range(0.0..TAU)) * s;
    }
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        nu[0], nu[0], nu[1], nu[1],
    ]));
    let v = &s * diag * s.transpose();
    (&v + v.transpose()) * 0.5
}

/// Gaussian elimination with partial pivoting on a dense real system,
/// several right-hand sides at once.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            for k in 0..b[row].len() {
                b[row][k] -= f * b[col][k];
            }
        }
    }
    for col in (0..n).rev() {
        for k in 0..b[col].len() {
            let mut s = b[col][k];
            for j in col + 1..n {
                s -= a[col][j] * b[j][k];
            }
            b[col][k] = s / a[col][col];
        }
    }
    b
}

/// Output covariance from `(−i w − A) X = B` written as the real system
/// `[[−A, w], [−w, −A]] [Re X; Im X] = [B; 0]`.
pub fn output_covariance_oracle(p: &optomech_core::PhysicalParams<f64>, w: f64) -> [[f64; 4]; 4] {
    let m = model(p);
    let (_, d) = m.origin.unwrap();
    let mech = (d.gamma_m * (2.0 * d.nbar_m + 1.0)).sqrt();
    let cav = (d.kappa * (2.0 * d.n_c + 1.0)).sqrt();
    let refl = ((2.0 * d.n_c + 1.0) / 2.0).sqrt();
    // Noise channels: p1, p2, X1_in, Y1_in, X2_in, Y2_in.
    let mut b = vec![vec![0.0; 6]; 16];
    b[1][0] = mech;
    b[3][1] = mech;
    for k in 0..4 {
        b[4 + k][2 + k] = cav;
    }
    let mut a = vec![vec![0.0; 16]; 16];
    for i in 0..8 {
        for j in 0..8 {
            a[i][j] = -m.drift[(i, j)];
            a[8 + i][8 + j] = -m.drift[(i, j)];
        }
        a[i][8 + i] = w;
        a[8 + i][i] = -w;
    }
    let x = dense_solve(a, b);
    let g = (2.0 * d.kappa).sqrt();
    let mut tr = [[0.0; 6]; 4];
    let mut ti = [[0.0; 6]; 4];
    for k in 0..4 {
        for c in 0..6 {
            tr[k][c] = g * x[4 + k][c];
            ti[k][c] = g * x[12 + k][c];
        }
        tr[k][2 + k] -= refl;
    }
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            v[i][j] = (0..6)
                .map(|c| tr[i][c] * tr[j][c] + ti[i][c] * ti[j][c])
                .sum();
        }
    }
    v
}
