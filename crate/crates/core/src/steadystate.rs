//! Semiclassical steady state of the two driven cavities.
//!
//! Setting the time derivatives of the classical Langevin equations to zero
//! gives, with `sigma_m` the radiation-pressure sign of mirror `m`,
//!
//! ```text
//! p_ms = 0
//! omega_m q_ms = sigma_m chi |c_ms|^2 + lambda q_(3-m)s
//! c_ms = eps_p / (kappa + i (delta0 − sigma_m chi q_ms))
//! ```
//!
//! The solver works in the normalized frequency shifts
//! `x_m = sigma_m chi q_ms / kappa`, where the system reads
//!
//! ```text
//! x_m − t x_(3-m) = beta / (1 + (delta − x_m)^2)
//! t = sigma_1 sigma_2 lambda / omega_m,  delta = delta0 / kappa,
//! beta = chi^2 eps_p^2 / (kappa^3 omega_m)
//! ```
//!
//! Roots are enumerated from the degree-9 resultant polynomial in `x_1`
//! (plus the decoupled cubic product set, which is the well-conditioned seed
//! family when `t` is small) and polished by Newton on the 2-D system. The
//! physical branch is the one reached by ramping the drive power from zero.

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::model::{DerivedParams, PressureSign};
use crate::poly::Poly;
use crate::scalar::Real;

/// Semiclassical operating point for one root of the steady-state equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingPoint<T> {
    /// Mirror positions (dimensionless).
    pub q_s: [T; 2],
    /// Mirror momenta; always zero.
    pub p_s: [T; 2],
    /// Intracavity amplitudes (sqrt of photon number, with phase).
    pub c_s: [Complex<T>; 2],
    /// Intracavity photon numbers `|c_s|^2`.
    pub intensity: [T; 2],
    /// Effective detunings `delta0 − sigma_m chi q_ms` (rad/s).
    pub delta_eff: [T; 2],
    /// Linearized couplings `sqrt(2) chi |c_ms|` (rad/s).
    pub coupling: [T; 2],
    pub pressure_sign: PressureSign,
    /// Position in the intensity-sorted root list.
    pub root_index: usize,
    /// Root reached by adiabatically ramping the drive from zero power.
    pub is_physical_branch: bool,
}

impl<T: Real> WorkingPoint<T> {
    /// Largest relative residual of the steady-state equations at this point.
    pub fn residual(&self, d: &DerivedParams<T>) -> T {
        let mut worst = T::zero();
        for m in 0..2 {
            let sigma: T = self.pressure_sign.sign(m);
            let other = self.q_s[1 - m];
            let n = self.c_s[m].norm_sqr();
            let lhs = d.omega_m * self.q_s[m];
            let rhs = sigma * d.chi * n + d.lambda * other;
            let scale = lhs.abs() + (d.chi * n).abs() + (d.lambda * other).abs();
            let mech = if scale > T::zero() {
                (lhs - rhs).abs() / scale
            } else {
                T::zero()
            };
            let denom = Complex::new(d.kappa, d.delta0 - sigma * d.chi * self.q_s[m]);
            let cav = if d.eps_p > T::zero() {
                (self.c_s[m] * denom - Complex::new(d.eps_p, T::zero())).modulus() / d.eps_p
            } else {
                self.c_s[m].modulus()
            };
            worst = worst.max(mech).max(cav);
        }
        worst
    }

    pub fn total_intensity(&self) -> T {
        self.intensity[0] + self.intensity[1]
    }
}

/// Which root to linearize around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    #[default]
    Physical,
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions<T> {
    /// Absolute root tolerance in dimensionless mirror position.
    pub root_abs_tol: T,
    /// Relative residual every accepted root must meet.
    pub residual_rel_tol: T,
    /// Step budget of the power continuation.
    pub max_continuation_steps: usize,
}

impl<T: Real> Default for SteadyStateOptions<T> {
    fn default() -> Self {
        SteadyStateOptions {
            root_abs_tol: T::lit(1e-12),
            residual_rel_tol: T::tolerance(1e-10, 1e3),
            max_continuation_steps: 20_000,
        }
    }
}

/// Reduced two-variable steady-state system in normalized shifts `x_m`.
#[derive(Debug, Clone, Copy)]
struct Reduced<T> {
    beta: T,
    delta: T,
    t: T,
}

impl<T: Real> Reduced<T> {
    fn new(d: &DerivedParams<T>) -> Self {
        let s0: T = d.pressure_sign.sign(0);
        let s1: T = d.pressure_sign.sign(1);
        let a = d.chi * d.eps_p / d.kappa;
        Reduced {
            beta: a * a / (d.kappa * d.omega_m),
            delta: d.delta0 / d.kappa,
            t: s0 * s1 * d.lambda / d.omega_m,
        }
    }

    fn lorentz(&self, x: T) -> T {
        let u = self.delta - x;
        T::one() / (T::one() + u * u)
    }

    fn lorentz_slope(&self, x: T) -> T {
        let u = self.delta - x;
        let den = T::one() + u * u;
        T::lit(2.0) * u / (den * den)
    }

    /// Residual of both balance equations with the drive scaled by `s`.
    fn residual(&self, x: [T; 2], s: T) -> [T; 2] {
        let b = self.beta * s;
        [
            x[0] - self.t * x[1] - b * self.lorentz(x[0]),
            x[1] - self.t * x[0] - b * self.lorentz(x[1]),
        ]
    }

    fn jacobian(&self, x: [T; 2], s: T) -> [[T; 2]; 2] {
        let b = self.beta * s;
        [
            [T::one() - b * self.lorentz_slope(x[0]), -self.t],
            [-self.t, T::one() - b * self.lorentz_slope(x[1])],
        ]
    }

    fn rel_residual(&self, x: [T; 2], s: T) -> T {
        let r = self.residual(x, s);
        let b = self.beta * s;
        let mut worst = T::zero();
        for m in 0..2 {
            let scale = x[m].abs() + (self.t * x[1 - m]).abs() + b * self.lorentz(x[m]);
            let rel = if scale > T::zero() {
                r[m].abs() / scale
            } else {
                r[m].abs()
            };
            worst = worst.max(rel);
        }
        worst
    }

    /// Typical magnitude of the shifts; all roots satisfy |x| <= beta / (1 − |t|).
    fn scale(&self, s: T) -> T {
        self.beta * s / (T::one() - self.t.abs())
    }

    fn newton(&self, mut x: [T; 2], s: T, tol: T, max_iter: usize) -> Option<([T; 2], usize)> {
        for iter in 1..=max_iter {
            let r = self.residual(x, s);
            let j = self.jacobian(x, s);
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det == T::zero() || !det.is_finite() {
                return None;
            }
            let dx0 = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
            let dx1 = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
            x = [x[0] - dx0, x[1] - dx1];
            if !(x[0].is_finite() && x[1].is_finite()) {
                return None;
            }
            let floor = T::lit(16.0) * T::eps();
            let done = (0..2).all(|m| {
                let step = if m == 0 { dx0 } else { dx1 };
                step.abs() <= tol.max(floor * (x[m].abs() + self.scale(s)))
            });
            if done {
                return Some((x, iter));
            }
        }
        None
    }

    /// Cubic `(y − a) (1 + (delta − y)^2) − b` whose roots solve one balance
    /// equation for its own shift given the other's contribution `a`.
    fn cubic(&self, a: T, b: T) -> Poly<T> {
        let d = self.denominator();
        Poly::new(vec![-a, T::one()])
            .mul(&d)
            .sub(&Poly::constant(b))
    }

    /// `1 + (delta − x)^2` as a polynomial in `x`.
    fn denominator(&self) -> Poly<T> {
        Poly::new(vec![
            T::one() + self.delta * self.delta,
            -T::lit(2.0) * self.delta,
            T::one(),
        ])
    }

    /// Degree-9 polynomial in `x_1` obtained by eliminating `x_2`.
    fn resultant(&self, s: T) -> Poly<T> {
        let b = self.beta * s;
        let t = self.t;
        let d1 = self.denominator();
        let x = Poly::new(vec![T::zero(), T::one()]);
        let n = x.mul(&d1).sub(&Poly::constant(b));
        let td1 = d1.scale(t);
        let inner = td1.scale(self.delta).sub(&n);
        let w = td1.mul(&td1).add(&inner.mul(&inner));
        let lhs = n.sub(&x.mul(&d1).scale(t * t)).mul(&w);
        let rhs = d1.mul(&d1).mul(&d1).scale(b * t * t * t);
        lhs.sub(&rhs)
    }

    /// Every real root of the system at drive scale `s`.
    fn enumerate(&self, s: T, tol: T, residual_tol: T) -> Vec<[T; 2]> {
        let b = self.beta * s;
        if b == T::zero() {
            return vec![[T::zero(), T::zero()]];
        }
        let imag_tol = T::lit(1e-5);
        let mut seeds: Vec<[T; 2]> = Vec::new();
        let decoupled = self.cubic(T::zero(), b).real_roots(imag_tol);
        for &a in &decoupled {
            for &c in &decoupled {
                seeds.push([a, c]);
            }
        }
        if self.t != T::zero() {
            let d1 = self.denominator();
            for x1 in self.resultant(s).real_roots(imag_tol) {
                let den = d1.eval(x1);
                seeds.push([x1, (x1 * den - b) / (self.t * den)]);
                for x2 in self.cubic(self.t * x1, b).real_roots(imag_tol) {
                    seeds.push([x1, x2]);
                }
            }
        }

        let dedup = T::lit(1e-7) * self.scale(s) + tol;
        let mut roots: Vec<[T; 2]> = Vec::new();
        for seed in seeds {
            let Some((x, _)) = self.newton(seed, s, tol, 100) else {
                continue;
            };
            if self.rel_residual(x, s) > residual_tol {
                continue;
            }
            let duplicate = roots
                .iter()
                .any(|r| (r[0] - x[0]).abs() <= dedup && (r[1] - x[1]).abs() <= dedup);
            if !duplicate {
                roots.push(x);
            }
        }
        roots
    }

    /// Follows the root connected to `x = 0` while the drive is ramped from
    /// zero to full power. At a fold of the followed branch the state jumps
    /// to the nearest surviving statically stable root.
    fn continue_from_zero(&self, tol: T, residual_tol: T, max_steps: usize) -> Result<[T; 2]> {
        let mut s = T::zero();
        let mut x = [T::zero(), T::zero()];
        let mut ds = T::lit(1.0 / 32.0);
        let ds_min = T::lit(1e-9);
        let det = |x: [T; 2], s: T| {
            let j = self.jacobian(x, s);
            j[0][0] * j[1][1] - j[0][1] * j[1][0]
        };
        for _ in 0..max_steps {
            if s >= T::one() {
                return Ok(x);
            }
            let step = ds.min(T::one() - s);
            let s_next = s + step;
            // Euler predictor along dx/ds = J^{-1} beta g(x).
            let j = self.jacobian(x, s);
            let dj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let f = [
                self.beta * self.lorentz(x[0]),
                self.beta * self.lorentz(x[1]),
            ];
            let tangent = [
                (j[1][1] * f[0] - j[0][1] * f[1]) / dj,
                (j[0][0] * f[1] - j[1][0] * f[0]) / dj,
            ];
            let pred = [x[0] + tangent[0] * step, x[1] + tangent[1] * step];
            let accepted = self.newton(pred, s_next, tol, 8).filter(|(xn, _)| {
                // Crossing det J = 0 means the corrector slid past a fold.
                det(*xn, s_next) * dj > T::zero() && self.rel_residual(*xn, s_next) <= residual_tol
            });
            match accepted {
                Some((xn, iters)) => {
                    x = xn;
                    s = s_next;
                    if iters <= 3 {
                        ds = (ds * T::lit(1.5)).min(T::lit(0.125));
                    }
                }
                None if step > ds_min => ds = step * T::lit(0.5),
                None => {
                    // Fold: the followed branch ends here.
                    let s_jump = (s + T::lit(1e-6)).min(T::one());
                    let candidates = self.enumerate(s_jump, tol, residual_tol);
                    let stable: Vec<_> = candidates
                        .iter()
                        .copied()
                        .filter(|c| det(*c, s_jump) > T::zero())
                        .collect();
                    let pool = if stable.is_empty() {
                        &candidates
                    } else {
                        &stable
                    };
                    let nearest = pool.iter().copied().min_by(|a, b| {
                        let da = (a[0] - x[0]).abs() + (a[1] - x[1]).abs();
                        let db = (b[0] - x[0]).abs() + (b[1] - x[1]).abs();
                        da.partial_cmp(&db).unwrap()
                    });
                    let Some(next) = nearest else {
                        return Err(Error::NoConvergence {
                            reason: format!(
                                "no root beyond fold at drive fraction {:e}",
                                s.as_f64()
                            ),
                            residual: self.rel_residual(x, s).as_f64(),
                        });
                    };
                    x = next;
                    s = s_jump;
                    ds = T::lit(1.0 / 64.0);
                }
            }
        }
        Err(Error::NoConvergence {
            reason: format!(
                "continuation budget exhausted at drive fraction {:e}",
                s.as_f64()
            ),
            residual: self.rel_residual(x, s).as_f64(),
        })
    }
}

fn working_point<T: Real>(d: &DerivedParams<T>, x: [T; 2]) -> WorkingPoint<T> {
    let mut wp = WorkingPoint {
        q_s: [T::zero(); 2],
        p_s: [T::zero(); 2],
        c_s: [Complex::new(T::zero(), T::zero()); 2],
        intensity: [T::zero(); 2],
        delta_eff: [T::zero(); 2],
        coupling: [T::zero(); 2],
        pressure_sign: d.pressure_sign,
        root_index: 0,
        is_physical_branch: false,
    };
    let sqrt2 = T::lit(2.0).sqrt();
    for m in 0..2 {
        let sigma: T = d.pressure_sign.sign(m);
        wp.q_s[m] = sigma * d.kappa * x[m] / d.chi;
        let de = d.delta0 - d.kappa * x[m];
        let den = d.kappa * d.kappa + de * de;
        wp.delta_eff[m] = de;
        wp.c_s[m] = Complex::new(d.eps_p * d.kappa / den, -d.eps_p * de / den);
        wp.intensity[m] = d.eps_p * d.eps_p / den;
        wp.coupling[m] = sqrt2 * d.chi * wp.intensity[m].sqrt();
    }
    wp
}

/// Every real steady state, sorted by total intracavity photon number, with
/// exactly one root flagged as the physical branch.
pub fn solve_steady_state<T: Real>(
    d: &DerivedParams<T>,
    opts: &SteadyStateOptions<T>,
) -> Result<Vec<WorkingPoint<T>>> {
    if d.lambda.abs() >= d.omega_m {
        return Err(Error::Convention(
            "|lambda| must be below omega_m for a confining steady state".into(),
        ));
    }
    let sys = Reduced::new(d);
    let tol = opts.root_abs_tol * d.chi / d.kappa;
    let rtol = opts.residual_rel_tol;
    let mut roots = sys.enumerate(T::one(), tol, rtol);
    let physical = sys.continue_from_zero(tol, rtol, opts.max_continuation_steps)?;

    let dedup = T::lit(1e-7) * sys.scale(T::one()) + tol;
    let matched = roots
        .iter()
        .position(|r| (r[0] - physical[0]).abs() <= dedup && (r[1] - physical[1]).abs() <= dedup);
    let physical_pos = match matched {
        Some(i) => i,
        None => {
            roots.push(physical);
            roots.len() - 1
        }
    };

    let mut points: Vec<(bool, WorkingPoint<T>)> = roots
        .iter()
        .enumerate()
        .map(|(i, &x)| (i == physical_pos, working_point(d, x)))
        .collect();
    points.sort_by(|a, b| {
        let ka = (a.1.total_intensity(), a.1.intensity[0]);
        let kb = (b.1.total_intensity(), b.1.intensity[0]);
        ka.partial_cmp(&kb).unwrap()
    });
    let mut out = Vec::with_capacity(points.len());
    for (i, (phys, mut wp)) in points.into_iter().enumerate() {
        wp.root_index = i;
        wp.is_physical_branch = phys;
        let res = wp.residual(d);
        if !(res <= rtol) {
            return Err(Error::NoConvergence {
                reason: format!("root {i} fails the residual gate"),
                residual: res.as_f64(),
            });
        }
        out.push(wp);
    }
    Ok(out)
}

pub fn select_working_point<T: Real>(
    roots: &[WorkingPoint<T>],
    policy: BranchPolicy,
) -> Result<WorkingPoint<T>> {
    match policy {
        BranchPolicy::Physical => {
            roots
                .iter()
                .find(|r| r.is_physical_branch)
                .copied()
                .ok_or(Error::IndexOutOfRange {
                    index: 0,
                    len: roots.len(),
                })
        }
        BranchPolicy::Index(k) => roots.get(k).copied().ok_or(Error::IndexOutOfRange {
            index: k,
            len: roots.len(),
        }),
    }
}
