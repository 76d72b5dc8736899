//! Routh-Hurwitz stability of the drift matrix in exact integer arithmetic.
//!
//! Every finite float is an integer times a power of two, so after one common
//! shift the drift matrix is an integer matrix `B = 2^-e A` with the same
//! stability as `A`. Its characteristic polynomial (Berkowitz, division
//! free) and the Hurwitz minors (Bareiss, fraction free) are then computed
//! exactly, and the verdict carries no rounding error at all.

use num_bigint::BigInt;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use super::{LinearModel, DIM};
use crate::scalar::Real;

/// One named inequality of a stability criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    /// Left-hand side of `value > 0`, in units of the model time scale. For
    /// the derived set this is a float rendering of an exact quantity and
    /// can over/underflow; `satisfied` is always exact.
    pub value: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouthHurwitz {
    /// Conditions derived from the characteristic polynomial of the drift
    /// matrix: static confinement `a_n > 0`, coefficient positivity, and the
    /// Hurwitz leading minors.
    pub derived: Vec<Condition>,
    /// Printed three-condition set under the symbol mapping m1 = m2 = 1,
    /// omega_1 = omega_2 = omega_m, G_i = |kappa + i Delta_i|. Empty for
    /// models without a working point.
    pub printed: Vec<Condition>,
}

impl RouthHurwitz {
    /// All roots in the open left half plane iff every Hurwitz minor is positive.
    pub fn is_stable(&self) -> bool {
        self.derived
            .iter()
            .filter(|c| c.name.starts_with("hurwitz_minor"))
            .all(|c| c.satisfied)
    }
}

pub fn routh_hurwitz<T: Real>(model: &LinearModel<T>) -> RouthHurwitz {
    let entries: Vec<f64> = model.drift.iter().map(|v| v.as_f64()).collect();
    let (int_matrix, exponent) = to_integer_matrix(&entries);
    let charpoly = berkowitz(&int_matrix);

    // Float rendering of the coefficients of det(sI - A/scale), for reporting.
    let scale = model.time_scale().as_f64();
    let log2_factor = exponent as f64 - scale.log2();
    let normalized: Vec<f64> = charpoly
        .iter()
        .enumerate()
        .map(|(k, c)| big_to_f64_scaled(c, log2_factor * k as f64))
        .collect();

    let n = DIM;
    let mut derived = Vec::with_capacity(2 * n + 1);
    derived.push(Condition {
        name: "static_confinement(a8 = det(-A) > 0)".into(),
        value: normalized[n],
        satisfied: charpoly[n].is_positive(),
    });
    for k in 1..n {
        derived.push(Condition {
            name: format!("coefficient_a{k} > 0"),
            value: normalized[k],
            satisfied: charpoly[k].is_positive(),
        });
    }
    let hurwitz_int = hurwitz_matrix(&charpoly);
    let hurwitz_float = hurwitz_matrix(&normalized);
    for k in 1..=n {
        let exact = bareiss_det(&leading(&hurwitz_int, k));
        derived.push(Condition {
            name: format!("hurwitz_minor_{k} > 0"),
            value: float_det(&leading(&hurwitz_float, k)),
            satisfied: exact.is_positive(),
        });
    }

    let printed = match &model.origin {
        Some((wp, d)) => {
            let w = d.omega_m.as_f64();
            let lam = d.lambda.as_f64();
            let f1 = wp.coupling[0].as_f64();
            let g = |m: usize| d.kappa.as_f64().hypot(wp.delta_eff[m].as_f64());
            let (g1, g2) = (g(0), g(1));
            let w4 = w.powi(4);
            let values = [
                lam * lam - w4,
                g1 * (f1 * f1 * w * w - g1 * lam * lam + g1 * w4),
                g1 * g2 * g2 * (g1 * lam * lam - f1 * f1 * w * w - g1 * w4),
            ];
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| Condition {
                    name: format!("printed_{}", i + 1),
                    value: v,
                    satisfied: v > 0.0,
                })
                .collect()
        }
        None => Vec::new(),
    };
    RouthHurwitz { derived, printed }
}

/// Exact integer matrix `B` and exponent `e` with `A = 2^e B`.
fn to_integer_matrix(entries: &[f64]) -> (Vec<Vec<BigInt>>, i32) {
    let decoded: Vec<(u64, i32, i8)> = entries
        .iter()
        .map(|&v| {
            let (m, e, s) = Float::integer_decode(v);
            (m, e as i32, s)
        })
        .collect();
    let e_min = decoded
        .iter()
        .filter(|(m, _, _)| *m != 0)
        .map(|&(_, e, _)| e)
        .min()
        .unwrap_or(0);
    let ints: Vec<BigInt> = decoded
        .iter()
        .map(|&(m, e, s)| {
            if m == 0 {
                BigInt::zero()
            } else {
                let v = BigInt::from(m) << ((e - e_min) as usize);
                if s < 0 {
                    -v
                } else {
                    v
                }
            }
        })
        .collect();
    // nalgebra iterates column-major.
    let rows = (0..DIM)
        .map(|i| (0..DIM).map(|j| ints[j * DIM + i].clone()).collect())
        .collect();
    (rows, e_min)
}

/// Coefficients `[1, c1, ..., cn]` of `det(sI − B) = s^n + c1 s^(n−1) + ... + cn`.
fn berkowitz(b: &[Vec<BigInt>]) -> Vec<BigInt> {
    let n = b.len();
    let mut poly = vec![BigInt::from(1)];
    for k in 0..n {
        // Partition the leading (k+1)x(k+1) block as [[A_k, C], [R, a]].
        let a = &b[k][k];
        let r: Vec<&BigInt> = (0..k).map(|j| &b[k][j]).collect();
        let mut v: Vec<BigInt> = (0..k).map(|i| b[i][k].clone()).collect();
        // Toeplitz first column: 1, −a, −R C, −R A_k C, ..., −R A_k^(k−1) C.
        let mut col = Vec::with_capacity(k + 2);
        col.push(BigInt::from(1));
        col.push(-a.clone());
        for _ in 0..k {
            let rv: BigInt = r.iter().zip(&v).map(|(x, y)| *x * y).sum();
            col.push(-rv);
            v = (0..k)
                .map(|i| (0..k).map(|j| &b[i][j] * &v[j]).sum())
                .collect();
        }
        let next: Vec<BigInt> = (0..k + 2)
            .map(|i| {
                (0..=k.min(i))
                    .filter(|&j| i - j < col.len())
                    .map(|j| &col[i - j] * &poly[j])
                    .sum()
            })
            .collect();
        poly = next;
    }
    poly
}

/// Hurwitz matrix `H[i][j] = a_(2j − i + 1)` (0-based) of `a0 s^n + ... + an`.
fn hurwitz_matrix<C: Clone + Zero>(coeffs: &[C]) -> Vec<Vec<C>> {
    let n = coeffs.len() - 1;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = 2 * j as i64 - i as i64 + 1;
                    if (0..=n as i64).contains(&k) {
                        coeffs[k as usize].clone()
                    } else {
                        C::zero()
                    }
                })
                .collect()
        })
        .collect()
}

fn leading<C: Clone>(m: &[Vec<C>], k: usize) -> Vec<Vec<C>> {
    m[..k].iter().map(|row| row[..k].to_vec()).collect()
}

/// Exact determinant by fraction-free Gaussian elimination.
fn bareiss_det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    if sign < 0 {
        -a[n - 1][n - 1].clone()
    } else {
        a[n - 1][n - 1].clone()
    }
}

fn float_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

/// `x * 2^log2_scale` as an f64 without intermediate overflow.
fn big_to_f64_scaled(x: &BigInt, log2_scale: f64) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits() as i64;
    let shift = (bits - 60).max(0);
    let mantissa = (x >> shift as usize).to_f64().unwrap_or(f64::NAN);
    mantissa * (shift as f64 + log2_scale).exp2()
}
