//! Dense real polynomials (ascending coefficients) and a Laguerre root finder
//! with deflation.

use nalgebra::{Complex, ComplexField};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    /// `coeffs[k]` multiplies `x^k`.
    pub coeffs: Vec<T>,
}

impl<T: Real> Poly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == T::zero() {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(T::zero());
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |p: &Self, i: usize| p.coeffs.get(i).copied().unwrap_or_else(T::zero);
        Poly::new((0..n).map(|i| get(self, i) + get(other, i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// All complex roots, each polished against the undeflated polynomial.
    pub fn roots(&self) -> Vec<Complex<T>> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let full: Vec<Complex<T>> = self
            .coeffs
            .iter()
            .map(|&c| Complex::new(c, T::zero()))
            .collect();
        let mut work = full.clone();
        let mut roots = Vec::with_capacity(n);
        for deg in (1..=n).rev() {
            let mut x = Complex::new(T::zero(), T::zero());
            laguerre(&work[..=deg], &mut x);
            // Synthetic division by (z - x).
            let mut carry = work[deg];
            for j in (0..deg).rev() {
                let next = work[j];
                work[j] = carry;
                carry = next + x * carry;
            }
            work.truncate(deg);
            roots.push(x);
        }
        for r in roots.iter_mut() {
            laguerre(&full, r);
        }
        roots
    }

    /// Real roots: complex roots whose imaginary part is negligible.
    pub fn real_roots(&self, imag_tol: T) -> Vec<T> {
        let mut out: Vec<T> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= imag_tol * (T::one() + z.re.abs()))
            .map(|z| z.re)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

const FRACTIONS: [f64; 9] = [0.0, 0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0];

/// Laguerre iteration for one root of `a` (ascending coefficients), in place.
fn laguerre<T: Real>(a: &[Complex<T>], x: &mut Complex<T>) {
    let m = a.len() - 1;
    if m == 0 {
        return;
    }
    let mf = T::lit(m as f64);
    let eps = T::eps();
    const STEPS_PER_FRACTION: usize = 10;
    for iter in 1..=STEPS_PER_FRACTION * (FRACTIONS.len() - 1) {
        let mut b = a[m];
        let mut err = b.modulus();
        let mut d = Complex::new(T::zero(), T::zero());
        let mut f = d;
        let abx = x.modulus();
        for j in (0..m).rev() {
            f = *x * f + d;
            d = *x * d + b;
            b = *x * b + a[j];
            err = b.modulus() + abx * err;
        }
        if b.modulus() <= err * eps {
            return;
        }
        let g = d / b;
        let g2 = g * g;
        let h = g2 - f * T::lit(2.0) / b;
        let sq = ComplexField::sqrt((h * mf - g2) * T::lit((m - 1) as f64));
        let gp = g + sq;
        let gm = g - sq;
        let (abp, abm) = (gp.modulus(), gm.modulus());
        let denom = if abp < abm { gm } else { gp };
        let dx = if abp.max(abm) > T::zero() {
            Complex::new(mf, T::zero()) / denom
        } else {
            let r = T::one() + abx;
            let t = T::lit(iter as f64);
            Complex::new(r * t.cos(), r * t.sin())
        };
        let x1 = *x - dx;
        if x1 == *x {
            return;
        }
        if iter % STEPS_PER_FRACTION != 0 {
            *x = x1;
        } else {
            *x -= dx * T::lit(FRACTIONS[iter / STEPS_PER_FRACTION]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Poly::new(vec![1.0, 2.0]);
        let b = Poly::new(vec![-1.0, 0.0, 3.0]);
        assert_eq!(a.mul(&b).coeffs, vec![-1.0, -2.0, 3.0, 6.0]);
        assert_eq!(a.add(&b).coeffs, vec![0.0, 2.0, 3.0]);
        assert_eq!(a.sub(&a).coeffs, vec![0.0]);
        assert_eq!(b.eval(2.0), 11.0);
    }

    #[test]
    fn roots_of_known_cubic() {
        // (x - 1)(x + 2)(x - 3.5)
        let p = Poly::new(vec![-1.0, 1.0])
            .mul(&Poly::new(vec![2.0, 1.0]))
            .mul(&Poly::new(vec![-3.5, 1.0]));
        let r = p.real_roots(1e-8);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.5]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_pair_is_not_real() {
        // (x^2 + 1)(x - 0.25)
        let p = Poly::new(vec![1.0, 0.0, 1.0]).mul(&Poly::new(vec![-0.25, 1.0]));
        assert_eq!(p.roots().len(), 3);
        let r = p.real_roots(1e-8);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn degree_nine_product() {
        let targets = [-3.0, -1.5, -0.2, 0.1, 0.7, 1.1, 2.0, 4.0, 9.0];
        let p = targets.iter().fold(Poly::constant(1.0), |acc, &t| {
            acc.mul(&Poly::new(vec![-t, 1.0]))
        });
        let r = p.real_roots(1e-8);
        assert_eq!(r.len(), 9);
        for (got, want) in r.iter().zip(targets) {
            assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }
}
