//! Gaussian rules on the unit interval via Golub–Welsch.

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use crate::scalar::Real;
use crate::special::gamma;

/// Nodes and weights of a rule on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Rule transported to `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> Self {
        let h = b - a;
        Self {
            nodes: self.nodes.iter().map(|&x| a + h * x).collect(),
            weights: self.weights.iter().map(|&w| w * h).collect(),
        }
    }

    fn cast(rule: GaussRule<f64>) -> Self {
        Self {
            nodes: rule.nodes.into_iter().map(T::lit).collect(),
            weights: rule.weights.into_iter().map(T::lit).collect(),
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[0, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<GaussRule<T>> {
    gauss_jacobi(n, 0.0)
}

/// `n`-point rule on `[0, 1]` exact for `x^a p(x)` with `deg p ≤ 2n − 1`.
pub fn gauss_jacobi<T: Real>(n: usize, a: f64) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::Quadrature(format!("weight exponent must exceed -1, got {a}")));
    }
    // Jacobi weight (1-t)^0 (1+t)^a on [-1, 1], t = 2x - 1
    let (al, be) = (0.0f64, a);
    let ab = al + be;
    let mut diag = vec![0.0f64; n];
    let mut off = vec![0.0f64; n - 1];
    diag[0] = (be - al) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        diag[k] = (be * be - al * al) / (s * (s + 2.0));
        let num = 4.0 * kf * (kf + al) * (kf + be) * (kf + ab);
        off[k - 1] = (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(al + 1.0) * gamma(be + 1.0) / gamma(ab + 2.0);
    let eig = tridiagonal_eigen(&diag, &off)?;
    // map to [0,1]: x = (t+1)/2, weight x^a = 2^-a (1+t)^a, dx = dt/2
    let scale = 2f64.powf(-a - 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.vectors[(0, k)];
            ((eig.values[k] + 1.0) / 2.0, mu0 * v0 * v0 * scale)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let rule = GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    };
    Ok(GaussRule::cast(rule))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_moments() {
        for n in 1..=20 {
            let r: GaussRule<f64> = gauss_legendre(n).unwrap();
            for k in 0..(2 * n) {
                let got = r.integrate(|x| x.powi(k as i32));
                let exact = 1.0 / (k as f64 + 1.0);
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}");
            }
            assert!(r.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
            assert!(r.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn jacobi_moments() {
        for &a in &[-0.5, 0.0, 1.0, 2.0, 1.4, 3.0, -0.9] {
            for n in [1usize, 3, 8, 16] {
                let r: GaussRule<f64> = gauss_jacobi(n, a).unwrap();
                for k in 0..(2 * n) {
                    let got = r.integrate(|x| x.powi(k as i32));
                    let exact = 1.0 / (k as f64 + a + 1.0);
                    assert!((got - exact).abs() < 1e-12 * exact.max(1.0), "a={a} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn log_weighted_integral() {
        // ∫_0^1 ln(x) x^2 dx = -1/9 is not polynomial; check convergence only
        let r: GaussRule<f64> = gauss_legendre(40).unwrap();
        let got = r.integrate(|x| x.ln() * x * x);
        assert!((got + 1.0 / 9.0).abs() < 1e-5);
    }

    #[test]
    fn mapped_interval() {
        let r: GaussRule<f64> = gauss_legendre(4).unwrap();
        let m = r.mapped(-1.0, 3.0);
        assert!((m.integrate(|x| x * x * x) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_rules() {
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_jacobi::<f64>(3, -1.0).is_err());
    }
}
