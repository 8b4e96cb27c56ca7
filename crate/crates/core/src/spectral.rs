//! Dirichlet spectrum of the discrete operator and sign structure of
//! eigenfunctions.

use crate::discretization::{weighted_mass, FormMatrices};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, norm2, norm_inf, Matrix};
use crate::scalar::Real;

pub const DEFAULT_DEAD_ZONE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignClass {
    Positive,
    Negative,
    SignChanging,
}

impl SignClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignClass::Positive => "positive",
            SignClass::Negative => "negative",
            SignClass::SignChanging => "sign_changing",
        }
    }
}

impl std::fmt::Display for SignClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignReport<T> {
    /// Fraction of nodes with `u_i > θ‖u‖_∞`.
    pub pos_measure: T,
    /// Fraction of nodes with `u_i < −θ‖u‖_∞`.
    pub neg_measure: T,
    pub dead_zone: T,
    pub class: SignClass,
}

#[derive(Clone, Debug)]
pub struct EigenPair<T> {
    /// 1-based.
    pub index: usize,
    pub lambda: T,
    /// Normalized to `uᵀMu = 1`.
    pub vector: Vec<T>,
    pub sign: SignReport<T>,
    /// `‖Au − λMu‖ / ‖A‖_∞`.
    pub residual: T,
}

pub fn classify_sign<T: Real>(u: &[T], dead_zone: T) -> Result<SignReport<T>> {
    let top = norm_inf(u);
    if top == T::zero() || u.is_empty() {
        return Err(Error::InvalidInput("cannot classify the sign of a zero vector".into()));
    }
    let cut = dead_zone * top;
    let pos = u.iter().filter(|&&x| x > cut).count();
    let neg = u.iter().filter(|&&x| x < -cut).count();
    let class = match (pos > 0, neg > 0) {
        (true, true) => SignClass::SignChanging,
        (_, false) => SignClass::Positive,
        (false, true) => SignClass::Negative,
    };
    let n = T::of(u.len());
    Ok(SignReport {
        pos_measure: T::of(pos) / n,
        neg_measure: T::of(neg) / n,
        dead_zone,
        class,
    })
}

/// Flips `u` so that `1ᵀMu ≥ 0`; near-ties fall back to the first
/// significant entry being positive.
fn fix_sign<T: Real>(u: &mut [T], mu: &[T]) {
    let mean: T = mu.iter().copied().sum();
    let scale: T = mu.iter().map(|x| x.abs()).sum();
    let flip = if mean.abs() > T::lit(1e-10) * scale {
        mean < T::zero()
    } else {
        let top = norm_inf(u);
        u.iter()
            .find(|x| x.abs() > T::lit(1e-3) * top)
            .is_some_and(|&x| x < T::zero())
    };
    if flip {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

fn pairs_from<T: Real>(
    a: &Matrix<T>,
    m: &Matrix<T>,
    k: usize,
) -> Result<Vec<(T, Vec<T>, T)>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("requested {k} eigenpairs of an {n}-dimensional problem")));
    }
    let eig = generalized_eigen(a, m)?;
    let anorm = a.norm_inf();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut u = eig.vector(j);
        let mu = m.matvec(&u);
        fix_sign(&mut u, &mu);
        let lam = eig.values[j];
        let au = a.matvec(&u);
        let mu = m.matvec(&u);
        let r: Vec<T> = au.iter().zip(&mu).map(|(&x, &y)| x - lam * y).collect();
        out.push((lam, u, norm2(&r) / anorm));
    }
    Ok(out)
}

/// First `k` eigenpairs of `(A, M)` in ascending order, `M`-orthonormal.
pub fn solve_eig<T: Real>(forms: &FormMatrices<T>, k: usize) -> Result<Vec<EigenPair<T>>> {
    pairs_from(&forms.a, &forms.mass, k)?
        .into_iter()
        .enumerate()
        .map(|(j, (lambda, vector, residual))| {
            Ok(EigenPair {
                index: j + 1,
                lambda,
                sign: classify_sign(&vector, T::lit(DEFAULT_DEAD_ZONE))?,
                vector,
                residual,
            })
        })
        .collect()
}

/// Pairs `A u = μ M_a u` of the weighted problem `L u = μ a u`.
pub fn weighted_solve<T: Real>(forms: &FormMatrices<T>, weight: &[T], k: usize) -> Result<Vec<(T, Vec<T>)>> {
    let ma = weighted_mass(&forms.mesh, weight)?;
    Ok(pairs_from(&forms.a, &ma, k)?
        .into_iter()
        .map(|(mu, u, _)| (mu, u))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_mesh, Domain, QuadratureSpec};

    fn forms(n: usize) -> FormMatrices<f64> {
        let mesh = build_mesh(Domain::unit_interval(), n).unwrap();
        assemble(&mesh, &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn sign_classes() {
        let r = classify_sign(&[0.1, 0.5, 0.2], 1e-6).unwrap();
        assert_eq!(r.class, SignClass::Positive);
        let r = classify_sign(&[-0.1f64, -0.5, -1e-9], 1e-6).unwrap();
        assert_eq!(r.class, SignClass::Negative);
        assert!((r.neg_measure - 2.0 / 3.0).abs() < 1e-15);
        let r = classify_sign(&[-0.1, 0.5, 0.0], 1e-6).unwrap();
        assert_eq!(r.class, SignClass::SignChanging);
        assert!(r.pos_measure + r.neg_measure <= 1.0);
        assert!(classify_sign(&[0.0, 0.0], 1e-6).is_err());
    }

    #[test]
    fn first_eigenfunction_is_positive() {
        let f = forms(40);
        let pairs = solve_eig(&f, 4).unwrap();
        assert_eq!(pairs[0].sign.class, SignClass::Positive);
        for p in &pairs[1..] {
            assert_eq!(p.sign.class, SignClass::SignChanging);
        }
        for p in &pairs {
            assert!(p.residual < 1e-10);
            assert!((f.mass_inner(&p.vector, &p.vector) - 1.0).abs() < 1e-10);
        }
        let neg: Vec<f64> = pairs[0].vector.iter().map(|x| -x).collect();
        assert_eq!(classify_sign(&neg, 1e-6).unwrap().class, SignClass::Negative);
    }

    #[test]
    fn constant_weight_scales_spectrum() {
        let f = forms(24);
        let base = solve_eig(&f, 3).unwrap();
        let ones = weighted_solve(&f, &[1.0; 24], 3).unwrap();
        let threes = weighted_solve(&f, &[3.0; 24], 3).unwrap();
        for k in 0..3 {
            assert!((ones[k].0 - base[k].lambda).abs() < 1e-12);
            assert!((threes[k].0 - base[k].lambda / 3.0).abs() < 1e-12);
        }
        assert!(weighted_solve(&f, &[0.0; 24], 2).is_err());
        assert!(solve_eig(&f, 25).is_err());
    }
}
