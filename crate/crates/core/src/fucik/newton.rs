//! Semismooth Newton for `Au − αP(u) + βN(u) = μMu`, `‖ũ‖₂ = 1`.

use crate::discretization::{sign_mass, sign_split, FormMatrices};
use crate::error::{check_len, Error, Result};
use crate::linalg::{dot, lu_solve, norm2, Matrix};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions<T> {
    pub max_iter: usize,
    /// Stop when `‖F‖ ≤ tol·‖Au‖`.
    pub tol: T,
    /// Backtracking factor.
    pub damping: T,
    pub min_step: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 60,
            tol: T::lit(1e-14),
            damping: T::lit(0.5),
            min_step: T::lit(1e-6),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome<T> {
    /// `‖Au − αP(u) + βN(u)‖ / ‖Au‖` at the final iterate.
    pub residual: T,
    pub u: Vec<T>,
    /// Shift `μ` absorbed by the normalization constraint.
    pub shift: T,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct State<T> {
    pub u: Vec<T>,
    pub mu: T,
    /// `Au − αP + βN − μMu`.
    f: Vec<T>,
    g: T,
    au_norm: T,
}

impl<T: Real> State<T> {
    fn merit(&self) -> T {
        dot(&self.f, &self.f) + self.g * self.g
    }
}

fn state<T: Real>(forms: &FormMatrices<T>, alpha: T, beta: T, u: Vec<T>, mu: T) -> Result<State<T>> {
    let au = forms.a.matvec(&u);
    let mu_vec = forms.mass.matvec(&u);
    let split = sign_split(&forms.mesh, &u)?;
    let f = (0..u.len())
        .map(|i| au[i] - (alpha * split.plus_load[i] - beta * split.minus_load[i]) - mu * mu_vec[i])
        .collect();
    let g = (dot(&u, &mu_vec) - T::one()) / T::lit(2.0);
    Ok(State {
        au_norm: norm2(&au),
        u,
        mu,
        f,
        g,
    })
}

fn bordered<T: Real>(forms: &FormMatrices<T>, alpha: T, beta: T, s: &State<T>) -> Result<Matrix<T>> {
    let n = forms.n();
    let plus = sign_mass(&forms.mesh, &s.u, true)?;
    let minus = sign_mass(&forms.mesh, &s.u, false)?;
    let mu_vec = forms.mass.matvec(&s.u);
    Ok(Matrix::from_fn(n + 1, |i, j| match (i < n, j < n) {
        (true, true) => forms.a[(i, j)] - (alpha * plus[(i, j)] + beta * minus[(i, j)]) - s.mu * forms.mass[(i, j)],
        (true, false) => -mu_vec[i],
        (false, true) => mu_vec[j],
        (false, false) => T::zero(),
    }))
}

/// Newton iteration from `u0`. With `mu0 = None` the shift starts at the
/// least-squares value `uᵀF₀ / uᵀMu`.
pub(crate) fn solve_shifted<T: Real>(
    forms: &FormMatrices<T>,
    alpha: T,
    beta: T,
    u0: &[T],
    mu0: Option<T>,
    opts: &NewtonOptions<T>,
) -> Result<(State<T>, usize, bool)> {
    check_len(forms.n(), u0.len())?;
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite pair ({alpha}, {beta})")));
    }
    let norm = forms.mass_norm(u0);
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::InvalidInput("Newton seed must be a nonzero finite vector".into()));
    }
    let u: Vec<T> = u0.iter().map(|&x| x / norm).collect();
    let mu = match mu0 {
        Some(m) => m,
        None => {
            let s = state(forms, alpha, beta, u.clone(), T::zero())?;
            dot(&u, &s.f) / forms.mass_inner(&u, &u)
        }
    };
    let mut cur = state(forms, alpha, beta, u, mu)?;
    let n = forms.n();
    for it in 0..opts.max_iter {
        if norm2(&cur.f) <= opts.tol * cur.au_norm && cur.g.abs() <= opts.tol {
            return Ok((cur, it, true));
        }
        let jac = bordered(forms, alpha, beta, &cur)?;
        let mut rhs: Vec<T> = cur.f.iter().map(|&x| -x).collect();
        rhs.push(-cur.g);
        let step = match lu_solve(&jac, &rhs) {
            Ok(s) => s,
            Err(_) => return Ok((cur, it, false)),
        };
        let base = cur.merit();
        let mut lambda = T::one();
        let next = loop {
            let u: Vec<T> = cur.u.iter().zip(&step).map(|(&x, &d)| x + lambda * d).collect();
            let trial = state(forms, alpha, beta, u, cur.mu + lambda * step[n])?;
            if trial.merit() < base * (T::one() - T::lit(1e-4) * lambda) || trial.merit() == T::zero() {
                break Some(trial);
            }
            lambda *= opts.damping;
            if lambda < opts.min_step {
                break None;
            }
        };
        match next {
            Some(s) => cur = s,
            None => {
                let done = norm2(&cur.f) <= T::lit(1e3) * opts.tol * cur.au_norm;
                return Ok((cur, it + 1, done));
            }
        }
    }
    let done = norm2(&cur.f) <= opts.tol * cur.au_norm && cur.g.abs() <= opts.tol;
    Ok((cur, opts.max_iter, done))
}

/// Residual of `Au = αP(u) − βN(u)` after a semismooth Newton solve of the
/// normalized shifted system seeded by `u`. Small values certify that
/// `(α, β)` lies in the discrete Fučík spectrum.
pub fn verify_pair<T: Real>(forms: &FormMatrices<T>, alpha: T, beta: T, u: &[T]) -> Result<VerifyOutcome<T>> {
    verify_pair_with(forms, alpha, beta, u, &NewtonOptions::default())
}

pub fn verify_pair_with<T: Real>(
    forms: &FormMatrices<T>,
    alpha: T,
    beta: T,
    u: &[T],
    opts: &NewtonOptions<T>,
) -> Result<VerifyOutcome<T>> {
    let (s, iterations, converged) = solve_shifted(forms, alpha, beta, u, None, opts)?;
    let unshifted = state(forms, alpha, beta, s.u.clone(), T::zero())?;
    let residual = if unshifted.au_norm > T::zero() {
        norm2(&unshifted.f) / unshifted.au_norm
    } else {
        T::infinity()
    };
    Ok(VerifyOutcome {
        residual,
        u: s.u,
        shift: s.mu,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_mesh, Domain, QuadratureSpec};
    use crate::spectral::solve_eig;

    #[test]
    fn diagonal_pairs_verify_and_mirror() {
        let mesh = build_mesh(Domain::<f64>::unit_interval(), 32).unwrap();
        let f = assemble(&mesh, &QuadratureSpec::default()).unwrap();
        let eig = solve_eig(&f, 3).unwrap();
        for p in &eig {
            let v = verify_pair(&f, p.lambda, p.lambda, &p.vector).unwrap();
            assert!(v.residual < 1e-10, "{}", v.residual);
        }
        let u = &eig[1].vector;
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let a = verify_pair(&f, 5.0, 3.5, u).unwrap();
        let b = verify_pair(&f, 3.5, 5.0, &neg).unwrap();
        assert_eq!(a.residual, b.residual);
        assert!(a.residual > 1e-4);
    }
}
