//! The functional `Ẽ_r(u) = E(u,u) − r ∫ (ũ⁺)²` on the unit sphere of
//! `L²(Ω)`, its mountain-pass value `c(r)` and the first nontrivial curve
//! `{(r + c(r), c(r))} ∪ {(c(r), r + c(r))}` of the Fučík spectrum.

mod curve;
mod newton;
mod path;
mod string;

pub use curve::{mountain_pass, randomized_restarts, trace_curve, CurveResult, FucikPoint, MountainPass, MountainPassOptions};
pub use newton::{verify_pair, verify_pair_with, NewtonOptions, VerifyOutcome};
pub use path::{initial_path, PathEnsemble};
pub use string::{relax_string, Landscape, StringOptions, StringOutcome};

use crate::discretization::{sign_split, FormMatrices};
use crate::error::{check_len, Error, Result};
use crate::linalg::{norm2, Cholesky};
use crate::scalar::Real;

/// Inner product in which gradients are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GradientMetric {
    /// Diagonal `∫ φ_i`; no linear solve per evaluation.
    #[default]
    Lumped,
    Consistent,
}

/// `Ẽ_r` for a fixed offset `r ≥ 0`.
#[derive(Clone, Debug)]
pub struct FucikFunctional<'a, T> {
    pub forms: &'a FormMatrices<T>,
    pub r: T,
    metric: GradientMetric,
    chol: Option<Cholesky<T>>,
}

/// Energy, multiplier and gradients at one point.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub energy: T,
    /// `t = E(u) / ‖ũ‖²`.
    pub multiplier: T,
    /// `2(Au − rP(u) − tMu)`, the nodal residual.
    pub residual: Vec<T>,
    /// Residual represented in the gradient metric.
    pub gradient: Vec<T>,
}

impl<'a, T: Real> FucikFunctional<'a, T> {
    pub fn new(forms: &'a FormMatrices<T>, r: T) -> Result<Self> {
        Self::with_metric(forms, r, GradientMetric::Lumped)
    }

    pub fn with_metric(forms: &'a FormMatrices<T>, r: T, metric: GradientMetric) -> Result<Self> {
        if !(r >= T::zero()) || !r.is_finite() {
            return Err(Error::InvalidInput(format!("offset r must be nonnegative, got {r}")));
        }
        let chol = match metric {
            GradientMetric::Lumped => None,
            GradientMetric::Consistent => Some(Cholesky::factor(&forms.mass)?),
        };
        Ok(Self { forms, r, metric, chol })
    }

    pub fn metric(&self) -> GradientMetric {
        self.metric
    }

    /// `uᵀAu − r ∫ (ũ⁺)²`.
    pub fn energy(&self, u: &[T]) -> Result<T> {
        check_len(self.forms.n(), u.len())?;
        let split = sign_split(&self.forms.mesh, u)?;
        Ok(self.forms.a.bilinear(u, u) - self.r * split.plus_sq)
    }

    pub fn evaluate(&self, u: &[T]) -> Result<Evaluation<T>> {
        check_len(self.forms.n(), u.len())?;
        let au = self.forms.a.matvec(u);
        let mu = self.forms.mass.matvec(u);
        let split = sign_split(&self.forms.mesh, u)?;
        let energy = crate::linalg::dot(u, &au) - self.r * split.plus_sq;
        let norm_sq = crate::linalg::dot(u, &mu);
        if !(norm_sq > T::zero()) {
            return Err(Error::InvalidInput("functional evaluated at the zero vector".into()));
        }
        let multiplier = energy / norm_sq;
        let two = T::lit(2.0);
        let residual: Vec<T> = (0..u.len())
            .map(|i| two * (au[i] - self.r * split.plus_load[i] - multiplier * mu[i]))
            .collect();
        let gradient = self.represent(&residual);
        Ok(Evaluation {
            energy,
            multiplier,
            residual,
            gradient,
        })
    }

    /// `G⁻¹ v` for the gradient metric `G`.
    pub fn represent(&self, v: &[T]) -> Vec<T> {
        match &self.chol {
            Some(c) => c.solve(v),
            None => v
                .iter()
                .zip(&self.forms.lumped_mass)
                .map(|(&x, &m)| x / m)
                .collect(),
        }
    }

    /// `⟨a, b⟩_G`.
    pub fn metric_inner(&self, a: &[T], b: &[T]) -> T {
        match self.metric {
            GradientMetric::Consistent => self.forms.mass.bilinear(a, b),
            GradientMetric::Lumped => a
                .iter()
                .zip(b)
                .zip(&self.forms.lumped_mass)
                .map(|((&x, &y), &m)| x * y * m)
                .sum(),
        }
    }

    /// Tangent representative of `Ẽ_r'(u)`: it vanishes exactly at
    /// solutions of `Au − rP(u) = tMu`.
    pub fn constrained_gradient(&self, u: &[T]) -> Result<Vec<T>> {
        Ok(self.evaluate(u)?.gradient)
    }

    /// `t = E(u)/‖ũ‖²`; at a critical point `(r + t, t)` is a Fučík pair.
    pub fn lagrange_multiplier(&self, u: &[T]) -> Result<T> {
        Ok(self.evaluate(u)?.multiplier)
    }

    /// Euclidean norm of the nodal residual.
    pub fn residual_norm(&self, u: &[T]) -> Result<T> {
        Ok(norm2(&self.evaluate(u)?.residual))
    }

    /// Scales `u` onto the unit sphere of `L²(Ω)`.
    pub fn normalize(&self, u: &mut [T]) -> Result<()> {
        let norm = self.forms.mass_norm(u);
        if !(norm > T::zero()) {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        u.iter_mut().for_each(|x| *x /= norm);
        Ok(())
    }

    /// Step length for explicit descent: inverse of a Gershgorin bound on
    /// the Hessian `2 G⁻¹(A − rM₊ − tM)`.
    pub(crate) fn default_step(&self) -> T {
        let a = &self.forms.a;
        let bound = match self.metric {
            GradientMetric::Lumped => (0..a.dim())
                .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<T>() / self.forms.lumped_mass[i])
                .fold(T::zero(), T::max),
            GradientMetric::Consistent => {
                let minm = self.forms.lumped_mass.iter().copied().fold(T::infinity(), T::min);
                a.norm_inf() / minm
            }
        };
        T::one() / (T::lit(2.0) * (bound + self.r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_mesh, Domain, QuadratureSpec};
    use crate::spectral::solve_eig;

    fn forms(n: usize) -> FormMatrices<f64> {
        let mesh = build_mesh(Domain::unit_interval(), n).unwrap();
        assemble(&mesh, &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn endpoint_energies() {
        let f = forms(32);
        let eig = solve_eig(&f, 2).unwrap();
        let phi = &eig[0].vector;
        let lam = eig[0].lambda;
        let neg: Vec<f64> = phi.iter().map(|x| -x).collect();
        for r in [0.0, 0.7, 3.0] {
            let fun = FucikFunctional::new(&f, r).unwrap();
            assert!((fun.energy(phi).unwrap() - (lam - r)).abs() < 1e-12);
            assert!((fun.energy(&neg).unwrap() - lam).abs() < 1e-12);
            assert!(norm2(&fun.constrained_gradient(phi).unwrap()) < 1e-8);
            assert!(norm2(&fun.constrained_gradient(&neg).unwrap()) < 1e-8);
            assert!((fun.lagrange_multiplier(phi).unwrap() - (lam - r)).abs() < 1e-12);
            assert!((fun.lagrange_multiplier(&neg).unwrap() - lam).abs() < 1e-12);
        }
        let fun = FucikFunctional::new(&f, 0.0).unwrap();
        assert!((fun.lagrange_multiplier(&eig[1].vector).unwrap() - eig[1].lambda).abs() < 1e-12);
    }

    #[test]
    fn negative_offset_rejected() {
        let f = forms(8);
        assert!(FucikFunctional::new(&f, -1.0).is_err());
    }
}
