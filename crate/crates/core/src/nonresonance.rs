//! Semilinear problem `L_Δ u = f(x, u)` with jumping asymptotic slopes,
//! solved as a mountain pass of `Ψ(u) = E(u,u)/2 − ∫ F(x,u)` between `±Rφ₁`.

use std::fmt;
use std::sync::Arc;

use crate::discretization::{for_each_split_point, FormMatrices, Mesh, SplitPoint};
use crate::error::{check_len, Error, Result};
use crate::fucik::{relax_string, Evaluation, Landscape, PathEnsemble, StringOptions};
use crate::linalg::{dot, lu_solve, norm2, Matrix};
use crate::quadrature::{gauss_legendre, GaussRule};
use crate::scalar::Real;
use crate::spectral::solve_eig;

pub type ScalarField<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Nonlinearity `f(x, s)`, its primitive and the slope bounds it is
/// claimed to satisfy, all bounds given at the nodes.
#[derive(Clone)]
pub struct NonlinearitySpec<T> {
    pub gamma_plus: Vec<T>,
    pub gamma_minus: Vec<T>,
    pub big_gamma_plus: Vec<T>,
    pub big_gamma_minus: Vec<T>,
    pub delta_plus: Vec<T>,
    pub delta_minus: Vec<T>,
    pub big_delta_plus: Vec<T>,
    pub big_delta_minus: Vec<T>,
    pub f: ScalarField<T>,
    /// `F(x, s) = ∫₀^s f(x, t) dt`.
    pub primitive: ScalarField<T>,
    /// `∂f/∂s`, used by the Newton polish.
    pub derivative: Option<ScalarField<T>>,
    /// `(α, β)` on the first curve.
    pub target: (T, T),
}

impl<T: Real> fmt::Debug for NonlinearitySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("nodes", &self.gamma_plus.len())
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

impl<T: Real> NonlinearitySpec<T> {
    /// `f(x,s) = q₊s⁺ − q₋s⁻ + ε·arctan(s) + κ` with bounds `q± ∓ επ/2`.
    pub fn jumping(n: usize, q_plus: T, q_minus: T, eps: T, forcing: T, target: (T, T)) -> Self {
        let half_pi = T::PI() / T::lit(2.0);
        let lo = |q: T| vec![q - eps * half_pi; n];
        let hi = |q: T| vec![q + eps * half_pi; n];
        let f: ScalarField<T> =
            Arc::new(move |_x, s| q_plus * s.max(T::zero()) + q_minus * s.min(T::zero()) + eps * s.atan() + forcing);
        let primitive: ScalarField<T> = Arc::new(move |_x, s| {
            let (p, m) = (s.max(T::zero()), s.min(T::zero()));
            let half = T::lit(0.5);
            half * (q_plus * p * p + q_minus * m * m) + eps * (s * s.atan() - half * (T::one() + s * s).ln()) + forcing * s
        });
        let derivative: ScalarField<T> = Arc::new(move |_x, s| {
            let q = if s > T::zero() { q_plus } else { q_minus };
            q + eps / (T::one() + s * s)
        });
        Self {
            gamma_plus: lo(q_plus),
            gamma_minus: lo(q_minus),
            big_gamma_plus: hi(q_plus),
            big_gamma_minus: hi(q_minus),
            delta_plus: lo(q_plus),
            delta_minus: lo(q_minus),
            big_delta_plus: hi(q_plus),
            big_delta_minus: hi(q_minus),
            f,
            primitive,
            derivative: Some(derivative),
            target,
        }
    }

    /// Checks the slope and primitive inequalities at every node, and `F`
    /// against a quadrature of `f` on sampled `(x, s)`.
    pub fn validate(&self, mesh: &Mesh<T>, lambda1: T) -> Result<()> {
        let n = mesh.n();
        for v in [
            &self.gamma_plus,
            &self.gamma_minus,
            &self.big_gamma_plus,
            &self.big_gamma_minus,
            &self.delta_plus,
            &self.delta_minus,
            &self.big_delta_plus,
            &self.big_delta_minus,
        ] {
            check_len(n, v.len())?;
        }
        let (alpha, beta) = self.target;
        let fail = |what: &str, i: usize| Err(Error::InvalidInput(format!("{what} violated at node {i}")));
        for i in 0..n {
            if !(lambda1 <= self.gamma_plus[i] && self.gamma_plus[i] < self.big_gamma_plus[i] && self.big_gamma_plus[i] <= alpha) {
                return fail("λ₁ ≤ γ₊ < Γ₊ ≤ α", i);
            }
            if !(lambda1 <= self.gamma_minus[i] && self.gamma_minus[i] < self.big_gamma_minus[i] && self.big_gamma_minus[i] <= beta) {
                return fail("λ₁ ≤ γ₋ < Γ₋ ≤ β", i);
            }
            if !(lambda1 <= self.delta_plus[i] && self.delta_plus[i] <= self.big_delta_plus[i]) {
                return fail("λ₁ ≤ δ₊ ≤ Δ₊", i);
            }
            if !(lambda1 <= self.delta_minus[i] && self.delta_minus[i] <= self.big_delta_minus[i]) {
                return fail("λ₁ ≤ δ₋ ≤ Δ₋", i);
            }
        }
        if !self.delta_plus.iter().any(|&d| d > lambda1) || !self.delta_minus.iter().any(|&d| d > lambda1) {
            return Err(Error::InvalidInput("δ± must exceed λ₁ somewhere".into()));
        }
        let below_plus = self.big_delta_plus.iter().all(|&d| d < alpha);
        let below_minus = self.big_delta_minus.iter().all(|&d| d < beta);
        if !below_plus && !below_minus {
            return Err(Error::InvalidInput("need Δ₊ < α everywhere or Δ₋ < β everywhere".into()));
        }

        let rule: GaussRule<T> = gauss_legendre(20)?;
        let stride = (n / 8).max(1);
        for &x in mesh.nodes.iter().step_by(stride) {
            for s in [-10.0, -2.5, -0.3, 0.7, 3.0, 12.0] {
                let s = T::lit(s);
                let quad = rule.mapped(T::zero(), s).integrate(|t| (self.f)(x, t));
                let exact = (self.primitive)(x, s);
                if !exact.is_finite() || (exact - quad).abs() > T::lit(1e-8) * (T::one() + exact.abs()) {
                    return Err(Error::InvalidInput(format!("primitive inconsistent with f at x = {x}, s = {s}")));
                }
            }
        }
        Ok(())
    }
}

fn psi_rule<T: Real>() -> GaussRule<T> {
    gauss_legendre(4).expect("four-point rule")
}

fn dofs<T: Real>(p: &SplitPoint<T>) -> [(Option<usize>, T); 2] {
    [(p.left, T::one() - p.xi), (p.right, p.xi)]
}

/// `Ψ(u) = uᵀAu/2 − ∫ F(x, ũ(x))`.
pub fn psi<T: Real>(spec: &NonlinearitySpec<T>, forms: &FormMatrices<T>, u: &[T]) -> Result<T> {
    check_len(forms.n(), u.len())?;
    let mut integral = T::zero();
    let mut bad = None;
    for_each_split_point(&forms.mesh, u, &psi_rule(), |p| {
        let v = (spec.primitive)(p.x, p.value);
        if !v.is_finite() {
            bad = Some(p.x);
        }
        integral += p.weight * v;
    });
    if let Some(x) = bad {
        return Err(Error::InvalidInput(format!("non-finite primitive at x = {x}")));
    }
    Ok(forms.a.bilinear(u, u) / T::lit(2.0) - integral)
}

/// Nodal residual `Au − ∫ f(x, ũ) φ_i`.
pub fn psi_gradient<T: Real>(spec: &NonlinearitySpec<T>, forms: &FormMatrices<T>, u: &[T]) -> Result<Vec<T>> {
    check_len(forms.n(), u.len())?;
    let mut g = forms.a.matvec(u);
    for_each_split_point(&forms.mesh, u, &psi_rule(), |p| {
        let v = p.weight * (spec.f)(p.x, p.value);
        for (i, phi) in dofs(&p) {
            if let Some(i) = i {
                g[i] -= v * phi;
            }
        }
    });
    Ok(g)
}

/// `A − ∫ ∂f/∂s(x, ũ) φ_i φ_j`.
fn psi_hessian<T: Real>(spec: &NonlinearitySpec<T>, forms: &FormMatrices<T>, u: &[T]) -> Result<Matrix<T>> {
    let df = spec
        .derivative
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("Newton polish needs ∂f/∂s".into()))?;
    let mut h = forms.a.clone();
    for_each_split_point(&forms.mesh, u, &psi_rule(), |p| {
        let v = p.weight * df(p.x, p.value);
        let d = dofs(&p);
        for &(a, pa) in &d {
            let Some(i) = a else { continue };
            for &(b, pb) in &d {
                let Some(j) = b else { continue };
                h[(i, j)] -= v * pa * pb;
            }
        }
    });
    Ok(h)
}

struct PsiLandscape<'a, T> {
    spec: &'a NonlinearitySpec<T>,
    forms: &'a FormMatrices<T>,
    step: T,
}

impl<T: Real> Landscape<T> for PsiLandscape<'_, T> {
    fn evaluate(&self, u: &[T]) -> Result<Evaluation<T>> {
        let residual = psi_gradient(self.spec, self.forms, u)?;
        let gradient = residual
            .iter()
            .zip(&self.forms.lumped_mass)
            .map(|(&r, &m)| r / m)
            .collect();
        Ok(Evaluation {
            energy: psi(self.spec, self.forms, u)?,
            multiplier: T::zero(),
            residual,
            gradient,
        })
    }

    fn retract(&self, _u: &mut [T]) -> Result<()> {
        Ok(())
    }

    fn metric_inner(&self, a: &[T], b: &[T]) -> T {
        a.iter()
            .zip(b)
            .zip(&self.forms.lumped_mass)
            .map(|((&x, &y), &m)| x * y * m)
            .sum()
    }

    fn step(&self) -> T {
        self.step
    }
}

fn lumped_bound<T: Real>(forms: &FormMatrices<T>) -> T {
    (0..forms.n())
        .map(|i| forms.a.row(i).iter().map(|x| x.abs()).sum::<T>() / forms.lumped_mass[i])
        .fold(T::zero(), T::max)
}

#[derive(Clone, Copy, Debug)]
pub struct NonresonanceOptions<T> {
    /// `Ψ(±Rφ₁) ≤ −margin` selects `R`.
    pub margin: T,
    pub initial_scale: T,
    pub max_doublings: usize,
    pub images: usize,
    /// Residual tolerance relative to `‖A‖_∞`.
    pub grad_tol: T,
    /// Newton takes over below this relative residual; `None` disables it.
    pub polish_below: Option<T>,
    /// `‖u‖₂ ≥ threshold·R` counts as nontrivial.
    pub nontrivial: T,
    pub string: StringOptions<T>,
    pub newton_iter: usize,
}

impl<T: Real> Default for NonresonanceOptions<T> {
    fn default() -> Self {
        Self {
            margin: T::one(),
            initial_scale: T::one(),
            max_doublings: 40,
            images: 41,
            grad_tol: T::lit(1e-6),
            polish_below: Some(T::lit(1e-3)),
            nontrivial: T::lit(1e-3),
            string: StringOptions::default(),
            newton_iter: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MountainPassResult<T> {
    pub u: Vec<T>,
    pub psi_value: T,
    /// `‖Au − ∫ f(x,ũ)φ‖₂`.
    pub grad_norm: T,
    /// Endpoint scale.
    pub r_scale: T,
    pub norm_u: T,
    pub sweeps: usize,
    pub newton_iterations: usize,
    pub converged: bool,
}

/// First `R` of the doubling schedule with `max Ψ(±Rφ₁) ≤ −margin`.
pub fn endpoint_scale<T: Real>(
    spec: &NonlinearitySpec<T>,
    forms: &FormMatrices<T>,
    opts: &NonresonanceOptions<T>,
) -> Result<T> {
    let eig = solve_eig(forms, 1)?;
    spec.validate(&forms.mesh, eig[0].lambda)?;
    scale_for(spec, forms, &eig[0].vector, opts)
}

fn scale_for<T: Real>(
    spec: &NonlinearitySpec<T>,
    forms: &FormMatrices<T>,
    phi1: &[T],
    opts: &NonresonanceOptions<T>,
) -> Result<T> {
    let mut r = opts.initial_scale;
    for _ in 0..=opts.max_doublings {
        let up: Vec<T> = phi1.iter().map(|&x| r * x).collect();
        let down: Vec<T> = phi1.iter().map(|&x| -r * x).collect();
        if psi(spec, forms, &up)?.max(psi(spec, forms, &down)?) <= -opts.margin {
            return Ok(r);
        }
        r = r + r;
    }
    Err(Error::NotConverged {
        iterations: opts.max_doublings,
        residual: r.to_f64_lossy(),
    })
}

fn newton_polish<T: Real>(
    spec: &NonlinearitySpec<T>,
    forms: &FormMatrices<T>,
    u0: &[T],
    max_iter: usize,
    tol: T,
) -> Result<(Vec<T>, usize, bool)> {
    let mut u = u0.to_vec();
    let mut g = psi_gradient(spec, forms, &u)?;
    for it in 0..max_iter {
        if norm2(&g) <= tol {
            return Ok((u, it, true));
        }
        let h = psi_hessian(spec, forms, &u)?;
        let Ok(step) = lu_solve(&h, &g) else {
            return Ok((u, it, false));
        };
        let base = norm2(&g);
        let mut lambda = T::one();
        loop {
            let trial: Vec<T> = u.iter().zip(&step).map(|(&x, &d)| x - lambda * d).collect();
            let tg = psi_gradient(spec, forms, &trial)?;
            if norm2(&tg) < base * (T::one() - T::lit(1e-4) * lambda) {
                u = trial;
                g = tg;
                break;
            }
            lambda = lambda * T::lit(0.5);
            if lambda < T::lit(1e-6) {
                return Ok((u, it + 1, norm2(&g) <= tol));
            }
        }
    }
    let ok = norm2(&g) <= tol;
    Ok((u, max_iter, ok))
}

/// Mountain pass of `Ψ` between `−Rφ₁` and `Rφ₁` in the full space.
pub fn solve_nonresonance<T: Real>(
    spec: &NonlinearitySpec<T>,
    forms: &FormMatrices<T>,
    opts: &NonresonanceOptions<T>,
) -> Result<MountainPassResult<T>> {
    let eig = solve_eig(forms, 2)?;
    spec.validate(&forms.mesh, eig[0].lambda)?;
    let phi1 = &eig[0].vector;
    let r = scale_for(spec, forms, phi1, opts)?;
    let m = opts.images.max(3);
    let nodes: Vec<Vec<T>> = (0..m)
        .map(|j| {
            let t = T::lit(2.0) * T::of(j) / T::of(m - 1) - T::one();
            phi1.iter().map(|&x| r * t * x).collect()
        })
        .collect();
    let slope = spec
        .big_gamma_plus
        .iter()
        .chain(&spec.big_gamma_minus)
        .fold(T::zero(), |a, &b| a.max(b.abs()));
    let land = PsiLandscape {
        spec,
        forms,
        step: T::one() / (lumped_bound(forms) + slope),
    };
    let tol = opts.grad_tol * forms.operator_norm();
    let first_tol = opts.polish_below.map_or(tol, |p| (p * forms.operator_norm()).max(tol));
    let mut sopts = opts.string;
    sopts.tol = first_tol;
    let mut out = relax_string(&land, nodes, &sopts)?;
    let mut newton_iterations = 0;
    let mut u = out.path[out.apex].clone();
    let mut grad_norm = out.grad_norm;
    let mut converged = out.converged && grad_norm <= tol;

    if !converged && out.converged && opts.polish_below.is_some() && spec.derivative.is_some() {
        let (v, its, ok) = newton_polish(spec, forms, &u, opts.newton_iter, tol)?;
        newton_iterations = its;
        if ok {
            u = v;
            grad_norm = norm2(&psi_gradient(spec, forms, &u)?);
            converged = true;
        }
    }
    if !converged {
        let done = out.sweeps;
        let mut rest = opts.string;
        rest.tol = tol;
        rest.warmup = 0;
        rest.max_sweeps = opts.string.max_sweeps.saturating_sub(done);
        out = relax_string(&land, out.path, &rest)?;
        out.sweeps += done;
        u = out.path[out.apex].clone();
        grad_norm = out.grad_norm;
        converged = out.converged;
    }

    let norm_u = forms.mass_norm(&u);
    let nontrivial = norm_u >= opts.nontrivial * r;
    if converged && !nontrivial {
        log::warn!("mountain pass collapsed: ‖u‖ = {norm_u} < {} R", opts.nontrivial);
    }
    if converged {
        let (a, b) = spec.target;
        let split = crate::discretization::sign_split(&forms.mesh, &u)?;
        let au = forms.a.matvec(&u);
        let frozen: Vec<T> = (0..u.len())
            .map(|i| au[i] - a * split.plus_load[i] + b * split.minus_load[i])
            .collect();
        log::info!("frozen-slope residual at the solution: {}", norm2(&frozen) / norm2(&au));
    }
    Ok(MountainPassResult {
        psi_value: psi(spec, forms, &u)?,
        u,
        grad_norm,
        r_scale: r,
        norm_u,
        sweeps: out.sweeps,
        newton_iterations,
        converged: converged && nontrivial,
    })
}

/// Nodal-weight jump functional `J(u) = uᵀAu − ∫ Δ̃₊(ũ⁺)² − ∫ Δ̃₋(ũ⁻)²`
/// on the unit sphere.
struct JumpFunctional<'a, T> {
    forms: &'a FormMatrices<T>,
    plus: &'a [T],
    minus: &'a [T],
    step: T,
}

fn interpolate<T: Real>(w: &[T], p: &SplitPoint<T>) -> T {
    let wl = p.left.or(p.right).map_or(T::zero(), |i| w[i]);
    let wr = p.right.or(p.left).map_or(T::zero(), |i| w[i]);
    wl * (T::one() - p.xi) + wr * p.xi
}

impl<T: Real> Landscape<T> for JumpFunctional<'_, T> {
    fn evaluate(&self, u: &[T]) -> Result<Evaluation<T>> {
        let au = self.forms.a.matvec(u);
        let mu = self.forms.mass.matvec(u);
        let mut load = vec![T::zero(); u.len()];
        let mut sq = T::zero();
        let rule: GaussRule<T> = gauss_legendre(3)?;
        for_each_split_point(&self.forms.mesh, u, &rule, |p| {
            let w = if p.value > T::zero() {
                interpolate(self.plus, &p)
            } else {
                interpolate(self.minus, &p)
            };
            sq += p.weight * w * p.value * p.value;
            for (i, phi) in dofs(&p) {
                if let Some(i) = i {
                    load[i] += p.weight * w * p.value * phi;
                }
            }
        });
        let energy = dot(u, &au) - sq;
        let t = energy / dot(u, &mu);
        let two = T::lit(2.0);
        let residual: Vec<T> = (0..u.len()).map(|i| two * (au[i] - load[i] - t * mu[i])).collect();
        let gradient = residual
            .iter()
            .zip(&self.forms.lumped_mass)
            .map(|(&r, &m)| r / m)
            .collect();
        Ok(Evaluation {
            energy,
            multiplier: t,
            residual,
            gradient,
        })
    }

    fn retract(&self, u: &mut [T]) -> Result<()> {
        let n = self.forms.mass_norm(u);
        if !(n > T::zero()) {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        u.iter_mut().for_each(|x| *x /= n);
        Ok(())
    }

    fn metric_inner(&self, a: &[T], b: &[T]) -> T {
        a.iter()
            .zip(b)
            .zip(&self.forms.lumped_mass)
            .map(|((&x, &y), &m)| x * y * m)
            .sum()
    }

    fn step(&self) -> T {
        self.step
    }
}

/// Mountain-pass level `d` of `J` on the sphere between `∓φ₁`; positive
/// when `(Δ₊, Δ₋)` lies below the first curve.
pub fn jump_level<T: Real>(
    spec: &NonlinearitySpec<T>,
    forms: &FormMatrices<T>,
    opts: &StringOptions<T>,
    images: usize,
) -> Result<(T, bool)> {
    let eig = solve_eig(forms, 2)?;
    let top = spec
        .big_delta_plus
        .iter()
        .chain(&spec.big_delta_minus)
        .fold(T::zero(), |a, &b| a.max(b.abs()));
    let land = JumpFunctional {
        forms,
        plus: &spec.big_delta_plus,
        minus: &spec.big_delta_minus,
        step: T::one() / (T::lit(2.0) * (lumped_bound(forms) + top)),
    };
    let path: PathEnsemble<T> = crate::fucik::initial_path(forms, &eig[0].vector, &eig[1].vector, images)?;
    let mut o = *opts;
    o.tol = o.tol.max(T::lit(1e-6) * forms.operator_norm());
    let out = relax_string(&land, path.nodes, &o)?;
    Ok((out.energy, out.converged))
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
    fn linear_nonlinearity_is_quadratic() {
        let f = forms(20);
        let lam = 1.7;
        let spec = NonlinearitySpec::jumping(20, lam, lam, 0.0, 0.0, (4.0, 4.0));
        let u: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let expected = (f.a.bilinear(&u, &u) - lam * f.mass.bilinear(&u, &u)) / 2.0;
        assert!((psi(&spec, &f, &u).unwrap() - expected).abs() < 1e-13);
        assert_eq!(psi(&spec, &f, &[0.0; 20]).unwrap(), 0.0);
        let g = psi_gradient(&spec, &f, &u).unwrap();
        let au = f.a.matvec(&u);
        let mu = f.mass.matvec(&u);
        for i in 0..20 {
            assert!((g[i] - (au[i] - lam * mu[i])).abs() < 1e-13);
        }
        let eig = solve_eig(&f, 3).unwrap();
        let spec = NonlinearitySpec::jumping(20, eig[2].lambda, eig[2].lambda, 0.0, 0.0, (9.0, 9.0));
        assert!(norm2(&psi_gradient(&spec, &f, &eig[2].vector).unwrap()) < 1e-8);
    }

    #[test]
    fn validator_rejects_slopes_on_the_curve() {
        let f = forms(16);
        let l1 = solve_eig(&f, 1).unwrap()[0].lambda;
        let ok = NonlinearitySpec::jumping(16, l1 + 1.0, l1 + 0.5, 0.1, 0.1, (l1 + 2.0, l1 + 1.0));
        assert!(ok.validate(&f.mesh, l1).is_ok());
        let mut bad = ok.clone();
        bad.big_delta_plus = vec![l1 + 2.0; 16];
        bad.big_delta_minus = vec![l1 + 1.0; 16];
        assert!(bad.validate(&f.mesh, l1).is_err());
        let flat = NonlinearitySpec::jumping(16, l1, l1, 0.0, 0.0, (l1 + 2.0, l1 + 1.0));
        assert!(flat.validate(&f.mesh, l1).is_err());
        let mut off = ok.clone();
        off.primitive = Arc::new(|_, s: f64| s * s);
        assert!(off.validate(&f.mesh, l1).is_err());
    }
}
