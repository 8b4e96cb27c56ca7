use crate::discretization::{sign_split, FormMatrices};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::scalar::Real;
use crate::spectral::solve_eig;

use super::newton::{solve_shifted, NewtonOptions};
use super::path::{initial_path, PathEnsemble};
use super::string::{relax_string, StringOptions};
use super::{verify_pair_with, FucikFunctional, GradientMetric};

#[derive(Clone, Copy, Debug)]
pub struct MountainPassOptions<T> {
    /// Nodes per path.
    pub images: usize,
    /// Residual tolerance relative to `‖A‖_∞`.
    pub grad_tol: T,
    /// Hand the climbing image to Newton once its relative residual is
    /// below this; `None` relaxes the string all the way to `grad_tol`.
    pub polish_below: Option<T>,
    pub metric: GradientMetric,
    pub string: StringOptions<T>,
    pub newton: NewtonOptions<T>,
}

impl<T: Real> Default for MountainPassOptions<T> {
    fn default() -> Self {
        Self {
            images: 41,
            grad_tol: T::lit(1e-6),
            polish_below: Some(T::lit(1e-3)),
            metric: GradientMetric::Lumped,
            string: StringOptions::default(),
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MountainPass<T> {
    /// Minimax value `c(r)`.
    pub c: T,
    /// Critical point on the unit sphere.
    pub u: Vec<T>,
    /// Nodal residual norm at `u`.
    pub grad_norm: T,
    pub sweeps: usize,
    /// Index of `u` in `path`.
    pub apex: usize,
    pub newton_iterations: usize,
    pub polished: bool,
    pub converged: bool,
    pub path: PathEnsemble<T>,
    /// Highest image energy per sweep.
    pub history: Vec<T>,
}

/// Relaxes `path` under `Ẽ_r` and returns the saddle on it.
pub fn mountain_pass<T: Real>(
    forms: &FormMatrices<T>,
    r: T,
    path: PathEnsemble<T>,
    opts: &MountainPassOptions<T>,
) -> Result<MountainPass<T>> {
    let fun = FucikFunctional::with_metric(forms, r, opts.metric)?;
    let tol = opts.grad_tol * forms.operator_norm();
    let first_tol = opts.polish_below.map_or(tol, |p| (p * forms.operator_norm()).max(tol));
    let mut sopts = opts.string;
    sopts.tol = first_tol;
    let mut out = relax_string(&fun, path.nodes, &sopts)?;
    let mut newton_iterations = 0;

    if opts.polish_below.is_some() && out.converged {
        let u0 = &out.path[out.apex];
        let t0 = out.multiplier;
        let (s, its, ok) = solve_shifted(forms, r + t0, t0, u0, Some(T::zero()), &opts.newton)?;
        newton_iterations = its;
        if ok && s.mu.abs() <= T::lit(0.05) * (t0.abs() + T::one()) {
            let split = sign_split(&forms.mesh, &s.u)?;
            let ev = fun.evaluate(&s.u)?;
            let grad_norm = norm2(&ev.residual);
            if split.plus_sq > T::zero() && split.minus_sq > T::zero() && grad_norm <= tol {
                let mut path = out.path;
                path[out.apex] = s.u.clone();
                return Ok(MountainPass {
                    c: ev.energy,
                    u: s.u,
                    grad_norm,
                    sweeps: out.sweeps,
                    apex: out.apex,
                    newton_iterations,
                    polished: true,
                    converged: true,
                    path: PathEnsemble { nodes: path },
                    history: out.history,
                });
            }
        }
        log::debug!("Newton polish rejected at r = {r}; continuing the string");
    }

    if first_tol > tol || !out.converged {
        let done = out.sweeps;
        let mut rest = opts.string;
        rest.tol = tol;
        rest.warmup = 0;
        rest.max_sweeps = opts.string.max_sweeps.saturating_sub(done);
        let mut history = std::mem::take(&mut out.history);
        let next = relax_string(&fun, out.path, &rest)?;
        history.extend(next.history.iter().copied());
        out = next;
        out.sweeps += done;
        out.history = history;
    }
    Ok(MountainPass {
        c: out.energy,
        u: out.path[out.apex].clone(),
        grad_norm: out.grad_norm,
        sweeps: out.sweeps,
        apex: out.apex,
        newton_iterations,
        polished: false,
        converged: out.converged,
        path: PathEnsemble { nodes: out.path },
        history: out.history,
    })
}

/// One point `(α, β)` of the curve with its eigenfunction.
#[derive(Clone, Debug)]
pub struct FucikPoint<T> {
    pub alpha: T,
    pub beta: T,
    pub eigenfunction: Vec<T>,
    /// Relative residual reported by [`super::verify_pair`].
    pub residual: T,
    pub r: T,
    pub c: T,
    pub converged: bool,
    /// String sweeps spent at this offset.
    pub iterations: usize,
    /// Index of the highest path node.
    pub apex: usize,
}

#[derive(Clone, Debug)]
pub struct CurveResult<T> {
    pub lambda1: T,
    pub lambda2: T,
    /// `(r + c(r), c(r))` in grid order.
    pub points: Vec<FucikPoint<T>>,
    /// `(c(r), r + c(r))` with eigenfunction `−u`.
    pub mirrored: Vec<FucikPoint<T>>,
}

/// Mountain-pass values over an ascending grid starting at `r = 0`; each
/// path is seeded with the previous critical point.
pub fn trace_curve<T: Real>(
    forms: &FormMatrices<T>,
    r_grid: &[T],
    opts: &MountainPassOptions<T>,
) -> Result<CurveResult<T>> {
    if r_grid.first() != Some(&T::zero()) {
        return Err(Error::InvalidInput("r grid must start at 0".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) || r_grid.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidInput("r grid must be strictly increasing".into()));
    }
    let eig = solve_eig(forms, 2)?;
    let phi1 = &eig[0].vector;
    let mut seed = eig[1].vector.clone();
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let path = initial_path(forms, phi1, &seed, opts.images)?;
        let mp = mountain_pass(forms, r, path, opts)?;
        if !mp.converged {
            log::warn!("mountain pass at r = {r} stopped with residual {}", mp.grad_norm);
        }
        let alpha = r + mp.c;
        let check = verify_pair_with(forms, alpha, mp.c, &mp.u, &opts.newton)?;
        log::info!("r = {r}: c = {}, residual {}", mp.c, check.residual);
        seed = mp.u.clone();
        points.push(FucikPoint {
            alpha,
            beta: mp.c,
            eigenfunction: mp.u,
            residual: check.residual,
            r,
            c: mp.c,
            converged: mp.converged,
            iterations: mp.sweeps,
            apex: mp.apex,
        });
    }
    let mirrored = points
        .iter()
        .map(|p| FucikPoint {
            alpha: p.beta,
            beta: p.alpha,
            eigenfunction: p.eigenfunction.iter().map(|&x| -x).collect(),
            ..p.clone()
        })
        .collect();
    Ok(CurveResult {
        lambda1: eig[0].lambda,
        lambda2: eig[1].lambda,
        points,
        mirrored,
    })
}

/// Mountain passes at offset `r` from `count` paths through white-noise
/// seeds drawn from a ChaCha stream.
pub fn randomized_restarts<T: Real>(
    forms: &FormMatrices<T>,
    r: T,
    count: usize,
    seed: u64,
    opts: &MountainPassOptions<T>,
) -> Result<Vec<MountainPass<T>>> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    let eig = solve_eig(forms, 1)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let noise: Vec<T> = (0..forms.n())
                .map(|_| T::lit(StandardNormal.sample(&mut rng)))
                .collect();
            let path = initial_path(forms, &eig[0].vector, &noise, opts.images)?;
            mountain_pass(forms, r, path, opts)
        })
        .collect()
}
