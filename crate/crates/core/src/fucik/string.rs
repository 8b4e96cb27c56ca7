//! Simplified string method with a climbing image.

use rayon::prelude::*;

use crate::error::Result;
use crate::scalar::Real;

use super::{Evaluation, FucikFunctional};

/// Functional whose minimum-energy paths are relaxed by [`relax_string`].
pub trait Landscape<T: Real>: Sync {
    fn evaluate(&self, u: &[T]) -> Result<Evaluation<T>>;
    /// Pulls an updated image back onto the admissible set.
    fn retract(&self, u: &mut [T]) -> Result<()>;
    fn metric_inner(&self, a: &[T], b: &[T]) -> T;
    fn step(&self) -> T;
}

impl<T: Real> Landscape<T> for FucikFunctional<'_, T> {
    fn evaluate(&self, u: &[T]) -> Result<Evaluation<T>> {
        FucikFunctional::evaluate(self, u)
    }

    fn retract(&self, u: &mut [T]) -> Result<()> {
        self.normalize(u)
    }

    fn metric_inner(&self, a: &[T], b: &[T]) -> T {
        FucikFunctional::metric_inner(self, a, b)
    }

    fn step(&self) -> T {
        self.default_step()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct StringOptions<T> {
    pub max_sweeps: usize,
    /// Stop once the climbing image's residual norm is below this.
    pub tol: T,
    /// Sweeps of plain string relaxation before the highest image climbs.
    pub warmup: usize,
    /// Multiplies the landscape's step.
    pub step_scale: T,
    pub parallel: bool,
}

impl<T: Real> Default for StringOptions<T> {
    fn default() -> Self {
        Self {
            max_sweeps: 20_000,
            tol: T::lit(1e-8),
            warmup: 100,
            step_scale: T::one(),
            parallel: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StringOutcome<T> {
    pub path: Vec<Vec<T>>,
    /// Index of the highest image.
    pub apex: usize,
    pub energy: T,
    pub multiplier: T,
    pub grad_norm: T,
    pub sweeps: usize,
    pub converged: bool,
    /// Highest image energy after each sweep.
    pub history: Vec<T>,
}

fn norm_in<T: Real, L: Landscape<T>>(land: &L, v: &[T]) -> T {
    land.metric_inner(v, v).max(T::zero()).sqrt()
}

/// Redistributes `path[lo..=hi]` at equal metric arclength; endpoints stay.
fn reparametrize<T: Real, L: Landscape<T>>(land: &L, path: &mut [Vec<T>], lo: usize, hi: usize) -> Result<()> {
    if hi <= lo + 1 {
        return Ok(());
    }
    let old: Vec<Vec<T>> = path[lo..=hi].to_vec();
    let mut s = vec![T::zero(); old.len()];
    for i in 1..old.len() {
        let d: Vec<T> = old[i].iter().zip(&old[i - 1]).map(|(&a, &b)| a - b).collect();
        s[i] = s[i - 1] + norm_in(land, &d);
    }
    let total = s[old.len() - 1];
    if !(total > T::zero()) {
        return Ok(());
    }
    let segments = old.len() - 1;
    let mut seg = 0;
    for j in 1..segments {
        let target = total * T::of(j) / T::of(segments);
        while seg + 1 < segments && s[seg + 1] < target {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let theta = if len > T::zero() {
            ((target - s[seg]) / len).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        let mut u: Vec<T> = old[seg]
            .iter()
            .zip(&old[seg + 1])
            .map(|(&a, &b)| a * (T::one() - theta) + b * theta)
            .collect();
        land.retract(&mut u)?;
        path[lo + j] = u;
    }
    Ok(())
}

fn evaluate_all<T: Real, L: Landscape<T>>(
    land: &L,
    path: &[Vec<T>],
    parallel: bool,
) -> Result<Vec<Evaluation<T>>> {
    let inner = &path[1..path.len() - 1];
    if parallel {
        inner.par_iter().map(|u| land.evaluate(u)).collect()
    } else {
        inner.iter().map(|u| land.evaluate(u)).collect()
    }
}

/// Relaxes `path` (endpoints fixed) towards a minimum-energy path, with the
/// highest image driven to the saddle after the warmup.
pub fn relax_string<T: Real, L: Landscape<T>>(
    land: &L,
    mut path: Vec<Vec<T>>,
    opts: &StringOptions<T>,
) -> Result<StringOutcome<T>> {
    let m = path.len();
    if m < 3 {
        return Err(crate::Error::InvalidInput(format!("a string needs at least 3 images, got {m}")));
    }
    let eta = land.step() * opts.step_scale;
    let mut history = Vec::new();
    let mut sweeps = 0;
    loop {
        let evals = evaluate_all(land, &path, opts.parallel)?;
        let (best, top) = evals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, e)| if e.energy > acc.1 { (i, e.energy) } else { acc });
        let apex = best + 1;
        let grad_norm = crate::linalg::norm2(&evals[best].residual);
        history.push(top);
        let climbing = sweeps >= opts.warmup;
        if (climbing && grad_norm <= opts.tol) || sweeps >= opts.max_sweeps {
            return Ok(StringOutcome {
                converged: climbing && grad_norm <= opts.tol,
                multiplier: evals[best].multiplier,
                energy: top,
                apex,
                grad_norm,
                sweeps,
                path,
                history,
            });
        }

        let tangent = if climbing {
            let t: Vec<T> = path[apex + 1].iter().zip(&path[apex - 1]).map(|(&a, &b)| a - b).collect();
            let n = norm_in(land, &t);
            (n > T::zero()).then(|| t.into_iter().map(|x| x / n).collect::<Vec<T>>())
        } else {
            None
        };

        let step_one = |(i, u): (usize, &mut Vec<T>)| -> Result<()> {
            let g = &evals[i].gradient;
            match (&tangent, i + 1 == apex) {
                (Some(t), true) => {
                    let along = T::lit(2.0) * land.metric_inner(g, t);
                    for ((x, &gi), &ti) in u.iter_mut().zip(g).zip(t) {
                        *x -= eta * (gi - along * ti);
                    }
                }
                _ => {
                    for (x, &gi) in u.iter_mut().zip(g) {
                        *x -= eta * gi;
                    }
                }
            }
            land.retract(u)
        };
        let inner = &mut path[1..m - 1];
        if opts.parallel {
            inner.par_iter_mut().enumerate().try_for_each(step_one)?;
        } else {
            inner.iter_mut().enumerate().try_for_each(step_one)?;
        }

        if climbing && tangent.is_some() {
            reparametrize(land, &mut path, 0, apex)?;
            reparametrize(land, &mut path, apex, m - 1)?;
        } else {
            reparametrize(land, &mut path, 0, m - 1)?;
        }
        sweeps += 1;
    }
}
