//! Integrals over the positive and negative parts of the piecewise-linear
//! function `ũ = Σ u_i φ_i`. Cells are cut at the zeros of `ũ`, so each
//! piece carries a polynomial integrand.

use crate::error::{check_len, Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::{gauss_legendre, GaussRule};
use crate::scalar::Real;

use super::Mesh;

/// Quadrature point of a cut cell.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SplitPoint<T> {
    pub left: Option<usize>,
    pub right: Option<usize>,
    pub x: T,
    /// Local coordinate in the cell, `φ_left = 1 − ξ`, `φ_right = ξ`.
    pub xi: T,
    pub value: T,
    /// Quadrature weight including the reduced measure.
    pub weight: T,
}

pub(crate) fn for_each_split_point<T: Real>(
    mesh: &Mesh<T>,
    u: &[T],
    rule: &GaussRule<T>,
    mut visit: impl FnMut(SplitPoint<T>),
) {
    for (k, cell) in mesh.cells.iter().enumerate() {
        let ul = cell.left.map_or(T::zero(), |i| u[i]);
        let ur = cell.right.map_or(T::zero(), |i| u[i]);
        let mut cuts = [T::zero(), T::one(), T::one()];
        let mut pieces = 1;
        if (ul > T::zero() && ur < T::zero()) || (ul < T::zero() && ur > T::zero()) {
            cuts[1] = ul / (ul - ur);
            pieces = 2;
        }
        for p in 0..pieces {
            let (a, b) = (cuts[p], cuts[p + 1]);
            let len = b - a;
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let xi = a + len * t;
                let x = mesh.cell_point(k, xi);
                visit(SplitPoint {
                    left: cell.left,
                    right: cell.right,
                    x,
                    xi,
                    value: ul * (T::one() - xi) + ur * xi,
                    weight: w * len * mesh.h * mesh.domain.measure_weight(x),
                });
            }
        }
    }
}

/// `P(u)_i = ∫ ũ⁺ φ_i`, `N(u)_i = ∫ ũ⁻ φ_i` and the squared norms of `ũ±`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignSplit<T> {
    pub plus_load: Vec<T>,
    pub minus_load: Vec<T>,
    pub plus_sq: T,
    pub minus_sq: T,
}

fn exact_rule<T: Real>() -> GaussRule<T> {
    // two points integrate the cubic integrands (disc measure included) exactly
    gauss_legendre(2).expect("two-point rule")
}

pub fn sign_split<T: Real>(mesh: &Mesh<T>, u: &[T]) -> Result<SignSplit<T>> {
    check_len(mesh.n(), u.len())?;
    let n = mesh.n();
    let mut out = SignSplit {
        plus_load: vec![T::zero(); n],
        minus_load: vec![T::zero(); n],
        plus_sq: T::zero(),
        minus_sq: T::zero(),
    };
    for_each_split_point(mesh, u, &exact_rule(), |p| {
        let (load, sq, v) = if p.value > T::zero() {
            (&mut out.plus_load, &mut out.plus_sq, p.value)
        } else if p.value < T::zero() {
            (&mut out.minus_load, &mut out.minus_sq, -p.value)
        } else {
            return;
        };
        *sq += p.weight * v * v;
        if let Some(i) = p.left {
            load[i] += p.weight * v * (T::one() - p.xi);
        }
        if let Some(i) = p.right {
            load[i] += p.weight * v * p.xi;
        }
    });
    Ok(out)
}

/// `∫_{ũ>0} φ_i φ_j` (`positive = true`) or `∫_{ũ<0} φ_i φ_j`.
pub fn sign_mass<T: Real>(mesh: &Mesh<T>, u: &[T], positive: bool) -> Result<Matrix<T>> {
    check_len(mesh.n(), u.len())?;
    let mut m = Matrix::zeros(mesh.n());
    for_each_split_point(mesh, u, &exact_rule(), |p| {
        let keep = if positive { p.value > T::zero() } else { p.value < T::zero() };
        if keep {
            add_local(&mut m, &p, p.weight);
        }
    });
    Ok(m)
}

fn add_local<T: Real>(m: &mut Matrix<T>, p: &SplitPoint<T>, w: T) {
    let dofs = [(p.left, T::one() - p.xi), (p.right, p.xi)];
    for &(a, pa) in &dofs {
        let Some(i) = a else { continue };
        for &(b, pb) in &dofs {
            let Some(j) = b else { continue };
            m[(i, j)] += w * pa * pb;
        }
    }
}

/// `∫ ã φ_i φ_j` with `ã` the piecewise-linear interpolant of the nodal
/// weight, extended constantly to the Dirichlet nodes.
pub fn weighted_mass<T: Real>(mesh: &Mesh<T>, weight: &[T]) -> Result<Matrix<T>> {
    check_len(mesh.n(), weight.len())?;
    if let Some(i) = weight.iter().position(|&w| !(w > T::zero()) || !w.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "weight must be positive, node {i} has {}",
            weight[i]
        )));
    }
    let rule: GaussRule<T> = gauss_legendre(3)?;
    let mut m = Matrix::zeros(mesh.n());
    for (k, cell) in mesh.cells.iter().enumerate() {
        let wl = cell.left.or(cell.right).map(|i| weight[i]).unwrap_or(T::one());
        let wr = cell.right.or(cell.left).map(|i| weight[i]).unwrap_or(T::one());
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mesh.cell_point(k, xi);
            let a = wl * (T::one() - xi) + wr * xi;
            let p = SplitPoint {
                left: cell.left,
                right: cell.right,
                x,
                xi,
                value: T::zero(),
                weight: w * mesh.h * mesh.domain.measure_weight(x),
            };
            add_local(&mut m, &p, p.weight * a);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_mesh, Domain, QuadratureSpec};

    #[test]
    fn split_loads_recombine_to_mass() {
        let mesh = build_mesh(Domain::<f64>::unit_interval(), 12).unwrap();
        let f = assemble(&mesh, &QuadratureSpec::default()).unwrap();
        let u: Vec<f64> = (0..12).map(|i| ((i as f64) * 0.9 - 4.0).sin()).collect();
        let s = sign_split(&mesh, &u).unwrap();
        let mu = f.mass.matvec(&u);
        for i in 0..12 {
            assert!((s.plus_load[i] - s.minus_load[i] - mu[i]).abs() < 1e-15);
        }
        assert!((s.plus_sq + s.minus_sq - f.mass.bilinear(&u, &u)).abs() < 1e-14);
        let mp = sign_mass(&mesh, &u, true).unwrap();
        let mm = sign_mass(&mesh, &u, false).unwrap();
        assert!(mp.add(&mm).sub(&f.mass).max_abs() < 1e-15);
    }

    #[test]
    fn one_signed_split_is_mass() {
        let mesh = build_mesh(Domain::disc(0.5f64).unwrap(), 8).unwrap();
        let f = assemble(&mesh, &QuadratureSpec::default()).unwrap();
        let u = vec![1.0; 8];
        let s = sign_split(&mesh, &u).unwrap();
        assert_eq!(s.minus_sq, 0.0);
        let mu = f.mass.matvec(&u);
        for i in 0..8 {
            assert!((s.plus_load[i] - mu[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_weight_gives_mass() {
        let mesh = build_mesh(Domain::<f64>::unit_interval(), 7).unwrap();
        let f = assemble(&mesh, &QuadratureSpec::default()).unwrap();
        let m = weighted_mass(&mesh, &[1.0; 7]).unwrap();
        assert!(m.sub(&f.mass).max_abs() < 1e-15);
        assert!(weighted_mass(&mesh, &[1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
    }
}
