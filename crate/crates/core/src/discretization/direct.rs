use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{c_of_n, rho_of_n};

use super::{build_mesh, Domain, Mesh, PairRules, QuadratureSpec};

const BASE_PANELS: usize = 32;

/// Mesh-free value of the form with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectEstimate<T> {
    pub value: T,
    /// Difference between the panel rule and its refinement.
    pub error: T,
}

fn panel_mesh<T: Real>(domain: Domain<T>, panels: usize) -> Result<Mesh<T>> {
    match domain {
        Domain::Interval { .. } => build_mesh(domain, panels - 1),
        Domain::Disc { .. } => build_mesh(domain, panels),
    }
}

fn sample<T: Real>(f: &dyn Fn(T) -> T, x: T) -> Result<T> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("non-finite function value at {x}")))
    }
}

fn panel_value<T: Real>(
    f: &dyn Fn(T) -> T,
    g: &dyn Fn(T) -> T,
    mesh: &Mesh<T>,
    rules: &PairRules<T>,
) -> Result<T> {
    let dim = mesh.domain.dim();
    let prefactor = c_of_n::<T>(dim)? / T::lit(2.0);
    let rho = rho_of_n::<T>(dim)?;
    let h2 = mesh.h * mesh.h;
    let cells = mesh.cells.len();
    let mut double = T::zero();
    for k in 0..cells {
        for l in k..cells {
            let sym = if l == k { T::one() } else { T::lit(2.0) };
            let mut acc = T::zero();
            for &(xi, eta, w) in rules.pair(k, l) {
                let x = mesh.cell_point(k, xi);
                let y = mesh.cell_point(l, eta);
                let df = sample(f, x)? - sample(f, y)?;
                let dg = sample(g, x)? - sample(g, y)?;
                acc += w * mesh.domain.kernel_factor(x, y) * df * dg / (x - y).abs().powf(rules.exponent);
            }
            double += sym * acc;
        }
    }
    let mut pot = T::zero();
    for k in 0..cells {
        let rule = rules.potential(mesh.boundary_side(k));
        for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
            let site = mesh.site(k, xi);
            let x = site.x;
            pot += w
                * mesh.domain.measure_weight(x)
                * (mesh.domain.potential(site) + rho)
                * sample(f, x)?
                * sample(g, x)?;
        }
    }
    Ok(prefactor * h2 * double + mesh.h * pot)
}

/// Quadrature value of `E(f, g)` for functions of the mesh coordinate
/// (`x` on intervals, `r` on discs) vanishing on `∂Ω`.
pub fn evaluate_form_direct<T: Real>(
    f: &dyn Fn(T) -> T,
    g: &dyn Fn(T) -> T,
    domain: &Domain<T>,
    quad: &QuadratureSpec,
) -> Result<DirectEstimate<T>> {
    let rules = PairRules::<T>::new(quad, 1.0)?;
    let coarse = panel_value(f, g, &panel_mesh(*domain, BASE_PANELS)?, &rules)?;
    let fine = panel_value(f, g, &panel_mesh(*domain, 2 * BASE_PANELS)?, &rules)?;
    Ok(DirectEstimate {
        value: fine,
        error: (fine - coarse).abs(),
    })
}
