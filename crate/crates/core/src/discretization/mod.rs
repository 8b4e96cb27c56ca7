//! Meshes, singular quadrature and Galerkin assembly of the logarithmic
//! Laplacian form
//!
//! ```text
//! E(u,v) = (c_N/2) ∬_{Ω×Ω} (u(x)-u(y))(v(x)-v(y)) / |x-y|^N  +  ∫_Ω (h_Ω + ρ_N) u v
//! ```
//!
//! on continuous piecewise-linear hat functions. Intervals are meshed
//! directly; discs are handled through the radial reduction, so only radial
//! functions are represented there.

mod assembly;
mod direct;
pub mod export;
mod rules;
mod split;

pub use assembly::{assemble, cross_term, evaluate_form, FormMatrices};
pub use direct::{evaluate_form_direct, DirectEstimate};
pub(crate) use assembly::{assemble_kernel_form, KernelForm};
pub(crate) use rules::PairRules;
pub use split::{sign_mass, sign_split, weighted_mass, SignSplit};
pub(crate) use split::{for_each_split_point, SplitPoint};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::c_of_n;

/// Bounded domain: an interval `(a, b)` or a disc of radius `R` centred at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain<T> {
    Interval { a: T, b: T },
    Disc { radius: T },
}

impl<T: Real> Domain<T> {
    pub fn interval(a: T, b: T) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!("invalid interval ({a}, {b})")));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn disc(radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("invalid disc radius {radius}")));
        }
        Ok(Domain::Disc { radius })
    }

    /// The default domain `(-1/2, 1/2)`.
    pub fn unit_interval() -> Self {
        Domain::Interval {
            a: T::lit(-0.5),
            b: T::lit(0.5),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Disc { .. } => 2,
        }
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> T {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Disc { radius } => T::PI() * radius * radius,
        }
    }

    pub fn diameter(&self) -> T {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Disc { radius } => T::lit(2.0) * radius,
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        match *self {
            Domain::Interval { a, b } => x.len() == 1 && x[0] > a && x[0] < b,
            Domain::Disc { radius } => {
                x.len() == 2 && (x[0] * x[0] + x[1] * x[1]).sqrt() < radius
            }
        }
    }

    /// Density of the reduced measure in the mesh coordinate.
    pub(crate) fn measure_weight(&self, x: T) -> T {
        match self {
            Domain::Interval { .. } => T::one(),
            Domain::Disc { .. } => T::lit(2.0) * T::PI() * x,
        }
    }

    /// Smooth factor multiplying `|x-y|^{-p}` in the reduced double integral.
    pub(crate) fn kernel_factor(&self, x: T, y: T) -> T {
        match self {
            Domain::Interval { .. } => T::one(),
            Domain::Disc { .. } => {
                let two_pi = T::lit(2.0) * T::PI();
                two_pi * two_pi * x * y / (x + y)
            }
        }
    }

    /// `h_Ω` at a mesh site.
    pub(crate) fn potential(&self, site: Site<T>) -> T {
        match *self {
            Domain::Interval { .. } => -(site.lo * site.hi).ln(),
            Domain::Disc { radius } => {
                let c2 = T::one() / T::PI();
                -c2 * T::PI() * (site.hi * (radius + site.x)).ln()
            }
        }
    }
}

/// Quadrature parameters for assembly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss points per direction on every cell (pair).
    pub gauss_order: usize,
    /// Sub-cells per cell for pairs separated by a single cell.
    pub singular_subdivisions: usize,
    /// Exponent `q` of the map `dist = h τ^q` on cells touching `∂Ω`.
    pub boundary_grading: usize,
    /// Accepted defect of the singular rules on their reference integrals.
    pub consistency_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            gauss_order: 8,
            singular_subdivisions: 2,
            boundary_grading: 4,
            consistency_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 1 || self.singular_subdivisions < 1 || self.boundary_grading < 1 {
            return Err(Error::InvalidInput("quadrature counts must be at least 1".into()));
        }
        if !(self.consistency_tol > 0.0) {
            return Err(Error::InvalidInput("consistency tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Point of the mesh coordinate with its distances to both ends of the
/// coordinate range, computed without cancellation near the ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Site<T> {
    pub x: T,
    pub lo: T,
    pub hi: T,
}

/// Dofs attached to the two endpoints of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

/// End of a cell lying on `∂Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BoundarySide {
    Left,
    Right,
}

/// Uniform mesh in the mesh coordinate with hat-function dofs.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    pub domain: Domain<T>,
    /// Dof coordinates, strictly increasing.
    pub nodes: Vec<T>,
    pub cells: Vec<Cell>,
    pub h: T,
    origin: T,
}

impl<T: Real> Mesh<T> {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_bounds(&self, k: usize) -> (T, T) {
        let lo = self.origin + T::of(k) * self.h;
        (lo, lo + self.h)
    }

    pub(crate) fn cell_point(&self, k: usize, xi: T) -> T {
        self.origin + (T::of(k) + xi) * self.h
    }

    pub(crate) fn site(&self, k: usize, xi: T) -> Site<T> {
        let lo = (T::of(k) + xi) * self.h;
        Site {
            x: self.origin + lo,
            lo,
            hi: (T::of(self.cells.len() - k) - xi) * self.h,
        }
    }

    pub(crate) fn boundary_side(&self, k: usize) -> Option<BoundarySide> {
        match self.domain {
            Domain::Interval { .. } if k == 0 => Some(BoundarySide::Left),
            _ if k + 1 == self.cells.len() => Some(BoundarySide::Right),
            _ => None,
        }
    }
}

/// Uniform mesh with `n` degrees of freedom.
///
/// Intervals get `n` interior nodes (`h = |Ω|/(n+1)`). Discs get `n` radial
/// rings: nodes `r_j = jR/n`, `j = 0..n-1`, the boundary node carrying the
/// Dirichlet condition.
pub fn build_mesh<T: Real>(domain: Domain<T>, n: usize) -> Result<Mesh<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("mesh needs at least 2 dofs, got {n}")));
    }
    match domain {
        Domain::Interval { a, b } => {
            let h = (b - a) / T::of(n + 1);
            let nodes = (1..=n).map(|i| a + T::of(i) * h).collect();
            let cells = (0..=n)
                .map(|k| Cell {
                    left: k.checked_sub(1),
                    right: (k < n).then_some(k),
                })
                .collect();
            Ok(Mesh { domain, nodes, cells, h, origin: a })
        }
        Domain::Disc { radius } => {
            let h = radius / T::of(n);
            let nodes = (0..n).map(|j| T::of(j) * h).collect();
            let cells = (0..n)
                .map(|k| Cell {
                    left: Some(k),
                    right: (k + 1 < n).then_some(k + 1),
                })
                .collect();
            Ok(Mesh { domain, nodes, cells, h, origin: T::zero() })
        }
    }
}

fn check_point<T: Real>(x: &[T], domain: &Domain<T>) -> Result<()> {
    if x.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: x.len(),
        });
    }
    if !domain.contains(x) {
        return Err(Error::Domain(format!("point {x:?} is not inside the domain")));
    }
    Ok(())
}

/// Boundary potential `h_Ω(x) = c_N (∫_{B_1(x)∖Ω} |x-y|^{-N} dy − ∫_{Ω∖B_1(x)} |x-y|^{-N} dy)`.
///
/// Both terms combine into `−c_N ∫_{S^{N-1}} ln ρ(x,θ) dθ` with `ρ(x,θ)` the
/// distance from `x` to `∂Ω` along `θ`, which gives closed forms for
/// intervals and discs of any size.
pub fn h_omega<T: Real>(x: &[T], domain: &Domain<T>) -> Result<T> {
    check_point(x, domain)?;
    let c = c_of_n::<T>(domain.dim())?;
    Ok(match *domain {
        Domain::Interval { a, b } => -c * ((x[0] - a) * (b - x[0])).ln(),
        Domain::Disc { radius } => {
            let r2 = x[0] * x[0] + x[1] * x[1];
            -c * T::PI() * (radius * radius - r2).ln()
        }
    })
}

/// `h_Ω` by quadrature over directions of `−c_N ln ρ(x,θ)`.
pub fn h_omega_numeric<T: Real>(x: &[T], domain: &Domain<T>, points: usize) -> Result<T> {
    check_point(x, domain)?;
    let c = c_of_n::<T>(domain.dim())?;
    match *domain {
        Domain::Interval { a, b } => Ok(-c * ((x[0] - a).ln() + (b - x[0]).ln())),
        Domain::Disc { radius } => {
            if points < 3 {
                return Err(Error::InvalidInput("need at least 3 directions".into()));
            }
            // periodic trapezoid rule, spectrally accurate for interior x
            let m = T::of(points);
            let two_pi = T::lit(2.0) * T::PI();
            let r2 = x[0] * x[0] + x[1] * x[1];
            let mut acc = T::zero();
            for k in 0..points {
                let th = two_pi * T::of(k) / m;
                let proj = x[0] * th.cos() + x[1] * th.sin();
                let rho = -proj + (proj * proj + radius * radius - r2).sqrt();
                acc += rho.ln();
            }
            let total = acc * two_pi / m;
            Ok(-c * total)
        }
    }
}

/// Nodal positive part `max(u, 0)`.
pub fn positive_part<T: Real>(u: &[T]) -> Vec<T> {
    u.iter().map(|&x| if x > T::zero() { x } else { T::zero() }).collect()
}

/// Nodal negative part `max(-u, 0)`, so that `u = u⁺ − u⁻`.
pub fn negative_part<T: Real>(u: &[T]) -> Vec<T> {
    u.iter().map(|&x| if x < T::zero() { -x } else { T::zero() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_mesh_layout() {
        let m = build_mesh(Domain::<f64>::unit_interval(), 3).unwrap();
        assert_eq!(m.nodes, vec![-0.25, 0.0, 0.25]);
        assert_eq!(m.h, 0.25);
        assert_eq!(m.cells.len(), 4);
        assert_eq!(m.cells[0], Cell { left: None, right: Some(0) });
        assert_eq!(m.cells[3], Cell { left: Some(2), right: None });
        let m = build_mesh(Domain::<f64>::unit_interval(), 255).unwrap();
        assert_eq!(m.h, 1.0 / 256.0);
        assert!(build_mesh(Domain::<f64>::unit_interval(), 1).is_err());
    }

    #[test]
    fn disc_mesh_layout() {
        let m = build_mesh(Domain::disc(0.5f64).unwrap(), 4).unwrap();
        assert_eq!(m.nodes, vec![0.0, 0.125, 0.25, 0.375]);
        assert_eq!(m.cells.len(), 4);
        assert_eq!(m.cells[3], Cell { left: Some(3), right: None });
        assert_eq!(m.boundary_side(3), Some(BoundarySide::Right));
        assert_eq!(m.boundary_side(0), None);
    }

    #[test]
    fn h_omega_closed_form() {
        let d = Domain::<f64>::unit_interval();
        assert!((h_omega(&[0.0], &d).unwrap() - 4f64.ln()).abs() < 1e-14);
        assert!((h_omega(&[0.25], &d).unwrap() + (3.0f64 / 16.0).ln()).abs() < 1e-14);
        assert!(h_omega(&[-0.5 + 1e-12], &d).unwrap() > 20.0);
        assert!(h_omega(&[0.5], &d).is_err());
        assert!(h_omega(&[0.0, 0.0], &d).is_err());
    }

    #[test]
    fn disc_potential_matches_directional_quadrature() {
        let d = Domain::disc(0.5f64).unwrap();
        for p in [[0.0, 0.0], [0.2, -0.1], [0.0, 0.45], [-0.3, 0.3]] {
            let exact = h_omega(&p, &d).unwrap();
            let num = h_omega_numeric(&p, &d, 512).unwrap();
            assert!((exact - num).abs() < 1e-10, "{p:?}: {exact} vs {num}");
        }
    }

    #[test]
    fn parts_split() {
        let u = [3.0, -2.0, 0.0];
        assert_eq!(positive_part(&u), vec![3.0, 0.0, 0.0]);
        assert_eq!(negative_part(&u), vec![0.0, 2.0, 0.0]);
    }
}
