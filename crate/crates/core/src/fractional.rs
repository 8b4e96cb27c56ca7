//! Restricted fractional Laplacian `(−Δ)^s` on intervals and its
//! first-order expansion `(−Δ)^s = I + s L_Δ + o(s)`.

use crate::discretization::{assemble_kernel_form, Domain, FormMatrices, KernelForm, Mesh, QuadratureSpec, Site};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigen, Matrix};
use crate::scalar::Real;
use crate::special::fractional_constant;

#[derive(Clone, Debug)]
pub struct FractionalForm<T> {
    pub s: T,
    /// `c(N, s)`.
    pub constant: T,
    pub a_s: Matrix<T>,
    /// Exterior potential at the nodes.
    pub kappa_s: Vec<T>,
}

/// `κ_s(x) = c(1,s)/(2s) [(x−a)^{−2s} + (b−x)^{−2s}]` from the distances to
/// both endpoints.
fn kappa<T: Real>(c: T, s: T, lo: T, hi: T) -> T {
    let e = -(s + s);
    c / (s + s) * (lo.powf(e) + hi.powf(e))
}

/// Galerkin matrix of `(c(N,s)/2) ∬_{ℝ²} (u(x)−u(y))²/|x−y|^{1+2s}` for
/// functions vanishing outside the interval.
pub fn assemble_fractional<T: Real>(mesh: &Mesh<T>, s: T) -> Result<FractionalForm<T>> {
    assemble_fractional_with(mesh, s, &QuadratureSpec::default())
}

pub fn assemble_fractional_with<T: Real>(mesh: &Mesh<T>, s: T, quad: &QuadratureSpec) -> Result<FractionalForm<T>> {
    if !(s > T::zero() && s <= T::lit(0.5)) {
        return Err(Error::Domain(format!("fractional order must lie in (0, 1/2], got {s}")));
    }
    let Domain::Interval { a, b } = mesh.domain else {
        return Err(Error::InvalidInput("the fractional form is implemented on intervals only".into()));
    };
    let c = fractional_constant::<T>(1, s)?;
    let potential = move |site: Site<T>| kappa(c, s, site.lo, site.hi);
    let form = KernelForm {
        exponent: 1.0 + 2.0 * s.to_f64_lossy(),
        prefactor: c / T::lit(2.0),
        potential: &potential,
    };
    let (interior, cells) = assemble_kernel_form(mesh, quad, &form)?;
    let kappa_s = mesh.nodes.iter().map(|&x| kappa(c, s, x - a, b - x)).collect();
    Ok(FractionalForm {
        s,
        constant: c,
        a_s: interior.add(&cells.v),
        kappa_s,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionError<T> {
    pub s: T,
    /// `‖(A_s − M)/s − A‖_F / ‖A‖_F`.
    pub e_form: T,
    /// `|(λ₁(A_s, M) − 1)/s − λ₁(A, M)|`.
    pub e_eig: T,
}

/// Matrix-level and first-eigenvalue defects of the expansion on the mesh
/// of `forms` for each `s` (positive, descending).
pub fn expansion_error<T: Real>(forms: &FormMatrices<T>, s_list: &[T]) -> Result<Vec<ExpansionError<T>>> {
    expansion_error_with(forms, s_list, &QuadratureSpec::default())
}

pub fn expansion_error_with<T: Real>(
    forms: &FormMatrices<T>,
    s_list: &[T],
    quad: &QuadratureSpec,
) -> Result<Vec<ExpansionError<T>>> {
    if s_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("s list must be strictly descending".into()));
    }
    let lambda1 = generalized_eigen(&forms.a, &forms.mass)?.values[0];
    let anorm = forms.a.frobenius_norm();
    s_list
        .iter()
        .map(|&s| {
            let frac = assemble_fractional_with(&forms.mesh, s, quad)?;
            let diff = frac.a_s.sub(&forms.mass).scaled(T::one() / s).sub(&forms.a);
            let ls = generalized_eigen(&frac.a_s, &forms.mass)?.values[0];
            Ok(ExpansionError {
                s,
                e_form: diff.frobenius_norm() / anorm,
                e_eig: ((ls - T::one()) / s - lambda1).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, build_mesh};

    #[test]
    fn half_order_constant() {
        let mesh = build_mesh(Domain::<f64>::unit_interval(), 16).unwrap();
        let f = assemble_fractional(&mesh, 0.5).unwrap();
        assert!((f.constant - 1.0 / std::f64::consts::PI).abs() < 1e-14);
        assert!(f.a_s.symmetry_defect() < 1e-12);
        assert!(assemble_fractional(&mesh, 0.0).is_err());
        assert!(assemble_fractional(&mesh, 0.6).is_err());
        let disc = build_mesh(Domain::disc(0.5).unwrap(), 8).unwrap();
        assert!(assemble_fractional(&disc, 0.1).is_err());
    }

    #[test]
    fn exterior_potential_matches_quadrature() {
        // each tail ∫_d^∞ z^{−1−2s} dz becomes d^{−2s} ∫_0^1 t^{2s−1} dt under z = d/t
        let s = 0.2f64;
        let c = fractional_constant::<f64>(1, s).unwrap();
        let rule: crate::quadrature::GaussRule<f64> = crate::quadrature::gauss_jacobi(30, 2.0 * s - 1.0).unwrap();
        for (lo, hi) in [(0.3, 0.7), (0.05, 0.95)] {
            let tail = |d: f64| rule.weights.iter().map(|&w| w / d.powf(2.0 * s)).sum::<f64>();
            let numeric = c * (tail(lo) + tail(hi));
            assert!((numeric - kappa(c, s, lo, hi)).abs() < 1e-12 * numeric);
        }
    }

    #[test]
    fn small_order_tends_to_mass() {
        let mesh = build_mesh(Domain::<f64>::unit_interval(), 24).unwrap();
        let forms = assemble(&mesh, &QuadratureSpec::default()).unwrap();
        let u: Vec<f64> = mesh.nodes.iter().map(|x| 0.25 - x * x).collect();
        let m = forms.mass.bilinear(&u, &u);
        let gaps: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|&s| (assemble_fractional(&mesh, s).unwrap().a_s.bilinear(&u, &u) - m).abs())
            .collect();
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1]);
        assert!(gaps[2] < 1e-2 * m);
    }
}
