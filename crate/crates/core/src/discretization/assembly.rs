use rayon::prelude::*;

use crate::error::{check_len, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Real;
use crate::special::{c_of_n, rho_of_n};

use super::{negative_part, positive_part, Mesh, PairRules, QuadratureSpec, Site};

/// Galerkin matrices of the logarithmic Laplacian on a mesh.
#[derive(Clone, Debug)]
pub struct FormMatrices<T> {
    /// `A = S + V`.
    pub a: Matrix<T>,
    /// Interior double integral.
    pub s: Matrix<T>,
    /// Potential `∫ (h_Ω + ρ_N) φ_p φ_q`.
    pub v: Matrix<T>,
    /// Consistent mass `∫ φ_p φ_q`.
    pub mass: Matrix<T>,
    /// `∫ φ_p`, the diagonal of the row-lumped mass.
    pub lumped_mass: Vec<T>,
    pub mesh: Mesh<T>,
}

impl<T: Real> FormMatrices<T> {
    pub(crate) fn from_parts(s: Matrix<T>, v: Matrix<T>, mass: Matrix<T>, lumped_mass: Vec<T>, mesh: Mesh<T>) -> Self {
        Self {
            a: s.add(&v),
            s,
            v,
            mass,
            lumped_mass,
            mesh,
        }
    }

    pub fn n(&self) -> usize {
        self.a.dim()
    }

    /// `uᵀ M v`.
    pub fn mass_inner(&self, u: &[T], v: &[T]) -> T {
        self.mass.bilinear(u, v)
    }

    /// `‖ũ‖₂`.
    pub fn mass_norm(&self, u: &[T]) -> T {
        self.mass_inner(u, u).max(T::zero()).sqrt()
    }

    /// `‖A‖_∞`.
    pub fn operator_norm(&self) -> T {
        self.a.norm_inf()
    }

    pub fn nodes(&self) -> &[T] {
        &self.mesh.nodes
    }
}

/// Double-integral exponent, prefactor and zero-order potential of a form
/// `prefactor ∬ (u(x)-u(y))(v(x)-v(y)) g(x,y)/|x-y|^p + ∫ potential·u v`.
pub(crate) struct KernelForm<'a, T> {
    pub exponent: f64,
    pub prefactor: T,
    pub potential: &'a (dyn Fn(Site<T>) -> T + Sync),
}

type Triplets<T> = Vec<(usize, usize, T)>;

fn local_dofs<T: Real>(mesh: &Mesh<T>, k: usize, l: usize, xi: T, eta: T) -> ([(usize, T); 4], usize) {
    let mut out = [(usize::MAX, T::zero()); 4];
    let mut len = 0;
    let mut put = |dof: Option<usize>, val: T| {
        if let Some(d) = dof {
            if let Some(slot) = out[..len].iter_mut().find(|e| e.0 == d) {
                slot.1 += val;
            } else {
                out[len] = (d, val);
                len += 1;
            }
        }
    };
    let ck = mesh.cells[k];
    let cl = mesh.cells[l];
    put(ck.left, T::one() - xi);
    put(ck.right, xi);
    put(cl.left, -(T::one() - eta));
    put(cl.right, -eta);
    (out, len)
}

fn pair_contributions<T: Real>(
    mesh: &Mesh<T>,
    rules: &PairRules<T>,
    form: &KernelForm<'_, T>,
    k: usize,
) -> Triplets<T> {
    let h2 = mesh.h * mesh.h;
    let p = rules.exponent;
    let mut out = Vec::new();
    let mut loc = [[T::zero(); 4]; 4];
    for l in k..mesh.cells.len() {
        let mut dofs = [usize::MAX; 4];
        let mut ndof = 0;
        for c in [mesh.cells[k], mesh.cells[l]] {
            for d in [c.left, c.right].into_iter().flatten() {
                if !dofs[..ndof].contains(&d) {
                    dofs[ndof] = d;
                    ndof += 1;
                }
            }
        }
        if ndof == 0 {
            continue;
        }
        for row in loc.iter_mut() {
            *row = [T::zero(); 4];
        }
        let sym = if l == k { T::one() } else { T::lit(2.0) };
        for &(xi, eta, w) in rules.pair(k, l) {
            let x = mesh.cell_point(k, xi);
            let y = mesh.cell_point(l, eta);
            let kern = sym * w * h2 * form.prefactor * mesh.domain.kernel_factor(x, y)
                / (x - y).abs().powf(p);
            let (vals, len) = local_dofs(mesh, k, l, xi, eta);
            for a in 0..len {
                let ia = dofs[..ndof].iter().position(|&d| d == vals[a].0).unwrap();
                let wa = kern * vals[a].1;
                for b in a..len {
                    let ib = dofs[..ndof].iter().position(|&d| d == vals[b].0).unwrap();
                    let (r, c) = if ia <= ib { (ia, ib) } else { (ib, ia) };
                    loc[r][c] += wa * vals[b].1;
                }
            }
        }
        for r in 0..ndof {
            for c in r..ndof {
                out.push((dofs[r], dofs[c], loc[r][c]));
            }
        }
    }
    out
}

fn scatter<T: Real>(target: &mut Matrix<T>, parts: Vec<Triplets<T>>) {
    for part in parts {
        for (i, j, v) in part {
            target[(i, j)] += v;
            if i != j {
                target[(j, i)] += v;
            }
        }
    }
}

pub(crate) struct CellMatrices<T> {
    pub v: Matrix<T>,
    pub mass: Matrix<T>,
    pub lumped: Vec<T>,
}

fn cell_matrices<T: Real>(
    mesh: &Mesh<T>,
    rules: &PairRules<T>,
    potential: &(dyn Fn(Site<T>) -> T + Sync),
) -> CellMatrices<T> {
    let n = mesh.n();
    let mut v = Matrix::zeros(n);
    let mut m = Matrix::zeros(n);
    let mut lumped = vec![T::zero(); n];
    for (k, cell) in mesh.cells.iter().enumerate() {
        let dofs = [(cell.left, true), (cell.right, false)];
        let pot_rule = rules.potential(mesh.boundary_side(k));
        for (&xi, &w) in pot_rule.nodes.iter().zip(&pot_rule.weights) {
            let site = mesh.site(k, xi);
            let base = w * mesh.h * mesh.domain.measure_weight(site.x) * potential(site);
            accumulate_cell(&mut v, &dofs, xi, base);
        }
        for (&xi, &w) in rules.cell.nodes.iter().zip(&rules.cell.weights) {
            let x = mesh.cell_point(k, xi);
            let base = w * mesh.h * mesh.domain.measure_weight(x);
            accumulate_cell(&mut m, &dofs, xi, base);
            if let Some(i) = cell.left {
                lumped[i] += base * (T::one() - xi);
            }
            if let Some(i) = cell.right {
                lumped[i] += base * xi;
            }
        }
    }
    CellMatrices { v, mass: m, lumped }
}

fn accumulate_cell<T: Real>(target: &mut Matrix<T>, dofs: &[(Option<usize>, bool); 2], xi: T, base: T) {
    let phi = |left: bool| if left { T::one() - xi } else { xi };
    for &(da, la) in dofs {
        let Some(i) = da else { continue };
        for &(db, lb) in dofs {
            let Some(j) = db else { continue };
            if i <= j {
                let val = base * phi(la) * phi(lb);
                target[(i, j)] += val;
                if i != j {
                    target[(j, i)] += val;
                }
            }
        }
    }
}

/// Stiffness, potential and consistent mass of a generic kernel form.
pub(crate) fn assemble_kernel_form<T: Real>(
    mesh: &Mesh<T>,
    quad: &QuadratureSpec,
    form: &KernelForm<'_, T>,
) -> Result<(Matrix<T>, CellMatrices<T>)> {
    let rules = PairRules::<T>::new(quad, form.exponent)?;
    let parts: Vec<Triplets<T>> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|k| pair_contributions(mesh, &rules, form, k))
        .collect();
    let mut s = Matrix::zeros(mesh.n());
    scatter(&mut s, parts);
    Ok((s, cell_matrices(mesh, &rules, form.potential)))
}

/// Assembles `A = S + V` and the mass matrices of the logarithmic Laplacian.
pub fn assemble<T: Real>(mesh: &Mesh<T>, quad: &QuadratureSpec) -> Result<FormMatrices<T>> {
    let dim = mesh.domain.dim();
    let c = c_of_n::<T>(dim)?;
    let rho = rho_of_n::<T>(dim)?;
    let domain = mesh.domain;
    let potential = move |site: Site<T>| domain.potential(site) + rho;
    let form = KernelForm {
        exponent: 1.0,
        prefactor: c / T::lit(2.0),
        potential: &potential,
    };
    let (s, cells) = assemble_kernel_form(mesh, quad, &form)?;
    Ok(FormMatrices::from_parts(s, cells.v, cells.mass, cells.lumped, mesh.clone()))
}

/// Bilinear form `uᵀ A v`.
pub fn evaluate_form<T: Real>(forms: &FormMatrices<T>, u: &[T], v: &[T]) -> Result<T> {
    check_len(forms.n(), u.len())?;
    check_len(forms.n(), v.len())?;
    Ok(dot(u, &forms.a.matvec(v)))
}

/// Interaction `h(u⁺, u⁻) = −(u⁺)ᵀ A u⁻`.
pub fn cross_term<T: Real>(forms: &FormMatrices<T>, u: &[T]) -> Result<T> {
    check_len(forms.n(), u.len())?;
    let up = positive_part(u);
    let um = negative_part(u);
    Ok(-dot(&up, &forms.a.matvec(&um)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{build_mesh, Domain};

    fn forms(n: usize) -> FormMatrices<f64> {
        let mesh = build_mesh(Domain::unit_interval(), n).unwrap();
        assemble(&mesh, &QuadratureSpec::default()).unwrap()
    }

    #[test]
    fn matrices_are_symmetric() {
        let f = forms(20);
        assert_eq!(f.a.symmetry_defect(), 0.0);
        assert_eq!(f.mass.symmetry_defect(), 0.0);
    }

    #[test]
    fn mass_is_exact_for_hats() {
        let f = forms(9);
        let h = 0.1;
        assert!((f.mass[(3, 3)] - 2.0 * h / 3.0).abs() < 1e-15);
        assert!((f.mass[(3, 4)] - h / 6.0).abs() < 1e-15);
        assert_eq!(f.mass[(3, 5)], 0.0);
        // hat sum is 1 inside and linear on the two boundary cells
        let ones = vec![1.0; 9];
        let total = f.mass.bilinear(&ones, &ones);
        assert!((total - (1.0 - 4.0 * h / 3.0)).abs() < 1e-14);
        for &m in &f.lumped_mass {
            assert!((m - h).abs() < 1e-15);
        }
    }

    #[test]
    fn separated_entries_are_negative() {
        let f = forms(16);
        for i in 0..16usize {
            for j in 0..16 {
                if i.abs_diff(j) >= 2 {
                    assert!(f.s[(i, j)] < 0.0);
                    assert_eq!(f.v[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn cross_term_vanishes_for_one_signed() {
        let f = forms(10);
        let u: Vec<f64> = (0..10).map(|i| (i as f64 * 0.3).sin().abs()).collect();
        assert_eq!(cross_term(&f, &u).unwrap(), 0.0);
        assert!(evaluate_form(&f, &u, &[0.0; 3]).is_err());
    }

    #[test]
    fn single_precision_assembly() {
        let mesh = build_mesh(Domain::<f32>::unit_interval(), 16).unwrap();
        let quad = QuadratureSpec {
            consistency_tol: 1e-5,
            ..QuadratureSpec::default()
        };
        let f = assemble(&mesh, &quad).unwrap();
        let f64f = forms(16);
        for i in 0..16 {
            let (x, y) = (f.a[(i, i)] as f64, f64f.a[(i, i)]);
            assert!((x - y).abs() < 1e-4 * y.abs(), "{i}: {x} vs {y}");
        }
    }
}
