//! Reference rules for cell pairs of a uniform mesh with kernel `|x-y|^{-p}`.
//!
//! Points are `(ξ, η, w)` with `ξ` local to the first cell and `η` local to
//! the second, both in `[0, 1]`. The weights absorb the Jacobian of the
//! collapsed coordinates but not the kernel: a pair integral is
//! `h² Σ w F(x(ξ), y(η))` with `F` including `|x-y|^{-p}`.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, gauss_legendre, GaussRule};
use crate::scalar::Real;

use super::{BoundarySide, QuadratureSpec};

#[derive(Clone, Debug)]
pub(crate) struct PairRules<T> {
    pub exponent: T,
    /// Identical cells, both triangles.
    pub identical: Vec<(T, T, T)>,
    /// First cell immediately left of the second.
    pub adjacent: Vec<(T, T, T)>,
    /// Cells separated by exactly one cell.
    pub near: Vec<(T, T, T)>,
    pub far: Vec<(T, T, T)>,
    pub cell: GaussRule<T>,
    pub graded_left: GaussRule<T>,
    pub graded_right: GaussRule<T>,
}

impl<T: Real> PairRules<T> {
    pub fn new(quad: &QuadratureSpec, exponent: f64) -> Result<Self> {
        quad.validate()?;
        if !(exponent >= 0.0 && exponent < 2.5) {
            return Err(Error::Quadrature(format!("kernel exponent {exponent} out of range")));
        }
        let q = quad.gauss_order;
        let p = T::lit(exponent);
        let leg: GaussRule<T> = gauss_legendre(q)?;

        // identical: d = ξ-η = t, η = (1-t)σ, weight t^{2-p}(1-t) on t
        let jac_id: GaussRule<T> = gauss_jacobi(q, 2.0 - exponent)?;
        let mut identical = Vec::with_capacity(2 * q * q);
        for (&t, &wt) in jac_id.nodes.iter().zip(&jac_id.weights) {
            let w_t = wt * (T::one() - t) * t.powf(p - T::lit(2.0));
            for (&s, &ws) in leg.nodes.iter().zip(&leg.weights) {
                let eta = (T::one() - t) * s;
                let w = w_t * ws;
                identical.push((eta + t, eta, w));
                identical.push((eta, eta + t, w));
            }
        }

        // adjacent: s = 1-ξ, t = η, collapsed (s,t) = (u, uv) and (uv, u)
        let jac_adj: GaussRule<T> = gauss_jacobi(q, 3.0 - exponent)?;
        let mut adjacent = Vec::with_capacity(2 * q * q);
        for (&u, &wu) in jac_adj.nodes.iter().zip(&jac_adj.weights) {
            let w_u = wu * u.powf(p - T::lit(2.0));
            for (&v, &wv) in leg.nodes.iter().zip(&leg.weights) {
                let w = w_u * wv;
                adjacent.push((T::one() - u, u * v, w));
                adjacent.push((T::one() - u * v, u, w));
            }
        }

        let split = quad.singular_subdivisions;
        let sub = T::of(split);
        let mut near = Vec::with_capacity(q * q * split * split);
        for i in 0..split {
            for j in 0..split {
                for (&a, &wa) in leg.nodes.iter().zip(&leg.weights) {
                    for (&b, &wb) in leg.nodes.iter().zip(&leg.weights) {
                        near.push((
                            (T::of(i) + a) / sub,
                            (T::of(j) + b) / sub,
                            wa * wb / (sub * sub),
                        ));
                    }
                }
            }
        }

        let mut far = Vec::with_capacity(q * q);
        for (&a, &wa) in leg.nodes.iter().zip(&leg.weights) {
            for (&b, &wb) in leg.nodes.iter().zip(&leg.weights) {
                far.push((a, b, wa * wb));
            }
        }

        let grade = quad.boundary_grading as i32;
        let gq = T::of(quad.boundary_grading);
        let mut graded_left = GaussRule {
            nodes: Vec::with_capacity(q),
            weights: Vec::with_capacity(q),
        };
        for (&tau, &w) in leg.nodes.iter().zip(&leg.weights) {
            graded_left.nodes.push(tau.powi(grade));
            graded_left.weights.push(w * gq * tau.powi(grade - 1));
        }
        let graded_right = GaussRule {
            nodes: graded_left.nodes.iter().map(|&x| T::one() - x).collect(),
            weights: graded_left.weights.clone(),
        };

        let rules = Self {
            exponent: p,
            identical,
            adjacent,
            near,
            far,
            cell: leg,
            graded_left,
            graded_right,
        };
        rules.check_consistency(exponent, quad.consistency_tol)?;
        Ok(rules)
    }

    /// Rule for the cell pair `(k, l)`, `k ≤ l`.
    pub fn pair(&self, k: usize, l: usize) -> &[(T, T, T)] {
        match l - k {
            0 => &self.identical,
            1 => &self.adjacent,
            2 => &self.near,
            _ => &self.far,
        }
    }

    pub fn potential(&self, side: Option<BoundarySide>) -> &GaussRule<T> {
        match side {
            None => &self.cell,
            Some(BoundarySide::Left) => &self.graded_left,
            Some(BoundarySide::Right) => &self.graded_right,
        }
    }

    /// Compares the singular rules with integrals known in closed form.
    fn check_consistency(&self, p: f64, tol: f64) -> Result<()> {
        let pt = self.exponent;
        // ∬_{[0,1]²} |ξ-η|^{2-p} = 2/((3-p)(4-p))
        let id: T = self
            .identical
            .iter()
            .map(|&(x, y, w)| w * (x - y).abs().powf(T::lit(2.0) - pt))
            .sum();
        let id_exact = 2.0 / ((3.0 - p) * (4.0 - p));
        // ∬_{[0,1]²} (s+t)^{2-p} = (2^{4-p} - 2)/((3-p)(4-p))
        let adj: T = self
            .adjacent
            .iter()
            .map(|&(x, y, w)| w * (T::one() - x + y).powf(T::lit(2.0) - pt))
            .sum();
        let adj_exact = (2f64.powf(4.0 - p) - 2.0) / ((3.0 - p) * (4.0 - p));
        // boundary cells only carry hats vanishing on ∂Ω: ∫_0^1 -ln(ξ) ξ² = 1/9
        let lg: T = self.graded_left.integrate(|x| -x.ln() * x * x);
        let checks = [
            ("identical-cell", id.to_f64_lossy(), id_exact),
            ("adjacent-cell", adj.to_f64_lossy(), adj_exact),
            ("boundary", lg.to_f64_lossy(), 1.0 / 9.0),
        ];
        let floor = (T::epsilon().to_f64_lossy() * 64.0).max(tol);
        for (name, got, exact) in checks {
            let err = (got - exact).abs() / exact.abs();
            if !(err <= floor) {
                return Err(Error::Quadrature(format!(
                    "{name} rule misses its reference integral by {err:.3e}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(order: usize) -> QuadratureSpec {
        QuadratureSpec {
            gauss_order: order,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn default_rules_pass_consistency() {
        for p in [1.0, 1.05, 1.2, 1.5, 2.0] {
            PairRules::<f64>::new(&spec(8), p).unwrap();
        }
    }

    #[test]
    fn coarse_rules_are_rejected() {
        assert!(PairRules::<f64>::new(&spec(1), 1.0).is_err());
    }

    #[test]
    fn rules_integrate_smooth_far_integrand() {
        let r = PairRules::<f64>::new(&spec(8), 1.0).unwrap();
        // ∬ 1/(y-x) over [0,1]×[3,4] with y = 3+η
        let got: f64 = r.far.iter().map(|&(x, y, w)| w / (3.0 + y - x)).sum();
        let f = |z: f64| z * z.ln();
        let exact = f(4.0) - 2.0 * f(3.0) + f(2.0);
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn near_rule_sums_to_area() {
        let r = PairRules::<f64>::new(&spec(8), 1.0).unwrap();
        let total: f64 = r.near.iter().map(|p| p.2).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
