use std::sync::OnceLock;

use loglap::discretization::{assemble, build_mesh, sign_split, Domain, QuadratureSpec};
use loglap::fucik::{verify_pair, FucikFunctional};
use loglap::spectral::classify_sign;
use loglap::FormMatrices64;
use proptest::prelude::*;

const N: usize = 24;

fn forms() -> &'static FormMatrices64 {
    static FORMS: OnceLock<FormMatrices64> = OnceLock::new();
    FORMS.get_or_init(|| {
        let mesh = build_mesh(Domain::interval(-0.5, 0.5).unwrap(), N).unwrap();
        assemble(&mesh, &QuadratureSpec::default()).unwrap()
    })
}

fn vector() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, N).prop_filter("nonzero", |u| u.iter().any(|x| x.abs() > 1e-3))
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-(1i64 << 20)..(1i64 << 20)).prop_map(|k| k as f64 / 1024.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_split_identity(p in dyadic(), q in dyadic()) {
        let (pp, pm, qp, qm) = (p.max(0.0), (-p).max(0.0), q.max(0.0), (-q).max(0.0));
        prop_assert_eq!(
            (p - q) * (p - q),
            (pp - qp) * (pp - qp) + (pm - qm) * (pm - qm) + 2.0 * pp * qm + 2.0 * pm * qp
        );
    }

    #[test]
    fn split_loads_recombine(u in vector()) {
        let f = forms();
        let s = sign_split(&f.mesh, &u).unwrap();
        let mu = f.mass.matvec(&u);
        for i in 0..N {
            prop_assert!((s.plus_load[i] - s.minus_load[i] - mu[i]).abs() < 1e-13);
        }
        let total = f.mass.bilinear(&u, &u);
        prop_assert!((s.plus_sq + s.minus_sq - total).abs() < 1e-12 * total.max(1.0));
    }

    #[test]
    fn energy_is_two_homogeneous(u in vector(), r in 0.0f64..10.0, scale in 0.1f64..10.0) {
        let f = forms();
        let fun = FucikFunctional::new(f, r).unwrap();
        let v: Vec<f64> = u.iter().map(|x| scale * x).collect();
        let (e, es) = (fun.energy(&u).unwrap(), fun.energy(&v).unwrap());
        prop_assert!((es - scale * scale * e).abs() < 1e-10 * (scale * scale * e).abs().max(1.0));
    }

    #[test]
    fn gradient_is_tangent(u in vector(), r in 0.0f64..10.0) {
        let f = forms();
        let fun = FucikFunctional::new(f, r).unwrap();
        let g = fun.constrained_gradient(&u).unwrap();
        let scale = fun.metric_inner(&g, &g).sqrt() * f.mass_norm(&u);
        prop_assert!(fun.metric_inner(&g, &u).abs() <= 1e-10 * scale.max(1.0));
    }

    #[test]
    fn sign_class_is_scale_invariant(u in vector(), scale in 0.01f64..100.0) {
        let v: Vec<f64> = u.iter().map(|x| scale * x).collect();
        prop_assert_eq!(classify_sign(&u, 1e-6).unwrap().class, classify_sign(&v, 1e-6).unwrap().class);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn verify_residual_mirrors_exactly(u in vector(), alpha in 0.5f64..8.0, beta in 0.5f64..8.0) {
        let f = forms();
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        let a = verify_pair(f, alpha, beta, &u).unwrap();
        let b = verify_pair(f, beta, alpha, &neg).unwrap();
        prop_assert_eq!(a.residual, b.residual);
    }
}
