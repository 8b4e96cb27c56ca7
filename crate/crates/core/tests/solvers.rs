use loglap::discretization::{assemble, build_mesh, Domain, QuadratureSpec};
use loglap::fractional::expansion_error;
use loglap::fucik::{
    initial_path, mountain_pass, randomized_restarts, relax_string, trace_curve, FucikFunctional, GradientMetric,
    MountainPassOptions, StringOptions,
};
use loglap::nonresonance::{endpoint_scale, jump_level, solve_nonresonance, NonlinearitySpec, NonresonanceOptions};
use loglap::spectral::{classify_sign, solve_eig, weighted_solve, SignClass};
use loglap::{Error, FormMatrices64};

fn forms(n: usize) -> FormMatrices64 {
    let mesh = build_mesh(Domain::interval(-0.5, 0.5).unwrap(), n).unwrap();
    assemble(&mesh, &QuadratureSpec::default()).unwrap()
}

#[test]
fn coarse_curve_is_monotone_and_mirrored() {
    let f = forms(64);
    let eig = solve_eig(&f, 2).unwrap();
    let gap = eig[1].lambda - eig[0].lambda;
    let grid: Vec<f64> = (0..6).map(|i| 2.0 * gap * i as f64 / 5.0).collect();
    let res = trace_curve(&f, &grid, &MountainPassOptions::default()).unwrap();
    assert_eq!(res.points.len() + res.mirrored.len(), 12);
    assert!((res.points[0].c - eig[1].lambda).abs() < 1e-8);
    for w in res.points.windows(2) {
        assert!(w[1].c < w[0].c);
        assert!(w[1].alpha > w[0].alpha);
        assert!(w[0].c - w[1].c <= (w[1].r - w[0].r) * 1.01);
    }
    for (p, m) in res.points.iter().zip(&res.mirrored) {
        assert!(p.converged && p.residual < 1e-10);
        assert_eq!((p.alpha, p.beta), (m.beta, m.alpha));
        assert_eq!(classify_sign(&p.eigenfunction, 1e-6).unwrap().class, SignClass::SignChanging);
    }
}

#[test]
fn metrics_agree_on_the_saddle() {
    let f = forms(48);
    let eig = solve_eig(&f, 2).unwrap();
    let r = eig[1].lambda - eig[0].lambda;
    let c: Vec<f64> = [GradientMetric::Lumped, GradientMetric::Consistent]
        .iter()
        .map(|&metric| {
            let opts = MountainPassOptions {
                metric,
                polish_below: None,
                ..MountainPassOptions::default()
            };
            let path = initial_path(&f, &eig[0].vector, &eig[1].vector, 41).unwrap();
            let mp = mountain_pass(&f, r, path, &opts).unwrap();
            assert!(mp.converged && !mp.polished);
            mp.c
        })
        .collect();
    assert!((c[0] - c[1]).abs() < 1e-8 * c[0]);
}

#[test]
fn restarts_agree() {
    let f = forms(48);
    let eig = solve_eig(&f, 2).unwrap();
    let r = eig[1].lambda - eig[0].lambda;
    let runs = randomized_restarts(&f, r, 4, 1, &MountainPassOptions::default()).unwrap();
    let again = randomized_restarts(&f, r, 4, 1, &MountainPassOptions::default()).unwrap();
    for (a, b) in runs.iter().zip(&again) {
        assert!(a.converged);
        assert_eq!(a.c.to_bits(), b.c.to_bits());
        assert!((a.c - runs[0].c).abs() < 1e-3 * runs[0].c);
    }
}

#[test]
fn parallel_sweeps_are_bitwise_serial() {
    let f = forms(48);
    let eig = solve_eig(&f, 2).unwrap();
    let fun = FucikFunctional::new(&f, 1.0).unwrap();
    let run = |parallel| {
        let path = initial_path(&f, &eig[0].vector, &eig[1].vector, 21).unwrap();
        let opts = StringOptions {
            max_sweeps: 200,
            parallel,
            ..StringOptions::default()
        };
        relax_string(&fun, path.nodes, &opts).unwrap()
    };
    let (a, b) = (run(false), run(true));
    assert_eq!(a.energy.to_bits(), b.energy.to_bits());
    assert_eq!(a.path, b.path);
}

#[test]
fn invalid_inputs_are_rejected() {
    let f = forms(16);
    let eig = solve_eig(&f, 2).unwrap();
    assert!(trace_curve(&f, &[0.5, 1.0], &MountainPassOptions::default()).is_err());
    assert!(trace_curve(&f, &[0.0, 1.0, 1.0], &MountainPassOptions::default()).is_err());
    assert!(initial_path(&f, &eig[0].vector, &eig[0].vector, 11).is_err());
    let fun = FucikFunctional::new(&f, 0.0).unwrap();
    assert!(relax_string(&fun, vec![eig[0].vector.clone(); 2], &StringOptions::default()).is_err());
    assert!(expansion_error(&f, &[0.05, 0.1]).is_err());
}

#[test]
fn coarse_fractional_defects_shrink() {
    let f = forms(64);
    let e = expansion_error(&f, &[0.1, 0.05, 0.025]).unwrap();
    for w in e.windows(2) {
        assert!(w[1].e_form < w[0].e_form && w[1].e_eig < w[0].e_eig);
    }
}

#[test]
fn weighted_problem_changes_sign() {
    // a = 1 + ½·1_{x>0}; pairs k ≥ 2 with μ_k a ≥ λ₁ everywhere must change sign
    let f = forms(64);
    let lambda1 = solve_eig(&f, 1).unwrap()[0].lambda;
    let weight: Vec<f64> = f.mesh.nodes.iter().map(|&x| if x > 0.0 { 1.5 } else { 1.0 }).collect();
    let pairs = weighted_solve(&f, &weight, 5).unwrap();
    let mut checked = 0;
    for (mu, u) in pairs.iter().skip(1) {
        if weight.iter().all(|&a| mu * a >= lambda1) {
            assert_eq!(classify_sign(u, 1e-6).unwrap().class, SignClass::SignChanging);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

fn midway(f: &FormMatrices64) -> (NonlinearitySpec<f64>, f64) {
    let eig = solve_eig(f, 2).unwrap();
    let l1 = eig[0].lambda;
    let r = eig[1].lambda - l1;
    let p = trace_curve(f, &[0.0, r], &MountainPassOptions::default()).unwrap().points[1].clone();
    let spec = NonlinearitySpec::jumping(f.n(), 0.5 * (l1 + p.alpha), 0.5 * (l1 + p.beta), 0.1, 0.1, (p.alpha, p.beta));
    (spec, l1)
}

#[test]
fn coarse_nonresonance_solution() {
    let f = forms(64);
    let (spec, _) = midway(&f);
    let opts = NonresonanceOptions::default();
    let r = endpoint_scale(&spec, &f, &opts).unwrap();
    let sol = solve_nonresonance(&spec, &f, &opts).unwrap();
    assert!(sol.converged);
    assert_eq!(sol.r_scale, r);
    assert!(sol.grad_norm <= 1e-6 * f.operator_norm());
    assert!(sol.norm_u >= 1e-3 * r);
    let (d, ok) = jump_level(&spec, &f, &StringOptions::default(), 41).unwrap();
    assert!(ok && d > 0.0);
}

#[test]
fn degenerate_slopes_are_rejected() {
    let f = forms(32);
    let (spec, l1) = midway(&f);
    let (alpha, beta) = spec.target;
    // slopes reaching the curve point violate the strict upper bound
    let on_curve = NonlinearitySpec::jumping(f.n(), alpha, beta, 0.0, 0.1, (alpha, beta));
    assert!(matches!(
        solve_nonresonance(&on_curve, &f, &NonresonanceOptions::default()),
        Err(Error::InvalidInput(_))
    ));
    // slopes ≡ λ₁ leave Ψ(±Rφ₁) bounded below; the δ± > λ₁ check stops them first
    let mut flat = NonlinearitySpec::jumping(f.n(), l1, l1, 0.0, 0.1, (alpha, beta));
    flat.big_gamma_plus.iter_mut().for_each(|g| *g = 0.5 * (l1 + alpha));
    flat.big_gamma_minus.iter_mut().for_each(|g| *g = 0.5 * (l1 + beta));
    let opts = NonresonanceOptions {
        max_doublings: 12,
        ..NonresonanceOptions::default()
    };
    assert!(matches!(endpoint_scale(&flat, &f, &opts), Err(Error::InvalidInput(_))));
}
