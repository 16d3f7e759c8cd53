use acflow::acsolver::{
    extract_level_set, init, ordering_check, simulate, simulate_observed, stability_dt, Grid, ScalarField, StepMode,
    Stepper,
};
use acflow::model::{Diffusivity, ModelSpec, Reaction};
use proptest::prelude::*;

fn mean_radius(u: &ScalarField, c: [f64; 2]) -> f64 {
    let cs = extract_level_set(u, 0.0).unwrap();
    assert_eq!(cs.len(), 1);
    let p = &cs[0].points;
    p.iter().map(|q| (q[0] - c[0]).hypot(q[1] - c[1])).sum::<f64>() / p.len() as f64
}

#[test]
fn shrinking_circle_follows_radius_law() {
    let spec = ModelSpec::cubic_identity(0.02);
    let g = Grid::new(256).unwrap();
    let u0 = init::radial_tanh(g, [0.5, 0.5], 0.25, 0.02);
    let out = simulate(&u0, &spec, 0.01, &[]).unwrap();
    let r = mean_radius(out.last().unwrap(), [0.5, 0.5]);
    let exact = (0.0625f64 - 0.02).sqrt();
    assert!((r - exact).abs() <= 5e-3, "R = {r}, expected {exact}");
}

#[test]
fn flat_interface_is_quasi_stationary() {
    let eps = 0.02;
    let spec = ModelSpec::cubic_identity(eps);
    let g = Grid::new(128).unwrap();
    // two flat fronts at x = 0.25 and x = 0.75, far apart compared with eps
    let w = std::f64::consts::SQRT_2 * eps;
    let u0 = ScalarField::from_fn(g, |x, _| -((x - 0.25) / w).tanh() * ((x - 0.75) / w).tanh());
    let out = simulate(&u0, &spec, 10.0 * eps * eps, &[]).unwrap();
    for c in extract_level_set(out.last().unwrap(), 0.0).unwrap() {
        for p in &c.points {
            let x = p[0].rem_euclid(1.0);
            let drift = (x - 0.25).abs().min((x - 0.75).abs());
            assert!(drift <= 2.0 * g.h(), "drift {drift}");
        }
    }
}

#[test]
fn unstable_root_is_kept_exactly() {
    let spec = ModelSpec::cubic_identity(0.05);
    let g = Grid::new(32).unwrap();
    let u0 = ScalarField::constant(g, spec.reaction.alpha_mid);
    let mut u = u0.clone();
    let mut s = Stepper::new(&spec, &g, StepMode::Full).unwrap();
    for _ in 0..100 {
        s.advance(&mut u, s.dt_max()).unwrap();
    }
    assert_eq!(u.values, u0.values);
}

#[test]
fn reaction_free_scheme_conserves_mass() {
    let reaction = Reaction::cubic();
    let d = Diffusivity::from_coeffs(
        vec![
            nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.5]),
            nalgebra::DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, 0.0]),
            nalgebra::DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.2]),
        ],
    )
    .unwrap();
    let spec = ModelSpec::new(reaction, d, 0.05).unwrap();
    let g = Grid::new(64).unwrap();
    let mut u = ScalarField::from_fn(g, |x, y| 0.8 * (6.0 * x).sin() * (4.0 * y + 1.0).cos() + 0.1 * (x * y));
    let mut s = Stepper::new(&spec, &g, StepMode::DiffusionOnly).unwrap();
    let mut m0 = u.mass();
    for _ in 0..200 {
        s.advance(&mut u, s.dt_max()).unwrap();
        let m = u.mass();
        assert!((m - m0).abs() <= 1e-12, "mass drift {}", (m - m0).abs());
        m0 = m;
    }
}

#[test]
fn xy_symmetric_data_stays_symmetric() {
    let spec = ModelSpec::new(Reaction::cubic(), Diffusivity::isotropic_poly(2, &[1.0, 0.0, 0.5]), 0.04).unwrap();
    let g = Grid::new(64).unwrap();
    let u0 = ScalarField::from_fn(g, |x, y| 0.6 * (2.0 * std::f64::consts::PI * x).cos() + 0.6 * (2.0 * std::f64::consts::PI * y).cos() - 0.2);
    let out = simulate(&u0, &spec, 2e-3, &[]).unwrap();
    let u = out.last().unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..64 {
        for i in 0..64 {
            worst = worst.max((u.at(i, j) - u.at(j, i)).abs());
        }
    }
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn invariant_region_holds() {
    let spec = ModelSpec::cubic_identity(0.03);
    let g = Grid::new(32).unwrap();
    let eta = 0.2;
    let u0 = ScalarField::from_fn(g, |x, y| {
        let v = 1.2 * (2.0 * std::f64::consts::PI * x).sin() * (4.0 * std::f64::consts::PI * y).cos();
        v.clamp(-1.0 - eta, 1.0 + eta)
    });
    let t_end = 2000.0 * stability_dt(&spec, &g);
    simulate_observed(&u0, &spec, t_end, &[], StepMode::Full, |u| {
        assert!(u.min() >= -1.0 - eta && u.max() <= 1.0 + eta);
        Ok(())
    })
    .unwrap();
}

#[test]
fn shifted_pair_stays_ordered() {
    let spec = ModelSpec::cubic_identity(0.05);
    let g = Grid::new(32).unwrap();
    let lo = init::trigonometric(g, 0.4, 1.0, 1.0);
    let mut hi = lo.clone();
    hi.values.iter_mut().for_each(|v| *v += 0.1);
    let r = ordering_check(&lo, &hi, &spec, 1e-3).unwrap();
    assert!(r.pass, "{r:?}");
    let same = ordering_check(&lo, &lo, &spec, 1e-3).unwrap();
    assert_eq!(same.max_violation, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn random_smooth_pairs_stay_ordered(a in -0.6f64..0.6, b in -0.6f64..0.6, phase in 0.0f64..6.0, gap in 0.0f64..0.3) {
        let spec = ModelSpec::cubic_identity(0.05);
        let g = Grid::new(16).unwrap();
        let lo = ScalarField::from_fn(g, |x, y| {
            a * (2.0 * std::f64::consts::PI * x + phase).sin() + b * (2.0 * std::f64::consts::PI * y).cos()
        });
        let hi = ScalarField::from_fn(g, |x, y| {
            lo.at((x * 16.0) as usize, (y * 16.0) as usize) + gap * (1.0 + (2.0 * std::f64::consts::PI * (x + y)).sin()) / 2.0
        });
        let t = 50.0 * stability_dt(&spec, &g);
        let r = ordering_check(&lo, &hi, &spec, t).unwrap();
        prop_assert!(r.max_violation <= 1e-8);
    }
}
