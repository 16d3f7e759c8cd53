//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines show up in `cargo test` output.

use std::f64::consts::SQRT_2;
use std::time::Instant;

use acflow::acsolver::{ordering_check, simulate_observed, stability_dt, Grid, ScalarField, StepMode, Stepper};
use acflow::flow::{hausdorff, signed_distance, simulate_front, simulate_level_set, FrontCurve, LevelSetOptions};
use acflow::harness::{
    cubic_ode_closed_form, generation_run, propagation_sweep, solve_reaction_ode, ExperimentConfig, MIN_ORDER,
};
use acflow::mobility::{constant_d_mobility, mu_tensor, tangential_form, ConstantDMobility, ConstantMobility};
use acflow::model::{sample_even_spd_diffusivity, Diffusivity, EDerivative, ModelSpec, Reaction};
use acflow::profile::{linearized_residual, solvability_residual, solve_linearized, solve_standing_wave, standing_wave};
use acflow::shape::Shape;
use acflow::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

fn standing_wave_exactness() -> Result<Outcome> {
    let spec = ModelSpec::cubic_identity(0.02);
    let p = solve_standing_wave(&spec, &[1.0, 0.0], 10.0, 1e-3)?;
    let err = p
        .z
        .iter()
        .zip(&p.u0)
        .map(|(z, u)| (u - (z / SQRT_2).tanh()).abs())
        .fold(0.0, f64::max);
    outcome(err <= 1e-6, format!("max |U0 - tanh(z/sqrt2)| = {err:.3e} (tol 1e-6)"))
}

fn mobility_oracles() -> Result<Outcome> {
    let cubic = ModelSpec::cubic_identity(0.02);
    let m = mu_tensor(&cubic, &[1.0, 0.0], EDerivative::Tangential)?;
    let lam_err = (m.lambda - 2.0 * SQRT_2 / 3.0).abs();
    let id_err = (&m.mu - DMatrix::<f64>::identity(2, 2)).amax();
    let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let spec = ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[1.0, 2.0]), 0.02)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut closed_err: f64 = 0.0;
    for _ in 0..32 {
        let e = random_unit(&mut rng, 2);
        let mu = mu_tensor(&spec, &e, EDerivative::Tangential)?.mu;
        closed_err = closed_err.max((mu - constant_d_mobility(&d, &e, EDerivative::Tangential)).amax());
    }
    outcome(
        lam_err <= 1e-8 && id_err <= 1e-6 && closed_err <= 1e-6,
        format!(
            "|lambda - 2sqrt2/3| = {lam_err:.2e} (1e-8), |mu - I| = {id_err:.2e} (1e-6), \
             diag(1,2) closed form over 32 directions {closed_err:.2e} (1e-6)"
        ),
    )
}

fn ellipticity_certificate() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    let mut models = 0;
    while models < 200 {
        let d = sample_even_spd_diffusivity(&mut rng, 2);
        let spec = ModelSpec::new(Reaction::cubic(), d, 0.02)?;
        if !spec.validate(1e-8, models as u64)?.pass {
            continue;
        }
        models += 1;
        let e = random_unit(&mut rng, 2);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let eta = [-e[1] * sign, e[0] * sign];
        worst = worst.min(tangential_form(&spec, &e, &eta, EDerivative::Tangential)?.value);
    }
    outcome(worst > 1e-8, format!("min tangential form over {models} models = {worst:.4e} (> 1e-8)"))
}

fn linearized_solver() -> Result<Outcome> {
    let spec = ModelSpec::cubic_identity(0.02);
    let p = standing_wave(&spec, &[1.0, 0.0])?;
    let g: Vec<f64> = p.z.iter().map(|z| z * (-z * z).exp()).collect();
    let solv = solvability_residual(&p, &g).abs();
    let psi = solve_linearized(&p, &g)?;
    let psi0 = psi[p.center()];
    let res = linearized_residual(&p, &psi, &g, 8.0);
    let refused = matches!(solve_linearized(&p, &p.u0z), Err(Error::NotSolvable { .. }));
    outcome(
        solv <= 1e-8 && psi0 == 0.0 && res <= 1e-5 && refused,
        format!("solvability {solv:.2e} (1e-8), psi(0) = {psi0}, residual {res:.2e} (1e-5), G = U0' refused: {refused}"),
    )
}

fn front_tracking() -> Result<Outcome> {
    let c0 = FrontCurve::from_shape(&Shape::circle(0.25), 256)?;
    let mut worst: f64 = 0.0;
    simulate_front(&c0, &ConstantMobility::isotropic(1.0), 0.02, 1e-5, &[], |c| {
        let (r, _) = c.radius_stats([0.5, 0.5]);
        worst = worst.max((r - (0.0625 - 2.0 * c.t).sqrt()).abs());
        Ok(())
    })?;
    outcome(worst <= 1e-3, format!("max |R - sqrt(R0^2 - 2t)| up to t = 0.02: {worst:.3e} (1e-3)"))
}

fn cross_solver_agreement() -> Result<Outcome> {
    let g = Grid::new(256)?;
    let mob = ConstantDMobility::new([[1.0, 0.0], [0.0, 2.0]], EDerivative::Tangential);
    let c0 = FrontCurve::from_shape(&Shape::circle(0.25), 256)?;
    let front = simulate_front(&c0, &mob, 0.01, 1e-5, &[], |_| Ok(()))?.pop().expect("final");
    let d = simulate_level_set(&signed_distance(&c0, g)?, &mob, 0.01, &LevelSetOptions::default())?;
    let dist = hausdorff(&front.points, &d.zero_front()?.points);
    outcome(dist <= 2.0 * g.h(), format!("Hausdorff at t = 0.01 on 256^2: {dist:.3e} (2h = {:.3e})", 2.0 * g.h()))
}

fn cubic_experiment(eps: &[f64]) -> ExperimentConfig {
    let list = eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
    serde_json::from_str(&format!(
        r#"{{"model": {{"reaction": {{"kind": "cubic"}}, "diffusivity": {{"kind": "identity"}}, "epsilon": {}}},
            "grid": {{"n": 512}}, "eps": [{list}],
            "shape": {{"kind": "circle", "params": {{"R": 0.25}}}},
            "times": {{"t_end": 0.01}},
            "tol": {{"eta_g": 0.1, "eta_p": 0.1, "m0_ceiling": 10}}}}"#,
        eps[0]
    ))
    .expect("config")
}

fn generation() -> Result<Outcome> {
    let exp = cubic_experiment(&[0.04, 0.02, 0.01]).validate()?;
    let rep = generation_run(&exp)?;
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("eps {} [{:.4}, {:.4}] M0 {:.3}", r.eps, r.min, r.max, r.m0_hat))
        .collect();
    let pass = rep.rows.iter().all(|r| r.bounds && r.m0_hat <= 10.0);
    outcome(pass, format!("eta_g 0.1, M0 <= 10: {}", rows.join("; ")))
}

fn propagation() -> Result<Outcome> {
    let exp = cubic_experiment(&[0.02, 0.014, 0.01]).validate()?;
    let rep = propagation_sweep(&exp, false)?;
    let rows: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("eps {} dist {:.3e} C_p {:.3}", r.eps, r.hausdorff, r.c_p_hat))
        .collect();
    let p = rep.fit.map_or(f64::NAN, |f| f.p);
    let band = rep.rows.iter().all(|r| r.band_violations == 0 && r.c_p_hat.is_finite());
    outcome(
        rep.monotone && p >= MIN_ORDER && band,
        format!("{}; monotone {}, p = {p:.3} (>= {MIN_ORDER}), band {band}", rows.join("; "), rep.monotone),
    )
}

fn scheme_properties() -> Result<Outcome> {
    // invariant region over 1e4 steps
    let spec = ModelSpec::cubic_identity(0.03);
    let g = Grid::new(32)?;
    let eta = 0.2;
    let u0 = ScalarField::from_fn(g, |x, y| {
        (1.2 * (2.0 * std::f64::consts::PI * x).sin() * (4.0 * std::f64::consts::PI * y).cos()).clamp(-1.0 - eta, 1.0 + eta)
    });
    let mut steps = 0usize;
    let mut inside = true;
    simulate_observed(&u0, &spec, 1e4 * stability_dt(&spec, &g), &[], StepMode::Full, |u| {
        steps += 1;
        inside &= u.min() >= -1.0 - eta && u.max() <= 1.0 + eta;
        Ok(())
    })?;

    // mass of the reaction-free scheme, s-dependent anisotropic D
    let d = Diffusivity::from_coeffs(vec![
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.5]),
        DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, 0.0]),
        DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.2]),
    ])?;
    let spec_d = ModelSpec::new(Reaction::cubic(), d, 0.05)?;
    let g64 = Grid::new(64)?;
    let mut u = ScalarField::from_fn(g64, |x, y| 0.8 * (6.0 * x).sin() * (4.0 * y + 1.0).cos() + 0.1 * x * y);
    let mut stepper = Stepper::new(&spec_d, &g64, StepMode::DiffusionOnly)?;
    let mut mass_drift: f64 = 0.0;
    let mut m0 = u.mass();
    for _ in 0..1000 {
        stepper.advance(&mut u, stepper.dt_max())?;
        let m = u.mass();
        mass_drift = mass_drift.max((m - m0).abs());
        m0 = m;
    }

    // ordering on seeded pairs
    let spec_o = ModelSpec::cubic_identity(0.05);
    let g16 = Grid::new(16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut violation: f64 = 0.0;
    for _ in 0..20 {
        let (a, b, ph) = (rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8), rng.gen_range(0.0..6.3));
        let gap = rng.gen_range(0.0..0.3);
        let lo = ScalarField::from_fn(g16, |x, y| {
            a * (2.0 * std::f64::consts::PI * x + ph).sin() + b * (2.0 * std::f64::consts::PI * y).cos()
        });
        let mut hi = lo.clone();
        for (k, v) in hi.values.iter_mut().enumerate() {
            let (x, y) = ((k % 16) as f64 / 16.0, (k / 16) as f64 / 16.0);
            *v += gap * (1.0 + (2.0 * std::f64::consts::PI * (x + 2.0 * y)).sin()) / 2.0;
        }
        let r = ordering_check(&lo, &hi, &spec_o, 100.0 * stability_dt(&spec_o, &g16))?;
        violation = violation.max(r.max_violation);
    }
    outcome(
        inside && steps >= 10_000 && mass_drift <= 1e-12 && violation <= 1e-8,
        format!(
            "invariant region over {steps} steps: {inside}; mass drift per step {mass_drift:.2e} (1e-12); \
             ordering violation over 20 pairs {violation:.2e} (1e-8)"
        ),
    )
}

fn reaction_ode() -> Result<Outcome> {
    let spec = ModelSpec::cubic_identity(0.01);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let tau = 5.0 * i as f64 / 49.0;
        for j in 0..50 {
            let xi = -1.5 + 3.0 * j as f64 / 49.0;
            let s = solve_reaction_ode(&spec, xi, tau)?;
            worst = worst.max((s.y - cubic_ode_closed_form(xi, tau)).abs());
        }
    }
    let mut lin: f64 = 0.0;
    for i in 0..50 {
        let tau = 5.0 * i as f64 / 49.0;
        let s = solve_reaction_ode(&spec, spec.reaction.alpha_mid, tau)?;
        lin = lin.max((s.y_xi - (spec.reaction.nu * tau).exp()).abs());
    }
    outcome(
        worst <= 1e-8 && lin <= 1e-6,
        format!("|Y - closed form| on 50x50 = {worst:.2e} (1e-8), |Y_xi(tau, alpha) - e^(nu tau)| = {lin:.2e} (1e-6)"),
    )
}

fn main() {
    let checks: [(&str, fn() -> Result<Outcome>); 10] = [
        ("1 standing wave exactness", standing_wave_exactness),
        ("2 mobility oracles", mobility_oracles),
        ("3 ellipticity certificate", ellipticity_certificate),
        ("4 linearized solver", linearized_solver),
        ("5 front tracking", front_tracking),
        ("6 cross-solver agreement", cross_solver_agreement),
        ("7 generation", generation),
        ("8 propagation", propagation),
        ("9 scheme properties", scheme_properties),
        ("10 reaction ODE", reaction_ode),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
