//! The reaction ODE `Y_tau = f(Y)` and the constants of its generation
//! estimates.

use acflow::harness::{check_generation_lemma, cubic_ode_closed_form, generation_time, solve_reaction_ode, LemmaSamples};
use acflow::model::ModelSpec;

fn main() -> acflow::Result<()> {
    let spec = ModelSpec::cubic_identity(0.01);
    let s = solve_reaction_ode(&spec, 0.5, 1.0)?;
    println!("Y(1, 0.5) = {:.10}  closed form {:.10}", s.y, cubic_ode_closed_form(0.5, 1.0));
    let mid = solve_reaction_ode(&spec, 0.0, 3.0)?;
    println!("Y_xi(3, 0) = {:.10}  e^3 = {:.10}", mid.y_xi, 3f64.exp());
    println!("t_eps(0.01) = {:.6e}", generation_time(&spec, 0.01));

    let rep = check_generation_lemma(&spec, &LemmaSamples::default())?;
    println!("C growth {:.4}  C curvature {:.4}  C_Y {:.4}", rep.c_growth, rep.c_curvature, rep.c_y);
    for t in &rep.thresholds {
        println!("  eps {:<5} C+ {:.4}  C- {:.4}  bounded {}", t.eps, t.c_plus, t.c_minus, t.bounded);
    }
    println!("pass {}", rep.pass);
    Ok(())
}
