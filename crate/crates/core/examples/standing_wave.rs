//! Standing wave of the cubic model against `tanh(z / sqrt 2)`, and a
//! direction-dependent wave for diag(1, 2).

use acflow::model::{Diffusivity, ModelSpec, Reaction};
use acflow::profile::solve_standing_wave;

fn main() -> acflow::Result<()> {
    let spec = ModelSpec::cubic_identity(0.02);
    let p = solve_standing_wave(&spec, &[1.0, 0.0], 10.0, 1e-3)?;
    let err = p
        .z
        .iter()
        .zip(&p.u0)
        .map(|(z, u)| (u - (z / std::f64::consts::SQRT_2).tanh()).abs())
        .fold(0.0, f64::max);
    println!("cubic: max |U0 - tanh| = {err:.2e}, decay rate {:.6}", p.decay_rate);

    let spec = ModelSpec::new(Reaction::cubic(), Diffusivity::diag(&[1.0, 2.0]), 0.02)?;
    for e in [[1.0, 0.0], [0.0, 1.0]] {
        let p = solve_standing_wave(&spec, &e, 12.0, 1e-3)?;
        println!("diag(1,2), e = {e:?}: U0(1) = {:.6}, decay rate {:.6}", p.eval(1.0), p.decay_rate);
    }
    Ok(())
}
