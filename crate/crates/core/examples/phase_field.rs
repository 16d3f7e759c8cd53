//! Shrinking circle in the phase-field equation against `R^2 = R0^2 - 2t`.

use acflow::acsolver::{extract_level_set, init, simulate, Grid};
use acflow::model::ModelSpec;

fn main() -> acflow::Result<()> {
    let eps = 0.02;
    let spec = ModelSpec::cubic_identity(eps);
    let g = Grid::new(256)?;
    let u0 = init::radial_tanh(g, [0.5, 0.5], 0.25, eps);
    let times = [0.0025, 0.005, 0.0075];
    for u in simulate(&u0, &spec, 0.01, &times)? {
        let c = &extract_level_set(&u, 0.0)?[0];
        let r = c.points.iter().map(|p| init::torus_dist(*p, [0.5, 0.5])).sum::<f64>() / c.points.len() as f64;
        println!("t = {:.4}  R = {:.5}  law {:.5}", u.t, r, (0.0625 - 2.0 * u.t).sqrt());
    }
    Ok(())
}
