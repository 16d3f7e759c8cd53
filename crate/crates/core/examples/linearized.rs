//! Linearized problem around the standing wave: a solvable right-hand side
//! and the obstruction `G = U0'`.

use acflow::model::ModelSpec;
use acflow::profile::{linearized_residual, solvability_residual, solve_linearized, standing_wave};

fn main() -> acflow::Result<()> {
    let spec = ModelSpec::cubic_identity(0.02);
    let p = standing_wave(&spec, &[1.0, 0.0])?;
    // odd in z against an even weight: solvable
    let g: Vec<f64> = p.z.iter().map(|z| z * (-z * z).exp()).collect();
    let psi = solve_linearized(&p, &g)?;
    println!(
        "solvability {:.1e}, psi(0) = {}, equation residual {:.1e}",
        solvability_residual(&p, &g),
        psi[p.center()],
        linearized_residual(&p, &psi, &g, 8.0)
    );
    match solve_linearized(&p, &p.u0z) {
        Err(e) => println!("G = U0': {e}"),
        Ok(_) => println!("G = U0' unexpectedly solvable"),
    }
    Ok(())
}
