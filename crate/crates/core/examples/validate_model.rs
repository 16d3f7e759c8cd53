//! Structural checks on a few diffusivities.

use acflow::model::{Diffusivity, ModelSpec, Reaction};

fn main() -> acflow::Result<()> {
    let models = [
        ("identity", Diffusivity::identity(2)),
        ("diag(1, 2)", Diffusivity::diag(&[1.0, 2.0])),
        ("(1 + s^2/2) I", Diffusivity::isotropic_poly(2, &[1.0, 0.0, 0.5])),
        ("(1 + s) I", Diffusivity::isotropic_poly(2, &[1.0, 1.0])),
    ];
    for (name, d) in models {
        let spec = ModelSpec::new(Reaction::cubic(), d, 0.02)?;
        let r = spec.validate(1e-8, 0)?;
        println!(
            "{name:<14} bistable {:<5} elliptic {:<5} (min form {:.3}) equipotential {:<5} (residual {:.1e})",
            r.bistable, r.elliptic, r.min_form, r.equipotential, r.equipotential_max
        );
    }
    Ok(())
}
