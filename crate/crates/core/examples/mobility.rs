//! `lambda(e)` and `mu(e)` for a nonlinear isotropic and a constant
//! anisotropic diffusivity, with the tangential-ellipticity certificate.

use acflow::mobility::{mu_tensor, tabulate_mobility, tangential_form};
use acflow::model::{Diffusivity, EDerivative, ModelSpec, Reaction};

fn main() -> acflow::Result<()> {
    let cubic = ModelSpec::cubic_identity(0.02);
    let m = mu_tensor(&cubic, &[1.0, 0.0], EDerivative::Tangential)?;
    println!("identity: lambda = {:.10} (2 sqrt2 / 3 = {:.10})", m.lambda, 2.0 * 2f64.sqrt() / 3.0);

    let spec = ModelSpec::new(Reaction::cubic(), Diffusivity::rotated_diag([1.0, 2.0], 0.4), 0.02)?;
    let table = tabulate_mobility(&spec, 64, EDerivative::Tangential)?;
    let t = table.table().expect("tabulated");
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "theta", "lambda", "mu11", "mu12", "mu22");
    for k in (0..t.angles()).step_by(8) {
        let m = t.mu[k];
        println!("{:>8.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}", t.theta[k], t.lambda[k], m[0], m[1], m[3]);
    }

    let nonlinear = ModelSpec::new(Reaction::cubic(), Diffusivity::isotropic_poly(2, &[1.0, 0.0, 0.5]), 0.02)?;
    let e = [0.6, 0.8];
    let tf = tangential_form(&nonlinear, &e, &[-0.8, 0.6], EDerivative::Tangential)?;
    println!("(1 + s^2/2) I: tangential form {:.6} >= {:.6}", tf.value, tf.lower_bound);
    Ok(())
}
