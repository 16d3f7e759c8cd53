//! Front tracking of a rounded square under isotropic and anisotropic
//! mobility.

use acflow::flow::{simulate_front, FrontCurve};
use acflow::mobility::{ConstantDMobility, ConstantMobility, Mobility};
use acflow::model::EDerivative;
use acflow::shape::Shape;

fn main() -> acflow::Result<()> {
    let shape: Shape = "rounded-square:L=0.2,r=0.05".parse()?;
    let c0 = FrontCurve::from_shape(&shape, 256)?;
    let iso = ConstantMobility::isotropic(1.0);
    let aniso = ConstantDMobility::new([[1.0, 0.0], [0.0, 2.0]], EDerivative::Tangential);
    let runs: [(&str, &dyn Mobility); 2] = [("isotropic", &iso), ("diag(1,2)", &aniso)];
    for (name, mob) in runs {
        println!("{name}");
        for c in simulate_front(&c0, mob, 0.01, 1e-4, &[0.0025, 0.005, 0.0075], |_| Ok(()))? {
            let (lo, hi) = c.spacing();
            println!(
                "  t = {:.4}  area {:.5}  perimeter {:.5}  markers {}  spacing [{:.4}, {:.4}]",
                c.t,
                c.signed_area(),
                c.perimeter(),
                c.len(),
                lo,
                hi
            );
        }
    }
    Ok(())
}
