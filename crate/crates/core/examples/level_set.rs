//! Level-set flow against front tracking for diag(1, 2).

use acflow::acsolver::Grid;
use acflow::flow::{hausdorff, signed_distance, simulate_front, simulate_level_set, FrontCurve, LevelSetOptions};
use acflow::mobility::ConstantDMobility;
use acflow::model::EDerivative;
use acflow::shape::Shape;

fn main() -> acflow::Result<()> {
    let mob = ConstantDMobility::new([[1.0, 0.0], [0.0, 2.0]], EDerivative::Tangential);
    let c0 = FrontCurve::from_shape(&Shape::circle(0.25), 256)?;
    let front = simulate_front(&c0, &mob, 0.01, 1e-4, &[], |_| Ok(()))?.pop().expect("final");
    for n in [64, 128, 256] {
        let g = Grid::new(n)?;
        let d = simulate_level_set(&signed_distance(&c0, g)?, &mob, 0.01, &LevelSetOptions::default())?;
        let ls = d.zero_front()?;
        let dist = hausdorff(&front.points, &ls.points);
        println!("n = {n:>4}  hausdorff {:.3e}  ({:.2} h)  eikonal defect {:.3}", dist, dist / g.h(), d.eikonal_defect(6.0 * g.h()));
    }
    Ok(())
}
