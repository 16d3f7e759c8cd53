//! Phase field against the front-tracked limit for a shrinking circle.
//!
//! `cargo run --release --example propagation -- [n] [eps,eps,...]`

use acflow::harness::{propagation_sweep, ExperimentConfig};

fn main() -> acflow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n = args.get(1).map_or(512, |s| s.parse().expect("grid size"));
    let eps = args.get(2).map_or("0.02,0.014,0.01".to_string(), |s| s.clone());
    let cfg: ExperimentConfig = serde_json::from_str(&format!(
        r#"{{"model": {{"reaction": {{"kind": "cubic"}}, "diffusivity": {{"kind": "identity"}}, "epsilon": 0.02}},
            "grid": {{"n": {n}}}, "eps": [{eps}],
            "shape": {{"kind": "circle", "params": {{"R": 0.25}}}},
            "times": {{"t_end": 0.01, "checkpoints": [0.005]}},
            "tol": {{"eta_g": 0.1, "eta_p": 0.1, "m0_ceiling": 10}},
            "out": "propagation-out"}}"#
    ))?;
    let exp = cfg.validate()?;
    let report = propagation_sweep(&exp, false)?;
    println!("{:>8} {:>12} {:>10} {:>10}", "eps", "hausdorff", "C_p", "bounds");
    for r in &report.rows {
        println!("{:>8} {:>12.4e} {:>10.3} {:>10}", r.eps, r.hausdorff, r.c_p_hat, r.generation);
    }
    match report.fit {
        Some(f) => println!("order p = {:.3} (C = {:.3e})", f.p, f.c),
        None => println!("order p = n/a"),
    }
    println!("monotone {}, band {}, pass {}", report.monotone, report.band_ok, report.pass);
    Ok(())
}
