//! Layer formation from smooth data by time `eps^2 |ln eps| / nu`.
//!
//! `cargo run --release --example generation`

use acflow::harness::{generation_run, ExperimentConfig};

fn main() -> acflow::Result<()> {
    let cfg: ExperimentConfig = serde_json::from_str(
        r#"{"model": {"reaction": {"kind": "cubic"}, "diffusivity": {"kind": "identity"}, "epsilon": 0.04},
            "grid": {"n": 512}, "eps": [0.04, 0.02, 0.01],
            "shape": {"kind": "circle"},
            "times": {"t_end": 0.01},
            "tol": {"eta_g": 0.1, "eta_p": 0.1, "m0_ceiling": 10}}"#,
    )?;
    let report = generation_run(&cfg.validate()?)?;
    println!("{:>6} {:>12} {:>10} {:>10} {:>8}", "eps", "t_eps", "min", "max", "M0");
    for r in &report.rows {
        println!("{:>6} {:>12.5e} {:>10.5} {:>10.5} {:>8.3}", r.eps, r.t_eps, r.min, r.max, r.m0_hat);
    }
    println!("pass {}", report.pass);
    Ok(())
}
