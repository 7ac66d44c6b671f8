//! FedAvg on quadratic device losses.

use semcomm::edgesim::{fedavg, FedConfig, FedRound};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = FedConfig {
        centers: vec![vec![0.0, 1.0], vec![2.0, -1.0], vec![4.0, 0.5]],
        curvatures: vec![1.0, 2.0, 0.5],
        examples: vec![100.0, 50.0, 10.0],
        rounds: 60,
        step_size: 0.25,
        tol: Some(1e-8),
    };
    let r = fedavg(&cfg, &[0.0, 0.0])?;
    println!("{}", FedRound::HEADER);
    for round in r.trace.iter().step_by(5) {
        println!("{}", round.to_csv());
    }
    println!("w* = {:?}", cfg.optimum());
    println!("w  = {:?} converged {}", r.w_final, r.converged);
    Ok(())
}
