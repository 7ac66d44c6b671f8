//! Information plane for a noisy parity source.

use semcomm::bottleneck::{information_plane, PlanePoint, RelevanceProblem, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // x in 0..8, θ = parity of x observed through 10% label noise
    let joint: Vec<Vec<f64>> = (0..8u32)
        .map(|x| {
            let parity = (x.count_ones() % 2) as usize;
            (0..2).map(|t| if t == parity { 0.9 / 8.0 } else { 0.1 / 8.0 }).collect()
        })
        .collect();
    let problem = RelevanceProblem::new(joint, 4, 1.0)?;
    println!("I(X;Θ) = {:.4} bits", problem.relevant_information());

    let betas: Vec<f64> = (0..12).map(|i| 0.25 * 1.5f64.powi(i)).collect();
    println!("{}", PlanePoint::HEADER);
    for p in information_plane(&problem, &betas, &SolverOptions::default())? {
        println!("{}", p.to_csv());
    }
    Ok(())
}
