//! Sentence error versus meaning error over an SNR sweep.
//!
//! Pass a trial count as the first argument (default 20000).

use semcomm::harness::{exact_error_rates, simulate_link, LinkExperiment, LinkMetrics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map_or(Ok(20_000), |s| s.parse())?;
    let exp = LinkExperiment::reference((-6..=12).step_by(2).map(f64::from).collect(), trials, 1);
    println!("{} valid sentences", exp.language.len());
    println!("{},epsilon,gap_sigma,exact_sem_err", LinkMetrics::HEADER);
    for m in simulate_link(&exp)? {
        let (gap, sd) = m.gap();
        let exact = exact_error_rates(&exp, m.epsilon)?;
        println!("{},{:.5},{:.1},{:.6}", m.to_csv(), m.epsilon, gap / sd, exact.sem_err);
    }
    Ok(())
}
