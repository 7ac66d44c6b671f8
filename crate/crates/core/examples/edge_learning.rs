//! Energy versus delay for an edge inference scheduler.

use semcomm::edgesim::{pareto_frontier, run_traced, sweep, EdgeConfig, SweepPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = EdgeConfig { horizon: 5000, ..EdgeConfig::default() };

    let trace = run_traced(&EdgeConfig { v: 1e5, ..base.clone() }, 1)?;
    let s = &trace.summary;
    println!(
        "V=1e5: delay {:.3} s, energy {:.3e} J/slot, accuracy {:.3}, stable {}",
        s.avg_delay, s.avg_energy, s.avg_accuracy, s.stable
    );

    let vs = [1e3, 1e4, 1e5, 1e6, 1e7];
    println!("{}", SweepPoint::HEADER);
    let points = sweep(&base, &vs, &[3e-3, 3e-4], 5, 11)?;
    for p in &points {
        println!("{}", p.to_csv());
    }
    for cells in points.chunks(vs.len()) {
        let f = pareto_frontier(&cells.iter().map(|p| (p.avg_delay, p.avg_energy)).collect::<Vec<_>>());
        println!("lambda {}: frontier {:?}", cells[0].lambda, f);
    }
    Ok(())
}
