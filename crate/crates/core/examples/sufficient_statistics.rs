//! Which summaries of coin flips keep all information about the bias.

use semcomm::bottleneck::{
    count_statistic, factorization_check, first_draw_statistic, iid_bernoulli_joint,
    sufficiency_check, SUFFICIENCY_TOL,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 5;
    let joint = iid_bernoulli_joint(n, &[0.2, 0.5, 0.8], &[0.25, 0.5, 0.25])?;
    let parity: Vec<usize> = (0..1usize << n).map(|x| x.count_ones() as usize % 2).collect();
    let identity: Vec<usize> = (0..1usize << n).collect();
    for (name, t) in [
        ("identity", identity),
        ("count", count_statistic(n)),
        ("parity", parity),
        ("first draw", first_draw_statistic(n)),
    ] {
        let s = sufficiency_check(&joint, &t, SUFFICIENCY_TOL)?;
        println!(
            "{name:<10} I(X;Θ) {:.5} I(T;Θ) {:.5} gap {:.2e} sufficient {} factorizes {}",
            s.i_x_theta,
            s.i_t_theta,
            s.gap,
            s.is_sufficient,
            factorization_check(&joint, &t)?
        );
    }
    Ok(())
}
