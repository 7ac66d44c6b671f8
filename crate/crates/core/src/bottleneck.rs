//! Goal-oriented compression.
//!
//! Two tools live here. [`sufficiency_check`] and [`factorization_check`]
//! test whether a statistic t(x) keeps all the information X carries about a
//! parameter Θ. [`ib_solve`] searches stochastic encoders p(z|x) minimizing
//! I(X;Z) − β·I(Z;Θ) with the self-consistent iteration
//!
//! ```text
//! p(z|x)  ∝ p(z) · exp(−β · KL(p(θ|x) ‖ p(θ|z)))
//! p(z)    = Σ_x p(x) p(z|x)
//! p(θ|z)  = Σ_x p(θ|x) p(x|z)
//! ```
//!
//! Each sweep can only lower the objective, so the recorded trace is
//! nonincreasing. The problem is non-convex; several random starts are run
//! and the best final objective is kept.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::measures::mutual_information;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result, PROB_TOL};

fn check_joint(joint: &[Vec<f64>]) -> Result<usize> {
    let width = joint.first().map_or(0, Vec::len);
    if joint.is_empty() || width == 0 {
        return Err(Error::config("joint table is empty"));
    }
    let mut total = 0.0;
    for (i, row) in joint.iter().enumerate() {
        if row.len() != width {
            return Err(Error::config(format!("joint row {i} has wrong width")));
        }
        for &v in row {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("joint entry {v} invalid")));
            }
            total += v;
        }
    }
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::config(format!("joint table sums to {total}")));
    }
    Ok(width)
}

/// Joint p(x, θ) plus the bottleneck size and trade-off weight.
#[derive(Debug, Clone)]
pub struct RelevanceProblem {
    joint: Vec<Vec<f64>>,
    z_cardinality: usize,
    beta: f64,
}

impl RelevanceProblem {
    pub fn new(joint: Vec<Vec<f64>>, z_cardinality: usize, beta: f64) -> Result<Self> {
        check_joint(&joint)?;
        if z_cardinality == 0 {
            return Err(Error::config("|Z| must be at least 1"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::config("beta must be finite and nonnegative"));
        }
        Ok(Self {
            joint,
            z_cardinality,
            beta,
        })
    }

    pub fn joint(&self) -> &[Vec<f64>] {
        &self.joint
    }

    pub fn z_cardinality(&self) -> usize {
        self.z_cardinality
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.joint.clone(), self.z_cardinality, beta)
    }

    /// I(X;Θ) in bits.
    pub fn relevant_information(&self) -> f64 {
        mutual_information(&self.joint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            tol: 1e-10,
            max_iter: 5000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IbSolution {
    /// p(z|x), one row per x.
    pub encoder: Vec<Vec<f64>>,
    pub marginal: Vec<f64>,
    /// p(θ|z), one row per z, over the original θ columns.
    pub decoder: Vec<Vec<f64>>,
    /// I(X;Z) − β·I(Z;Θ) in bits, starting with the initial encoder.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub i_xz: f64,
    pub i_ztheta: f64,
}

impl IbSolution {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial value")
    }
}

// Problem restricted to θ columns with positive mass.
struct Reduced {
    px: Vec<f64>,
    // p(θ|x); uniform for zero-mass rows, which never carry weight
    cond: Vec<Vec<f64>>,
    // p(x, θ)
    joint: Vec<Vec<f64>>,
    kept: Vec<usize>,
    theta_width: usize,
}

impl Reduced {
    fn new(joint: &[Vec<f64>]) -> Self {
        let theta_width = joint[0].len();
        let kept: Vec<usize> = (0..theta_width)
            .filter(|&j| joint.iter().any(|r| r[j] > 0.0))
            .collect();
        let joint: Vec<Vec<f64>> = joint
            .iter()
            .map(|r| kept.iter().map(|&j| r[j]).collect())
            .collect();
        let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
        let k = kept.len();
        let cond = joint
            .iter()
            .zip(&px)
            .map(|(r, &m)| {
                if m > 0.0 {
                    r.iter().map(|v| v / m).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            })
            .collect();
        Self {
            px,
            cond,
            joint,
            kept,
            theta_width,
        }
    }

    fn marginal(&self, enc: &[Vec<f64>], nz: usize) -> Vec<f64> {
        let mut pz = vec![0.0; nz];
        for (row, &m) in enc.iter().zip(&self.px) {
            for (o, &e) in pz.iter_mut().zip(row) {
                *o += m * e;
            }
        }
        pz
    }

    // p(z, θ) = Σ_x p(x, θ) p(z|x)
    fn z_theta(&self, enc: &[Vec<f64>], nz: usize) -> Vec<Vec<f64>> {
        let k = self.kept.len();
        let mut out = vec![vec![0.0; k]; nz];
        for (row, jrow) in enc.iter().zip(&self.joint) {
            for (z, &e) in row.iter().enumerate() {
                if e > 0.0 {
                    for (o, &v) in out[z].iter_mut().zip(jrow) {
                        *o += e * v;
                    }
                }
            }
        }
        out
    }

    fn objective(&self, enc: &[Vec<f64>], beta: f64) -> (f64, f64, f64) {
        let nz = enc[0].len();
        let xz: Vec<Vec<f64>> = enc
            .iter()
            .zip(&self.px)
            .map(|(r, &m)| r.iter().map(|e| e * m).collect())
            .collect();
        let i_xz = mutual_information(&xz);
        let i_zt = mutual_information(&self.z_theta(enc, nz));
        (i_xz - beta * i_zt, i_xz, i_zt)
    }
}

fn kl_nats(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
        .sum()
}

fn solve_once(red: &Reduced, nz: usize, beta: f64, opts: &SolverOptions, seed: u64) -> Result<IbSolution> {
    let mut rng = rng_from_seed(seed);
    // symmetric Dirichlet(1) rows
    let mut enc: Vec<Vec<f64>> = red
        .px
        .iter()
        .map(|_| {
            let g: Vec<f64> = (0..nz).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let s: f64 = g.iter().sum();
            g.into_iter().map(|v| v / s).collect()
        })
        .collect();

    let mut trace = vec![red.objective(&enc, beta).0];
    let mut converged = false;
    let mut iterations = 0;
    let mut logw = vec![0.0; nz];
    while iterations < opts.max_iter {
        iterations += 1;
        let pz = red.marginal(&enc, nz);
        let zt = red.z_theta(&enc, nz);
        let dec: Vec<Vec<f64>> = zt
            .iter()
            .zip(&pz)
            .map(|(r, &m)| {
                if m > 0.0 {
                    r.iter().map(|v| v / m).collect()
                } else {
                    vec![0.0; r.len()]
                }
            })
            .collect();

        let mut delta: f64 = 0.0;
        for (x, row) in enc.iter_mut().enumerate() {
            if red.px[x] == 0.0 {
                row.copy_from_slice(&pz);
                continue;
            }
            for z in 0..nz {
                logw[z] = if pz[z] > 0.0 {
                    pz[z].ln() - beta * kl_nats(&red.cond[x], &dec[z])
                } else {
                    f64::NEG_INFINITY
                };
            }
            let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !max.is_finite() {
                return Err(Error::numeric(format!(
                    "encoder row {x} has no admissible cluster"
                )));
            }
            let mut total = 0.0;
            for w in logw.iter_mut() {
                *w = (*w - max).exp();
                total += *w;
            }
            for (e, w) in row.iter_mut().zip(&logw) {
                let new = w / total;
                delta = delta.max((new - *e).abs());
                *e = new;
            }
        }
        let obj = red.objective(&enc, beta).0;
        if !obj.is_finite() {
            return Err(Error::numeric("objective became non-finite"));
        }
        trace.push(obj);
        if delta < opts.tol {
            converged = true;
            break;
        }
    }

    let pz = red.marginal(&enc, nz);
    let zt = red.z_theta(&enc, nz);
    let decoder = zt
        .iter()
        .zip(&pz)
        .map(|(r, &m)| {
            let mut full = vec![0.0; red.theta_width];
            for (&j, &v) in red.kept.iter().zip(r) {
                full[j] = if m > 0.0 { v / m } else { 0.0 };
            }
            if m == 0.0 {
                // unused cluster: report the prior over θ
                for (&j, c) in red.kept.iter().zip(red.col_prior()) {
                    full[j] = c;
                }
            }
            full
        })
        .collect();
    let (_, i_xz, i_ztheta) = red.objective(&enc, beta);
    Ok(IbSolution {
        encoder: enc,
        marginal: pz,
        decoder,
        objective_trace: trace,
        converged,
        iterations,
        i_xz,
        i_ztheta,
    })
}

impl Reduced {
    fn col_prior(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.kept.len()];
        for row in &self.joint {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }
}

/// Best of `opts.restarts` random starts (lowest final objective, earliest on ties).
pub fn ib_solve(problem: &RelevanceProblem, opts: &SolverOptions) -> Result<IbSolution> {
    let red = Reduced::new(&problem.joint);
    let restarts = opts.restarts.max(1);
    let runs: Vec<Result<IbSolution>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            solve_once(
                &red,
                problem.z_cardinality,
                problem.beta,
                opts,
                derive_seed(opts.seed, r as u64),
            )
        })
        .collect();
    let mut best: Option<IbSolution> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.objective() < b.objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub beta: f64,
    pub i_xz: f64,
    pub i_ztheta: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PlanePoint {
    pub const HEADER: &'static str = "beta,I_XZ,I_ZTheta,objective,iterations,converged";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.9},{:.9},{:.9},{},{}",
            self.beta,
            self.i_xz + 0.0,
            self.i_ztheta + 0.0,
            self.objective + 0.0,
            self.iterations,
            self.converged
        )
    }
}

/// Solve once per β (each with the same seed) and report the information-plane point.
pub fn information_plane(
    problem: &RelevanceProblem,
    betas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<PlanePoint>> {
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("beta grid must be sorted"));
    }
    betas
        .iter()
        .map(|&beta| {
            let sol = ib_solve(&problem.with_beta(beta)?, opts)?;
            Ok(PlanePoint {
                beta,
                i_xz: sol.i_xz,
                i_ztheta: sol.i_ztheta,
                objective: sol.objective(),
                iterations: sol.iterations,
                converged: sol.converged,
            })
        })
        .collect()
}

/// Default sufficiency tolerance in bits.
pub const SUFFICIENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sufficiency {
    pub i_x_theta: f64,
    pub i_t_theta: f64,
    pub gap: f64,
    pub is_sufficient: bool,
}

impl Sufficiency {
    pub const HEADER: &'static str = "I_X_Theta,I_T_Theta,gap,is_sufficient";

    pub fn to_csv(&self) -> String {
        format!(
            "{:.12},{:.12},{:.6e},{}",
            self.i_x_theta + 0.0,
            self.i_t_theta + 0.0,
            self.gap + 0.0,
            self.is_sufficient
        )
    }
}

fn check_statistic(joint: &[Vec<f64>], t: &[usize]) -> Result<()> {
    if t.len() != joint.len() {
        return Err(Error::config(format!(
            "statistic has {} values for {} outcomes",
            t.len(),
            joint.len()
        )));
    }
    if joint.len() > 1 << 20 {
        return Err(Error::config("more than 2^20 outcomes"));
    }
    Ok(())
}

/// Table p(t, θ) obtained by merging rows of p(x, θ) with equal t(x).
pub fn statistic_joint(joint: &[Vec<f64>], t: &[usize]) -> Vec<Vec<f64>> {
    let width = joint.first().map_or(0, Vec::len);
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (row, &tv) in joint.iter().zip(t) {
        let acc = groups.entry(tv).or_insert_with(|| vec![0.0; width]);
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    groups.into_values().collect()
}

/// Exact information loss of replacing X by t(X).
pub fn sufficiency_check(joint: &[Vec<f64>], t: &[usize], tol: f64) -> Result<Sufficiency> {
    check_joint(joint)?;
    check_statistic(joint, t)?;
    let i_x_theta = mutual_information(joint);
    let i_t_theta = mutual_information(&statistic_joint(joint, t));
    let gap = i_x_theta - i_t_theta;
    Ok(Sufficiency {
        i_x_theta,
        i_t_theta,
        gap,
        is_sufficient: gap <= tol,
    })
}

/// Relative tolerance on likelihood-ratio constancy.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// Factorization test: for every pair x, x' with t(x) = t(x'), the ratio
/// p(x, θ) / p(x', θ) must not depend on θ.
///
/// Rows with zero total mass are off the support and ignored. Within a
/// compared pair, cells where both entries vanish are skipped; a single zero
/// fails the test.
pub fn factorization_check(joint: &[Vec<f64>], t: &[usize]) -> Result<bool> {
    check_joint(joint)?;
    check_statistic(joint, t)?;
    let mut reps: BTreeMap<usize, usize> = BTreeMap::new();
    for (x, (row, &tv)) in joint.iter().zip(t).enumerate() {
        if row.iter().all(|&v| v == 0.0) {
            continue;
        }
        let Some(&r) = reps.get(&tv) else {
            reps.insert(tv, x);
            continue;
        };
        let base = &joint[r];
        let mut ratio: Option<f64> = None;
        for (&a, &b) in row.iter().zip(base) {
            match (a > 0.0, b > 0.0) {
                (false, false) => continue,
                (true, true) => {}
                _ => return Ok(false),
            }
            let q = a / b;
            match ratio {
                None => ratio = Some(q),
                Some(r0) => {
                    if (q - r0).abs() > FACTORIZATION_TOL * r0.abs().max(q.abs()) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Joint of n iid Bernoulli(θ) draws and θ, rows indexed by the bit pattern
/// (bit i = X_{i+1}), one column per candidate θ.
pub fn iid_bernoulli_joint(n: usize, thetas: &[f64], prior: &[f64]) -> Result<Vec<Vec<f64>>> {
    if n == 0 || n > 20 {
        return Err(Error::config("sample size must be in 1..=20"));
    }
    if thetas.len() != prior.len() || thetas.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::config("invalid Bernoulli parameters"));
    }
    crate::language::check_distribution(prior, "theta prior")?;
    Ok((0..1usize << n)
        .map(|x| {
            let ones = x.count_ones() as i32;
            thetas
                .iter()
                .zip(prior)
                .map(|(&th, &p)| p * th.powi(ones) * (1.0 - th).powi(n as i32 - ones))
                .collect()
        })
        .collect())
}

/// Number of ones in each row index of [`iid_bernoulli_joint`].
pub fn count_statistic(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|x| x.count_ones() as usize).collect()
}

/// First draw X_1 of each row index of [`iid_bernoulli_joint`].
pub fn first_draw_statistic(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|x| x & 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::entropy;

    fn deterministic_relevance(nx: usize, ntheta: usize) -> Vec<Vec<f64>> {
        (0..nx)
            .map(|x| {
                let mut r = vec![0.0; ntheta];
                r[x % ntheta] = 1.0 / nx as f64;
                r
            })
            .collect()
    }

    #[test]
    fn beta_zero_compresses_everything() {
        let joint = vec![vec![0.3, 0.1], vec![0.05, 0.25], vec![0.2, 0.1]];
        let p = RelevanceProblem::new(joint, 3, 0.0).unwrap();
        let s = ib_solve(&p, &SolverOptions::default()).unwrap();
        assert!(s.i_xz <= 1e-9, "I(X;Z) = {}", s.i_xz);
    }

    #[test]
    fn single_cluster_is_trivial() {
        let joint = vec![vec![0.3, 0.1], vec![0.05, 0.25], vec![0.2, 0.1]];
        let p = RelevanceProblem::new(joint, 1, 5.0).unwrap();
        let s = ib_solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.i_xz, 0.0);
        assert_eq!(s.i_ztheta, 0.0);
    }

    #[test]
    fn large_beta_recovers_partition() {
        let joint = deterministic_relevance(8, 4);
        let h_theta = entropy(&[0.25; 4]);
        let p = RelevanceProblem::new(joint, 4, 100.0).unwrap();
        let s = ib_solve(&p, &SolverOptions::default()).unwrap();
        assert!(s.i_ztheta >= 0.99 * h_theta, "{} vs {}", s.i_ztheta, h_theta);
    }

    #[test]
    fn trace_is_nonincreasing_and_tables_valid() {
        let joint = vec![
            vec![0.10, 0.02, 0.03],
            vec![0.05, 0.15, 0.00],
            vec![0.01, 0.04, 0.20],
            vec![0.12, 0.08, 0.20],
        ];
        for beta in [0.5, 2.0, 10.0] {
            let p = RelevanceProblem::new(joint.clone(), 3, beta).unwrap();
            let s = ib_solve(&p, &SolverOptions { restarts: 3, ..Default::default() }).unwrap();
            for w in s.objective_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
            for row in s.encoder.iter().chain(&s.decoder) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            assert!((s.marginal.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_theta_columns_are_dropped() {
        let joint = vec![vec![0.5, 0.0, 0.0], vec![0.0, 0.0, 0.5]];
        let p = RelevanceProblem::new(joint, 2, 50.0).unwrap();
        let s = ib_solve(&p, &SolverOptions::default()).unwrap();
        assert!((s.i_ztheta - 1.0).abs() < 1e-6);
        assert_eq!(s.decoder[0].len(), 3);
        assert!(s.decoder.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn plane_respects_bounds() {
        let joint = vec![
            vec![0.10, 0.02, 0.03],
            vec![0.05, 0.15, 0.00],
            vec![0.01, 0.04, 0.20],
            vec![0.12, 0.08, 0.20],
        ];
        let p = RelevanceProblem::new(joint, 2, 1.0).unwrap();
        let ixt = p.relevant_information();
        let pts = information_plane(&p, &[0.0, 1.0, 5.0, 50.0], &SolverOptions::default()).unwrap();
        assert!(pts[0].i_xz.abs() < 1e-9 && pts[0].i_ztheta.abs() < 1e-9);
        for pt in &pts {
            assert!(pt.i_ztheta <= ixt + 1e-12);
            assert!(pt.i_xz <= 1.0 + 1e-12);
        }
        assert!(information_plane(&p, &[2.0, 1.0], &SolverOptions::default()).is_err());
    }

    #[test]
    fn invalid_problems_rejected() {
        assert!(RelevanceProblem::new(vec![vec![0.5, 0.4]], 2, 1.0).is_err());
        assert!(RelevanceProblem::new(vec![vec![0.5, 0.5]], 0, 1.0).is_err());
        assert!(RelevanceProblem::new(vec![vec![0.5, 0.5]], 2, -1.0).is_err());
    }

    #[test]
    fn identity_statistic_has_zero_gap() {
        let joint = iid_bernoulli_joint(3, &[0.3, 0.6], &[0.4, 0.6]).unwrap();
        let t: Vec<usize> = (0..8).collect();
        let s = sufficiency_check(&joint, &t, SUFFICIENCY_TOL).unwrap();
        assert_eq!(s.gap, 0.0);
        assert!(factorization_check(&joint, &t).unwrap());
    }

    #[test]
    fn single_theta_always_factorizes() {
        let joint = vec![vec![0.2], vec![0.5], vec![0.3]];
        assert!(factorization_check(&joint, &[0, 0, 0]).unwrap());
        assert!(sufficiency_check(&joint, &[0, 0, 0], SUFFICIENCY_TOL)
            .unwrap()
            .is_sufficient);
    }

    #[test]
    fn support_mismatch_fails_factorization() {
        let joint = vec![vec![0.25, 0.25], vec![0.5, 0.0]];
        assert!(!factorization_check(&joint, &[0, 0]).unwrap());
        // zero rows are off the support
        let joint = vec![vec![0.0, 0.0], vec![0.5, 0.5]];
        assert!(factorization_check(&joint, &[0, 0]).unwrap());
    }

    #[test]
    fn statistic_length_checked() {
        let joint = vec![vec![0.5], vec![0.5]];
        assert!(sufficiency_check(&joint, &[0], 1e-10).is_err());
    }
}
