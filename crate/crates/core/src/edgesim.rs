//! Edge learning simulator and federated averaging.
//!
//! A device collects samples, quantizes them to `b` bits per feature, ships
//! them over a fading uplink to an edge server, and the server classifies
//! them with one of several learners. Each slot the scheduler picks a
//! bit depth, a transmit power and a server CPU frequency by minimizing a
//! drift-plus-penalty bound
//!
//! ```text
//! −Qc·μc(b, p) − Qp·μp(f) + V·(E(b, p, f) + λ·s·(1 − acc(b)))
//! ```
//!
//! where `Qc` and `Qp` are the uplink and compute backlogs in samples and `s`
//! is the number of samples shipped in the slot. Both queues are fluid:
//! service may split a sample.
//!
//! [`fedavg`] runs the weighted federated averaging loop on quadratic
//! device losses.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{FadingKind, FadingProfile};
use crate::measures::entropy;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result, PROB_TOL};

/// Accuracy model `a_max · (1 − exp(−rate · bits))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccuracyCurve {
    pub a_max: f64,
    pub rate: f64,
}

impl AccuracyCurve {
    pub fn accuracy(&self, bits: u32) -> f64 {
        self.a_max * (1.0 - (-self.rate * f64::from(bits)).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeConfig {
    /// Mean Poisson arrivals, samples per slot.
    pub arrival_rate: f64,
    /// Seconds.
    pub slot_duration: f64,
    pub features_per_sample: usize,
    pub bit_options: Vec<u32>,
    /// Watts.
    pub power_options: Vec<f64>,
    /// Server clock options, cycles per second.
    pub cpu_options: Vec<f64>,
    pub cycles_per_sample: f64,
    /// Effective switched capacitance: CPU power is `kappa · f³`.
    pub kappa: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Watts.
    pub noise_power: f64,
    /// Power gain of the uplink; `block_length` counts slots per fade.
    pub channel: FadingProfile,
    pub accuracy_curves: Vec<AccuracyCurve>,
    /// Spread of the synthetic learner confidences.
    pub confidence_noise: f64,
    pub num_classes: usize,
    /// Average end-to-end delay target in slots (reported, not enforced).
    pub delay_constraint: f64,
    pub v: f64,
    pub lambda: f64,
    pub horizon: usize,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            arrival_rate: 3.0,
            slot_duration: 0.01,
            features_per_sample: 784,
            bit_options: vec![1, 2, 3, 4, 6, 8],
            power_options: vec![0.05, 0.1, 0.2, 0.5, 1.0],
            cpu_options: vec![0.5e9, 1.0e9, 2.0e9],
            cycles_per_sample: 1.0e6,
            kappa: 1.0e-29,
            bandwidth: 1.0e6,
            noise_power: 1.0e-2,
            channel: FadingProfile {
                kind: FadingKind::RayleighBlock,
                mean_snr: 1.0,
                block_length: 1,
            },
            accuracy_curves: vec![
                AccuracyCurve { a_max: 0.95, rate: 0.6 },
                AccuracyCurve { a_max: 0.97, rate: 0.4 },
            ],
            confidence_noise: 0.05,
            num_classes: 10,
            delay_constraint: 10.0,
            v: 1.0e6,
            lambda: 1.0e-3,
            horizon: 10_000,
        }
    }
}

impl EdgeConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return Err(Error::config("arrival rate must be nonnegative"));
        }
        if self.bit_options.is_empty() || self.power_options.is_empty() || self.cpu_options.is_empty() {
            return Err(Error::config("option lists must be nonempty"));
        }
        if self.bit_options.contains(&0) {
            return Err(Error::config("bit depths must be positive"));
        }
        if !self.power_options.iter().all(|&p| positive(p)) || !self.cpu_options.iter().all(|&f| positive(f)) {
            return Err(Error::config("power and cpu options must be positive"));
        }
        for (name, v) in [
            ("slot duration", self.slot_duration),
            ("cycles per sample", self.cycles_per_sample),
            ("bandwidth", self.bandwidth),
            ("noise power", self.noise_power),
        ] {
            if !positive(v) {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.features_per_sample == 0 || self.num_classes < 2 {
            return Err(Error::config("need at least one feature and two classes"));
        }
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return Err(Error::config("kappa must be nonnegative"));
        }
        self.channel.validate()?;
        if self.accuracy_curves.is_empty() {
            return Err(Error::config("at least one learner is required"));
        }
        for c in &self.accuracy_curves {
            if !(0.0..=1.0).contains(&c.a_max) || !(c.rate.is_finite() && c.rate >= 0.0) {
                return Err(Error::config("accuracy curve needs a_max in [0,1] and rate ≥ 0"));
            }
        }
        if !(self.v.is_finite() && self.v >= 0.0) || !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("V and lambda must be nonnegative"));
        }
        if !(self.confidence_noise.is_finite() && self.confidence_noise >= 0.0) {
            return Err(Error::config("confidence noise must be nonnegative"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be positive"));
        }
        Ok(())
    }

    /// Uplink bit rate for a power and a channel gain, bits per second.
    pub fn link_rate(&self, power: f64, gain: f64) -> f64 {
        self.bandwidth * (1.0 + power * gain / self.noise_power).log2()
    }

    fn bits_per_sample(&self, b: u32) -> f64 {
        self.features_per_sample as f64 * f64::from(b)
    }

    /// Best accuracy any learner reaches at `b` bits.
    pub fn accuracy(&self, b: u32) -> f64 {
        self.accuracy_curves
            .iter()
            .map(|c| c.accuracy(b))
            .fold(0.0, f64::max)
    }
}

/// Indices into the option lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub bits: usize,
    pub power: usize,
    pub cpu: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub arrivals: u64,
    pub gain: f64,
    pub decision: Decision,
    /// Samples moved from the uplink to the server.
    pub transmitted: f64,
    /// Samples classified.
    pub computed: f64,
    pub airtime: f64,
    pub busy_time: f64,
    pub energy: f64,
    /// Sum of the credited accuracies of classified samples.
    pub accuracy_mass: f64,
    /// Backlogs at the end of the slot.
    pub comm_queue: f64,
    pub comp_queue: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EdgeSimState {
    pub slot: usize,
    pub comm_queue: f64,
    /// Server backlog in FIFO batches of (samples, bit-option index).
    pub comp_batches: VecDeque<(f64, usize)>,
    pub energy: f64,
    pub computed: f64,
    pub accuracy_mass: f64,
    gain: f64,
}

impl EdgeSimState {
    pub fn comp_queue(&self) -> f64 {
        self.comp_batches.iter().map(|b| b.0).sum()
    }

    pub fn running_accuracy(&self) -> f64 {
        if self.computed > 0.0 {
            self.accuracy_mass / self.computed
        } else {
            0.0
        }
    }
}

fn comm_score(config: &EdgeConfig, qc: f64, gain: f64, bits: usize, power: usize) -> f64 {
    let b = config.bit_options[bits];
    let p = config.power_options[power];
    let rate = config.link_rate(p, gain);
    let mu_c = rate * config.slot_duration / config.bits_per_sample(b);
    let served = qc.min(mu_c);
    let airtime = if served > 0.0 {
        served * config.bits_per_sample(b) / rate
    } else {
        0.0
    };
    -qc * mu_c + config.v * (p * airtime + config.lambda * served * (1.0 - config.accuracy(b)))
}

fn comp_score(config: &EdgeConfig, qp: f64, cpu: usize) -> f64 {
    let f = config.cpu_options[cpu];
    let mu_p = f * config.slot_duration / config.cycles_per_sample;
    let busy = qp.min(mu_p) * config.cycles_per_sample / f;
    -qp * mu_p + config.v * config.kappa * f.powi(3) * busy
}

/// Drift-plus-penalty value of a decision in the given state.
///
/// The penalty charges the energy the decision would spend this slot plus
/// `lambda · (1 − acc(b))` for every sample it ships.
pub fn dpp_score(config: &EdgeConfig, qc: f64, qp: f64, gain: f64, d: Decision) -> f64 {
    comm_score(config, qc, gain, d.bits, d.power) + comp_score(config, qp, d.cpu)
}

fn argmin(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, s) in scores.enumerate() {
        if s < best.1 {
            best = (i, s);
        }
    }
    best.0
}

/// Minimizer of [`dpp_score`] over the option grid; ties go to the lowest
/// (bits, power, cpu) index. The uplink and server terms separate.
pub fn choose(config: &EdgeConfig, qc: f64, qp: f64, gain: f64) -> Decision {
    let np = config.power_options.len();
    let k = argmin(
        (0..config.bit_options.len() * np).map(|k| comm_score(config, qc, gain, k / np, k % np)),
    );
    let cpu = argmin((0..config.cpu_options.len()).map(|f| comp_score(config, qp, f)));
    Decision {
        bits: k / np,
        power: k % np,
        cpu,
    }
}

/// Learner whose confidence vector has the smallest entropy; ties to the lowest index.
pub fn ensemble_select(confidences: &[Vec<f64>]) -> Result<usize> {
    if confidences.is_empty() {
        return Err(Error::input("no learners to select from"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, c) in confidences.iter().enumerate() {
        let sum: f64 = c.iter().sum();
        if c.is_empty() || c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!("learner {i} output is not a distribution")));
        }
        let h = entropy(c);
        if h < best.1 {
            best = (i, h);
        }
    }
    Ok(best.0)
}

// Top-class mass around the learner accuracy, remainder spread evenly.
fn synth_confidence<R: Rng + ?Sized>(acc: f64, k: usize, noise: f64, rng: &mut R) -> Vec<f64> {
    let z: f64 = rng.sample(StandardNormal);
    let floor = 1.0 / k as f64;
    let top = (acc + noise * z).clamp(floor, 1.0);
    let rest = (1.0 - top) / (k - 1) as f64;
    let mut v = vec![rest; k];
    v[0] = top;
    v
}

/// Advance one slot: service with the chosen controls, then admit arrivals.
pub fn step<R: Rng + ?Sized>(state: &mut EdgeSimState, config: &EdgeConfig, rng: &mut R) -> SlotRecord {
    let tau = config.slot_duration;
    if state.slot.is_multiple_of(config.channel.block_length) {
        state.gain = config.channel.draw_snr(rng);
    }
    let gain = state.gain;
    let qc = state.comm_queue;
    let qp = state.comp_queue();
    let d = choose(config, qc, qp, gain);
    let b = config.bit_options[d.bits];
    let p = config.power_options[d.power];
    let f = config.cpu_options[d.cpu];

    let rate = config.link_rate(p, gain);
    let mu_c = rate * tau / config.bits_per_sample(b);
    let transmitted = qc.min(mu_c);
    let airtime = if transmitted > 0.0 {
        transmitted * config.bits_per_sample(b) / rate
    } else {
        0.0
    };

    // the server only works on samples present at the start of the slot
    let mut budget = f * tau / config.cycles_per_sample;
    let mut computed = 0.0;
    let mut accuracy_mass = 0.0;
    while budget > 0.0 {
        let Some(front) = state.comp_batches.front_mut() else {
            break;
        };
        let take = front.0.min(budget);
        let bits = config.bit_options[front.1];
        let conf: Vec<Vec<f64>> = config
            .accuracy_curves
            .iter()
            .map(|c| synth_confidence(c.accuracy(bits), config.num_classes, config.confidence_noise, rng))
            .collect();
        let chosen = ensemble_select(&conf).expect("synthesized distributions");
        accuracy_mass += take * config.accuracy_curves[chosen].accuracy(bits);
        computed += take;
        budget -= take;
        front.0 -= take;
        if front.0 <= 1e-12 {
            state.comp_batches.pop_front();
        }
    }
    let busy_time = computed * config.cycles_per_sample / f;
    let energy = p * airtime + config.kappa * f.powi(3) * busy_time;

    state.comm_queue = (qc - transmitted).max(0.0);
    if transmitted > 0.0 {
        state.comp_batches.push_back((transmitted, d.bits));
    }
    let arrivals = if config.arrival_rate > 0.0 {
        Poisson::new(config.arrival_rate).expect("validated rate").sample(rng) as u64
    } else {
        0
    };
    state.comm_queue += arrivals as f64;
    state.energy += energy;
    state.computed += computed;
    state.accuracy_mass += accuracy_mass;
    state.slot += 1;

    SlotRecord {
        arrivals,
        gain,
        decision: d,
        transmitted,
        computed,
        airtime,
        busy_time,
        energy,
        accuracy_mass,
        comm_queue: state.comm_queue,
        comp_queue: state.comp_queue(),
    }
}

/// Largest OLS slope of a backlog over the last half of a run, samples per slot,
/// accepted as bounded growth.
pub const STABILITY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Slots, by Little's law over the total backlog.
    pub avg_delay: f64,
    /// Joules per slot.
    pub avg_energy: f64,
    pub avg_accuracy: f64,
    /// Backlog slope over the last half of the run.
    pub queue_slope: f64,
    pub stable: bool,
    pub meets_delay: bool,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<SlotRecord>,
    pub final_state: EdgeSimState,
    pub summary: RunSummary,
}

fn ols_slope(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    if y.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in y.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Full run with its slot log.
pub fn run_traced(config: &EdgeConfig, seed: u64) -> Result<RunTrace> {
    config.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut state = EdgeSimState::default();
    let records: Vec<SlotRecord> = (0..config.horizon).map(|_| step(&mut state, config, &mut rng)).collect();

    let burn = config.horizon / 10;
    let kept = &records[burn..];
    let n = kept.len() as f64;
    let backlog: f64 = kept.iter().map(|r| r.comm_queue + r.comp_queue).sum::<f64>() / n;
    let avg_delay = if config.arrival_rate > 0.0 {
        backlog / config.arrival_rate
    } else {
        0.0
    };
    let avg_energy = kept.iter().map(|r| r.energy).sum::<f64>() / n;
    let computed: f64 = kept.iter().map(|r| r.computed).sum();
    let avg_accuracy = if computed > 0.0 {
        kept.iter().map(|r| r.accuracy_mass).sum::<f64>() / computed
    } else {
        0.0
    };
    let tail: Vec<f64> = records[config.horizon / 2..]
        .iter()
        .map(|r| r.comm_queue + r.comp_queue)
        .collect();
    let queue_slope = ols_slope(&tail);
    let summary = RunSummary {
        avg_delay,
        avg_energy,
        avg_accuracy,
        queue_slope,
        stable: queue_slope <= STABILITY_SLOPE,
        meets_delay: avg_delay <= config.delay_constraint,
    };
    Ok(RunTrace {
        records,
        final_state: state,
        summary,
    })
}

/// Averages after a 10% burn-in.
pub fn run(config: &EdgeConfig, seed: u64) -> Result<RunSummary> {
    Ok(run_traced(config, seed)?.summary)
}

/// One cell of a (V, λ) sweep averaged over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub v: f64,
    pub lambda: f64,
    pub avg_delay: f64,
    pub avg_energy: f64,
    pub avg_accuracy: f64,
    /// True when every seed passed the stability test.
    pub stable: bool,
    /// Per-seed summaries, seed order.
    pub runs: Vec<RunSummary>,
}

impl SweepPoint {
    pub const HEADER: &'static str = "V,lambda,avg_delay,avg_energy,avg_accuracy,stable";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.9},{:.9e},{:.9},{}",
            self.v, self.lambda, self.avg_delay, self.avg_energy, self.avg_accuracy, self.stable
        )
    }
}

/// Paired-seed sweep: run `s` of every cell uses `derive_seed(seed, s)`.
pub fn sweep(base: &EdgeConfig, vs: &[f64], lambdas: &[f64], seeds: usize, seed: u64) -> Result<Vec<SweepPoint>> {
    if seeds == 0 {
        return Err(Error::config("need at least one seed"));
    }
    let cells: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| vs.iter().map(move |&v| (v, l)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..seeds).map(move |s| (c, s))).collect();
    let results: Vec<Result<RunSummary>> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (v, lambda) = cells[c];
            let cfg = EdgeConfig { v, lambda, ..base.clone() };
            run(&cfg, derive_seed(seed, s as u64))
        })
        .collect();
    let mut results = results.into_iter();
    cells
        .iter()
        .map(|&(v, lambda)| {
            let runs = results.by_ref().take(seeds).collect::<Result<Vec<_>>>()?;
            let n = runs.len() as f64;
            Ok(SweepPoint {
                v,
                lambda,
                avg_delay: runs.iter().map(|r| r.avg_delay).sum::<f64>() / n,
                avg_energy: runs.iter().map(|r| r.avg_energy).sum::<f64>() / n,
                avg_accuracy: runs.iter().map(|r| r.avg_accuracy).sum::<f64>() / n,
                stable: runs.iter().all(|r| r.stable),
                runs,
            })
        })
        .collect()
}

/// Non-dominated (delay, energy) points sorted by delay.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in sorted {
        if out.last().is_none_or(|last| p.1 < last.1) {
            out.push(p);
        }
    }
    out
}

/// Energy of a frontier at a given delay by linear interpolation; `None` outside its span.
pub fn energy_at_delay(frontier: &[(f64, f64)], delay: f64) -> Option<f64> {
    let first = frontier.first()?;
    let last = frontier.last()?;
    if delay < first.0 || delay > last.0 {
        return None;
    }
    for w in frontier.windows(2) {
        let ((d0, e0), (d1, e1)) = (w[0], w[1]);
        if delay <= d1 {
            if d1 == d0 {
                return Some(e0.min(e1));
            }
            return Some(e0 + (e1 - e0) * (delay - d0) / (d1 - d0));
        }
    }
    Some(last.1)
}

/// Device losses `f_i(w) = (a_i / 2)·‖w − c_i‖²` with weights `n_i / Σ n_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FedConfig {
    pub centers: Vec<Vec<f64>>,
    pub curvatures: Vec<f64>,
    pub examples: Vec<f64>,
    pub rounds: usize,
    pub step_size: f64,
    #[serde(default)]
    pub tol: Option<f64>,
}

impl FedConfig {
    pub fn validate(&self) -> Result<usize> {
        let n = self.centers.len();
        if n == 0 || self.curvatures.len() != n || self.examples.len() != n {
            return Err(Error::config("centers, curvatures and examples need equal nonzero length"));
        }
        let dim = self.centers[0].len();
        if dim == 0 || self.centers.iter().any(|c| c.len() != dim || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::config("centers must share a nonzero dimension"));
        }
        if self.curvatures.iter().any(|&a| !(a.is_finite() && a > 0.0)) {
            return Err(Error::config("curvatures must be positive"));
        }
        if self.examples.iter().any(|&e| !(e.is_finite() && e >= 0.0)) || self.examples.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("example counts must be nonnegative with a positive total"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::config("step size must be positive"));
        }
        Ok(dim)
    }

    pub fn weights(&self) -> Vec<f64> {
        let total: f64 = self.examples.iter().sum();
        self.examples.iter().map(|e| e / total).collect()
    }

    /// Minimizer of Σ p_i f_i.
    pub fn optimum(&self) -> Vec<f64> {
        let p = self.weights();
        let dim = self.centers[0].len();
        let den: f64 = p.iter().zip(&self.curvatures).map(|(p, a)| p * a).sum();
        (0..dim)
            .map(|k| {
                p.iter()
                    .zip(&self.curvatures)
                    .zip(&self.centers)
                    .map(|((p, a), c)| p * a * c[k])
                    .sum::<f64>()
                    / den
            })
            .collect()
    }

    pub fn objective(&self, w: &[f64]) -> f64 {
        self.weights()
            .iter()
            .zip(&self.curvatures)
            .zip(&self.centers)
            .map(|((p, a), c)| {
                p * a / 2.0 * w.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FedRound {
    pub round: usize,
    pub objective: f64,
    pub w_norm_error: f64,
}

impl FedRound {
    pub const HEADER: &'static str = "round,objective,w_norm_error";

    pub fn to_csv(&self) -> String {
        format!("{},{:.12e},{:.12e}", self.round, self.objective, self.w_norm_error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FedResult {
    pub w_final: Vec<f64>,
    /// Round 0 is the initial point.
    pub trace: Vec<FedRound>,
    pub converged: bool,
}

/// Default distance to the optimum that counts as converged.
pub const FED_TOL: f64 = 1e-6;

/// Each round every device takes one gradient step from the global iterate
/// and the server averages the local models with weights `p_i`.
pub fn fedavg(config: &FedConfig, w0: &[f64]) -> Result<FedResult> {
    let dim = config.validate()?;
    if w0.len() != dim {
        return Err(Error::config(format!("initial point has dimension {} not {dim}", w0.len())));
    }
    let p = config.weights();
    debug_assert!((p.iter().sum::<f64>() - 1.0).abs() < PROB_TOL * 10.0);
    let opt = config.optimum();
    let err = |w: &[f64]| w.iter().zip(&opt).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let record = |round, w: &[f64]| FedRound {
        round,
        objective: config.objective(w),
        w_norm_error: err(w),
    };

    let mut w = w0.to_vec();
    let mut trace = vec![record(0, &w)];
    for round in 1..=config.rounds {
        let mut next = vec![0.0; dim];
        for ((pi, a), c) in p.iter().zip(&config.curvatures).zip(&config.centers) {
            for k in 0..dim {
                let local = w[k] - config.step_size * a * (w[k] - c[k]);
                next[k] += pi * local;
            }
        }
        w = next;
        if w.iter().any(|v| !v.is_finite()) {
            break;
        }
        trace.push(record(round, &w));
    }
    let a_max = config.curvatures.iter().copied().fold(0.0, f64::max);
    let tol = config.tol.unwrap_or(FED_TOL);
    let converged = config.step_size <= 2.0 / a_max && w.iter().all(|v| v.is_finite()) && err(&w) <= tol;
    Ok(FedResult {
        w_final: w,
        trace,
        converged,
    })
}
