//! Discrete memoryless channels.
//!
//! AWGN links are represented by the binary symmetric channel induced by
//! hard-decision BPSK, ε = Q(√(2·snr)). Rayleigh block fading draws one
//! exponential SNR per block and converts it the same way.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::language::check_distribution;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Row-stochastic transition matrix p(y|x).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    inputs: usize,
    outputs: usize,
    transition: Vec<f64>,
}

impl DiscreteChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = rows.len();
        let outputs = rows.first().map_or(0, Vec::len);
        if inputs == 0 || outputs == 0 {
            return Err(Error::config("channel matrix is empty"));
        }
        let mut transition = Vec::with_capacity(inputs * outputs);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != outputs {
                return Err(Error::config(format!("channel row {i} has wrong width")));
            }
            check_distribution(row, &format!("channel row {i}"))?;
            transition.extend_from_slice(row);
        }
        Ok(Self {
            inputs,
            outputs,
            transition,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// p(y|x).
    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.transition[x * self.outputs + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.inputs).map(|x| self.row(x).to_vec()).collect()
    }

    /// Draw one output for input `x`.
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let row = self.row(x);
        for (y, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        // rounding left u above the cumulative sum; fall back to the last
        // output with positive mass
        row.iter().rposition(|&p| p > 0.0).unwrap_or(self.outputs - 1)
    }
}

/// Binary symmetric channel with crossover ε ∈ [0, 0.5].
pub fn bsc(epsilon: f64) -> Result<DiscreteChannel> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::config(format!(
            "crossover probability {epsilon} outside [0, 0.5]"
        )));
    }
    DiscreteChannel::new(vec![
        vec![1.0 - epsilon, epsilon],
        vec![epsilon, 1.0 - epsilon],
    ])
}

/// Gaussian tail Q(x) = ½ erfc(x/√2).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Hard-decision BPSK crossover probability for a linear SNR.
pub fn snr_to_crossover(snr_linear: f64) -> f64 {
    q_function((2.0 * snr_linear.max(0.0)).sqrt())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Pass a symbol sequence through a channel; deterministic given the seed.
pub fn transmit(channel: &DiscreteChannel, x: &[usize], rng_seed: u64) -> Result<Vec<usize>> {
    let mut rng = rng_from_seed(rng_seed);
    transmit_with(channel, x, &mut rng)
}

pub fn transmit_with<R: Rng + ?Sized>(
    channel: &DiscreteChannel,
    x: &[usize],
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(bad) = x.iter().find(|&&s| s >= channel.inputs) {
        return Err(Error::input(format!(
            "symbol {bad} outside channel input alphabet of size {}",
            channel.inputs
        )));
    }
    Ok(x.iter().map(|&s| channel.sample(s, rng)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FadingKind {
    None,
    RayleighBlock,
}

/// Fading model for a link with a given mean SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingProfile {
    pub kind: FadingKind,
    /// Linear mean SNR (or mean power gain, for the edge simulator).
    pub mean_snr: f64,
    /// Symbols per fade realization.
    pub block_length: usize,
}

impl FadingProfile {
    pub fn new(kind: FadingKind, mean_snr: f64, block_length: usize) -> Result<Self> {
        let p = Self {
            kind,
            mean_snr,
            block_length,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_snr.is_finite() && self.mean_snr > 0.0) {
            return Err(Error::config("mean SNR must be positive"));
        }
        if self.block_length == 0 {
            return Err(Error::config("fading block length must be at least 1"));
        }
        Ok(())
    }

    /// One SNR realization (the mean itself when there is no fading).
    pub fn draw_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FadingKind::None => self.mean_snr,
            FadingKind::RayleighBlock => {
                Exp::new(1.0 / self.mean_snr)
                    .expect("validated mean")
                    .sample(rng)
            }
        }
    }

    /// Binary link for `n_bits` uses: one BSC per fading block.
    pub fn realize<R: Rng + ?Sized>(&self, n_bits: usize, rng: &mut R) -> BitLink {
        match self.kind {
            FadingKind::None => BitLink::uniform(snr_to_crossover(self.mean_snr)),
            FadingKind::RayleighBlock => {
                let blocks = n_bits.div_ceil(self.block_length).max(1);
                let crossovers = (0..blocks)
                    .map(|_| snr_to_crossover(self.draw_snr(rng)))
                    .collect();
                BitLink {
                    crossovers,
                    block_length: self.block_length,
                }
            }
        }
    }
}

/// Per-position binary symmetric link: constant crossover within each block.
#[derive(Debug, Clone, PartialEq)]
pub struct BitLink {
    crossovers: Vec<f64>,
    block_length: usize,
}

impl BitLink {
    pub fn uniform(epsilon: f64) -> Self {
        Self {
            crossovers: vec![epsilon],
            block_length: usize::MAX,
        }
    }

    pub fn blocks(crossovers: Vec<f64>, block_length: usize) -> Result<Self> {
        if crossovers.is_empty() || block_length == 0 {
            return Err(Error::config("bit link needs at least one block"));
        }
        if crossovers.iter().any(|e| !(0.0..=0.5).contains(e)) {
            return Err(Error::config("crossover outside [0, 0.5]"));
        }
        Ok(Self {
            crossovers,
            block_length,
        })
    }

    /// True when every position shares one crossover probability.
    pub fn is_uniform(&self) -> bool {
        self.crossovers.len() == 1
    }

    /// Crossover probability at bit position `t`.
    #[inline]
    pub fn crossover(&self, t: usize) -> f64 {
        let b = (t / self.block_length).min(self.crossovers.len() - 1);
        self.crossovers[b]
    }

    pub fn transmit<R: Rng + ?Sized>(&self, bits: &[u8], rng: &mut R) -> Vec<u8> {
        bits.iter()
            .enumerate()
            .map(|(t, &b)| {
                let u: f64 = rng.random();
                if u < self.crossover(t) {
                    b ^ 1
                } else {
                    b
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed as seeded;

    #[test]
    fn bsc_examples() {
        assert_eq!(bsc(0.0).unwrap(), DiscreteChannel::identity(2).unwrap());
        assert_eq!(bsc(0.5).unwrap().row(0), &[0.5, 0.5]);
        assert_eq!(bsc(0.1).unwrap().rows(), vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert!(matches!(bsc(0.6), Err(Error::Config(_))));
        assert!(bsc(-0.1).is_err());
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(snr_to_crossover(0.0), 0.5);
        assert!(snr_to_crossover(1e4) < 1e-300);
        // Q(√2) = ½ erfc(1), erfc(1) = 0.157299207050285130658...
        let expected = 0.5 * 0.157_299_207_050_285_13;
        assert!((snr_to_crossover(db_to_linear(0.0)) - expected).abs() < 1e-15);
        assert!((expected - 0.0786).abs() < 1e-4);
    }

    #[test]
    fn crossover_strictly_decreasing() {
        let grid: Vec<f64> = (-60..=120).map(|d| snr_to_crossover(db_to_linear(d as f64 / 10.0))).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn identity_channel_passes_through() {
        let ch = DiscreteChannel::identity(4).unwrap();
        let x = vec![0, 3, 2, 1, 1];
        assert_eq!(transmit(&ch, &x, 9).unwrap(), x);
    }

    #[test]
    fn transmit_is_deterministic() {
        let ch = bsc(0.3).unwrap();
        let x: Vec<usize> = (0..200).map(|i| i % 2).collect();
        assert_eq!(transmit(&ch, &x, 42).unwrap(), transmit(&ch, &x, 42).unwrap());
    }

    #[test]
    fn unknown_symbol_is_input_error() {
        let ch = bsc(0.1).unwrap();
        assert!(matches!(transmit(&ch, &[0, 2], 1), Err(Error::Input(_))));
    }

    #[test]
    fn fully_noisy_bsc_flip_rate() {
        let n = 1_000_000;
        let ch = bsc(0.5).unwrap();
        let x = vec![0usize; n];
        let y = transmit(&ch, &x, 2024).unwrap();
        let rate = y.iter().filter(|&&v| v == 1).count() as f64 / n as f64;
        assert!((rate - 0.5).abs() < 0.002, "flip rate {rate}");
    }

    #[test]
    fn empirical_transitions_match_matrix() {
        let ch = DiscreteChannel::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.05, 0.9, 0.05],
        ])
        .unwrap();
        let n = 1_000_000;
        for x in 0..2 {
            let y = transmit(&ch, &vec![x; n], 77 + x as u64).unwrap();
            for out in 0..3 {
                let p = ch.prob(x, out);
                let freq = y.iter().filter(|&&v| v == out).count() as f64 / n as f64;
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                assert!((freq - p).abs() <= 3.0 * sigma + 1e-12, "x={x} y={out} {freq} vs {p}");
            }
        }
    }

    #[test]
    fn rayleigh_blocks_have_one_crossover_each() {
        let prof = FadingProfile::new(FadingKind::RayleighBlock, 4.0, 6).unwrap();
        let mut rng = seeded(5);
        let link = prof.realize(12, &mut rng);
        assert_eq!(link.crossover(0), link.crossover(5));
        assert_eq!(link.crossover(6), link.crossover(11));
        assert!(FadingProfile::new(FadingKind::None, 0.0, 1).is_err());
        assert!(FadingProfile::new(FadingKind::None, 1.0, 0).is_err());
    }

    #[test]
    fn rayleigh_mean_snr() {
        let prof = FadingProfile::new(FadingKind::RayleighBlock, 3.0, 1).unwrap();
        let mut rng = seeded(8);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| prof.draw_snr(&mut rng)).sum::<f64>() / n as f64;
        // exponential: sd = mean
        assert!((mean - 3.0).abs() < 4.0 * 3.0 / (n as f64).sqrt());
    }
}
