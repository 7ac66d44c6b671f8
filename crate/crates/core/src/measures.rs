//! Exact information measures on finite tables.
//!
//! Everything here is in bits and uses the convention 0·log 0 = 0.

use crate::codec::huffman_lengths;
use crate::language::{logical_probability, MessageSpace, StochasticMapping};
use crate::{Error, Result, PROB_TOL};

/// Shannon entropy of a probability vector.
pub fn entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

/// Kullback-Leibler divergence in bits; infinite when `q` lacks support of `p`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| if b > 0.0 { a * (a / b).log2() } else { f64::INFINITY })
        .sum()
}

/// Joint probability matrix over two labelled finite variables.
#[derive(Debug, Clone)]
pub struct JointTable {
    rows: Vec<String>,
    cols: Vec<String>,
    p: Vec<Vec<f64>>,
}

impl JointTable {
    pub fn new(rows: Vec<String>, cols: Vec<String>, p: Vec<Vec<f64>>) -> Result<Self> {
        if p.len() != rows.len() || rows.is_empty() || cols.is_empty() {
            return Err(Error::config("joint table shape does not match labels"));
        }
        let mut total = 0.0;
        for (i, row) in p.iter().enumerate() {
            if row.len() != cols.len() {
                return Err(Error::config(format!("joint table row {i} has wrong width")));
            }
            for &v in row {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::config(format!("joint table entry {v} invalid")));
                }
                total += v;
            }
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::config(format!("joint table sums to {total}")));
        }
        Ok(Self { rows, cols, p })
    }

    /// Unlabelled table; rows and columns are numbered.
    pub fn from_matrix(p: Vec<Vec<f64>>) -> Result<Self> {
        let rows = (0..p.len()).map(|i| i.to_string()).collect();
        let cols = (0..p.first().map_or(0, Vec::len))
            .map(|i| i.to_string())
            .collect();
        Self::new(rows, cols, p)
    }

    pub fn rows(&self) -> &[String] {
        &self.rows
    }

    pub fn cols(&self) -> &[String] {
        &self.cols
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.p.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols.len()];
        for row in &self.p {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out
    }

    pub fn joint_entropy(&self) -> f64 {
        self.p.iter().map(|r| entropy(r)).sum()
    }

    /// H(col | row) = Σ_r p(r) H(p(·|r)).
    pub fn cond_entropy_col_given_row(&self) -> f64 {
        self.p
            .iter()
            .map(|row| {
                let pr: f64 = row.iter().sum();
                if pr > 0.0 {
                    let cond: Vec<f64> = row.iter().map(|v| v / pr).collect();
                    pr * entropy(&cond)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// H(row | col) = Σ_c p(c) H(p(·|c)).
    pub fn cond_entropy_row_given_col(&self) -> f64 {
        let pc = self.col_marginal();
        pc.iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(j, &m)| {
                let cond: Vec<f64> = self.p.iter().map(|r| r[j] / m).collect();
                m * entropy(&cond)
            })
            .sum()
    }

    /// I(row; col) = Σ p(r,c) log2 p(r,c) / (p(r) p(c)).
    pub fn mutual_information(&self) -> f64 {
        mutual_information(&self.p)
    }
}

/// Mutual information of a joint matrix, computed directly from the definition.
pub fn mutual_information(p: &[Vec<f64>]) -> f64 {
    let pr: Vec<f64> = p.iter().map(|r| r.iter().sum()).collect();
    let width = p.first().map_or(0, Vec::len);
    let mut pc = vec![0.0; width];
    for row in p {
        for (c, v) in pc.iter_mut().zip(row) {
            *c += v;
        }
    }
    // a degenerate marginal carries no information; skip the rounding noise
    if pr.iter().filter(|&&v| v > 0.0).count() <= 1 || pc.iter().filter(|&&v| v > 0.0).count() <= 1
    {
        return 0.0;
    }
    let mut acc = 0.0;
    for (row, &a) in p.iter().zip(&pr) {
        for (&v, &b) in row.iter().zip(&pc) {
            if v > 0.0 {
                acc += v * (v / (a * b)).log2();
            }
        }
    }
    // nonnegative in exact arithmetic
    acc.max(0.0)
}

/// Joint table p(m, x) = p(m) p(x|m).
pub fn joint_table(mapping: &StochasticMapping, space: &MessageSpace) -> Result<JointTable> {
    mapping.check_against(space)?;
    let p = mapping
        .rows()
        .iter()
        .zip(space.prior())
        .map(|(row, &pm)| row.iter().map(|&px| px * pm).collect())
        .collect();
    // product of two validated distributions, no need to re-check the sum
    Ok(JointTable {
        rows: space.messages().to_vec(),
        cols: mapping.alphabet().to_vec(),
        p,
    })
}

/// Message entropy H_S(M).
pub fn message_entropy(space: &MessageSpace) -> f64 {
    entropy(space.prior())
}

/// Semantic entropy H_S(X): entropy of the logical probability.
pub fn semantic_entropy(mapping: &StochasticMapping, space: &MessageSpace) -> Result<f64> {
    Ok(entropy(&logical_probability(mapping, space)?))
}

/// Per-symbol semantic information −log2 p_S(x); infinite for unused symbols.
pub fn semantic_information(mapping: &StochasticMapping, space: &MessageSpace) -> Result<Vec<f64>> {
    Ok(logical_probability(mapping, space)?
        .into_iter()
        .map(|p| if p > 0.0 { -p.log2() } else { f64::INFINITY })
        .collect())
}

/// Entropy bookkeeping of a message-to-symbol mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub h_m: f64,
    pub h_x: f64,
    /// H(X|M), semantic redundancy.
    pub redundancy: f64,
    /// H(M|X), semantic ambiguity.
    pub ambiguity: f64,
    /// I(M;X).
    pub mutual: f64,
}

impl Decomposition {
    /// H_M + H(X|M) − H(M|X) − H_X; zero up to rounding.
    pub fn identity_residual(&self) -> f64 {
        self.h_m + self.redundancy - self.ambiguity - self.h_x
    }
}

pub fn decomposition(mapping: &StochasticMapping, space: &MessageSpace) -> Result<Decomposition> {
    let joint = joint_table(mapping, space)?;
    Ok(Decomposition {
        h_m: message_entropy(space),
        h_x: entropy(&joint.col_marginal()),
        redundancy: joint.cond_entropy_col_given_row(),
        ambiguity: joint.cond_entropy_row_given_col(),
        mutual: joint.mutual_information(),
    })
}

/// Rate figures for a semantic block encoder that only has to convey the
/// meaning class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCodingRate {
    pub rate_bound: f64,
    pub class_entropy: f64,
    /// Expected Huffman codeword length over meaning classes; 0 for a single class.
    pub huffman_avg_length: f64,
}

pub fn semantic_block_encoder_rate(
    mapping: &StochasticMapping,
    space: &MessageSpace,
) -> Result<BlockCodingRate> {
    let joint = joint_table(mapping, space)?;
    let classes = space.class_probabilities();
    let lengths = huffman_lengths(&classes);
    let avg = classes
        .iter()
        .zip(&lengths)
        .map(|(p, &l)| p * l as f64)
        .sum();
    Ok(BlockCodingRate {
        rate_bound: joint.mutual_information(),
        class_entropy: entropy(&classes),
        huffman_avg_length: avg,
    })
}

/// Everything the `measures` subcommand prints, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuresRow {
    pub decomposition: Decomposition,
    pub rate: BlockCodingRate,
}

impl MeasuresRow {
    pub const HEADER: &'static str =
        "H_M,H_X,H_X_given_M,H_M_given_X,I_MX,class_entropy,huffman_len";

    pub fn compute(mapping: &StochasticMapping, space: &MessageSpace) -> Result<Self> {
        Ok(Self {
            decomposition: decomposition(mapping, space)?,
            rate: semantic_block_encoder_rate(mapping, space)?,
        })
    }

    /// Negative zeros print as `0`.
    pub fn to_csv(&self) -> String {
        let d = &self.decomposition;
        format!(
            "{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
            d.h_m + 0.0,
            d.h_x + 0.0,
            d.redundancy + 0.0,
            d.ambiguity + 0.0,
            d.mutual + 0.0,
            self.rate.class_entropy + 0.0,
            self.rate.huffman_avg_length + 0.0
        )
    }
}
