//! Semantic MAP decoding.
//!
//! The decoder returns m' = argmax_m Σ_x p(y|x) p(x|m) p(m) over the valid
//! message set only. Scores are kept in the log domain; candidates within
//! [`TIE_TOL`] of the best score count as tied and the lowest index wins.

use crate::channel::{BitLink, DiscreteChannel};
use crate::language::{MessageSpace, SentenceLanguage, StochasticMapping};
use crate::{Error, Result};

use super::SyntacticCodec;

/// Default confidence threshold for semantic retransmission requests.
pub const DEFAULT_TAU: f64 = 0.9;

/// Log-score slack under which two candidates are considered tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Index of the decoded message in the candidate set.
    pub message_hat: usize,
    /// p(m|y) over the candidate set.
    pub posterior: Vec<f64>,
    /// Largest posterior entry.
    pub confidence: f64,
    /// Positions where y disagrees with the most likely codeword of the
    /// decoded message (0 for symbol-level decoding).
    pub syntactic_bits_in_error: usize,
}

/// Argmax with lowest-index tie-breaking plus the normalized posterior.
pub(crate) fn decide(log_scores: &[f64]) -> Result<(usize, Vec<f64>)> {
    if log_scores.iter().any(|s| s.is_nan()) {
        return Err(Error::numeric("NaN in decoder scores"));
    }
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::numeric(
            "received sequence has zero likelihood under every message",
        ));
    }
    let best = log_scores
        .iter()
        .position(|&s| s >= max - TIE_TOL)
        .expect("max is attained");
    let weights: Vec<f64> = log_scores.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok((best, weights.into_iter().map(|w| w / total).collect()))
}

fn finish(best: usize, posterior: Vec<f64>, bits_in_error: usize) -> DecodeResult {
    DecodeResult {
        message_hat: best,
        confidence: posterior[best],
        posterior,
        syntactic_bits_in_error: bits_in_error,
    }
}

/// Symbol-level MAP decoding of one channel output `y`.
pub fn semantic_map_decode(
    y: usize,
    space: &MessageSpace,
    mapping: &StochasticMapping,
    channel: &DiscreteChannel,
) -> Result<DecodeResult> {
    mapping.check_against(space)?;
    if channel.inputs() != mapping.num_symbols() {
        return Err(Error::config(format!(
            "channel takes {} inputs, mapping emits {} symbols",
            channel.inputs(),
            mapping.num_symbols()
        )));
    }
    if y >= channel.outputs() {
        return Err(Error::input(format!("output {y} outside channel alphabet")));
    }
    let scores: Vec<f64> = mapping
        .rows()
        .iter()
        .zip(space.prior())
        .map(|(row, &pm)| {
            let lik: f64 = row
                .iter()
                .enumerate()
                .map(|(x, &px)| channel.prob(x, y) * px)
                .sum();
            (lik * pm).ln()
        })
        .collect();
    let (best, posterior) = decide(&scores)?;
    Ok(finish(best, posterior, 0))
}

#[derive(Debug, Clone)]
struct Emission {
    bits: Vec<u64>,
    len: usize,
    log_p: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    log_prior: f64,
    emissions: Vec<Emission>,
}

fn pack(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (t, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[t / 64] |= 1 << (t % 64);
        }
    }
    out
}

/// Bit-level semantic MAP decoder with precomputed candidate codewords.
#[derive(Debug, Clone)]
pub struct SemanticDecoder {
    candidates: Vec<Candidate>,
}

impl SemanticDecoder {
    /// One candidate per valid sentence, encoded with `codec`.
    pub fn for_language(lang: &SentenceLanguage, codec: &SyntacticCodec) -> Result<Self> {
        let candidates = lang
            .sentences()
            .iter()
            .zip(lang.prior())
            .map(|(s, &p)| {
                let frame = codec.encode(s)?;
                Ok(Candidate {
                    log_prior: p.ln(),
                    emissions: vec![Emission {
                        bits: pack(&frame.bits),
                        len: frame.bits.len(),
                        log_p: 0.0,
                    }],
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { candidates })
    }

    /// One candidate per message; each symbol with p(x|m) > 0 is an emission
    /// encoded as a one-symbol frame.
    pub fn for_mapping(
        space: &MessageSpace,
        mapping: &StochasticMapping,
        codec: &SyntacticCodec,
    ) -> Result<Self> {
        mapping.check_against(space)?;
        let candidates = mapping
            .rows()
            .iter()
            .zip(space.prior())
            .map(|(row, &p)| {
                let emissions = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &px)| px > 0.0)
                    .map(|(x, &px)| {
                        let frame = codec.encode(&[x])?;
                        Ok(Emission {
                            bits: pack(&frame.bits),
                            len: frame.bits.len(),
                            log_p: px.ln(),
                        })
                    })
                    .collect::<Result<_>>()?;
                Ok(Candidate {
                    log_prior: p.ln(),
                    emissions,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { candidates })
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn decode(&self, y: &[u8], link: &BitLink) -> Result<DecodeResult> {
        let n = y.len();
        let packed = pack(y);
        let (base, flip): (f64, Vec<f64>) = if link.is_uniform() {
            let e = link.crossover(0);
            (n as f64 * (1.0 - e).ln(), vec![e.ln() - (1.0 - e).ln()])
        } else {
            let mut base = 0.0;
            let flip = (0..n)
                .map(|t| {
                    let e = link.crossover(t);
                    base += (1.0 - e).ln();
                    e.ln() - (1.0 - e).ln()
                })
                .collect();
            (base, flip)
        };

        let mut scores = Vec::with_capacity(self.candidates.len());
        let mut distances = Vec::with_capacity(self.candidates.len());
        let mut terms = Vec::new();
        for cand in &self.candidates {
            terms.clear();
            let mut best_d = usize::MAX;
            let mut best_term = f64::NEG_INFINITY;
            for em in cand.emissions.iter().filter(|e| e.len == n) {
                let mut d = 0usize;
                let mut ll = base;
                for (w, (a, b)) in em.bits.iter().zip(&packed).enumerate() {
                    let mut diff = a ^ b;
                    d += diff.count_ones() as usize;
                    if !link.is_uniform() {
                        while diff != 0 {
                            let t = w * 64 + diff.trailing_zeros() as usize;
                            ll += flip[t];
                            diff &= diff - 1;
                        }
                    }
                }
                if link.is_uniform() && d > 0 {
                    ll += d as f64 * flip[0];
                }
                let term = ll + em.log_p;
                if term > best_term || best_d == usize::MAX {
                    best_term = term;
                    best_d = d;
                }
                terms.push(term);
            }
            scores.push(cand.log_prior + log_sum_exp(&terms));
            distances.push(if best_d == usize::MAX { n } else { best_d });
        }
        let (best, posterior) = decide(&scores)?;
        Ok(finish(best, posterior, distances[best]))
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Whether the receiver should ask for a retransmission.
///
/// Fires only when the syntactic decode is not a valid sentence (a framing
/// failure counts as invalid) and the semantic decoder's confidence is below
/// `tau`.
pub fn semantic_error_detect(
    result: &DecodeResult,
    language: &SentenceLanguage,
    syntactic: Option<&[usize]>,
    tau: f64,
) -> bool {
    let valid = syntactic.is_some_and(|s| language.is_valid(s));
    !valid && result.confidence < tau
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{ChannelCode, SourceCode, SourceCodeKind};
    use crate::language::{build_sentence_language, GrammarSpec};

    fn two_codewords() -> (MessageSpace, StochasticMapping) {
        // messages a -> 00, b -> 11, encoded as 2-bit symbols 0 and 3
        let space = MessageSpace::uniform(vec!["a".into(), "b".into()]).unwrap();
        let alphabet = (0..4).map(|i| format!("{i:02b}")).collect();
        let f = StochasticMapping::deterministic(alphabet, &[0, 3]).unwrap();
        (space, f)
    }

    fn codec2() -> SyntacticCodec {
        SyntacticCodec::new(SourceCode::fixed_length(4).unwrap(), ChannelCode::None).unwrap()
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let (space, f) = two_codewords();
        let dec = SemanticDecoder::for_mapping(&space, &f, &codec2()).unwrap();
        let r = dec.decode(&[0, 1], &BitLink::uniform(0.1)).unwrap();
        assert_eq!(r.message_hat, 0);
        assert!((r.posterior[0] - 0.5).abs() < 1e-12);
        let r = dec.decode(&[1, 0], &BitLink::uniform(0.1)).unwrap();
        assert_eq!(r.message_hat, 0);
    }

    #[test]
    fn confident_on_clean_word() {
        let (space, f) = two_codewords();
        let dec = SemanticDecoder::for_mapping(&space, &f, &codec2()).unwrap();
        let r = dec.decode(&[0, 0], &BitLink::uniform(0.1)).unwrap();
        assert_eq!(r.message_hat, 0);
        // enumeration: 0.81 / (0.81 + 0.01)
        assert!((r.confidence - 0.81 / 0.82).abs() < 1e-12);
        assert!((r.confidence - 0.9878).abs() < 1e-4);
        assert_eq!(r.syntactic_bits_in_error, 0);
        let r = dec.decode(&[1, 1], &BitLink::uniform(0.1)).unwrap();
        assert_eq!(r.message_hat, 1);
    }

    #[test]
    fn noiseless_channel_is_exact() {
        let (space, f) = two_codewords();
        let dec = SemanticDecoder::for_mapping(&space, &f, &codec2()).unwrap();
        let r = dec.decode(&[1, 1], &BitLink::uniform(0.0)).unwrap();
        assert_eq!(r.message_hat, 1);
        assert_eq!(r.confidence, 1.0);
        // no message explains 01 without flips
        assert!(matches!(
            dec.decode(&[0, 1], &BitLink::uniform(0.0)),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn symbol_level_decoder_matches_example() {
        let (space, f) = two_codewords();
        // channel over 2-bit symbols: product of two BSC(0.1) uses
        let e: f64 = 0.1;
        let rows = (0..4)
            .map(|x: usize| {
                (0..4)
                    .map(|y: usize| {
                        let d = (x ^ y).count_ones() as i32;
                        e.powi(d) * (1.0 - e).powi(2 - d)
                    })
                    .collect()
            })
            .collect();
        let ch = DiscreteChannel::new(rows).unwrap();
        let r = semantic_map_decode(1, &space, &f, &ch).unwrap();
        assert_eq!(r.message_hat, 0);
        let r = semantic_map_decode(0, &space, &f, &ch).unwrap();
        assert!((r.confidence - 0.81 / 0.82).abs() < 1e-12);
        assert!(semantic_map_decode(4, &space, &f, &ch).is_err());
    }

    #[test]
    fn stochastic_mapping_sums_emissions() {
        // m0 emits symbol 0 or 1 with equal odds, m1 emits 3
        let space = MessageSpace::new(vec!["a".into(), "b".into()], vec![0.4, 0.6], vec![0, 1])
            .unwrap();
        let alphabet = (0..4).map(|i| i.to_string()).collect();
        let f = StochasticMapping::new(
            alphabet,
            vec![vec![0.5, 0.5, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        let dec = SemanticDecoder::for_mapping(&space, &f, &codec2()).unwrap();
        let e = 0.2f64;
        let r = dec.decode(&[0, 1], &BitLink::uniform(e)).unwrap();
        // brute force: p(y=01|x) for x=00,01,11
        let l0 = 0.4 * (0.5 * e * (1.0 - e) + 0.5 * (1.0 - e) * (1.0 - e));
        let l1 = 0.6 * (e * (1.0 - e));
        assert!((r.posterior[0] - l0 / (l0 + l1)).abs() < 1e-12);
        assert_eq!(r.message_hat, 0);
    }

    #[test]
    fn detect_rule() {
        let spec = GrammarSpec {
            vocabulary: vec!["a".into(), "b".into(), "c".into()],
            slots: vec![vec!["a".into(), "b".into()]],
            ..Default::default()
        };
        let lang = build_sentence_language(&spec).unwrap();
        let r = |c: f64| DecodeResult {
            message_hat: 0,
            posterior: vec![c, 1.0 - c],
            confidence: c,
            syntactic_bits_in_error: 0,
        };
        assert!(!semantic_error_detect(&r(0.1), &lang, Some(&[0]), 0.9));
        assert!(!semantic_error_detect(&r(0.1), &lang, Some(&[1]), 1.0));
        assert!(!semantic_error_detect(&r(0.99), &lang, Some(&[2]), 0.9));
        assert!(semantic_error_detect(&r(0.55), &lang, Some(&[2]), 0.9));
        assert!(semantic_error_detect(&r(0.55), &lang, None, 0.9));
        assert!(!semantic_error_detect(&r(0.55), &lang, None, 0.0));
    }

    #[test]
    fn fading_link_uses_per_position_crossovers() {
        let spec = GrammarSpec {
            vocabulary: (0..4).map(|i| i.to_string()).collect(),
            slots: vec![vec!["0".into(), "3".into()], vec!["0".into(), "3".into()]],
            ..Default::default()
        };
        let lang = build_sentence_language(&spec).unwrap();
        let codec = SyntacticCodec::for_language(&lang, SourceCodeKind::Fixed, ChannelCode::None)
            .unwrap();
        let dec = SemanticDecoder::for_language(&lang, &codec).unwrap();
        let link = BitLink::blocks(vec![0.01, 0.4], 2).unwrap();
        let y = [0, 0, 1, 0];
        let r = dec.decode(&y, &link).unwrap();
        let lik = |x: [u8; 4]| -> f64 {
            (0..4)
                .map(|t| {
                    let e = link.crossover(t);
                    if x[t] == y[t] { 1.0 - e } else { e }
                })
                .product::<f64>()
                * 0.25
        };
        let all: Vec<f64> = lang
            .sentences()
            .iter()
            .map(|s| {
                let f = codec.encode(s).unwrap();
                lik([f.bits[0], f.bits[1], f.bits[2], f.bits[3]])
            })
            .collect();
        let total: f64 = all.iter().sum();
        for (p, l) in r.posterior.iter().zip(&all) {
            assert!((p - l / total).abs() < 1e-12);
        }
    }
}
