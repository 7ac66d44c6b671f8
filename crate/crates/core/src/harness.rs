//! Monte Carlo link experiments.
//!
//! Each trial draws a sentence from the prior, encodes it, passes the bits
//! through the channel and decodes them twice: syntactically (channel decode
//! then source decode) and semantically (MAP over the valid sentences).
//! Trial `t` of operating point `k` uses the generator seeded with
//! `derive_seed(seed, k) ^ t`, so results do not depend on scheduling.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{db_to_linear, snr_to_crossover, BitLink, FadingKind, FadingProfile};
use crate::codec::{
    semantic_error_detect, syntactic_decode, ChannelCode, Frame, SemanticDecoder, SourceCodeKind,
    SyntacticCodec, DEFAULT_TAU,
};
use crate::language::{build_sentence_language, GrammarSpec, SentenceLanguage};
use crate::rng::{derive_seed, trial_rng, SimRng};
use crate::{Error, Result};

const CHUNK: usize = 2048;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Slot grammar used by the link experiments: 16 words, 3 positions,
/// 64 of the 4096 word triples valid.
///
/// Word `i` is sent as the 4-bit pattern of `i`. Subjects, verbs and objects
/// each use codewords of a single parity, so two valid sentences differ in at
/// least two bits.
pub fn reference_grammar() -> GrammarSpec {
    let words = [
        "alice", "apples", "bread", "bob", "cheese", "carol", "dave", "dates", "the", "eats",
        "buys", "a", "cooks", "and", "of", "sells",
    ];
    let slot = |ids: [usize; 4]| ids.iter().map(|&i| words[i].to_string()).collect();
    GrammarSpec {
        vocabulary: words.iter().map(|w| w.to_string()).collect(),
        slots: vec![slot([0, 3, 5, 6]), slot([9, 10, 12, 15]), slot([1, 2, 4, 7])],
        ..GrammarSpec::default()
    }
}

/// The same vocabulary with every word allowed in every position.
pub fn unstructured_grammar() -> GrammarSpec {
    let g = reference_grammar();
    GrammarSpec {
        slots: vec![g.vocabulary.clone(); 3],
        ..g
    }
}

pub fn reference_language() -> SentenceLanguage {
    build_sentence_language(&reference_grammar()).expect("reference grammar is valid")
}

#[derive(Debug, Clone)]
pub struct LinkExperiment {
    pub language: SentenceLanguage,
    /// Meaning classes at the receiver; `None` shares the sender's.
    pub kb_destination: Option<Vec<usize>>,
    pub codec: SyntacticCodec,
    pub fading: FadingKind,
    /// Bits per fade; `None` aligns one fade to one sentence.
    pub block_len: Option<usize>,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub tau: f64,
}

impl LinkExperiment {
    /// Reference grammar, fixed-length words, no channel code, no fading.
    pub fn reference(snr_db: Vec<f64>, trials: usize, seed: u64) -> Self {
        let language = reference_language();
        let codec = SyntacticCodec::for_language(&language, SourceCodeKind::Fixed, ChannelCode::None)
            .expect("reference codec");
        Self {
            language,
            kb_destination: None,
            codec,
            fading: FadingKind::None,
            block_len: None,
            snr_db,
            trials,
            seed,
            tau: DEFAULT_TAU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::config("SNR grid must be nonempty"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config("tau must lie in [0, 1]"));
        }
        if self.block_len == Some(0) {
            return Err(Error::config("block length must be at least 1"));
        }
        if let Some(kb) = &self.kb_destination {
            if kb.len() != self.language.len() {
                return Err(Error::config("destination KB must cover every sentence"));
            }
        }
        Ok(())
    }

    fn destination_classes(&self) -> &[usize] {
        self.kb_destination
            .as_deref()
            .unwrap_or(self.language.meaning_class())
    }
}

/// Where a point's channel comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkSource {
    Fading(FadingProfile),
    Crossover(f64),
}

impl LinkSource {
    fn realize(&self, n_bits: usize, rng: &mut SimRng) -> BitLink {
        match self {
            LinkSource::Fading(p) => p.realize(n_bits, rng),
            LinkSource::Crossover(e) => BitLink::uniform(*e),
        }
    }
}

// Frames, decoder and CDF shared by every trial.
struct Prepared<'a> {
    exp: &'a LinkExperiment,
    frames: Vec<Frame>,
    decoder: SemanticDecoder,
    cdf: Vec<f64>,
    block_len: usize,
}

impl<'a> Prepared<'a> {
    fn new(exp: &'a LinkExperiment) -> Result<Self> {
        exp.validate()?;
        let frames: Vec<Frame> = exp
            .language
            .sentences()
            .iter()
            .map(|s| exp.codec.encode(s))
            .collect::<Result<_>>()?;
        let decoder = SemanticDecoder::for_language(&exp.language, &exp.codec)?;
        let mut acc = 0.0;
        let cdf = exp
            .language
            .prior()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let longest = frames.iter().map(|f| f.bits.len()).max().unwrap_or(1).max(1);
        Ok(Self {
            exp,
            frames,
            decoder,
            cdf,
            block_len: exp.block_len.unwrap_or(longest),
        })
    }

    fn source(&self, snr_db: f64) -> Result<LinkSource> {
        let snr = db_to_linear(snr_db);
        Ok(match self.exp.fading {
            FadingKind::None => LinkSource::Crossover(snr_to_crossover(snr)),
            kind => LinkSource::Fading(FadingProfile::new(kind, snr, self.block_len)?),
        })
    }

    fn sample_sentence(&self, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1)
    }

    fn is_meaning_error(&self, sent: usize, decoded: usize) -> bool {
        self.exp.language.meaning_class()[sent] != self.exp.destination_classes()[decoded]
    }

    /// One noisy use of the link for sentence `m`.
    fn attempt(&self, m: usize, source: &LinkSource, rng: &mut SimRng) -> Result<Attempt> {
        let frame = &self.frames[m];
        let link = source.realize(frame.bits.len(), rng);
        let y = link.transmit(&frame.bits, rng);
        let syntactic = syntactic_decode(&y, frame.source_len, &self.exp.codec).ok();
        let semantic = self.decoder.decode(&y, &link)?;
        Ok(Attempt {
            syntactic,
            semantic,
            bits: frame.bits.len(),
        })
    }
}

struct Attempt {
    syntactic: Option<Vec<usize>>,
    semantic: crate::codec::DecodeResult,
    bits: usize,
}

fn symbol_errors(sent: &[usize], got: Option<&[usize]>) -> usize {
    match got {
        None => sent.len(),
        Some(g) => (0..sent.len()).filter(|&i| g.get(i) != Some(&sent[i])).count() + g.len().saturating_sub(sent.len()),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct LinkCounts {
    trials: u64,
    symbols: u64,
    symbol_errors: u64,
    sentence_errors: u64,
    semantic_errors: u64,
    syn_only: u64,
    sem_only: u64,
}

impl LinkCounts {
    fn add(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.symbols += o.symbols;
        self.symbol_errors += o.symbol_errors;
        self.sentence_errors += o.sentence_errors;
        self.semantic_errors += o.semantic_errors;
        self.syn_only += o.syn_only;
        self.sem_only += o.sem_only;
        self
    }
}

/// Per-point link statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub snr_db: f64,
    /// Mean crossover probability for unfaded points.
    pub epsilon: f64,
    pub trials: u64,
    pub syn_symbol_err: f64,
    pub syn_sentence_err: f64,
    pub sem_err: f64,
    pub similarity: f64,
    /// 95% half-width of the similarity (and semantic error) estimate.
    pub ci_half_width: f64,
    /// Trials with a syntactic sentence error but the right meaning.
    pub syn_only: u64,
    /// Trials with the wrong meaning but an error-free syntactic decode.
    pub sem_only: u64,
}

/// Normal-approximation 95% half-width with continuity correction.
pub fn ci_half_width(p: f64, n: u64) -> f64 {
    let n = n as f64;
    Z95 * (p * (1.0 - p) / n).sqrt() + 0.5 / n
}

impl LinkMetrics {
    pub const HEADER: &'static str =
        "snr_db,trials,syn_symbol_err,syn_sentence_err,sem_err,similarity,ci_half_width";

    fn from_counts(snr_db: f64, epsilon: f64, c: LinkCounts) -> Self {
        let n = c.trials as f64;
        let sem_err = c.semantic_errors as f64 / n;
        Self {
            snr_db,
            epsilon,
            trials: c.trials,
            syn_symbol_err: c.symbol_errors as f64 / c.symbols.max(1) as f64,
            syn_sentence_err: c.sentence_errors as f64 / n,
            sem_err,
            similarity: 1.0 - sem_err,
            ci_half_width: ci_half_width(sem_err, c.trials),
            syn_only: c.syn_only,
            sem_only: c.sem_only,
        }
    }

    /// Syntactic sentence error minus semantic error, and the standard error
    /// of that difference over paired trials.
    pub fn gap(&self) -> (f64, f64) {
        let n = self.trials as f64;
        let d = (self.syn_only as f64 - self.sem_only as f64) / n;
        let second = (self.syn_only + self.sem_only) as f64 / n;
        (d, ((second - d * d).max(0.0) / n).sqrt())
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{:.9},{:.9},{:.9},{:.9},{:.9}",
            self.snr_db,
            self.trials,
            self.syn_symbol_err,
            self.syn_sentence_err,
            self.sem_err,
            self.similarity,
            self.ci_half_width
        )
    }
}

fn chunks(trials: usize) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    (0..trials.div_ceil(CHUNK)).into_par_iter().map(move |c| {
        let lo = c * CHUNK;
        (lo as u64, (lo + CHUNK).min(trials) as u64)
    })
}

fn link_point(prep: &Prepared, source: LinkSource, point_seed: u64) -> Result<LinkCounts> {
    let lang = &prep.exp.language;
    let counts: Vec<Result<LinkCounts>> = chunks(prep.exp.trials)
        .map(|(lo, hi)| {
            let mut c = LinkCounts::default();
            for t in lo..hi {
                let mut rng = trial_rng(point_seed, t);
                let m = prep.sample_sentence(&mut rng);
                let a = prep.attempt(m, &source, &mut rng)?;
                let sent = lang.sentence(m);
                let sym = symbol_errors(sent, a.syntactic.as_deref());
                let syn_err = sym > 0;
                let sem_err = prep.is_meaning_error(m, a.semantic.message_hat);
                c.trials += 1;
                c.symbols += sent.len() as u64;
                c.symbol_errors += sym as u64;
                c.sentence_errors += u64::from(syn_err);
                c.semantic_errors += u64::from(sem_err);
                c.syn_only += u64::from(syn_err && !sem_err);
                c.sem_only += u64::from(sem_err && !syn_err);
            }
            Ok(c)
        })
        .collect();
    counts
        .into_iter()
        .try_fold(LinkCounts::default(), |acc, c| Ok(acc.add(c?)))
}

fn mean_crossover(source: &LinkSource) -> f64 {
    match source {
        LinkSource::Crossover(e) => *e,
        LinkSource::Fading(p) if p.kind == FadingKind::None => snr_to_crossover(p.mean_snr),
        LinkSource::Fading(_) => f64::NAN,
    }
}

/// Semantic versus syntactic decoding at every SNR point.
pub fn simulate_link(exp: &LinkExperiment) -> Result<Vec<LinkMetrics>> {
    let prep = Prepared::new(exp)?;
    exp.snr_db
        .iter()
        .enumerate()
        .map(|(k, &snr)| {
            let source = prep.source(snr)?;
            let c = link_point(&prep, source, derive_seed(exp.seed, k as u64))?;
            Ok(LinkMetrics::from_counts(snr, mean_crossover(&source), c))
        })
        .collect()
}

/// One point on a BSC with a given crossover; reported with `snr_db = NaN`.
pub fn simulate_link_at_crossover(exp: &LinkExperiment, epsilon: f64) -> Result<LinkMetrics> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::config("crossover must lie in [0, 0.5]"));
    }
    let prep = Prepared::new(exp)?;
    let source = LinkSource::Crossover(epsilon);
    let c = link_point(&prep, source, derive_seed(exp.seed, 0))?;
    Ok(LinkMetrics::from_counts(f64::NAN, epsilon, c))
}

/// CSV rows of [`simulate_link`], header first.
pub fn sweep_snr(exp: &LinkExperiment) -> Result<Vec<String>> {
    let rows = simulate_link(exp)?;
    Ok(std::iter::once(LinkMetrics::HEADER.to_string())
        .chain(rows.iter().map(LinkMetrics::to_csv))
        .collect())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct ArqCounts {
    sentences: u64,
    sem_attempts: u64,
    sem_requests: u64,
    sem_wrong: u64,
    sem_bits: u64,
    syn_attempts: u64,
    syn_requests: u64,
    syn_wrong: u64,
    syn_bits: u64,
}

impl ArqCounts {
    fn add(mut self, o: Self) -> Self {
        self.sentences += o.sentences;
        self.sem_attempts += o.sem_attempts;
        self.sem_requests += o.sem_requests;
        self.sem_wrong += o.sem_wrong;
        self.sem_bits += o.sem_bits;
        self.syn_attempts += o.syn_attempts;
        self.syn_requests += o.syn_requests;
        self.syn_wrong += o.syn_wrong;
        self.syn_bits += o.syn_bits;
        self
    }
}

/// Stop-and-wait ARQ comparison at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ArqMetrics {
    pub snr_db: f64,
    pub sentences: u64,
    /// Retransmission requests per transmission, semantic feedback.
    pub sem_retx_rate: f64,
    /// Retransmission requests per transmission, genie error detection.
    pub syn_retx_rate: f64,
    pub sem_attempts: u64,
    pub syn_attempts: u64,
    /// Accepted sentences with the wrong meaning, semantic feedback.
    pub residual_sem_err: f64,
    /// Accepted sentences with the wrong meaning, genie detection.
    pub syn_residual_sem_err: f64,
    /// Meaning-correct accepted sentences per coded bit, semantic feedback.
    pub goodput: f64,
    pub syn_goodput: f64,
}

impl ArqMetrics {
    pub const HEADER: &'static str = "snr_db,sem_retx_rate,syn_retx_rate,residual_sem_err,goodput";

    fn from_counts(snr_db: f64, c: ArqCounts) -> Self {
        let n = c.sentences as f64;
        Self {
            snr_db,
            sentences: c.sentences,
            sem_retx_rate: c.sem_requests as f64 / c.sem_attempts as f64,
            syn_retx_rate: c.syn_requests as f64 / c.syn_attempts as f64,
            sem_attempts: c.sem_attempts,
            syn_attempts: c.syn_attempts,
            residual_sem_err: c.sem_wrong as f64 / n,
            syn_residual_sem_err: c.syn_wrong as f64 / n,
            goodput: (c.sentences - c.sem_wrong) as f64 / c.sem_bits as f64,
            syn_goodput: (c.sentences - c.syn_wrong) as f64 / c.syn_bits as f64,
        }
    }

    /// Syntactic minus semantic retransmission rate and its standard error.
    pub fn retx_gap(&self) -> (f64, f64) {
        let var = |p: f64, n: u64| p * (1.0 - p) / n as f64;
        (
            self.syn_retx_rate - self.sem_retx_rate,
            (var(self.sem_retx_rate, self.sem_attempts) + var(self.syn_retx_rate, self.syn_attempts)).sqrt(),
        )
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.9},{:.9},{:.9},{:.9e}",
            self.snr_db, self.sem_retx_rate, self.syn_retx_rate, self.residual_sem_err, self.goodput
        )
    }
}

fn arq_point(prep: &Prepared, source: LinkSource, point_seed: u64, max_retx: usize) -> Result<ArqCounts> {
    let lang = &prep.exp.language;
    let tau = prep.exp.tau;
    let counts: Vec<Result<ArqCounts>> = chunks(prep.exp.trials)
        .map(|(lo, hi)| {
            let mut c = ArqCounts::default();
            for t in lo..hi {
                // both protocols see the same sentence and the same first attempt
                let mut rng = trial_rng(point_seed, t);
                let m = prep.sample_sentence(&mut rng);
                let sent = lang.sentence(m);
                let mut syn_rng = rng.clone();
                c.sentences += 1;

                for k in 0..=max_retx {
                    let a = prep.attempt(m, &source, &mut rng)?;
                    c.sem_attempts += 1;
                    c.sem_bits += a.bits as u64;
                    let retx = semantic_error_detect(&a.semantic, lang, a.syntactic.as_deref(), tau);
                    if retx && k < max_retx {
                        c.sem_requests += 1;
                        continue;
                    }
                    c.sem_wrong += u64::from(prep.is_meaning_error(m, a.semantic.message_hat));
                    break;
                }

                for k in 0..=max_retx {
                    let a = prep.attempt(m, &source, &mut syn_rng)?;
                    c.syn_attempts += 1;
                    c.syn_bits += a.bits as u64;
                    let correct = a.syntactic.as_deref() == Some(sent);
                    if !correct && k < max_retx {
                        c.syn_requests += 1;
                        continue;
                    }
                    let meaning_ok = a
                        .syntactic
                        .as_deref()
                        .and_then(|s| lang.index_of(s))
                        .is_some_and(|d| !prep.is_meaning_error(m, d));
                    c.syn_wrong += u64::from(!meaning_ok);
                    break;
                }
            }
            Ok(c)
        })
        .collect();
    counts
        .into_iter()
        .try_fold(ArqCounts::default(), |acc, c| Ok(acc.add(c?)))
}

/// ARQ with semantic feedback versus ARQ with genie error detection.
///
/// Each sentence is sent up to `1 + max_retx` times with the same encoding;
/// after the last attempt the receiver keeps what it has.
pub fn simulate_arq(exp: &LinkExperiment, max_retx: usize) -> Result<Vec<ArqMetrics>> {
    let prep = Prepared::new(exp)?;
    exp.snr_db
        .iter()
        .enumerate()
        .map(|(k, &snr)| {
            let source = prep.source(snr)?;
            let c = arq_point(&prep, source, derive_seed(exp.seed, k as u64), max_retx)?;
            Ok(ArqMetrics::from_counts(snr, c))
        })
        .collect()
}

/// [`simulate_arq`] on a BSC with a given crossover.
pub fn simulate_arq_at_crossover(exp: &LinkExperiment, epsilon: f64, max_retx: usize) -> Result<ArqMetrics> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::config("crossover must lie in [0, 0.5]"));
    }
    let prep = Prepared::new(exp)?;
    let c = arq_point(&prep, LinkSource::Crossover(epsilon), derive_seed(exp.seed, 0), max_retx)?;
    Ok(ArqMetrics::from_counts(f64::NAN, c))
}

/// Exact error probabilities on a BSC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRates {
    pub syn_sentence_err: f64,
    pub sem_err: f64,
}

/// Largest frame the exact evaluator enumerates.
pub const EXACT_MAX_BITS: usize = 20;

/// Sum over every received word instead of sampling; all frames must share
/// one length of at most [`EXACT_MAX_BITS`] bits.
pub fn exact_error_rates(exp: &LinkExperiment, epsilon: f64) -> Result<ExactRates> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::config("crossover must lie in [0, 0.5]"));
    }
    let prep = Prepared::new(exp)?;
    let n = prep.frames[0].bits.len();
    if n > EXACT_MAX_BITS || prep.frames.iter().any(|f| f.bits.len() != n) {
        return Err(Error::config("exact evaluation needs equal frames of at most 20 bits"));
    }
    let as_int = |bits: &[u8]| bits.iter().fold(0u32, |a, &b| (a << 1) | u32::from(b));
    let codewords: Vec<u32> = prep.frames.iter().map(|f| as_int(&f.bits)).collect();
    let link = BitLink::uniform(epsilon);
    let lang = &exp.language;
    let prior = lang.prior();
    let per_word: Vec<Result<(f64, f64)>> = (0..1u32 << n)
        .into_par_iter()
        .map(|word| {
            let p_y: Vec<f64> = codewords
                .iter()
                .map(|&c| {
                    let d = (c ^ word).count_ones() as i32;
                    epsilon.powi(d) * (1.0 - epsilon).powi(n as i32 - d)
                })
                .collect();
            if p_y.iter().zip(prior).all(|(p, q)| p * q == 0.0) {
                return Ok((0.0, 0.0));
            }
            let y: Vec<u8> = (0..n).rev().map(|i| ((word >> i) & 1) as u8).collect();
            let semantic = prep.decoder.decode(&y, &link)?.message_hat;
            let syntactic = syntactic_decode(&y, prep.frames[0].source_len, &exp.codec).ok();
            let (mut syn, mut sem) = (0.0, 0.0);
            for m in 0..lang.len() {
                let w = prior[m] * p_y[m];
                if syntactic.as_deref() != Some(lang.sentence(m)) {
                    syn += w;
                }
                if prep.is_meaning_error(m, semantic) {
                    sem += w;
                }
            }
            Ok((syn, sem))
        })
        .collect();
    let (mut syn, mut sem) = (0.0, 0.0);
    for r in per_word {
        let (a, b) = r?;
        syn += a;
        sem += b;
    }
    Ok(ExactRates {
        syn_sentence_err: syn,
        sem_err: sem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::KnowledgeBasePair;
    use crate::language::KnowledgeBase;

    fn exp_at(trials: usize) -> LinkExperiment {
        LinkExperiment::reference(vec![0.0], trials, 7)
    }

    #[test]
    fn reference_grammar_shape() {
        let lang = reference_language();
        assert_eq!(lang.len(), 64);
        assert_eq!(lang.vocabulary().len().pow(3), 4096);
        // valid codewords are pairwise at distance ≥ 2
        let codec = &exp_at(1).codec;
        let frames: Vec<Vec<u8>> = lang.sentences().iter().map(|s| codec.encode(s).unwrap().bits).collect();
        for i in 0..frames.len() {
            for j in i + 1..frames.len() {
                let d = frames[i].iter().zip(&frames[j]).filter(|(a, b)| a != b).count();
                assert!(d >= 2);
            }
        }
    }

    #[test]
    fn noiseless_link_is_error_free() {
        let m = simulate_link_at_crossover(&exp_at(2000), 0.0).unwrap();
        assert_eq!((m.syn_symbol_err, m.syn_sentence_err, m.sem_err), (0.0, 0.0, 0.0));
        let a = simulate_arq_at_crossover(&exp_at(2000), 0.0, 3).unwrap();
        assert_eq!((a.sem_retx_rate, a.syn_retx_rate), (0.0, 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let exp = LinkExperiment::reference(vec![-3.0, 3.0], 5000, 42);
        assert_eq!(sweep_snr(&exp).unwrap(), sweep_snr(&exp).unwrap());
        let rows = sweep_snr(&LinkExperiment { snr_db: vec![1.0], ..exp }).unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn unstructured_language_gains_nothing() {
        let language = build_sentence_language(&unstructured_grammar()).unwrap();
        let codec = SyntacticCodec::for_language(&language, SourceCodeKind::Fixed, ChannelCode::None).unwrap();
        let exp = LinkExperiment { language, codec, trials: 3000, ..exp_at(1) };
        let m = simulate_link_at_crossover(&exp, 0.05).unwrap();
        assert_eq!(m.syn_sentence_err, m.sem_err);
    }

    #[test]
    fn tau_zero_residual_equals_raw_error() {
        let exp = LinkExperiment { tau: 0.0, ..exp_at(20_000) };
        let link = simulate_link_at_crossover(&exp, 0.08).unwrap();
        let arq = simulate_arq_at_crossover(&exp, 0.08, 4).unwrap();
        assert_eq!(arq.sem_retx_rate, 0.0);
        assert_eq!(arq.residual_sem_err, link.sem_err);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let exp = exp_at(40_000);
        let eps = 0.07;
        let exact = exact_error_rates(&exp, eps).unwrap();
        let mc = simulate_link_at_crossover(&exp, eps).unwrap();
        let tol = |p: f64| 4.0 * (p * (1.0 - p) / 40_000.0).sqrt();
        assert!((mc.sem_err - exact.sem_err).abs() < tol(exact.sem_err));
        assert!((mc.syn_sentence_err - exact.syn_sentence_err).abs() < tol(exact.syn_sentence_err));
        // closed form: the sentence arrives intact with probability (1-ε)^12
        assert!((exact.syn_sentence_err - (1.0 - (1.0 - eps).powi(12))).abs() < 1e-12);
    }

    #[test]
    fn mismatched_kb_at_zero_noise() {
        let lang = reference_language();
        let mut kb_d = lang.meaning_class().to_vec();
        // receiver merges the first 8 sentences into one class
        for c in kb_d.iter_mut().take(8) {
            *c = lang.meaning_class()[0];
        }
        let names: Vec<String> = (0..lang.len()).map(|i| i.to_string()).collect();
        let pair = KnowledgeBasePair::new(
            KnowledgeBase::new(names.clone(), lang.meaning_class().to_vec()).unwrap(),
            KnowledgeBase::new(names, kb_d.clone()).unwrap(),
        )
        .unwrap();
        let mass = pair.mismatch_mass(lang.prior());
        assert!((mass - 7.0 / 64.0).abs() < 1e-12);
        let exp = LinkExperiment { kb_destination: Some(kb_d), ..exp_at(1) };
        let exact = exact_error_rates(&exp, 0.0).unwrap();
        assert!(exact.sem_err >= mass - 1e-12);
        assert!((exact.sem_err - mass).abs() < 1e-12);
    }

    #[test]
    fn fading_runs() {
        let exp = LinkExperiment { fading: FadingKind::RayleighBlock, ..LinkExperiment::reference(vec![0.0, 10.0], 4000, 3) };
        let rows = simulate_link(&exp).unwrap();
        assert!(rows[1].sem_err < rows[0].sem_err);
        assert!(rows[0].epsilon.is_nan());
    }

    #[test]
    fn invalid_experiments_rejected() {
        assert!(simulate_link(&LinkExperiment { trials: 0, ..exp_at(1) }).is_err());
        assert!(simulate_link(&LinkExperiment { snr_db: vec![], ..exp_at(1) }).is_err());
        assert!(simulate_link(&LinkExperiment { tau: 1.5, ..exp_at(1) }).is_err());
    }
}
