//! Message spaces, knowledge bases and message-to-symbol mappings.
//!
//! A knowledge base is a partition of the message set into meaning classes:
//! two messages are semantically equivalent when they land in the same class.
//! Source and destination may hold different partitions
//! ([`KnowledgeBasePair`]); a message decoded correctly can still be
//! misinterpreted when the two disagree.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, Result, PROB_TOL};

/// Upper bound on the number of valid sentences an enumerated language may hold.
pub const MAX_SENTENCES: usize = 100_000;

/// Upper bound on the raw product of slot sizes scanned during enumeration.
const MAX_SCAN: u128 = 10_000_000;

pub(crate) fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::config(format!("{what}: empty distribution")));
    }
    if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::config(format!("{what}: invalid entry {bad}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::config(format!(
            "{what}: entries sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Meaning-class assignment over a named message set.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    names: Vec<String>,
    classes: Vec<usize>,
    index: HashMap<String, usize>,
}

impl KnowledgeBase {
    pub fn new(names: Vec<String>, classes: Vec<usize>) -> Result<Self> {
        if names.len() != classes.len() {
            return Err(Error::config(format!(
                "knowledge base covers {} classes for {} messages",
                classes.len(),
                names.len()
            )));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::config(format!("duplicate message `{n}`")));
            }
        }
        Ok(Self {
            names,
            classes,
            index,
        })
    }

    /// Every message in its own class.
    pub fn identity(names: Vec<String>) -> Result<Self> {
        let classes = (0..names.len()).collect();
        Self::new(names, classes)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn index_of(&self, message: &str) -> Result<usize> {
        self.index
            .get(message)
            .copied()
            .ok_or_else(|| Error::UnknownMessage(message.to_string()))
    }

    pub fn class_of(&self, message: &str) -> Result<usize> {
        Ok(self.classes[self.index_of(message)?])
    }

    pub fn class_at(&self, index: usize) -> usize {
        self.classes[index]
    }

    /// Number of distinct meaning classes.
    pub fn num_classes(&self) -> usize {
        let mut c = self.classes.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }
}

/// True iff both messages fall in the same meaning class of `kb`.
pub fn semantically_equivalent(m: &str, m_prime: &str, kb: &KnowledgeBase) -> Result<bool> {
    Ok(kb.class_of(m)? == kb.class_of(m_prime)?)
}

/// Finite message set with a prior and the source knowledge base.
#[derive(Debug, Clone)]
pub struct MessageSpace {
    prior: Vec<f64>,
    kb: KnowledgeBase,
}

impl MessageSpace {
    pub fn new(messages: Vec<String>, prior: Vec<f64>, classes: Vec<usize>) -> Result<Self> {
        if messages.len() != prior.len() {
            return Err(Error::config(format!(
                "prior has {} entries for {} messages",
                prior.len(),
                messages.len()
            )));
        }
        check_distribution(&prior, "message prior")?;
        let kb = KnowledgeBase::new(messages, classes)?;
        Ok(Self { prior, kb })
    }

    /// Uniform prior, identity knowledge base.
    pub fn uniform(messages: Vec<String>) -> Result<Self> {
        let k = messages.len();
        if k == 0 {
            return Err(Error::config("empty message set"));
        }
        let classes = (0..k).collect();
        Self::new(messages, vec![1.0 / k as f64; k], classes)
    }

    pub fn len(&self) -> usize {
        self.prior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior.is_empty()
    }

    pub fn messages(&self) -> &[String] {
        self.kb.names()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn knowledge_base(&self) -> &KnowledgeBase {
        &self.kb
    }

    /// Probability mass of each meaning class, ordered by class label.
    pub fn class_probabilities(&self) -> Vec<f64> {
        let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, p) in self.prior.iter().enumerate() {
            *mass.entry(self.kb.class_at(i)).or_insert(0.0) += p;
        }
        mass.into_values().collect()
    }
}

/// Source and destination knowledge bases over the same message set.
#[derive(Debug, Clone)]
pub struct KnowledgeBasePair {
    pub source: KnowledgeBase,
    pub destination: KnowledgeBase,
}

impl KnowledgeBasePair {
    pub fn new(source: KnowledgeBase, destination: KnowledgeBase) -> Result<Self> {
        if source.names() != destination.names() {
            return Err(Error::config(
                "source and destination knowledge bases cover different messages",
            ));
        }
        Ok(Self {
            source,
            destination,
        })
    }

    /// Prior mass of messages whose class differs between source and destination.
    pub fn mismatch_mass(&self, prior: &[f64]) -> f64 {
        prior
            .iter()
            .enumerate()
            .filter(|(i, _)| self.source.class_at(*i) != self.destination.class_at(*i))
            .map(|(_, p)| p)
            .sum()
    }
}

/// Conditional table p(x|m), one row per message.
#[derive(Debug, Clone)]
pub struct StochasticMapping {
    alphabet: Vec<String>,
    cond: Vec<Vec<f64>>,
}

impl StochasticMapping {
    pub fn new(alphabet: Vec<String>, cond: Vec<Vec<f64>>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::config("empty symbol alphabet"));
        }
        for (i, row) in cond.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::config(format!(
                    "mapping row {i} has {} entries, alphabet has {}",
                    row.len(),
                    alphabet.len()
                )));
            }
            check_distribution(row, &format!("mapping row {i}"))?;
        }
        Ok(Self { alphabet, cond })
    }

    /// Deterministic mapping x = f(m), given as the symbol index per message.
    pub fn deterministic(alphabet: Vec<String>, f: &[usize]) -> Result<Self> {
        let n = alphabet.len();
        let mut cond = Vec::with_capacity(f.len());
        for (i, &x) in f.iter().enumerate() {
            if x >= n {
                return Err(Error::config(format!(
                    "message {i} maps to symbol {x} outside alphabet of size {n}"
                )));
            }
            let mut row = vec![0.0; n];
            row[x] = 1.0;
            cond.push(row);
        }
        Self::new(alphabet, cond)
    }

    pub fn identity(k: usize) -> Result<Self> {
        let alphabet = (0..k).map(|i| format!("x{i}")).collect();
        Self::deterministic(alphabet, &(0..k).collect::<Vec<_>>())
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_messages(&self) -> usize {
        self.cond.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.cond[m]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.cond
    }

    pub fn is_deterministic(&self) -> bool {
        self.cond
            .iter()
            .all(|r| r.iter().all(|&v| v == 0.0 || v == 1.0))
    }

    pub(crate) fn check_against(&self, space: &MessageSpace) -> Result<()> {
        if self.num_messages() != space.len() {
            return Err(Error::config(format!(
                "mapping has {} rows for {} messages",
                self.num_messages(),
                space.len()
            )));
        }
        Ok(())
    }
}

/// Logical probability p_S(x) = Σ_m p(x|m) p(m).
pub fn logical_probability(mapping: &StochasticMapping, space: &MessageSpace) -> Result<Vec<f64>> {
    mapping.check_against(space)?;
    let mut out = vec![0.0; mapping.num_symbols()];
    for (row, &pm) in mapping.rows().iter().zip(space.prior()) {
        for (o, &px) in out.iter_mut().zip(row) {
            *o += px * pm;
        }
    }
    Ok(out)
}

/// Slot-based grammar from which a [`SentenceLanguage`] is enumerated.
///
/// `forbid` entries list one word (or `*`) per slot; sentences matching every
/// non-wildcard position are excluded. Words in a `synonyms` group share a
/// concept, and the meaning class of a sentence is its tuple of concepts.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GrammarSpec {
    pub vocabulary: Vec<String>,
    pub slots: Vec<Vec<String>>,
    #[serde(default)]
    pub forbid: Vec<Vec<String>>,
    #[serde(default)]
    pub synonyms: Vec<Vec<String>>,
    /// Unnormalized per-word weights; sentence prior is proportional to the
    /// product of its word weights. Missing words weigh 1.
    #[serde(default)]
    pub word_weights: BTreeMap<String, f64>,
}

/// Explicitly enumerated set of valid fixed-length sentences.
#[derive(Debug, Clone)]
pub struct SentenceLanguage {
    vocabulary: Vec<String>,
    length: usize,
    sentences: Vec<Vec<usize>>,
    prior: Vec<f64>,
    meaning_class: Vec<usize>,
    lookup: HashMap<Vec<usize>, usize>,
}

/// Enumerate the valid sentences of a slot grammar.
pub fn build_sentence_language(spec: &GrammarSpec) -> Result<SentenceLanguage> {
    let vocab_index: HashMap<&str, usize> = spec
        .vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    if vocab_index.len() != spec.vocabulary.len() {
        return Err(Error::config("vocabulary contains duplicate words"));
    }
    let word = |w: &str| -> Result<usize> {
        vocab_index
            .get(w)
            .copied()
            .ok_or_else(|| Error::config(format!("word `{w}` not in vocabulary")))
    };
    if spec.slots.is_empty() {
        return Err(Error::config("grammar has no slots"));
    }
    let slots: Vec<Vec<usize>> = spec
        .slots
        .iter()
        .map(|s| s.iter().map(|w| word(w)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let length = slots.len();

    let forbid: Vec<Vec<Option<usize>>> = spec
        .forbid
        .iter()
        .map(|rule| {
            if rule.len() != length {
                return Err(Error::config(format!(
                    "forbid rule has {} positions, sentences have {length}",
                    rule.len()
                )));
            }
            rule.iter()
                .map(|w| if w == "*" { Ok(None) } else { word(w).map(Some) })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut concept: Vec<usize> = (0..spec.vocabulary.len()).collect();
    for group in &spec.synonyms {
        if let Some(first) = group.first() {
            let head = word(first)?;
            for w in group {
                concept[word(w)?] = head;
            }
        }
    }

    let mut weight = vec![1.0; spec.vocabulary.len()];
    for (w, &v) in &spec.word_weights {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::config(format!("weight of `{w}` must be positive")));
        }
        weight[word(w)?] = v;
    }

    let scan: u128 = slots.iter().map(|s| s.len() as u128).product();
    if scan == 0 {
        return Err(Error::config("grammar admits no sentences (empty slot)"));
    }
    if scan > MAX_SCAN {
        return Err(Error::config(format!(
            "grammar spans {scan} combinations, more than the {MAX_SCAN} limit"
        )));
    }

    let mut sentences = Vec::new();
    let mut odometer = vec![0usize; length];
    'scan: loop {
        let sentence: Vec<usize> = odometer.iter().zip(&slots).map(|(&i, s)| s[i]).collect();
        let excluded = forbid.iter().any(|rule| {
            rule.iter()
                .zip(&sentence)
                .all(|(r, &w)| r.is_none_or(|r| r == w))
        });
        if !excluded {
            if sentences.len() == MAX_SENTENCES {
                return Err(Error::config(format!(
                    "more than {MAX_SENTENCES} valid sentences"
                )));
            }
            sentences.push(sentence);
        }
        for pos in (0..length).rev() {
            odometer[pos] += 1;
            if odometer[pos] < slots[pos].len() {
                continue 'scan;
            }
            odometer[pos] = 0;
        }
        break;
    }
    if sentences.is_empty() {
        return Err(Error::config("grammar admits no valid sentences"));
    }

    let raw: Vec<f64> = sentences
        .iter()
        .map(|s| s.iter().map(|&w| weight[w]).product())
        .collect();
    let total: f64 = raw.iter().sum();
    let prior = raw.iter().map(|w| w / total).collect();

    let mut class_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let meaning_class = sentences
        .iter()
        .map(|s| {
            let key: Vec<usize> = s.iter().map(|&w| concept[w]).collect();
            let next = class_ids.len();
            *class_ids.entry(key).or_insert(next)
        })
        .collect();

    SentenceLanguage::from_parts(spec.vocabulary.clone(), sentences, prior, meaning_class)
}

impl SentenceLanguage {
    /// Assemble a language from an explicit sentence list.
    pub fn from_parts(
        vocabulary: Vec<String>,
        sentences: Vec<Vec<usize>>,
        prior: Vec<f64>,
        meaning_class: Vec<usize>,
    ) -> Result<Self> {
        if sentences.is_empty() {
            return Err(Error::config("empty sentence set"));
        }
        if sentences.len() > MAX_SENTENCES {
            return Err(Error::config(format!(
                "more than {MAX_SENTENCES} valid sentences"
            )));
        }
        if prior.len() != sentences.len() || meaning_class.len() != sentences.len() {
            return Err(Error::config("sentence, prior and class counts differ"));
        }
        check_distribution(&prior, "sentence prior")?;
        let length = sentences[0].len();
        let mut lookup = HashMap::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            if s.len() != length || length == 0 {
                return Err(Error::config("sentences must share a nonzero length"));
            }
            if let Some(w) = s.iter().find(|&&w| w >= vocabulary.len()) {
                return Err(Error::config(format!("word index {w} outside vocabulary")));
            }
            if lookup.insert(s.clone(), i).is_some() {
                return Err(Error::config("duplicate sentence"));
            }
        }
        Ok(Self {
            vocabulary,
            length,
            sentences,
            prior,
            meaning_class,
            lookup,
        })
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    /// Sentence length L in words.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentences(&self) -> &[Vec<usize>] {
        &self.sentences
    }

    pub fn sentence(&self, i: usize) -> &[usize] {
        &self.sentences[i]
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn meaning_class(&self) -> &[usize] {
        &self.meaning_class
    }

    pub fn index_of(&self, words: &[usize]) -> Option<usize> {
        self.lookup.get(words).copied()
    }

    pub fn is_valid(&self, words: &[usize]) -> bool {
        self.lookup.contains_key(words)
    }

    pub fn render(&self, words: &[usize]) -> String {
        words
            .iter()
            .map(|&w| self.vocabulary[w].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The valid sentences viewed as a message space with the source KB.
    pub fn message_space(&self) -> Result<MessageSpace> {
        let names = self.sentences.iter().map(|s| self.render(s)).collect();
        MessageSpace::new(names, self.prior.clone(), self.meaning_class.clone())
    }

    /// Marginal word frequency across all positions under the sentence prior.
    pub fn word_distribution(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.vocabulary.len()];
        let share = 1.0 / self.length as f64;
        for (s, &p) in self.sentences.iter().zip(&self.prior) {
            for &w in s {
                out[w] += p * share;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("m{i}")).collect()
    }

    fn slot_spec(n: usize) -> GrammarSpec {
        let s: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let v: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let o: Vec<String> = (0..n).map(|i| format!("o{i}")).collect();
        let vocabulary = s.iter().chain(&v).chain(&o).cloned().collect();
        GrammarSpec {
            vocabulary,
            slots: vec![s, v, o],
            ..Default::default()
        }
    }

    #[test]
    fn logical_probability_many_to_one() {
        let space = MessageSpace::uniform(names(3)).unwrap();
        let f = StochasticMapping::deterministic(vec!["x1".into(), "x2".into()], &[0, 0, 1])
            .unwrap();
        let p = logical_probability(&f, &space).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn logical_probability_one_to_many() {
        let space = MessageSpace::uniform(names(2)).unwrap();
        let f = StochasticMapping::new(
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
        )
        .unwrap();
        let p = logical_probability(&f, &space).unwrap();
        assert_eq!(p, vec![0.25, 0.25, 0.5]);
    }

    #[test]
    fn logical_probability_identity_is_uniform() {
        let space = MessageSpace::uniform(names(5)).unwrap();
        let p = logical_probability(&StochasticMapping::identity(5).unwrap(), &space).unwrap();
        assert!(p.iter().all(|&v| (v - 0.2).abs() < 1e-15));
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let space = MessageSpace::uniform(names(3)).unwrap();
        let err = logical_probability(&StochasticMapping::identity(2).unwrap(), &space);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_prior_and_rows() {
        assert!(MessageSpace::new(names(2), vec![0.6, 0.6], vec![0, 1]).is_err());
        assert!(MessageSpace::new(names(2), vec![-0.5, 1.5], vec![0, 1]).is_err());
        assert!(StochasticMapping::new(vec!["a".into()], vec![vec![0.9]]).is_err());
    }

    #[test]
    fn grammar_full_product() {
        let lang = build_sentence_language(&slot_spec(4)).unwrap();
        assert_eq!(lang.len(), 64);
        assert_eq!(lang.length(), 3);
        assert!((lang.prior().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grammar_with_forbidden_pair() {
        let mut spec = slot_spec(4);
        spec.forbid.push(vec!["*".into(), "v1".into(), "o2".into()]);
        let lang = build_sentence_language(&spec).unwrap();
        // enumeration oracle: count triples avoiding (v1, o2)
        let mut expected = 0;
        for _s in 0..4 {
            for v in 0..4 {
                for o in 0..4 {
                    if !(v == 1 && o == 2) {
                        expected += 1;
                    }
                }
            }
        }
        assert_eq!(expected, 60);
        assert_eq!(lang.len(), expected);
    }

    #[test]
    fn grammar_single_word() {
        let spec = GrammarSpec {
            vocabulary: vec!["hi".into()],
            slots: vec![vec!["hi".into()]],
            ..Default::default()
        };
        let lang = build_sentence_language(&spec).unwrap();
        assert_eq!(lang.len(), 1);
        assert_eq!(lang.prior(), &[1.0]);
    }

    #[test]
    fn grammar_empty_is_error() {
        let mut spec = slot_spec(1);
        spec.forbid.push(vec!["*".into(), "*".into(), "*".into()]);
        assert!(matches!(
            build_sentence_language(&spec),
            Err(Error::Config(_))
        ));
        let mut spec = slot_spec(2);
        spec.slots[1].clear();
        assert!(build_sentence_language(&spec).is_err());
    }

    #[test]
    fn synonyms_merge_meaning_classes() {
        let mut spec = slot_spec(2);
        spec.synonyms.push(vec!["s0".into(), "s1".into()]);
        let lang = build_sentence_language(&spec).unwrap();
        assert_eq!(lang.len(), 8);
        let space = lang.message_space().unwrap();
        assert_eq!(space.knowledge_base().num_classes(), 4);
        assert!(semantically_equivalent("s0 v1 o0", "s1 v1 o0", space.knowledge_base()).unwrap());
        assert!(!semantically_equivalent("s0 v1 o0", "s0 v0 o0", space.knowledge_base()).unwrap());
    }

    #[test]
    fn word_weights_shape_prior() {
        let mut spec = slot_spec(2);
        spec.word_weights.insert("s0".into(), 3.0);
        let lang = build_sentence_language(&spec).unwrap();
        let i = lang.index_of(&[0, 2, 4]).unwrap();
        let j = lang.index_of(&[1, 2, 4]).unwrap();
        assert!((lang.prior()[i] / lang.prior()[j] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn equivalence_basics() {
        let kb = KnowledgeBase::identity(names(3)).unwrap();
        assert!(semantically_equivalent("m1", "m1", &kb).unwrap());
        assert!(!semantically_equivalent("m1", "m2", &kb).unwrap());
        let one = KnowledgeBase::new(names(3), vec![7, 7, 7]).unwrap();
        assert!(semantically_equivalent("m1", "m3", &one).unwrap());
        assert!(matches!(
            semantically_equivalent("m1", "zz", &kb),
            Err(Error::UnknownMessage(_))
        ));
    }

    #[test]
    fn mismatch_mass_counts_disagreeing_messages() {
        let src = KnowledgeBase::new(names(3), vec![0, 1, 2]).unwrap();
        let dst = KnowledgeBase::new(names(3), vec![0, 1, 1]).unwrap();
        let pair = KnowledgeBasePair::new(src, dst).unwrap();
        assert!((pair.mismatch_mass(&[0.5, 0.3, 0.2]) - 0.2).abs() < 1e-15);
    }
}
