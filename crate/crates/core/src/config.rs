//! Configuration files.
//!
//! Language and experiment configurations are TOML documents; unknown keys
//! are rejected. A language file takes one of two forms.
//!
//! Message space, for the measures:
//!
//! ```toml
//! messages = ["m1", "m2", "m3"]
//! prior = [0.25, 0.25, 0.5]          # optional, uniform by default
//! symbols = ["x1", "x2"]             # optional with a table mapping
//! mapping = ["x1", "x1", "x2"]       # f(m), or a K×|X| table of p(x|m)
//! kb_source = ["a", "b", "c"]        # optional, identity by default
//! kb_destination = ["a", "b", "b"]   # optional, same as the source
//! ```
//!
//! Slot grammar, for the link experiments:
//!
//! ```toml
//! vocabulary = ["alice", "bob", "eats", "apples"]
//! slots = [["alice", "bob"], ["eats"], ["apples"]]
//! forbid = [["bob", "*", "*"]]
//! synonyms = [["alice", "bob"]]
//! destination_synonyms = []
//! word_weights = { alice = 2.0 }
//! ```
//!
//! Joint tables for the bottleneck tools are plain text: one row of
//! p(x, θ) per line, entries separated by commas or whitespace, `#` starts
//! a comment.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::edgesim::{EdgeConfig, FedConfig};
use crate::language::{
    build_sentence_language, GrammarSpec, KnowledgeBase, KnowledgeBasePair, MessageSpace,
    SentenceLanguage, StochasticMapping,
};
use crate::{Error, Result};

/// Class label written as a string or an integer.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Text(String),
}

impl Label {
    fn key(&self) -> String {
        match self {
            Label::Int(i) => i.to_string(),
            Label::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum MappingSpec {
    /// Symbol name per message.
    Function(Vec<String>),
    /// Row-stochastic table p(x|m).
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LanguageFile {
    pub messages: Option<Vec<String>>,
    pub prior: Option<Vec<f64>>,
    pub symbols: Option<Vec<String>>,
    pub mapping: Option<MappingSpec>,
    pub kb_source: Option<Vec<Label>>,
    pub kb_destination: Option<Vec<Label>>,
    pub vocabulary: Option<Vec<String>>,
    pub slots: Option<Vec<Vec<String>>>,
    pub forbid: Option<Vec<Vec<String>>>,
    pub synonyms: Option<Vec<Vec<String>>>,
    pub destination_synonyms: Option<Vec<Vec<String>>>,
    pub word_weights: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone)]
pub enum LanguageConfig {
    Space {
        space: MessageSpace,
        mapping: StochasticMapping,
        kb: KnowledgeBasePair,
    },
    Grammar {
        language: SentenceLanguage,
        /// Receiver meaning classes in the same label space as the sender's.
        kb_destination: Option<Vec<usize>>,
    },
}

fn intern(labels: &[Vec<String>]) -> Vec<usize> {
    let mut ids: HashMap<&[String], usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.as_slice()).or_insert(next)
        })
        .collect()
}

// Concept head of every word under a synonym grouping.
fn concepts(vocabulary: &[String], groups: &[Vec<String>]) -> Result<Vec<String>> {
    let mut head: Vec<String> = vocabulary.to_vec();
    for g in groups {
        let Some(first) = g.first() else { continue };
        for w in g {
            let i = vocabulary
                .iter()
                .position(|v| v == w)
                .ok_or_else(|| Error::config(format!("synonym `{w}` not in vocabulary")))?;
            head[i] = first.clone();
        }
    }
    Ok(head)
}

impl LanguageConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: LanguageFile =
            toml::from_str(text).map_err(|e| Error::config(format!("language file: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_file(f: LanguageFile) -> Result<Self> {
        let space_keys = f.messages.is_some() || f.mapping.is_some() || f.prior.is_some() || f.symbols.is_some();
        let grammar_keys = f.vocabulary.is_some() || f.slots.is_some();
        match (space_keys, grammar_keys) {
            (true, false) => Self::space(f),
            (false, true) => Self::grammar(f),
            (true, true) => Err(Error::config("language file mixes message-space and grammar keys")),
            (false, false) => Err(Error::config("language file needs `messages` or `vocabulary`")),
        }
    }

    fn space(f: LanguageFile) -> Result<Self> {
        if f.forbid.is_some() || f.synonyms.is_some() || f.destination_synonyms.is_some() || f.word_weights.is_some() {
            return Err(Error::config("grammar keys are not allowed with `messages`"));
        }
        let messages = f.messages.ok_or_else(|| Error::config("missing `messages`"))?;
        let k = messages.len();
        let prior = f.prior.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        let mapping = match f.mapping.ok_or_else(|| Error::config("missing `mapping`"))? {
            MappingSpec::Function(targets) => {
                let alphabet = match f.symbols {
                    Some(s) => s,
                    None => {
                        let mut seen = Vec::new();
                        for t in &targets {
                            if !seen.contains(t) {
                                seen.push(t.clone());
                            }
                        }
                        seen
                    }
                };
                let idx = targets
                    .iter()
                    .map(|t| {
                        alphabet
                            .iter()
                            .position(|a| a == t)
                            .ok_or_else(|| Error::config(format!("mapping target `{t}` not in symbols")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                StochasticMapping::deterministic(alphabet, &idx)?
            }
            MappingSpec::Table(rows) => {
                let width = rows.first().map_or(0, Vec::len);
                let alphabet = f.symbols.unwrap_or_else(|| (0..width).map(|i| format!("x{i}")).collect());
                StochasticMapping::new(alphabet, rows)?
            }
        };
        let keys = |labels: Option<Vec<Label>>| -> Result<Option<Vec<String>>> {
            match labels {
                None => Ok(None),
                Some(l) if l.len() != k => Err(Error::config(format!(
                    "knowledge base lists {} labels for {k} messages",
                    l.len()
                ))),
                Some(l) => Ok(Some(l.iter().map(Label::key).collect())),
            }
        };
        let src = keys(f.kb_source)?.unwrap_or_else(|| messages.clone());
        let dst = keys(f.kb_destination)?.unwrap_or_else(|| src.clone());
        let all: Vec<Vec<String>> = src.iter().chain(&dst).map(|s| vec![s.clone()]).collect();
        let ids = intern(&all);
        let (src_ids, dst_ids) = ids.split_at(k);
        let space = MessageSpace::new(messages.clone(), prior, src_ids.to_vec())?;
        let kb = KnowledgeBasePair::new(
            KnowledgeBase::new(messages.clone(), src_ids.to_vec())?,
            KnowledgeBase::new(messages, dst_ids.to_vec())?,
        )?;
        Ok(LanguageConfig::Space { space, mapping, kb })
    }

    fn grammar(f: LanguageFile) -> Result<Self> {
        if f.kb_source.is_some() || f.kb_destination.is_some() {
            return Err(Error::config(
                "grammar files set meaning through `synonyms` and `destination_synonyms`",
            ));
        }
        let spec = GrammarSpec {
            vocabulary: f.vocabulary.ok_or_else(|| Error::config("missing `vocabulary`"))?,
            slots: f.slots.ok_or_else(|| Error::config("missing `slots`"))?,
            forbid: f.forbid.unwrap_or_default(),
            synonyms: f.synonyms.unwrap_or_default(),
            word_weights: f.word_weights.unwrap_or_default(),
        };
        let built = build_sentence_language(&spec)?;
        let Some(dst_groups) = f.destination_synonyms else {
            return Ok(LanguageConfig::Grammar {
                language: built,
                kb_destination: None,
            });
        };
        let src_head = concepts(&spec.vocabulary, &spec.synonyms)?;
        let dst_head = concepts(&spec.vocabulary, &dst_groups)?;
        let label = |head: &[String], s: &[usize]| -> Vec<String> { s.iter().map(|&w| head[w].clone()).collect() };
        let n = built.len();
        let all: Vec<Vec<String>> = built
            .sentences()
            .iter()
            .map(|s| label(&src_head, s))
            .chain(built.sentences().iter().map(|s| label(&dst_head, s)))
            .collect();
        let ids = intern(&all);
        let language = SentenceLanguage::from_parts(
            spec.vocabulary.clone(),
            built.sentences().to_vec(),
            built.prior().to_vec(),
            ids[..n].to_vec(),
        )?;
        Ok(LanguageConfig::Grammar {
            language,
            kb_destination: Some(ids[n..].to_vec()),
        })
    }
}

/// Edge simulator file: a `[model]` table plus the sweep grid.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeFile {
    #[serde(default)]
    pub model: EdgeConfig,
    /// Defaults to `[model.v]`.
    pub v_values: Option<Vec<f64>>,
    /// Defaults to `[model.lambda]`.
    pub lambda_values: Option<Vec<f64>>,
}

impl EdgeFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: EdgeFile = toml::from_str(text).map_err(|e| Error::config(format!("edge file: {e}")))?;
        f.model.validate()?;
        Ok(f)
    }

    pub fn v_values(&self) -> Vec<f64> {
        self.v_values.clone().unwrap_or_else(|| vec![self.model.v])
    }

    pub fn lambda_values(&self) -> Vec<f64> {
        self.lambda_values.clone().unwrap_or_else(|| vec![self.model.lambda])
    }
}

/// Federated averaging file: the loop parameters plus a starting point.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FedFile {
    pub centers: Vec<Vec<f64>>,
    pub curvatures: Option<Vec<f64>>,
    pub examples: Vec<f64>,
    pub rounds: usize,
    pub step_size: Option<f64>,
    pub tol: Option<f64>,
    /// Defaults to the origin.
    pub init: Option<Vec<f64>>,
}

impl FedFile {
    pub fn load(path: &Path) -> Result<(FedConfig, Vec<f64>)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Curvatures default to 1 and the step to `1 / (2·max a_i)`.
    pub fn parse(text: &str) -> Result<(FedConfig, Vec<f64>)> {
        let f: FedFile = toml::from_str(text).map_err(|e| Error::config(format!("fed file: {e}")))?;
        let curvatures = f.curvatures.unwrap_or_else(|| vec![1.0; f.centers.len()]);
        let a_max = curvatures.iter().copied().fold(0.0, f64::max);
        let cfg = FedConfig {
            step_size: f.step_size.unwrap_or(0.5 / a_max),
            centers: f.centers,
            curvatures,
            examples: f.examples,
            rounds: f.rounds,
            tol: f.tol,
        };
        let dim = cfg.validate()?;
        let init = f.init.unwrap_or_else(|| vec![0.0; dim]);
        Ok((cfg, init))
    }
}

/// Numeric matrix from text.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::config(format!("line {}: `{t}` is not a number", n + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::config("matrix file has no rows"));
    }
    Ok(rows)
}

pub fn load_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text)
}

/// Integer list separated by commas or whitespace.
pub fn parse_statistic(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::config(format!("`{t}` is not a statistic value")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::MeasuresRow;

    #[test]
    fn redundancy_instance_from_text() {
        let cfg = LanguageConfig::parse(
            r#"
            messages = ["m1", "m2"]
            symbols = ["x1", "x2", "x3"]
            mapping = [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]
            "#,
        )
        .unwrap();
        let LanguageConfig::Space { space, mapping, .. } = cfg else { panic!() };
        let row = MeasuresRow::compute(&mapping, &space).unwrap();
        assert!((row.decomposition.mutual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn function_mapping_and_labels() {
        let cfg = LanguageConfig::parse(
            r#"
            messages = ["a", "b", "c"]
            mapping = ["x", "x", "y"]
            kb_source = [1, 2, 3]
            kb_destination = [1, 2, 2]
            "#,
        )
        .unwrap();
        let LanguageConfig::Space { space, mapping, kb } = cfg else { panic!() };
        assert_eq!(mapping.num_symbols(), 2);
        assert!((kb.mismatch_mass(space.prior()) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(LanguageConfig::parse("messages = [\"a\"]\nmapping = [\"x\"]\ncolour = 1").is_err());
        assert!(EdgeFile::parse("horizon = 5").is_err());
        assert!(EdgeFile::parse("[model]\nhorizn = 5").is_err());
    }

    #[test]
    fn grammar_with_destination_synonyms() {
        let cfg = LanguageConfig::parse(
            r#"
            vocabulary = ["alice", "bob", "eats", "apples"]
            slots = [["alice", "bob"], ["eats"], ["apples"]]
            destination_synonyms = [["alice", "bob"]]
            "#,
        )
        .unwrap();
        let LanguageConfig::Grammar { language, kb_destination } = cfg else { panic!() };
        assert_eq!(language.meaning_class(), &[0, 1]);
        assert_eq!(kb_destination.unwrap(), vec![0, 0]);
    }

    #[test]
    fn edge_and_fed_files() {
        let e = EdgeFile::parse("v_values = [1.0, 2.0]\n[model]\nhorizon = 2000\nlambda = 0.0").unwrap();
        assert_eq!(e.model.horizon, 2000);
        assert_eq!(e.lambda_values(), vec![0.0]);
        let (f, w0) = FedFile::parse("centers = [[0.0], [1.0], [2.0]]\nexamples = [1, 1, 1]\nrounds = 10").unwrap();
        assert_eq!(f.step_size, 0.5);
        assert_eq!(w0, vec![0.0]);
    }

    #[test]
    fn matrix_text() {
        let m = parse_matrix("# p(x, theta)\n0.1, 0.2\n0.3 0.4 # tail\n\n").unwrap();
        assert_eq!(m, vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
        assert!(parse_matrix("0.1, zz").is_err());
        assert_eq!(parse_statistic("0 1\n1,2").unwrap(), vec![0, 1, 1, 2]);
    }
}
