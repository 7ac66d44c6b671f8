//! Syntactic coding and semantic decoding.
//!
//! A [`SyntacticCodec`] is a source code followed by a channel code; it only
//! touches the form of a message. The [`map`] module holds the semantic MAP
//! decoder, which searches the valid message set directly.

mod channel_code;
pub mod map;
mod source;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use channel_code::ChannelCode;
pub use map::{
    semantic_error_detect, semantic_map_decode, DecodeResult, SemanticDecoder, DEFAULT_TAU,
};
pub use source::{huffman_lengths, HuffmanCode, SourceCode};

use crate::language::SentenceLanguage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceCodeKind {
    Fixed,
    Huffman,
}

impl fmt::Display for SourceCodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceCodeKind::Fixed => "fixed",
            SourceCodeKind::Huffman => "huffman",
        })
    }
}

impl FromStr for SourceCodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(SourceCodeKind::Fixed),
            "huffman" => Ok(SourceCodeKind::Huffman),
            _ => Err(Error::config(format!(
                "unknown source code `{s}` (expected fixed or huffman)"
            ))),
        }
    }
}

/// Encoded frame; `source_len` is the framing header the receiver relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub bits: Vec<u8>,
    pub source_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntacticCodec {
    pub source: SourceCode,
    pub channel: ChannelCode,
}

impl SyntacticCodec {
    pub fn new(source: SourceCode, channel: ChannelCode) -> Result<Self> {
        channel.validate()?;
        Ok(Self { source, channel })
    }

    /// Codec over an alphabet with symbol probabilities `p` (used by Huffman).
    pub fn for_alphabet(p: &[f64], kind: SourceCodeKind, channel: ChannelCode) -> Result<Self> {
        let source = match kind {
            SourceCodeKind::Fixed => SourceCode::fixed_length(p.len())?,
            SourceCodeKind::Huffman => SourceCode::huffman(p)?,
        };
        Self::new(source, channel)
    }

    /// Word-level codec for a sentence language; Huffman uses the word marginal.
    pub fn for_language(
        lang: &SentenceLanguage,
        kind: SourceCodeKind,
        channel: ChannelCode,
    ) -> Result<Self> {
        Self::for_alphabet(&lang.word_distribution(), kind, channel)
    }

    pub fn encode(&self, symbols: &[usize]) -> Result<Frame> {
        let mut src = Vec::new();
        self.source.encode_into(symbols, &mut src)?;
        Ok(Frame {
            bits: self.channel.encode(&src),
            source_len: src.len(),
        })
    }
}

/// Channel decode (nearest codeword per block) followed by source decode.
pub fn syntactic_decode(y: &[u8], source_len: usize, codec: &SyntacticCodec) -> Result<Vec<usize>> {
    let src = codec.channel.decode(y, source_len)?;
    codec.source.decode(&src)
}
