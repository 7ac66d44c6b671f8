use std::collections::HashMap;

use crate::{Error, Result};

/// Huffman codeword lengths for a probability vector.
///
/// Zero-probability symbols get length 0 (no codeword). A single symbol with
/// positive mass also gets length 0: there is nothing to transmit. Ties are
/// broken by the lowest symbol index so the code is reproducible.
pub fn huffman_lengths(p: &[f64]) -> Vec<usize> {
    let mut lengths = vec![0usize; p.len()];
    // each live node: (mass, smallest member, members)
    let mut nodes: Vec<(f64, usize, Vec<usize>)> = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, &v)| (v, i, vec![i]))
        .collect();
    while nodes.len() > 1 {
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (ma, ia, a) = nodes.remove(0);
        let (mb, ib, b) = nodes.remove(0);
        for &s in a.iter().chain(&b) {
            lengths[s] += 1;
        }
        let mut members = a;
        members.extend(b);
        nodes.push((ma + mb, ia.min(ib), members));
    }
    lengths
}

/// Canonical prefix code built from Huffman lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanCode {
    codewords: Vec<Option<Vec<u8>>>,
    lookup: HashMap<(usize, u64), usize>,
    max_len: usize,
}

impl HuffmanCode {
    pub fn new(p: &[f64]) -> Result<Self> {
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || !p.iter().any(|&v| v > 0.0) {
            return Err(Error::config("Huffman code needs a nonzero, nonnegative distribution"));
        }
        let mut lengths = huffman_lengths(p);
        if let Some(only) = p.iter().position(|&v| v > 0.0) {
            if lengths.iter().all(|&l| l == 0) {
                lengths[only] = 1;
            }
        }
        let mut order: Vec<usize> = (0..p.len()).filter(|&s| lengths[s] > 0).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let max_len = order.last().map_or(0, |&s| lengths[s]);
        if max_len > 63 {
            return Err(Error::config("Huffman code too deep"));
        }

        let mut codewords = vec![None; p.len()];
        let mut lookup = HashMap::new();
        let mut code: u64 = 0;
        let mut prev = lengths[order[0]];
        for (k, &s) in order.iter().enumerate() {
            let len = lengths[s];
            if k > 0 {
                code = (code + 1) << (len - prev);
            }
            prev = len;
            let bits = (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect();
            codewords[s] = Some(bits);
            lookup.insert((len, code), s);
        }
        Ok(Self {
            codewords,
            lookup,
            max_len,
        })
    }

    pub fn codeword(&self, symbol: usize) -> Option<&[u8]> {
        self.codewords.get(symbol).and_then(|c| c.as_deref())
    }

    pub fn average_length(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(&self.codewords)
            .map(|(pi, c)| pi * c.as_ref().map_or(0, Vec::len) as f64)
            .sum()
    }

    fn decode(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let (mut code, mut len) = (0u64, 0usize);
        for &b in bits {
            code = (code << 1) | u64::from(b & 1);
            len += 1;
            if let Some(&s) = self.lookup.get(&(len, code)) {
                out.push(s);
                code = 0;
                len = 0;
            } else if len >= self.max_len {
                return Err(Error::Framing("bit pattern matches no codeword".into()));
            }
        }
        if len != 0 {
            return Err(Error::Framing("stream ends inside a codeword".into()));
        }
        Ok(out)
    }
}

/// Source code over a finite symbol alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceCode {
    FixedLength { bits: usize, alphabet: usize },
    Huffman(HuffmanCode),
}

impl SourceCode {
    /// ⌈log2 n⌉ bits per symbol (at least one).
    pub fn fixed_length(alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::config("empty alphabet"));
        }
        let bits = (usize::BITS - (alphabet - 1).leading_zeros()).max(1) as usize;
        Ok(SourceCode::FixedLength { bits, alphabet })
    }

    pub fn huffman(p: &[f64]) -> Result<Self> {
        Ok(SourceCode::Huffman(HuffmanCode::new(p)?))
    }

    pub fn encode_into(&self, symbols: &[usize], out: &mut Vec<u8>) -> Result<()> {
        match self {
            SourceCode::FixedLength { bits, alphabet } => {
                for &s in symbols {
                    if s >= *alphabet {
                        return Err(Error::input(format!("symbol {s} outside alphabet")));
                    }
                    out.extend((0..*bits).rev().map(|i| ((s >> i) & 1) as u8));
                }
            }
            SourceCode::Huffman(code) => {
                for &s in symbols {
                    let cw = code
                        .codeword(s)
                        .ok_or_else(|| Error::input(format!("symbol {s} has no codeword")))?;
                    out.extend_from_slice(cw);
                }
            }
        }
        Ok(())
    }

    pub fn decode(&self, bits: &[u8]) -> Result<Vec<usize>> {
        match self {
            SourceCode::FixedLength { bits: w, alphabet } => {
                if !bits.len().is_multiple_of(*w) {
                    return Err(Error::Framing(format!(
                        "{} bits is not a multiple of the {w}-bit symbol width",
                        bits.len()
                    )));
                }
                bits.chunks(*w)
                    .map(|c| {
                        let s = c.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
                        if s < *alphabet {
                            Ok(s)
                        } else {
                            Err(Error::Framing(format!("symbol index {s} outside alphabet")))
                        }
                    })
                    .collect()
            }
            SourceCode::Huffman(code) => code.decode(bits),
        }
    }

    pub fn average_length(&self, p: &[f64]) -> f64 {
        match self {
            SourceCode::FixedLength { bits, .. } => *bits as f64,
            SourceCode::Huffman(code) => code.average_length(p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::entropy;
    use proptest::prelude::*;

    #[test]
    fn dyadic_lengths() {
        assert_eq!(huffman_lengths(&[0.5, 0.25, 0.125, 0.125]), vec![1, 2, 3, 3]);
        assert_eq!(huffman_lengths(&[0.25; 4]), vec![2; 4]);
        assert_eq!(huffman_lengths(&[1.0]), vec![0]);
        assert_eq!(huffman_lengths(&[0.0, 1.0, 0.0]), vec![0, 0, 0]);
    }

    #[test]
    fn huffman_roundtrip_and_prefix_free() {
        let p = [0.4, 0.0, 0.3, 0.2, 0.1];
        let code = SourceCode::huffman(&p).unwrap();
        let msg = vec![0, 2, 3, 4, 4, 0];
        let mut bits = Vec::new();
        code.encode_into(&msg, &mut bits).unwrap();
        assert_eq!(code.decode(&bits).unwrap(), msg);
        assert!(code.encode_into(&[1], &mut Vec::new()).is_err());
        if let SourceCode::Huffman(h) = &code {
            let words: Vec<&[u8]> = (0..5).filter_map(|s| h.codeword(s)).collect();
            for (i, a) in words.iter().enumerate() {
                for (j, b) in words.iter().enumerate() {
                    if i != j {
                        assert!(!b.starts_with(a));
                    }
                }
            }
        }
    }

    #[test]
    fn truncated_stream_is_framing_error() {
        let code = SourceCode::huffman(&[0.5, 0.25, 0.25]).unwrap();
        let mut bits = Vec::new();
        code.encode_into(&[2], &mut bits).unwrap();
        bits.pop();
        assert!(matches!(code.decode(&bits), Err(Error::Framing(_))));
    }

    #[test]
    fn single_symbol_code_uses_one_bit() {
        let code = SourceCode::huffman(&[0.0, 1.0]).unwrap();
        let mut bits = Vec::new();
        code.encode_into(&[1, 1], &mut bits).unwrap();
        assert_eq!(bits, vec![0, 0]);
        assert!(code.decode(&[1]).is_err());
    }

    #[test]
    fn fixed_length_width() {
        assert_eq!(
            SourceCode::fixed_length(16).unwrap(),
            SourceCode::FixedLength { bits: 4, alphabet: 16 }
        );
        assert_eq!(
            SourceCode::fixed_length(1).unwrap(),
            SourceCode::FixedLength { bits: 1, alphabet: 1 }
        );
        let c = SourceCode::fixed_length(5).unwrap();
        let mut bits = Vec::new();
        c.encode_into(&[4, 0, 3], &mut bits).unwrap();
        assert_eq!(bits.len(), 9);
        assert_eq!(c.decode(&bits).unwrap(), vec![4, 0, 3]);
        assert!(c.decode(&[1, 1, 1]).is_err());
        assert!(c.decode(&[1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn huffman_within_entropy_bound(w in prop::collection::vec(0.001f64..1.0, 2..40)) {
            let total: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|v| v / total).collect();
            let code = SourceCode::huffman(&p).unwrap();
            let h = entropy(&p);
            let l = code.average_length(&p);
            prop_assert!(l >= h - 1e-12 && l < h + 1.0);
        }
    }
}
