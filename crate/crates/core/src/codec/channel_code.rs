use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Block channel code applied to the source bit stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelCode {
    None,
    Repetition(usize),
    Hamming74,
}

// Hamming(7,4) bit layout p1 p2 d1 p4 d2 d3 d4: the syndrome is the 1-based
// position of a single flipped bit.
fn hamming_encode(d: [u8; 4]) -> [u8; 7] {
    let [d1, d2, d3, d4] = d;
    let p1 = d1 ^ d2 ^ d4;
    let p2 = d1 ^ d3 ^ d4;
    let p4 = d2 ^ d3 ^ d4;
    [p1, p2, d1, p4, d2, d3, d4]
}

fn hamming_decode(c: &[u8]) -> [u8; 4] {
    let mut w = [0u8; 7];
    for (o, &b) in w.iter_mut().zip(c) {
        *o = b & 1;
    }
    let s1 = w[0] ^ w[2] ^ w[4] ^ w[6];
    let s2 = w[1] ^ w[2] ^ w[5] ^ w[6];
    let s4 = w[3] ^ w[4] ^ w[5] ^ w[6];
    let pos = usize::from(s1) | usize::from(s2) << 1 | usize::from(s4) << 2;
    if pos != 0 {
        w[pos - 1] ^= 1;
    }
    [w[2], w[4], w[5], w[6]]
}

impl ChannelCode {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelCode::Repetition(0) => Err(Error::config("repetition factor must be ≥ 1")),
            _ => Ok(()),
        }
    }

    /// Coded length for `n` source bits, including zero padding.
    pub fn coded_len(&self, n: usize) -> usize {
        match self {
            ChannelCode::None => n,
            ChannelCode::Repetition(r) => n * r,
            ChannelCode::Hamming74 => n.div_ceil(4) * 7,
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            ChannelCode::None => 1.0,
            ChannelCode::Repetition(r) => 1.0 / *r as f64,
            ChannelCode::Hamming74 => 4.0 / 7.0,
        }
    }

    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        match self {
            ChannelCode::None => bits.to_vec(),
            ChannelCode::Repetition(r) => bits
                .iter()
                .flat_map(|&b| std::iter::repeat_n(b, *r))
                .collect(),
            ChannelCode::Hamming74 => bits
                .chunks(4)
                .flat_map(|c| {
                    let mut d = [0u8; 4];
                    d[..c.len()].copy_from_slice(c);
                    hamming_encode(d)
                })
                .collect(),
        }
    }

    /// Nearest-codeword decoding per block, returning `source_len` bits.
    ///
    /// Repetition ties (even factor) resolve to 0.
    pub fn decode(&self, coded: &[u8], source_len: usize) -> Result<Vec<u8>> {
        if coded.len() != self.coded_len(source_len) {
            return Err(Error::Framing(format!(
                "received {} coded bits, frame of {source_len} source bits needs {}",
                coded.len(),
                self.coded_len(source_len)
            )));
        }
        let mut out = match self {
            ChannelCode::None => coded.to_vec(),
            ChannelCode::Repetition(r) => coded
                .chunks(*r)
                .map(|c| {
                    let ones = c.iter().filter(|&&b| b & 1 == 1).count();
                    u8::from(2 * ones > *r)
                })
                .collect(),
            ChannelCode::Hamming74 => coded.chunks(7).flat_map(hamming_decode).collect(),
        };
        out.truncate(source_len);
        Ok(out)
    }
}

impl fmt::Display for ChannelCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelCode::None => write!(f, "none"),
            ChannelCode::Repetition(r) => write!(f, "rep{r}"),
            ChannelCode::Hamming74 => write!(f, "hamming74"),
        }
    }
}

impl FromStr for ChannelCode {
    type Err = Error;

    /// `none`, `hamming74`, or `rep<r>` (e.g. `rep3`).
    fn from_str(s: &str) -> Result<Self> {
        let code = match s {
            "none" => ChannelCode::None,
            "hamming74" => ChannelCode::Hamming74,
            _ => match s.strip_prefix("rep").map(str::parse::<usize>) {
                Some(Ok(r)) => ChannelCode::Repetition(r),
                _ => {
                    return Err(Error::config(format!(
                        "unknown channel code `{s}` (expected none, hamming74 or rep<r>)"
                    )))
                }
            },
        };
        code.validate()?;
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits_of(v: u8, n: usize) -> Vec<u8> {
        (0..n).rev().map(|i| (v >> i) & 1).collect()
    }

    fn distance(a: &[u8], b: &[u8]) -> usize {
        a.iter().zip(b).filter(|(x, y)| x != y).count()
    }

    // exhaustive table of all 16 codewords
    fn codebook() -> Vec<(Vec<u8>, Vec<u8>)> {
        (0..16u8)
            .map(|d| {
                let data = bits_of(d, 4);
                (data.clone(), ChannelCode::Hamming74.encode(&data))
            })
            .collect()
    }

    #[test]
    fn hamming_minimum_distance_is_three() {
        let book = codebook();
        let dmin = book
            .iter()
            .enumerate()
            .flat_map(|(i, a)| book[i + 1..].iter().map(move |b| distance(&a.1, &b.1)))
            .min()
            .unwrap();
        assert_eq!(dmin, 3);
    }

    #[test]
    fn hamming_decoder_is_nearest_codeword() {
        let book = codebook();
        for word in 0..128u8 {
            let y = bits_of(word, 7);
            let nearest = book
                .iter()
                .min_by_key(|(_, c)| distance(c, &y))
                .unwrap();
            assert_eq!(ChannelCode::Hamming74.decode(&y, 4).unwrap(), nearest.0);
        }
    }

    #[test]
    fn hamming_corrects_single_errors() {
        for (data, cw) in codebook() {
            for flip in 0..7 {
                let mut y = cw.clone();
                y[flip] ^= 1;
                assert_eq!(ChannelCode::Hamming74.decode(&y, 4).unwrap(), data);
            }
        }
    }

    #[test]
    fn hamming_miscorrects_double_errors() {
        for (data, cw) in codebook() {
            for i in 0..7 {
                for j in i + 1..7 {
                    let mut y = cw.clone();
                    y[i] ^= 1;
                    y[j] ^= 1;
                    let out = ChannelCode::Hamming74.decode(&y, 4).unwrap();
                    assert_ne!(out, data, "double error {i},{j} went unnoticed");
                    assert!(distance(&out, &data) >= 1);
                }
            }
        }
    }

    #[test]
    fn padding_roundtrip() {
        let bits = vec![1, 0, 1, 1, 0, 1];
        let c = ChannelCode::Hamming74.encode(&bits);
        assert_eq!(c.len(), 14);
        assert_eq!(ChannelCode::Hamming74.decode(&c, 6).unwrap(), bits);
        assert!(ChannelCode::Hamming74.decode(&c[..13], 6).is_err());
    }

    #[test]
    fn repetition_majority() {
        let rep = ChannelCode::Repetition(3);
        assert_eq!(rep.encode(&[1, 0]), vec![1, 1, 1, 0, 0, 0]);
        assert_eq!(rep.decode(&[1, 0, 1, 0, 1, 0], 2).unwrap(), vec![1, 0]);
        assert_eq!(ChannelCode::Repetition(2).decode(&[1, 0], 1).unwrap(), vec![0]);
    }

    #[test]
    fn parse_codes() {
        assert_eq!("none".parse::<ChannelCode>().unwrap(), ChannelCode::None);
        assert_eq!("rep5".parse::<ChannelCode>().unwrap(), ChannelCode::Repetition(5));
        assert_eq!("hamming74".parse::<ChannelCode>().unwrap(), ChannelCode::Hamming74);
        assert!("rep0".parse::<ChannelCode>().is_err());
        assert!("turbo".parse::<ChannelCode>().is_err());
        assert_eq!(ChannelCode::Repetition(3).to_string(), "rep3");
    }
}
