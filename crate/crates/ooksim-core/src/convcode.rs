//! Rate-1/2 binary convolutional encoding and soft-input Viterbi decoding.
//!
//! The encoder starts in the zero state and appends `memory` zero tail bits,
//! so a length-`L` input produces `2 * (L + memory)` coded bits. The decoder
//! is a full-frame Viterbi maximizing the correlation metric
//! `sum_j (2 c_j - 1) * llr_j` over all zero-terminated codewords; exact
//! metric ties resolve to the lexicographically smallest information
//! sequence.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::types::{BitVec, LlrVec};

/// Rate-1/2 feedforward convolutional code described by two generator tap
/// masks. The most significant bit of each mask taps the current input bit;
/// write masks in octal to match the usual notation (`ConvCode::new(0o15, 0o13)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvCode {
    g1: u32,
    g2: u32,
    memory: usize,
}

impl Default for ConvCode {
    fn default() -> Self {
        Self::new(0o15, 0o13).expect("default generators are valid")
    }
}

impl ConvCode {
    pub fn new(g1: u32, g2: u32) -> Result<Self> {
        let width = 32 - u32::leading_zeros(g1 | g2) as usize;
        if g1 == 0 || g2 == 0 {
            return Err(Error::BadGenerators {
                g1,
                g2,
                reason: "generators must be nonzero",
            });
        }
        if width < 2 {
            return Err(Error::BadGenerators {
                g1,
                g2,
                reason: "code must have at least one memory element",
            });
        }
        if width > 16 {
            return Err(Error::BadGenerators {
                g1,
                g2,
                reason: "constraint lengths above 16 are not supported",
            });
        }
        if g1 & 1 == 0 || g2 & 1 == 0 {
            return Err(Error::BadGenerators {
                g1,
                g2,
                reason: "lowest-order tap of each generator must be set",
            });
        }
        Ok(Self {
            g1,
            g2,
            memory: width - 1,
        })
    }

    /// Parses a `"15,13"`-style pair of octal generators.
    pub fn from_octal_pair(s: &str) -> Result<Self> {
        let bad = || Error::BadGeneratorString(s.to_string());
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let g1 = u32::from_str_radix(a.trim(), 8).map_err(|_| bad())?;
        let g2 = u32::from_str_radix(b.trim(), 8).map_err(|_| bad())?;
        Self::new(g1, g2)
    }

    /// The generators formatted back as an octal pair, e.g. `"15,13"`.
    pub fn generators_octal(&self) -> String {
        format!("{:o},{:o}", self.g1, self.g2)
    }

    /// Number of memory elements (constraint length minus one).
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Coded length for `info_len` information bits: `2 * (info_len + memory)`.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.memory)
    }

    /// Coded output pair for a full register value (current input in the top
    /// bit, oldest bit in bit 0).
    #[inline]
    fn output_pair(&self, reg: u32) -> (u8, u8) {
        (
            ((reg & self.g1).count_ones() & 1) as u8,
            ((reg & self.g2).count_ones() & 1) as u8,
        )
    }

    /// Encodes `info`, appending `memory` zero tail bits so the trellis ends
    /// in the zero state. Output pairs interleave the two generator streams.
    pub fn encode(&self, info: &BitVec) -> BitVec {
        let m = self.memory;
        let mut out = Vec::with_capacity(self.coded_len(info.len()));
        let mut state: u32 = 0;
        for &bit in info.iter().chain(std::iter::repeat(&0u8).take(m)) {
            let reg = (u32::from(bit) << m) | state;
            let (c1, c2) = self.output_pair(reg);
            out.push(c1);
            out.push(c2);
            state = reg >> 1;
        }
        BitVec::from_bits_unchecked(out)
    }

    /// Maximum-likelihood sequence decoding of a zero-terminated frame.
    ///
    /// Maximizes `sum_j (2 c_j - 1) * llr_j`; ties pick the lexicographically
    /// smallest information sequence, which both fixed decisions and the
    /// all-zero input on an all-zero LLR frame rely on.
    pub fn viterbi_decode(&self, llrs: &LlrVec) -> Result<TrellisPath> {
        let m = self.memory;
        if llrs.len() % 2 != 0 || llrs.len() < 2 * m {
            return Err(Error::BadCodewordLength {
                len: llrs.len(),
                min: 2 * m,
            });
        }
        let steps = llrs.len() / 2;
        let info_len = steps - m;
        let n_states = 1usize << m;
        let low_mask = (n_states >> 1).wrapping_sub(1) as u32;
        let words = steps.div_ceil(64).max(1);

        // Per-register coded output pairs, mapped to +/-1 once.
        let signs: Vec<(f64, f64)> = (0..(n_states << 1) as u32)
            .map(|reg| {
                let (c1, c2) = self.output_pair(reg);
                (f64::from(c1) * 2.0 - 1.0, f64::from(c2) * 2.0 - 1.0)
            })
            .collect();

        let mut metric = vec![f64::NEG_INFINITY; n_states];
        metric[0] = 0.0;
        let mut metric_next = vec![f64::NEG_INFINITY; n_states];
        // Survivor info sequences, bit-packed MSB-first so that lexicographic
        // order on bits equals word-wise integer order.
        let mut paths = vec![0u64; n_states * words];
        let mut paths_next = vec![0u64; n_states * words];

        let llr = llrs.as_slice();
        for k in 0..steps {
            let (l1, l2) = (llr[2 * k], llr[2 * k + 1]);
            for (s_next, out) in metric_next.iter_mut().enumerate() {
                let input = (s_next >> (m - 1)) as u32 & 1;
                if k >= info_len && input == 1 {
                    *out = f64::NEG_INFINITY;
                    continue;
                }
                let p0 = ((s_next as u32 & low_mask) << 1) as usize;
                let p1 = p0 | 1;
                let reg0 = (input << m) | p0 as u32;
                let reg1 = (input << m) | p1 as u32;
                let (s1a, s2a) = signs[reg0 as usize];
                let (s1b, s2b) = signs[reg1 as usize];
                let v0 = metric[p0] + (s1a * l1 + s2a * l2);
                let v1 = metric[p1] + (s1b * l1 + s2b * l2);
                let chosen = if v0 > v1 {
                    p0
                } else if v1 > v0 {
                    p1
                } else if lex_le(
                    &paths[p0 * words..(p0 + 1) * words],
                    &paths[p1 * words..(p1 + 1) * words],
                ) {
                    p0
                } else {
                    p1
                };
                *out = if chosen == p0 { v0 } else { v1 };
                let dst = &mut paths_next[s_next * words..(s_next + 1) * words];
                dst.copy_from_slice(&paths[chosen * words..(chosen + 1) * words]);
                if input == 1 {
                    dst[k / 64] |= 1u64 << (63 - (k % 64));
                }
            }
            std::mem::swap(&mut metric, &mut metric_next);
            std::mem::swap(&mut paths, &mut paths_next);
        }

        let winner = &paths[..words];
        let bits: Vec<u8> = (0..info_len)
            .map(|k| ((winner[k / 64] >> (63 - (k % 64))) & 1) as u8)
            .collect();
        Ok(TrellisPath {
            decoded_bits: BitVec::from_bits_unchecked(bits),
            metric: metric[0],
        })
    }

    /// Viterbi decoding of sign-quantized LLRs: values map to +/-1 with 0
    /// treated as +1.
    pub fn hard_decode(&self, llrs: &LlrVec) -> Result<TrellisPath> {
        let quantized: Vec<f64> = llrs
            .iter()
            .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        self.viterbi_decode(&LlrVec::from_values_unchecked(quantized))
    }
}

/// True when `a <= b` comparing MSB-first bit-packed sequences.
#[inline]
fn lex_le(a: &[u64], b: &[u64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x != y {
            return x < y;
        }
    }
    true
}

impl Serialize for ConvCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.generators_octal())
    }
}

impl<'de> Deserialize<'de> for ConvCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        ConvCode::from_octal_pair(&s).map_err(D::Error::custom)
    }
}

/// Decoded information bits together with the winning path metric.
#[derive(Clone, Debug, PartialEq)]
pub struct TrellisPath {
    pub decoded_bits: BitVec,
    pub metric: f64,
}

/// Correlation metric of one codeword against a (same-length) LLR vector.
pub fn correlation_metric(codeword: &BitVec, llrs: &LlrVec) -> f64 {
    let mut acc = 0.0;
    for k in 0..codeword.len() / 2 {
        let s1 = f64::from(codeword[2 * k]) * 2.0 - 1.0;
        let s2 = f64::from(codeword[2 * k + 1]) * 2.0 - 1.0;
        acc += s1 * llrs[2 * k] + s2 * llrs[2 * k + 1];
    }
    acc
}

/// Exhaustive maximum-likelihood decoder over all `2^L` zero-terminated
/// codewords. O(2^L); reference implementation for tests and self-checks.
pub fn exhaustive_ml_decode(llrs: &LlrVec, code: &ConvCode) -> Result<TrellisPath> {
    let m = code.memory();
    if llrs.len() % 2 != 0 || llrs.len() < 2 * m {
        return Err(Error::BadCodewordLength {
            len: llrs.len(),
            min: 2 * m,
        });
    }
    let info_len = llrs.len() / 2 - m;
    assert!(
        info_len <= 24,
        "exhaustive decode limited to short frames (got L = {info_len})"
    );
    let mut best_bits = BitVec::zeros(info_len);
    let mut best_metric = f64::NEG_INFINITY;
    for v in 0..(1u64 << info_len) {
        // MSB-first mapping so ascending v scans info words in lex order and
        // the strict `>` keeps the lexicographically smallest maximizer.
        let bits: Vec<u8> = (0..info_len)
            .map(|j| ((v >> (info_len - 1 - j)) & 1) as u8)
            .collect();
        let info = BitVec::from_bits_unchecked(bits);
        let metric = correlation_metric(&code.encode(&info), llrs);
        if metric > best_metric {
            best_metric = metric;
            best_bits = info;
        }
    }
    Ok(TrellisPath {
        decoded_bits: best_bits,
        metric: best_metric,
    })
}
