//! Bitstream evaluation: bias test and an LZW-based entropy upper bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BIAS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub ones_fraction: f64,
    pub ones: usize,
    pub n_bits: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Fraction of ones; passes when within `tolerance` of one half.
pub fn bias(bits: &[bool], tolerance: f64) -> Result<BiasReport> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("bias of an empty bit stream"));
    }
    let ones = bits.iter().filter(|b| **b).count();
    let ones_fraction = ones as f64 / bits.len() as f64;
    Ok(BiasReport {
        ones_fraction,
        ones,
        n_bits: bits.len(),
        tolerance,
        pass: (ones_fraction - 0.5).abs() <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub input_bits: usize,
    pub output_bits: usize,
    pub ratio: f64,
    pub entropy_upper_bound_bits: usize,
    /// How `output_bits` was counted.
    pub accounting: String,
}

const ACCOUNTING: &str = "binary-alphabet LZW, code width ceil(log2(dictionary size)) at emission, \
unbounded dictionary, no header or dictionary overhead";

/// Emitted codes and the width each one was charged at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LzwEncoding {
    pub codes: Vec<u32>,
    pub widths: Vec<u32>,
}

impl LzwEncoding {
    pub fn total_bits(&self) -> usize {
        self.widths.iter().map(|w| *w as usize).sum()
    }
}

/// `ceil(log2(size))` for `size >= 1`.
pub fn code_width(size: usize) -> u32 {
    usize::BITS - size.saturating_sub(1).leading_zeros()
}

const NONE: u32 = u32::MAX;

/// LZW over the binary alphabet.
///
/// The dictionary starts as {"0", "1"}. Parsing takes the longest match;
/// each emitted code is charged `ceil(log2(dictionary size))` bits, then the
/// match extended by the next bit is added.
pub fn lzw_encode(bits: &[bool]) -> LzwEncoding {
    let mut enc = LzwEncoding {
        codes: Vec::new(),
        widths: Vec::new(),
    };
    let Some((&first, rest)) = bits.split_first() else {
        return enc;
    };
    // Trie: children[code] = [next code on 0, next code on 1].
    let mut children: Vec<[u32; 2]> = vec![[NONE; 2]; 2];
    let mut current = first as u32;
    for &bit in rest {
        let next = children[current as usize][bit as usize];
        if next != NONE {
            current = next;
            continue;
        }
        enc.codes.push(current);
        enc.widths.push(code_width(children.len()));
        children[current as usize][bit as usize] = children.len() as u32;
        children.push([NONE; 2]);
        current = bit as u32;
    }
    enc.codes.push(current);
    enc.widths.push(code_width(children.len()));
    enc
}

pub fn lzw_compress_size(bits: &[bool]) -> Result<CompressionReport> {
    if bits.is_empty() {
        return Err(Error::EmptyInput("compression of an empty bit stream"));
    }
    let output_bits = lzw_encode(bits).total_bits();
    Ok(CompressionReport {
        input_bits: bits.len(),
        output_bits,
        ratio: output_bits as f64 / bits.len() as f64,
        entropy_upper_bound_bits: output_bits,
        accounting: ACCOUNTING.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEvaluation {
    pub bias: BiasReport,
    pub compression: CompressionReport,
}

pub fn evaluate_stream(bits: &[bool], bias_tolerance: f64) -> Result<StreamEvaluation> {
    Ok(StreamEvaluation {
        bias: bias(bits, bias_tolerance)?,
        compression: lzw_compress_size(bits)?,
    })
}
