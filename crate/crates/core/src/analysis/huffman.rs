//! Order-0 canonical Huffman coder over bytes, used as a compressibility
//! estimate.
//!
//! Tree construction merges the two lightest nodes repeatedly; among equal
//! weights the node whose smallest symbol is lower goes first. Codes are then
//! assigned canonically by (length, symbol). The serialized table is the 256
//! code lengths, one byte each.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const TABLE_BYTES: usize = 256;

pub fn byte_counts(bytes: &[u8]) -> [u64; 256] {
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    counts
}

/// Code length per symbol; 0 for absent symbols. A lone symbol gets length 1.
pub fn code_lengths(counts: &[u64; 256]) -> [u8; 256] {
    let mut lengths = [0u8; 256];
    let present: Vec<usize> = (0..256).filter(|&s| counts[s] > 0).collect();
    match present.len() {
        0 => return lengths,
        1 => {
            lengths[present[0]] = 1;
            return lengths;
        }
        _ => {}
    }

    // Leaves are nodes 0..256; internal nodes are appended.
    let mut parent: Vec<usize> = vec![usize::MAX; 256];
    let mut heap = BinaryHeap::new();
    for &s in &present {
        heap.push(Reverse((counts[s], s, s)));
    }
    while heap.len() > 1 {
        let Reverse((w1, min1, a)) = heap.pop().unwrap();
        let Reverse((w2, min2, b)) = heap.pop().unwrap();
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        heap.push(Reverse((w1 + w2, min1.min(min2), id)));
    }
    for &s in &present {
        let mut depth = 0u8;
        let mut node = s;
        while parent[node] != usize::MAX {
            node = parent[node];
            depth += 1;
        }
        lengths[s] = depth;
    }
    lengths
}

/// Canonical codes (right-aligned) for the given lengths.
pub fn canonical_codes(lengths: &[u8; 256]) -> [u64; 256] {
    let mut order: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = [0u64; 256];
    let mut code = 0u64;
    let mut prev_len = 0u8;
    for (i, &s) in order.iter().enumerate() {
        let len = lengths[s];
        if i > 0 {
            code = (code + 1) << (len - prev_len);
        }
        codes[s] = code;
        prev_len = len;
    }
    codes
}

/// Σ 2^-len over used symbols.
pub fn kraft_sum(lengths: &[u8; 256]) -> f64 {
    lengths.iter().filter(|&&l| l > 0).map(|&l| 0.5f64.powi(l as i32)).sum()
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub lengths: [u8; 256],
    pub bits: Vec<u8>,
    pub bit_len: u64,
}

pub fn encode(bytes: &[u8]) -> Encoded {
    let lengths = code_lengths(&byte_counts(bytes));
    let codes = canonical_codes(&lengths);
    let mut bits = Vec::new();
    let mut acc: u128 = 0;
    let mut nacc = 0u32;
    let mut bit_len = 0u64;
    for &b in bytes {
        let len = lengths[b as usize] as u32;
        acc = (acc << len) | codes[b as usize] as u128;
        nacc += len;
        bit_len += len as u64;
        while nacc >= 8 {
            nacc -= 8;
            bits.push((acc >> nacc) as u8);
        }
        acc &= (1u128 << nacc) - 1;
    }
    if nacc > 0 {
        bits.push((acc << (8 - nacc)) as u8);
    }
    Encoded { lengths, bits, bit_len }
}

pub fn decode(encoded: &Encoded, count: usize) -> Result<Vec<u8>> {
    let lengths = &encoded.lengths;
    let max_len = lengths.iter().copied().max().unwrap_or(0) as usize;
    let mut symbols: Vec<usize> = (0..256).filter(|&s| lengths[s] > 0).collect();
    symbols.sort_by_key(|&s| (lengths[s], s));
    let mut per_len = vec![0u64; max_len + 1];
    for &s in &symbols {
        per_len[lengths[s] as usize] += 1;
    }

    let mut out = Vec::with_capacity(count);
    let mut pos = 0u64;
    let bit = |i: u64| (encoded.bits[(i / 8) as usize] >> (7 - i % 8)) & 1;
    while out.len() < count {
        let mut code = 0u64;
        let mut first = 0u64;
        let mut index = 0u64;
        let mut found = false;
        for &n in &per_len[1..=max_len] {
            if pos >= encoded.bit_len {
                return Err(Error::Analysis("huffman stream ends mid-code".into()));
            }
            code = (code << 1) | bit(pos) as u64;
            pos += 1;
            if code < first + n {
                out.push(symbols[(index + code - first) as usize] as u8);
                found = true;
                break;
            }
            index += n;
            first = (first + n) << 1;
        }
        if !found {
            return Err(Error::Analysis("invalid huffman code".into()));
        }
    }
    Ok(out)
}

/// Compression figures for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanReport {
    pub original_bytes: u64,
    pub coded_bytes: u64,
    pub table_bytes: u64,
    pub ratio: f64,
    pub kraft: f64,
}

pub fn huffman_report(bytes: &[u8]) -> Result<HuffmanReport> {
    if bytes.is_empty() {
        return Err(Error::Analysis("huffman ratio of empty input".into()));
    }
    let lengths = code_lengths(&byte_counts(bytes));
    let counts = byte_counts(bytes);
    let bits: u64 = (0..256).map(|s| counts[s] * lengths[s] as u64).sum();
    let coded_bytes = bits.div_ceil(8);
    let original = bytes.len() as u64;
    Ok(HuffmanReport {
        original_bytes: original,
        coded_bytes,
        table_bytes: TABLE_BYTES as u64,
        ratio: original as f64 / (coded_bytes + TABLE_BYTES as u64) as f64,
        kraft: kraft_sum(&lengths),
    })
}

/// `original / (coded + table)`; above 1 means the input compresses.
pub fn huffman_ratio(bytes: &[u8]) -> Result<f64> {
    Ok(huffman_report(bytes)?.ratio)
}
