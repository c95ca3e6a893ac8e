//! Canonical Huffman coding over `i32` symbol alphabets.
//!
//! Code lengths come from a two-queue Huffman construction with
//! deterministic tie-breaking by symbol value; codes are then reassigned
//! canonically (sorted by length, then symbol), so equal inputs always
//! produce byte-identical streams. Lengths are capped at 32 bits.

use std::collections::HashMap;
use std::collections::VecDeque;

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

pub const MAX_CODE_LEN: u8 = 32;

/// Code-length table in canonical (length, symbol) order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodeTable {
    pub entries: Vec<(i32, u8)>,
}

impl CodeTable {
    /// Canonical code words, in table order.
    fn assign_codes(&self) -> Vec<u32> {
        let mut codes = Vec::with_capacity(self.entries.len());
        let mut code: u32 = 0;
        let mut prev_len: u8 = 0;
        for &(_, len) in &self.entries {
            code <<= len - prev_len;
            codes.push(code);
            code += 1;
            prev_len = len;
        }
        codes
    }

    /// Structural validation: lengths in range, strict canonical order, and
    /// no overfull Kraft sum.
    pub fn validate(&self) -> Result<()> {
        let mut kraft: u64 = 0;
        let mut prev: Option<(u8, i32)> = None;
        for &(sym, len) in &self.entries {
            if len == 0 || len > MAX_CODE_LEN {
                return Err(Error::CorruptTable(format!("code length {len}")));
            }
            if let Some((plen, psym)) = prev {
                if (plen, psym) >= (len, sym) {
                    return Err(Error::CorruptTable("entries out of canonical order".into()));
                }
            }
            prev = Some((len, sym));
            kraft = kraft
                .checked_add(1u64 << (MAX_CODE_LEN - len))
                .ok_or_else(|| Error::CorruptTable("overfull code".into()))?;
        }
        if kraft > 1u64 << MAX_CODE_LEN {
            return Err(Error::CorruptTable("overfull code".into()));
        }
        Ok(())
    }
}

/// Huffman code lengths per distinct symbol, deterministic for equal inputs.
fn code_lengths(freqs: &[(i32, u64)]) -> Vec<(i32, u8)> {
    let n = freqs.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        // degenerate one-symbol alphabet: spend one bit per symbol
        return vec![(freqs[0].0, 1)];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (freqs[i].1, freqs[i].0));

    // two-queue merge: leaves ascending in q1, internals appended to q2
    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut q1: VecDeque<(u64, usize)> = order.iter().map(|&i| (freqs[i].1, i)).collect();
    let mut q2: VecDeque<(u64, usize)> = VecDeque::new();
    let mut next_id = n;
    let pop_min = |q1: &mut VecDeque<(u64, usize)>, q2: &mut VecDeque<(u64, usize)>| match (
        q1.front(),
        q2.front(),
    ) {
        (Some(&(w1, _)), Some(&(w2, _))) => {
            if w1 <= w2 {
                q1.pop_front().unwrap()
            } else {
                q2.pop_front().unwrap()
            }
        }
        (Some(_), None) => q1.pop_front().unwrap(),
        (None, Some(_)) => q2.pop_front().unwrap(),
        (None, None) => unreachable!(),
    };
    while q1.len() + q2.len() > 1 {
        let (wa, a) = pop_min(&mut q1, &mut q2);
        let (wb, b) = pop_min(&mut q1, &mut q2);
        parent[a] = next_id;
        parent[b] = next_id;
        q2.push_back((wa + wb, next_id));
        next_id += 1;
    }

    let mut lengths: Vec<(i32, u8)> = freqs
        .iter()
        .enumerate()
        .map(|(i, &(sym, _))| {
            let mut depth = 0u32;
            let mut node = i;
            while parent[node] != usize::MAX {
                node = parent[node];
                depth += 1;
            }
            (sym, depth.min(255) as u8)
        })
        .collect();

    // cap lengths at MAX_CODE_LEN and restore a valid Kraft sum. With 32-bit
    // streams this branch needs Fibonacci-scale counts to trigger.
    if lengths.iter().any(|&(_, l)| l > MAX_CODE_LEN) {
        for e in lengths.iter_mut() {
            e.1 = e.1.min(MAX_CODE_LEN);
        }
        let kraft = |ls: &[(i32, u8)]| -> u128 {
            ls.iter().map(|&(_, l)| 1u128 << (MAX_CODE_LEN - l)).sum()
        };
        while kraft(&lengths) > 1u128 << MAX_CODE_LEN {
            // demote the deepest still-extendable symbol
            let idx = lengths
                .iter()
                .enumerate()
                .filter(|(_, &(_, l))| l < MAX_CODE_LEN)
                .max_by_key(|(_, &(sym, l))| (l, sym))
                .map(|(i, _)| i)
                .expect("kraft overfull with all lengths at the cap");
            lengths[idx].1 += 1;
        }
    }
    lengths
}

/// Build a canonical code from symbol frequencies and encode the sequence.
/// Returns the padded payload bytes, the exact bit count, and the table.
pub fn entropy_encode(symbols: &[i32]) -> Result<(Vec<u8>, u64, CodeTable)> {
    if symbols.is_empty() {
        return Ok((Vec::new(), 0, CodeTable::default()));
    }
    let mut freq: HashMap<i32, u64> = HashMap::new();
    for &s in symbols {
        *freq.entry(s).or_insert(0) += 1;
    }
    let mut freqs: Vec<(i32, u64)> = freq.into_iter().collect();
    freqs.sort_by_key(|&(sym, _)| sym);

    let mut entries = code_lengths(&freqs);
    entries.sort_by_key(|&(sym, len)| (len, sym));
    let table = CodeTable { entries };
    table.validate()?;

    let codes = table.assign_codes();
    let lookup: HashMap<i32, (u32, u8)> = table
        .entries
        .iter()
        .zip(&codes)
        .map(|(&(sym, len), &code)| (sym, (code, len)))
        .collect();

    let mut writer = BitWriter::new();
    for s in symbols {
        let &(code, len) = lookup.get(s).expect("symbol missing from table");
        writer.write_bits(code, len);
    }
    let (payload, bits) = writer.finish();
    Ok((payload, bits, table))
}

/// Decode exactly `count` symbols from a canonical-coded payload.
pub fn entropy_decode(
    payload: &[u8],
    bit_count: u64,
    table: &CodeTable,
    count: usize,
) -> Result<Vec<i32>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    table.validate()?;
    if table.entries.is_empty() {
        return Err(Error::CorruptTable("empty table with nonzero count".into()));
    }
    let max_len = table.entries.last().map(|&(_, l)| l).unwrap_or(0);
    let mut count_at = vec![0u32; max_len as usize + 1];
    for &(_, len) in &table.entries {
        count_at[len as usize] += 1;
    }

    let mut reader = BitReader::new(payload, bit_count);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut acc: u32 = 0;
        let mut base: u32 = 0;
        let mut matched = false;
        for len in 1..=max_len {
            acc = (acc << 1) | reader.read_bit()? as u32;
            let c = count_at[len as usize];
            if acc < c {
                out.push(table.entries[(base + acc) as usize].0);
                matched = true;
                break;
            }
            base += c;
            acc -= c;
        }
        if !matched {
            return Err(Error::CorruptTable("bit pattern matches no code".into()));
        }
    }
    Ok(out)
}
