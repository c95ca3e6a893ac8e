//! MSB-first bit stream reader/writer.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    cur: u8,
    filled: u8,
    bits: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.cur = (self.cur << 1) | bit as u8;
        self.filled += 1;
        self.bits += 1;
        if self.filled == 8 {
            self.bytes.push(self.cur);
            self.cur = 0;
            self.filled = 0;
        }
    }

    /// Write the low `len` bits of `code`, most significant first.
    pub fn write_bits(&mut self, code: u32, len: u8) {
        for i in (0..len).rev() {
            self.write_bit((code >> i) & 1 == 1);
        }
    }

    /// Total bits written so far.
    pub fn bit_count(&self) -> u64 {
        self.bits
    }

    /// Flush, padding the final byte with zero bits.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        if self.filled > 0 {
            self.cur <<= 8 - self.filled;
            self.bytes.push(self.cur);
        }
        (self.bytes, self.bits)
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    limit: u64,
}

impl<'a> BitReader<'a> {
    /// Read at most `limit` bits from `bytes`.
    pub fn new(bytes: &'a [u8], limit: u64) -> Self {
        Self {
            bytes,
            pos: 0,
            limit,
        }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.limit || (self.pos / 8) as usize >= self.bytes.len() {
            return Err(Error::BitUnderrun);
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = (byte >> (7 - (self.pos % 8))) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn bits_read(&self) -> u64 {
        self.pos
    }
}
