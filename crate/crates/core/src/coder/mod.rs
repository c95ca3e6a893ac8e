//! Lossy back-end: uniform scalar quantization, canonical Huffman entropy
//! coding, and the bit-exact `.uic` container.

mod bits;
mod container;
mod huffman;

pub use bits::{BitReader, BitWriter};
pub use container::{deserialize, layout, serialize, CompressedArtifact, KltSideInfo, Layout};
pub use huffman::{entropy_decode, entropy_encode, CodeTable};

use crate::error::{Error, Result};
use crate::wavelet::CoeffPlane;

/// Largest quantized magnitude the coder accepts; beyond it the step is too
/// small for the plane.
pub const MAX_SYMBOL_MAG: i64 = 1 << 30;

/// Uniform quantizer step for one plane. The step is stored as an `f32` in
/// the container, so it is held at `f32` precision from the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantSpec {
    pub step: f64,
}

impl QuantSpec {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::QuantStep(step));
        }
        Ok(Self { step })
    }

    /// Step sized so a `bits`-bit budget spans the plane's range:
    /// `max(|v|) * 2 / 2^bits`, floored at 1e-12 for all-zero planes. Peak
    /// values quantize exactly, which keeps constant inputs lossless.
    pub fn for_plane(plane: &CoeffPlane, bits: u8) -> Self {
        let max = plane.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let step = (max * 2.0 / (1u64 << bits) as f64).max(1e-12);
        Self {
            step: step as f32 as f64,
        }
    }
}

/// Round-half-away-from-zero quantization of a plane.
pub fn quantize(plane: &CoeffPlane, spec: &QuantSpec) -> Result<Vec<i32>> {
    let mut out = Vec::with_capacity(plane.len());
    for &v in &plane.values {
        let q = (v / spec.step).round();
        if !q.is_finite() || q.abs() as i64 > MAX_SYMBOL_MAG {
            return Err(Error::SymbolRange(q as i64));
        }
        out.push(q as i32);
    }
    Ok(out)
}

/// Midpoints of the quantizer cells: `q * step`.
pub fn dequantize(symbols: &[i32], spec: &QuantSpec) -> Vec<f64> {
    symbols.iter().map(|&q| q as f64 * spec.step).collect()
}
