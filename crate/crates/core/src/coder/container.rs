//! The `.uic` container: a single-forward-pass, little-endian layout with a
//! trailing CRC-32, so any corrupted byte is rejected rather than decoded
//! into a wrong image.
//!
//! ```text
//! magic "UIC1" | version u16 | technique u8 | shrink u8 | scan u8 | bits u8
//! width u32 | height u32 | block u32 | depth u32
//! quant count u32, steps f32...
//! klt flag u8 [n u32, kept u32, mean f32 x n, basis f32 x kept*n]
//! table count u32, (symbol i32, length u8)...
//! payload bits u64, payload len u32, payload bytes
//! crc32 u32 over everything above
//! ```

use super::huffman::CodeTable;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"UIC1";
pub const VERSION: u16 = 1;

// desk-scale sanity bounds: a crafted container must not be able to demand
// absurd allocations before the geometry cross-checks run
const MAX_DIM: u32 = 1 << 14;
const MAX_CHANNELS: u32 = 1 << 12;
const MAX_COUNT: u32 = 1 << 20;

/// KLT side information: mean vector plus the retained eigenvector columns,
/// all at f32 precision (column j occupies entries `j*n .. (j+1)*n`).
#[derive(Debug, Clone, PartialEq)]
pub struct KltSideInfo {
    pub n: u32,
    pub kept: u32,
    pub mean: Vec<f32>,
    pub basis: Vec<f32>,
}

/// Self-describing compressed image.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedArtifact {
    pub technique_id: u8,
    pub shrink: crate::wavelet::ShrinkMode,
    pub scan: crate::scan::ScanKind,
    pub bits: u8,
    pub width: u32,
    pub height: u32,
    pub block: u32,
    /// Packet depth for wavelet pipelines, pyramid levels for the plain
    /// transform, zero otherwise.
    pub depth: u32,
    pub quant_steps: Vec<f32>,
    pub klt: Option<KltSideInfo>,
    pub table: CodeTable,
    pub payload_bits: u64,
    pub payload: Vec<u8>,
}

/// Byte sizes of each serialized section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub fixed_header: usize,
    pub quant_specs: usize,
    pub klt_side_info: usize,
    pub code_table: usize,
    pub payload: usize,
    pub checksum: usize,
}

impl Layout {
    pub fn total(&self) -> usize {
        self.fixed_header
            + self.quant_specs
            + self.klt_side_info
            + self.code_table
            + self.payload
            + self.checksum
    }

    /// Structural metadata ahead of the side-info/table/payload blobs.
    pub fn header_len(&self) -> usize {
        self.fixed_header + self.quant_specs
    }
}

fn shrink_code(mode: crate::wavelet::ShrinkMode) -> u8 {
    match mode {
        crate::wavelet::ShrinkMode::None => 0,
        crate::wavelet::ShrinkMode::Hard => 1,
        crate::wavelet::ShrinkMode::Soft => 2,
    }
}

fn shrink_from(code: u8) -> Result<crate::wavelet::ShrinkMode> {
    match code {
        0 => Ok(crate::wavelet::ShrinkMode::None),
        1 => Ok(crate::wavelet::ShrinkMode::Hard),
        2 => Ok(crate::wavelet::ShrinkMode::Soft),
        other => Err(Error::Container(format!("shrink mode code {other}"))),
    }
}

fn scan_code(kind: crate::scan::ScanKind) -> u8 {
    match kind {
        crate::scan::ScanKind::RowRaster => 0,
        crate::scan::ScanKind::Morton => 1,
    }
}

fn scan_from(code: u8) -> Result<crate::scan::ScanKind> {
    match code {
        0 => Ok(crate::scan::ScanKind::RowRaster),
        1 => Ok(crate::scan::ScanKind::Morton),
        other => Err(Error::Container(format!("scan kind code {other}"))),
    }
}

const CRC_TABLE: [u32; 256] = {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 == 1 {
                (crc >> 1) ^ 0xEDB8_8320
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
};

fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = (crc >> 8) ^ CRC_TABLE[((crc ^ b as u32) & 0xFF) as usize];
    }
    !crc
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Truncated);
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

/// Serialize to the canonical byte layout.
pub fn serialize(a: &CompressedArtifact) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + a.payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(a.technique_id);
    out.push(shrink_code(a.shrink));
    out.push(scan_code(a.scan));
    out.push(a.bits);
    out.extend_from_slice(&a.width.to_le_bytes());
    out.extend_from_slice(&a.height.to_le_bytes());
    out.extend_from_slice(&a.block.to_le_bytes());
    out.extend_from_slice(&a.depth.to_le_bytes());

    out.extend_from_slice(&(a.quant_steps.len() as u32).to_le_bytes());
    for s in &a.quant_steps {
        out.extend_from_slice(&s.to_le_bytes());
    }

    match &a.klt {
        None => out.push(0),
        Some(info) => {
            out.push(1);
            out.extend_from_slice(&info.n.to_le_bytes());
            out.extend_from_slice(&info.kept.to_le_bytes());
            for v in &info.mean {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for v in &info.basis {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }

    out.extend_from_slice(&(a.table.entries.len() as u32).to_le_bytes());
    for &(sym, len) in &a.table.entries {
        out.extend_from_slice(&sym.to_le_bytes());
        out.push(len);
    }

    out.extend_from_slice(&a.payload_bits.to_le_bytes());
    out.extend_from_slice(&(a.payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&a.payload);

    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Section sizes of the serialized form.
pub fn layout(a: &CompressedArtifact) -> Layout {
    Layout {
        fixed_header: 4 + 2 + 4 + 16,
        quant_specs: 4 + 4 * a.quant_steps.len(),
        klt_side_info: match &a.klt {
            None => 1,
            Some(info) => 1 + 8 + 4 * (info.mean.len() + info.basis.len()),
        },
        code_table: 4 + 5 * a.table.entries.len(),
        payload: 8 + 4 + a.payload.len(),
        checksum: 4,
    }
}

/// Parse and validate a container. Every field is checked before use; any
/// flipped byte fails the checksum.
pub fn deserialize(bytes: &[u8]) -> Result<CompressedArtifact> {
    if bytes.len() < 4 {
        return Err(Error::Truncated);
    }
    if bytes[0..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 8 {
        return Err(Error::Truncated);
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    if crc32(body) != stored {
        return Err(Error::ChecksumMismatch);
    }

    let mut r = Reader {
        bytes: body,
        pos: 4,
    };
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let technique_id = r.u8()?;
    if !(1..=7).contains(&technique_id) {
        return Err(Error::Container(format!("technique id {technique_id}")));
    }
    let shrink = shrink_from(r.u8()?)?;
    let scan = scan_from(r.u8()?)?;
    let bits = r.u8()?;
    if bits == 0 || bits > 24 {
        return Err(Error::Container(format!("bit budget {bits}")));
    }
    let width = r.u32()?;
    let height = r.u32()?;
    let block = r.u32()?;
    let depth = r.u32()?;
    if width == 0 || height == 0 || width > MAX_DIM || height > MAX_DIM {
        return Err(Error::Container(format!("dimensions {width}x{height}")));
    }
    if depth > 16 {
        return Err(Error::Container(format!("depth {depth}")));
    }

    let quant_count = r.u32()?;
    if quant_count > MAX_COUNT {
        return Err(Error::Container(format!("quant spec count {quant_count}")));
    }
    let mut quant_steps = Vec::with_capacity(quant_count as usize);
    for _ in 0..quant_count {
        let s = r.f32()?;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Container(format!("quant step {s}")));
        }
        quant_steps.push(s);
    }

    let klt = match r.u8()? {
        0 => None,
        1 => {
            let n = r.u32()?;
            let kept = r.u32()?;
            if n == 0 || n > MAX_CHANNELS || kept == 0 || kept > n {
                return Err(Error::Container(format!("klt channels n={n} kept={kept}")));
            }
            let mut mean = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let v = r.f32()?;
                if !v.is_finite() {
                    return Err(Error::Container("non-finite mean entry".into()));
                }
                mean.push(v);
            }
            let basis_len = kept as usize * n as usize;
            let mut basis = Vec::with_capacity(basis_len);
            for _ in 0..basis_len {
                let v = r.f32()?;
                if !v.is_finite() {
                    return Err(Error::Container("non-finite basis entry".into()));
                }
                basis.push(v);
            }
            Some(KltSideInfo {
                n,
                kept,
                mean,
                basis,
            })
        }
        other => return Err(Error::Container(format!("klt flag {other}"))),
    };

    let uses_klt = technique_id >= 4;
    if uses_klt != klt.is_some() {
        return Err(Error::Container(
            "klt side info inconsistent with technique".into(),
        ));
    }

    let table_count = r.u32()?;
    if table_count > MAX_COUNT {
        return Err(Error::Container(format!("table count {table_count}")));
    }
    let mut entries = Vec::with_capacity(table_count as usize);
    for _ in 0..table_count {
        let sym = r.i32()?;
        let len = r.u8()?;
        entries.push((sym, len));
    }
    let table = CodeTable { entries };
    table.validate()?;

    let payload_bits = r.u64()?;
    let payload_len = r.u32()? as usize;
    if payload_len != payload_bits.div_ceil(8) as usize {
        return Err(Error::Container("payload length vs bit count".into()));
    }
    let payload = r.take(payload_len)?.to_vec();
    if r.pos != body.len() {
        return Err(Error::Container("trailing bytes".into()));
    }

    Ok(CompressedArtifact {
        technique_id,
        shrink,
        scan,
        bits,
        width,
        height,
        block,
        depth,
        quant_steps,
        klt,
        table,
        payload_bits,
        payload,
    })
}
