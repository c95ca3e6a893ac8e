//! Grayscale image I/O (binary PGM), impulse-noise injection, and tiling
//! into spatial sub-blocks.

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::scan::{BlockStack, ScanKind};
use crate::wavelet::CoeffPlane;

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                got: (pixels.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Kind of injected noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    SaltPepper,
}

/// Reproducible impulse-noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub density: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn salt_pepper(density: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidConfig(format!(
                "noise density {density} outside [0, 1]"
            )));
        }
        Ok(Self {
            kind: NoiseKind::SaltPepper,
            density,
            seed,
        })
    }
}

/// Parse a binary PGM (magic `P5`, maxval <= 255).
///
/// `#` comment lines are tolerated anywhere in the header; pixel values are
/// taken byte-exact, with no maxval rescaling. Trailing bytes after the
/// payload are ignored.
pub fn load_pgm(bytes: &[u8]) -> Result<Image> {
    fn skip_separators(bytes: &[u8], pos: &mut usize) {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn read_number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
        skip_separators(bytes, pos);
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return Err(Error::InvalidPgm("expected a decimal header field".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidPgm("unreadable header field".into()))
    }

    if bytes.len() < 2 {
        return Err(Error::InvalidPgm("missing magic".into()));
    }
    match &bytes[0..2] {
        b"P5" => {}
        b"P2" => {
            return Err(Error::InvalidPgm(
                "ASCII variant P2 is unsupported, expected binary P5".into(),
            ))
        }
        _ => return Err(Error::InvalidPgm("bad magic, expected P5".into())),
    }
    let mut pos = 2usize;

    let width = read_number(bytes, &mut pos)?;
    let height = read_number(bytes, &mut pos)?;
    let maxval = read_number(bytes, &mut pos)?;
    if width == 0 || height == 0 {
        return Err(Error::InvalidPgm(format!(
            "bad dimensions {width}x{height}"
        )));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::InvalidPgm(format!(
            "maxval {maxval} outside [1, 255]"
        )));
    }
    // exactly one whitespace byte separates maxval from the payload
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::InvalidPgm("missing separator before payload".into()));
    }
    pos += 1;

    let need = width * height;
    if bytes.len() - pos < need {
        return Err(Error::InvalidPgm(format!(
            "truncated payload: need {need} bytes, have {}",
            bytes.len() - pos
        )));
    }
    let pixels = bytes[pos..pos + need].to_vec();
    Image::new(width, height, pixels)
}

/// Serialize as binary PGM with maxval 255.
pub fn save_pgm(img: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

/// Corrupt each pixel independently with probability `spec.density`; a
/// corrupted pixel becomes 0 or 255 with equal probability. Deterministic
/// for a given seed.
pub fn add_salt_pepper(img: &Image, spec: &NoiseSpec) -> Image {
    let NoiseKind::SaltPepper = spec.kind;
    let mut rng = SplitMix64::new(spec.seed);
    let pixels = img
        .pixels
        .iter()
        .map(|&p| {
            if rng.next_f64() < spec.density {
                if rng.next_f64() < 0.5 {
                    0
                } else {
                    255
                }
            } else {
                p
            }
        })
        .collect();
    Image {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Cut an image into `block x block` tiles, in row-raster tile order.
pub fn tile(img: &Image, block: usize) -> Result<BlockStack> {
    if block == 0 || !img.width.is_multiple_of(block) || !img.height.is_multiple_of(block) {
        return Err(Error::NotDivisible {
            width: img.width,
            height: img.height,
            block,
        });
    }
    let grid_rows = img.height / block;
    let grid_cols = img.width / block;
    let mut blocks = Vec::with_capacity(grid_rows * grid_cols);
    for gr in 0..grid_rows {
        for gc in 0..grid_cols {
            let mut values = Vec::with_capacity(block * block);
            for r in 0..block {
                for c in 0..block {
                    values.push(img.get(gr * block + r, gc * block + c) as f64);
                }
            }
            blocks.push(CoeffPlane::new(block, block, values)?);
        }
    }
    BlockStack::new(blocks, grid_rows, grid_cols, ScanKind::RowRaster)
}

/// Reassemble an image from row-raster tiles, rounding half away from zero
/// and clamping to [0, 255].
pub fn untile(stack: &BlockStack, width: usize, height: usize) -> Result<Image> {
    if stack.scan != ScanKind::RowRaster {
        return Err(Error::WrongScanOrder {
            expected: ScanKind::RowRaster,
            got: stack.scan,
        });
    }
    let bw = stack.block_width();
    let bh = stack.block_height();
    if stack.grid_cols * bw != width || stack.grid_rows * bh != height {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            got: (stack.grid_cols * bw, stack.grid_rows * bh),
        });
    }
    let mut pixels = vec![0u8; width * height];
    for gr in 0..stack.grid_rows {
        for gc in 0..stack.grid_cols {
            let b = &stack.blocks[gr * stack.grid_cols + gc];
            for r in 0..bh {
                for c in 0..bw {
                    let v = b.get(r, c).round().clamp(0.0, 255.0);
                    pixels[(gr * bh + r) * width + gc * bw + c] = v as u8;
                }
            }
        }
    }
    Image::new(width, height, pixels)
}

/// View an image as a coefficient plane.
pub fn plane_from_image(img: &Image) -> CoeffPlane {
    CoeffPlane {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().map(|&p| p as f64).collect(),
    }
}

/// Finalize a reconstructed plane into 8-bit pixels: round half away from
/// zero, clamp to [0, 255].
pub fn image_from_plane(plane: &CoeffPlane) -> Result<Image> {
    let pixels = plane
        .values
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    Image::new(plane.width, plane.height, pixels)
}
