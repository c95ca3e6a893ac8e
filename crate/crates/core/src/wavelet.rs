//! Orthonormal Haar DWT-2D, uniform wavelet-packet decomposition, and
//! MAD-based coefficient shrinkage.
//!
//! The 2-D Haar step maps every 2x2 block `[[a, b], [c, d]]` to
//!
//! ```text
//! LL = (a + b + c + d) / 2      LH = (a + b - c - d) / 2   (vertical detail)
//! HL = (a - b + c - d) / 2      HH = (a - b - c + d) / 2   (diagonal detail)
//! ```
//!
//! The factor 1/2 makes the step orthonormal, so the sum of squares is
//! preserved and the universal threshold keeps its calibration at every
//! level.

use crate::error::{Error, Result};
use crate::scan::{BlockStack, ScanKind};

/// Rectangular grid of real-valued transform coefficients, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffPlane {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl CoeffPlane {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                got: (values.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.width + col] = v;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of squared coefficients.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// The four subbands produced by one 2-D Haar step.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandQuad {
    pub ll: CoeffPlane,
    pub lh: CoeffPlane,
    pub hl: CoeffPlane,
    pub hh: CoeffPlane,
}

impl SubbandQuad {
    fn check_uniform(&self) -> Result<(usize, usize)> {
        let (w, h) = (self.ll.width, self.ll.height);
        for p in [&self.lh, &self.hl, &self.hh] {
            if p.width != w || p.height != h {
                return Err(Error::DimensionMismatch {
                    expected: (w, h),
                    got: (p.width, p.height),
                });
            }
        }
        Ok((w, h))
    }
}

/// Coefficient shrinkage rule applied to detail subbands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrinkMode {
    None,
    Hard,
    Soft,
}

/// Single-level orthonormal 2-D Haar decomposition.
pub fn haar_forward(plane: &CoeffPlane) -> Result<SubbandQuad> {
    if !plane.width.is_multiple_of(2) || !plane.height.is_multiple_of(2) {
        return Err(Error::OddDimensions {
            width: plane.width,
            height: plane.height,
        });
    }
    let (hw, hh) = (plane.width / 2, plane.height / 2);
    let mut ll = CoeffPlane::zeros(hw, hh);
    let mut lh = CoeffPlane::zeros(hw, hh);
    let mut hl = CoeffPlane::zeros(hw, hh);
    let mut hhp = CoeffPlane::zeros(hw, hh);
    for r in 0..hh {
        for c in 0..hw {
            let a = plane.get(2 * r, 2 * c);
            let b = plane.get(2 * r, 2 * c + 1);
            let cc = plane.get(2 * r + 1, 2 * c);
            let d = plane.get(2 * r + 1, 2 * c + 1);
            ll.set(r, c, (a + b + cc + d) / 2.0);
            lh.set(r, c, (a + b - cc - d) / 2.0);
            hl.set(r, c, (a - b + cc - d) / 2.0);
            hhp.set(r, c, (a - b - cc + d) / 2.0);
        }
    }
    Ok(SubbandQuad {
        ll,
        lh,
        hl,
        hh: hhp,
    })
}

/// Inverse of [`haar_forward`].
pub fn haar_inverse(quad: &SubbandQuad) -> Result<CoeffPlane> {
    let (w, h) = quad.check_uniform()?;
    let mut out = CoeffPlane::zeros(w * 2, h * 2);
    for r in 0..h {
        for c in 0..w {
            let ll = quad.ll.get(r, c);
            let lh = quad.lh.get(r, c);
            let hl = quad.hl.get(r, c);
            let hh = quad.hh.get(r, c);
            out.set(2 * r, 2 * c, (ll + lh + hl + hh) / 2.0);
            out.set(2 * r, 2 * c + 1, (ll + lh - hl - hh) / 2.0);
            out.set(2 * r + 1, 2 * c, (ll - lh + hl - hh) / 2.0);
            out.set(2 * r + 1, 2 * c + 1, (ll - lh - hl + hh) / 2.0);
        }
    }
    Ok(out)
}

/// Full uniform wavelet-packet decomposition.
///
/// Every subband is split again at each level, so `depth` levels turn the
/// plane into a `2^depth x 2^depth` grid of packets, emitted in row-raster
/// grid order. The packet at grid (0,0) is the all-lowpass (DC) packet.
pub fn packet_decompose(plane: &CoeffPlane, depth: usize) -> Result<BlockStack> {
    let div = 1usize << depth;
    if !plane.width.is_multiple_of(div) || !plane.height.is_multiple_of(div) {
        return Err(Error::NotDivisible {
            width: plane.width,
            height: plane.height,
            block: div,
        });
    }
    let mut grid = vec![plane.clone()];
    let mut dim = 1usize;
    for _ in 0..depth {
        let next_dim = dim * 2;
        let mut next = vec![CoeffPlane::zeros(1, 1); next_dim * next_dim];
        for r in 0..dim {
            for c in 0..dim {
                let quad = haar_forward(&grid[r * dim + c])?;
                next[(2 * r) * next_dim + 2 * c] = quad.ll;
                next[(2 * r) * next_dim + 2 * c + 1] = quad.lh;
                next[(2 * r + 1) * next_dim + 2 * c] = quad.hl;
                next[(2 * r + 1) * next_dim + 2 * c + 1] = quad.hh;
            }
        }
        grid = next;
        dim = next_dim;
    }
    BlockStack::new(grid, dim, dim, ScanKind::RowRaster)
}

/// Inverse of [`packet_decompose`]; the stack must be in row-raster grid
/// order with `4^depth` blocks.
pub fn packet_reconstruct(stack: &BlockStack, depth: usize) -> Result<CoeffPlane> {
    let dim = 1usize << depth;
    if stack.blocks.len() != dim * dim || stack.grid_rows != dim || stack.grid_cols != dim {
        return Err(Error::WrongBlockCount {
            expected: dim * dim,
            got: stack.blocks.len(),
        });
    }
    if stack.scan != ScanKind::RowRaster {
        return Err(Error::WrongScanOrder {
            expected: ScanKind::RowRaster,
            got: stack.scan,
        });
    }
    let mut grid = stack.blocks.clone();
    let mut cur = dim;
    while cur > 1 {
        let half = cur / 2;
        let mut next = vec![CoeffPlane::zeros(1, 1); half * half];
        for r in 0..half {
            for c in 0..half {
                let quad = SubbandQuad {
                    ll: grid[(2 * r) * cur + 2 * c].clone(),
                    lh: grid[(2 * r) * cur + 2 * c + 1].clone(),
                    hl: grid[(2 * r + 1) * cur + 2 * c].clone(),
                    hh: grid[(2 * r + 1) * cur + 2 * c + 1].clone(),
                };
                next[r * half + c] = haar_inverse(&quad)?;
            }
        }
        grid = next;
        cur = half;
    }
    Ok(grid.remove(0))
}

/// Robust noise-scale estimate: `median(|coeffs|) / 0.6745`.
///
/// An even coefficient count takes the mean of the two central order
/// statistics.
pub fn mad_sigma(plane: &CoeffPlane) -> Result<f64> {
    if plane.is_empty() {
        return Err(Error::EmptyPlane);
    }
    let mut mags: Vec<f64> = plane.values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).expect("non-finite coefficient"));
    let n = mags.len();
    let median = if n % 2 == 1 {
        mags[n / 2]
    } else {
        (mags[n / 2 - 1] + mags[n / 2]) / 2.0
    };
    Ok(median / 0.6745)
}

/// Universal (VisuShrink) threshold `sigma * sqrt(2 ln n)`.
pub fn universal_threshold(sigma: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyPlane);
    }
    Ok(sigma * (2.0 * (n as f64).ln()).sqrt())
}

/// Pointwise thresholding. Hard zeroes every coefficient with
/// `|x| <= lambda`; soft additionally moves survivors toward zero by
/// `lambda`, keeping their sign.
pub fn shrink(plane: &CoeffPlane, lambda: f64, mode: ShrinkMode) -> CoeffPlane {
    debug_assert!(lambda >= 0.0);
    let values = plane
        .values
        .iter()
        .map(|&x| match mode {
            ShrinkMode::None => x,
            ShrinkMode::Hard => {
                if x.abs() <= lambda {
                    0.0
                } else {
                    x
                }
            }
            ShrinkMode::Soft => {
                if x.abs() <= lambda {
                    0.0
                } else {
                    x.signum() * (x.abs() - lambda)
                }
            }
        })
        .collect();
    CoeffPlane {
        width: plane.width,
        height: plane.height,
        values,
    }
}

/// Shrink the three detail subbands of a quad, each with a threshold from
/// its own MAD estimate and coefficient count. LL passes through untouched.
pub fn denoise_quad(quad: &SubbandQuad, mode: ShrinkMode) -> Result<SubbandQuad> {
    quad.check_uniform()?;
    if mode == ShrinkMode::None {
        return Ok(quad.clone());
    }
    let shrink_one = |p: &CoeffPlane| -> Result<CoeffPlane> {
        let lambda = universal_threshold(mad_sigma(p)?, p.len())?;
        Ok(shrink(p, lambda, mode))
    };
    Ok(SubbandQuad {
        ll: quad.ll.clone(),
        lh: shrink_one(&quad.lh)?,
        hl: shrink_one(&quad.hl)?,
        hh: shrink_one(&quad.hh)?,
    })
}

/// Shrink the high-subband packets of a decomposed stack, each with a
/// threshold from its own MAD estimate and pixel count.
///
/// High sub-bands are the packets refining the first-level detail channels
/// LH/HL/HH, i.e. everything outside the top-left quadrant of the packet
/// grid. The low quadrant (the refinements of LL) passes through untouched,
/// like LL itself does in a single decomposition step.
pub fn shrink_stack(stack: &BlockStack, mode: ShrinkMode) -> Result<BlockStack> {
    if stack.scan != ScanKind::RowRaster {
        return Err(Error::WrongScanOrder {
            expected: ScanKind::RowRaster,
            got: stack.scan,
        });
    }
    if mode == ShrinkMode::None {
        return Ok(stack.clone());
    }
    let low_rows = stack.grid_rows.div_ceil(2);
    let low_cols = stack.grid_cols.div_ceil(2);
    let mut blocks = Vec::with_capacity(stack.blocks.len());
    for (i, b) in stack.blocks.iter().enumerate() {
        let (r, c) = (i / stack.grid_cols, i % stack.grid_cols);
        if r < low_rows && c < low_cols {
            blocks.push(b.clone());
        } else {
            let lambda = universal_threshold(mad_sigma(b)?, b.len())?;
            blocks.push(shrink(b, lambda, mode));
        }
    }
    BlockStack::new(blocks, stack.grid_rows, stack.grid_cols, stack.scan)
}
