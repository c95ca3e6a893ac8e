//! Bijective orderings between 2-D grid coordinates and 1-D stack indices.
//!
//! Two scans are supported: row-raster (left-to-right, top-to-bottom) and
//! Morton Z-order (recursive quadrant order NW, NE, SW, SE). A [`BlockStack`]
//! records which ordering its blocks currently follow.

use crate::error::{Error, Result};
use crate::wavelet::CoeffPlane;

/// Which ordering a stack's blocks follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    RowRaster,
    Morton,
}

/// Ordered collection of equally-sized coefficient blocks cut from a
/// 2-D grid of sub-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStack {
    pub blocks: Vec<CoeffPlane>,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub scan: ScanKind,
}

impl BlockStack {
    pub fn new(
        blocks: Vec<CoeffPlane>,
        grid_rows: usize,
        grid_cols: usize,
        scan: ScanKind,
    ) -> Result<Self> {
        if blocks.len() != grid_rows * grid_cols || blocks.is_empty() {
            return Err(Error::WrongBlockCount {
                expected: grid_rows * grid_cols,
                got: blocks.len(),
            });
        }
        let (w, h) = (blocks[0].width, blocks[0].height);
        for b in &blocks {
            if b.width != w || b.height != h {
                return Err(Error::DimensionMismatch {
                    expected: (w, h),
                    got: (b.width, b.height),
                });
            }
        }
        Ok(Self {
            blocks,
            grid_rows,
            grid_cols,
            scan,
        })
    }

    pub fn block_width(&self) -> usize {
        self.blocks[0].width
    }

    pub fn block_height(&self) -> usize {
        self.blocks[0].height
    }

    /// Pixels per block.
    pub fn block_len(&self) -> usize {
        self.blocks[0].len()
    }
}

/// Row-raster index: `row * grid_cols + col`.
pub fn raster_index(row: usize, col: usize, grid_cols: usize) -> Result<usize> {
    if col >= grid_cols {
        return Err(Error::IndexOutOfRange {
            row,
            col,
            cols: grid_cols,
        });
    }
    Ok(row * grid_cols + col)
}

/// Morton (Z) index: column bits at even positions, row bits at odd, so each
/// quad is visited NW, NE, SW, SE. The grid constraint (square, power of
/// two) is enforced where whole stacks are permuted.
pub fn morton_index(row: usize, col: usize) -> usize {
    fn spread(mut x: u64) -> u64 {
        // interleave with zeros: abcd -> 0a0b0c0d
        x &= 0xFFFF_FFFF;
        x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
        x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
        x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
        x = (x | (x << 2)) & 0x3333_3333_3333_3333;
        x = (x | (x << 1)) & 0x5555_5555_5555_5555;
        x
    }
    (spread(col as u64) | (spread(row as u64) << 1)) as usize
}

fn scan_permutation(rows: usize, cols: usize, kind: ScanKind) -> Result<Vec<usize>> {
    // perm[scan position] = raster position
    match kind {
        ScanKind::RowRaster => Ok((0..rows * cols).collect()),
        ScanKind::Morton => {
            if rows != cols || !rows.is_power_of_two() {
                return Err(Error::GridNotPowerOfTwo { rows, cols });
            }
            let mut perm = vec![0usize; rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    perm[morton_index(r, c)] = raster_index(r, c, cols)?;
                }
            }
            Ok(perm)
        }
    }
}

/// Permute a stack from row-raster grid order into `kind` order.
pub fn order_stack(stack: &BlockStack, kind: ScanKind) -> Result<BlockStack> {
    if stack.scan != ScanKind::RowRaster {
        return Err(Error::WrongScanOrder {
            expected: ScanKind::RowRaster,
            got: stack.scan,
        });
    }
    let perm = scan_permutation(stack.grid_rows, stack.grid_cols, kind)?;
    let blocks = perm.iter().map(|&src| stack.blocks[src].clone()).collect();
    BlockStack::new(blocks, stack.grid_rows, stack.grid_cols, kind)
}

/// Inverse of [`order_stack`]: permute a stack in `kind` order back into
/// row-raster grid order.
pub fn unorder_stack(stack: &BlockStack, kind: ScanKind) -> Result<BlockStack> {
    if stack.scan != kind {
        return Err(Error::WrongScanOrder {
            expected: kind,
            got: stack.scan,
        });
    }
    let perm = scan_permutation(stack.grid_rows, stack.grid_cols, kind)?;
    let mut blocks = vec![CoeffPlane::zeros(1, 1); stack.blocks.len()];
    for (dst, &src) in perm.iter().enumerate() {
        blocks[src] = stack.blocks[dst].clone();
    }
    BlockStack::new(
        blocks,
        stack.grid_rows,
        stack.grid_cols,
        ScanKind::RowRaster,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Recursive quadrant enumeration NW, NE, SW, SE: the ground truth for
    /// the Morton bit formula.
    fn quadrant_order(size: usize) -> Vec<(usize, usize)> {
        fn rec(r0: usize, c0: usize, size: usize, out: &mut Vec<(usize, usize)>) {
            if size == 1 {
                out.push((r0, c0));
                return;
            }
            let h = size / 2;
            rec(r0, c0, h, out);
            rec(r0, c0 + h, h, out);
            rec(r0 + h, c0, h, out);
            rec(r0 + h, c0 + h, h, out);
        }
        let mut out = Vec::with_capacity(size * size);
        rec(0, 0, size, &mut out);
        out
    }

    fn numbered_stack(rows: usize, cols: usize) -> BlockStack {
        let blocks = (0..rows * cols)
            .map(|i| CoeffPlane::new(1, 1, vec![i as f64]).unwrap())
            .collect();
        BlockStack::new(blocks, rows, cols, ScanKind::RowRaster).unwrap()
    }

    #[test]
    fn raster_examples() {
        assert_eq!(raster_index(0, 0, 4).unwrap(), 0);
        assert_eq!(raster_index(1, 2, 4).unwrap(), 6);
        assert!(raster_index(0, 4, 4).is_err());
        let mut expect = 0;
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(raster_index(r, c, 4).unwrap(), expect);
                expect += 1;
            }
        }
    }

    #[test]
    fn morton_2x2_is_z_pattern() {
        assert_eq!(morton_index(0, 0), 0);
        assert_eq!(morton_index(0, 1), 1);
        assert_eq!(morton_index(1, 0), 2);
        assert_eq!(morton_index(1, 1), 3);
    }

    #[test]
    fn morton_2_3_in_4x4() {
        assert_eq!(morton_index(2, 3), 13);
    }

    #[test]
    fn morton_matches_quadrant_oracle() {
        for size in [2usize, 4, 8, 16] {
            for (pos, (r, c)) in quadrant_order(size).into_iter().enumerate() {
                assert_eq!(morton_index(r, c), pos, "size {size} cell ({r},{c})");
            }
        }
    }

    #[test]
    fn scans_are_bijections() {
        for size in [2usize, 4, 8, 16] {
            for kind in [ScanKind::RowRaster, ScanKind::Morton] {
                let perm = scan_permutation(size, size, kind).unwrap();
                let mut seen = vec![false; size * size];
                for &p in &perm {
                    assert!(!seen[p]);
                    seen[p] = true;
                }
            }
        }
    }

    #[test]
    fn raster_order_is_identity() {
        let stack = numbered_stack(3, 5);
        let ordered = order_stack(&stack, ScanKind::RowRaster).unwrap();
        assert_eq!(ordered.blocks, stack.blocks);
    }

    #[test]
    fn morton_on_2x2_matches_raster() {
        let stack = numbered_stack(2, 2);
        let ordered = order_stack(&stack, ScanKind::Morton).unwrap();
        let vals: Vec<f64> = ordered.blocks.iter().map(|b| b.values[0]).collect();
        assert_eq!(vals, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn order_unorder_roundtrip_64() {
        let stack = numbered_stack(8, 8);
        for kind in [ScanKind::RowRaster, ScanKind::Morton] {
            let ordered = order_stack(&stack, kind).unwrap();
            let back = unorder_stack(&ordered, kind).unwrap();
            assert_eq!(back.blocks, stack.blocks);
            assert_eq!(back.scan, ScanKind::RowRaster);
        }
    }

    #[test]
    fn morton_rejects_bad_grids() {
        let stack = numbered_stack(3, 3);
        assert!(matches!(
            order_stack(&stack, ScanKind::Morton),
            Err(Error::GridNotPowerOfTwo { .. })
        ));
        let stack = numbered_stack(2, 4);
        assert!(order_stack(&stack, ScanKind::Morton).is_err());
    }

    #[test]
    fn order_requires_raster_input() {
        let stack = numbered_stack(2, 2);
        let ordered = order_stack(&stack, ScanKind::Morton).unwrap();
        assert!(matches!(
            order_stack(&ordered, ScanKind::Morton),
            Err(Error::WrongScanOrder { .. })
        ));
    }

    proptest! {
        #[test]
        fn prop_order_unorder_inverse(k in 1usize..4, kind_morton in any::<bool>()) {
            let size = 1 << k;
            let kind = if kind_morton { ScanKind::Morton } else { ScanKind::RowRaster };
            let stack = numbered_stack(size, size);
            let back = unorder_stack(&order_stack(&stack, kind).unwrap(), kind).unwrap();
            prop_assert_eq!(back.blocks, stack.blocks);
        }
    }
}
