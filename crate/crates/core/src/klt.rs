//! Cross-block Karhunen-Loève transform.
//!
//! Every pixel position of an n-block stack is treated as one observation
//! vector in R^n (component j = the value at that position in block j). The
//! population covariance of those vectors is diagonalized with cyclic Jacobi
//! rotations, eigenpairs are normalized to descending eigenvalue order, and
//! low-variance channels can be pruned and zero-filled at reconstruction.

use crate::error::{Error, Result};
use crate::scan::BlockStack;
use crate::wavelet::CoeffPlane;

/// Fitted transform: mean vector, eigenvector basis (columns, descending
/// eigenvalue order), eigenvalues, and the retained channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct KltModel {
    pub n: usize,
    pub mean: Vec<f64>,
    /// `basis[j]` is eigenvector j (length n).
    pub basis: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub kept: usize,
}

/// Eigenvalue spectrum summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub eigenvalues: Vec<f64>,
    pub cumulative_fraction: Vec<f64>,
    /// Set when the spectrum has zero trace; fractions are undefined then.
    pub zero_trace: bool,
}

impl EnergyReport {
    /// Smallest k whose leading channels reach the fraction `p` of the total
    /// variance. `None` when the trace is zero.
    pub fn channels_for(&self, p: f64) -> Option<usize> {
        if self.zero_trace {
            return None;
        }
        let k = self
            .cumulative_fraction
            .iter()
            .position(|&f| f >= p)
            .unwrap_or(self.cumulative_fraction.len() - 1);
        Some(k + 1)
    }
}

/// Per-block means and the population covariance (divisor = pixels per
/// block), as a dense symmetric n x n matrix in row-major order.
fn covariance(stack: &BlockStack) -> (Vec<f64>, Vec<f64>) {
    let n = stack.blocks.len();
    let len = stack.block_len() as f64;
    let mean: Vec<f64> = stack
        .blocks
        .iter()
        .map(|b| b.values.iter().sum::<f64>() / len)
        .collect();
    let centered: Vec<Vec<f64>> = stack
        .blocks
        .iter()
        .zip(&mean)
        .map(|(b, &m)| b.values.iter().map(|v| v - m).collect())
        .collect();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let dot: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            cov[i * n + j] = dot / len;
            cov[j * n + i] = cov[i * n + j];
        }
    }
    (mean, cov)
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi diagonalization of a symmetric matrix. Returns unsorted
/// eigenvalues and eigenvector columns. Converges when the off-diagonal
/// Frobenius norm drops below `1e-12 * trace`; the sweep order is fixed, so
/// results are fully deterministic.
fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 1 {
        return Ok((vec![a[0]], vec![vec![1.0]]));
    }
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    let tol = 1e-12 * trace.abs();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0 * a[p * n + q] * a[p * n + q];
                }
            }
            s.sqrt()
        };
        if off <= tol {
            let vals = (0..n).map(|i| a[i * n + i]).collect();
            let cols = (0..n)
                .map(|j| (0..n).map(|i| v[i * n + j]).collect())
                .collect();
            return Ok((vals, cols));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    // theta^2 would overflow; the rotation is essentially zero
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::EigenNotConverged)
}

/// Normalize eigenpairs: descending eigenvalues (ties broken by original
/// column index), and each eigenvector flipped so its largest-magnitude
/// component is positive (ties: first such component).
fn normalize_eigenpairs(vals: Vec<f64>, cols: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| {
        vals[j]
            .partial_cmp(&vals[i])
            .expect("non-finite eigenvalue")
            .then(i.cmp(&j))
    });
    let mut sorted_vals = Vec::with_capacity(vals.len());
    let mut sorted_cols = Vec::with_capacity(cols.len());
    for &idx in &order {
        let mut col = cols[idx].clone();
        let max_mag = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = col.iter().position(|x| x.abs() == max_mag).unwrap_or(0);
        if col[lead] < 0.0 {
            for x in &mut col {
                *x = -*x;
            }
        }
        sorted_vals.push(vals[idx]);
        sorted_cols.push(col);
    }
    (sorted_vals, sorted_cols)
}

/// Estimate mean and covariance over pixel-position vectors and
/// eigendecompose. The returned model retains all channels.
pub fn fit(stack: &BlockStack) -> Result<KltModel> {
    let n = stack.blocks.len();
    if n < 2 {
        return Err(Error::TooFewBlocks { got: n });
    }
    let (mean, cov) = covariance(stack);
    let (vals, cols) = jacobi_eigen(cov, n)?;
    let (eigenvalues, basis) = normalize_eigenpairs(vals, cols);
    Ok(KltModel {
        n,
        mean,
        basis,
        eigenvalues,
        kept: n,
    })
}

fn check_uniform(blocks: &[CoeffPlane]) -> Result<(usize, usize)> {
    let (w, h) = (blocks[0].width, blocks[0].height);
    for b in blocks {
        if b.width != w || b.height != h {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                got: (b.width, b.height),
            });
        }
    }
    Ok((w, h))
}

/// Project blocks onto basis columns: channel j at each pixel position is
/// `dot(columns[j], x - mean)`. Produces one plane per column, so a pruned
/// projection passes only the leading columns.
pub fn project_with(
    blocks: &[CoeffPlane],
    mean: &[f64],
    columns: &[Vec<f64>],
) -> Result<Vec<CoeffPlane>> {
    if blocks.len() != mean.len() || blocks.is_empty() {
        return Err(Error::WrongBlockCount {
            expected: mean.len(),
            got: blocks.len(),
        });
    }
    let (w, h) = check_uniform(blocks)?;
    let len = w * h;
    let mut out = Vec::with_capacity(columns.len());
    for col in columns {
        if col.len() != mean.len() {
            return Err(Error::WrongBlockCount {
                expected: mean.len(),
                got: col.len(),
            });
        }
        let mut values = vec![0.0; len];
        for (i, (b, &m)) in blocks.iter().zip(mean).enumerate() {
            let weight = col[i];
            if weight == 0.0 {
                continue;
            }
            for (dst, &src) in values.iter_mut().zip(&b.values) {
                *dst += weight * (src - m);
            }
        }
        out.push(CoeffPlane {
            width: w,
            height: h,
            values,
        });
    }
    Ok(out)
}

/// Inverse of [`project_with`]: `x_i = sum_j columns[j][i] * y_j + mean_i`.
/// Channels and columns pair up one-to-one; zero-filled pruned channels are
/// equivalent to omitting both.
pub fn reconstruct_with(
    channels: &[CoeffPlane],
    mean: &[f64],
    columns: &[Vec<f64>],
) -> Result<Vec<CoeffPlane>> {
    let n = mean.len();
    if channels.len() != columns.len() || channels.is_empty() || columns.len() > n {
        return Err(Error::WrongBlockCount {
            expected: columns.len(),
            got: channels.len(),
        });
    }
    let (w, h) = check_uniform(channels)?;
    let len = w * h;
    let mut out: Vec<Vec<f64>> = mean.iter().map(|&m| vec![m; len]).collect();
    for (col, ch) in columns.iter().zip(channels) {
        if col.len() != n {
            return Err(Error::WrongBlockCount {
                expected: n,
                got: col.len(),
            });
        }
        for (i, &weight) in col.iter().enumerate() {
            if weight == 0.0 {
                continue;
            }
            for (dst, &y) in out[i].iter_mut().zip(&ch.values) {
                *dst += weight * y;
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|values| CoeffPlane {
            width: w,
            height: h,
            values,
        })
        .collect())
}

/// Forward KLT: all n channels of `y = V^T (x - mean)`.
pub fn forward(stack: &BlockStack, model: &KltModel) -> Result<BlockStack> {
    if stack.blocks.len() != model.n {
        return Err(Error::WrongBlockCount {
            expected: model.n,
            got: stack.blocks.len(),
        });
    }
    let planes = project_with(&stack.blocks, &model.mean, &model.basis)?;
    BlockStack::new(planes, stack.grid_rows, stack.grid_cols, stack.scan)
}

/// Inverse KLT over all channels: `x = V y + mean`. With `kept = n` this is
/// the exact inverse of [`forward`]; pruned channels are expected to hold
/// zero planes.
pub fn inverse(stack: &BlockStack, model: &KltModel) -> Result<BlockStack> {
    if stack.blocks.len() != model.n {
        return Err(Error::WrongBlockCount {
            expected: model.n,
            got: stack.blocks.len(),
        });
    }
    let planes = reconstruct_with(&stack.blocks, &model.mean, &model.basis)?;
    BlockStack::new(planes, stack.grid_rows, stack.grid_cols, stack.scan)
}

/// Retain the `target_kept` channels of largest eigenvalue.
pub fn prune(model: &KltModel, target_kept: usize) -> Result<KltModel> {
    if target_kept == 0 || target_kept > model.n {
        return Err(Error::KeptOutOfRange {
            kept: target_kept,
            n: model.n,
        });
    }
    let mut out = model.clone();
    out.kept = target_kept;
    Ok(out)
}

/// Replace every channel plane past `kept` with a zero plane.
pub fn zero_pruned(stack: &BlockStack, kept: usize) -> Result<BlockStack> {
    if kept == 0 || kept > stack.blocks.len() {
        return Err(Error::KeptOutOfRange {
            kept,
            n: stack.blocks.len(),
        });
    }
    let mut blocks = stack.blocks.clone();
    for b in blocks.iter_mut().skip(kept) {
        *b = CoeffPlane::zeros(b.width, b.height);
    }
    BlockStack::new(blocks, stack.grid_rows, stack.grid_cols, stack.scan)
}

/// Cumulative variance fractions of the descending spectrum.
pub fn energy_report(model: &KltModel) -> EnergyReport {
    let trace: f64 = model.eigenvalues.iter().sum();
    if trace <= 0.0 {
        return EnergyReport {
            eigenvalues: model.eigenvalues.clone(),
            cumulative_fraction: vec![f64::NAN; model.n],
            zero_trace: true,
        };
    }
    let mut acc = 0.0;
    let cumulative_fraction = model
        .eigenvalues
        .iter()
        .map(|&l| {
            acc += l;
            acc / trace
        })
        .collect();
    EnergyReport {
        eigenvalues: model.eigenvalues.clone(),
        cumulative_fraction,
        zero_trace: false,
    }
}
