//! Fidelity and rate metrics, plus comparative report assembly.

use crate::error::{Error, Result};
use crate::imageio::Image;

/// Peak value of an 8-bit gray pixel.
pub const MAX_PIXEL: f64 = 255.0;

/// One comparison row: technique label, measured compression ratio, mean
/// squared error, and PSNR in decibels (`f64::INFINITY` when MSE is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub technique: String,
    pub cr: f64,
    pub mse: f64,
    pub psnr: f64,
}

/// Mean squared error over two equally-sized images.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch {
            expected: (a.width, a.height),
            got: (b.width, b.height),
        });
    }
    let sum: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// `10 log10(255^2 / mse)` in decibels; infinite for a zero MSE.
pub fn psnr(m: f64) -> Result<f64> {
    if m < 0.0 {
        return Err(Error::NegativeMse(m));
    }
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (MAX_PIXEL * MAX_PIXEL / m).log10())
}

/// Aligned text table plus machine-readable CSV, four decimal places.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: String,
    pub csv: String,
}

pub fn build_report(rows: &[MetricsRow]) -> Report {
    let headers = ["technique", "cr", "mse", "psnr"];
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.technique.clone(),
                format!("{:.4}", r.cr),
                format!("{:.4}", r.mse),
                format!("{:.4}", r.psnr),
            ]
        })
        .collect();

    let mut widths = headers.map(str::len);
    for row in &cells {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut table = String::new();
    let fmt_line = |cols: [&str; 4], widths: &[usize; 4]| -> String {
        let mut line = String::new();
        for (i, (c, w)) in cols.iter().zip(widths).enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(c);
            if i < 3 {
                for _ in c.len()..*w {
                    line.push(' ');
                }
            }
        }
        line.push('\n');
        line
    };
    table.push_str(&fmt_line(headers, &widths));
    for row in &cells {
        table.push_str(&fmt_line([&row[0], &row[1], &row[2], &row[3]], &widths));
    }

    let mut csv = String::from("technique,cr,mse,psnr\n");
    for row in &cells {
        csv.push_str(&format!("{},{},{},{}\n", row[0], row[1], row[2], row[3]));
    }

    Report { table, csv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        let a = Image::new(1, 1, vec![0]).unwrap();
        let b = Image::new(1, 1, vec![255]).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 65025.0);

        let a = Image::new(2, 1, vec![0, 0]).unwrap();
        let b = Image::new(2, 1, vec![3, 4]).unwrap();
        assert_eq!(mse(&a, &b).unwrap(), 12.5);
    }

    #[test]
    fn mse_rejects_mismatched_dims() {
        let a = Image::new(2, 1, vec![0, 0]).unwrap();
        let b = Image::new(1, 2, vec![0, 0]).unwrap();
        assert!(mse(&a, &b).is_err());
    }

    #[test]
    fn psnr_examples() {
        assert_eq!(psnr(65025.0).unwrap(), 0.0);
        assert!((psnr(650.25).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(psnr(0.0).unwrap(), f64::INFINITY);
        assert!(psnr(-1.0).is_err());
    }

    #[test]
    fn psnr_matches_reference_pairs() {
        assert!((psnr(13.5447).unwrap() - 36.8131).abs() < 0.001);
        assert!((psnr(26.9291).unwrap() - 33.8286).abs() < 0.001);
    }

    #[test]
    fn report_empty_and_single() {
        let empty = build_report(&[]);
        assert_eq!(empty.csv, "technique,cr,mse,psnr\n");
        assert_eq!(empty.table.lines().count(), 1);

        let one = build_report(&[MetricsRow {
            technique: "haar".into(),
            cr: 3.879,
            mse: 26.9291,
            psnr: 33.82861,
        }]);
        assert_eq!(
            one.csv,
            "technique,cr,mse,psnr\nhaar,3.8790,26.9291,33.8286\n"
        );
        assert_eq!(one.table.lines().count(), 2);
    }

    #[test]
    fn report_renders_infinite_psnr() {
        let r = build_report(&[MetricsRow {
            technique: "haar".into(),
            cr: 1.0,
            mse: 0.0,
            psnr: f64::INFINITY,
        }]);
        assert!(r.csv.contains(",inf\n"));
    }

    proptest! {
        #[test]
        fn prop_mse_symmetric_nonnegative(pixels_a in proptest::collection::vec(0u8..=255, 16),
                                          pixels_b in proptest::collection::vec(0u8..=255, 16)) {
            let a = Image::new(4, 4, pixels_a).unwrap();
            let b = Image::new(4, 4, pixels_b).unwrap();
            let ab = mse(&a, &b).unwrap();
            let ba = mse(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }

        #[test]
        fn prop_psnr_decreasing_and_identity(m1 in 1e-6f64..1e6, factor in 1.0001f64..100.0) {
            let m2 = m1 * factor;
            prop_assert!(psnr(m2).unwrap() < psnr(m1).unwrap());
            // both standard forms of the formula agree
            let lhs = psnr(m1).unwrap();
            let rhs = 20.0 * (MAX_PIXEL / m1.sqrt()).log10();
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
