//! Deterministic synthetic scenes with photographic statistics.
//!
//! The classic grayscale test images are not freely redistributable, so
//! tests and benches build their own: a smooth illumination field,
//! hard-edged objects, band-limited texture patches, and film-like grain.
//! The mix gives locally smooth content whose 64x64 tiles still differ
//! from each other, which is the regime the pipelines are compared in.

use crate::imageio::Image;
use crate::rng::SplitMix64;

struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let dx = (x - self.cx) / self.rx;
        let dy = (y - self.cy) / self.ry;
        dx * dx + dy * dy <= 1.0
    }
}

/// Render a `width x height` gray scene for the given seed. Equal arguments
/// produce identical images on every platform.
pub fn scene(width: usize, height: usize, seed: u64) -> Image {
    let mut rng = SplitMix64::new(seed);
    let w = width as f64;
    let h = height as f64;
    let mut field = vec![120.0f64; width * height];

    // smooth illumination: a handful of low-frequency cosine waves
    for _ in 0..6 {
        let amp = 15.0 + 25.0 * rng.next_f64();
        let fx = (rng.next_f64() * 2.0 - 1.0) * 2.5 / w;
        let fy = (rng.next_f64() * 2.0 - 1.0) * 2.5 / h;
        let phase = rng.next_f64() * std::f64::consts::TAU;
        for row in 0..height {
            for col in 0..width {
                let arg = std::f64::consts::TAU * (fx * col as f64 + fy * row as f64) + phase;
                field[row * width + col] += amp * arg.cos();
            }
        }
    }

    // hard-edged objects: ellipses and rectangles with strong offsets
    for _ in 0..12 {
        let e = Ellipse {
            cx: rng.next_f64() * w,
            cy: rng.next_f64() * h,
            rx: (0.03 + 0.12 * rng.next_f64()) * w,
            ry: (0.03 + 0.12 * rng.next_f64()) * h,
        };
        let offset = (50.0 + 60.0 * rng.next_f64()) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        for row in 0..height {
            for col in 0..width {
                if e.contains(col as f64, row as f64) {
                    field[row * width + col] += offset;
                }
            }
        }
    }
    for _ in 0..6 {
        let x0 = (rng.next_f64() * w) as usize;
        let y0 = (rng.next_f64() * h) as usize;
        let bw = ((0.04 + 0.18 * rng.next_f64()) * w) as usize;
        let bh = ((0.04 + 0.18 * rng.next_f64()) * h) as usize;
        let offset = (45.0 + 55.0 * rng.next_f64()) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
        for row in y0..(y0 + bh).min(height) {
            for col in x0..(x0 + bw).min(width) {
                field[row * width + col] += offset;
            }
        }
    }

    // band-limited texture patches (fabric-like weave)
    for _ in 0..4 {
        let e = Ellipse {
            cx: rng.next_f64() * w,
            cy: rng.next_f64() * h,
            rx: (0.08 + 0.15 * rng.next_f64()) * w,
            ry: (0.08 + 0.15 * rng.next_f64()) * h,
        };
        let amp = 8.0 + 10.0 * rng.next_f64();
        let wavelength = 3.0 + 4.0 * rng.next_f64();
        let angle = rng.next_f64() * std::f64::consts::PI;
        let (ux, uy) = (angle.cos() / wavelength, angle.sin() / wavelength);
        for row in 0..height {
            for col in 0..width {
                if e.contains(col as f64, row as f64) {
                    let arg = std::f64::consts::TAU * (ux * col as f64 + uy * row as f64);
                    field[row * width + col] += amp * arg.cos();
                }
            }
        }
    }

    // film grain
    for v in field.iter_mut() {
        *v += 4.0 * rng.next_gaussian();
    }

    let pixels = field
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    Image {
        width,
        height,
        pixels,
    }
}
