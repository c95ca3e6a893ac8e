//! A deterministic lossy codec for 8-bit grayscale images.
//!
//! The crate implements seven compression pipelines built from four
//! interchangeable stages:
//!
//! * orthonormal Haar transforms (pyramid and uniform wavelet packets) with
//!   MAD-based coefficient shrinkage,
//! * bijective block scans (row-raster and Morton Z-order),
//! * a cross-block Karhunen-Loève transform with eigen-channel pruning,
//! * a uniform scalar quantizer feeding a canonical Huffman coder.
//!
//! [`pipeline::compress`] / [`pipeline::decompress`] run whole pipelines and
//! produce self-describing `.uic` containers; [`metrics`] provides the
//! MSE/PSNR/CR figures used to compare them.

pub mod coder;
pub mod error;
pub mod imageio;
pub mod klt;
pub mod metrics;
pub mod pipeline;
pub mod scan;
pub mod synthetic;
pub mod wavelet;

mod rng;

pub use coder::{CompressedArtifact, KltSideInfo, QuantSpec};
pub use error::{Error, Result};
pub use imageio::{Image, NoiseKind, NoiseSpec};
pub use klt::{EnergyReport, KltModel};
pub use metrics::MetricsRow;
pub use pipeline::{CodecConfig, StackVariant, Technique};
pub use scan::{BlockStack, ScanKind};
pub use wavelet::{CoeffPlane, ShrinkMode, SubbandQuad};
