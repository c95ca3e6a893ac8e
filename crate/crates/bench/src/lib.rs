//! Benchmark helpers shared by the criterion targets.

use uic_core::pipeline::{CodecConfig, Technique};
use uic_core::synthetic::scene;
use uic_core::Image;

/// Standard benchmark scene.
pub fn bench_image(side: usize) -> Image {
    scene(side, side, 0xBE7C)
}

/// Experiment-1-shaped configuration for a technique.
pub fn bench_config(technique: Technique, side: usize) -> CodecConfig {
    CodecConfig {
        technique,
        block: match technique {
            Technique::HaarMorton | Technique::HaarRowRaster => side / 2,
            _ => side / 8,
        },
        ..CodecConfig::new(technique)
    }
}
