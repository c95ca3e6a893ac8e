//! The seven end-to-end compression techniques and their shared back-end.
//!
//! Every pipeline feeds a list of coefficient planes into the same
//! quantizer + entropy coder, so the comparison between techniques is not
//! skewed by the back-end:
//!
//! 1. `haar`                 pyramid transform + shrinkage
//! 2. `haar+morton`          packet transform + shrinkage, Morton order
//! 3. `haar+row-rafter`      packet transform + shrinkage, raster order
//! 4. `morton+klt`           spatial tiles, Morton order, KLT pruning
//! 5. `row-rafter+klt`       spatial tiles, raster order, KLT pruning
//! 6. `haar+morton+klt`      packets + shrinkage, Morton order, KLT pruning
//! 7. `haar+row-rafter+klt`  packets + shrinkage, raster order, KLT pruning
//!
//! Every technique sheds coefficients at the target ratio. KLT pipelines
//! keep `max(1, floor(n / target_cr))` eigen-channels; the transform-only
//! pipelines keep the leading planes of their decomposition (for the plain
//! pyramid that is the approximation band, for packet pipelines the scan
//! prefix) until the coefficient budget `total / target_cr` is spent. The
//! decoder zero-fills whatever was shed. KLT encoders project with the same
//! f32-rounded side info the decoder will read, so both sides share one
//! basis.

use crate::coder::{
    self, entropy_decode, entropy_encode, serialize, CompressedArtifact, KltSideInfo, QuantSpec,
};
use crate::error::{Error, Result};
use crate::imageio::{self, add_salt_pepper, plane_from_image, tile, untile, Image, NoiseSpec};
use crate::klt::{self, EnergyReport};
use crate::scan::{order_stack, unorder_stack, BlockStack, ScanKind};
use crate::wavelet::{
    denoise_quad, haar_forward, haar_inverse, packet_decompose, packet_reconstruct, shrink_stack,
    CoeffPlane, ShrinkMode, SubbandQuad,
};

/// One of the seven compared techniques.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Technique {
    Haar,
    HaarMorton,
    HaarRowRaster,
    MortonKlt,
    RowRasterKlt,
    HaarMortonKlt,
    HaarRowRasterKlt,
}

impl Technique {
    /// All techniques, in comparison-report order.
    pub const ALL: [Technique; 7] = [
        Technique::Haar,
        Technique::HaarMorton,
        Technique::HaarRowRaster,
        Technique::MortonKlt,
        Technique::RowRasterKlt,
        Technique::HaarMortonKlt,
        Technique::HaarRowRasterKlt,
    ];

    pub fn id(self) -> u8 {
        match self {
            Technique::Haar => 1,
            Technique::HaarMorton => 2,
            Technique::HaarRowRaster => 3,
            Technique::MortonKlt => 4,
            Technique::RowRasterKlt => 5,
            Technique::HaarMortonKlt => 6,
            Technique::HaarRowRasterKlt => 7,
        }
    }

    pub fn from_id(id: u8) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.id() == id)
            .ok_or_else(|| Error::Container(format!("technique id {id}")))
    }

    pub fn label(self) -> &'static str {
        match self {
            Technique::Haar => "haar",
            Technique::HaarMorton => "haar+morton",
            Technique::HaarRowRaster => "haar+row-rafter",
            Technique::MortonKlt => "morton+klt",
            Technique::RowRasterKlt => "row-rafter+klt",
            Technique::HaarMortonKlt => "haar+morton+klt",
            Technique::HaarRowRasterKlt => "haar+row-rafter+klt",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Technique::ALL.into_iter().find(|t| t.label() == label)
    }

    pub fn uses_haar(self) -> bool {
        !matches!(self, Technique::MortonKlt | Technique::RowRasterKlt)
    }

    pub fn uses_klt(self) -> bool {
        self.id() >= 4
    }

    /// The block scan, for techniques that order a stack.
    pub fn scan(self) -> Option<ScanKind> {
        match self {
            Technique::Haar => None,
            Technique::HaarMorton | Technique::MortonKlt | Technique::HaarMortonKlt => {
                Some(ScanKind::Morton)
            }
            Technique::HaarRowRaster | Technique::RowRasterKlt | Technique::HaarRowRasterKlt => {
                Some(ScanKind::RowRaster)
            }
        }
    }
}

/// Parameters for one codec run.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub technique: Technique,
    /// Sub-block size in pixels (final packet size for wavelet pipelines,
    /// spatial tile size for KLT-only pipelines). Unused by `haar`.
    pub block: usize,
    pub target_cr: f64,
    pub shrink: ShrinkMode,
    /// Pyramid decomposition levels, used by `haar` only.
    pub levels: usize,
    /// Coefficient bit budget for the quantizer.
    pub bits: u8,
    /// Optional pre-compression corruption, for noise experiments.
    pub noise: Option<NoiseSpec>,
}

impl CodecConfig {
    pub fn new(technique: Technique) -> Self {
        Self {
            technique,
            block: 64,
            target_cr: 4.0,
            shrink: ShrinkMode::Soft,
            levels: 1,
            bits: 8,
            noise: None,
        }
    }
}

/// Geometry derived from a validated config.
struct Derived {
    /// Packet depth (wavelet pipelines) or pyramid levels (`haar`).
    depth: usize,
    /// Number of planes to store: retained eigen-channels for KLT
    /// pipelines, the retained plane prefix otherwise.
    stored: usize,
}

fn log2_exact(x: usize) -> Option<usize> {
    if x.is_power_of_two() {
        Some(x.trailing_zeros() as usize)
    } else {
        None
    }
}

fn derive(cfg: &CodecConfig, width: usize, height: usize) -> Result<Derived> {
    if cfg.target_cr < 1.0 {
        return Err(Error::InvalidConfig(format!(
            "target CR {} must be >= 1",
            cfg.target_cr
        )));
    }
    if cfg.bits == 0 || cfg.bits > 24 {
        return Err(Error::InvalidConfig(format!(
            "bit budget {} outside [1, 24]",
            cfg.bits
        )));
    }

    let klt_kept = |n: usize| -> Result<usize> {
        if n > 4096 {
            return Err(Error::InvalidConfig(format!(
                "{n} klt channels exceed 4096; use a larger block"
            )));
        }
        if cfg.target_cr > n as f64 {
            return Err(Error::InvalidConfig(format!(
                "target CR {} exceeds the {n} available channels",
                cfg.target_cr
            )));
        }
        Ok(((n as f64 / cfg.target_cr).floor() as usize).max(1))
    };

    match cfg.technique {
        Technique::Haar => {
            if cfg.levels == 0 || cfg.levels > 10 {
                return Err(Error::InvalidConfig(format!(
                    "pyramid levels {} outside [1, 10]",
                    cfg.levels
                )));
            }
            let div = 1usize << cfg.levels;
            if !width.is_multiple_of(div) || !height.is_multiple_of(div) {
                return Err(Error::InvalidConfig(format!(
                    "2^{} must divide {width}x{height}",
                    cfg.levels
                )));
            }
            let dims = pyramid_dims(width, height, cfg.levels);
            Ok(Derived {
                depth: cfg.levels,
                stored: plane_prefix(&dims, width * height, cfg.target_cr),
            })
        }
        Technique::HaarMorton
        | Technique::HaarRowRaster
        | Technique::HaarMortonKlt
        | Technique::HaarRowRasterKlt => {
            if cfg.block == 0 || !width.is_multiple_of(cfg.block) {
                return Err(Error::InvalidConfig(format!(
                    "block {} must divide width {width}",
                    cfg.block
                )));
            }
            let depth = log2_exact(width / cfg.block).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "width {width} over block {} is not a power of two",
                    cfg.block
                ))
            })?;
            if depth > 10 {
                return Err(Error::InvalidConfig(format!(
                    "packet depth {depth} exceeds 10; use a larger block"
                )));
            }
            if !height.is_multiple_of(1usize << depth) || height >> depth == 0 {
                return Err(Error::InvalidConfig(format!(
                    "2^{depth} must divide height {height}"
                )));
            }
            let n = 1usize << (2 * depth);
            let stored = if cfg.technique.uses_klt() {
                if n < 2 {
                    return Err(Error::InvalidConfig(
                        "klt needs at least 2 packets; use a smaller block".into(),
                    ));
                }
                klt_kept(n)?
            } else {
                ((n as f64 / cfg.target_cr).floor() as usize).clamp(1, n)
            };
            Ok(Derived { depth, stored })
        }
        Technique::MortonKlt | Technique::RowRasterKlt => {
            if cfg.block == 0
                || !width.is_multiple_of(cfg.block)
                || !height.is_multiple_of(cfg.block)
            {
                return Err(Error::InvalidConfig(format!(
                    "block {} must divide {width}x{height}",
                    cfg.block
                )));
            }
            let grid_rows = height / cfg.block;
            let grid_cols = width / cfg.block;
            let n = grid_rows * grid_cols;
            if n < 2 {
                return Err(Error::InvalidConfig(
                    "klt needs at least 2 tiles; use a smaller block".into(),
                ));
            }
            if cfg.technique.scan() == Some(ScanKind::Morton)
                && (grid_rows != grid_cols || !grid_rows.is_power_of_two())
            {
                return Err(Error::InvalidConfig(format!(
                    "morton scan needs a square power-of-two grid, got {grid_rows}x{grid_cols}"
                )));
            }
            Ok(Derived {
                depth: 0,
                stored: klt_kept(n)?,
            })
        }
    }
}

/// Plane dimensions of an L-level pyramid, deepest first.
fn pyramid_dims(width: usize, height: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut dims = vec![(width >> levels, height >> levels)];
    for level in (1..=levels).rev() {
        for _ in 0..3 {
            dims.push((width >> level, height >> level));
        }
    }
    dims
}

/// Longest plane prefix whose coefficient count fits `total / target_cr`,
/// never shorter than one plane.
fn plane_prefix(dims: &[(usize, usize)], total: usize, target_cr: f64) -> usize {
    let budget = (total as f64 / target_cr).floor() as usize;
    let mut cum = 0usize;
    let mut stored = 0usize;
    for &(w, h) in dims {
        cum += w * h;
        if stored > 0 && cum > budget {
            break;
        }
        stored += 1;
    }
    stored
}

/// Pyramid transform with per-level shrinkage; planes are emitted deepest
/// first: `[LL_L, LH_L, HL_L, HH_L, ..., LH_1, HL_1, HH_1]`.
fn pyramid_planes(img: &Image, levels: usize, mode: ShrinkMode) -> Result<Vec<CoeffPlane>> {
    let mut details: Vec<[CoeffPlane; 3]> = Vec::with_capacity(levels);
    let mut cur = plane_from_image(img);
    for _ in 0..levels {
        let quad = denoise_quad(&haar_forward(&cur)?, mode)?;
        details.push([quad.lh, quad.hl, quad.hh]);
        cur = quad.ll;
    }
    let mut planes = vec![cur];
    for level in details.into_iter().rev() {
        planes.extend(level);
    }
    Ok(planes)
}

fn pyramid_reassemble(planes: Vec<CoeffPlane>, levels: usize) -> Result<CoeffPlane> {
    let mut iter = planes.into_iter();
    let mut cur = iter.next().ok_or(Error::EmptyPlane)?;
    for _ in 0..levels {
        let lh = iter.next().ok_or(Error::EmptyPlane)?;
        let hl = iter.next().ok_or(Error::EmptyPlane)?;
        let hh = iter.next().ok_or(Error::EmptyPlane)?;
        cur = haar_inverse(&SubbandQuad {
            ll: cur,
            lh,
            hl,
            hh,
        })?;
    }
    Ok(cur)
}

/// Fit, prune, and project with the f32-rounded side info the container
/// will carry.
fn klt_encode(stack: &BlockStack, kept: usize) -> Result<(KltSideInfo, Vec<CoeffPlane>)> {
    let model = klt::prune(&klt::fit(stack)?, kept)?;
    let side = KltSideInfo {
        n: model.n as u32,
        kept: kept as u32,
        mean: model.mean.iter().map(|&v| v as f32).collect(),
        basis: model.basis[..kept]
            .iter()
            .flat_map(|col| col.iter().map(|&v| v as f32))
            .collect(),
    };
    let (mean, columns) = side_info_f64(&side);
    let channels = klt::project_with(&stack.blocks, &mean, &columns)?;
    Ok((side, channels))
}

fn side_info_f64(side: &KltSideInfo) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mean: Vec<f64> = side.mean.iter().map(|&v| v as f64).collect();
    let n = side.n as usize;
    let columns: Vec<Vec<f64>> = (0..side.kept as usize)
        .map(|j| {
            side.basis[j * n..(j + 1) * n]
                .iter()
                .map(|&v| v as f64)
                .collect()
        })
        .collect();
    (mean, columns)
}

/// Run one technique end to end and wrap the result in a container.
/// Equal inputs and configs give byte-identical artifacts.
pub fn compress(img: &Image, cfg: &CodecConfig) -> Result<CompressedArtifact> {
    let d = derive(cfg, img.width, img.height)?;
    let input = match &cfg.noise {
        Some(spec) => add_salt_pepper(img, spec),
        None => img.clone(),
    };

    let scan = cfg.technique.scan().unwrap_or(ScanKind::RowRaster);
    let (planes, klt_side) = match cfg.technique {
        Technique::Haar => {
            let mut planes = pyramid_planes(&input, cfg.levels, cfg.shrink)?;
            planes.truncate(d.stored);
            (planes, None)
        }
        Technique::HaarMorton | Technique::HaarRowRaster => {
            let stack = packet_decompose(&plane_from_image(&input), d.depth)?;
            let stack = shrink_stack(&stack, cfg.shrink)?;
            let stack = order_stack(&stack, scan)?;
            let mut planes = stack.blocks;
            planes.truncate(d.stored);
            (planes, None)
        }
        Technique::MortonKlt | Technique::RowRasterKlt => {
            let stack = order_stack(&tile(&input, cfg.block)?, scan)?;
            let (side, channels) = klt_encode(&stack, d.stored)?;
            (channels, Some(side))
        }
        Technique::HaarMortonKlt | Technique::HaarRowRasterKlt => {
            let stack = packet_decompose(&plane_from_image(&input), d.depth)?;
            let stack = shrink_stack(&stack, cfg.shrink)?;
            let stack = order_stack(&stack, scan)?;
            let (side, channels) = klt_encode(&stack, d.stored)?;
            (channels, Some(side))
        }
    };

    let mut quant_steps = Vec::with_capacity(planes.len());
    let mut symbols = Vec::new();
    for plane in &planes {
        let spec = QuantSpec::for_plane(plane, cfg.bits);
        symbols.extend(coder::quantize(plane, &spec)?);
        quant_steps.push(spec.step as f32);
    }
    let (payload, payload_bits, table) = entropy_encode(&symbols)?;

    Ok(CompressedArtifact {
        technique_id: cfg.technique.id(),
        shrink: cfg.shrink,
        scan,
        bits: cfg.bits,
        width: img.width as u32,
        height: img.height as u32,
        block: if cfg.technique == Technique::Haar {
            0
        } else {
            cfg.block as u32
        },
        depth: d.depth as u32,
        quant_steps,
        klt: klt_side,
        table,
        payload_bits,
        payload,
    })
}

/// Dimensions of the stored planes (a prefix of the full decomposition,
/// sized by the quant-spec count), plus the full plane count.
fn stored_plane_dims(a: &CompressedArtifact) -> Result<(Vec<(usize, usize)>, usize)> {
    let technique = Technique::from_id(a.technique_id)?;
    let (w, h) = (a.width as usize, a.height as usize);
    let depth = a.depth as usize;
    let block = a.block as usize;
    let stored = a.quant_steps.len();
    let bad = |msg: String| Err(Error::Container(msg));

    let (full_dims, expected_stored): (Vec<(usize, usize)>, Option<usize>) = match technique {
        Technique::Haar => {
            if depth == 0
                || depth > 10
                || w >> depth == 0
                || h >> depth == 0
                || w % (1 << depth) != 0
                || h % (1 << depth) != 0
            {
                return bad(format!("pyramid levels {depth} for {w}x{h}"));
            }
            (pyramid_dims(w, h, depth), None)
        }
        Technique::HaarMorton | Technique::HaarRowRaster => {
            if depth > 10
                || w >> depth == 0
                || h >> depth == 0
                || w % (1 << depth) != 0
                || h % (1 << depth) != 0
                || block != w >> depth
            {
                return bad(format!("packet depth {depth} block {block} for {w}x{h}"));
            }
            (vec![(w >> depth, h >> depth); 1 << (2 * depth)], None)
        }
        Technique::MortonKlt | Technique::RowRasterKlt => {
            let side = a
                .klt
                .as_ref()
                .ok_or_else(|| Error::Container("missing klt side info".into()))?;
            if block == 0 || w % block != 0 || h % block != 0 {
                return bad(format!("tile block {block} for {w}x{h}"));
            }
            if side.n as usize != (w / block) * (h / block) {
                return bad(format!("klt n {} vs grid", side.n));
            }
            (
                vec![(block, block); side.n as usize],
                Some(side.kept as usize),
            )
        }
        Technique::HaarMortonKlt | Technique::HaarRowRasterKlt => {
            let side = a
                .klt
                .as_ref()
                .ok_or_else(|| Error::Container("missing klt side info".into()))?;
            if depth > 10
                || w >> depth == 0
                || h >> depth == 0
                || w % (1 << depth) != 0
                || h % (1 << depth) != 0
                || block != w >> depth
            {
                return bad(format!("packet depth {depth} block {block} for {w}x{h}"));
            }
            if side.n as usize != 1usize << (2 * depth) {
                return bad(format!("klt n {} vs packet count", side.n));
            }
            (
                vec![(w >> depth, h >> depth); side.n as usize],
                Some(side.kept as usize),
            )
        }
    };

    if let Some(expected) = expected_stored {
        if stored != expected {
            return bad(format!("{stored} stored planes, expected {expected}"));
        }
    }
    if stored == 0 || stored > full_dims.len() {
        return bad(format!(
            "{stored} stored planes outside [1, {}]",
            full_dims.len()
        ));
    }
    let full = full_dims.len();
    Ok((full_dims[..stored].to_vec(), full))
}

/// Run the exact inverse chain of [`compress`] and finalize to 8-bit pixels.
/// Shed planes are completed with zeros before the inverse transforms.
pub fn decompress(a: &CompressedArtifact) -> Result<Image> {
    let technique = Technique::from_id(a.technique_id)?;
    let (w, h) = (a.width as usize, a.height as usize);
    let depth = a.depth as usize;
    let (dims, full) = stored_plane_dims(a)?;

    let total: usize = dims.iter().map(|&(pw, ph)| pw * ph).sum();
    let symbols = entropy_decode(&a.payload, a.payload_bits, &a.table, total)?;

    let mut planes = Vec::with_capacity(dims.len());
    let mut offset = 0usize;
    for (&(pw, ph), &step) in dims.iter().zip(&a.quant_steps) {
        let spec = QuantSpec::new(step as f64)?;
        let values = coder::dequantize(&symbols[offset..offset + pw * ph], &spec);
        offset += pw * ph;
        planes.push(CoeffPlane::new(pw, ph, values)?);
    }

    match technique {
        Technique::Haar => {
            let all = pyramid_dims(w, h, depth);
            for &(pw, ph) in all.iter().skip(planes.len()) {
                planes.push(CoeffPlane::zeros(pw, ph));
            }
            let plane = pyramid_reassemble(planes, depth)?;
            imageio::image_from_plane(&plane)
        }
        Technique::HaarMorton | Technique::HaarRowRaster => {
            let dim = 1usize << depth;
            let (pw, ph) = (w >> depth, h >> depth);
            for _ in planes.len()..full {
                planes.push(CoeffPlane::zeros(pw, ph));
            }
            let stack = BlockStack::new(planes, dim, dim, a.scan)?;
            let stack = unorder_stack(&stack, a.scan)?;
            imageio::image_from_plane(&packet_reconstruct(&stack, depth)?)
        }
        Technique::MortonKlt | Technique::RowRasterKlt => {
            let side = a.klt.as_ref().expect("validated above");
            let (mean, columns) = side_info_f64(side);
            let blocks = klt::reconstruct_with(&planes, &mean, &columns)?;
            let block = a.block as usize;
            let stack = BlockStack::new(blocks, h / block, w / block, a.scan)?;
            let stack = unorder_stack(&stack, a.scan)?;
            untile(&stack, w, h)
        }
        Technique::HaarMortonKlt | Technique::HaarRowRasterKlt => {
            let side = a.klt.as_ref().expect("validated above");
            let (mean, columns) = side_info_f64(side);
            let blocks = klt::reconstruct_with(&planes, &mean, &columns)?;
            let dim = 1usize << depth;
            let stack = BlockStack::new(blocks, dim, dim, a.scan)?;
            let stack = unorder_stack(&stack, a.scan)?;
            imageio::image_from_plane(&packet_reconstruct(&stack, depth)?)
        }
    }
}

/// Uncompressed bytes over serialized container bytes.
pub fn measured_cr(a: &CompressedArtifact, img: &Image) -> f64 {
    img.len() as f64 / serialize(a).len() as f64
}

/// Which stack an eigen-spectrum analysis is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackVariant {
    SpatialTile,
    HaarPacket,
}

/// Eigenvalue spectrum of the cross-block covariance for either stack
/// construction, without running the full codec.
pub fn eigen_analysis(
    img: &Image,
    variant: StackVariant,
    block: usize,
    shrink: ShrinkMode,
) -> Result<EnergyReport> {
    let stack = match variant {
        StackVariant::SpatialTile => tile(img, block)?,
        StackVariant::HaarPacket => {
            if block == 0 || !img.width.is_multiple_of(block) {
                return Err(Error::InvalidConfig(format!(
                    "block {block} must divide width {}",
                    img.width
                )));
            }
            let depth = log2_exact(img.width / block).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "width {} over block {block} is not a power of two",
                    img.width
                ))
            })?;
            let stack = packet_decompose(&plane_from_image(img), depth)?;
            shrink_stack(&stack, shrink)?
        }
    };
    Ok(klt::energy_report(&klt::fit(&stack)?))
}

/// Round-trip helper: decompressed image straight from a compressed one.
pub fn roundtrip(img: &Image, cfg: &CodecConfig) -> Result<(CompressedArtifact, Image)> {
    let artifact = compress(img, cfg)?;
    let recon = decompress(&artifact)?;
    Ok((artifact, recon))
}
