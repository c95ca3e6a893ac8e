//! Crate-wide error type.

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid pgm: {0}")]
    InvalidPgm(String),

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("block size {block} does not divide image dimensions {width}x{height}")]
    NotDivisible {
        width: usize,
        height: usize,
        block: usize,
    },

    #[error("plane dimensions {width}x{height} are not even")]
    OddDimensions { width: usize, height: usize },

    #[error("plane has no coefficients")]
    EmptyPlane,

    #[error("wrong block count: expected {expected}, got {got}")]
    WrongBlockCount { expected: usize, got: usize },

    #[error("scan cell ({row},{col}) outside a grid with {cols} columns")]
    IndexOutOfRange { row: usize, col: usize, cols: usize },

    #[error("morton scan needs a square power-of-two grid, got {rows}x{cols}")]
    GridNotPowerOfTwo { rows: usize, cols: usize },

    #[error("stack is in {got:?} order, expected {expected:?}")]
    WrongScanOrder {
        expected: crate::scan::ScanKind,
        got: crate::scan::ScanKind,
    },

    #[error("klt needs at least 2 blocks, got {got}")]
    TooFewBlocks { got: usize },

    #[error("kept channel count {kept} outside [1, {n}]")]
    KeptOutOfRange { kept: usize, n: usize },

    #[error("jacobi eigensolver did not converge")]
    EigenNotConverged,

    #[error("quantizer step must be positive and finite, got {0}")]
    QuantStep(f64),

    #[error("quantized symbol {0} exceeds the alphabet bound (step too small)")]
    SymbolRange(i64),

    #[error("corrupt code table: {0}")]
    CorruptTable(String),

    #[error("bit stream ended prematurely")]
    BitUnderrun,

    #[error("bad container magic")]
    BadMagic,

    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),

    #[error("container truncated")]
    Truncated,

    #[error("container checksum mismatch")]
    ChecksumMismatch,

    #[error("invalid container field: {0}")]
    Container(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mse must be nonnegative, got {0}")]
    NegativeMse(f64),
}
