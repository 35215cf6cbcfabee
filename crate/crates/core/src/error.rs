use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every computation in the crate.
///
/// Variant names are stable: the experiment runner writes them into run
/// manifests.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),
    #[error("operation requires a translation-invariant chain but disorder is present")]
    DisorderPresent,
    #[error("chain has {cells} cells but hopping range {alpha} needs at least {}", alpha + 1)]
    SpecTooSmall { cells: usize, alpha: usize },
    #[error("couplings v = {v}, w = {w} have v*w <= 0; classified numerically as {class:?}")]
    UnsupportedCouplings {
        v: f64,
        w: f64,
        class: crate::model::PtClass,
    },
    #[error("matrix is defective or too close to an exceptional point (mode condition {condition:.3e})")]
    DefectiveMatrix { condition: f64 },
    #[error("half filling is ambiguous: {0}")]
    AmbiguousFilling(String),
    #[error("winding number undefined: {0}")]
    GaplessWinding(String),
    #[error("Zak phase did not converge (refinement change {change:.3e} at n_k = {n_k})")]
    GridTooCoarse { change: f64, n_k: usize },
    #[error("matrix dimension {0} is not a whole number of cells")]
    OddDimension(usize),
    #[error("correlation spectrum contains {0} unpaired eigenvalue(s)")]
    UnpairedMode(usize),
    #[error("correlation spectrum has {0} residual PH pair(s); use the regularized prescription")]
    ResidualNeedsRegularized(usize),
    #[error("correlation eigenvalue {0} lies at 0 or 1; entanglement energy diverges")]
    DegenerateEigenvalue(String),
    #[error("fit needs at least {needed} points, have {have}")]
    InsufficientPoints { needed: usize, have: usize },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("inter-cell coupling w vanishes; edge equation is degenerate")]
    DegenerateW,
    #[error("m1 = {0} > 0 gives only the extraneous root of the squared interface equation")]
    ExtraneousRoot(f64),
    #[error("m1 = 0: no interface bound state")]
    NoBoundState,
    #[error("no decaying root |beta| < 1 on the {0} side")]
    NoRootInDisk(&'static str),
    #[error("no localized interface mode (best inverse participation ratio {ipr:.3e}, threshold {threshold:.3e})")]
    NoLocalizedMode { ipr: f64, threshold: f64 },
    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable identifier of the variant, used in manifests.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::DisorderPresent => "DisorderPresent",
            Error::SpecTooSmall { .. } => "SpecTooSmall",
            Error::UnsupportedCouplings { .. } => "UnsupportedCouplings",
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::AmbiguousFilling(_) => "AmbiguousFilling",
            Error::GaplessWinding(_) => "GaplessWinding",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::OddDimension(_) => "OddDimension",
            Error::UnpairedMode(_) => "UnpairedMode",
            Error::ResidualNeedsRegularized(_) => "ResidualNeedsRegularized",
            Error::DegenerateEigenvalue(_) => "DegenerateEigenvalue",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DegenerateW => "DegenerateW",
            Error::ExtraneousRoot(_) => "ExtraneousRoot",
            Error::NoBoundState => "NoBoundState",
            Error::NoRootInDisk(_) => "NoRootInDisk",
            Error::NoLocalizedMode { .. } => "NoLocalizedMode",
            Error::Realization { source, .. } => source.name(),
        }
    }
}
