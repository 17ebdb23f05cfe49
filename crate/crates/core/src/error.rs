use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// Validation failures (zero counts, malformed zero files, imaginary
/// residues) are kept distinct from plain argument errors so the CLI can
/// map them to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sieve limit {requested} exceeds configured ceiling {ceiling}")]
    SieveLimit { requested: u64, ceiling: u64 },

    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(u64, u64),

    #[error("residue {residue} is not valid for modulus {modulus}")]
    BadResidue { residue: u64, modulus: u64 },

    #[error("L(s,chi) has a pole at s = 1 for the principal character")]
    PoleAtOne,

    #[error("evaluation accuracy target {target:.3e} not reachable (bound {bound:.3e}) at Im(s) = {imag:.3}")]
    AccuracyCeiling { target: f64, bound: f64, imag: f64 },

    #[error(
        "zero count {found} (|gamma| <= {t}) outside smooth-count window {expected:.1} +/- {window:.1}; widest gap ({gap_lo:.6}, {gap_hi:.6})"
    )]
    ZeroCountMismatch {
        found: usize,
        t: f64,
        expected: f64,
        window: f64,
        gap_lo: f64,
        gap_hi: f64,
    },

    #[error("zero data file {path}: {reason}")]
    ZeroFile { path: String, reason: String },

    #[error("imaginary residue {imag:.3e} exceeds {limit:.3e} of value {value:.6e}; pairing bug or asymmetric zero data")]
    ImaginaryResidue { imag: f64, value: f64, limit: f64 },

    #[error("gamma function evaluated at nonpositive integer {0}")]
    GammaPole(f64),

    #[error("missing zero data for character {label} mod {modulus}")]
    MissingZeros { modulus: u64, label: u64 },

    #[error("zero sets do not share a common truncation height: {0} vs {1}")]
    MixedTruncation(f64, f64),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors a CLI should report as validation failures (exit 3)
    /// rather than configuration mistakes (exit 2).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ZeroCountMismatch { .. }
                | Error::ZeroFile { .. }
                | Error::ImaginaryResidue { .. }
                | Error::AccuracyCeiling { .. }
        )
    }
}
