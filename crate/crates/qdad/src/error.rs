use thiserror::Error;

/// Errors surfaced by the library. Precision problems are reported explicitly;
/// no operation silently returns garbage when the working precision cannot
/// support the cancellations involved.
#[derive(Debug, Error)]
pub enum Error {
    #[error("working precision of {got} digits is insufficient, {required} digits required")]
    PrecisionInsufficient { required: u32, got: u32 },

    #[error("floating-point exponent overflow in {op}")]
    ExponentOverflow { op: &'static str },

    #[error("selection weight z[{m}] is zero but eta[{m}] is nonzero")]
    ZeroSelectionWeight { m: usize },

    #[error("modulus mismatch at component {m}: |a_m||b_m| does not reproduce |eta_m|")]
    ModulusMismatch { m: usize },

    #[error("degenerate distribution: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
