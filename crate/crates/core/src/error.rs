use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite input to {0}")]
    NonFinite(&'static str),

    #[error("invalid saturation bounds: u_min ({u_min}) must be < u_max ({u_max})")]
    InvalidBounds { u_min: f64, u_max: f64 },

    #[error("relative metric undefined for a zero reference; use the absolute variant")]
    DegenerateReference,

    #[error("kernel matrix not positive definite after jitter escalation to {jitter:e}")]
    Conditioning { jitter: f64 },

    #[error("certification rejected {attempts} consecutive samples; the gain box looks infeasible")]
    InfeasibleDomain { attempts: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}
