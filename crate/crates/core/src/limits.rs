use std::env;

use crate::error::{Error, Result};
use crate::spin::SpinValue;

pub const ENV_MAX_DIM: &str = "SPINCHAIN_MAX_DIM";
pub const ENV_MAX_VECTOR_DIM: &str = "SPINCHAIN_MAX_VECTOR_DIM";
pub const ENV_MAX_STATE_DIM: &str = "SPINCHAIN_MAX_STATE_DIM";
pub const ENV_MAX_TWICE_SPIN: &str = "SPINCHAIN_MAX_TWICE_SPIN";

/// Size budgets for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest full Hilbert-space dimension that will be diagonalized.
    pub max_dim: usize,
    /// Largest dimension for which eigenvectors are computed.
    pub max_vector_dim: usize,
    /// Largest dimension for which a dense full thermal state is formed.
    pub max_state_dim: usize,
    /// Largest supported `2s`.
    pub max_twice_spin: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_dim: 20_000, max_vector_dim: 8192, max_state_dim: 4096, max_twice_spin: 5 }
    }
}

impl Limits {
    /// Defaults overridden by any `SPINCHAIN_MAX_*` environment variables.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        let read = |name: &str| env::var(name).ok().and_then(|v| v.trim().parse::<usize>().ok());
        if let Some(v) = read(ENV_MAX_DIM) {
            limits.max_dim = v;
        }
        if let Some(v) = read(ENV_MAX_VECTOR_DIM) {
            limits.max_vector_dim = v;
        }
        if let Some(v) = read(ENV_MAX_STATE_DIM) {
            limits.max_state_dim = v;
        }
        if let Some(v) = read(ENV_MAX_TWICE_SPIN) {
            limits.max_twice_spin = v as u32;
        }
        limits
    }

    pub fn check_spin(&self, spin: SpinValue) -> Result<()> {
        if spin.twice() > self.max_twice_spin {
            return Err(Error::InvalidSpin {
                input: spin.to_string(),
                reason: format!(
                    "above the configured maximum s = {}",
                    SpinValue::from_twice(self.max_twice_spin.max(1)).map(|s| s.to_string()).unwrap_or_default()
                ),
            });
        }
        Ok(())
    }

    pub(crate) fn check_dim(dimension: u128, budget: usize) -> Result<usize> {
        if dimension > budget as u128 {
            Err(Error::TooLarge { dimension, budget })
        } else {
            Ok(dimension as usize)
        }
    }
}
