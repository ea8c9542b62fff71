use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::MomentResult;
use crate::scalar::Real;

/// Central and lateral peak rates of the double-pulse analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixRates<T> {
    /// `R_c = R(0,0) + R(τ,τ) = 2[(J₂ᶠ)² + J₄ᶠ]`
    pub central: T,
    /// `R_lat = R(0,τ) = (J₂ᶠ)²`
    pub lateral: T,
    /// `R_c / 2R_lat`
    pub ratio: T,
}

/// Rates from raw moments. Works for any exact field (e.g. rationals).
///
/// `ratio` is evaluated as `1 + J₄ᶠ/(J₂ᶠ·J₂ᶠ)`, the same expression the
/// moment computation uses for χ, so `ratio − 1` reproduces χ.
pub fn appendix_rates_from<T: Num + Clone>(j2f: T, j4f: T) -> Result<AppendixRates<T>> {
    if j2f.is_zero() {
        return Err(Error::Degenerate("J2F = 0: no pair emission into the filter".into()));
    }
    let lateral = j2f.clone() * j2f;
    let two = T::one() + T::one();
    let central = two * (lateral.clone() + j4f.clone());
    let ratio = T::one() + j4f / lateral.clone();
    Ok(AppendixRates { central, lateral, ratio })
}

pub fn appendix_rates<T: Real>(moments: &MomentResult<T>) -> Result<AppendixRates<T>> {
    if !(moments.j2f > T::zero()) {
        return Err(Error::Degenerate(format!("J2F = {} is not positive", moments.j2f)));
    }
    appendix_rates_from(moments.j2f, moments.j4f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_limit() {
        let r = appendix_rates_from(1.0, 1.0).unwrap();
        assert_eq!((r.central, r.lateral, r.ratio), (4.0, 1.0, 2.0));
        let r = appendix_rates_from(1.0, 0.0).unwrap();
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn zero_j2f() {
        assert!(matches!(appendix_rates_from(0.0, 1.0), Err(Error::Degenerate(_))));
    }
}
