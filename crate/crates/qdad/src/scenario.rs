//! Physical-parameter front door: Larmor frequency, field-region width, and
//! mean momentum (unit mass) induce the node spacing `dx = omega_L d / p0^2`
//! and the per-component phase `m omega_L d / p0`. This module owns those
//! formulas, the fast-particle validity check, and the arrival-time
//! bookkeeping; everything downstream is dimensionless in (K, beta).

use num_bigint::BigInt;
use num_traits::Signed;

use crate::dad::DadSpec;
use crate::error::{Error, Result};
use crate::precision::{CRat, Rat};
use crate::pulse::GaussianEnvelope;

/// Threshold standing in for "much greater than" in the fast-particle
/// condition `p0^2 / 2 >> K omega_L`; inclusive, and configurable through
/// [`ScenarioParams::validity_check_with_threshold`].
pub const VALIDITY_THRESHOLD: u32 = 20;

/// Physical inputs: Larmor frequency, field width, mean momentum, spin
/// order, and envelope width. All positive; unit particle mass throughout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioParams {
    omega_l: Rat,
    d: Rat,
    p0: Rat,
    k: u32,
    sigma: Rat,
}

impl ScenarioParams {
    pub fn new(omega_l: Rat, d: Rat, p0: Rat, k: u32, sigma: Rat) -> Result<Self> {
        for (name, v) in [("omega_L", &omega_l), ("d", &d), ("p0", &p0), ("sigma", &sigma)] {
            if !v.is_positive() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(ScenarioParams {
            omega_l,
            d,
            p0,
            k,
            sigma,
        })
    }

    pub fn omega_l(&self) -> &Rat {
        &self.omega_l
    }

    pub fn d(&self) -> &Rat {
        &self.d
    }

    pub fn p0(&self) -> &Rat {
        &self.p0
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sigma(&self) -> &Rat {
        &self.sigma
    }

    /// Shift quantum `dx = omega_L d / p0^2`.
    pub fn delta_x(&self) -> Rat {
        &self.omega_l * &self.d / (&self.p0 * &self.p0)
    }

    /// Phase angle `omega_L d / p0` accrued per unit spin component; the
    /// only place physical units enter phases. Passed to the post-selection
    /// layer as-is.
    pub fn kick_angle(&self) -> Rat {
        &self.omega_l * &self.d / &self.p0
    }

    pub fn envelope(&self) -> GaussianEnvelope {
        GaussianEnvelope::new(self.sigma.clone()).expect("positive sigma")
    }

    /// The dimensionless problem induced by these parameters and a shift.
    pub fn to_dadspec(&self, alpha: CRat) -> DadSpec {
        DadSpec::new(self.k, self.delta_x(), alpha).expect("positive spacing")
    }

    pub fn validity_check(&self) -> ValidityReport {
        self.validity_check_with_threshold(&Rat::from_integer(BigInt::from(VALIDITY_THRESHOLD)))
    }

    /// Fast-particle check: `r = (p0^2 / 2) / (K omega_L)` must reach the
    /// threshold. K = 0 has no potential step at all and passes vacuously.
    pub fn validity_check_with_threshold(&self, threshold: &Rat) -> ValidityReport {
        let note = "model assumes reflection off the field edges is negligible and the \
                    envelope propagates without spreading over the interval of interest"
            .to_string();
        if self.k == 0 {
            return ValidityReport {
                ratio: None,
                passes: true,
                threshold: threshold.clone(),
                note,
            };
        }
        let ratio = (&self.p0 * &self.p0) / Rat::from_integer(BigInt::from(2u8))
            / (Rat::from_integer(BigInt::from(self.k)) * &self.omega_l);
        ValidityReport {
            passes: ratio >= *threshold,
            ratio: Some(ratio),
            threshold: threshold.clone(),
            note,
        }
    }

    /// Naive arrival-time bookkeeping for a real shift: the detector delay
    /// `dT = -alpha / p0` and the traversal time `tau = (d - alpha) / p0`
    /// that it suggests. A negative tau flags the regime where that
    /// inference manifestly fails; no further interpretation is computed.
    pub fn arrival_times(&self, alpha: &Rat) -> ArrivalTimes {
        let delta_t = -(alpha / &self.p0);
        let tau = (&self.d - alpha) / &self.p0;
        ArrivalTimes {
            tau_negative: tau.is_negative(),
            delta_t,
            tau,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidityReport {
    /// `(p0^2 / 2) / (K omega_L)`; None for K = 0 (no field coupling).
    pub ratio: Option<Rat>,
    pub passes: bool,
    pub threshold: Rat,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct ArrivalTimes {
    pub delta_t: Rat,
    pub tau: Rat,
    pub tau_negative: bool,
}
