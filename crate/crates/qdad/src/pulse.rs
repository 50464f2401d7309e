//! Coordinate-space side: the free Gaussian envelope, its convolution with a
//! quasi-Dirac distribution (the transmitted envelope), the shifted target it
//! is meant to approximate, and a scalar distortion metric.
//!
//! The transmitted envelope in the comoving frame is
//!
//! ```text
//! G~(X) = sum_{m=0}^{K} eta_m G(X + m dx)
//! ```
//!
//! a sum whose terms can reach 10^40 while the value stays O(1), hence the
//! compensated summation and the working-precision preconditions. The carrier
//! wave and global phase are never sampled here; they cancel in every
//! reported quantity and live symbolically in the scenario/postselect layer.

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::dad::{Dad, DadSpec};
use crate::error::{Error, Result};
use crate::precision::{
    bf_div, bf_exp, bf_from_rat, bf_mul, bf_pi, bf_sqrt, BigComplex, CRat, Prec, PrecisionCtx, Rat,
};
use crate::quad;

/// Free-pulse envelope `G(X) = (2 / (pi sigma^2))^{1/4} exp(-X^2 / sigma^2)`,
/// entire in X, with unit L2 norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianEnvelope {
    sigma: Rat,
}

impl GaussianEnvelope {
    pub fn new(sigma: Rat) -> Result<Self> {
        if !sigma.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "envelope width must be positive, got {sigma}"
            )));
        }
        Ok(GaussianEnvelope { sigma })
    }

    pub fn sigma(&self) -> &Rat {
        &self.sigma
    }

    /// Peak amplitude `(2 / (pi sigma^2))^{1/4}`.
    pub fn amplitude(&self, digits: u32) -> BigFloat {
        let p = Prec::from_digits(digits);
        let sig_sq = bf_from_rat(&(&self.sigma * &self.sigma), p);
        let two = BigFloat::from_i8(2, p.bits());
        let q = bf_div(&two, &bf_mul(&bf_pi(p), &sig_sq, p), p);
        bf_sqrt(&bf_sqrt(&q, p), p)
    }

    /// Evaluate at a complex coordinate (the analytic continuation is used
    /// for complex target shifts).
    pub fn eval(&self, x: &BigComplex, digits: u32) -> BigComplex {
        let p = Prec::from_digits(digits);
        let inv_sig_sq = bf_from_rat(&(&self.sigma * &self.sigma), p);
        let arg = x.mul(x, p);
        let arg = BigComplex {
            re: bf_div(&arg.re, &inv_sig_sq, p).neg(),
            im: bf_div(&arg.im, &inv_sig_sq, p).neg(),
        };
        arg.exp(p).scale(&self.amplitude(digits), p)
    }

    /// Plain f64 evaluation; an independent route used by quadrature checks.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let sigma = self.sigma.to_f64().unwrap_or(f64::NAN);
        let amp = (2.0 / (std::f64::consts::PI * sigma * sigma)).powf(0.25);
        amp * (-x * x / (sigma * sigma)).exp()
    }
}

/// Target of the construction: the freely propagating envelope translated by
/// `alpha`, `G(X - alpha)`, complex-analytic in the shift.
pub fn target_envelope(env: &GaussianEnvelope, alpha: &CRat, x: &Rat, digits: u32) -> BigComplex {
    let p = Prec::from_digits(digits);
    let arg = CRat::new(x - &alpha.re, -alpha.im.clone());
    env.eval(&BigComplex::from_crat(&arg, p), digits)
}

/// Display normalization of the transmitted envelope.
///
/// Under optimal post-selection the Eq-style state normalization
/// `1/sqrt(N(a) N(b))` equals `sqrt(P_best)` identically, so rescaling that
/// physical envelope by `1/sqrt(P_best)` reproduces the bare weighted sum.
/// Both variants therefore evaluate to the bare sum; the scaled variant is
/// the one whose reports carry `P_best` alongside the curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    BestProbabilityScaled,
}

/// A transmitted pulse: distribution, free envelope, and normalization.
#[derive(Clone, Debug)]
pub struct TransmittedPulse {
    pub dad: Dad,
    pub envelope: GaussianEnvelope,
    pub normalization: Normalization,
}

impl TransmittedPulse {
    pub fn new(dad: Dad, envelope: GaussianEnvelope, normalization: Normalization) -> Self {
        TransmittedPulse {
            dad,
            envelope,
            normalization,
        }
    }

    /// Precompute the per-node factors and return a reusable point evaluator.
    /// Errors if the context cannot supply the required working precision.
    pub fn evaluator(&self, ctx: &PrecisionCtx) -> Result<PulseEvaluator> {
        let digits = ctx.working_digits(self.dad.required_digits())?;
        let p = Prec::from_digits(digits);
        let eta = self.dad.eta_big(p);
        PulseEvaluator::with_weights(eta, self.dad.spec(), &self.envelope, digits)
    }
}

/// Point evaluator for `sum_m eta_m G(X + m dx)` with the Gaussian factored
/// as `G(X + m dx) = A e^{-X^2/s^2} r(X)^m t_m`, so each point costs two
/// complex exponentials regardless of K. Immutable and safe to share across
/// threads.
pub struct PulseEvaluator {
    p: Prec,
    digits: u32,
    /// eta_m * A * exp(-(m dx)^2 / sigma^2)
    scaled_weights: Vec<BigComplex>,
    inv_sig_sq: BigFloat,
    two_dx_over_sig_sq: BigFloat,
}

impl PulseEvaluator {
    pub(crate) fn with_weights(
        eta: Vec<BigComplex>,
        spec: &DadSpec,
        env: &GaussianEnvelope,
        digits: u32,
    ) -> Result<PulseEvaluator> {
        let p = Prec::from_digits(digits);
        let sig_sq = env.sigma() * env.sigma();
        let amp = env.amplitude(digits);
        let scaled_weights = eta
            .into_iter()
            .enumerate()
            .map(|(m, w)| {
                let m_rat = Rat::from_integer(BigInt::from(m));
                let node_sq = &m_rat * &m_rat * spec.delta_x() * spec.delta_x();
                let t = bf_exp(&bf_from_rat(&(-node_sq / &sig_sq), p), p);
                w.scale(&bf_mul(&amp, &t, p), p)
            })
            .collect();
        Ok(PulseEvaluator {
            p,
            digits,
            scaled_weights,
            inv_sig_sq: bf_from_rat(&(Rat::from_integer(BigInt::from(1)) / &sig_sq), p),
            two_dx_over_sig_sq: bf_from_rat(&(Rat::from_integer(BigInt::from(2)) * spec.delta_x() / sig_sq), p),
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Transmitted envelope at X, with the compensated-summation error bound.
    pub fn eval(&self, x: &BigComplex) -> Result<(BigComplex, BigFloat)> {
        let p = self.p;
        // b = e^{-X^2 / s^2}
        let x_sq = x.mul(x, p);
        let b = BigComplex {
            re: bf_mul(&x_sq.re, &self.inv_sig_sq, p).neg(),
            im: bf_mul(&x_sq.im, &self.inv_sig_sq, p).neg(),
        }
        .exp(p);
        // r = e^{-2 X dx / s^2}
        let r = BigComplex {
            re: bf_mul(&x.re, &self.two_dx_over_sig_sq, p).neg(),
            im: bf_mul(&x.im, &self.two_dx_over_sig_sq, p).neg(),
        }
        .exp(p);
        let mut node_factor = b;
        let mut terms = Vec::with_capacity(self.scaled_weights.len());
        for (m, w) in self.scaled_weights.iter().enumerate() {
            if m > 0 {
                node_factor = node_factor.mul(&r, p);
            }
            terms.push(w.mul(&node_factor, p));
        }
        crate::precision::sum_compensated(&terms, self.digits)
    }

    pub fn eval_real(&self, x: &Rat) -> Result<(BigComplex, BigFloat)> {
        self.eval(&BigComplex::new(bf_from_rat(x, self.p), BigFloat::from_i8(0, 64)))
    }
}

/// Transmitted envelope at a single coordinate. For grids prefer
/// [`eval_grid`], which reuses the evaluator and parallelizes.
pub fn transmitted_envelope(pulse: &TransmittedPulse, x: &BigComplex, ctx: &PrecisionCtx) -> Result<BigComplex> {
    Ok(pulse.evaluator(ctx)?.eval(x)?.0)
}

/// Evaluate the transmitted envelope over a grid of real coordinates.
/// Points are independent; with the `parallel` feature this maps over a
/// thread pool, and results are identical to the sequential order.
pub fn eval_grid(pulse: &TransmittedPulse, xs: &[Rat], ctx: &PrecisionCtx) -> Result<Vec<(BigComplex, BigFloat)>> {
    let ev = pulse.evaluator(ctx)?;
    let out = crate::maybe_par_map(xs, |x| ev.eval_real(x));
    out.into_iter().collect()
}

/// Default evaluation grid: `n` uniform points covering the distribution's
/// support and both pulse locations, `[min(-K dx, Re alpha) - 5 sigma,
/// max(0, Re alpha) + 5 sigma]`.
pub fn default_grid(spec: &DadSpec, env: &GaussianEnvelope, n: usize) -> Vec<Rat> {
    let (support_lo, support_hi) = spec.support();
    let five_sigma = Rat::from_integer(BigInt::from(5)) * env.sigma();
    let lo = support_lo.min(spec.alpha().re.clone()) - &five_sigma;
    let hi = support_hi.max(spec.alpha().re.clone()) + &five_sigma;
    linspace(&lo, &hi, n)
}

pub fn linspace(lo: &Rat, hi: &Rat, n: usize) -> Vec<Rat> {
    if n <= 1 {
        return vec![lo.clone()];
    }
    let step = (hi - lo) / Rat::from_integer(BigInt::from(n as u64 - 1));
    (0..n).map(|i| lo + &step * Rat::from_integer(BigInt::from(i as u64))).collect()
}

/// Relative L2 distance between the (display-normalized) transmitted envelope
/// and the shifted target over `[Re alpha - 5 sigma, Re alpha + 5 sigma]`.
/// The free envelope has unit norm, so no further normalization is applied.
pub fn distortion(pulse: &TransmittedPulse, ctx: &PrecisionCtx) -> Result<f64> {
    const QUAD_TOL: f64 = 1e-10;
    let ev = pulse.evaluator(ctx)?;
    let digits = ev.digits();
    let p = Prec::from_digits(digits);
    let spec = pulse.dad.spec();
    let five_sigma = Rat::from_integer(BigInt::from(5)) * pulse.envelope.sigma();
    let lo = (&spec.alpha().re - &five_sigma).to_f64().unwrap();
    let hi = (&spec.alpha().re + &five_sigma).to_f64().unwrap();
    let alpha = spec.alpha().clone();
    let env = pulse.envelope.clone();
    let integrand = |x: f64| -> f64 {
        let xb = BigComplex::from_f64s(x, 0.0, p);
        let (got, _) = ev.eval(&xb).expect("finite envelope term");
        let arg = BigComplex::from_crat(&CRat::new(Rat::zero() - &alpha.re, -alpha.im.clone()), p)
            .add(&xb, p);
        let want = env.eval(&arg, digits);
        let diff = got.sub(&want, p);
        crate::precision::bf_f64(&diff.norm_sqr(p))
    };
    let r = quad::integrate(integrand, lo, hi, QUAD_TOL);
    Ok(r.value.max(0.0).sqrt())
}
