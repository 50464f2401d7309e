//! Quasi-Dirac delay-amplitude distributions (DADs) and the superoscillatory
//! transmission physics they induce.
//!
//! An order-K DAD is a weighted comb of delta functions supported on the K+1
//! nodes `0, -dx, ..., -K dx` whose normalization and first K moments equal
//! those of `delta(x - alpha)`, with the target shift `alpha` allowed anywhere
//! in the complex plane, including far outside the support. The weights
//! alternate and can be astronomically large while summing to unity, so the
//! crate keeps every construction in exact rational arithmetic whenever the
//! inputs are rational, and otherwise works in binary floats with enough
//! decimal digits to survive the cancellations (see [`precision`]).
//!
//! Modules:
//! - [`precision`]: the numeric tower and cancellation-safe summation.
//! - [`dad`]: weight construction (closed form and an independent exact
//!   Vandermonde solver), moments, absolute sums.
//! - [`pulse`]: coordinate-space envelopes, the DAD convolution, distortion.
//! - [`momentum`]: transmission amplitude, superoscillatory windows, spectra.
//! - [`postselect`]: spin pre/post-selection states and success probabilities.
//! - [`scenario`]: physical parameters (Larmor frequency, field width, mean
//!   momentum) mapped onto the dimensionless problem.
//!
//! Grid evaluations are data-parallel via rayon when the default `parallel`
//! feature is enabled; disabling it yields an identical sequential build.

pub mod dad;
pub mod error;
pub mod momentum;
pub mod postselect;
pub mod precision;
pub mod pulse;
pub mod quad;
pub mod scenario;

pub use dad::{eta_closed_form, eta_vandermonde, moment, moment_table, required_digits, Dad, DadSpec};
pub use error::{Error, Result};
pub use precision::{CxVal, Mode, PrecisionCtx, ReVal};

/// Map an iterator of independent jobs over items, in parallel when the
/// `parallel` feature is on. Results keep input order either way.
pub(crate) fn maybe_par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
