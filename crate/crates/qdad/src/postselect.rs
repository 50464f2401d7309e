//! Spin pre/post-selection: the physical state pairs that realize a given
//! delay-amplitude distribution, the post-selection success probability, and
//! the Cauchy-Schwarz optimum.
//!
//! With pre-selection probabilities `z_m = |a_m|^2` the success probability
//! is `P(z) = [sum_m z_m * sum_m |eta_m|^2 / z_m]^{-1}`, maximized at
//! `|a_m|^2 = C |eta_m|`, `|b_m|^2 = |eta_m| / C`, giving
//! `P_best = 1 / (sum_m |eta_m|)^2`.
//!
//! Amplitudes are stored as (modulus squared, exact phase angle, exact
//! direction) triples. The factorized form keeps the round trip
//! state -> weights exact for real rational weights: the two square roots
//! whose product is |eta_m| never materialize separately.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dad::{Dad, DadSpec, Weights};
use crate::error::{Error, Result};
use crate::precision::{
    bf_div, bf_from_rat, bf_mul, bf_sqrt, crat_norm_sqr, crat_re, rat_sqrt_exact, sum_exact,
    BigComplex, CRat, CxVal, Prec, PrecisionCtx, Rat, ReVal,
};

/// The one owner of the index bridge: storage index `m = 0..=K` holds the
/// spin component `-m` (the non-positive components; positive components are
/// identically zero so that only delayed copies enter the superposition).
pub fn spin_component(m_storage: usize) -> i64 {
    -(m_storage as i64)
}

// ---------------------------------------------------------------------------
// Amplitudes and states
// ---------------------------------------------------------------------------

/// One spin amplitude in factorized form:
/// `amp = sqrt(mod_sq) * e^{i angle} * dir / |dir|`.
///
/// `angle` is an exact angle in radians; `dir` carries the algebraic part of
/// the phase (for post-selection states it is the conjugated weight itself),
/// so reconstructing `eta_m` from a state pair needs no trigonometry when the
/// angles cancel.
#[derive(Clone, Debug)]
pub struct Amp {
    pub mod_sq: ReVal,
    pub angle: Rat,
    pub dir: CxVal,
}

impl Amp {
    fn zero() -> Self {
        Amp {
            mod_sq: ReVal::Exact(Rat::zero()),
            angle: Rat::zero(),
            dir: CxVal::Exact(crat_re(Rat::one())),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.mod_sq {
            ReVal::Exact(r) => r.is_zero(),
            ReVal::Float(x) => x.is_zero(),
        }
    }

    /// Numeric value at precision `p`.
    pub fn to_big(&self, p: Prec) -> BigComplex {
        if self.is_zero() {
            return BigComplex::zero();
        }
        let modulus = bf_sqrt(&self.mod_sq.to_big(p), p);
        let dir = self.dir.to_big(p);
        let dir_unit = dir.scale(&bf_div(&crate::precision::bf_from_rat(&Rat::one(), p), &dir.abs(p), p), p);
        let phase = BigComplex::from_angle(&bf_from_rat(&self.angle, p), p);
        phase.mul(&dir_unit, p).scale(&modulus, p)
    }
}

/// Pre-selection state |a> and post-selection state |b>, stored unnormalized
/// with their norms carried explicitly.
#[derive(Clone, Debug)]
pub struct SpinStates {
    k: u32,
    a: Vec<Amp>,
    b: Vec<Amp>,
    n_a: ReVal,
    n_b: ReVal,
}

impl SpinStates {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn a(&self) -> &[Amp] {
        &self.a
    }

    pub fn b(&self) -> &[Amp] {
        &self.b
    }

    /// N(a) = sum |a_m|^2.
    pub fn n_a(&self) -> &ReVal {
        &self.n_a
    }

    /// N(b) = sum |b_m|^2.
    pub fn n_b(&self) -> &ReVal {
        &self.n_b
    }
}

/// Normalized pre-selection probabilities `z_m = |a_m|^2 / N(a)`.
#[derive(Clone, Debug)]
pub struct SelectionWeights {
    z: Vec<ReVal>,
}

impl SelectionWeights {
    /// Normalize non-negative rational weights onto the simplex.
    pub fn from_exact(raw: Vec<Rat>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty selection weights".into()));
        }
        if raw.iter().any(|z| z.is_negative()) {
            return Err(Error::InvalidParameter("selection weights must be non-negative".into()));
        }
        let total: Rat = raw.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidParameter("selection weights sum to zero".into()));
        }
        Ok(SelectionWeights {
            z: raw.into_iter().map(|z| ReVal::Exact(z / &total)).collect(),
        })
    }

    pub(crate) fn from_floats(z: Vec<ReVal>) -> Self {
        SelectionWeights { z }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn get(&self, m: usize) -> &ReVal {
        &self.z[m]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReVal> {
        self.z.iter()
    }
}

// ---------------------------------------------------------------------------
// Success probability
// ---------------------------------------------------------------------------

fn reval_is_zero(v: &ReVal) -> bool {
    match v {
        ReVal::Exact(r) => r.is_zero(),
        ReVal::Float(x) => x.is_zero(),
    }
}

/// `P(z) = [sum_m z_m * sum_m |eta_m|^2 / z_m]^{-1}`, exact whenever the
/// weights and z are exact rationals (|eta|^2 is rational even for complex
/// rational weights). A zero z at a live weight is a division hazard and is
/// reported as an error.
pub fn success_probability(dad: &Dad, z: &SelectionWeights, ctx: &PrecisionCtx) -> Result<ReVal> {
    if z.len() != dad.len() {
        return Err(Error::InvalidParameter(format!(
            "selection weights have {} entries, distribution has {}",
            z.len(),
            dad.len()
        )));
    }
    for m in 0..dad.len() {
        let eta_zero = match dad.eta(m) {
            CxVal::Exact(w) => w.re.is_zero() && w.im.is_zero(),
            CxVal::Float(w) => w.re.is_zero() && w.im.is_zero(),
        };
        if !eta_zero && reval_is_zero(z.get(m)) {
            return Err(Error::ZeroSelectionWeight { m });
        }
    }
    let all_exact_z = z.iter().all(|v| v.is_exact());
    match dad.eta_exact() {
        Some(eta) if all_exact_z => {
            let z_sum: Rat = z.iter().map(|v| v.as_exact().unwrap().clone()).sum();
            let mut ratio_sum = Rat::zero();
            for (m, w) in eta.iter().enumerate() {
                let zm = z.get(m).as_exact().unwrap();
                if zm.is_zero() {
                    continue; // dead weight, contributes nothing
                }
                ratio_sum += crat_norm_sqr(w) / zm;
            }
            Ok(ReVal::Exact(Rat::one() / (z_sum * ratio_sum)))
        }
        _ => {
            let digits = ctx.digits().max(dad.required_digits());
            let p = Prec::from_digits(digits);
            let eta = dad.eta_big(p);
            let mut z_sum = bf_from_rat(&Rat::zero(), p);
            let mut ratio_sum = bf_from_rat(&Rat::zero(), p);
            for (m, w) in eta.iter().enumerate() {
                let zm = z.get(m).to_big(p);
                z_sum = crate::precision::bf_add(&z_sum, &zm, p);
                if zm.is_zero() {
                    continue;
                }
                ratio_sum = crate::precision::bf_add(&ratio_sum, &bf_div(&w.norm_sqr(p), &zm, p), p);
            }
            let one = bf_from_rat(&Rat::one(), p);
            Ok(ReVal::Float(bf_div(&one, &bf_mul(&z_sum, &ratio_sum, p), p)))
        }
    }
}

/// `P_best = 1 / (sum_m |eta_m|)^2`.
pub fn p_best(dad: &Dad) -> ReVal {
    match dad.abs_sum() {
        ReVal::Exact(s) => ReVal::Exact(Rat::one() / (s * s)),
        ReVal::Float(s) => {
            let p = Prec::from_digits(dad.required_digits());
            let one = bf_from_rat(&Rat::one(), p);
            ReVal::Float(bf_div(&one, &bf_mul(s, s, p), p))
        }
    }
}

// ---------------------------------------------------------------------------
// Optimal states and phase assignment
// ---------------------------------------------------------------------------

/// The maximizing selection: `z_m = |eta_m| / sum|eta|`, states in the
/// N(a) = 1 gauge with zero pre-selection phases and no scenario phase, and
/// the resulting best probability.
pub fn optimal_states(dad: &Dad) -> Result<(SelectionWeights, SpinStates, ReVal)> {
    let states = assign_phases(dad, &Rat::zero(), &vec![Rat::zero(); dad.len()])?;
    let z = match dad.abs_sum() {
        ReVal::Exact(_) => SelectionWeights {
            z: states.a.iter().map(|amp| amp.mod_sq.clone()).collect(),
        },
        ReVal::Float(_) => SelectionWeights::from_floats(
            states.a.iter().map(|amp| amp.mod_sq.clone()).collect(),
        ),
    };
    let best = p_best(dad);
    Ok((z, states, best))
}

/// Build the optimal-modulus state pair realizing `dad` for arbitrary
/// pre-selection phases and a scenario phase angle `kick = omega_L d / p0`
/// per unit spin component: `eta_m = e^{-i m kick} a_m conj(b_m)` holds by
/// construction, with `phase(b_m) = phase(a_m) - phase(eta_m) - m kick`.
pub fn assign_phases(dad: &Dad, kick_angle: &Rat, a_phases: &[Rat]) -> Result<SpinStates> {
    if a_phases.len() != dad.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} pre-selection phases, got {}",
            dad.len(),
            a_phases.len()
        )));
    }
    let some_nonzero = (0..dad.len()).any(|m| !amp_of_eta_is_zero(dad, m));
    if !some_nonzero {
        return Err(Error::Degenerate("distribution has no nonzero weight".into()));
    }
    match (dad.eta_exact(), dad.abs_sum()) {
        (Some(eta), ReVal::Exact(s)) => {
            // real rational weights: everything stays in Q
            let mut a = Vec::with_capacity(eta.len());
            let mut b = Vec::with_capacity(eta.len());
            for (m, w) in eta.iter().enumerate() {
                if w.re.is_zero() && w.im.is_zero() {
                    a.push(Amp::zero());
                    b.push(Amp::zero());
                    continue;
                }
                let abs_w = w.re.abs();
                a.push(Amp {
                    mod_sq: ReVal::Exact(&abs_w / s),
                    angle: a_phases[m].clone(),
                    dir: CxVal::Exact(crat_re(Rat::one())),
                });
                b.push(Amp {
                    mod_sq: ReVal::Exact(&abs_w * s),
                    angle: &a_phases[m] - &(kick_angle * Rat::from_integer(BigInt::from(m))),
                    dir: CxVal::Exact(w.conj()),
                });
            }
            let n_b: Rat = s * s;
            Ok(SpinStates {
                k: dad.k(),
                a,
                b,
                n_a: ReVal::Exact(Rat::one()),
                n_b: ReVal::Exact(n_b),
            })
        }
        _ => {
            // complex (or float-lane) weights: moduli go through floats
            let digits = dad.required_digits();
            let p = Prec::from_digits(digits);
            let s = dad.abs_sum().to_big(p);
            let eta = dad.eta_big(p);
            let mut a = Vec::with_capacity(eta.len());
            let mut b = Vec::with_capacity(eta.len());
            for (m, w) in eta.iter().enumerate() {
                if w.re.is_zero() && w.im.is_zero() {
                    a.push(Amp::zero());
                    b.push(Amp::zero());
                    continue;
                }
                let abs_w = w.abs(p);
                let dir = match dad.eta(m) {
                    CxVal::Exact(we) => CxVal::Exact(we.conj()),
                    CxVal::Float(wf) => CxVal::Float(wf.conj()),
                };
                a.push(Amp {
                    mod_sq: ReVal::Float(bf_div(&abs_w, &s, p)),
                    angle: a_phases[m].clone(),
                    dir: CxVal::Exact(crat_re(Rat::one())),
                });
                b.push(Amp {
                    mod_sq: ReVal::Float(bf_mul(&abs_w, &s, p)),
                    angle: &a_phases[m] - &(kick_angle * Rat::from_integer(BigInt::from(m))),
                    dir,
                });
            }
            Ok(SpinStates {
                k: dad.k(),
                a,
                b,
                n_a: ReVal::Exact(Rat::one()),
                n_b: ReVal::Float(bf_mul(&s, &s, p)),
            })
        }
    }
}

fn amp_of_eta_is_zero(dad: &Dad, m: usize) -> bool {
    match dad.eta(m) {
        CxVal::Exact(w) => w.re.is_zero() && w.im.is_zero(),
        CxVal::Float(w) => w.re.is_zero() && w.im.is_zero(),
    }
}

/// Like [`assign_phases`] but with caller-supplied moduli. The product
/// `|a_m|^2 |b_m|^2` must reproduce `|eta_m|^2` exactly; a mismatch is
/// reported with the offending component.
pub fn assign_phases_with_moduli(
    dad: &Dad,
    kick_angle: &Rat,
    a_mod_sq: &[Rat],
    b_mod_sq: &[Rat],
    a_phases: &[Rat],
) -> Result<SpinStates> {
    let eta = dad.eta_exact().ok_or_else(|| {
        Error::InvalidParameter("explicit moduli require exact-mode weights".into())
    })?;
    if a_mod_sq.len() != eta.len() || b_mod_sq.len() != eta.len() || a_phases.len() != eta.len() {
        return Err(Error::InvalidParameter("modulus/phase vectors must have K+1 entries".into()));
    }
    let mut a = Vec::with_capacity(eta.len());
    let mut b = Vec::with_capacity(eta.len());
    for (m, w) in eta.iter().enumerate() {
        if &a_mod_sq[m] * &b_mod_sq[m] != crat_norm_sqr(w) {
            return Err(Error::ModulusMismatch { m });
        }
        if w.re.is_zero() && w.im.is_zero() {
            a.push(Amp::zero());
            b.push(Amp::zero());
            continue;
        }
        a.push(Amp {
            mod_sq: ReVal::Exact(a_mod_sq[m].clone()),
            angle: a_phases[m].clone(),
            dir: CxVal::Exact(crat_re(Rat::one())),
        });
        b.push(Amp {
            mod_sq: ReVal::Exact(b_mod_sq[m].clone()),
            angle: &a_phases[m] - &(kick_angle * Rat::from_integer(BigInt::from(m))),
            dir: CxVal::Exact(w.conj()),
        });
    }
    Ok(SpinStates {
        k: dad.k(),
        n_a: ReVal::Exact(a_mod_sq.iter().sum()),
        n_b: ReVal::Exact(b_mod_sq.iter().sum()),
        a,
        b,
    })
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

/// Inverse of [`assign_phases`]: rebuild the distribution from a state pair,
/// `eta_m proportional to e^{-i m kick} a_m conj(b_m)`, normalized so the
/// weights sum to one. The `DadSpec` attached to the result carries the
/// reconstructed first moment as its shift. Exact whenever the per-component phase angles cancel and the
/// modulus products are rational squares, which is the case for every pair
/// produced by [`assign_phases`] from real rational weights.
pub fn dad_from_states(
    states: &SpinStates,
    delta_x: &Rat,
    kick_angle: &Rat,
    ctx: &PrecisionCtx,
) -> Result<Dad> {
    let n = states.a.len();
    let mut exact_products: Option<Vec<CRat>> = Some(Vec::with_capacity(n));
    for m in 0..n {
        let am = &states.a[m];
        let bm = &states.b[m];
        if am.is_zero() || bm.is_zero() {
            if let Some(v) = exact_products.as_mut() {
                v.push(crat_re(Rat::zero()));
            }
            continue;
        }
        let angle_total = &am.angle - &bm.angle - kick_angle * Rat::from_integer(BigInt::from(m));
        let exact_parts = match (&am.mod_sq, &bm.mod_sq, &am.dir, &bm.dir) {
            (ReVal::Exact(ma), ReVal::Exact(mb), CxVal::Exact(da), CxVal::Exact(db)) => {
                Some((ma, mb, da, db))
            }
            _ => None,
        };
        match exact_parts {
            Some((ma, mb, da, db)) if angle_total.is_zero() => {
                let dir = da * &db.conj();
                let q = ma * mb / crat_norm_sqr(&dir);
                match rat_sqrt_exact(&q) {
                    Some(root) => {
                        if let Some(v) = exact_products.as_mut() {
                            v.push(&dir * &crat_re(root));
                        }
                    }
                    None => exact_products = None,
                }
            }
            _ => exact_products = None,
        }
        if exact_products.is_none() {
            break;
        }
    }

    if let Some(products) = exact_products {
        let total = sum_exact(&products);
        if total.re.is_zero() && total.im.is_zero() {
            return Err(Error::Degenerate("state products sum to zero".into()));
        }
        if products.iter().all(|w| w.re.is_zero() && w.im.is_zero()) {
            return Err(Error::Degenerate("all state products vanish".into()));
        }
        let eta: Vec<CRat> = products.iter().map(|w| w / &total).collect();
        let alpha = first_moment_exact(&eta, delta_x);
        let spec = DadSpec::new(states.k, delta_x.clone(), alpha)?;
        return Ok(Dad::from_normalized_weights(spec, Weights::Exact(eta)));
    }

    // float route: evaluate the amplitudes numerically
    let digits = ctx.digits().max(PrecisionCtx::MIN_DIGITS);
    let p = Prec::from_digits(digits);
    let mut products = Vec::with_capacity(n);
    let mut any_nonzero = false;
    for m in 0..n {
        let am = &states.a[m];
        let bm = &states.b[m];
        if am.is_zero() || bm.is_zero() {
            products.push(BigComplex::zero());
            continue;
        }
        any_nonzero = true;
        let kick = bf_from_rat(&(-(kick_angle * Rat::from_integer(BigInt::from(m)))), p);
        let phase = BigComplex::from_angle(&kick, p);
        products.push(am.to_big(p).mul(&bm.to_big(p).conj(), p).mul(&phase, p));
    }
    if !any_nonzero {
        return Err(Error::Degenerate("all state products vanish".into()));
    }
    let (total, _) = crate::precision::sum_compensated(&products, digits)?;
    if total.re.is_zero() && total.im.is_zero() {
        return Err(Error::Degenerate("state products sum to zero".into()));
    }
    let eta: Vec<BigComplex> = products.iter().map(|w| w.div(&total, p)).collect();
    let alpha = first_moment_float(&eta, delta_x, p);
    let spec = DadSpec::new(states.k, delta_x.clone(), alpha)?;
    Ok(Dad::from_normalized_weights(spec, Weights::Float { eta, digits }))
}

fn first_moment_exact(eta: &[CRat], delta_x: &Rat) -> CRat {
    let mut acc = crat_re(Rat::zero());
    for (m, w) in eta.iter().enumerate() {
        let node = -(delta_x * Rat::from_integer(BigInt::from(m)));
        acc = &acc + &(w * &crat_re(node));
    }
    acc
}

fn first_moment_float(eta: &[BigComplex], delta_x: &Rat, p: Prec) -> CRat {
    let mut acc = BigComplex::zero();
    for (m, w) in eta.iter().enumerate() {
        let node = bf_from_rat(&-(delta_x * Rat::from_integer(BigInt::from(m))), p);
        acc = acc.add(&w.scale(&node, p), p);
    }
    CRat::new(
        crate::precision::bf_to_rat(&acc.re).unwrap_or_else(Rat::zero),
        crate::precision::bf_to_rat(&acc.im).unwrap_or_else(Rat::zero),
    )
}
