//! Provable-security bounds for swap-or-not, and round-count planning.
//!
//! With `b = (q + N) / 2N`:
//!
//! * NCPA, plain or tweaked, `r` rounds: `2 N^{3/2} / (r + 2) * b^{r/2 + 1}`
//! * CCA, `R` total rounds (even): `8 N^{3/2} / (R + 4) * b^{R/4 + 1}`
//! * tweakable CCA, `R` total rounds (even): `8 N^{3/4} / sqrt(R + 4) * b^{(R + 4)/8}`
//! * Thorp shuffle with `r` passes on `N = 2^n` points, for comparison:
//!   `(2q/r + 1) (4nq/N)^r`
//!
//! All values are evaluated as natural logarithms in 256-bit binary floating
//! point (about 77 decimal digits) and clamped to `[0, 1]` only at the end.
//! The CCA forms are two NCPA bounds at half the rounds, so
//! `cca(N, R, q) = 2 ncpa(N, R/2, q)` and
//! `cca_tweak(N, R, q) = 4 sqrt(ncpa(N, R/2, q))` hold on the raw values.
//!
//! Rough guidance: about `6 lg N` rounds are needed before the CCA bound
//! becomes meaningful, after which it decays exponentially in the rounds.

use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;

use crate::cipher::MAX_ROUNDS;
use crate::error::{Error, Result};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Adversary model a bound is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    NcpaPlain,
    CcaPlain,
    NcpaTweak,
    CcaTweak,
    /// Thorp shuffle CCA bound; the round parameter counts passes.
    ThorpCca,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::NcpaPlain,
        Model::CcaPlain,
        Model::NcpaTweak,
        Model::CcaTweak,
        Model::ThorpCca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::NcpaPlain => "ncpa",
            Model::CcaPlain => "cca",
            Model::NcpaTweak => "ncpa-tweak",
            Model::CcaTweak => "cca-tweak",
            Model::ThorpCca => "thorp",
        }
    }

    /// Whether the round parameter is a total over a cipher and its inverse,
    /// and so must be even.
    pub fn is_cca_swap_or_not(self) -> bool {
        matches!(self, Model::CcaPlain | Model::CcaTweak)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown model {s:?}; expected one of ncpa, cca, ncpa-tweak, cca-tweak, thorp"
                ))
            })
    }
}

/// An advantage bound, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advantage {
    value: f64,
    raw_log10: f64,
}

impl Advantage {
    fn from_ln(ln_raw: &BigFloat, cc: &mut Consts) -> Self {
        let raw_log10 = to_f64(&ln_raw.div(&cc.ln_10(PREC, RM), PREC, RM), cc);
        let value = if ln_raw.is_positive() {
            1.0
        } else {
            to_f64(&ln_raw.exp(PREC, RM, cc), cc)
        };
        Self { value, raw_log10 }
    }

    fn zero() -> Self {
        Self {
            value: 0.0,
            raw_log10: f64::NEG_INFINITY,
        }
    }

    /// The clamped bound. Underflows to 0 below about `1e-308`; see
    /// [`Advantage::raw_log10`] for the exact magnitude.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `log10` of the unclamped expression.
    pub fn raw_log10(&self) -> f64 {
        self.raw_log10
    }

    /// The unclamped expression. May overflow to infinity or underflow to 0.
    pub fn raw(&self) -> f64 {
        10f64.powf(self.raw_log10)
    }

    /// True when the bound says nothing (the raw expression is at least 1).
    pub fn is_vacuous(&self) -> bool {
        self.raw_log10 >= 0.0
    }

    /// Six significant digits in scientific notation, e.g. `2.23952e-11`.
    pub fn to_sci_string(&self) -> String {
        if self.value >= 1e-300 || self.value == 0.0 && self.raw_log10 == f64::NEG_INFINITY {
            return format!("{:.5e}", self.value);
        }
        let mut exp = self.raw_log10.floor();
        let mut mant = 10f64.powf(self.raw_log10 - exp);
        if format!("{mant:.5}").starts_with("10") {
            mant /= 10.0;
            exp += 1.0;
        }
        format!("{mant:.5}e{}", exp as i64)
    }
}

impl fmt::Display for Advantage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci_string())
    }
}

/// `(N, rounds, q, model)`. For CCA models `rounds` is the total round count
/// `R`; for the Thorp model it is the number of passes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundQuery {
    pub n: BigUint,
    pub rounds: u32,
    pub q: BigUint,
    pub model: Model,
}

impl BoundQuery {
    pub fn new(n: BigUint, rounds: u32, q: BigUint, model: Model) -> Self {
        Self {
            n,
            rounds,
            q,
            model,
        }
    }

    pub fn evaluate(&self) -> Result<Advantage> {
        evaluate(&self.n, self.rounds, &self.q, self.model)
    }

    /// One CSV row, `N,rounds,q,model,advantage`.
    pub fn csv_row(&self, adv: &Advantage) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.rounds, self.q, self.model, adv
        )
    }
}

pub const CSV_HEADER: &str = "N,rounds,q,model,advantage";

pub fn evaluate(n: &BigUint, rounds: u32, q: &BigUint, model: Model) -> Result<Advantage> {
    let mut cc = consts();
    if model == Model::ThorpCca && *q == BigUint::from(0u8) {
        check_thorp(n, rounds)?;
        return Ok(Advantage::zero());
    }
    let ln = ln_bound(n, rounds, q, model, &mut cc)?;
    Ok(Advantage::from_ln(&ln, &mut cc))
}

/// NCPA bound after `rounds` rounds. The tweakable cipher has the same bound.
pub fn ncpa_bound(n: &BigUint, rounds: u32, q: &BigUint) -> Result<Advantage> {
    evaluate(n, rounds, q, Model::NcpaPlain)
}

/// CCA bound for `total_rounds` (even) rounds.
pub fn cca_bound(n: &BigUint, total_rounds: u32, q: &BigUint) -> Result<Advantage> {
    evaluate(n, total_rounds, q, Model::CcaPlain)
}

/// Tweakable CCA bound for `total_rounds` (even) rounds.
pub fn cca_tweak_bound(n: &BigUint, total_rounds: u32, q: &BigUint) -> Result<Advantage> {
    evaluate(n, total_rounds, q, Model::CcaTweak)
}

/// Thorp-shuffle CCA bound with `passes` passes over `N = 2^n` points.
pub fn thorp_bound(n: &BigUint, passes: u32, q: &BigUint) -> Result<Advantage> {
    evaluate(n, passes, q, Model::ThorpCca)
}

fn consts() -> Consts {
    Consts::new().expect("astro-float constants cache")
}

fn big(v: &BigUint, cc: &mut Consts) -> BigFloat {
    BigFloat::parse(&v.to_str_radix(10), Radix::Dec, PREC, RM, cc)
}

fn small(v: u64) -> BigFloat {
    BigFloat::from_u64(v, PREC)
}

fn to_f64(x: &BigFloat, cc: &mut Consts) -> f64 {
    let s = x
        .format(Radix::Dec, RM, cc)
        .expect("finite value formats");
    s.parse().expect("astro-float decimal output parses as f64")
}

fn check_thorp(n: &BigUint, passes: u32) -> Result<u32> {
    if passes == 0 {
        return Err(Error::Parameter("pass count must be at least 1".into()));
    }
    if n.count_ones() != 1 || n.bits() < 2 {
        return Err(Error::Parameter(format!(
            "Thorp bound needs N a power of two >= 2, got {n}"
        )));
    }
    Ok((n.bits() - 1) as u32)
}

fn check_common(n: &BigUint, rounds: u32, q: &BigUint, model: Model) -> Result<()> {
    if *n < BigUint::from(2u8) {
        return Err(Error::Parameter(format!("N must be at least 2, got {n}")));
    }
    if *q < BigUint::from(1u8) {
        return Err(Error::Parameter("q must be at least 1".into()));
    }
    if model != Model::ThorpCca && q > n {
        return Err(Error::Parameter(format!(
            "q = {q} exceeds N = {n}; the bound needs 1 <= q <= N"
        )));
    }
    if rounds == 0 {
        return Err(Error::Parameter("round count must be at least 1".into()));
    }
    if model.is_cca_swap_or_not() && rounds % 2 == 1 {
        return Err(Error::Parameter(format!(
            "CCA bounds are stated for an even total round count; use {} instead of {rounds}",
            rounds as u64 + 1
        )));
    }
    Ok(())
}

/// Natural log of the unclamped bound.
fn ln_bound(n: &BigUint, rounds: u32, q: &BigUint, model: Model, cc: &mut Consts) -> Result<BigFloat> {
    check_common(n, rounds, q, model)?;

    if model == Model::ThorpCca {
        let lg_n = check_thorp(n, rounds)?;
        let r = small(rounds as u64);
        let qf = big(q, cc);
        // (2q/r + 1)
        let lead = qf
            .mul(&small(2), PREC, RM)
            .div(&r, PREC, RM)
            .add(&small(1), PREC, RM);
        // 4nq/N
        let base = qf
            .mul(&small(4 * lg_n as u64), PREC, RM)
            .div(&big(n, cc), PREC, RM);
        let ln = lead
            .ln(PREC, RM, cc)
            .add(&r.mul(&base.ln(PREC, RM, cc), PREC, RM), PREC, RM);
        return Ok(ln);
    }

    let nf = big(n, cc);
    let ln_n = nf.ln(PREC, RM, cc);
    let ln_base = big(&(q + n), cc)
        .div(&nf.mul(&small(2), PREC, RM), PREC, RM)
        .ln(PREC, RM, cc);
    let rf = small(rounds as u64);
    let half = BigFloat::from_f64(0.5, PREC);

    // ln(coef) + n_pow * ln N - ln(denominator) + exponent * ln b
    let (coef, n_pow, ln_den, exponent) = match model {
        Model::NcpaPlain | Model::NcpaTweak => (
            2,
            BigFloat::from_f64(1.5, PREC),
            rf.add(&small(2), PREC, RM).ln(PREC, RM, cc),
            rf.mul(&half, PREC, RM).add(&small(1), PREC, RM),
        ),
        Model::CcaPlain => (
            8,
            BigFloat::from_f64(1.5, PREC),
            rf.add(&small(4), PREC, RM).ln(PREC, RM, cc),
            rf.div(&small(4), PREC, RM).add(&small(1), PREC, RM),
        ),
        Model::CcaTweak => (
            8,
            BigFloat::from_f64(0.75, PREC),
            rf.add(&small(4), PREC, RM)
                .ln(PREC, RM, cc)
                .mul(&half, PREC, RM),
            rf.add(&small(4), PREC, RM).div(&small(8), PREC, RM),
        ),
        Model::ThorpCca => unreachable!(),
    };
    Ok(small(coef)
        .ln(PREC, RM, cc)
        .add(&n_pow.mul(&ln_n, PREC, RM), PREC, RM)
        .sub(&ln_den, PREC, RM)
        .add(&exponent.mul(&ln_base, PREC, RM), PREC, RM))
}

/// The smallest round parameter whose bound is at most `target`.
///
/// For CCA models the result is the smallest even total `R`; for NCPA models
/// the smallest `r`; for the Thorp model the smallest number of passes. The
/// search relies on each bound being nonincreasing in its round parameter.
pub fn min_rounds(n: &BigUint, q: &BigUint, target: f64, model: Model) -> Result<u32> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Parameter(format!(
            "target advantage must lie in (0, 1), got {target}"
        )));
    }
    let mut cc = consts();
    let ln_target = BigFloat::from_f64(target, PREC).ln(PREC, RM, &mut cc);

    // Search over k, where the round parameter is step * k.
    let step: u32 = if model.is_cca_swap_or_not() { 2 } else { 1 };
    let max_k: u32 = match model {
        Model::ThorpCca => {
            let lg_n = check_thorp(n, 1)?;
            (MAX_ROUNDS as u32 / (4 * lg_n - 2).max(1)).max(1)
        }
        _ => MAX_ROUNDS as u32 / step,
    };

    let mut meets = |k: u32| -> Result<bool> {
        let ln = ln_bound(n, k * step, q, model, &mut cc)?;
        Ok(ln.cmp(&ln_target).map_or(false, |c| c <= 0))
    };

    if !meets(max_k)? {
        return Err(Error::CapExceeded {
            cap: max_k * step,
        });
    }
    // Doubling to bracket, then bisection on (lo, hi].
    let mut lo = 0u32;
    let mut hi = 1u32;
    while !meets(hi)? {
        lo = hi;
        hi = (hi * 2).min(max_k);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u128) -> BigUint {
        BigUint::from(v)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn tiny_domain_is_clamped() {
        let a = ncpa_bound(&b(2), 1, &b(1)).unwrap();
        assert_eq!(a.value(), 1.0);
        assert!(rel(a.raw(), 1.224744871391589) < 1e-12);
        assert!(a.is_vacuous());
    }

    #[test]
    fn q_equal_n_drops_the_exponent() {
        let n = 1u128 << 20;
        let a = ncpa_bound(&b(n), 1000, &b(n)).unwrap();
        let expected = 2.0 * (n as f64).powf(1.5) / 1002.0;
        assert!(rel(a.raw(), expected) < 1e-12);
        assert_eq!(a.value(), 1.0);
        let t = cca_tweak_bound(&b(n), 1000, &b(n)).unwrap();
        assert!(rel(t.raw(), 8.0 * (n as f64).powf(0.75) / 1004f64.sqrt()) < 1e-12);
    }

    #[test]
    fn parameter_errors() {
        assert!(ncpa_bound(&b(10), 5, &b(11)).is_err());
        assert!(ncpa_bound(&b(10), 5, &b(0)).is_err());
        assert!(ncpa_bound(&b(1), 5, &b(1)).is_err());
        assert!(ncpa_bound(&b(10), 0, &b(1)).is_err());
        let odd = cca_bound(&b(1 << 30), 341, &b(1000)).unwrap_err();
        assert!(odd.to_string().contains("342"), "{odd}");
        assert!(cca_tweak_bound(&b(1 << 30), 3, &b(1)).is_err());
        assert!(thorp_bound(&b(1000), 8, &b(1)).is_err());
        assert!(thorp_bound(&b(1024), 0, &b(1)).is_err());
    }

    #[test]
    fn thorp_limits() {
        let n = b(1 << 64);
        assert_eq!(thorp_bound(&n, 8, &b(0)).unwrap().value(), 0.0);
        // q >= N / (4 lg N) makes the base at least 1.
        let q = b((1u128 << 64) / 256);
        let a = thorp_bound(&n, 8, &q).unwrap();
        assert!(a.is_vacuous());
        assert_eq!(a.value(), 1.0);
    }

    #[test]
    fn model_names_round_trip() {
        for m in Model::ALL {
            assert_eq!(m.name().parse::<Model>().unwrap(), m);
        }
        assert!("feistel".parse::<Model>().is_err());
    }

    #[test]
    fn sci_formatting() {
        let a = Advantage {
            value: 2.2395192370016512e-11,
            raw_log10: 2.2395192370016512e-11f64.log10(),
        };
        assert_eq!(a.to_sci_string(), "2.23952e-11");
        let tiny = Advantage {
            value: 0.0,
            raw_log10: -400.5,
        };
        assert_eq!(tiny.to_sci_string(), "3.16228e-401");
        assert_eq!(Advantage::zero().to_sci_string(), "0.00000e0");
        let one = Advantage {
            value: 1.0,
            raw_log10: 3.0,
        };
        assert_eq!(one.to_sci_string(), "1.00000e0");
    }

    #[test]
    fn min_rounds_small_cases() {
        let n = b(1 << 30);
        let q = b(100_000_000);
        let r = min_rounds(&n, &q, 1e-10, Model::CcaPlain).unwrap();
        assert_eq!(r % 2, 0);
        assert!(r <= 340);
        assert!(cca_bound(&n, r, &q).unwrap().value() <= 1e-10);
        assert!(cca_bound(&n, r - 2, &q).unwrap().value() > 1e-10);
        assert!(min_rounds(&n, &q, 0.0, Model::CcaPlain).is_err());
        assert!(min_rounds(&n, &q, 1.0, Model::CcaPlain).is_err());
        // q = N - 1 leaves the base within 2^-31 of 1.
        assert!(matches!(
            min_rounds(&n, &(&n - 1u8), 1e-10, Model::CcaPlain),
            Err(Error::CapExceeded { .. })
        ));
    }
}
