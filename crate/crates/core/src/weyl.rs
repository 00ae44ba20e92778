//! Three-case classification of Weyl sums `Σ_{l≤P} e(l^k x)` by the best
//! rational approximation `C/M` of `y = k!·x` with `M <= P^ε`, and the
//! corresponding bound shapes (all implied constants set to 1).
//!
//! The phase `l^k x` is written as `f(l) y / k!` with `f(l) = l^k` monic, so
//! the approximation is taken for `y = k!·x` rather than `x`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{best_rational_approx, CFReal, RationalApprox};
use crate::error::{Error, Result};
use crate::numeric::{ln_abs_rational, ln_biguint, rational_to_f64, rational_str};
use crate::series::weyl_partial_sums;

/// Largest denominator of `ε` accepted for exact threshold comparisons.
pub const MAX_EPSILON_DENOMINATOR: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Case {
    /// No coprime `C/M` with `M <= P^ε` and `|β| <= P^{ε-1}`.
    A,
    /// `P^{ε-k} < |β| <= P^{ε-1}`.
    B,
    /// `|β| <= P^{ε-k}`.
    C,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylClassification {
    pub case: Case,
    /// Best approximation of `k!·x`; absent in case A.
    pub approx: Option<RationalApprox>,
    #[serde(rename = "P")]
    pub p: u64,
    #[serde(with = "rational_str")]
    pub epsilon: BigRational,
    pub k: u32,
    /// `⌊P^ε⌋`.
    pub m_max: u64,
    /// `k (1 − ln|β| / ln M)^{-1}` when `β ≠ 0` and `M >= 2`.
    pub delta: Option<f64>,
    /// Bound expression with unit constants. Not a certified bound.
    pub bound_shape: f64,
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

fn split_epsilon(epsilon: &BigRational) -> Result<(u32, u32)> {
    let zero = BigRational::zero();
    if epsilon <= &zero || epsilon >= &BigRational::one() {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let b = epsilon.denom().to_u64().filter(|&b| b <= MAX_EPSILON_DENOMINATOR).ok_or_else(|| {
        Error::InvalidArgument(format!("ε denominator exceeds {MAX_EPSILON_DENOMINATOR}: {epsilon}"))
    })?;
    Ok((epsilon.numer().to_u32().expect("a < b"), b as u32))
}

/// `⌊P^{a/b}⌋`.
fn floor_power(p: u64, a: u32, b: u32) -> u64 {
    let pa = BigUint::from(p).pow(a);
    pa.nth_root(b).to_u64().expect("below P")
}

/// `|β| <= P^{e/b}` for `e <= 0`, i.e. `u^b P^{-e} <= v^b` with `|β| = u/v`.
fn abs_at_most_power(beta: &BigRational, p: u64, neg_e: u32, b: u32) -> bool {
    let u = beta.numer().magnitude().pow(b);
    let v = beta.denom().magnitude().pow(b);
    u * BigUint::from(p).pow(neg_e) <= v
}

/// Classifies `Σ_{l≤P} e(l^k x)` by the rational approximation of `k!·x`.
///
/// For a prefix, `k!·x` is known only to within `k!/q_J²`; the
/// classification is refused when that radius is not small against both
/// `|β|` and the spacing `1/M_max²` of candidate fractions.
pub fn classify_point(x: &CFReal, k: u32, p: u64, epsilon: &BigRational) -> Result<WeylClassification> {
    if p < 2 {
        return Err(Error::InvalidArgument("P must be at least 2".into()));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (a, b) = split_epsilon(epsilon)?;
    let m_max = floor_power(p, a, b).max(1);
    let fact = factorial(k);
    let y = x.value() * BigRational::from_integer(fact.clone());
    let approx = best_rational_approx(&CFReal::from_rational(&y), m_max)?;

    if !x.is_exact() {
        let q_j = &x.last_convergent().q;
        let radius = BigRational::new(fact, q_j * q_j);
        let spacing = BigRational::new(BigInt::one(), BigInt::from(4u64) * BigInt::from(m_max).pow(2));
        let two_r = &radius * BigInt::from(2);
        if approx.beta.abs() <= two_r || radius >= spacing {
            return Err(Error::PrecisionExhausted(format!(
                "k!·x is known to within {} but |β| = {} with M_max = {m_max}",
                rational_to_f64(&radius),
                rational_to_f64(&approx.beta.abs()),
            )));
        }
    }

    let case = if !abs_at_most_power(&approx.beta, p, b - a, b) {
        Case::A
    } else if abs_at_most_power(&approx.beta, p, k * b - a, b) {
        Case::C
    } else {
        Case::B
    };
    let approx = (case != Case::A).then_some(approx);
    let delta = approx.as_ref().and_then(|ap| {
        let m = ap.m.to_f64().expect("M <= M_max");
        (!ap.beta.is_zero() && m >= 2.0).then(|| f64::from(k) / (1.0 - ln_abs_rational(&ap.beta) / m.ln()))
    });
    let mut c = WeylClassification {
        case,
        approx,
        p,
        epsilon: epsilon.clone(),
        k,
        m_max,
        delta,
        bound_shape: 0.0,
    };
    c.bound_shape = bound_shape(&c);
    Ok(c)
}

/// The case's bound expression with `C₁ = C₂ = C₃ = 1` and `n = k`.
pub fn bound_shape(c: &WeylClassification) -> f64 {
    let ln_p = (c.p as f64).ln();
    let eps = rational_to_f64(&c.epsilon);
    let k = f64::from(c.k);
    let two_k = 2f64.powi(c.k as i32);
    let ln_m = || ln_biguint(c.approx.as_ref().expect("cases B and C carry C/M").m.magnitude());
    match c.case {
        Case::A => ((1.0 - eps / two_k) * ln_p).exp(),
        Case::B => {
            let ap = c.approx.as_ref().expect("case B carries C/M");
            let first = ((1.0 - 2.0 * eps / two_k) * ln_p).exp();
            let d = two_k / 2.0 * (k - 1.0);
            let ln_second =
                (1.0 - (k - eps) / d) * ln_p - ln_abs_rational(&ap.beta) / d - ln_m() / (two_k * (k - 1.0));
            first + ln_second.exp()
        }
        Case::C => (ln_p - ln_m() / (two_k * (k - 1.0))).exp(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    #[serde(rename = "P")]
    pub p: u64,
    pub case: Case,
    pub s_abs: f64,
    pub shape: f64,
    /// `|S_P| / shape`.
    pub ratio: f64,
    /// `|S_P| / P`.
    pub normalized: f64,
}

/// Classification and `|S_P|` for each `P`; rows sorted by `P`.
pub fn empirical_vs_bound(x: &CFReal, k: u32, p_list: &[u64], epsilon: &BigRational) -> Result<Vec<WeylRow>> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("P list is empty".into()));
    }
    let sums = weyl_partial_sums(&x.value(), k, p_list)?;
    p_list
        .iter()
        .zip(sums)
        .map(|(&p, s)| {
            let c = classify_point(x, k, p, epsilon)?;
            let s_abs = s.norm();
            assert!(s_abs <= p as f64 * (1.0 + 1e-12), "|S_P| exceeds P");
            Ok(WeylRow { p, case: c.case, s_abs, shape: c.bound_shape, ratio: s_abs / c.bound_shape, normalized: s_abs / p as f64 })
        })
        .collect()
}
