//! Exact rational phases and their images on the unit circle.
//!
//! Every phase `n^k x` is carried as an exact residue `r/q` until the very
//! last step, where a single `sin_cos` maps it to `e(r/q) = e^{2πi r/q}`.
//! Floating point never sees `n^k` itself.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moduli up to this many bits take the `u128` fast path.
const SMALL_MODULUS_BITS: u64 = 125;

/// Tolerance on `|z| = 1` enforced by [`UnitComplex::new`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A point on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitComplex {
    re: f64,
    im: f64,
}

impl UnitComplex {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let defect = (re * re + im * im - 1.0).abs();
        if defect > UNIT_TOLERANCE || !defect.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "({re}, {im}) is not on the unit circle"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<UnitComplex> for Complex64 {
    fn from(z: UnitComplex) -> Self {
        z.to_complex()
    }
}

/// Canonical representative of `x mod 1` in `[0, 1)`.
pub fn reduce_mod_one(x: &BigRational) -> BigRational {
    let r = x.numer().mod_floor(x.denom());
    BigRational::new(r, x.denom().clone())
}

/// `e(θ) = (cos 2πθ, sin 2πθ)` for an exact rational phase.
pub fn unit_exp(phase: &BigRational) -> UnitComplex {
    let reduced = reduce_mod_one(phase);
    let r = reduced.numer().magnitude().clone();
    let q = reduced.denom().magnitude().clone();
    let z = unit_exp_residue(&r, &q);
    UnitComplex { re: z.re, im: z.im }
}

/// `e(r/q)` for big residues `0 <= r < q`.
pub fn unit_exp_residue(r: &BigUint, q: &BigUint) -> Complex64 {
    let bits = q.bits();
    if bits <= SMALL_MODULUS_BITS {
        let r = r.to_u128().expect("residue below modulus");
        let q = q.to_u128().expect("modulus fits");
        return unit_exp_ratio(r, q);
    }
    // Relative error 2^-120 after the shift; far below f64 resolution.
    let shift = bits - 120;
    let qs = (q >> shift).to_u128().expect("shifted modulus fits");
    let mut rs = (r >> shift).to_u128().expect("shifted residue fits");
    if rs >= qs {
        rs = qs - 1;
    }
    unit_exp_ratio(rs, qs)
}

/// `e(r/q)` for `0 <= r < q <= 2^125`.
///
/// The phase is split into an exact quarter-turn count and a remainder in
/// `[0, 1/4)`, so quarter and half turns come out exact.
#[inline]
pub fn unit_exp_ratio(r: u128, q: u128) -> Complex64 {
    debug_assert!(r < q);
    let four_r = r << 2;
    let (quadrant, rem) = if four_r < q {
        (0, four_r)
    } else if four_r < 2 * q {
        (1, four_r - q)
    } else if four_r < 3 * q {
        (2, four_r - 2 * q)
    } else {
        (3, four_r - 3 * q)
    };
    let frac = rem as f64 / (q as f64 * 4.0);
    let (s, c) = (TAU * frac).sin_cos();
    match quadrant {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// Two-limb conversion; within one ulp of `x as f64` and much cheaper.
#[inline]
fn u128_to_f64(x: u128) -> f64 {
    ((x >> 64) as u64 as f64) * 18446744073709551616.0 + (x as u64 as f64)
}

/// `((n^k · p) mod q) / q`, computed entirely in integers.
pub fn power_phase(n: &BigUint, k: u32, p: &BigInt, q: &BigUint) -> BigRational {
    assert!(!q.is_zero(), "modulus must be positive");
    let q_int = BigInt::from(q.clone());
    let p_red = p.mod_floor(&q_int).magnitude().clone();
    let r = (n.modpow(&BigUint::from(k), q) * p_red) % q;
    BigRational::new(BigInt::from(r), q_int)
}

/// Residue walker over `n^k · p mod q` for `n = 1, 2, 3, …`.
///
/// The sequence is a degree-`k` polynomial in `n`, so its `k`-th forward
/// difference is the constant `k! · p`. Each step costs `k` modular
/// additions, and the yielded values are `e(n^k p / q)`.
#[derive(Debug, Clone)]
pub struct PowerPhases {
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Small { q: u128, diffs: Vec<u128>, inv_four_q: f64 },
    Big { q: BigUint, diffs: Vec<BigUint> },
}

impl PowerPhases {
    /// Walker for the point `x` (reduced mod 1 internally) and power `k >= 1`.
    pub fn new(x: &BigRational, k: u32) -> Self {
        assert!(k >= 1, "power must be at least 1");
        let reduced = reduce_mod_one(x);
        let p = reduced.numer().magnitude().clone();
        let q = reduced.denom().magnitude().clone();
        let q_int = BigInt::from(q.clone());

        let values: Vec<BigInt> = (1..=u64::from(k) + 1)
            .map(|j| BigInt::from(BigUint::from(j).pow(k) * &p % &q))
            .collect();
        let mut diffs = Vec::with_capacity(k as usize + 1);
        for i in 0..=k as usize {
            let mut acc = BigInt::zero();
            let mut binom = BigInt::one();
            for j in 0..=i {
                let term = &binom * &values[j];
                if (i - j) % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
                binom = binom * BigInt::from(i - j) / BigInt::from(j + 1);
            }
            diffs.push(acc.mod_floor(&q_int).magnitude().clone());
        }

        let backend = if q.bits() <= SMALL_MODULUS_BITS {
            let q_small = q.to_u128().expect("modulus fits");
            Backend::Small {
                q: q_small,
                inv_four_q: 1.0 / (q_small as f64 * 4.0),
                diffs: diffs
                    .iter()
                    .map(|d| d.to_u128().expect("residue fits"))
                    .collect(),
            }
        } else {
            Backend::Big { q, diffs }
        };
        Self { backend }
    }

    /// Residue `n^k p mod q` that the next call to `next` will map.
    pub fn peek_residue(&self) -> BigUint {
        match &self.backend {
            Backend::Small { diffs, .. } => BigUint::from(diffs[0]),
            Backend::Big { diffs, .. } => diffs[0].clone(),
        }
    }

    /// Returns `e(n^k x)` for the current `n` and advances to `n + 1`.
    #[inline]
    pub fn step(&mut self) -> Complex64 {
        match &mut self.backend {
            Backend::Small { q, diffs, inv_four_q } => {
                let q = *q;
                let four_r = diffs[0] << 2;
                let (quadrant, rem) = if four_r < q {
                    (0, four_r)
                } else if four_r < 2 * q {
                    (1, four_r - q)
                } else if four_r < 3 * q {
                    (2, four_r - 2 * q)
                } else {
                    (3, four_r - 3 * q)
                };
                let (s, c) = (TAU * (u128_to_f64(rem) * *inv_four_q)).sin_cos();
                let (last, rest) = diffs.split_last_mut().expect("k >= 1");
                let mut above = *last;
                for d in rest.iter_mut().rev() {
                    let old = *d;
                    let s = old + above;
                    *d = if s >= q { s - q } else { s };
                    above = old;
                }
                match quadrant {
                    0 => Complex64::new(c, s),
                    1 => Complex64::new(-s, c),
                    2 => Complex64::new(-c, -s),
                    _ => Complex64::new(s, -c),
                }
            }
            Backend::Big { q, diffs } => {
                let z = unit_exp_residue(&diffs[0], q);
                for i in 0..diffs.len() - 1 {
                    let s = &diffs[i] + &diffs[i + 1];
                    diffs[i] = if &s >= q { s - &*q } else { s };
                }
                z
            }
        }
    }
}

impl Iterator for PowerPhases {
    type Item = Complex64;

    #[inline]
    fn next(&mut self) -> Option<Complex64> {
        Some(self.step())
    }
}

/// Natural log of a positive big integer, valid far beyond `f64::MAX`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite for <= 1000 bits").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("64-bit mantissa").ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ln |x|` for a nonzero rational.
pub fn ln_abs_rational(x: &BigRational) -> f64 {
    ln_biguint(x.numer().magnitude()) - ln_biguint(x.denom().magnitude())
}

/// Lossy conversion used only at output boundaries.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs_rational(x).exp()
}

/// Parses `"3"`, `"-7/12"`, `"0.25"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let mut numer = BigInt::from_str(&digits).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow(scale.unsigned_abs()))
    };
    Ok(value)
}

/// Builds `p/q` from machine integers.
pub fn ratio(p: i64, q: u64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Serde adapter writing a `BigRational` as the string `"p/q"`.
pub mod rational_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", x.numer(), x.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod bigint_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let text = String::deserialize(d)?;
        BigInt::from_str(&text).map_err(serde::de::Error::custom)
    }
}
