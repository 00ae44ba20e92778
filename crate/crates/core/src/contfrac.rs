//! Continued fractions with exact big-integer convergents.
//!
//! A [`CFReal`] is either an exact rational (canonical expansion, last
//! partial quotient at least 2) or a finite prefix standing in for an
//! irrational number. In both cases all arithmetic is done on the exact
//! rational value of the stored quotients; the [`Precision`] tag only decides
//! whether an operation may treat that value as the final answer.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::rational_str;

/// Whether the stored quotients are the whole number or only a prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Exact,
    Prefix,
}

/// One convergent `p_j / q_j` (not necessarily reduced-looking, but always
/// coprime by the determinant identity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CFReal {
    integer_part: BigInt,
    quotients: Vec<BigInt>,
    convergents: Vec<Convergent>,
    precision: Precision,
}

impl CFReal {
    /// Exact rational `[a0; a1, …, aJ]`. A trailing quotient 1 is merged into
    /// its predecessor so the stored form is canonical.
    pub fn exact(integer_part: BigInt, mut quotients: Vec<BigInt>) -> Result<Self> {
        validate_quotients(&quotients)?;
        let mut integer_part = integer_part;
        if quotients.last().is_some_and(|a| a.is_one()) {
            quotients.pop();
            match quotients.last_mut() {
                Some(prev) => *prev += 1,
                None => integer_part += 1,
            }
        }
        Ok(Self::build(integer_part, quotients, Precision::Exact))
    }

    /// Prefix of an irrational number; the quotients are kept verbatim.
    pub fn prefix(integer_part: BigInt, quotients: Vec<BigInt>) -> Result<Self> {
        validate_quotients(&quotients)?;
        Ok(Self::build(integer_part, quotients, Precision::Prefix))
    }

    /// `[0; quotients…]` as an exact rational.
    pub fn exact_fraction(quotients: &[u64]) -> Result<Self> {
        Self::exact(BigInt::zero(), quotients.iter().map(|&a| BigInt::from(a)).collect())
    }

    /// `[0; quotients…, …]` as a prefix of an irrational.
    pub fn prefix_fraction(quotients: &[u64]) -> Result<Self> {
        Self::prefix(BigInt::zero(), quotients.iter().map(|&a| BigInt::from(a)).collect())
    }

    /// Canonical expansion of any rational, by Euclid's algorithm.
    pub fn from_rational(x: &BigRational) -> Self {
        let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
        let (a0, r) = num.div_mod_floor(&den);
        let mut quotients = Vec::new();
        num = den.clone();
        den = r;
        while !den.is_zero() {
            let (a, r) = num.div_mod_floor(&den);
            quotients.push(a);
            num = den;
            den = r;
        }
        Self::build(a0, quotients, Precision::Exact)
    }

    fn build(integer_part: BigInt, quotients: Vec<BigInt>, precision: Precision) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len() + 1);
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (integer_part.clone(), BigInt::one());
        convergents.push(Convergent { p: p.clone(), q: q.clone() });
        for a in &quotients {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            convergents.push(Convergent { p: p.clone(), q: q.clone() });
        }
        Self { integer_part, quotients, convergents, precision }
    }

    pub fn integer_part(&self) -> &BigInt {
        &self.integer_part
    }

    /// Partial quotients `a_1, …, a_J` (the integer part excluded).
    pub fn quotients(&self) -> &[BigInt] {
        &self.quotients
    }

    /// Convergents `(p_0, q_0) = (a_0, 1)` through `(p_J, q_J)`.
    pub fn convergents(&self) -> &[Convergent] {
        &self.convergents
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        self.precision == Precision::Exact
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    /// Exact rational value of the stored quotients.
    pub fn value(&self) -> BigRational {
        self.last_convergent().value()
    }

    pub fn last_convergent(&self) -> &Convergent {
        self.convergents.last().expect("at least the integer part")
    }

    /// Appends partial quotients, keeping the precision tag.
    pub fn extended(&self, tail: &[BigInt]) -> Result<Self> {
        validate_quotients(tail)?;
        let mut quotients = self.quotients.clone();
        quotients.extend_from_slice(tail);
        Ok(Self::build(self.integer_part.clone(), quotients, self.precision))
    }

    /// `1/(2 q_j q_{j+1}) < |x − p_j/q_j| < 1/(q_j q_{j+1})`, exactly, where
    /// `x` is the value of the full prefix. `None` unless `j + 1 < J`.
    pub fn sandwich_holds(&self, j: usize) -> Option<bool> {
        if j + 2 >= self.convergents.len() {
            return None;
        }
        let c = &self.convergents[j];
        let next = &self.convergents[j + 1];
        let err = (self.value() - c.value()).abs();
        let qq = &c.q * &next.q;
        let upper = BigRational::new(BigInt::one(), qq.clone());
        let lower = BigRational::new(BigInt::one(), qq * 2);
        Some(lower < err && err < upper)
    }
}

fn validate_quotients(quotients: &[BigInt]) -> Result<()> {
    match quotients.iter().position(|a| !a.is_positive()) {
        Some(index) => Err(Error::ZeroQuotient { index: index + 1 }),
        None => Ok(()),
    }
}

impl fmt::Display for CFReal {
    /// `"[0; 2, 2]"`, or `"[0; 1, 1, …]"` for a prefix.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.integer_part)?;
        for (i, a) in self.quotients.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { "; " } else { ", " }, a)?;
        }
        if self.precision == Precision::Prefix {
            write!(f, "{}…", if self.quotients.is_empty() { "; " } else { ", " })?;
        }
        write!(f, "]")
    }
}

impl FromStr for CFReal {
    type Err = Error;

    /// Parses `"0;2,2"` (exact) or `"0;1,1,1,..."` (prefix). Brackets and
    /// whitespace are ignored; a bare `"3/7"` is expanded as a rational.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '[' && *c != ']')
            .collect();
        let bad = || Error::InvalidArgument(format!("cannot parse {s:?} as a continued fraction"));
        if !cleaned.contains(';') {
            let x = crate::numeric::parse_rational(&cleaned)?;
            return Ok(Self::from_rational(&x));
        }
        let (head, tail) = cleaned.split_once(';').ok_or_else(bad)?;
        let a0 = BigInt::from_str(head).map_err(|_| bad())?;
        let mut quotients = Vec::new();
        let mut is_prefix = false;
        for part in tail.split(',').filter(|p| !p.is_empty()) {
            if part == "..." || part == "…" {
                is_prefix = true;
                continue;
            }
            if is_prefix {
                return Err(bad());
            }
            quotients.push(BigInt::from_str(part).map_err(|_| bad())?);
        }
        if is_prefix {
            Self::prefix(a0, quotients)
        } else {
            Self::exact(a0, quotients)
        }
    }
}

/// Canonical expansion `[0; a_1, …, a_J]` of a reduced fraction in `[0, 1)`.
pub fn cf_expand_rational(p: &BigInt, q: &BigInt) -> Result<CFReal> {
    if p.is_negative() || q <= p {
        return Err(Error::OutsideUnitInterval { p: p.to_string(), q: q.to_string() });
    }
    if !p.gcd(q).is_one() {
        return Err(Error::NotReduced { p: p.to_string(), q: q.to_string() });
    }
    Ok(CFReal::from_rational(&BigRational::new(p.clone(), q.clone())))
}

/// Convergent list of `x`, seeds `(p_{-1}, q_{-1}) = (1, 0)` implied.
pub fn convergents(x: &CFReal) -> &[Convergent] {
    x.convergents()
}

/// Which continued-fraction representations of `p/q` contribute to `I_{p/q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    /// Both `[…, a_J]` and `[…, a_J − 1, 1]`: a neighbourhood of `p/q`.
    #[default]
    TwoSided,
    /// Only the canonical representation.
    OneSided,
}

/// Closure of the set of `x` in `[0, 1]` having `center` as a convergent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergentInterval {
    #[serde(with = "rational_str")]
    pub lo: BigRational,
    #[serde(with = "rational_str")]
    pub hi: BigRational,
    #[serde(with = "rational_str")]
    pub center: BigRational,
    /// Length of the canonical-representation branch.
    #[serde(with = "rational_str")]
    pub canonical_length: BigRational,
    /// Length of the `[…, a_J − 1, 1]` branch (zero in one-sided mode).
    #[serde(with = "rational_str")]
    pub alternate_length: BigRational,
    pub mode: IntervalMode,
}

impl ConvergentInterval {
    pub fn branch_lengths(&self) -> (&BigRational, &BigRational) {
        (&self.canonical_length, &self.alternate_length)
    }

    pub fn length(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `self ⊆ other`, by exact endpoint comparison.
    pub fn is_subset_of(&self, other: &ConvergentInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// `I_{p/q}`: union over the representations of `p/q` of
/// `{(p t + p') / (q t + q') : t >= 1}` with `p'/q'` the previous convergent.
pub fn interval_of_convergent(p: &BigInt, q: &BigInt, mode: IntervalMode) -> Result<ConvergentInterval> {
    let base = cf_expand_rational(p, q)?;
    Ok(interval_from_expansion(&base, mode))
}

fn interval_from_expansion(base: &CFReal, mode: IntervalMode) -> ConvergentInterval {
    let conv = base.convergents();
    let last = conv.last().expect("nonempty");
    let center = last.value();
    if conv.len() == 1 {
        // 0/1 is a convergent of every point of [0, 1).
        return ConvergentInterval {
            lo: BigRational::zero(),
            hi: BigRational::one(),
            center,
            canonical_length: BigRational::one(),
            alternate_length: BigRational::zero(),
            mode,
        };
    }
    let prev = &conv[conv.len() - 2];
    let canonical_end = BigRational::new(&last.p + &prev.p, &last.q + &prev.q);
    let canonical_length = (&canonical_end - &center).abs();
    let (mut lo, mut hi) = ordered(canonical_end, center.clone());
    let mut alternate_length = BigRational::zero();
    if mode == IntervalMode::TwoSided {
        let alternate_end = BigRational::new(
            BigInt::from(2) * &last.p - &prev.p,
            BigInt::from(2) * &last.q - &prev.q,
        );
        alternate_length = (&alternate_end - &center).abs();
        if alternate_end < lo {
            lo = alternate_end;
        } else if alternate_end > hi {
            hi = alternate_end;
        }
    }
    ConvergentInterval { lo, hi, center, canonical_length, alternate_length, mode }
}

fn ordered(a: BigRational, b: BigRational) -> (BigRational, BigRational) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// `I_b`: the interval of `[0; a_1, …, a_{j0}, b_1, …, b_d]`, a subset of the
/// interval of the base.
pub fn refine_interval(base: &CFReal, b: &[u64], mode: IntervalMode) -> Result<ConvergentInterval> {
    let refined = refined_base(base, b)?;
    Ok(interval_from_expansion(&refined, mode))
}

/// The expansion `[0; a_1, …, a_{j0}, b_1, …, b_d]` behind [`refine_interval`].
pub fn refined_base(base: &CFReal, b: &[u64]) -> Result<CFReal> {
    if !base.is_exact() || !base.integer_part().is_zero() {
        return Err(Error::InvalidArgument(
            "refinement base must be an exact fraction [0; a_1, …, a_j]".into(),
        ));
    }
    if let Some(index) = b.iter().position(|&x| x == 0) {
        return Err(Error::ZeroQuotient { index: base.quotients().len() + index + 1 });
    }
    if b.last() == Some(&1) {
        return Err(Error::NonCanonicalTail);
    }
    let tail: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
    base.extended(&tail)
}

/// Law of the random partial quotients appended by [`sample_points`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientLaw {
    /// `P(a = j) = log2(1 + 1/(j(j+2)))`, truncated at `max_quotient` and
    /// renormalised.
    GaussKuzmin { max_quotient: u64 },
    /// Every appended quotient equals the given value.
    Fixed(u64),
}

impl QuotientLaw {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            QuotientLaw::Fixed(a) => a,
            QuotientLaw::GaussKuzmin { max_quotient } => gauss_kuzmin_draw(max_quotient, rng.gen::<f64>()),
        }
    }
}

/// Unnormalised Gauss–Kuzmin CDF, `Σ_{i<=j} log2(1 + 1/(i(i+2))) = log2(2(j+1)/(j+2))`.
fn gauss_kuzmin_cdf(j: u64) -> f64 {
    let j = j as f64;
    (2.0 * (j + 1.0) / (j + 2.0)).log2()
}

/// Inverse-CDF draw: smallest `j` in `1..=max` with `F(j) > u · F(max)`.
pub(crate) fn gauss_kuzmin_draw(max_quotient: u64, u: f64) -> u64 {
    let max_quotient = max_quotient.max(1);
    let target = u * gauss_kuzmin_cdf(max_quotient);
    let c = target.exp2();
    let guess = if c >= 2.0 { max_quotient as f64 } else { ((2.0 * c - 2.0) / (2.0 - c)).ceil() };
    let mut j = (guess.max(1.0) as u64).clamp(1, max_quotient);
    while j > 1 && gauss_kuzmin_cdf(j - 1) > target {
        j -= 1;
    }
    while j < max_quotient && gauss_kuzmin_cdf(j) <= target {
        j += 1;
    }
    j
}

/// Deterministic substream for sample `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One point of `interval` obtained by extending a representation of the
/// base fraction by `depth` random partial quotients.
///
/// In two-sided mode the branch is picked with probability proportional to
/// its length, then the corresponding representation of `base` is extended.
pub fn sample_point<R: Rng + ?Sized>(
    interval: &ConvergentInterval,
    base: &CFReal,
    depth: usize,
    law: QuotientLaw,
    rng: &mut R,
) -> CFReal {
    let canonical = interval.canonical_length.to_f64().unwrap_or(1.0);
    let alternate = interval.alternate_length.to_f64().unwrap_or(0.0);
    let use_alternate = alternate > 0.0 && rng.gen::<f64>() * (canonical + alternate) >= canonical;

    let mut quotients = base.quotients().to_vec();
    if use_alternate {
        let last = quotients.last_mut().expect("alternate branch needs a quotient");
        *last -= 1;
        quotients.push(BigInt::one());
    }
    quotients.extend((0..depth).map(|_| BigInt::from(law.draw(rng))));
    CFReal::prefix(base.integer_part().clone(), quotients).expect("quotients are positive")
}

/// `count` points of `interval`, point `i` drawn from `substream(seed, i)`.
pub fn sample_points(
    interval: &ConvergentInterval,
    base: &CFReal,
    count: usize,
    depth: usize,
    law: QuotientLaw,
    seed: u64,
) -> Vec<CFReal> {
    (0..count)
        .map(|i| sample_point(interval, base, depth, law, &mut substream(seed, i as u64)))
        .collect()
}

/// `count` evenly spaced exact rationals strictly inside `interval`.
pub fn grid_points(interval: &ConvergentInterval, count: usize) -> Vec<CFReal> {
    let len = interval.length();
    (0..count)
        .map(|i| {
            let t = BigRational::new(BigInt::from(2 * i + 1), BigInt::from(2 * count));
            CFReal::from_rational(&(&interval.lo + &len * t))
        })
        .collect()
}

/// Best approximation `C/M` of `y` with `M <= M_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    #[serde(with = "crate::numeric::bigint_str")]
    pub c: BigInt,
    #[serde(with = "crate::numeric::bigint_str")]
    pub m: BigInt,
    /// `y − C/M`.
    #[serde(with = "rational_str")]
    pub beta: BigRational,
}

/// Closest `C/M` to `y` with `1 <= M <= m_max`; ties go to the smaller `M`
/// (then the smaller `C`).
///
/// Only the last convergent with `q_j <= m_max` and the largest admissible
/// semiconvergent after it can win. For a prefix whose last denominator is
/// still `<= m_max` the answer would depend on unseen quotients, so that
/// case is an error.
pub fn best_rational_approx(y: &CFReal, m_max: u64) -> Result<RationalApprox> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("M_max must be at least 1".into()));
    }
    let bound = BigInt::from(m_max);
    let conv = y.convergents();
    let j = conv.iter().rposition(|c| c.q <= bound).expect("q_0 = 1");
    let value = y.value();
    if j + 1 == conv.len() {
        if !y.is_exact() {
            return Err(Error::PrecisionExhausted(format!(
                "prefix denominator {} does not exceed M_max = {m_max}",
                conv[j].q
            )));
        }
        return Ok(RationalApprox { c: conv[j].p.clone(), m: conv[j].q.clone(), beta: BigRational::zero() });
    }

    let mut best = (conv[j].p.clone(), conv[j].q.clone());
    let (p_prev, q_prev) = if j == 0 {
        (BigInt::one(), BigInt::zero())
    } else {
        (conv[j - 1].p.clone(), conv[j - 1].q.clone())
    };
    let t = (&bound - &q_prev) / &conv[j].q;
    if t.is_positive() {
        let semi = (&p_prev + &t * &conv[j].p, &q_prev + &t * &conv[j].q);
        if approx_key(&value, &semi) < approx_key(&value, &best) {
            best = semi;
        }
    }
    let beta = &value - BigRational::new(best.0.clone(), best.1.clone());
    Ok(RationalApprox { c: best.0, m: best.1, beta })
}

fn approx_key(y: &BigRational, (c, m): &(BigInt, BigInt)) -> (BigRational, BigInt, BigInt) {
    ((y - BigRational::new(c.clone(), m.clone())).abs(), m.clone(), c.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use proptest::prelude::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn pq(c: &Convergent) -> (i64, i64) {
        (c.p.to_i64().unwrap(), c.q.to_i64().unwrap())
    }

    /// Euclid by repeated floor/reciprocal on exact rationals.
    fn oracle_quotients(mut x: BigRational) -> Vec<i64> {
        let mut out = Vec::new();
        while !x.is_zero() {
            let inv = x.recip();
            let a = inv.floor();
            out.push(a.to_integer().to_i64().unwrap());
            x = inv - a;
        }
        out
    }

    #[test]
    fn expand_examples() {
        let q = |x: CFReal| x.quotients().iter().map(|a| a.to_i64().unwrap()).collect::<Vec<_>>();
        assert_eq!(q(cf_expand_rational(&big(1), &big(2)).unwrap()), vec![2]);
        assert_eq!(q(cf_expand_rational(&big(2), &big(5)).unwrap()), vec![2, 2]);
        assert_eq!(q(cf_expand_rational(&big(16), &big(113)).unwrap()), vec![7, 16]);
        assert_eq!(oracle_quotients(ratio(16, 113)), vec![7, 16]);
    }

    #[test]
    fn expand_rejects_bad_input() {
        assert!(matches!(cf_expand_rational(&big(2), &big(4)), Err(Error::NotReduced { .. })));
        assert!(matches!(cf_expand_rational(&big(5), &big(4)), Err(Error::OutsideUnitInterval { .. })));
    }

    #[test]
    fn convergent_examples() {
        let x = CFReal::exact_fraction(&[2, 2]).unwrap();
        let c: Vec<_> = x.convergents().iter().map(pq).collect();
        assert_eq!(c, vec![(0, 1), (1, 2), (2, 5)]);
        let fib = CFReal::prefix_fraction(&[1, 1, 1, 1]).unwrap();
        let c: Vec<_> = fib.convergents().iter().map(pq).collect();
        assert_eq!(c, vec![(0, 1), (1, 1), (1, 2), (2, 3), (3, 5)]);
        let seven = CFReal::exact_fraction(&[7]).unwrap();
        let c: Vec<_> = seven.convergents().iter().map(pq).collect();
        assert_eq!(c, vec![(0, 1), (1, 7)]);
    }

    #[test]
    fn exact_form_is_canonical() {
        let x = CFReal::exact_fraction(&[2, 1]).unwrap();
        assert_eq!(x.quotients(), &[big(3)]);
        assert_eq!(x.value(), ratio(1, 3));
        assert!(CFReal::exact_fraction(&[2, 0, 3]).is_err());
    }

    #[test]
    fn parse_and_display() {
        let x: CFReal = "0;2,2".parse().unwrap();
        assert_eq!(x.value(), ratio(2, 5));
        assert!(x.is_exact());
        let y: CFReal = "[0; 1, 1, 1, ...]".parse().unwrap();
        assert_eq!(y.precision(), Precision::Prefix);
        assert_eq!(y.to_string(), "[0; 1, 1, 1, …]");
        let z: CFReal = "3/7".parse().unwrap();
        assert_eq!(z.value(), ratio(3, 7));
        assert!("0;2,x".parse::<CFReal>().is_err());
    }

    #[test]
    fn interval_examples() {
        let i = interval_of_convergent(&big(1), &big(2), IntervalMode::TwoSided).unwrap();
        assert_eq!((i.lo.clone(), i.hi.clone()), (ratio(1, 3), ratio(2, 3)));
        let i = interval_of_convergent(&big(1), &big(3), IntervalMode::TwoSided).unwrap();
        assert_eq!((i.lo.clone(), i.hi.clone()), (ratio(1, 4), ratio(2, 5)));
        let i = interval_of_convergent(&big(2), &big(5), IntervalMode::TwoSided).unwrap();
        assert_eq!(i.length(), ratio(1, 35) + ratio(1, 40));
        assert!(i.contains(&ratio(2, 5)));
        let one = interval_of_convergent(&big(1), &big(2), IntervalMode::OneSided).unwrap();
        assert_eq!((one.lo, one.hi), (ratio(1, 3), ratio(1, 2)));
        let zero = interval_of_convergent(&big(0), &big(1), IntervalMode::TwoSided).unwrap();
        assert_eq!((zero.lo, zero.hi), (ratio(0, 1), ratio(1, 1)));
    }

    #[test]
    fn interval_matches_membership_enumeration() {
        // Member set of I_{p/q} is the open interval (lo, hi).
        for (p, q) in [(1i64, 2i64), (1, 3), (2, 5), (3, 8), (5, 13), (2, 7)] {
            let i = interval_of_convergent(&big(p), &big(q), IntervalMode::TwoSided).unwrap();
            let target = ratio(p, q as u64);
            for n in 2..=60i64 {
                for m in 1..n {
                    if m.gcd(&n) != 1 {
                        continue;
                    }
                    let x = ratio(m, n as u64);
                    let member = CFReal::from_rational(&x).convergents().iter().any(|c| c.value() == target);
                    let inside = i.lo < x && x < i.hi;
                    assert_eq!(member, inside, "{m}/{n} vs I_{p}/{q}");
                }
            }
        }
    }

    #[test]
    fn refine_examples() {
        let base = CFReal::exact_fraction(&[2]).unwrap();
        assert_eq!(refine_interval(&base, &[1], IntervalMode::TwoSided), Err(Error::NonCanonicalTail));
        assert!(matches!(refine_interval(&base, &[0, 2], IntervalMode::TwoSided), Err(Error::ZeroQuotient { .. })));
        let outer = interval_of_convergent(&big(1), &big(2), IntervalMode::TwoSided).unwrap();
        let inner = refine_interval(&base, &[2], IntervalMode::TwoSided).unwrap();
        assert_eq!(inner.center, ratio(2, 5));
        assert!(inner.is_subset_of(&outer));

        let base = CFReal::exact_fraction(&[3]).unwrap();
        let refined = refined_base(&base, &[1, 2]).unwrap();
        assert_eq!(refined.value(), ratio(3, 11));
        let outer = interval_of_convergent(&big(1), &big(3), IntervalMode::TwoSided).unwrap();
        assert!(refine_interval(&base, &[1, 2], IntervalMode::TwoSided).unwrap().is_subset_of(&outer));
    }

    #[test]
    fn forced_sample_is_two_fifths() {
        let base = CFReal::exact_fraction(&[2]).unwrap();
        let i = interval_of_convergent(&big(1), &big(2), IntervalMode::OneSided).unwrap();
        let pts = sample_points(&i, &base, 1, 1, QuotientLaw::Fixed(2), 7);
        assert_eq!(pts[0].value(), ratio(2, 5));
        assert!(i.contains(&pts[0].value()));
    }

    #[test]
    fn samples_stay_inside_and_keep_the_convergent() {
        let base = CFReal::exact_fraction(&[2]).unwrap();
        let i = interval_of_convergent(&big(1), &big(2), IntervalMode::TwoSided).unwrap();
        let law = QuotientLaw::GaussKuzmin { max_quotient: 1000 };
        let shallow = sample_points(&i, &base, 100, 3, law, 42);
        assert!(shallow.iter().all(|x| i.contains(&x.value())));
        let deep = sample_points(&i, &base, 100, 20, law, 43);
        let half = ratio(1, 2);
        assert!(deep.iter().all(|x| x.convergents().iter().any(|c| c.value() == half)));
        assert!(deep.iter().any(|x| x.value() > half) && deep.iter().any(|x| x.value() < half));
        assert_eq!(deep, sample_points(&i, &base, 100, 20, law, 43));
    }

    #[test]
    fn gauss_kuzmin_frequencies() {
        let mut rng = substream(5, 0);
        let n = 200_000;
        let mut ones = 0;
        let mut max_seen = 0;
        for _ in 0..n {
            let a = QuotientLaw::GaussKuzmin { max_quotient: 50 }.draw(&mut rng);
            assert!((1..=50).contains(&a));
            max_seen = max_seen.max(a);
            if a == 1 {
                ones += 1;
            }
        }
        let p1 = (1.0f64 + 1.0 / 3.0).log2() / gauss_kuzmin_cdf(50);
        assert!(((ones as f64 / n as f64) - p1).abs() < 0.005);
        assert!(max_seen > 30);
        assert_eq!(gauss_kuzmin_draw(10, 0.0), 1);
        assert_eq!(gauss_kuzmin_draw(10, 0.999_999_999), 10);
    }

    #[test]
    fn grid_points_are_interior() {
        let i = interval_of_convergent(&big(1), &big(5), IntervalMode::TwoSided).unwrap();
        let pts = grid_points(&i, 16);
        assert!(pts.iter().all(|x| i.lo < x.value() && x.value() < i.hi));
    }

    /// Exhaustive scan over all M <= m_max, ties to smaller M then smaller C.
    fn brute_best(y: &BigRational, m_max: u64) -> (BigInt, BigInt) {
        let mut best: Option<(BigRational, BigInt, BigInt)> = None;
        for m in 1..=m_max {
            let m = BigInt::from(m);
            let scaled = y * BigRational::from_integer(m.clone());
            for c in [scaled.floor().to_integer(), scaled.ceil().to_integer()] {
                let d = (y - BigRational::new(c.clone(), m.clone())).abs();
                let key = (d, m.clone(), c.clone());
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        let (_, m, c) = best.unwrap();
        (c, m)
    }

    #[test]
    fn best_approx_examples() {
        let half = CFReal::exact_fraction(&[2]).unwrap();
        let r = best_rational_approx(&half, 10).unwrap();
        assert_eq!((r.c, r.m, r.beta), (big(1), big(2), BigRational::zero()));
        let fib = CFReal::prefix_fraction(&[1; 10]).unwrap();
        let r = best_rational_approx(&fib, 10).unwrap();
        assert_eq!((r.c.clone(), r.m.clone()), brute_best(&fib.value(), 10));
        assert_eq!((r.c, r.m), (big(5), big(8)));
        let y = CFReal::exact_fraction(&[7, 16]).unwrap();
        let r = best_rational_approx(&y, 50).unwrap();
        assert_eq!((r.c.clone(), r.m.clone()), brute_best(&y.value(), 50));
        assert_eq!((r.c, r.m), (big(1), big(7)));
    }

    #[test]
    fn best_approx_reports_exhausted_prefix() {
        let short = CFReal::prefix_fraction(&[3, 2]).unwrap();
        assert!(matches!(best_rational_approx(&short, 10), Err(Error::PrecisionExhausted(_))));
    }

    proptest! {
        #[test]
        fn determinant_identity(quotients in prop::collection::vec(1u64..1_000_000, 1..40)) {
            let x = CFReal::prefix_fraction(&quotients).unwrap();
            let c = x.convergents();
            let mut prev = Convergent { p: BigInt::one(), q: BigInt::zero() };
            for (j, cur) in c.iter().enumerate() {
                let det = &cur.p * &prev.q - &prev.p * &cur.q;
                let expected = if j % 2 == 0 { big(-1) } else { big(1) };
                prop_assert_eq!(det, expected);
                if j >= 2 {
                    prop_assert!(cur.q > prev.q);
                }
                prev = cur.clone();
            }
        }

        #[test]
        fn expansion_round_trips(q in 2u64..1_000_000, p in 1u64..1_000_000) {
            let p = p % q;
            prop_assume!(p.gcd(&q) == 1);
            let x = cf_expand_rational(&big(p as i64), &big(q as i64)).unwrap();
            prop_assert_eq!(x.value(), ratio(p as i64, q));
            let expected: Vec<i64> = oracle_quotients(ratio(p as i64, q));
            let got: Vec<i64> = x.quotients().iter().map(|a| a.to_i64().unwrap()).collect();
            prop_assert_eq!(got, expected);
            if let Some(last) = x.quotients().last() {
                prop_assert!(*last >= big(2));
            }
        }

        #[test]
        fn sandwich_on_random_prefixes(quotients in prop::collection::vec(1u64..500, 3..30)) {
            let x = CFReal::prefix_fraction(&quotients).unwrap();
            for j in 0..quotients.len() - 1 {
                prop_assert_eq!(x.sandwich_holds(j), Some(true));
            }
            prop_assert_eq!(x.sandwich_holds(quotients.len() - 1), None);
        }

        #[test]
        fn interval_length_bounds(q in 2u64..100_000, p in 1u64..100_000) {
            let p = p % q;
            prop_assume!(p > 0 && p.gcd(&q) == 1);
            let i = interval_of_convergent(&big(p as i64), &big(q as i64), IntervalMode::TwoSided).unwrap();
            let q2 = BigRational::from_integer(big((q * q) as i64));
            let len = i.length();
            prop_assert!(len >= q2.recip() / BigRational::from_integer(big(2)));
            prop_assert!(len <= BigRational::from_integer(big(2)) / q2);
            prop_assert!(i.lo < i.center && i.center < i.hi);
        }

        #[test]
        fn refinement_is_contained(quotients in prop::collection::vec(1u64..20, 1..8), tail in prop::collection::vec(1u64..20, 1..5)) {
            let base = CFReal::exact_fraction(&quotients).unwrap();
            prop_assume!(*tail.last().unwrap() >= 2 && base.integer_part().is_zero());
            let c = base.last_convergent();
            let outer = interval_of_convergent(&c.p, &c.q, IntervalMode::TwoSided).unwrap();
            let inner = refine_interval(&base, &tail, IntervalMode::TwoSided).unwrap();
            prop_assert!(inner.is_subset_of(&outer));
        }

        #[test]
        fn best_approx_matches_brute_force(quotients in prop::collection::vec(1u64..30, 6..25), m_max in 1u64..=200, a0 in 0i64..4) {
            let x = CFReal::prefix(big(a0), quotients.iter().map(|&a| BigInt::from(a)).collect()).unwrap();
            prop_assume!(x.last_convergent().q > BigInt::from(m_max));
            let r = best_rational_approx(&x, m_max).unwrap();
            prop_assert_eq!((r.c.clone(), r.m.clone()), brute_best(&x.value(), m_max));
            prop_assert!(r.c.gcd(&r.m).is_one());
        }
    }
}
