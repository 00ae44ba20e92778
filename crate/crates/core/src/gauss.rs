//! Complete Gauss sums `ξ^k_{a/q} = Σ_{t=0}^{q-1} e(a t^k / q)` and the scan
//! for `A_{≤Q}(k) = max_{2≤q≤Q} max_{(a,q)=1} |ξ^k_{a/q}| q^{1/k − 1}`.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::unit_exp_ratio;

/// Published upper bound on `A(k)` for every `k >= 2`.
pub const A_UPPER_BOUND: f64 = 4.709236;

/// Largest modulus accepted by [`gauss_sum`]; cost and memory are `O(q)`.
pub const MAX_GAUSS_MODULUS: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussSumRecord {
    pub a: u64,
    pub q: u64,
    pub k: u32,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `modulus · q^{1/k − 1}`.
    pub normalized: f64,
}

impl GaussSumRecord {
    fn new(a: u64, q: u64, k: u32, value: Complex64) -> Self {
        let modulus = value.norm();
        let normalized = modulus * (q as f64).powf(1.0 / f64::from(k) - 1.0);
        Self { a, q, k, re: value.re, im: value.im, modulus, normalized }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(q)) as u64
}

fn pow_mod(mut base: u64, mut exp: u32, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// `t^k mod q` for `t = 0, …, q − 1`.
fn power_table(q: u64, k: u32) -> Vec<u64> {
    (0..q).map(|t| pow_mod(t, k, q)).collect()
}

/// `Σ_r c_r e(r/q)` with `c_r = #{t : a t^k ≡ r (mod q)}`; `counts` is scratch
/// space of length `q`, left zeroed on return.
fn histogram_sum(a: u64, q: u64, powers: &[u64], counts: &mut [u32], roots: Option<&[Complex64]>) -> Complex64 {
    for &pw in powers {
        counts[mul_mod(a, pw, q) as usize] += 1;
    }
    // Residues r and q − r share cos and negate sin, so pairing them keeps
    // symmetric histograms exactly real.
    let q_us = q as usize;
    let mut re = f64::from(counts[0]);
    let mut im = 0.0;
    if q_us % 2 == 0 && q_us > 0 {
        re -= f64::from(counts[q_us / 2]);
    }
    for r in 1..q_us.div_ceil(2) {
        let (c, d) = (counts[r], counts[q_us - r]);
        if c + d == 0 {
            continue;
        }
        let z = match roots {
            Some(table) => table[r],
            None => unit_exp_ratio(r as u128, u128::from(q)),
        };
        re += z.re * f64::from(c + d);
        im += z.im * (f64::from(c) - f64::from(d));
    }
    counts.fill(0);
    Complex64::new(re, im)
}

fn check_power(k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("power k = {k} must be at least 2")));
    }
    Ok(())
}

/// `ξ^k_{a/q}` through the residue-count histogram of `a t^k mod q`.
///
/// `a` is reduced mod `q` first.
pub fn gauss_sum(a: u64, q: u64, k: u32) -> Result<GaussSumRecord> {
    check_power(k)?;
    if q == 0 {
        return Err(Error::ModulusTooSmall { q, min: 1 });
    }
    if q > MAX_GAUSS_MODULUS {
        return Err(Error::ModulusTooLarge { q: q.to_string(), limit: MAX_GAUSS_MODULUS });
    }
    let a = a % q;
    let powers = power_table(q, k);
    let mut counts = vec![0u32; q as usize];
    let value = histogram_sum(a, q, &powers, &mut counts, None);
    Ok(GaussSumRecord::new(a, q, k, value))
}

/// `|ξ^k_{a/q}| · q^{1/k − 1}` for coprime `a`, `q >= 2`.
pub fn normalized_modulus(a: u64, q: u64, k: u32) -> Result<f64> {
    if q < 2 {
        return Err(Error::ModulusTooSmall { q, min: 2 });
    }
    let g = a.gcd(&q);
    if g != 1 {
        return Err(Error::NotCoprime { a, q, gcd: g });
    }
    Ok(gauss_sum(a, q, k)?.normalized)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerModulusMax {
    pub q: u64,
    pub a: u64,
    pub value: f64,
}

/// Lower bound `A_{≤Q}(k)` for `A(k)` from an exhaustive scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AScanResult {
    pub k: u32,
    pub q_max: u64,
    pub value: f64,
    pub argmax_a: u64,
    pub argmax_q: u64,
    pub per_q_max: Vec<PerModulusMax>,
}

fn scan_modulus(q: u64, k: u32) -> PerModulusMax {
    let powers = power_table(q, k);
    let roots: Vec<Complex64> = (0..q).map(|r| unit_exp_ratio(u128::from(r), u128::from(q))).collect();
    let mut counts = vec![0u32; q as usize];
    let scale = (q as f64).powf(1.0 / f64::from(k) - 1.0);
    let mut best = PerModulusMax { q, a: 0, value: f64::NEG_INFINITY };
    // ξ_{(q−a)/q} is the conjugate of ξ_{a/q}.
    for a in (1..=q / 2).filter(|a| a.gcd(&q) == 1) {
        let value = histogram_sum(a, q, &powers, &mut counts, Some(&roots)).norm() * scale;
        if value > best.value {
            best = PerModulusMax { q, a, value };
        }
    }
    best
}

/// Exact maximisation over `2 <= q <= q_max`, `1 <= a <= q/2`, `gcd(a, q) = 1`.
///
/// The `q` range is split across `parallelism` workers; per-`q` maxima are
/// merged in increasing `q`, so the result does not depend on the worker
/// count.
pub fn a_constant_scan(k: u32, q_max: u64, parallelism: usize) -> Result<AScanResult> {
    check_power(k)?;
    if q_max < 2 {
        return Err(Error::ModulusTooSmall { q: q_max, min: 2 });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let per_q_max: Vec<PerModulusMax> =
        pool.install(|| (2..=q_max).into_par_iter().map(|q| scan_modulus(q, k)).collect());

    let mut best = per_q_max[0];
    for entry in &per_q_max[1..] {
        if entry.value > best.value {
            best = *entry;
        }
    }
    Ok(AScanResult { k, q_max, value: best.value, argmax_a: best.a, argmax_q: best.q, per_q_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct `Σ_t e(a t^k / q)` with floating phases, for small `q` only.
    fn direct(a: u64, q: u64, k: u32) -> Complex64 {
        (0..q)
            .map(|t| {
                let r = pow_mod(t, k, q) * a % q;
                Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / q as f64)
            })
            .sum()
    }

    fn close(z: Complex64, re: f64, im: f64, tol: f64) -> bool {
        (z.re - re).abs() <= tol && (z.im - im).abs() <= tol
    }

    #[test]
    fn gauss_sum_examples() {
        assert!(close(gauss_sum(1, 8, 3).unwrap().value(), 4.0, 0.0, 1e-12));
        assert!(close(gauss_sum(1, 4, 2).unwrap().value(), 2.0, 2.0, 1e-12));
        assert!(close(gauss_sum(0, 1, 5).unwrap().value(), 1.0, 0.0, 0.0));
        assert!(close(gauss_sum(2, 27, 3).unwrap().value(), 9.0, 0.0, 1e-9));
        assert!(gauss_sum(1, 0, 3).is_err());
        assert!(gauss_sum(1, 5, 1).is_err());
    }

    #[test]
    fn normalized_examples() {
        assert!((normalized_modulus(1, 4, 2).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(normalized_modulus(1, 2, 2).unwrap().abs() < 1e-15);
        assert!((normalized_modulus(1, 8, 3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(normalized_modulus(2, 4, 2), Err(Error::NotCoprime { a: 2, q: 4, gcd: 2 }));
        assert!(normalized_modulus(0, 1, 2).is_err());
    }

    #[test]
    fn matches_direct_summation() {
        for q in 1..60 {
            for a in 0..q {
                for k in 2..5 {
                    let g = gauss_sum(a, q, k).unwrap().value();
                    assert!((g - direct(a, q, k)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn prime_power_identity() {
        for (p, k) in [(2u64, 3u32), (2, 5), (5, 2), (3, 2), (7, 2), (5, 3), (3, 4), (2, 7)] {
            let q = p.pow(k);
            for a in (1..q.min(40)).filter(|a| a % p != 0) {
                let g = gauss_sum(a, q, k).unwrap().value();
                assert!(close(g, p.pow(k - 1) as f64, 0.0, 1e-9), "p={p} k={k} a={a}: {g}");
            }
        }
    }

    #[test]
    fn quadratic_pattern() {
        for q in 1..=200u64 {
            let expected = match q % 4 {
                0 => (2.0 * q as f64).sqrt(),
                2 => 0.0,
                _ => (q as f64).sqrt(),
            };
            for a in (1..q).filter(|a| a.gcd(&q) == 1) {
                let m = gauss_sum(a, q, 2).unwrap().modulus;
                assert!((m - expected).abs() < 1e-9, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn multiplicative_in_the_modulus() {
        // a/(q1 q2) = a1/q1 + a2/q2 with a1 = a q2^{-1} mod q1, a2 = a q1^{-1} mod q2.
        let inv = |x: u64, m: u64| (1..m).find(|y| x * y % m == 1).unwrap_or(0);
        for q1 in 2..=17u64 {
            for q2 in 2..=(300 / q1) {
                if q1.gcd(&q2) != 1 {
                    continue;
                }
                let q = q1 * q2;
                for a in (1..q).filter(|a| a.gcd(&q) == 1).take(6) {
                    for k in 2..=4 {
                        let a1 = a * inv(q2 % q1, q1) % q1;
                        let a2 = a * inv(q1 % q2, q2) % q2;
                        let lhs = gauss_sum(a, q, k).unwrap().modulus;
                        let rhs = gauss_sum(a1, q1, k).unwrap().modulus * gauss_sum(a2, q2, k).unwrap().modulus;
                        assert!((lhs - rhs).abs() < 1e-8, "a={a} q1={q1} q2={q2} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn small_scans() {
        let s = a_constant_scan(2, 3, 1).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(s.argmax_q, 3);
        let s = a_constant_scan(2, 100, 2).unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(s.argmax_q % 4, 0);
        assert!(a_constant_scan(2, 1, 1).is_err());
    }

    #[test]
    fn scan_is_monotone_and_parallelism_free() {
        let a = a_constant_scan(3, 60, 1).unwrap();
        let b = a_constant_scan(3, 60, 3).unwrap();
        assert_eq!(a, b);
        let c = a_constant_scan(3, 90, 2).unwrap();
        assert!(c.value >= a.value);
        assert_eq!(&c.per_q_max[..a.per_q_max.len()], &a.per_q_max[..]);
    }

    proptest! {
        #[test]
        fn conjugate_moduli_agree(q in 2u64..400, a in 1u64..400, k in 2u32..7) {
            let a = a % q;
            let x = gauss_sum(a, q, k).unwrap();
            let y = gauss_sum(q - a, q, k).unwrap();
            prop_assert!((x.modulus - y.modulus).abs() < 1e-12);
            prop_assert!((x.value() - y.value().conj()).norm() < 1e-9);
            prop_assert!(x.modulus <= q as f64 + 1e-9);
        }
    }
}
