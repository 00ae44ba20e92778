//! Weyl sums `S_n(x) = Σ_{l≤n} e(l^k x)`, truncations of
//! `F_k(x) = Σ_n e(n^k x)/n`, their Abel-transformed (Cesàro) form, and the
//! continued-fraction surrogate `Σ_i ξ_{p_i/q_i}/(k q_i) · ln(q_{i+1}/q_i)`.
//!
//! Points are exact rationals throughout; a [`CFReal`] prefix is evaluated at
//! the rational value of its quotients.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{CFReal, Convergent};
use crate::error::{Error, Result};
use crate::gauss::{gauss_sum, GaussSumRecord, A_UPPER_BOUND};
use crate::numeric::{bigint_str, ln_abs_rational, ln_biguint, rational_to_f64, PowerPhases};
use crate::quad;

/// Default limit on the convergent denominators whose Gauss sums are
/// evaluated directly.
pub const DEFAULT_MAX_MODULUS: u64 = 10_000_000;

/// Default window exponent of [`prop2_residual`], `q_i^τ <= m < q_{i+1}^τ`.
pub const DEFAULT_TAU: f64 = 2.0;

/// Pairing exponent used when comparing `F_N` with the surrogate: term `j`
/// is counted once `q_{j+1}^τ <= N`.
pub const GAP_PAIRING_TAU: f64 = 1.0;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `S_n(x)`.
pub fn weyl_partial_sum(x: &BigRational, k: u32, n: u64) -> Complex64 {
    PowerPhases::new(x, k).take(n as usize).sum()
}

/// `S_n(x)` at each of the strictly increasing `checkpoints`.
pub fn weyl_partial_sums(x: &BigRational, k: u32, checkpoints: &[u64]) -> Result<Vec<Complex64>> {
    check_checkpoints(checkpoints)?;
    let mut walker = PowerPhases::new(x, k);
    let mut sum = ZERO;
    let mut n = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        while n < c {
            sum += walker.step();
            n += 1;
        }
        out.push(sum);
    }
    Ok(out)
}

fn check_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Partial sums of `F_k` recorded at checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialSumTrace {
    pub x: String,
    pub k: u32,
    pub n: u64,
    pub checkpoints: Vec<u64>,
    pub values: Vec<Complex64>,
}

/// `Σ_{n≤N} e(n^k x)/n` at each checkpoint (default: just `N`), single pass.
pub fn riemann_partial_sum(x: &BigRational, k: u32, n_max: u64, checkpoints: &[u64]) -> Result<PartialSumTrace> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let checkpoints: Vec<u64> = if checkpoints.is_empty() { vec![n_max] } else { checkpoints.to_vec() };
    check_checkpoints(&checkpoints)?;
    if checkpoints.last().is_some_and(|&c| c > n_max) {
        return Err(Error::InvalidArgument("checkpoints may not exceed N".into()));
    }
    let mut walker = PowerPhases::new(x, k);
    let mut sum = ZERO;
    let mut n = 0u64;
    let mut values = Vec::with_capacity(checkpoints.len());
    for &c in &checkpoints {
        while n < c {
            n += 1;
            sum += walker.step() / n as f64;
        }
        values.push(sum);
    }
    Ok(PartialSumTrace { x: format!("{}/{}", x.numer(), x.denom()), k, n: n_max, checkpoints, values })
}

/// `Σ_{n≤N} e(n^k x)/n` without a trace.
pub fn truncated_series(x: &BigRational, k: u32, n_max: u64) -> Complex64 {
    let mut walker = PowerPhases::new(x, k);
    let mut sum = ZERO;
    for n in 1..=n_max {
        sum += walker.step() / n as f64;
    }
    sum
}

/// `Σ_{m≤n<N} S_n(x) / (n(n+1))` with a running `S_n`.
pub fn cesaro_form_sum(x: &BigRational, k: u32, m: u64, n_end: u64) -> Result<Complex64> {
    if m < 1 || m > n_end {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= N, got m = {m}, N = {n_end}")));
    }
    let mut walker = PowerPhases::new(x, k);
    let mut s = ZERO;
    let mut acc = ZERO;
    for n in 1..n_end {
        s += walker.step();
        if n >= m {
            let nf = n as f64;
            acc += s / (nf * (nf + 1.0));
        }
    }
    Ok(acc)
}

/// One summand `ξ_{p_j/q_j}/(k q_j) · ln(q_{j+1}/q_j)` of the surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateTerm {
    pub j: usize,
    #[serde(with = "bigint_str")]
    pub p: BigInt,
    pub q: u64,
    #[serde(with = "bigint_str")]
    pub q_next: BigInt,
    pub gauss: GaussSumRecord,
    pub log_ratio: f64,
    pub term: Complex64,
    /// `A · q_j^{-1/k} · ln(q_{j+1}/q_j) / k` with the published `A` bound.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateTrace {
    pub k: u32,
    pub j_start: usize,
    pub terms: Vec<SurrogateTerm>,
    pub partial_sums: Vec<Complex64>,
    /// First index skipped because `q_j` exceeded the modulus limit.
    pub truncated_at: Option<usize>,
}

impl SurrogateTrace {
    pub fn total(&self) -> Complex64 {
        self.partial_sums.last().copied().unwrap_or(ZERO)
    }

    /// Sum of the terms whose block has closed by `N`, i.e. `q_{j+1}^τ <= N`.
    pub fn sum_through(&self, n: u64, tau: f64) -> Complex64 {
        let ln_n = (n as f64).ln();
        self.terms
            .iter()
            .filter(|t| tau * ln_biguint(t.q_next.magnitude()) <= ln_n + 1e-12)
            .map(|t| t.term)
            .sum()
    }
}

/// `|ξ|/q ≤ A q^{-1/k}` rescaled by the log ratio.
pub fn term_bound(q: &BigInt, q_next: &BigInt, k: u32) -> f64 {
    let ln_q = ln_biguint(q.magnitude());
    let log_ratio = ln_biguint(q_next.magnitude()) - ln_q;
    A_UPPER_BOUND * (-ln_q / f64::from(k)).exp() * log_ratio / f64::from(k)
}

fn surrogate_term(conv: &[Convergent], j: usize, k: u32) -> Result<SurrogateTerm> {
    let c = &conv[j];
    let q = c.q.to_u64().expect("checked by caller");
    let a = c.p.mod_floor(&c.q).to_u64().expect("residue below q");
    let gauss = gauss_sum(a, q, k)?;
    let q_next = conv[j + 1].q.clone();
    let log_ratio = ln_biguint(q_next.magnitude()) - (q as f64).ln();
    let term = gauss.value() * (log_ratio / (f64::from(k) * q as f64));
    let bound = term_bound(&c.q, &q_next, k);
    Ok(SurrogateTerm { j, p: c.p.clone(), q, q_next, gauss, log_ratio, term, bound })
}

/// Surrogate terms for `j = j_start, …, J − 1`, stopping early when `q_j`
/// exceeds [`DEFAULT_MAX_MODULUS`].
pub fn surrogate_sum(x: &CFReal, k: u32, j_start: usize) -> Result<SurrogateTrace> {
    surrogate_sum_capped(x, k, j_start, DEFAULT_MAX_MODULUS)
}

/// [`surrogate_sum`] with an explicit limit on `q_j`.
pub fn surrogate_sum_capped(x: &CFReal, k: u32, j_start: usize, max_modulus: u64) -> Result<SurrogateTrace> {
    let conv = x.convergents();
    let mut trace = SurrogateTrace { k, j_start, terms: Vec::new(), partial_sums: Vec::new(), truncated_at: None };
    let mut running = ZERO;
    for j in j_start..conv.len().saturating_sub(1) {
        if conv[j].q > BigInt::from(max_modulus) {
            trace.truncated_at = Some(j);
            break;
        }
        let term = surrogate_term(conv, j, k)?;
        running += term.term;
        trace.terms.push(term);
        trace.partial_sums.push(running);
    }
    Ok(trace)
}

/// Block-closure exponent check `lo <= m < hi` with `lo = q_i^τ`, `hi = q_{i+1}^τ`.
fn window_contains(q_i: &BigInt, q_next: &BigInt, m: u64, tau: f64) -> bool {
    if tau.fract() == 0.0 && tau > 0.0 && tau <= 64.0 {
        let t = tau as u32;
        let m = BigInt::from(m);
        q_i.pow(t) <= m && m < q_next.pow(t)
    } else {
        let ln_m = (m as f64).ln();
        tau * ln_biguint(q_i.magnitude()) <= ln_m && ln_m < tau * ln_biguint(q_next.magnitude())
    }
}

fn ceil_power(q: &BigInt, tau: f64) -> Option<u64> {
    if tau.fract() == 0.0 && tau > 0.0 && tau <= 64.0 {
        q.pow(tau as u32).to_u64()
    } else {
        let v = (tau * ln_biguint(q.magnitude())).exp().ceil();
        (v < 1.8e19).then_some(v as u64)
    }
}

/// Largest Cesàro window handled by [`prop2_residual`].
pub const MAX_PROP2_WINDOW: u64 = 2_000_000_000;

/// Block sum minus its logarithmic main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Residual {
    pub i: usize,
    pub q_i: u64,
    #[serde(with = "bigint_str")]
    pub q_next: BigInt,
    pub m: u64,
    pub tau: f64,
    /// `⌈q_{i+1}^τ⌉`, the exclusive end of the Cesàro window.
    pub n_end: u64,
    pub cesaro: Complex64,
    pub main: Complex64,
    pub residual: Complex64,
    /// `q_i^{-1/2^{k+1}} + q_i^{-1/(2^k (k-1))} ln q_i`, the expected order.
    pub remainder_scale: f64,
}

/// `Σ_{m≤n<q_{i+1}^τ} S_n/(n(n+1)) − ξ_{p_i/q_i}/(k q_i) · ln⁺(q_i q_{i+1}/m^k)`.
pub fn prop2_residual(x: &CFReal, k: u32, i: usize, m: u64, tau: f64) -> Result<Prop2Residual> {
    let conv = x.convergents();
    if i + 1 >= conv.len() {
        return Err(Error::MissingConvergent { index: i + 1, available: conv.len() });
    }
    let (q_i, q_next) = (&conv[i].q, &conv[i + 1].q);
    let q_small = q_i
        .to_u64()
        .filter(|&q| q <= DEFAULT_MAX_MODULUS)
        .ok_or_else(|| Error::ModulusTooLarge { q: q_i.to_string(), limit: DEFAULT_MAX_MODULUS })?;
    if !window_contains(q_i, q_next, m, tau) {
        return Err(Error::OutsideWindow {
            m,
            lo: format!("{q_i}^{tau}"),
            hi: format!("{q_next}^{tau}"),
            tau,
        });
    }
    let n_end = ceil_power(q_next, tau)
        .filter(|&n| n <= MAX_PROP2_WINDOW)
        .ok_or_else(|| Error::InvalidArgument(format!("window end {q_next}^{tau} exceeds {MAX_PROP2_WINDOW}")))?;

    let cesaro = cesaro_form_sum(&x.value(), k, m, n_end)?;
    let xi = gauss_sum(conv[i].p.mod_floor(q_i).to_u64().expect("residue"), q_small, k)?.value();
    let kf = f64::from(k);
    let log_arg = ln_biguint(q_i.magnitude()) + ln_biguint(q_next.magnitude()) - kf * (m as f64).ln();
    let main = xi * (log_arg.max(0.0) / (kf * q_small as f64));
    let ln_q = (q_small as f64).ln();
    let remainder_scale = (-ln_q / 2f64.powi(k as i32 + 1)).exp()
        + (-ln_q / (2f64.powi(k as i32) * (kf - 1.0))).exp() * ln_q;
    Ok(Prop2Residual {
        i,
        q_i: q_small,
        q_next: q_next.clone(),
        m,
        tau,
        n_end,
        cesaro,
        main,
        residual: cesaro - main,
        remainder_scale,
    })
}

/// Result of comparing `∫_m^N e(y^k β)/y dy` with `(1/k) ln⁺(|β|^{-1} m^{-k})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryCheck {
    pub integral: Complex64,
    pub main: f64,
    pub discrepancy: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Relative tolerance of the oscillatory quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-8;

/// Upper limit on quarter-period panels in [`oscillatory_integral_check`].
pub const MAX_QUADRATURE_PANELS: f64 = 5e7;

/// Composite Gauss–Legendre quadrature of `e(y^k β)/y` on `[m, N]`.
///
/// Breakpoints are placed so that each panel is at most a quarter of the
/// local period `1/(k |β| y^{k-1})` at its right end and at most its left
/// endpoint wide; each panel is then bisected until the refinement change is
/// below the tolerance times `∫|integrand|` over it.
pub fn oscillatory_integral_check(m: u64, n_end: u64, beta: &BigRational, k: u32) -> Result<OscillatoryCheck> {
    if m < 1 || n_end < m {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= N, got m = {m}, N = {n_end}")));
    }
    if beta.is_zero() || k < 1 {
        return Err(Error::InvalidArgument("β must be nonzero and k >= 1".into()));
    }
    let kf = f64::from(k);
    let ln_beta = ln_abs_rational(beta);
    let main = ((-ln_beta - kf * (m as f64).ln()) / kf).max(0.0);
    if n_end == m {
        return Ok(OscillatoryCheck { integral: ZERO, main, discrepancy: main, error_estimate: 0.0, panels: 0 });
    }

    let beta_f = rational_to_f64(beta);
    let (a, b) = (m as f64, n_end as f64);
    let expected_panels = 4.0 * kf * beta_f.abs() * b.powf(kf) + (b / a).log2();
    if expected_panels > MAX_QUADRATURE_PANELS {
        return Err(Error::InvalidArgument(format!(
            "integrand has about {expected_panels:.3e} quarter periods on [m, N]; limit {MAX_QUADRATURE_PANELS:e}"
        )));
    }

    let quarter = |y: f64| 1.0 / (4.0 * kf * beta_f.abs() * y.powf(kf - 1.0));
    let mut breaks = vec![a];
    let mut y = a;
    while y < b {
        let w0 = quarter(y).min(y);
        let w = quarter((y + w0).min(b)).min(w0);
        y = (y + w).min(b);
        breaks.push(y);
    }

    let f = |y: f64| {
        let phase = (y.powf(kf) * beta_f).rem_euclid(1.0);
        Complex64::from_polar(1.0 / y, std::f64::consts::TAU * phase)
    };
    let scale = |lo: f64, hi: f64| (hi / lo).ln();
    let r = quad::adaptive(&f, &breaks, QUADRATURE_TOLERANCE, scale)?;
    let discrepancy = (r.value - main).norm();
    Ok(OscillatoryCheck { integral: r.value, main, discrepancy, error_estimate: r.error, panels: r.panels })
}

/// `F_k` diverges at the reduced fraction `a/q` iff `ξ^k_{a/q} ≠ 0`.
pub fn rational_divergence_test(a: u64, q: u64, k: u32) -> Result<bool> {
    let g = a.gcd(&q);
    if g != 1 {
        return Err(Error::NotCoprime { a, q, gcd: g });
    }
    Ok(gauss_sum(a, q, k)?.modulus > 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub basis: String,
    pub gauss_modulus: Option<f64>,
    pub terms_used: usize,
    pub partial_sum: Option<Complex64>,
    pub tail_bound: Option<f64>,
    pub tolerance: f64,
    pub assumed_max_quotient: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictBudget {
    /// Largest admissible bound on the unseen surrogate tail.
    pub tolerance: f64,
    pub max_modulus: u64,
}

impl Default for VerdictBudget {
    fn default() -> Self {
        Self { tolerance: 0.25, max_modulus: DEFAULT_MAX_MODULUS }
    }
}

/// Decides convergence of `F_k` at `x`.
///
/// Exact rationals are settled by the Gauss-sum criterion. A prefix can only
/// yield convergence evidence: the surrogate terms are summed as far as the
/// modulus budget allows, the remaining known terms are bounded by
/// [`term_bound`], and the unseen tail is bounded assuming later partial
/// quotients do not exceed the largest one seen (using `q_{j+2} >= 2 q_j`).
pub fn convergence_verdict(x: &CFReal, k: u32, budget: &VerdictBudget) -> Result<Verdict> {
    let last = x.last_convergent();
    if x.is_exact() {
        let value = x.value();
        let q = value.denom().clone();
        let a = value.numer().mod_floor(&q);
        let mut evidence = Evidence {
            basis: "rational point: F_k diverges iff the complete Gauss sum is nonzero".into(),
            gauss_modulus: None,
            terms_used: 0,
            partial_sum: None,
            tail_bound: None,
            tolerance: budget.tolerance,
            assumed_max_quotient: None,
        };
        let Some(q) = q.to_u64().filter(|&q| q <= budget.max_modulus) else {
            evidence.basis = format!("denominator {q} exceeds the modulus budget");
            return Ok(Verdict { outcome: Outcome::Inconclusive, evidence });
        };
        let g = gauss_sum(a.to_u64().expect("residue"), q, k)?;
        evidence.gauss_modulus = Some(g.modulus);
        let outcome = if g.modulus > 1e-9 { Outcome::Diverges } else { Outcome::Converges };
        return Ok(Verdict { outcome, evidence });
    }

    let trace = surrogate_sum_capped(x, k, 0, budget.max_modulus)?;
    let conv = x.convergents();
    let kf = f64::from(k);
    let mut tail = 0.0;
    if let Some(start) = trace.truncated_at {
        for j in start..conv.len() - 1 {
            tail += term_bound(&conv[j].q, &conv[j + 1].q, k);
        }
    }
    let a_max = x.quotients().iter().max().cloned().unwrap_or_else(|| BigInt::from(1));
    let ln_growth = ln_biguint((&a_max + 1u32).magnitude());
    let geometric = 2.0 / (1.0 - 2f64.powf(-1.0 / kf));
    tail += A_UPPER_BOUND * ln_growth / kf * (-ln_biguint(last.q.magnitude()) / kf).exp() * geometric;

    let outcome = if tail <= budget.tolerance { Outcome::Converges } else { Outcome::Inconclusive };
    Ok(Verdict {
        outcome,
        evidence: Evidence {
            basis: "prefix: surrogate partial sum with term-bound tail under bounded later quotients".into(),
            gauss_modulus: None,
            terms_used: trace.terms.len(),
            partial_sum: Some(trace.total()),
            tail_bound: Some(tail),
            tolerance: budget.tolerance,
            assumed_max_quotient: Some(a_max.to_string()),
        },
    })
}

/// `|F_N(x) − Σ_{q_{j+1}^τ ≤ N} term_j|` at one truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub n: u64,
    pub partial: Complex64,
    pub surrogate: Complex64,
    pub gap: f64,
}

/// Gap between truncations of `F_k` and of the surrogate (terms from `j = 0`,
/// so the `ln a_1 / k` growth near 0 is matched) at each checkpoint.
pub fn surrogate_gap(x: &CFReal, k: u32, checkpoints: &[u64], tau: f64) -> Result<Vec<GapPoint>> {
    let n_max = *checkpoints.last().ok_or_else(|| Error::InvalidArgument("no checkpoints".into()))?;
    let trace = riemann_partial_sum(&x.value(), k, n_max, checkpoints)?;
    let q_limit = ((n_max as f64).ln() / tau).exp().floor() as u64;
    let surrogate = surrogate_sum_capped(x, k, 0, q_limit.max(1))?;
    Ok(checkpoints
        .iter()
        .zip(&trace.values)
        .map(|(&n, &partial)| {
            let s = surrogate.sum_through(n, tau);
            GapPoint { n, partial, surrogate: s, gap: (partial - s).norm() }
        })
        .collect())
}

/// Mean gap over points at each truncation and its least-squares slope
/// against `ln N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSlope {
    pub checkpoints: Vec<u64>,
    pub mean_gap: Vec<f64>,
    pub max_gap: Vec<f64>,
    pub slope: f64,
}

pub fn surrogate_gap_slope(points: &[CFReal], k: u32, checkpoints: &[u64], tau: f64) -> Result<GapSlope> {
    if points.is_empty() || checkpoints.len() < 2 {
        return Err(Error::InvalidArgument("need at least one point and two checkpoints".into()));
    }
    let mut mean_gap = vec![0.0; checkpoints.len()];
    let mut max_gap = vec![0.0f64; checkpoints.len()];
    for x in points {
        for (t, g) in surrogate_gap(x, k, checkpoints, tau)?.iter().enumerate() {
            mean_gap[t] += g.gap / points.len() as f64;
            max_gap[t] = max_gap[t].max(g.gap);
        }
    }
    let ln_n: Vec<f64> = checkpoints.iter().map(|&n| (n as f64).ln()).collect();
    let slope = least_squares_slope(&ln_n, &mean_gap);
    Ok(GapSlope { checkpoints: checkpoints.to_vec(), mean_gap, max_gap, slope })
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Magnitude of `x − p/q` as `f64`, for reporting.
pub fn approximation_error(x: &CFReal, j: usize) -> f64 {
    rational_to_f64(&(x.value() - x.convergents()[j].value()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use proptest::prelude::*;

    fn close(z: Complex64, re: f64, im: f64, tol: f64) -> bool {
        (z.re - re).abs() <= tol && (z.im - im).abs() <= tol
    }

    #[test]
    fn weyl_examples() {
        assert!(close(weyl_partial_sum(&ratio(0, 1), 3, 5), 5.0, 0.0, 0.0));
        assert!(close(weyl_partial_sum(&ratio(1, 2), 2, 4), 0.0, 0.0, 1e-15));
        assert!(close(weyl_partial_sum(&ratio(1, 2), 2, 3), -1.0, 0.0, 1e-15));
    }

    #[test]
    fn riemann_examples() {
        let t = riemann_partial_sum(&ratio(0, 1), 2, 4, &[]).unwrap();
        assert!(close(t.values[0], 25.0 / 12.0, 0.0, 1e-15));
        let t = riemann_partial_sum(&ratio(1, 2), 2, 2, &[]).unwrap();
        assert!(close(t.values[0], -0.5, 0.0, 1e-15));
        let t = riemann_partial_sum(&ratio(0, 1), 2, 4, &[1, 2, 4]).unwrap();
        assert!(close(t.values[1], 1.5, 0.0, 1e-15));
        assert!(riemann_partial_sum(&ratio(0, 1), 2, 4, &[2, 2]).is_err());
        assert!(riemann_partial_sum(&ratio(0, 1), 2, 4, &[5]).is_err());
    }

    #[test]
    fn cesaro_examples() {
        assert!(close(cesaro_form_sum(&ratio(0, 1), 3, 1, 3).unwrap(), 5.0 / 6.0, 0.0, 1e-15));
        assert!(close(cesaro_form_sum(&ratio(1, 2), 2, 1, 3).unwrap(), -0.5, 0.0, 1e-15));
        let x = ratio(7, 19);
        let s = weyl_partial_sum(&x, 3, 9);
        let single = cesaro_form_sum(&x, 3, 9, 10).unwrap();
        assert!((single - s / 90.0).norm() < 1e-15);
        assert!(cesaro_form_sum(&x, 3, 0, 10).is_err());
    }

    #[test]
    fn periodicity_at_rationals() {
        for (p, q, k) in [(1i64, 8u64, 3u32), (3, 7, 2), (5, 12, 4), (2, 9, 3)] {
            let xi = gauss_sum(p as u64, q, k).unwrap().value();
            for blocks in 1..5u64 {
                let s = weyl_partial_sum(&ratio(p, q), k, blocks * q);
                assert!((s - xi * blocks as f64).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn surrogate_edges() {
        let half = CFReal::exact_fraction(&[2]).unwrap();
        let t = surrogate_sum(&half, 2, 1).unwrap();
        assert!(t.terms.is_empty());
        assert_eq!(t.total(), ZERO);
        let zero = CFReal::exact(BigInt::zero(), vec![]).unwrap();
        assert!(surrogate_sum(&zero, 3, 0).unwrap().terms.is_empty());
    }

    #[test]
    fn surrogate_on_golden_prefix_is_cauchy() {
        let x = CFReal::prefix_fraction(&[1; 30]).unwrap();
        let t = surrogate_sum(&x, 3, 1).unwrap();
        assert_eq!(t.terms.len(), 29);
        for term in &t.terms {
            assert!(term.term.norm() <= term.bound + 1e-12);
        }
        let tail_bound: f64 = t.terms[15..].iter().map(|term| term.bound).sum();
        let anchor = t.partial_sums[14];
        let movement = t.partial_sums[15..].iter().map(|s| (s - anchor).norm()).fold(0.0, f64::max);
        assert!(movement < 10.0 * tail_bound);
    }

    #[test]
    fn large_quotient_dominates() {
        let x = CFReal::prefix_fraction(&[1, 1_000_000, 1, 1, 2, 1]).unwrap();
        let t = surrogate_sum(&x, 3, 0).unwrap();
        let big = t.terms.iter().max_by(|a, b| a.term.norm().total_cmp(&b.term.norm())).unwrap();
        assert_eq!(big.j, 1);
        let expected = big.gauss.modulus / (3.0 * big.q as f64) * (1e6f64 + 1.0).ln();
        assert!((big.term.norm() - expected).abs() < 1e-9);
    }

    #[test]
    fn prop2_window_and_clamp() {
        let x = CFReal::prefix_fraction(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 5, 2, 3, 1, 4, 1, 1, 2, 7, 1, 1, 3, 1, 2, 1, 1, 5, 1, 2, 1]).unwrap();
        let conv = x.convergents();
        let i = 9;
        let q_i = conv[i].q.to_u64().unwrap();
        assert_eq!(q_i, 55);
        let err = prop2_residual(&x, 3, i, q_i * q_i - 1, 2.0).unwrap_err();
        assert!(err.to_string().contains("q_i^τ ≤ m < q_{i+1}^τ"));
        let r = prop2_residual(&x, 3, i, q_i * q_i, 2.0).unwrap();
        // m^k = 55^6 far exceeds q_i q_{i+1}, so the main term clamps to 0.
        assert_eq!(r.main, ZERO);
        assert_eq!(r.residual, r.cesaro);
        assert!(r.residual.norm().is_finite());

        let longer = CFReal::prefix_fraction(&[
            1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 5, 2, 3, 1, 4, 1, 1, 2, 7, 1, 1, 3, 1, 2, 1, 1, 5, 1, 2, 1, 3, 1, 1, 2, 4, 1, 6, 1,
            1, 2, 1, 3, 1, 1, 2, 1, 1, 4, 1, 2, 1, 1, 3, 1, 2, 5, 1, 1, 2, 1,
        ])
        .unwrap();
        let r2 = prop2_residual(&longer, 3, i, q_i * q_i, 2.0).unwrap();
        assert!((r2.residual - r.residual).norm() < 1e-6);
    }

    #[test]
    fn oscillatory_examples() {
        let beta = ratio(1, 1_000_000);
        let c = oscillatory_integral_check(1, 1000, &beta, 2).unwrap();
        assert!((c.main - 0.5 * 1e6f64.ln()).abs() < 1e-12);
        assert!(c.discrepancy < 3.0);
        let empty = oscillatory_integral_check(5, 5, &beta, 2).unwrap();
        assert_eq!(empty.integral, ZERO);
        assert_eq!(empty.discrepancy, empty.main);
        assert!(oscillatory_integral_check(1, 10, &ratio(0, 1), 2).is_err());
    }

    #[test]
    fn oscillatory_matches_substituted_form() {
        // With u = y^k β the integral is (1/k) ∫ e(u)/u du; check k = 1 against
        // a dense trapezoid on the substituted integrand.
        let beta = ratio(1, 50);
        let c = oscillatory_integral_check(2, 400, &beta, 1).unwrap();
        let (lo, hi) = (2.0 / 50.0, 8.0);
        let steps = 2_000_000;
        let h = (hi - lo) / steps as f64;
        let g = |u: f64| Complex64::from_polar(1.0 / u, std::f64::consts::TAU * u);
        let mut acc = (g(lo) + g(hi)) * 0.5;
        for s in 1..steps {
            acc += g(lo + s as f64 * h);
        }
        assert!((c.integral - acc * h).norm() < 1e-6);
    }

    #[test]
    fn oscillatory_sweep_without_main_term() {
        for e in 0..8 {
            let beta = BigRational::new(BigInt::from(1), BigInt::from(3u64.pow(e)));
            let m = (3u64.pow(e) as f64).sqrt() as u64 + 1;
            let c = oscillatory_integral_check(m, 60 * m, &beta, 2).unwrap();
            assert_eq!(c.main, 0.0);
            assert!(c.discrepancy < 3.0, "e={e}: {}", c.discrepancy);
        }
    }

    #[test]
    fn divergence_examples() {
        assert!(rational_divergence_test(1, 8, 3).unwrap());
        assert!(!rational_divergence_test(1, 2, 2).unwrap());
        assert!(rational_divergence_test(1, 3, 2).unwrap());
        assert!(rational_divergence_test(2, 4, 2).is_err());
    }

    #[test]
    fn verdict_examples() {
        let budget = VerdictBudget::default();
        let half = CFReal::exact_fraction(&[2]).unwrap();
        assert_eq!(convergence_verdict(&half, 2, &budget).unwrap().outcome, Outcome::Converges);
        let eighth = CFReal::exact_fraction(&[8]).unwrap();
        assert_eq!(convergence_verdict(&eighth, 3, &budget).unwrap().outcome, Outcome::Diverges);
        let golden = CFReal::prefix_fraction(&[1; 30]).unwrap();
        let v = convergence_verdict(&golden, 3, &budget).unwrap();
        assert_eq!(v.outcome, Outcome::Converges);
        assert!(v.evidence.tail_bound.unwrap() <= budget.tolerance);
        let short = CFReal::prefix_fraction(&[1, 1, 1]).unwrap();
        assert_eq!(convergence_verdict(&short, 3, &budget).unwrap().outcome, Outcome::Inconclusive);
    }

    #[test]
    fn gap_pairs_blocks() {
        let x = CFReal::prefix_fraction(&[3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4]).unwrap();
        let gaps = surrogate_gap(&x, 3, &[1000, 10_000], 2.0).unwrap();
        assert_eq!(gaps.len(), 2);
        assert!(gaps.iter().all(|g| g.gap.is_finite()));
        // No term is counted before its block closes.
        assert_eq!(surrogate_gap(&x, 3, &[1], 2.0).unwrap()[0].surrogate, ZERO);
    }

    #[test]
    fn slope_of_line() {
        let x = [1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        assert!((least_squares_slope(&x, &y) + 0.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn abel_identity(p in 0u64..1_000_000_007, k in 2u32..6, n in 2u64..3_000) {
            let x = ratio(p as i64, 1_000_000_007);
            let f = riemann_partial_sum(&x, k, n, &[]).unwrap().values[0];
            let s = weyl_partial_sum(&x, k, n);
            let c = cesaro_form_sum(&x, k, 1, n).unwrap();
            prop_assert!((f - c - s / n as f64).norm() < 1e-9);
        }

        #[test]
        fn weyl_sums_bounded_by_length(p in 0u64..10_000, q in 1u64..10_000, k in 1u32..6) {
            let x = ratio((p % q) as i64, q);
            let cps = [1u64, 7, 50, 333];
            let sums = weyl_partial_sums(&x, k, &cps).unwrap();
            for (s, n) in sums.iter().zip(cps) {
                prop_assert!(s.norm() <= n as f64 + 1e-9);
            }
        }
    }
}
