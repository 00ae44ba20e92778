//! Mean-oscillation functionals of truncated `F_k`: the Fefferman block
//! functional of the coefficient sequence `a_l = 1/n` at `l = n^k − m`,
//! Monte-Carlo oscillation over intervals, the level-set tail experiment on
//! convergent intervals, and a dyadic lower estimate of the BMO norm.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contfrac::{
    interval_of_convergent, refine_interval, refined_base, sample_point, substream, CFReal, ConvergentInterval,
    IntervalMode, QuotientLaw,
};
use crate::error::{Error, Result};
use crate::gauss::A_UPPER_BOUND;
use crate::numeric::{ln_biguint, ratio};
use crate::series::{least_squares_slope, surrogate_sum, truncated_series};

/// `((N/2k)^{k/(k-1)} − m) / N`, the number of blocks over which the
/// ceiling-gap inequality is available.
pub fn block_range(k: u32, m: u64, n: u64) -> f64 {
    let kf = f64::from(k);
    ((n as f64 / (2.0 * kf)).powf(kf / (kf - 1.0)) - m as f64) / n as f64
}

/// `(1/(8k²)) (1/(1 + m/N) − 2/J(k,m,N))`.
pub fn chain_bound(k: u32, m: u64, n: u64) -> f64 {
    let kf = f64::from(k);
    (1.0 / (1.0 + m as f64 / n as f64) - 2.0 / block_range(k, m, n)) / (8.0 * kf * kf)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockFunctionalResult {
    pub k: u32,
    pub m: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub n_max: u64,
    /// Number of nonempty blocks.
    pub j_cut: u64,
    /// `Σ_{j≥1} (Σ_{jN ≤ l < (j+1)N} a_l)²`.
    pub block_sum: f64,
    /// `J(k,m,N)`.
    pub block_range: f64,
    /// [`chain_bound`], reported when `J(k,m,N) > 2`.
    pub lower_bound: Option<f64>,
}

/// Nonempty blocks `(j, Σ_{l in block j} a_l)` in increasing `j`, using the
/// coefficients with `n <= n_max` and `l = n^k − m >= N`.
pub fn blocks(k: u32, m: u64, n: u64, n_max: u64) -> Result<impl Iterator<Item = (u64, f64)>> {
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument("need k >= 2 and N >= 1".into()));
    }
    if u128::from(n_max).checked_pow(k).is_none() {
        return Err(Error::InvalidArgument(format!("n_max^k overflows for n_max = {n_max}, k = {k}")));
    }
    let (m, width) = (u128::from(m), u128::from(n));
    let mut terms = (1..=n_max).filter_map(move |i| {
        let l = u128::from(i).pow(k).checked_sub(m)?;
        (l >= width).then(|| ((l / width) as u64, 1.0 / i as f64))
    });
    let mut pending = terms.next();
    Ok(std::iter::from_fn(move || {
        let (j, mut acc) = pending?;
        pending = None;
        for (j2, a) in terms.by_ref() {
            if j2 != j {
                pending = Some((j2, a));
                break;
            }
            acc += a;
        }
        Some((j, acc))
    }))
}

pub fn fefferman_blocks(k: u32, m: u64, n: u64, n_max: u64) -> Result<BlockFunctionalResult> {
    let mut j_cut = 0;
    let mut block_sum = 0.0;
    for (_, s) in blocks(k, m, n, n_max)? {
        j_cut += 1;
        block_sum += s * s;
    }
    let range = block_range(k, m, n);
    Ok(BlockFunctionalResult {
        k,
        m,
        n,
        n_max,
        j_cut,
        block_sum,
        block_range: range,
        lower_bound: (range > 2.0).then(|| chain_bound(k, m, n)),
    })
}

/// `max_N sqrt(block_sum)` over the given block widths.
pub fn fefferman_s(k: u32, m: u64, n_list: &[u64], n_max: u64) -> Result<f64> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("N list is empty".into()));
    }
    n_list.iter().try_fold(0.0f64, |best, &n| Ok(best.max(fefferman_blocks(k, m, n, n_max)?.block_sum.sqrt())))
}

fn ceil_root(v: &BigUint, k: u32) -> BigUint {
    let r = v.nth_root(k);
    if r.pow(k) < *v {
        r + 1u32
    } else {
        r
    }
}

/// `⌈((j+1)N+m)^{1/k}⌉ − ⌈(jN+m)^{1/k}⌉ >= (((j+1)N+m)^{1/k} − (jN+m)^{1/k})/2`
/// for `j + 1 <= J(k,m,N)`.
pub fn ceil_gap_check(k: u32, m: u64, n: u64, j: u64) -> Result<bool> {
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument("need k >= 2 and N >= 1".into()));
    }
    let bound = block_range(k, m, n);
    if (j + 1) as f64 > bound {
        return Err(Error::BeyondBlockRange { j_next: j + 1, bound });
    }
    let lo = BigUint::from(j) * n + m;
    let hi = BigUint::from(j + 1) * n + m;
    let gap = ceil_root(&hi, k) - ceil_root(&lo, k);
    let root = |v: &BigUint| (ln_biguint(v) / f64::from(k)).exp();
    let real_gap = root(&hi) - root(&lo);
    Ok(gap.to_f64().expect("small") >= real_gap / 2.0)
}

/// Mean of `|h − mean(h)|`.
pub fn interval_oscillation(values: &[Complex64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    Ok(values.iter().map(|v| (v - mean).norm()).sum::<f64>() / n)
}

/// How `F_k` is evaluated at sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    /// Direct partial sum `Σ_{n≤N} e(n^k x)/n`.
    Truncated,
    /// Surrogate sum over the convergents of the sample point.
    Surrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JnTailConfig {
    pub p: u64,
    pub q: u64,
    pub k: u32,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    pub truncation_n: u64,
    pub seed: u64,
    /// Extra partial quotients `b` selecting `I_b ⊂ I_{p/q}`.
    pub sub_interval: Option<Vec<u64>>,
    pub a_ref: f64,
    /// Constant of the correction factor `e^{C q^{1/k − 1/(2^k(k−1))} ln q}`.
    pub correction: Option<f64>,
    /// Random quotients appended before the precision target is checked.
    pub depth: usize,
    pub max_quotient: u64,
    pub mode: IntervalMode,
    pub evaluator: Evaluator,
    pub parallelism: usize,
}

impl JnTailConfig {
    pub fn new(p: u64, q: u64, k: u32, lambdas: Vec<f64>, samples: usize, truncation_n: u64, seed: u64) -> Self {
        Self {
            p,
            q,
            k,
            lambdas,
            samples,
            truncation_n,
            seed,
            sub_interval: None,
            a_ref: A_UPPER_BOUND,
            correction: None,
            depth: 24,
            max_quotient: 10_000,
            mode: IntervalMode::TwoSided,
            evaluator: Evaluator::Truncated,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailHistogram {
    pub interval: ConvergentInterval,
    pub sub_interval: Option<Vec<u64>>,
    pub p: u64,
    pub q: u64,
    pub k: u32,
    pub lambdas: Vec<f64>,
    /// Fraction of samples with `|F − mean| > λ`.
    pub empirical: Vec<f64>,
    /// `e^{−rate·λ}` for `k >= 3` (times the correction factor when given);
    /// `e^{−λ√(2q)}` for `k = 2`.
    pub theorem2_curve: Vec<f64>,
    /// `e^{−λ/osc}` with `osc` the sample mean oscillation.
    pub classic_jn: Vec<f64>,
    /// `k q^{1/k} / A_ref`.
    pub theorem2_rate: f64,
    pub a_ref: f64,
    pub correction: Option<f64>,
    pub samples: usize,
    pub truncation_n: u64,
    pub seed: u64,
    pub depth: usize,
    pub max_quotient: u64,
    pub evaluator: Evaluator,
    pub mean: Complex64,
    pub oscillation: f64,
    pub max_deviation: f64,
    pub redraws: u64,
}

impl TailHistogram {
    /// Least-squares slope of `ln(empirical)` on `λ` over the nonzero bins.
    pub fn log_slope(&self) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .lambdas
            .iter()
            .zip(&self.empirical)
            .filter(|(_, &e)| e > 0.0)
            .map(|(&l, &e)| (l, e.ln()))
            .unzip();
        (x.len() >= 2).then(|| least_squares_slope(&x, &y))
    }
}

fn sample_vec(cfg: &JnTailConfig, interval: &ConvergentInterval, base: &CFReal, index: u64, min_q: &BigInt, target: &BigInt) -> (CFReal, u64) {
    let law = QuotientLaw::GaussKuzmin { max_quotient: cfg.max_quotient };
    let mut rng = substream(cfg.seed, index);
    let mut redraws = 0;
    loop {
        let mut x = sample_point(interval, base, cfg.depth, law, &mut rng);
        while &x.last_convergent().q * &x.last_convergent().q < *target {
            x = x.extended(&[BigInt::from(law.draw(&mut rng))]).expect("positive quotient");
        }
        if x.value().denom() >= min_q {
            return (x, redraws);
        }
        redraws += 1;
    }
}

/// Level-set measures of `|F_k − (F_k)_J|` on `J = I_{p/q}` (or `I_b`).
pub fn jn_tail_experiment(cfg: &JnTailConfig) -> Result<TailHistogram> {
    let (p, q, k) = (cfg.p, cfg.q, cfg.k);
    let g = p.gcd(&q);
    if g != 1 {
        return Err(Error::NotCoprime { a: p, q, gcd: g });
    }
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    if cfg.samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let q_squared = q.checked_mul(q).unwrap_or(u64::MAX);
    if cfg.truncation_n < q_squared {
        return Err(Error::TruncationTooShort { n: cfg.truncation_n, q_squared });
    }
    let base = CFReal::from_rational(&ratio(p as i64, q));
    let (interval, base) = match &cfg.sub_interval {
        Some(b) => (refine_interval(&base, b, cfg.mode)?, refined_base(&base, b)?),
        None => (interval_of_convergent(&BigInt::from(p), &BigInt::from(q), cfg.mode)?, base),
    };

    let min_q = BigInt::from(10 * q);
    let target = BigInt::from(cfg.truncation_n).pow(k);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let evaluated: Vec<Result<(Complex64, u64)>> = pool.install(|| {
        use rayon::prelude::*;
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let (x, redraws) = sample_vec(cfg, &interval, &base, i, &min_q, &target);
                let v = match cfg.evaluator {
                    Evaluator::Truncated => truncated_series(&x.value(), k, cfg.truncation_n),
                    Evaluator::Surrogate => surrogate_sum(&x, k, 0)?.total(),
                };
                Ok((v, redraws))
            })
            .collect()
    });
    let mut values = Vec::with_capacity(cfg.samples);
    let mut redraws = 0;
    for r in evaluated {
        let (v, d) = r?;
        values.push(v);
        redraws += d;
    }

    let n = values.len() as f64;
    let mean = values.iter().sum::<Complex64>() / n;
    let deviations: Vec<f64> = values.iter().map(|v| (v - mean).norm()).collect();
    let oscillation = deviations.iter().sum::<f64>() / n;
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let empirical: Vec<f64> =
        cfg.lambdas.iter().map(|&l| deviations.iter().filter(|&&d| d > l).count() as f64 / n).collect();

    let (kf, qf) = (f64::from(k), q as f64);
    let rate = kf * qf.powf(1.0 / kf) / cfg.a_ref;
    let ln_correction = cfg.correction.map_or(0.0, |c| {
        c * qf.powf(1.0 / kf - 1.0 / (2f64.powi(k as i32) * (kf - 1.0))) * qf.ln()
    });
    let theorem2_curve = cfg
        .lambdas
        .iter()
        .map(|&l| if k == 2 { (-l * (2.0 * qf).sqrt()).exp() } else { (-rate * l + ln_correction).exp() })
        .collect();
    let classic_jn = cfg.lambdas.iter().map(|&l| (-l / oscillation).exp()).collect();

    Ok(TailHistogram {
        interval,
        sub_interval: cfg.sub_interval.clone(),
        p,
        q,
        k,
        lambdas: cfg.lambdas.clone(),
        empirical,
        theorem2_curve,
        classic_jn,
        theorem2_rate: rate,
        a_ref: cfg.a_ref,
        correction: cfg.correction,
        samples: cfg.samples,
        truncation_n: cfg.truncation_n,
        seed: cfg.seed,
        depth: cfg.depth,
        max_quotient: cfg.max_quotient,
        evaluator: cfg.evaluator,
        mean,
        oscillation,
        max_deviation,
        redraws,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoEstimate {
    pub value: f64,
    pub level: u32,
    pub index: u64,
    /// Largest oscillation found at each level `0..=depth`.
    pub per_level: Vec<f64>,
}

/// Point `(i + u)/2^d` with `u` a uniform 64-bit fraction.
fn dyadic_point<R: Rng>(level: u32, index: u64, rng: &mut R) -> BigRational {
    let numer = (BigUint::from(index) << 64u32) + rng.gen::<u64>();
    BigRational::new(BigInt::from(numer), BigInt::from(BigUint::from(1u32) << (level + 64)))
}

/// Largest sampled oscillation of `h` over the dyadic intervals of `[0, 1)`
/// of levels `0..=depth`. Interval `(d, i)` draws its samples from its own
/// substream, so raising the depth only adds intervals.
pub fn bmo_norm_estimate_with<H>(depth: u32, samples_per_interval: usize, seed: u64, parallelism: usize, h: H) -> Result<BmoEstimate>
where
    H: Fn(&BigRational) -> Complex64 + Sync,
{
    if depth < 1 || depth > 40 {
        return Err(Error::InvalidArgument("dyadic depth must be in 1..=40".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let mut best = BmoEstimate { value: 0.0, level: 0, index: 0, per_level: Vec::new() };
    for level in 0..=depth {
        let oscillations: Vec<Result<f64>> = pool.install(|| {
            use rayon::prelude::*;
            (0..1u64 << level)
                .into_par_iter()
                .map(|i| {
                    let mut rng = substream(seed, (1u64 << level) + i);
                    let values: Vec<Complex64> =
                        (0..samples_per_interval).map(|_| h(&dyadic_point(level, i, &mut rng))).collect();
                    interval_oscillation(&values)
                })
                .collect()
        });
        let mut level_max = 0.0f64;
        for (i, osc) in oscillations.into_iter().enumerate() {
            let osc = osc?;
            if osc > best.value {
                best.value = osc;
                best.level = level;
                best.index = i as u64;
            }
            level_max = level_max.max(osc);
        }
        best.per_level.push(level_max);
    }
    Ok(best)
}

/// [`bmo_norm_estimate_with`] for `F_k` truncated at `truncation_n`.
pub fn bmo_norm_estimate(k: u32, truncation_n: u64, depth: u32, samples_per_interval: usize, seed: u64, parallelism: usize) -> Result<BmoEstimate> {
    if truncation_n.is_zero() {
        return Err(Error::InvalidArgument("truncation N must be at least 1".into()));
    }
    bmo_norm_estimate_with(depth, samples_per_interval, seed, parallelism, |x| truncated_series(x, k, truncation_n))
}
