//! Gauss–Legendre rules and an adaptive composite integrator for oscillatory
//! complex integrands.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ORDER: usize = 10;
const MAX_DEPTH: u32 = 40;

/// Nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

pub(crate) struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// `∫_a^b f` over the given breakpoints, each piece refined by bisection until
/// the one-level refinement changes it by at most `tol · scale(piece)`.
pub(crate) fn adaptive<F, S>(f: &F, breakpoints: &[f64], tol: f64, scale: S) -> Result<Integral>
where
    F: Fn(f64) -> Complex64,
    S: Fn(f64, f64) -> f64,
{
    let mut out = Integral { value: Complex64::new(0.0, 0.0), error: 0.0, panels: 0 };
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let coarse = panel(f, a, b);
        refine(f, a, b, coarse, tol, &scale, 0, &mut out)?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine<F, S>(f: &F, a: f64, b: f64, coarse: Complex64, tol: f64, scale: &S, depth: u32, out: &mut Integral) -> Result<()>
where
    F: Fn(f64) -> Complex64,
    S: Fn(f64, f64) -> f64,
{
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    let fine = left + right;
    let diff = (fine - coarse).norm();
    let allowed = tol * scale(a, b);
    if diff <= allowed || (b - a) <= f64::EPSILON * b.abs() * 4.0 {
        out.value += fine;
        out.error += diff;
        out.panels += 2;
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureNonConvergence { achieved: diff / scale(a, b).max(f64::MIN_POSITIVE), requested: tol });
    }
    refine(f, a, mid, left, tol, scale, depth + 1, out)?;
    refine(f, mid, b, right, tol, scale, depth + 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // Exact through degree 2n - 1.
        for deg in 0..(2 * ORDER) {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - exact).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |y: f64| Complex64::from_polar(1.0, 40.0 * y);
        let r = adaptive(&f, &[0.0, 1.0, 3.0], 1e-10, |a, b| b - a).unwrap();
        let exact = (Complex64::from_polar(1.0, 120.0) - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-9);
    }
}
