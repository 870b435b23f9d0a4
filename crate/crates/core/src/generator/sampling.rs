//! Beta and Dirichlet variates computed in log space.
//!
//! Shapes well below one (e.g. `Beta(1/16, 1/16)`, `Dirichlet(1/8, ...)`)
//! push gamma variates towards zero; working with `ln X` keeps the ratio
//! `X / (X + Y)` well defined where a direct computation underflows.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// `ln X` with `X ~ Gamma(shape, 1)`.
///
/// For `shape < 1` uses `Gamma(a) = Gamma(a + 1) * U^(1/a)`.
pub fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape >= 1.0 {
        let g = Gamma::new(shape, 1.0).expect("valid gamma shape");
        g.sample(rng).ln()
    } else {
        let g = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape");
        // 1 - U lies in (0, 1]
        let u: f64 = 1.0 - rng.random::<f64>();
        g.sample(rng).ln() + u.ln() / shape
    }
}

/// `Beta(a, b)` variate.
pub fn beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let lx = ln_gamma_variate(a, rng);
    let ly = ln_gamma_variate(b, rng);
    let m = lx.max(ly);
    let x = (lx - m).exp();
    let y = (ly - m).exp();
    x / (x + y)
}

/// `Dirichlet(q)` variate; sums to one up to rounding.
pub fn dirichlet<R: Rng + ?Sized>(q: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = q.iter().map(|&a| ln_gamma_variate(a, rng)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}
