//! Gauss-Legendre rules mapped onto finite intervals.

use gauss_quad::legendre::GaussLegendre;
use std::num::NonZeroUsize;

/// Nodes and weights of an n-point Gauss-Legendre rule on [a, b], nodes ascending.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("quadrature order must be positive");
    let rule = GaussLegendre::new(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out: Vec<(f64, f64)> = rule
        .nodes()
        .zip(rule.weights())
        .map(|(x, w)| (mid + half * x, half * w))
        .collect();
    out.sort_by(|l, r| l.0.total_cmp(&r.0));
    out
}

/// Composite Gauss-Legendre rule over consecutive panels `breaks[0] < breaks[1] < ...`.
pub fn composite(breaks: &[f64], per_panel: usize) -> Vec<(f64, f64)> {
    breaks
        .windows(2)
        .flat_map(|w| gauss_legendre(per_panel, w[0], w[1]))
        .collect()
}
