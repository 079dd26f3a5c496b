//! Gauss–Legendre nodes and weights for large orders, cached per order.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

/// Nodes on `[-1, 1]` in ascending order with matching weights.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term recurrence, seeded with Tricomi's
    /// asymptotic root estimate. O(n^2) work spread over the rayon pool, fine
    /// up to ~1e5 nodes.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        let roots: Vec<(f64, f64)> = (0..half)
            .into_par_iter()
            .map(|k| {
                let theta = PI * (k as f64 + 0.75) / (nf + 0.5);
                let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
                // the derivative from the last step is exact to O(dx)
                let mut dp = 0.0;
                for _ in 0..20 {
                    let (p, d) = legendre_with_derivative(n, x);
                    dp = d;
                    let dx = p / d;
                    x -= dx;
                    if dx.abs() < 1e-15 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect();
        // k-th largest root
        for (k, &(x, w)) in roots.iter().enumerate() {
            nodes[n - 1 - k] = x;
            nodes[k] = -x;
            weights[n - 1 - k] = w;
            weights[k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterator of `(x, w)` mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

type Cache = RwLock<HashMap<usize, Arc<GaussLegendre>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared rule of order `n`, computed once per process.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    if let Some(rule) = cache().read().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(GaussLegendre::new(n));
    let mut guard = cache().write().expect("rule cache poisoned");
    Arc::clone(guard.entry(n).or_insert(rule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules_are_exact_for_polynomials() {
        for n in 1..12 {
            let rule = GaussLegendre::new(n);
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let q: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                assert_relative_eq!(q, exact, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn known_three_point_rule() {
        let rule = GaussLegendre::new(3);
        let r = (0.6f64).sqrt();
        assert_relative_eq!(rule.nodes[0], -r, epsilon = 1e-15);
        assert_eq!(rule.nodes[1], 0.0);
        assert_relative_eq!(rule.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(rule.weights[2], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn large_rule_integrates_oscillations() {
        // int_0^{pi/2} sin(a) exp(i w cos a) da = (exp(i w) - 1) / (i w)
        let w = 5000.0;
        let rule = gauss_legendre(6000);
        let (mut re, mut im) = (0.0, 0.0);
        for (a, wt) in rule.mapped(0.0, PI / 2.0) {
            re += wt * a.sin() * (w * a.cos()).cos();
            im += wt * a.sin() * (w * a.cos()).sin();
        }
        let exact_re = w.sin() / w;
        let exact_im = (1.0 - w.cos()) / w;
        assert_relative_eq!(re, exact_re, epsilon = 1e-13);
        assert_relative_eq!(im, exact_im, epsilon = 1e-13);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-11);
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = gauss_legendre(17);
        let b = gauss_legendre(17);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
