//! Gauss-Legendre quadrature with adaptive panel bisection.
//!
//! Integrands that carry a `(1 - x^2)^(-1/2)` (or any non-integer power of
//! `1 ± x`) are integrated after the substitution `x = -cos θ`, which turns
//! `dx / sqrt(1 - x^2)` into `dθ` and keeps the orientation of the interval.

use crate::orthopoly::Point;
use crate::scalar::Real;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let nf = T::idx(n);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let guess = (T::PI() * (T::idx(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
            let mut x = guess;
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn apply<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T) -> T {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut sum = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + *w * f(mid + half * *x);
        }
        sum * half
    }
}

fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (T::one(), T::zero());
    }
    for k in 1..n {
        let kf = T::idx(k);
        let p2 = ((T::lit(2.0) * kf + T::one()) * x * p1 - kf * p0) / (kf + T::one());
        p0 = p1;
        p1 = p2;
    }
    let nf = T::idx(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// How an integral over the canonical interval `[-1, 1]` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    /// Plain composite Gauss-Legendre in `x`.
    Direct,
    /// `x = -cos θ`, `θ ∈ [0, π]`, `dx = sin θ dθ`.
    Angle,
}

/// Adaptive composite Gauss-Legendre integrator.
#[derive(Debug, Clone)]
pub struct Quadrature<T> {
    rule: GaussLegendre<T>,
    abs_tol: T,
    rel_tol: T,
    max_depth: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self::new(20, T::tol(1e-12), T::tol(1e-10))
    }
}

impl<T: Real> Quadrature<T> {
    pub fn new(points: usize, abs_tol: T, rel_tol: T) -> Self {
        Self {
            rule: GaussLegendre::new(points),
            abs_tol,
            rel_tol,
            max_depth: 40,
        }
    }

    pub fn rule(&self) -> &GaussLegendre<T> {
        &self.rule
    }

    /// `∫_a^b f`, bisecting panels until the one-panel and two-panel
    /// estimates agree to `max(abs_tol * share, rel_tol * |estimate|)`.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T) -> T {
        if a == b {
            return T::zero();
        }
        let whole = self.rule.apply(&mut f, a, b);
        let span = (b - a).abs();
        self.refine(&mut f, a, b, whole, span, 0)
    }

    fn refine<F: FnMut(T) -> T>(&self, f: &mut F, a: T, b: T, whole: T, span: T, depth: usize) -> T {
        let m = (a + b) / T::lit(2.0);
        let left = self.rule.apply(f, a, m);
        let right = self.rule.apply(f, m, b);
        let refined = left + right;
        let share = ((b - a) / span).abs();
        let tol = (self.abs_tol * share).max(self.rel_tol * refined.abs());
        if (refined - whole).abs() <= tol || depth >= self.max_depth || !refined.is_finite() {
            return refined;
        }
        self.refine(f, a, m, left, span, depth + 1) + self.refine(f, m, b, right, span, depth + 1)
    }

    /// `∫_{-1}^{1} f(x) dx` for a function of the canonical evaluation point.
    pub fn integrate_canonical<F: FnMut(Point<T>) -> T>(&self, mut f: F, sub: Substitution) -> T {
        match sub {
            Substitution::Direct => self.integrate(|x| f(Point::canonical(x)), -T::one(), T::one()),
            Substitution::Angle => self.integrate(
                |theta| {
                    let p = Point::from_angle(theta);
                    f(p) * p.root
                },
                T::zero(),
                T::PI(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::<f64>::new(10);
        // exact up to degree 19
        let v = rule.apply(&mut |x: f64| x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let s: f64 = rule.weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_center_node() {
        let rule = GaussLegendre::<f64>::new(7);
        assert_eq!(rule.nodes()[3], 0.0);
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let q = Quadrature::<f64>::default();
        let v = q.integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn angle_substitution_removes_chebyshev_singularity() {
        let q = Quadrature::<f64>::default();
        let v = q.integrate_canonical(|p| 1.0 / p.root, Substitution::Angle);
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn single_precision_rule() {
        let q = Quadrature::<f32>::default();
        let v = q.integrate(|x| x.exp(), 0.0, 1.0);
        assert!((v - (std::f32::consts::E - 1.0)).abs() < 1e-5);
    }
}
