//! Minimum-energy inputs for `J = ½ ∫ (a1 u1² + a2 u2²) dt`.
//!
//! With `a1 = a2 = sqrt(1 - t²)` on `[-1, 1]` the extremals are
//! `u1 = b1 T_{2λ}/sqrt(1-t²) + b2 U_{2λ-1}` and
//! `u2 = b2 T_{2λ}/sqrt(1-t²) - b1 U_{2λ-1}`; they move `x3` by `a` when
//! `(b1² + b2²) π/2 = λ a`, at cost `λ a`, so `λ = 1` is optimal.

use crate::error::{Error, Result};
use crate::orthopoly::{inner_product, BasisElement, Domain, WeightFn};
use crate::scalar::Real;
use crate::signal::InputSignal;
use crate::sturm::JacobiPairing;

/// Diagonal weights of the cost, restricted to power laws
/// `(1 - x)^p (1 + x)^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedCost<T> {
    pub a1: WeightFn<T>,
    pub a2: WeightFn<T>,
    pub domain: Domain,
}

impl<T: Real> WeightedCost<T> {
    pub fn new(a1: WeightFn<T>, a2: WeightFn<T>, domain: Domain) -> Self {
        Self { a1, a2, domain }
    }

    /// Plain energy `a1 = a2 = 1`.
    pub fn unit(domain: Domain) -> Self {
        Self::new(WeightFn::unit(), WeightFn::unit(), domain)
    }

    /// `a1 = a2 = sqrt(1 - t²)` on `[-1, 1]`.
    pub fn chebyshev() -> Self {
        let w = WeightFn::chebyshev_second();
        Self::new(w, w, Domain::Canonical)
    }

    pub fn from_pairing(p: &JacobiPairing<T>) -> Self {
        Self::new(p.a1, p.a2, Domain::Canonical)
    }
}

/// Extremal of the Chebyshev-weighted problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebOptimalSolution<T> {
    /// Requested displacement of `x3`.
    pub a: T,
    pub b1: T,
    pub b2: T,
    /// Multiplier index; `1` for the optimum.
    pub lambda: usize,
    /// Channels exchanged to realize a negative displacement.
    pub swapped: bool,
    pub u1: InputSignal<T>,
    pub u2: InputSignal<T>,
    /// Predicted cost `λ |a|`.
    pub cost: T,
}

impl<T: Real> ChebOptimalSolution<T> {
    /// Multiplier in the extremal equations for `(u1, u2)` as returned;
    /// exchanging the channels flips its sign.
    pub fn multiplier(&self) -> T {
        let l = T::idx(self.lambda);
        if self.swapped {
            -l
        } else {
            l
        }
    }
}

/// Optimal (`λ = 1`) inputs moving `x3` by `a` over `[-1, 1]`.
///
/// `(b1, b2) = r (cos φ, sin φ)` with `r = sqrt(2|a|/π)`; `φ` defaults to 0.
pub fn cheb_optimal_inputs<T: Real>(a: T, phi: Option<T>) -> Result<ChebOptimalSolution<T>> {
    cheb_extremal_inputs(a, 1, phi)
}

/// Extremal inputs with multiplier index `λ ≥ 1`, displacement `a`, cost `λ|a|`.
pub fn cheb_extremal_inputs<T: Real>(a: T, lambda: usize, phi: Option<T>) -> Result<ChebOptimalSolution<T>> {
    if a == T::zero() || !a.is_finite() {
        return Err(Error::argument(
            "displacement must be finite and nonzero; zero input is optimal for a = 0",
        ));
    }
    if lambda == 0 {
        return Err(Error::argument("the multiplier index must be at least 1"));
    }
    let l = T::idx(lambda);
    let r = (T::lit(2.0) * l * a.abs() / T::PI()).sqrt();
    let (s, c) = phi.unwrap_or(T::zero()).sin_cos();
    let (b1, b2) = (r * c, r * s);
    let t = BasisElement::chebyshev_first(2 * lambda)?;
    let u = BasisElement::chebyshev_second(2 * lambda - 1)?;
    let first = InputSignal::basis(t, b1, true).with(u, b2, false);
    let second = InputSignal::basis(t, b2, true).with(u, -b1, false);
    let swapped = a < T::zero();
    let (u1, u2) = if swapped { (second, first) } else { (first, second) };
    Ok(ChebOptimalSolution {
        a,
        b1,
        b2,
        lambda,
        swapped,
        u1,
        u2,
        cost: l * a.abs(),
    })
}

/// `½ ∫ (a1 u1² + a2 u2²) dt` by quadrature.
pub fn weighted_cost<T: Real>(u1: &InputSignal<T>, u2: &InputSignal<T>, cost: &WeightedCost<T>) -> Result<T> {
    let e1 = if u1.is_zero() {
        T::zero()
    } else {
        inner_product(u1, u1, &cost.a1, cost.domain)?
    };
    let e2 = if u2.is_zero() {
        T::zero()
    } else {
        inner_product(u2, u2, &cost.a2, cost.domain)?
    };
    Ok((e1 + e2) / T::lit(2.0))
}

/// Residuals `(d/dt(a1 u1) + 2λ u2, d/dt(a2 u2) - 2λ u1)` of the
/// first-order necessary conditions, at an interior `t`.
pub fn el_residual<T: Real>(
    u1: &InputSignal<T>,
    u2: &InputSignal<T>,
    cost: &WeightedCost<T>,
    lambda: T,
    t: T,
) -> Result<(T, T)> {
    let x = cost.domain.to_canonical(t);
    if !(x.abs() < T::one()) {
        return Err(Error::domain(format!("t = {t} is not interior")));
    }
    let two_l = T::lit(2.0) * lambda;
    let [_, k1, _] = u1.jet_with(&cost.a1, t)?;
    let [_, k2, _] = u2.jet_with(&cost.a2, t)?;
    let [v1, _, _] = u1.jet_with(&WeightFn::unit(), t)?;
    let [v2, _, _] = u2.jet_with(&WeightFn::unit(), t)?;
    Ok((k1 + two_l * v2, k2 - two_l * v1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sturm::chebyshev_nodes;
    use std::f64::consts::PI;

    fn max_el(u1: &InputSignal<f64>, u2: &InputSignal<f64>, cost: &WeightedCost<f64>, lambda: f64) -> f64 {
        chebyshev_nodes(50, cost.domain)
            .into_iter()
            .map(|t| {
                let (a, b) = el_residual(u1, u2, cost, lambda, t).unwrap();
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn unit_displacement_solution() {
        let sol = cheb_optimal_inputs(1.0f64, None).unwrap();
        assert!((sol.b1 - (2.0 / PI).sqrt()).abs() < 1e-15 && sol.b2 == 0.0);
        let t = 0.3f64;
        let expected = (2.0 / PI).sqrt() * (2.0 * t * t - 1.0) / (1.0 - t * t).sqrt();
        assert!((sol.u1.eval(t).unwrap() - expected).abs() < 1e-14);
        assert!((sol.u2.eval(t).unwrap() + (2.0 / PI).sqrt() * 2.0 * t).abs() < 1e-14);
        let j = weighted_cost(&sol.u1, &sol.u2, &WeightedCost::chebyshev()).unwrap();
        assert!((j - 1.0).abs() < 1e-9);
        assert!(max_el(&sol.u1, &sol.u2, &WeightedCost::chebyshev(), sol.multiplier()) < 1e-6);
    }

    #[test]
    fn half_pi_has_unit_amplitudes() {
        let sol = cheb_optimal_inputs(PI / 2.0, Some(0.4)).unwrap();
        assert!((sol.b1 * sol.b1 + sol.b2 * sol.b2 - 1.0).abs() < 1e-14);
        assert!((sol.cost - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn negative_target_swaps_and_keeps_certificate() {
        let sol = cheb_optimal_inputs(-0.8f64, Some(1.1)).unwrap();
        assert!(sol.swapped);
        assert!(max_el(&sol.u1, &sol.u2, &WeightedCost::chebyshev(), sol.multiplier()) < 1e-6);
        assert!(matches!(cheb_optimal_inputs(0.0f64, None), Err(Error::Argument(_))));
    }

    #[test]
    fn sinusoids_are_extremal_for_unit_weights() {
        let c = BasisElement::<f64>::trig_cos(1).unwrap();
        let s = BasisElement::<f64>::trig_sin(1).unwrap();
        let u1 = InputSignal::basis(c, 1.0, false);
        let u2 = InputSignal::basis(s, 1.0, false);
        assert!(max_el(&u1, &u2, &WeightedCost::unit(Domain::Canonical), PI / 2.0) < 1e-10);
    }

    #[test]
    fn non_extremal_pair_is_rejected() {
        let u1 = InputSignal::basis(BasisElement::<f64>::legendre(1).unwrap(), 1.0, false);
        let u2 = InputSignal::basis(BasisElement::<f64>::legendre(3).unwrap(), 1.0, false);
        assert!(max_el(&u1, &u2, &WeightedCost::unit(Domain::Canonical), 1.0) > 0.1);
    }

    #[test]
    fn semicircle_cost() {
        let one = InputSignal::constant(1.0f64, Domain::Canonical);
        let j = weighted_cost(&one, &one, &WeightedCost::chebyshev()).unwrap();
        assert!((j - PI / 2.0).abs() < 1e-9);
        let z = InputSignal::<f64>::zero(Domain::Canonical);
        assert_eq!(weighted_cost(&z, &z, &WeightedCost::chebyshev()).unwrap(), 0.0);
        assert!(el_residual(&one, &one, &WeightedCost::chebyshev(), 1.0, 1.0).is_err());
    }
}
