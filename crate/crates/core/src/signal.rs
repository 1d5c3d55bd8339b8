//! Control inputs assembled from scaled basis elements.

use crate::error::{Error, Result};
use crate::orthopoly::{BasisElement, CanonicalFn, Domain, Point, WeightFn};
use crate::quadrature::{Quadrature, Substitution};
use crate::scalar::Real;

/// `scale · f(t)`, multiplied by the family weight when `weighted`.
///
/// Multiplying by the weight makes `∫ term dt = scale · ⟨f, 1⟩_w`, which
/// vanishes for every non-constant member; for Jacobi-type weights it is
/// also the `u = k / a` form of the weighted-cost extremals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term<T> {
    pub basis: BasisElement<T>,
    pub scale: T,
    pub weighted: bool,
}

impl<T: Real> Term<T> {
    pub fn factor(&self) -> WeightFn<T> {
        if self.weighted {
            self.basis.weight()
        } else {
            WeightFn::unit()
        }
    }

    fn at(&self, p: &Point<T>) -> T {
        let f = self.basis.value_canonical(p.x);
        if self.weighted {
            self.scale * f * self.factor().at(p)
        } else {
            self.scale * f
        }
    }
}

/// One input channel: a finite sum of terms on a common domain.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal<T> {
    domain: Domain,
    terms: Vec<Term<T>>,
}

impl<T: Real> InputSignal<T> {
    pub fn zero(domain: Domain) -> Self {
        Self {
            domain,
            terms: Vec::new(),
        }
    }

    pub fn constant(value: T, domain: Domain) -> Self {
        let mut basis = BasisElement::legendre(0).expect("index 0 is valid");
        basis.domain = domain;
        Self::zero(domain).with(basis, value, false)
    }

    pub fn basis(basis: BasisElement<T>, scale: T, weighted: bool) -> Self {
        Self::zero(basis.domain).with(basis, scale, weighted)
    }

    /// Adds a term. Panics if the element lives on another domain.
    pub fn with(mut self, basis: BasisElement<T>, scale: T, weighted: bool) -> Self {
        assert_eq!(basis.domain, self.domain, "term domain must match signal domain");
        self.terms.push(Term { basis, scale, weighted });
        self
    }

    pub fn try_from_terms(domain: Domain, terms: Vec<Term<T>>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.basis.domain != domain) {
            return Err(Error::argument(format!(
                "term {:?} lives on {:?}, signal on {domain:?}",
                t.basis.family, t.basis.domain
            )));
        }
        Ok(Self { domain, terms })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.scale == T::zero())
    }

    pub fn scaled(&self, k: T) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                scale: t.scale * k,
                ..*t
            })
            .collect();
        Self {
            domain: self.domain,
            terms,
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        if other.domain != self.domain {
            return Err(Error::argument("cannot add signals on different domains"));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Ok(Self {
            domain: self.domain,
            terms,
        })
    }

    /// Value at a canonical point.
    #[inline]
    pub fn value_at(&self, p: &Point<T>) -> T {
        self.terms.iter().map(|t| t.at(p)).fold(T::zero(), |acc, v| acc + v)
    }

    /// Value at time `t`; singular terms give `±inf` at the endpoints.
    pub fn eval(&self, t: T) -> Result<T> {
        if !self.domain.contains(t) {
            let (a, b) = self.domain.bounds::<T>();
            return Err(Error::domain(format!("t = {t} outside [{a}, {b}]")));
        }
        Ok(self.value_at(&Point::canonical(self.domain.to_canonical(t))))
    }

    /// `u(x) · sqrt(1 - x²)`, with the half powers merged into each term's
    /// weight so that inverse-square-root singularities cancel exactly.
    pub fn value_times_root(&self, p: &Point<T>) -> T {
        let h = T::lit(0.5);
        self.terms
            .iter()
            .map(|t| {
                let w = t.factor();
                t.scale * t.basis.value_canonical(p.x) * p.power(w.p + h, w.q + h)
            })
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// True if some term carries a non-integer or negative power of `1 ± x`.
    pub fn needs_angle(&self) -> bool {
        self.terms.iter().filter(|t| t.scale != T::zero()).any(|t| {
            let w = t.factor();
            w.is_fractional() || w.p < T::zero() || w.q < T::zero()
        })
    }

    /// `[v, v', v'']` of `extra(t) · u(t)` in the signal's time variable.
    ///
    /// Interior points only whenever a non-unit power factor is involved.
    pub fn jet_with(&self, extra: &WeightFn<T>, t: T) -> Result<[T; 3]> {
        if !self.domain.contains(t) {
            return Err(Error::domain(format!("t = {t} outside the signal domain")));
        }
        let x = self.domain.to_canonical(t);
        let pt = Point::canonical(x);
        let interior = x.abs() < T::one();
        let mut out = [T::zero(); 3];
        for term in &self.terms {
            let g = extra.mul(&term.factor());
            let [b0, b1, b2] = term.basis.jet_canonical(x);
            let [g0, g1, g2] = if g.is_unit() {
                [T::one(), T::zero(), T::zero()]
            } else if interior {
                g.jet(&pt)
            } else {
                return Err(Error::domain("weighted signal derivative requested at an endpoint"));
            };
            out[0] = out[0] + term.scale * g0 * b0;
            out[1] = out[1] + term.scale * (g1 * b0 + g0 * b1);
            out[2] = out[2] + term.scale * (g2 * b0 + T::lit(2.0) * g1 * b1 + g0 * b2);
        }
        let k = self.domain.dx_dt::<T>();
        Ok([out[0], out[1] * k, out[2] * k * k])
    }

    /// `∫ u dt` over the whole domain.
    pub fn integral(&self) -> Result<T> {
        let (p, q) = self.min_powers();
        if p <= -T::one() || q <= -T::one() {
            return Err(Error::Integrability("input is not integrable".into()));
        }
        let sub = if self.needs_angle() {
            Substitution::Angle
        } else {
            Substitution::Direct
        };
        let v = Quadrature::<T>::default().integrate_canonical(|pt| self.value_at(&pt), sub);
        Ok(v / self.domain.dx_dt::<T>())
    }
}

impl<T: Real> CanonicalFn<T> for InputSignal<T> {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn at(&self, p: &Point<T>) -> T {
        self.value_at(p)
    }
    fn min_powers(&self) -> (T, T) {
        self.terms
            .iter()
            .filter(|t| t.scale != T::zero())
            .map(|t| t.factor())
            .fold((T::zero(), T::zero()), |(p, q), w| (p.min(w.p), q.min(w.q)))
    }
    fn fractional(&self) -> bool {
        self.needs_angle()
    }
}

/// Functions whose value and first two derivatives can be evaluated.
pub trait Smooth<T: Real> {
    /// `[f(t), f'(t), f''(t)]`.
    fn jet(&self, t: T) -> Result<[T; 3]>;
}

impl<T: Real> Smooth<T> for BasisElement<T> {
    fn jet(&self, t: T) -> Result<[T; 3]> {
        BasisElement::jet(self, t)
    }
}

impl<T: Real> Smooth<T> for InputSignal<T> {
    fn jet(&self, t: T) -> Result<[T; 3]> {
        self.jet_with(&WeightFn::unit(), t)
    }
}

/// Closure differentiated by nested central differences.
pub struct NumericFn<F> {
    f: F,
    step: f64,
}

impl<F> NumericFn<F> {
    /// Central differences with step `1e-5`.
    pub fn new(f: F) -> Self {
        Self { f, step: 1e-5 }
    }

    pub fn with_step(f: F, step: f64) -> Self {
        Self { f, step }
    }
}

impl<T: Real, F: Fn(T) -> T> Smooth<T> for NumericFn<F> {
    fn jet(&self, t: T) -> Result<[T; 3]> {
        let h = T::lit(self.step);
        let f = &self.f;
        let d = |s: T| (f(s + h) - f(s - h)) / (h + h);
        let v = f(t);
        let d1 = d(t);
        let d2 = (d(t + h) - d(t - h)) / (h + h);
        Ok([v, d1, d2])
    }
}

/// 5-point first derivative.
pub(crate) fn derivative5<T: Real>(f: &dyn Fn(T) -> T, t: T, h: T) -> T {
    let eight = T::lit(8.0);
    (f(t - h - h) - eight * f(t - h) + eight * f(t + h) - f(t + h + h)) / (T::lit(12.0) * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_chebyshev_term_is_singular_but_mean_free() {
        let t1 = BasisElement::<f64>::chebyshev_first(1).unwrap();
        let u = InputSignal::basis(t1, 1.0, true);
        assert!(u.needs_angle());
        assert_eq!(u.eval(1.0).unwrap(), f64::INFINITY);
        assert!((u.eval(0.6).unwrap() - 0.6 / 0.8).abs() < 1e-15);
        assert!(u.integral().unwrap().abs() < 1e-12);
    }

    #[test]
    fn analytic_jet_of_weighted_term() {
        // u = T2 / sqrt(1 - t^2); compare with numeric differentiation.
        let t2 = BasisElement::<f64>::chebyshev_first(2).unwrap();
        let u = InputSignal::basis(t2, 0.7, true);
        let num = NumericFn::new(|t: f64| 0.7 * (2.0 * t * t - 1.0) / (1.0 - t * t).sqrt());
        for &t in &[-0.6, 0.1, 0.5] {
            let a = u.jet(t).unwrap();
            let b = num.jet(t).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-14);
            assert!((a[1] - b[1]).abs() < 1e-8);
            assert!((a[2] - b[2]).abs() < 1e-4);
        }
        assert!(u.jet(1.0).is_err());
    }

    #[test]
    fn shifted_constant_integral() {
        let c = InputSignal::<f64>::constant(3.0, Domain::Shifted);
        assert!((c.integral().unwrap() - 3.0).abs() < 1e-14);
        assert!(InputSignal::<f64>::zero(Domain::Canonical).is_zero());
    }
}
