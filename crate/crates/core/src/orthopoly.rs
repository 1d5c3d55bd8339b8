//! Orthogonal function families on `[-1, 1]` and their shifted copies on `[0, 1]`.
//!
//! Polynomials are evaluated by their three-term recurrences; the recurrence
//! is differentiated alongside so first and second derivatives are exact
//! (never finite differences). Weighted inner products go through
//! [`Quadrature`], switching to the `x = -cos θ` substitution whenever an
//! integrand carries a non-integer power of `1 ± x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Quadrature, Substitution};
use crate::scalar::Real;

/// Highest supported index. Recurrences are stable well beyond this in
/// double precision; the cap keeps trig frequencies and quadrature costs sane.
pub const MAX_INDEX: usize = 64;

/// Interval an element lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[-1, 1]`.
    #[default]
    Canonical,
    /// `[0, 1]`, reached by `x = 2t - 1`.
    Shifted,
}

impl Domain {
    pub fn bounds<T: Real>(self) -> (T, T) {
        match self {
            Domain::Canonical => (-T::one(), T::one()),
            Domain::Shifted => (T::zero(), T::one()),
        }
    }

    pub fn length<T: Real>(self) -> T {
        let (a, b) = self.bounds::<T>();
        b - a
    }

    /// Canonical coordinate of time `t`.
    #[inline]
    pub fn to_canonical<T: Real>(self, t: T) -> T {
        match self {
            Domain::Canonical => t,
            Domain::Shifted => T::lit(2.0) * t - T::one(),
        }
    }

    #[inline]
    pub fn from_canonical<T: Real>(self, x: T) -> T {
        match self {
            Domain::Canonical => x,
            Domain::Shifted => (x + T::one()) / T::lit(2.0),
        }
    }

    /// `dx/dt`.
    #[inline]
    pub fn dx_dt<T: Real>(self) -> T {
        match self {
            Domain::Canonical => T::one(),
            Domain::Shifted => T::lit(2.0),
        }
    }

    pub fn contains<T: Real>(self, t: T) -> bool {
        let (a, b) = self.bounds::<T>();
        t >= a && t <= b
    }

    /// The domain whose bounds are exactly `(lo, hi)`, if any.
    pub fn from_bounds<T: Real>(lo: T, hi: T) -> Option<Domain> {
        [Domain::Canonical, Domain::Shifted]
            .into_iter()
            .find(|d| d.bounds::<T>() == (lo, hi))
    }
}

/// Evaluation point in canonical coordinates.
///
/// `one_minus`, `one_plus` and `root = sqrt(1 - x^2)` are carried separately
/// so that near the endpoints they keep full relative precision when the
/// point comes from the angle substitution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub one_minus: T,
    pub one_plus: T,
    pub root: T,
}

impl<T: Real> Point<T> {
    pub fn canonical(x: T) -> Self {
        let one_minus = T::one() - x;
        let one_plus = T::one() + x;
        Self {
            x,
            one_minus,
            one_plus,
            root: (one_minus * one_plus).max(T::zero()).sqrt(),
        }
    }

    /// `x = -cos θ`.
    pub fn from_angle(theta: T) -> Self {
        let two = T::lit(2.0);
        let (s, c) = (theta / two).sin_cos();
        Self {
            x: -theta.cos(),
            one_minus: two * c * c,
            one_plus: two * s * s,
            root: theta.sin(),
        }
    }

    /// `(1 - x)^p (1 + x)^q`.
    #[inline]
    pub fn power(&self, p: T, q: T) -> T {
        let a = if p == T::zero() {
            T::one()
        } else {
            self.one_minus.powf(p)
        };
        let b = if q == T::zero() {
            T::one()
        } else {
            self.one_plus.powf(q)
        };
        a * b
    }
}

/// Orthogonal family tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family<T> {
    Legendre,
    ChebyshevFirst,
    ChebyshevSecond,
    Jacobi {
        alpha: T,
        beta: T,
    },
    /// `sin(nπx)`.
    TrigSin,
    /// `cos(nπx)`.
    TrigCos,
}

impl<T: Real> Family<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Legendre => "legendre",
            Family::ChebyshevFirst => "chebyshev_first",
            Family::ChebyshevSecond => "chebyshev_second",
            Family::Jacobi { .. } => "jacobi",
            Family::TrigSin => "trig_sin",
            Family::TrigCos => "trig_cos",
        }
    }

    pub fn is_trig(&self) -> bool {
        matches!(self, Family::TrigSin | Family::TrigCos)
    }

    /// Weight under which the family is orthogonal.
    pub fn weight(&self) -> WeightFn<T> {
        match *self {
            Family::Legendre | Family::TrigSin | Family::TrigCos => WeightFn::unit(),
            Family::ChebyshevFirst => WeightFn::chebyshev_first(),
            Family::ChebyshevSecond => WeightFn::chebyshev_second(),
            Family::Jacobi { alpha, beta } => WeightFn::jacobi(alpha, beta),
        }
    }

    /// Coefficients `(a, b, c)` of `p_{k+1} = (a x + b) p_k - c p_{k-1}`.
    fn recurrence(&self, k: usize) -> (T, T, T) {
        let two = T::lit(2.0);
        let kf = T::idx(k);
        match *self {
            Family::Legendre => {
                let a = (two * kf + T::one()) / (kf + T::one());
                (a, T::zero(), kf / (kf + T::one()))
            }
            Family::ChebyshevFirst => {
                if k == 0 {
                    (T::one(), T::zero(), T::zero())
                } else {
                    (two, T::zero(), T::one())
                }
            }
            Family::ChebyshevSecond => (two, T::zero(), T::one()),
            Family::Jacobi { alpha, beta } => {
                if k == 0 {
                    return ((alpha + beta + two) / two, (alpha - beta) / two, T::zero());
                }
                let n = kf + T::one();
                let s = two * n + alpha + beta;
                let denom = two * n * (n + alpha + beta) * (s - two);
                let a = (s - T::one()) * s * (s - two) / denom;
                let b = (s - T::one()) * (alpha * alpha - beta * beta) / denom;
                let c = two * (n + alpha - T::one()) * (n + beta - T::one()) * s / denom;
                (a, b, c)
            }
            Family::TrigSin | Family::TrigCos => unreachable!("trig families have no recurrence"),
        }
    }
}

/// Parity of an element under `x -> -x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Power weight `(1 - x)^p (1 + x)^q` in canonical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFn<T> {
    /// Exponent of `1 - x`.
    pub p: T,
    /// Exponent of `1 + x`.
    pub q: T,
}

impl<T: Real> WeightFn<T> {
    pub fn unit() -> Self {
        Self {
            p: T::zero(),
            q: T::zero(),
        }
    }

    /// `(1 - x^2)^(-1/2)`.
    pub fn chebyshev_first() -> Self {
        let h = T::lit(-0.5);
        Self { p: h, q: h }
    }

    /// `(1 - x^2)^(1/2)`.
    pub fn chebyshev_second() -> Self {
        let h = T::lit(0.5);
        Self { p: h, q: h }
    }

    pub fn jacobi(alpha: T, beta: T) -> Self {
        Self { p: alpha, q: beta }
    }

    pub fn is_unit(&self) -> bool {
        self.p == T::zero() && self.q == T::zero()
    }

    /// True if either exponent is not an integer; such weights are not
    /// smooth at the endpoints and need the angle substitution.
    pub fn is_fractional(&self) -> bool {
        self.p.fract() != T::zero() || self.q.fract() != T::zero()
    }

    pub fn at(&self, p: &Point<T>) -> T {
        p.power(self.p, self.q)
    }

    /// Weight at time `t` of `domain`.
    pub fn eval(&self, t: T, domain: Domain) -> T {
        self.at(&Point::canonical(domain.to_canonical(t)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            p: self.p + other.p,
            q: self.q + other.q,
        }
    }

    pub fn recip(&self) -> Self {
        Self { p: -self.p, q: -self.q }
    }

    /// `[w, dw/dx, d²w/dx²]` at an interior point.
    pub fn jet(&self, pt: &Point<T>) -> [T; 3] {
        let w = self.at(pt);
        if self.is_unit() {
            return [w, T::zero(), T::zero()];
        }
        // log-derivative L = -p/(1-x) + q/(1+x), L' = -p/(1-x)^2 - q/(1+x)^2
        let l = -self.p / pt.one_minus + self.q / pt.one_plus;
        let dl = -self.p / (pt.one_minus * pt.one_minus) - self.q / (pt.one_plus * pt.one_plus);
        [w, w * l, w * (l * l + dl)]
    }
}

/// One member of an orthogonal family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisElement<T> {
    #[serde(flatten)]
    pub family: Family<T>,
    pub index: usize,
    #[serde(default)]
    pub domain: Domain,
}

impl<T: Real> BasisElement<T> {
    pub fn new(family: Family<T>, index: usize) -> Result<Self> {
        if index > MAX_INDEX {
            return Err(Error::Capability(format!(
                "index {index} exceeds the supported maximum {MAX_INDEX}"
            )));
        }
        if let Family::Jacobi { alpha, beta } = family {
            if !(alpha > -T::one() && beta > -T::one()) || !alpha.is_finite() || !beta.is_finite() {
                return Err(Error::domain(format!(
                    "jacobi parameters must exceed -1, got ({alpha}, {beta})"
                )));
            }
        }
        Ok(Self {
            family,
            index,
            domain: Domain::Canonical,
        })
    }

    pub fn legendre(n: usize) -> Result<Self> {
        Self::new(Family::Legendre, n)
    }

    pub fn chebyshev_first(n: usize) -> Result<Self> {
        Self::new(Family::ChebyshevFirst, n)
    }

    pub fn chebyshev_second(n: usize) -> Result<Self> {
        Self::new(Family::ChebyshevSecond, n)
    }

    pub fn jacobi(alpha: T, beta: T, n: usize) -> Result<Self> {
        Self::new(Family::Jacobi { alpha, beta }, n)
    }

    pub fn trig_sin(n: usize) -> Result<Self> {
        Self::new(Family::TrigSin, n)
    }

    pub fn trig_cos(n: usize) -> Result<Self> {
        Self::new(Family::TrigCos, n)
    }

    /// Same element precomposed with `x = 2t - 1`, orthogonal on `[0, 1]`
    /// under the transported weight.
    pub fn shift(self) -> Self {
        Self {
            domain: Domain::Shifted,
            ..self
        }
    }

    pub fn weight(&self) -> WeightFn<T> {
        self.family.weight()
    }

    pub fn parity(&self) -> Option<Parity> {
        let by_index = if self.index.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        };
        match self.family {
            Family::TrigSin => Some(Parity::Odd),
            Family::TrigCos => Some(Parity::Even),
            Family::Jacobi { alpha, beta } if alpha != beta => None,
            _ => Some(by_index),
        }
    }

    /// `∫ f_n² w` over the canonical interval, where a closed form is known.
    pub fn norm_squared(&self) -> Option<T> {
        let n = self.index;
        let pi = T::PI();
        let v = match self.family {
            Family::Legendre => T::lit(2.0) / (T::lit(2.0) * T::idx(n) + T::one()),
            Family::ChebyshevFirst if n == 0 => pi,
            Family::ChebyshevFirst | Family::ChebyshevSecond => pi / T::lit(2.0),
            Family::TrigSin if n == 0 => T::zero(),
            Family::TrigCos if n == 0 => T::lit(2.0),
            Family::TrigSin | Family::TrigCos => T::one(),
            Family::Jacobi { .. } => return None,
        };
        Some(match self.domain {
            Domain::Canonical => v,
            Domain::Shifted => v / T::lit(2.0),
        })
    }

    fn check_time(&self, t: T) -> Result<T> {
        if !t.is_finite() || !self.domain.contains(t) {
            let (a, b) = self.domain.bounds::<T>();
            return Err(Error::domain(format!("t = {t} outside [{a}, {b}]")));
        }
        Ok(self.domain.to_canonical(t))
    }

    /// Value at time `t` of the element's domain.
    pub fn eval(&self, t: T) -> Result<T> {
        let x = self.check_time(t)?;
        Ok(self.value_canonical(x))
    }

    /// Value at canonical coordinate `x` (no domain check).
    pub fn value_canonical(&self, x: T) -> T {
        match self.family {
            Family::TrigSin => (T::idx(self.index) * T::PI() * x).sin(),
            Family::TrigCos => (T::idx(self.index) * T::PI() * x).cos(),
            _ => {
                let (mut p0, mut p1) = (T::zero(), T::one());
                for k in 0..self.index {
                    let (a, b, c) = self.family.recurrence(k);
                    let p2 = (a * x + b) * p1 - c * p0;
                    p0 = p1;
                    p1 = p2;
                }
                p1
            }
        }
    }

    /// `[f, df/dx, d²f/dx²]` at canonical `x`, by the differentiated
    /// recurrence. Valid on the closed interval.
    pub fn jet_canonical(&self, x: T) -> [T; 3] {
        match self.family {
            Family::TrigSin | Family::TrigCos => {
                let w = T::idx(self.index) * T::PI();
                let (s, c) = (w * x).sin_cos();
                if matches!(self.family, Family::TrigSin) {
                    [s, w * c, -w * w * s]
                } else {
                    [c, -w * s, -w * w * c]
                }
            }
            _ => {
                let (mut p0, mut p1) = (T::zero(), T::one());
                let (mut d0, mut d1) = (T::zero(), T::zero());
                let (mut s0, mut s1) = (T::zero(), T::zero());
                for k in 0..self.index {
                    let (a, b, c) = self.family.recurrence(k);
                    let lin = a * x + b;
                    let p2 = lin * p1 - c * p0;
                    let d2 = lin * d1 + a * p1 - c * d0;
                    let s2 = lin * s1 + T::lit(2.0) * a * d1 - c * s0;
                    p0 = p1;
                    p1 = p2;
                    d0 = d1;
                    d1 = d2;
                    s0 = s1;
                    s1 = s2;
                }
                [p1, d1, s1]
            }
        }
    }

    /// `[f, f', f'']` with respect to the element's own time variable.
    pub fn jet(&self, t: T) -> Result<[T; 3]> {
        let x = self.check_time(t)?;
        let [v, d1, d2] = self.jet_canonical(x);
        let k = self.domain.dx_dt::<T>();
        Ok([v, d1 * k, d2 * k * k])
    }

    /// First derivative in the element's time variable via the family's
    /// derivative identity:
    /// `T_n' = n U_{n-1}`, `U_n' = ((n+1) T_{n+1} - x U_n) / (x² - 1)`,
    /// `d/dx P_n^{(α,β)} = (n+α+β+1)/2 · P_{n-1}^{(α+1,β+1)}` (Legendre is α = β = 0).
    pub fn eval_derivative(&self, t: T) -> Result<T> {
        let x = self.check_time(t)?;
        let n = self.index;
        let nf = T::idx(n);
        let two = T::lit(2.0);
        let dx = match self.family {
            _ if n == 0 && !self.family.is_trig() => T::zero(),
            Family::ChebyshevFirst => nf * BasisElement::<T>::raw(Family::ChebyshevSecond, n - 1).value_canonical(x),
            Family::ChebyshevSecond => {
                let denom = x * x - T::one();
                if denom == T::zero() {
                    return Err(Error::domain(
                        "U_n derivative identity is singular at the interval endpoints",
                    ));
                }
                let t_next = BasisElement::<T>::raw(Family::ChebyshevFirst, n + 1).value_canonical(x);
                let u_n = self.value_canonical(x);
                ((nf + T::one()) * t_next - x * u_n) / denom
            }
            Family::Legendre => {
                let up = Family::Jacobi {
                    alpha: T::one(),
                    beta: T::one(),
                };
                (nf + T::one()) / two * BasisElement::raw(up, n - 1).value_canonical(x)
            }
            Family::Jacobi { alpha, beta } => {
                let up = Family::Jacobi {
                    alpha: alpha + T::one(),
                    beta: beta + T::one(),
                };
                (nf + alpha + beta + T::one()) / two * BasisElement::raw(up, n - 1).value_canonical(x)
            }
            Family::TrigSin | Family::TrigCos => self.jet_canonical(x)[1],
        };
        Ok(dx * self.domain.dx_dt::<T>())
    }

    fn raw(family: Family<T>, index: usize) -> Self {
        Self {
            family,
            index,
            domain: Domain::Canonical,
        }
    }
}

/// Something that can be sampled at canonical points of a fixed domain and
/// whose endpoint singularities are power-law.
pub trait CanonicalFn<T: Real> {
    fn domain(&self) -> Domain;
    fn at(&self, p: &Point<T>) -> T;
    /// Smallest exponents `(p, q)` of `(1 - x)` and `(1 + x)` over all terms;
    /// negative values are endpoint singularities.
    fn min_powers(&self) -> (T, T);
    /// True if some term has a non-integer power of `1 ± x`.
    fn fractional(&self) -> bool;
}

impl<T: Real> CanonicalFn<T> for BasisElement<T> {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn at(&self, p: &Point<T>) -> T {
        self.value_canonical(p.x)
    }
    fn min_powers(&self) -> (T, T) {
        (T::zero(), T::zero())
    }
    fn fractional(&self) -> bool {
        false
    }
}

/// `∫ f g w dt` over `domain`.
///
/// Fails with an integrability error when the combined endpoint power of
/// `f g w` is `<= -1`.
pub fn inner_product<T: Real, F, G>(f: &F, g: &G, w: &WeightFn<T>, domain: Domain) -> Result<T>
where
    F: CanonicalFn<T> + ?Sized,
    G: CanonicalFn<T> + ?Sized,
{
    for (name, d) in [("first", f.domain()), ("second", g.domain())] {
        if d != domain {
            return Err(Error::argument(format!(
                "{name} factor lives on {d:?}, integral requested over {domain:?}"
            )));
        }
    }
    let (fp, fq) = f.min_powers();
    let (gp, gq) = g.min_powers();
    let p = fp + gp + w.p;
    let q = fq + gq + w.q;
    if p <= -T::one() || q <= -T::one() {
        return Err(Error::Integrability(format!(
            "integrand behaves like (1-x)^{p} (1+x)^{q} at the endpoints"
        )));
    }
    let sub = if f.fractional() || g.fractional() || w.is_fractional() || p < T::zero() || q < T::zero() {
        Substitution::Angle
    } else {
        Substitution::Direct
    };
    let quad = Quadrature::<T>::default();
    let v = quad.integrate_canonical(|pt| f.at(&pt) * g.at(&pt) * w.at(&pt), sub);
    Ok(v / domain.dx_dt::<T>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cheb1(n: usize) -> BasisElement<f64> {
        BasisElement::chebyshev_first(n).unwrap()
    }

    #[test]
    fn zeroth_element_is_one() {
        let fams = [
            Family::Legendre,
            Family::ChebyshevFirst,
            Family::ChebyshevSecond,
            Family::Jacobi { alpha: 0.3, beta: -0.4 },
            Family::TrigCos,
        ];
        for f in fams {
            assert_eq!(BasisElement::new(f, 0).unwrap().eval(0.7).unwrap(), 1.0);
        }
    }

    #[test]
    fn chebyshev_cosine_identity() {
        let theta: f64 = 0.4;
        let v = cheb1(3).eval(theta.cos()).unwrap();
        assert!((v - (3.0 * theta).cos()).abs() < 1e-14);
    }

    #[test]
    fn legendre_first_degree_is_identity() {
        assert!((BasisElement::<f64>::legendre(1).unwrap().eval(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_out_of_domain_and_large_index() {
        assert!(matches!(cheb1(2).eval(1.2), Err(Error::Domain(_))));
        assert!(matches!(cheb1(2).shift().eval(-0.1), Err(Error::Domain(_))));
        assert!(matches!(BasisElement::<f64>::legendre(65), Err(Error::Capability(_))));
        assert!(matches!(
            BasisElement::<f64>::jacobi(-1.0, 0.0, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn derivative_identities() {
        assert!((cheb1(2).eval_derivative(0.5).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(
            BasisElement::<f64>::legendre(0).unwrap().eval_derivative(0.3).unwrap(),
            0.0
        );
        let h = 1e-5;
        let t4 = cheb1(4);
        let fd = (t4.eval(0.3 + h).unwrap() - t4.eval(0.3 - h).unwrap()) / (2.0 * h);
        assert!((t4.eval_derivative(0.3).unwrap() - fd).abs() < 1e-6);
        let u3 = BasisElement::<f64>::chebyshev_second(3).unwrap();
        assert!(matches!(u3.eval_derivative(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_and_recurrence_derivatives_agree() {
        let elems = [
            BasisElement::<f64>::legendre(7).unwrap(),
            BasisElement::chebyshev_second(6).unwrap(),
            BasisElement::jacobi(0.5, -0.5, 5).unwrap(),
            BasisElement::jacobi(-0.3, 0.2, 4).unwrap().shift(),
        ];
        for e in elems {
            for &t in &[0.1, 0.45, 0.8] {
                let a = e.eval_derivative(t).unwrap();
                let b = e.jet(t).unwrap()[1];
                assert!((a - b).abs() < 1e-11, "{e:?} at {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn shifted_legendre_closed_forms() {
        let p1 = BasisElement::<f64>::legendre(1).unwrap().shift();
        let p2 = BasisElement::<f64>::legendre(2).unwrap().shift();
        for &t in &[0.0, 0.25, 0.6, 1.0] {
            assert!((p1.eval(t).unwrap() - (2.0 * t - 1.0)).abs() < 1e-15);
            assert!((p2.eval(t).unwrap() - (6.0 * t * t - 6.0 * t + 1.0)).abs() < 1e-14);
        }
        assert_eq!(
            BasisElement::<f64>::trig_cos(0).unwrap().shift().eval(0.4).unwrap(),
            1.0
        );
    }

    #[test]
    fn chebyshev_inner_products() {
        let w = WeightFn::chebyshev_first();
        let v = inner_product(&cheb1(2), &cheb1(2), &w, Domain::Canonical).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
        let v = inner_product(&cheb1(1), &cheb1(2), &w, Domain::Canonical).unwrap();
        assert!(v.abs() < 1e-12);
        let u1 = BasisElement::<f64>::chebyshev_second(1).unwrap();
        let v = inner_product(&u1, &u1, &WeightFn::chebyshev_second(), Domain::Canonical).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_special_cases() {
        // P^{(0,0)} = P_n, P^{(-1/2,-1/2)}_n ∝ T_n
        let j = BasisElement::<f64>::jacobi(0.0, 0.0, 5).unwrap();
        let l = BasisElement::<f64>::legendre(5).unwrap();
        let jc = BasisElement::<f64>::jacobi(-0.5, -0.5, 3).unwrap();
        let ratio = jc.eval(0.2).unwrap() / cheb1(3).eval(0.2).unwrap();
        for &t in &[-0.9, -0.3, 0.2, 0.77] {
            assert!((j.eval(t).unwrap() - l.eval(t).unwrap()).abs() < 1e-14);
            assert!((jc.eval(t).unwrap() - ratio * cheb1(3).eval(t).unwrap()).abs() < 1e-13);
        }
    }
}
