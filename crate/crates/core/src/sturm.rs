//! Sturm-Liouville problems `(1/w) (P y')' + Q y = -λ y`, residual
//! certification of candidate eigenfunctions, and the Jacobi pairing that
//! turns the weighted-cost extremal equations into Jacobi eigenproblems.

use crate::error::{Error, Result};
use crate::orthopoly::{BasisElement, Domain, Family, Point, WeightFn};
use crate::scalar::Real;
use crate::signal::{InputSignal, Smooth};

/// Sturm-Liouville triple with power-law `P` and `w` and polynomial `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SLProblem<T> {
    /// `P(x) = (1-x)^p (1+x)^q`.
    pub p: WeightFn<T>,
    /// Coefficients of `Q` in powers of `t`, lowest first. Empty means zero.
    pub potential: Vec<T>,
    pub w: WeightFn<T>,
    pub lambda: T,
    pub domain: Domain,
}

impl<T: Real> SLProblem<T> {
    pub fn new(p: WeightFn<T>, w: WeightFn<T>, lambda: T) -> Self {
        Self {
            p,
            potential: Vec::new(),
            w,
            lambda,
            domain: Domain::Canonical,
        }
    }

    /// `((1 - t²) y')' + n(n+1) y = 0`.
    pub fn legendre(n: usize) -> Self {
        let nf = T::idx(n);
        Self::new(
            WeightFn::jacobi(T::one(), T::one()),
            WeightFn::unit(),
            nf * (nf + T::one()),
        )
    }

    /// `P = sqrt(1 - t²)`, `w = 1/sqrt(1 - t²)`, `λ = n²`.
    pub fn chebyshev_first(n: usize) -> Self {
        let nf = T::idx(n);
        Self::new(WeightFn::chebyshev_second(), WeightFn::chebyshev_first(), nf * nf)
    }

    /// `P = (1 - t²)^(3/2)`, `w = sqrt(1 - t²)`, `λ = n(n+2)`.
    pub fn chebyshev_second(n: usize) -> Self {
        let nf = T::idx(n);
        let h = T::lit(1.5);
        Self::new(
            WeightFn::jacobi(h, h),
            WeightFn::chebyshev_second(),
            nf * (nf + T::lit(2.0)),
        )
    }

    /// `P = (1-t)^(α+1) (1+t)^(β+1)`, `w = (1-t)^α (1+t)^β`, `λ = n(n+α+β+1)`.
    pub fn jacobi(alpha: T, beta: T, n: usize) -> Self {
        let nf = T::idx(n);
        Self::new(
            WeightFn::jacobi(alpha + T::one(), beta + T::one()),
            WeightFn::jacobi(alpha, beta),
            nf * (nf + alpha + beta + T::one()),
        )
    }

    /// `y'' = -(nπ)² y` for the trigonometric families.
    pub fn trig(n: usize) -> Self {
        let k = T::idx(n) * T::PI();
        Self::new(WeightFn::unit(), WeightFn::unit(), k * k)
    }

    /// The eigenproblem a canonical basis element solves.
    pub fn for_element(b: &BasisElement<T>) -> Self {
        let n = b.index;
        let mut prob = match b.family {
            Family::Legendre => Self::legendre(n),
            Family::ChebyshevFirst => Self::chebyshev_first(n),
            Family::ChebyshevSecond => Self::chebyshev_second(n),
            Family::Jacobi { alpha, beta } => Self::jacobi(alpha, beta, n),
            Family::TrigSin | Family::TrigCos => Self::trig(n),
        };
        if b.domain == Domain::Shifted {
            // d/dt = 2 d/dx scales the operator by 4
            prob.lambda = prob.lambda * T::lit(4.0);
            prob.domain = Domain::Shifted;
        }
        prob
    }

    fn potential_at(&self, t: T) -> T {
        self.potential.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }
}

/// `(1/w) d/dt(P y') + Q y + λ y` at an interior `t`.
pub fn sl_residual<T: Real, Y: Smooth<T> + ?Sized>(prob: &SLProblem<T>, y: &Y, t: T) -> Result<T> {
    let x = prob.domain.to_canonical(t);
    if !(x.abs() < T::one()) {
        return Err(Error::domain(format!(
            "t = {t} is not interior to the problem interval"
        )));
    }
    let pt = Point::canonical(x);
    let k = prob.domain.dx_dt::<T>();
    let [pv, pd, _] = prob.p.jet(&pt);
    let w = prob.w.at(&pt);
    let [y0, y1, y2] = y.jet(t)?;
    let flux = pd * k * y1 + pv * y2;
    Ok(flux / w + prob.potential_at(t) * y0 + prob.lambda * y0)
}

/// `count` Chebyshev-Gauss nodes `cos((2j+1)π / 2count)`, mapped into `domain`.
pub fn chebyshev_nodes<T: Real>(count: usize, domain: Domain) -> Vec<T> {
    let c = T::idx(count);
    (0..count)
        .map(|j| {
            let x = ((T::lit(2.0) * T::idx(j) + T::one()) * T::PI() / (T::lit(2.0) * c)).cos();
            domain.from_canonical(x)
        })
        .collect()
}

/// Largest `|sl_residual|` over `nodes` interior Chebyshev nodes.
pub fn max_residual<T: Real, Y: Smooth<T> + ?Sized>(prob: &SLProblem<T>, y: &Y, nodes: usize) -> Result<T> {
    let mut worst = T::zero();
    for t in chebyshev_nodes(nodes, prob.domain) {
        worst = worst.max(sl_residual(prob, y, t)?.abs());
    }
    Ok(worst)
}

/// Weighted-cost pairing built from a Jacobi eigenproblem:
/// `a1 = (1-t)^(-α) (1+t)^(-β)`, `a2 = (1-t)^(α+1) (1+t)^(β+1)`,
/// `4λ² = n(n+α+β+1)`, `k1 = a1 u1 = P_n^{(α,β)}` and `k2 = a2 u2`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPairing<T> {
    pub alpha: T,
    pub beta: T,
    pub n: usize,
    pub a1: WeightFn<T>,
    pub a2: WeightFn<T>,
    /// Lagrange multiplier `λ ≥ 0`.
    pub lambda: T,
    pub eta: T,
    pub zeta: T,
    /// `n + α + β + 1`; an integer only when `α + β` is.
    pub l: T,
}

pub fn jacobi_pairing<T: Real>(alpha: T, beta: T, n: usize) -> Result<JacobiPairing<T>> {
    let in_range = |v: T| v > -T::one() && v <= T::zero();
    if !in_range(alpha) || !in_range(beta) {
        return Err(Error::domain(format!(
            "jacobi pairing needs -1 < alpha, beta <= 0, got ({alpha}, {beta})"
        )));
    }
    let nf = T::idx(n);
    let l = nf + alpha + beta + T::one();
    let four_lambda_sq = nf * l;
    Ok(JacobiPairing {
        alpha,
        beta,
        n,
        a1: WeightFn::jacobi(-alpha, -beta),
        a2: WeightFn::jacobi(alpha + T::one(), beta + T::one()),
        lambda: four_lambda_sq.sqrt() / T::lit(2.0),
        eta: -alpha - T::one(),
        zeta: -beta - T::one(),
        l,
    })
}

impl<T: Real> JacobiPairing<T> {
    pub fn four_lambda_sq(&self) -> T {
        T::lit(4.0) * self.lambda * self.lambda
    }

    pub fn k1(&self) -> BasisElement<T> {
        BasisElement::jacobi(self.alpha, self.beta, self.n).expect("validated parameters")
    }

    /// Coefficient `-(n+α+β+1) / (4λ)` of `P_{n-1}^{(α+1,β+1)}` in `u2`.
    fn k2_scale(&self) -> T {
        -(T::idx(self.n) + self.alpha + self.beta + T::one()) / (T::lit(4.0) * self.lambda)
    }

    fn raised(&self) -> BasisElement<T> {
        BasisElement::jacobi(self.alpha + T::one(), self.beta + T::one(), self.n - 1).expect("validated parameters")
    }

    /// `k2 = -(a2 / 2λ) k1'`, from the first extremal equation.
    pub fn k2(&self) -> InputSignal<T> {
        if self.n == 0 {
            return InputSignal::zero(Domain::Canonical);
        }
        InputSignal::basis(self.raised(), self.k2_scale(), true)
    }

    /// `u1 = k1 / a1`.
    pub fn u1(&self) -> InputSignal<T> {
        InputSignal::basis(self.k1(), T::one(), true)
    }

    /// `u2 = k2 / a2`.
    pub fn u2(&self) -> InputSignal<T> {
        if self.n == 0 {
            return InputSignal::zero(Domain::Canonical);
        }
        InputSignal::basis(self.raised(), self.k2_scale(), false)
    }

    /// `(a2 k1')' = -4λ² k1 / a1`.
    pub fn k1_problem(&self) -> SLProblem<T> {
        SLProblem::new(self.a2, self.a1.recip(), self.four_lambda_sq())
    }

    /// `(a1 k2')' = -4λ² k2 / a2`.
    pub fn k2_problem(&self) -> SLProblem<T> {
        SLProblem::new(self.a1, self.a2.recip(), self.four_lambda_sq())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCertificate<T> {
    pub residual_k1: T,
    pub residual_k2: T,
}

/// Residuals of both pairing equations, maximized over 50 interior nodes.
pub fn certify_pair<T: Real>(pairing: &JacobiPairing<T>) -> Result<PairCertificate<T>> {
    Ok(PairCertificate {
        residual_k1: max_residual(&pairing.k1_problem(), &pairing.k1(), 50)?,
        residual_k2: max_residual(&pairing.k2_problem(), &pairing.k2(), 50)?,
    })
}
