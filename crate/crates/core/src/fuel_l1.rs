//! Sub-optimal fuel steering: with `u_i = b_i f_i` for a fixed pair the
//! cost `∫ |u1| + |u2|` reduces to `|b1| c1 + |b2| c2` under `b1 b2 = c`,
//! minimized at `|b1| c1 = |b2| c2` with value `2 sqrt(|c| c1 c2)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{coupling_displacement, integrate_nhi, Interval, NhiState, Sampler};
use crate::error::{Error, Result};
use crate::orthopoly::{CanonicalFn, Domain};
use crate::quadrature::Quadrature;
use crate::scalar::Real;
use crate::signal::InputSignal;
use crate::steering::{PairIndices, SteeringFamily};

const SCAN_POINTS: usize = 512;
const GRID_POINTS: usize = 10_000;
/// Steps per simulation when a report is checked against the dynamics.
pub const VERIFY_STEPS: usize = 4000;

/// Constants of the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuelConstants<T> {
    /// `∫ |u1| dt`.
    pub c1: T,
    /// `∫ |u2| dt`.
    pub c2: T,
    /// Required product `b1 b2 = a / D`.
    pub c: T,
    /// Coupling displacement `D` of the unit pair.
    pub displacement: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuelReport<T> {
    pub family: Option<String>,
    pub pair: Option<PairIndices>,
    pub c1: T,
    pub c2: T,
    pub c: T,
    pub b1: T,
    pub b2: T,
    pub min_j: T,
    pub oracle_min_j: T,
    /// Terminal state of `(b1 u1, b2 u2)` from the origin, when simulated.
    pub simulated_endpoint: Option<[T; 3]>,
}

/// Points in the sampling parameter where `u` changes sign, located by a
/// 512-point scan and bisection.
fn sign_changes<T: Real>(v: &dyn Fn(T) -> T, a: T, b: T) -> Vec<T> {
    let n = SCAN_POINTS;
    let at = |k: usize| if k == n { b } else { a + (b - a) * T::idx(k) / T::idx(n) };
    let mut roots = Vec::new();
    let mut prev = (a, v(a));
    for k in 1..=n {
        let s = at(k);
        let cur = (s, v(s));
        if cur.1 == T::zero() && k < n {
            roots.push(s);
        } else if prev.1 * cur.1 < T::zero() {
            let (mut lo, mut hi) = (prev.0, cur.0);
            let lo_sign = prev.1.signum();
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if v(mid).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push((lo + hi) / T::lit(2.0));
        }
        prev = cur;
    }
    roots
}

/// `∫ |u|^p dt`, integrated panel by panel between sign changes.
pub fn abs_power_integral<T: Real>(u: &InputSignal<T>, p: T, interval: Interval<T>) -> Result<T> {
    if !(p > T::zero()) {
        return Err(Error::argument(format!("exponent must be positive, got {p}")));
    }
    let (ep, eq) = u.min_powers();
    if ep * p <= -T::one() || eq * p <= -T::one() {
        return Err(Error::Integrability(format!("|u|^{p} is not integrable")));
    }
    let refs = [u];
    let sampler = Sampler::new(&refs, interval)?;
    let rate = |s: T| {
        let mut r = [T::zero()];
        sampler.rates(s, &mut r);
        r[0]
    };
    let (a, b) = sampler.span();
    let mut cuts = vec![a];
    cuts.extend(sign_changes(&rate, a, b));
    cuts.push(b);
    let quad = Quadrature::<T>::default();
    let integrand = |s: T| {
        if p == T::one() {
            rate(s).abs()
        } else {
            sampler.inputs(s)[0].abs().powf(p) * sampler.dt_ds(s)
        }
    };
    Ok(cuts
        .windows(2)
        .map(|w| quad.integrate(integrand, w[0], w[1]))
        .fold(T::zero(), |x, y| x + y))
}

pub fn l1_norm<T: Real>(u: &InputSignal<T>, interval: Interval<T>) -> Result<T> {
    abs_power_integral(u, T::one(), interval)
}

/// `c_i = ∫ |u_i|` and `c = a / D` for unit-amplitude inputs.
pub fn fuel_constants<T: Real>(
    u1: &InputSignal<T>,
    u2: &InputSignal<T>,
    a: T,
    interval: Interval<T>,
) -> Result<FuelConstants<T>> {
    let d = coupling_displacement(u1, u2, interval)?;
    if !(d.abs() > T::tol(1e-13)) {
        return Err(Error::Planner(format!("pair does not couple (displacement {d})")));
    }
    Ok(FuelConstants {
        c1: l1_norm(u1, interval)?,
        c2: l1_norm(u2, interval)?,
        c: a / d,
        displacement: d,
    })
}

/// Log grid over `|b1|` with `b2 = c / b1`, zoomed around the best node
/// until the bracket is negligible.
fn grid_oracle<T: Real>(c1: T, c2: T, c: T) -> T {
    let j = |b1: T| b1 * c1 + c.abs() / b1 * c2;
    let scale = c.abs().sqrt();
    let (mut lo, mut hi) = ((scale * T::lit(1e-6)).ln(), (scale * T::lit(1e6)).ln());
    let mut best = T::infinity();
    for _ in 0..6 {
        let step = (hi - lo) / T::idx(GRID_POINTS - 1);
        let mut arg = 0;
        for k in 0..GRID_POINTS {
            let v = j((lo + step * T::idx(k)).exp());
            if v < best {
                best = v;
                arg = k;
            }
        }
        let centre = lo + step * T::idx(arg);
        lo = centre - step * T::lit(2.0);
        hi = centre + step * T::lit(2.0);
    }
    best
}

/// Closed-form optimum with `|b1| = sqrt(|c| c2 / c1)`, `sign(b1 b2) = sign(c)`,
/// plus the grid-search value for comparison.
pub fn fuel_min<T: Real>(k: &FuelConstants<T>) -> Result<FuelReport<T>> {
    let FuelConstants { c1, c2, c, .. } = *k;
    if !(c1 > T::zero() && c2 > T::zero()) {
        return Err(Error::argument(format!("need c1, c2 > 0, got ({c1}, {c2})")));
    }
    if c == T::zero() || !c.is_finite() {
        return Err(Error::argument("amplitude product must be finite and nonzero"));
    }
    let b1 = (c.abs() * c2 / c1).sqrt();
    let b2 = c / b1;
    Ok(FuelReport {
        family: None,
        pair: None,
        c1,
        c2,
        c,
        b1,
        b2,
        min_j: T::lit(2.0) * (c.abs() * c1 * c2).sqrt(),
        oracle_min_j: grid_oracle(c1, c2, c),
        simulated_endpoint: None,
    })
}

/// Optimum of `|b1|^p C1 + |b2|^p C2` under `b1 b2 = c`, `C_i = ∫ |u_i|^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpOptimum<T> {
    pub p: T,
    pub b1: T,
    pub b2: T,
    pub min_j: T,
}

/// Golden-section search over `ln |b1|`; the objective is convex there.
pub fn fuel_min_lp<T: Real>(cp1: T, cp2: T, c: T, p: T) -> Result<LpOptimum<T>> {
    if !(cp1 > T::zero() && cp2 > T::zero() && p > T::zero()) || c == T::zero() {
        return Err(Error::argument("need positive constants, positive exponent and c != 0"));
    }
    let j = |s: T| (p * s).exp() * cp1 + (p * (c.abs().ln() - s)).exp() * cp2;
    let mid = c.abs().ln() / T::lit(2.0);
    let (mut lo, mut hi) = (mid - T::lit(40.0) / p, mid + T::lit(40.0) / p);
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (j(x1), j(x2));
    for _ in 0..300 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = j(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = j(x2);
        }
    }
    let s = (lo + hi) / T::lit(2.0);
    let b1 = s.exp();
    Ok(LpOptimum {
        p,
        b1,
        b2: c / b1,
        min_j: j(s),
    })
}

/// Lp variant of the whole pipeline.
pub fn fuel_lp<T: Real>(
    u1: &InputSignal<T>,
    u2: &InputSignal<T>,
    a: T,
    p: T,
    interval: Interval<T>,
) -> Result<LpOptimum<T>> {
    let d = coupling_displacement(u1, u2, interval)?;
    if !(d.abs() > T::tol(1e-13)) {
        return Err(Error::Planner(format!("pair does not couple (displacement {d})")));
    }
    fuel_min_lp(
        abs_power_integral(u1, p, interval)?,
        abs_power_integral(u2, p, interval)?,
        a / d,
        p,
    )
}

fn report_for<T: Real>(family: SteeringFamily<T>, pair: PairIndices, a: T, domain: Domain) -> Result<FuelReport<T>> {
    let (u1, u2) = family.pair_signals(pair, domain)?;
    let interval = Interval::of(domain);
    let mut report = fuel_min(&fuel_constants(&u1, &u2, a, interval)?)?;
    let (v1, v2) = (u1.scaled(report.b1), u2.scaled(report.b2));
    let end = integrate_nhi([&v1, &v2], NhiState::origin(), interval, VERIFY_STEPS)?.terminal_nhi();
    let tol = T::lit(1e-6) * a.abs().max(T::one());
    if (end.x3 - a).abs() > tol || end.x1.abs() > T::lit(1e-8) || end.x2.abs() > T::lit(1e-8) {
        return Err(Error::Planner(format!(
            "{} pair ({}, {}) missed the transfer: simulated ({}, {}, {})",
            family.name(),
            pair.odd,
            pair.even,
            end.x1,
            end.x2,
            end.x3
        )));
    }
    report.family = Some(family.name().to_string());
    report.pair = Some(pair);
    report.simulated_endpoint = Some(end.to_array());
    Ok(report)
}

/// Reports for each `(family, pair)`, verified by simulation and sorted by
/// `min_j`; ties keep the input order.
pub fn compare_families<T: Real>(
    entries: &[(SteeringFamily<T>, PairIndices)],
    a: T,
    domain: Domain,
) -> Result<Vec<FuelReport<T>>> {
    let mut reports = entries
        .par_iter()
        .map(|&(f, p)| report_for(f, p, a, domain))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|x, y| x.min_j.partial_cmp(&y.min_j).unwrap_or(std::cmp::Ordering::Equal));
    Ok(reports)
}
