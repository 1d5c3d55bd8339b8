//! Attitude maneuvers on SO(3) with `ġ = ω̂ g`: constant rates, rates
//! `c / q(t)` for the cost `∫ q |ω|²`, and the underactuated case `ω3 = 1`
//! solved by shooting over the sinusoidal extremals.
//!
//! Plans constrain attitudes only; the kinematic model has no boundary
//! conditions on `ω`.

use std::fmt;
use std::sync::Arc;

use crate::dynamics::{integrate_so3, AngularRate, Interval, Trajectory};
use crate::error::{Error, Result};
use crate::lie::{exp_so3, norm3, Mat3, PiPolicy, Rotation};
use crate::quadrature::Quadrature;
use crate::scalar::Real;
use crate::signal::derivative5;

pub use crate::lie::{hat, vee};

/// Steps used by the shooting iteration and by plan verification.
pub const SHOOT_STEPS: usize = 4000;
pub const MAX_SHOOT_ITERATIONS: usize = 100;

/// Positive weight `q(t)` of the cost `∫ q |ω|² dt`.
#[derive(Clone)]
pub enum RateWeight<T> {
    /// `q = a0 + a1 t`.
    Affine {
        a0: T,
        a1: T,
    },
    Custom(Arc<dyn Fn(T) -> T + Send + Sync>),
}

impl<T: Real> RateWeight<T> {
    pub fn constant(v: T) -> Self {
        Self::Affine { a0: v, a1: T::zero() }
    }

    pub fn at(&self, t: T) -> T {
        match self {
            Self::Affine { a0, a1 } => *a0 + *a1 * t,
            Self::Custom(f) => f(t),
        }
    }
}

impl<T: Real> fmt::Debug for RateWeight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Affine { a0, a1 } => write!(f, "Affine {{ a0: {a0}, a1: {a1} }}"),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Angular velocity of a plan as a function of `t ∈ [0, T]`.
#[derive(Debug, Clone)]
pub enum RateProfile<T: Real> {
    Constant {
        omega: [T; 3],
    },
    /// `ω(t) = c / q(t)`.
    Weighted {
        c: [T; 3],
        q: RateWeight<T>,
    },
    /// `ω = (r cos((c-1)t + φ), -r sin((c-1)t + φ), 1)`.
    Underactuated {
        r: T,
        phi: T,
        c: T,
    },
}

impl<T: Real> RateProfile<T> {
    pub fn omega(&self, t: T) -> [T; 3] {
        match self {
            Self::Constant { omega } => *omega,
            Self::Weighted { c, q } => {
                let w = q.at(t);
                c.map(|v| v / w)
            }
            Self::Underactuated { r, phi, c } => {
                let (s, co) = ((*c - T::one()) * t + *phi).sin_cos();
                [*r * co, -*r * s, T::one()]
            }
        }
    }

    /// `[ω, ω̇]` where the derivative is available in closed form.
    fn omega_jet(&self, t: T) -> ([T; 3], [T; 3]) {
        match self {
            Self::Constant { omega } => (*omega, [T::zero(); 3]),
            Self::Weighted { .. } => {
                let h = T::lit(1e-3);
                let d = [0, 1, 2].map(|i| derivative5(&|s| self.omega(s)[i], t, h));
                (self.omega(t), d)
            }
            Self::Underactuated { r, phi, c } => {
                let k = *c - T::one();
                let (s, co) = (k * t + *phi).sin_cos();
                ([*r * co, -*r * s, T::one()], [-*r * k * s, -*r * k * co, T::zero()])
            }
        }
    }

    /// Costate `p` and `ṗ` along the profile.
    fn costate(&self, t: T) -> ([T; 3], [T; 3]) {
        let two = T::lit(2.0);
        match self {
            Self::Constant { omega } => (omega.map(|v| two * v), [T::zero(); 3]),
            // p = 2 q ω = 2 c
            Self::Weighted { c, .. } => (c.map(|v| two * v), [T::zero(); 3]),
            Self::Underactuated { c, .. } => {
                let (w, dw) = self.omega_jet(t);
                (
                    [two * w[0], two * w[1], two * *c],
                    [two * dw[0], two * dw[1], T::zero()],
                )
            }
        }
    }
}

impl<T: Real> AngularRate<T> for RateProfile<T> {
    fn omega(&self, t: T) -> [T; 3] {
        RateProfile::omega(self, t)
    }
}

#[derive(Debug, Clone)]
pub struct AttitudePlan<T: Real> {
    pub profile: RateProfile<T>,
    pub duration: T,
    pub g0: Rotation<T>,
    pub g1: Rotation<T>,
    /// `∫ q |ω|² dt` (`q = 1` unless weighted); for the underactuated
    /// profile only `ω1² + ω2²` is charged.
    pub cost: T,
    /// Shooting iterations used, zero for closed-form plans.
    pub iterations: usize,
}

impl<T: Real> AttitudePlan<T> {
    pub fn interval(&self) -> Interval<T> {
        Interval {
            start: T::zero(),
            end: self.duration,
        }
    }

    pub fn simulate(&self, steps: usize) -> Result<Trajectory<T>> {
        integrate_so3(&self.profile, self.g0, self.interval(), steps)
    }

    /// `‖g(T) - g1‖_F` of a simulation with `steps` steps.
    pub fn final_error(&self, steps: usize) -> Result<T> {
        let tr = self.simulate(steps)?;
        Ok((tr.rotation(steps) - *self.g1.matrix()).frobenius())
    }

    /// `ṗ - ω × p`, the costate equations with the plan's multipliers.
    pub fn costate_residual(&self, t: T) -> [T; 3] {
        let (p, dp) = self.profile.costate(t);
        let w = self.profile.omega(t);
        let rhs = [
            w[1] * p[2] - w[2] * p[1],
            w[2] * p[0] - w[0] * p[2],
            w[0] * p[1] - w[1] * p[0],
        ];
        [0, 1, 2].map(|i| dp[i] - rhs[i])
    }

    /// Largest costate residual over `samples + 1` uniform times.
    pub fn max_costate_residual(&self, samples: usize) -> T {
        (0..=samples)
            .map(|k| {
                let t = self.duration * T::idx(k) / T::idx(samples);
                norm3(self.costate_residual(t))
            })
            .fold(T::zero(), T::max)
    }
}

fn check_duration<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::argument(format!("duration must be positive, got {t}")));
    }
    Ok(())
}

/// `ω̂ = log(g1 g0⁻¹) / T`, so that `exp(T ω̂) g0 = g1`; cost `T |ω|²`.
pub fn constant_omega_plan<T: Real>(
    g0: Rotation<T>,
    g1: Rotation<T>,
    duration: T,
    policy: PiPolicy,
) -> Result<AttitudePlan<T>> {
    check_duration(duration)?;
    let v = (g1 * g0.inverse()).log(policy)?;
    let omega = v.map(|c| c / duration);
    let cost = duration * norm3(omega).powi(2);
    Ok(AttitudePlan {
        profile: RateProfile::Constant { omega },
        duration,
        g0,
        g1,
        cost,
        iterations: 0,
    })
}

/// `ω(t) = c / q(t)` with `c ∫₀ᵀ dt/q = log(g1 g0⁻¹)`; the direction is fixed
/// so the flow stays on one one-parameter subgroup.
pub fn weighted_rate_plan<T: Real>(
    g0: Rotation<T>,
    g1: Rotation<T>,
    duration: T,
    q: RateWeight<T>,
    policy: PiPolicy,
) -> Result<AttitudePlan<T>> {
    check_duration(duration)?;
    for k in 0..=256 {
        let t = duration * T::idx(k) / T::lit(256.0);
        let v = q.at(t);
        if !(v > T::zero() && v.is_finite()) {
            return Err(Error::domain(format!("q({t}) = {v} is not positive")));
        }
    }
    let inv_q = Quadrature::<T>::default().integrate(|t| T::one() / q.at(t), T::zero(), duration);
    let v = (g1 * g0.inverse()).log(policy)?;
    let c = v.map(|x| x / inv_q);
    let cost = norm3(c).powi(2) * inv_q;
    Ok(AttitudePlan {
        profile: RateProfile::Weighted { c, q },
        duration,
        g0,
        g1,
        cost,
        iterations: 0,
    })
}

fn shoot_residual<T: Real>(params: [T; 3], g0: Rotation<T>, g1: &Rotation<T>, duration: T) -> Result<[T; 3]> {
    let profile = RateProfile::Underactuated {
        r: params[0],
        phi: params[1],
        c: params[2],
    };
    let tr = integrate_so3(
        &profile,
        g0,
        Interval {
            start: T::zero(),
            end: duration,
        },
        SHOOT_STEPS,
    )?;
    let end = tr.rotation(SHOOT_STEPS);
    crate::lie::log_so3(&(end * g1.matrix().transpose()), PiPolicy::TieBreak)
}

fn solve3<T: Real>(a: [[T; 3]; 3], b: [T; 3]) -> Option<[T; 3]> {
    let inv = Mat3(a).inverse()?;
    Some(inv.apply(b))
}

/// Levenberg-Marquardt on `(r, φ, c)` with a central-difference Jacobian.
fn shoot<T: Real>(start: [T; 3], g0: Rotation<T>, g1: &Rotation<T>, duration: T, tol: T) -> Result<([T; 3], T, usize)> {
    let mut x = start;
    let mut f = shoot_residual(x, g0, g1, duration)?;
    let mut fnorm = norm3(f);
    let mut mu = T::lit(1e-3);
    for it in 0..MAX_SHOOT_ITERATIONS {
        if fnorm <= tol {
            return Ok((x, fnorm, it));
        }
        let mut jac = [[T::zero(); 3]; 3];
        for j in 0..3 {
            let h = T::lit(1e-6) * (T::one() + x[j].abs());
            let mut xp = x;
            let mut xm = x;
            xp[j] = xp[j] + h;
            xm[j] = xm[j] - h;
            let fp = shoot_residual(xp, g0, g1, duration)?;
            let fm = shoot_residual(xm, g0, g1, duration)?;
            for i in 0..3 {
                jac[i][j] = (fp[i] - fm[i]) / (h + h);
            }
        }
        let jt = Mat3(jac).transpose();
        let jtj = jt * Mat3(jac);
        let g = jt.apply(f);
        let mut accepted = false;
        for _ in 0..20 {
            let mut a = jtj.0;
            let trace_scale = jtj.trace() / T::lit(3.0) + T::lit(1e-30);
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = row[i] + mu * (jtj.0[i][i] + trace_scale * T::lit(1e-9));
            }
            let Some(step) = solve3(a, g.map(|v| -v)) else {
                mu = mu * T::lit(10.0);
                continue;
            };
            let trial = [0, 1, 2].map(|i| x[i] + step[i]);
            let ft = shoot_residual(trial, g0, g1, duration)?;
            let nt = norm3(ft);
            if nt < fnorm {
                x = trial;
                f = ft;
                fnorm = nt;
                mu = (mu / T::lit(3.0)).max(T::lit(1e-12));
                accepted = true;
                break;
            }
            mu = mu * T::lit(4.0);
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: it + 1,
                residual: fnorm.to_f64_lossy(),
            });
        }
    }
    if fnorm <= tol {
        return Ok((x, fnorm, MAX_SHOOT_ITERATIONS));
    }
    Err(Error::NoConvergence {
        iterations: MAX_SHOOT_ITERATIONS,
        residual: fnorm.to_f64_lossy(),
    })
}

/// Underactuated plan with `ω3 ≡ 1` from the sinusoidal extremals, found
/// by damped Newton shooting; restarts over a few phases and frequencies
/// when the default start fails.
pub fn underactuated_plan<T: Real>(g0: Rotation<T>, g1: Rotation<T>, duration: T) -> Result<AttitudePlan<T>> {
    check_duration(duration)?;
    let pi = T::PI();
    let two_pi = pi + pi;
    let spin = Rotation::about_axis(2, -duration);
    // the r = 0 extremal ends at R3(T) g0; measure the miss in the spatial frame
    let r0 = norm3((g1 * g0.inverse() * spin).log(PiPolicy::TieBreak)?) / duration;
    let base = T::one() + two_pi / duration;
    let tol = T::tol(1e-11);
    let mut starts = vec![[r0, T::zero(), base]];
    let freqs = [T::one(), -T::one(), T::lit(2.0), -T::lit(2.0)].map(|m| T::one() + m * two_pi / duration);
    for c in freqs {
        for k in 0..4 {
            let phi = pi / T::lit(2.0) * T::idx(k);
            let s = [r0.max(T::lit(1e-3)), phi, c];
            if s != starts[0] {
                starts.push(s);
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut total = 0;
    for s in starts {
        match shoot(s, g0, &g1, duration, tol) {
            Ok((x, _, it)) => {
                let profile = RateProfile::Underactuated {
                    r: x[0],
                    phi: x[1],
                    c: x[2],
                };
                // ω1² + ω2² = r² is constant along the family
                let cost = x[0] * x[0] * duration;
                return Ok(AttitudePlan {
                    profile,
                    duration,
                    g0,
                    g1,
                    cost,
                    iterations: total + it,
                });
            }
            Err(Error::NoConvergence { iterations, residual }) => {
                total += iterations;
                best = best.min(residual);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoConvergence {
        iterations: total,
        residual: best,
    })
}

/// Exact end attitude of the underactuated profile:
/// `g(T) = R3(-ψ(T)) exp(T hat(r, 0, c)) R3(φ) g0`, `ψ = (c-1)t + φ`.
pub fn underactuated_endpoint<T: Real>(r: T, phi: T, c: T, g0: &Rotation<T>, duration: T) -> Mat3<T> {
    let psi = (c - T::one()) * duration + phi;
    exp_so3([T::zero(), T::zero(), -psi])
        * exp_so3([r * duration, T::zero(), c * duration])
        * exp_so3([T::zero(), T::zero(), phi])
        * *g0.matrix()
}

/// Residuals of `d/dt(q/(c-q) d/dt(q ω_i)) + (c - q) ω_i`, `i = 1, 2`,
/// by nested five-point differences.
pub fn so3_sl_residual<T: Real>(
    q: &dyn Fn(T) -> T,
    c: T,
    omega1: &dyn Fn(T) -> T,
    omega2: &dyn Fn(T) -> T,
    t: T,
) -> Result<(T, T)> {
    let gap = c - q(t);
    if !(gap.abs() > T::tol(1e-12)) {
        return Err(Error::Singular(format!("c = q(t) at t = {t}")));
    }
    let h = T::lit(1e-3);
    let residual = |w: &dyn Fn(T) -> T| {
        let qw = |s: T| q(s) * w(s);
        let flux = |s: T| q(s) / (c - q(s)) * derivative5(&qw, s, h);
        derivative5(&flux, t, h) + gap * w(t)
    };
    Ok((residual(omega1), residual(omega2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_plans() {
        let id = Rotation::<f64>::identity();
        let p = constant_omega_plan(id, id, 1.0, PiPolicy::Reject).unwrap();
        assert_eq!(p.cost, 0.0);
        let g1 = Rotation::about_axis(2, PI / 2.0);
        let p = constant_omega_plan(id, g1, 1.0, PiPolicy::Reject).unwrap();
        let RateProfile::Constant { omega } = p.profile else {
            panic!()
        };
        assert!(omega[0].abs() < 1e-15 && (omega[2] - PI / 2.0).abs() < 1e-12);
        assert!(p.final_error(SHOOT_STEPS).unwrap() < 1e-12);
        assert!(p.max_costate_residual(20) < 1e-12);
    }

    #[test]
    fn weighted_affine_rate() {
        let theta = 0.9;
        let id = Rotation::<f64>::identity();
        let g1 = Rotation::about_axis(1, theta);
        let p = weighted_rate_plan(id, g1, 1.0, RateWeight::Affine { a0: 1.0, a1: 1.0 }, PiPolicy::Reject).unwrap();
        let RateProfile::Weighted { c, .. } = &p.profile else {
            panic!()
        };
        assert!((c[1] - theta / 2f64.ln()).abs() < 1e-12);
        assert!(p.final_error(SHOOT_STEPS).unwrap() < 1e-8);
        let flat = weighted_rate_plan(id, g1, 2.0, RateWeight::constant(1.0), PiPolicy::Reject).unwrap();
        let cst = constant_omega_plan(id, g1, 2.0, PiPolicy::Reject).unwrap();
        assert!((flat.profile.omega(0.3)[1] - cst.profile.omega(0.3)[1]).abs() < 1e-12);
        assert!(weighted_rate_plan(id, g1, 1.0, RateWeight::Affine { a0: -1.0, a1: 0.5 }, PiPolicy::Reject).is_err());
    }

    #[test]
    fn pure_spin_needs_no_transverse_rate() {
        let g0 = Rotation::exp([0.2f64, -0.1, 0.4]);
        let g1 = Rotation::about_axis(2, 1.5) * g0;
        let p = underactuated_plan(g0, g1, 1.5).unwrap();
        let RateProfile::Underactuated { r, .. } = p.profile else {
            panic!()
        };
        assert!(r.abs() < 1e-9);
        assert_eq!(p.iterations, 0);
    }

    #[test]
    fn perturbed_spin_converges() {
        let g0 = Rotation::<f64>::identity();
        let g1 = Rotation::exp([0.05, -0.03, 0.02]) * Rotation::about_axis(2, 1.0);
        let p = underactuated_plan(g0, g1, 1.0).unwrap();
        assert!(p.final_error(SHOOT_STEPS).unwrap() < 1e-8);
        assert!(p.max_costate_residual(100) < 1e-6);
    }

    #[test]
    fn closed_form_endpoint_matches_simulation() {
        let (r, phi, c) = (0.3, 0.7, 1.0 + 2.0 * PI);
        let g0 = Rotation::exp([0.1, 0.2, 0.3]);
        let p = AttitudePlan {
            profile: RateProfile::Underactuated { r, phi, c },
            duration: 1.0,
            g0,
            g1: g0,
            cost: 0.0,
            iterations: 0,
        };
        let sim = p.simulate(4000).unwrap().rotation(4000);
        assert!((sim - underactuated_endpoint(r, phi, c, &g0, 1.0)).frobenius() < 1e-7);
    }

    #[test]
    fn sl_residual_checks() {
        let one = |_t: f64| 1.0;
        let (c, k) = (2.5f64, 1.5f64);
        let w1 = move |t: f64| 0.4 * (k * t + 0.2).cos();
        let w2 = move |t: f64| -0.4 * (k * t + 0.2).sin();
        let (r1, r2) = so3_sl_residual(&one, c, &w1, &w2, 0.3).unwrap();
        assert!(r1.abs() < 1e-8 && r2.abs() < 1e-8);
        let two = |_t: f64| 2.0;
        let v1 = |t: f64| (t / 2.0).cos();
        let v2 = |t: f64| -(t / 2.0).sin();
        let (r1, r2) = so3_sl_residual(&two, 3.0, &v1, &v2, 0.8).unwrap();
        assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6);
        assert!(matches!(
            so3_sl_residual(&two, 2.0, &v1, &v2, 0.5),
            Err(Error::Singular(_))
        ));
        let (r1, _) = so3_sl_residual(&one, 3.0, &|t: f64| t * t + 1.0, &|t: f64| t, 0.5).unwrap();
        assert!(r1.abs() > 0.1);
    }
}
