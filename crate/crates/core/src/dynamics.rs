//! Fixed-step simulation of the nonholonomic integrator, its m-input
//! generalization and `ġ = ω̂ g` on SO(3), plus the coupling displacement
//! `∫ (x1 u2 - x2 u1) dt` by nested quadrature.
//!
//! Convention throughout: `ẋ_ij = x_i u_j - x_j u_i`, so for two inputs
//! `ẋ3 = x1 u2 - x2 u1`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{exp_so3, polar_project, Mat3, Rotation};
use crate::orthopoly::{Domain, Point};
use crate::quadrature::Quadrature;
use crate::scalar::Real;
use crate::signal::InputSignal;

pub const DEFAULT_STEPS: usize = 2000;
pub const MIN_STEPS: usize = 100;
pub const MAX_CHANNELS: usize = 8;

/// Closed time interval `[start, end]` with `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub start: T,
    pub end: T,
}

impl<T: Real> Interval<T> {
    pub fn new(start: T, end: T) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::argument(format!("degenerate interval [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    pub fn of(domain: Domain) -> Self {
        let (start, end) = domain.bounds();
        Self { start, end }
    }

    pub fn length(&self) -> T {
        self.end - self.start
    }

    pub fn is_domain(&self, domain: Domain) -> bool {
        let (a, b) = domain.bounds::<T>();
        a == self.start && b == self.end
    }

    fn within(&self, domain: Domain) -> bool {
        domain.contains(self.start) && domain.contains(self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NhiState<T> {
    pub x1: T,
    pub x2: T,
    pub x3: T,
}

impl<T: Real> NhiState<T> {
    pub fn new(x1: T, x2: T, x3: T) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_slice(v: &[T]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.x1 - other.x1)
            .abs()
            .max((self.x2 - other.x2).abs())
            .max((self.x3 - other.x3).abs())
    }
}

/// Position `x ∈ R^m` and the areas `x_ij`, `i < j`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnhiState<T> {
    pub x: Vec<T>,
    pub areas: Vec<T>,
}

/// Index of `x_ij` (0-based, `i < j`) in the lexicographic area list.
pub fn area_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// All `(i, j)` with `i < j < m` in lexicographic order.
pub fn area_pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j)))
}

impl<T: Real> GnhiState<T> {
    pub fn origin(m: usize) -> Result<Self> {
        Self::new(vec![T::zero(); m], vec![T::zero(); m * (m.max(1) - 1) / 2])
    }

    pub fn new(x: Vec<T>, areas: Vec<T>) -> Result<Self> {
        let m = x.len();
        if !(2..=MAX_CHANNELS).contains(&m) {
            return Err(Error::argument(format!("need 2 <= m <= {MAX_CHANNELS}, got {m}")));
        }
        if areas.len() != m * (m - 1) / 2 {
            return Err(Error::argument(format!(
                "m = {m} needs {} area coordinates, got {}",
                m * (m - 1) / 2,
                areas.len()
            )));
        }
        if x.iter().chain(&areas).any(|v| !v.is_finite()) {
            return Err(Error::argument("state has non-finite entries"));
        }
        Ok(Self { x, areas })
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    /// `x_ij` for 0-based `i < j`.
    pub fn area(&self, i: usize, j: usize) -> T {
        self.areas[area_index(self.m(), i, j)]
    }

    pub fn set_area(&mut self, i: usize, j: usize, v: T) {
        let k = area_index(self.m(), i, j);
        self.areas[k] = v;
    }

    /// `x` followed by the areas.
    pub fn flat(&self) -> Vec<T> {
        self.x.iter().chain(&self.areas).copied().collect()
    }

    pub fn from_flat(m: usize, v: &[T]) -> Result<Self> {
        if v.len() < m {
            return Err(Error::argument("flat state too short"));
        }
        Self::new(v[..m].to_vec(), v[m..].to_vec())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.flat()
            .iter()
            .zip(other.flat())
            .map(|(a, b)| (*a - b).abs())
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical RK4 in `t`.
    Rk4,
    /// RK4 in `s` with `t = -cos s`, for inputs with `(1 - t²)^(-1/2)` factors.
    Rk4Angle,
    /// `g ← exp(h ω̂(t + h/2)) g`.
    LieMidpoint,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::Rk4Angle => "rk4-angle",
            Scheme::LieMidpoint => "lie-midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Nhi,
    Gnhi { m: usize },
    So3,
}

/// Sampled simulation output.
///
/// `states[k]` and `inputs[k]` belong to `times[k]`; the grid is uniform in
/// the integration parameter, which is `t` itself except for
/// [`Scheme::Rk4Angle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub kind: SystemKind,
    pub scheme: Scheme,
    pub steps: usize,
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
    pub inputs: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn terminal(&self) -> &[T] {
        self.states.last().expect("trajectories have at least two samples")
    }

    pub fn terminal_nhi(&self) -> NhiState<T> {
        NhiState::from_slice(self.terminal())
    }

    pub fn terminal_gnhi(&self) -> GnhiState<T> {
        let m = match self.kind {
            SystemKind::Gnhi { m } => m,
            _ => 2,
        };
        GnhiState::from_flat(m, self.terminal()).expect("trajectory state width")
    }

    /// Attitude at sample `k` of an SO(3) trajectory.
    pub fn rotation(&self, k: usize) -> Mat3<T> {
        let s = &self.states[k];
        Mat3::from_fn(|i, j| s[3 * i + j])
    }

    pub fn state_labels(&self) -> Vec<String> {
        match self.kind {
            SystemKind::Nhi => vec!["x1".into(), "x2".into(), "x3".into()],
            SystemKind::Gnhi { m } => (1..=m)
                .map(|i| format!("x{i}"))
                .chain(area_pairs(m).map(|(i, j)| format!("x{}{}", i + 1, j + 1)))
                .collect(),
            SystemKind::So3 => (1..=3).flat_map(|i| (1..=3).map(move |j| format!("g{i}{j}"))).collect(),
        }
    }

    pub fn input_labels(&self) -> Vec<String> {
        match self.kind {
            SystemKind::Nhi => vec!["u1".into(), "u2".into()],
            SystemKind::Gnhi { m } => (1..=m).map(|i| format!("u{i}")).collect(),
            SystemKind::So3 => vec!["w1".into(), "w2".into(), "w3".into()],
        }
    }

    /// Column order: `t`, positions, inputs, then areas for GNHI; otherwise
    /// `t`, states, inputs.
    fn columns(&self, k: usize) -> Vec<T> {
        let mut row = vec![self.times[k]];
        let s = &self.states[k];
        match self.kind {
            SystemKind::Gnhi { m } => {
                row.extend_from_slice(&s[..m]);
                row.extend_from_slice(&self.inputs[k]);
                row.extend_from_slice(&s[m..]);
            }
            _ => {
                row.extend_from_slice(s);
                row.extend_from_slice(&self.inputs[k]);
            }
        }
        row
    }

    pub fn csv_header(&self) -> String {
        let states = self.state_labels();
        let inputs = self.input_labels();
        let mut cols = vec!["t".to_string()];
        match self.kind {
            SystemKind::Gnhi { m } => {
                cols.extend_from_slice(&states[..m]);
                cols.extend(inputs);
                cols.extend_from_slice(&states[m..]);
            }
            _ => {
                cols.extend(states);
                cols.extend(inputs);
            }
        }
        cols.join(",")
    }

    /// CSV with shortest round-trip decimals and `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for k in 0..self.times.len() {
            // adding zero folds -0 into 0
            let row: Vec<String> = self.columns(k).iter().map(|&v| format!("{}", v + T::zero())).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// How a set of input signals is sampled by the integrators.
enum Sampling {
    Time,
    /// `t = domain(-cos s)`, `dt/ds = sin s / (dx/dt)`.
    Angle(Domain),
}

pub(crate) struct Sampler<'a, T> {
    signals: &'a [&'a InputSignal<T>],
    mode: Sampling,
    interval: Interval<T>,
    /// Angle nodes clustered at both ends; set when some weight power is
    /// not a multiple of 1/2, which leaves a fractional power of `s` in
    /// the rates.
    graded: bool,
}

impl<'a, T: Real> Sampler<'a, T> {
    pub(crate) fn new(signals: &'a [&'a InputSignal<T>], interval: Interval<T>) -> Result<Self> {
        let mut angle: Option<Domain> = None;
        let mut graded = false;
        for u in signals {
            if !interval.within(u.domain()) {
                let (a, b) = u.domain().bounds::<T>();
                return Err(Error::domain(format!(
                    "interval [{}, {}] leaves the input domain [{a}, {b}]",
                    interval.start, interval.end
                )));
            }
            if u.needs_angle() {
                let d = u.domain();
                if angle.is_some_and(|prev| prev != d) {
                    return Err(Error::Capability("singular inputs on different domains".into()));
                }
                angle = Some(d);
                graded |= u.off_half_grid();
                if !interval.is_domain(d) {
                    return Err(Error::Capability(
                        "inputs with endpoint singularities need the full interval of their family".into(),
                    ));
                }
                let (p, q) = u.min_powers_of_signal();
                if p < -T::lit(0.5) || q < -T::lit(0.5) {
                    return Err(Error::Capability(
                        "endpoint singularity stronger than (1 - t²)^(-1/2)".into(),
                    ));
                }
            }
        }
        Ok(Self {
            signals,
            mode: angle.map_or(Sampling::Time, Sampling::Angle),
            interval,
            graded,
        })
    }

    fn scheme(&self) -> Scheme {
        match self.mode {
            Sampling::Time => Scheme::Rk4,
            Sampling::Angle(_) => Scheme::Rk4Angle,
        }
    }

    pub(crate) fn span(&self) -> (T, T) {
        match self.mode {
            Sampling::Time => (self.interval.start, self.interval.end),
            Sampling::Angle(_) => (T::zero(), T::PI()),
        }
    }

    /// Parameter value of grid node `k` out of `n`, exact at both ends.
    fn node(&self, k: usize, n: usize) -> T {
        let (a, b) = self.span();
        if k == n {
            return b;
        }
        let mut u = T::idx(k) / T::idx(n);
        if self.graded {
            // Cubic contact at both ends: u - sin(2πu)/(2π).
            let tau = T::PI() + T::PI();
            u = u - (tau * u).sin() / tau;
        }
        a + (b - a) * u
    }

    fn time(&self, s: T) -> T {
        match self.mode {
            Sampling::Time => s,
            Sampling::Angle(d) => d.from_canonical(Point::from_angle(s).x),
        }
    }

    /// `du_i/ds`-style rates `u_i(t(s)) dt/ds`.
    pub(crate) fn rates(&self, s: T, out: &mut [T]) {
        match self.mode {
            Sampling::Time => {
                for (o, u) in out.iter_mut().zip(self.signals) {
                    let d = u.domain();
                    *o = u.value_at(&Point::canonical(d.to_canonical(s)));
                }
            }
            Sampling::Angle(dom) => {
                let pt = Point::from_angle(s);
                let k = dom.dx_dt::<T>();
                let t = dom.from_canonical(pt.x);
                for (o, u) in out.iter_mut().zip(self.signals) {
                    *o = if u.domain() == dom {
                        u.value_times_root(&pt) / k
                    } else {
                        u.value_at(&Point::canonical(u.domain().to_canonical(t))) * pt.root / k
                    };
                }
            }
        }
    }

    /// `dt/ds`.
    pub(crate) fn dt_ds(&self, s: T) -> T {
        match self.mode {
            Sampling::Time => T::one(),
            Sampling::Angle(d) => Point::from_angle(s).root / d.dx_dt::<T>(),
        }
    }

    pub(crate) fn inputs(&self, s: T) -> Vec<T> {
        let t = self.time(s);
        self.signals
            .iter()
            .map(|u| match self.mode {
                Sampling::Angle(d) if u.domain() == d => u.value_at(&Point::from_angle(s)),
                _ => u.value_at(&Point::canonical(u.domain().to_canonical(t))),
            })
            .collect()
    }
}

impl<T: Real> InputSignal<T> {
    fn off_half_grid(&self) -> bool {
        let two = T::lit(2.0);
        self.terms().iter().filter(|t| t.scale != T::zero()).any(|t| {
            let w = t.factor();
            (two * w.p).fract() != T::zero() || (two * w.q).fract() != T::zero()
        })
    }

    fn min_powers_of_signal(&self) -> (T, T) {
        crate::orthopoly::CanonicalFn::min_powers(self)
    }
}

fn area_rhs<T: Real>(m: usize, state: &[T], v: &[T], out: &mut [T]) {
    out[..m].copy_from_slice(v);
    for (k, (i, j)) in area_pairs(m).enumerate() {
        out[m + k] = state[i] * v[j] - state[j] * v[i];
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps < MIN_STEPS {
        return Err(Error::argument(format!("need at least {MIN_STEPS} steps, got {steps}")));
    }
    Ok(())
}

/// RK4 over any channel count with the state laid out as `x` then areas.
pub(crate) fn integrate_area<T: Real>(
    signals: &[&InputSignal<T>],
    init: Vec<T>,
    interval: Interval<T>,
    steps: usize,
    kind: SystemKind,
) -> Result<Trajectory<T>> {
    check_steps(steps)?;
    let m = signals.len();
    let sampler = Sampler::new(signals, interval)?;
    let dim = init.len();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut x = init;
    let (mut v0, mut vm, mut v1) = (vec![T::zero(); m], vec![T::zero(); m], vec![T::zero(); m]);
    let mut k = [
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
        vec![T::zero(); dim],
    ];
    let mut tmp = vec![T::zero(); dim];
    let two = T::lit(2.0);
    let six = T::lit(6.0);

    let mut s = sampler.node(0, steps);
    sampler.rates(s, &mut v0);
    for n in 0..steps {
        times.push(sampler.time(s));
        states.push(x.clone());
        inputs.push(sampler.inputs(s));
        let s1 = sampler.node(n + 1, steps);
        let h = s1 - s;
        sampler.rates(s + h / two, &mut vm);
        sampler.rates(s1, &mut v1);

        area_rhs(m, &x, &v0, &mut k[0]);
        for i in 0..dim {
            tmp[i] = x[i] + h / two * k[0][i];
        }
        area_rhs(m, &tmp, &vm, &mut k[1]);
        for i in 0..dim {
            tmp[i] = x[i] + h / two * k[1][i];
        }
        area_rhs(m, &tmp, &vm, &mut k[2]);
        for i in 0..dim {
            tmp[i] = x[i] + h * k[2][i];
        }
        area_rhs(m, &tmp, &v1, &mut k[3]);
        for i in 0..dim {
            x[i] = x[i] + h / six * (k[0][i] + two * k[1][i] + two * k[2][i] + k[3][i]);
        }
        s = s1;
        std::mem::swap(&mut v0, &mut v1);
    }
    times.push(sampler.time(s));
    states.push(x);
    inputs.push(sampler.inputs(s));
    Ok(Trajectory {
        kind,
        scheme: sampler.scheme(),
        steps,
        times,
        states,
        inputs,
    })
}

/// RK4 simulation of `ẋ1 = u1`, `ẋ2 = u2`, `ẋ3 = x1 u2 - x2 u1`.
pub fn integrate_nhi<T: Real>(
    u: [&InputSignal<T>; 2],
    x0: NhiState<T>,
    interval: Interval<T>,
    steps: usize,
) -> Result<Trajectory<T>> {
    integrate_area(&u, x0.to_array().to_vec(), interval, steps, SystemKind::Nhi)
}

/// RK4 simulation of `ẋ_i = u_i`, `ẋ_ij = x_i u_j - x_j u_i`.
pub fn integrate_gnhi<T: Real>(
    u: &[InputSignal<T>],
    s0: &GnhiState<T>,
    interval: Interval<T>,
    steps: usize,
) -> Result<Trajectory<T>> {
    let m = s0.m();
    if u.len() != m {
        return Err(Error::argument(format!("{} inputs for an m = {m} state", u.len())));
    }
    let refs: Vec<&InputSignal<T>> = u.iter().collect();
    integrate_area(&refs, s0.flat(), interval, steps, SystemKind::Gnhi { m })
}

/// Angular velocity `ω(t)` for `ġ = ω̂ g`.
pub trait AngularRate<T> {
    fn omega(&self, t: T) -> [T; 3];
}

impl<T: Real> AngularRate<T> for [InputSignal<T>; 3] {
    fn omega(&self, t: T) -> [T; 3] {
        [0, 1, 2].map(|i| {
            let u = &self[i];
            u.value_at(&Point::canonical(u.domain().to_canonical(t)))
        })
    }
}

impl<T: Real, F: Fn(T) -> [T; 3]> AngularRate<T> for F {
    fn omega(&self, t: T) -> [T; 3] {
        self(t)
    }
}

/// Midpoint Lie-group stepping `g_{k+1} = exp(h ω̂(t_k + h/2)) g_k`.
///
/// The product of exact rotations drifts only by rounding; when the drift
/// passes `1e-12` the attitude is projected back by polar decomposition.
pub fn integrate_so3<T: Real, W: AngularRate<T> + ?Sized>(
    omega: &W,
    g0: Rotation<T>,
    interval: Interval<T>,
    steps: usize,
) -> Result<Trajectory<T>> {
    check_steps(steps)?;
    let (a, b) = (interval.start, interval.end);
    let node = |k: usize| {
        if k == steps {
            b
        } else {
            a + (b - a) * T::idx(k) / T::idx(steps)
        }
    };
    let mut g = *g0.matrix();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = node(k);
        times.push(t);
        states.push(g.entries().to_vec());
        inputs.push(omega.omega(t).to_vec());
        if k == steps {
            break;
        }
        let h = node(k + 1) - t;
        let w = omega.omega(t + h / T::lit(2.0));
        g = exp_so3(w.map(|c| c * h)) * g;
        if g.orthogonality_defect() > T::tol(1e-12) {
            g = polar_project(&g);
        }
    }
    Ok(Trajectory {
        kind: SystemKind::So3,
        scheme: Scheme::LieMidpoint,
        steps,
        times,
        states,
        inputs,
    })
}

/// `∫ (x1 u2 - x2 u1) dt` with `x_i` the running integrals of `u_i` from
/// `interval.start`, by nested adaptive quadrature.
///
/// Inputs with inverse-square-root endpoint factors are integrated in the
/// angle variable, which requires the interval to be their whole domain.
pub fn coupling_displacement<T: Real>(u1: &InputSignal<T>, u2: &InputSignal<T>, interval: Interval<T>) -> Result<T> {
    for u in [u1, u2] {
        let (p, q) = u.min_powers_of_signal();
        if p <= -T::one() || q <= -T::one() {
            return Err(Error::Integrability("input is not integrable".into()));
        }
    }
    let pair = [u1, u2];
    let sampler = Sampler::new(&pair, interval)?;
    let quad = Quadrature::<T>::default();
    let (a, b) = sampler.span();
    let rate = |s: T| {
        let mut v = [T::zero(); 2];
        sampler.rates(s, &mut v);
        v
    };
    let running = |s: T, i: usize| quad.integrate(|r| rate(r)[i], a, s);
    Ok(quad.integrate(
        |s| {
            let v = rate(s);
            running(s, 0) * v[1] - running(s, 1) * v[0]
        },
        a,
        b,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::BasisElement;

    fn leg(n: usize) -> BasisElement<f64> {
        BasisElement::legendre(n).unwrap()
    }

    #[test]
    fn zero_inputs_hold_state() {
        let z = InputSignal::zero(Domain::Canonical);
        let x0 = NhiState::new(0.5, -1.0, 2.0);
        let tr = integrate_nhi([&z, &z], x0, Interval::of(Domain::Canonical), 200).unwrap();
        assert_eq!(tr.terminal_nhi(), x0);
        assert_eq!(tr.times.len(), 201);
    }

    #[test]
    fn constant_input_moves_first_coordinate() {
        let one = InputSignal::constant(1.0f64, Domain::Shifted);
        let z = InputSignal::zero(Domain::Shifted);
        let tr = integrate_nhi([&one, &z], NhiState::origin(), Interval::of(Domain::Shifted), 100).unwrap();
        let x = tr.terminal_nhi();
        assert!((x.x1 - 1.0).abs() < 1e-14 && x.x2 == 0.0 && x.x3 == 0.0);
    }

    #[test]
    fn legendre_pair_on_canonical_interval() {
        let s = (15.0f64 / 4.0).sqrt();
        let u1 = InputSignal::basis(leg(1), s, false);
        let u2 = InputSignal::basis(leg(2), s, false);
        let tr = integrate_nhi([&u1, &u2], NhiState::origin(), Interval::of(Domain::Canonical), 4000).unwrap();
        assert!(tr.terminal_nhi().max_abs_diff(&NhiState::new(0.0, 0.0, 1.0)) < 1e-6);
    }

    #[test]
    fn shifted_legendre_coupling() {
        let u1 = InputSignal::basis(leg(1).shift(), 1.0, false);
        let u2 = InputSignal::basis(leg(2).shift(), 1.0, false);
        let d = coupling_displacement(&u1, &u2, Interval::of(Domain::Shifted)).unwrap();
        assert!((d - 1.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_chebyshev_coupling_is_four_thirds() {
        let t = |n| BasisElement::<f64>::chebyshev_first(n).unwrap();
        let u1 = InputSignal::basis(t(1), 1.0, true);
        let u2 = InputSignal::basis(t(2), 1.0, true);
        let d = coupling_displacement(&u1, &u2, Interval::of(Domain::Canonical)).unwrap();
        assert!((d - 4.0 / 3.0).abs() < 1e-10, "{d}");
        let tr = integrate_nhi([&u1, &u2], NhiState::origin(), Interval::of(Domain::Canonical), 4000).unwrap();
        assert_eq!(tr.scheme, Scheme::Rk4Angle);
        assert!((tr.terminal_nhi().x3 - 4.0 / 3.0).abs() < 1e-7);
        assert!(tr.terminal_nhi().x1.abs() < 1e-12);
    }

    #[test]
    fn singular_input_needs_full_domain() {
        let u = InputSignal::basis(BasisElement::<f64>::chebyshev_first(1).unwrap(), 1.0, true);
        let r = integrate_nhi([&u, &u], NhiState::origin(), Interval::new(-0.5, 0.5).unwrap(), 100);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn two_channel_gnhi_matches_nhi() {
        let u1 = InputSignal::basis(leg(3), 0.7, false).with(leg(0), 0.2, false);
        let u2 = InputSignal::basis(leg(2), -1.1, false);
        let iv = Interval::of(Domain::Canonical);
        let a = integrate_nhi([&u1, &u2], NhiState::new(0.1, 0.2, 0.3), iv, 500).unwrap();
        let s0 = GnhiState::new(vec![0.1, 0.2], vec![0.3]).unwrap();
        let b = integrate_gnhi(&[u1, u2], &s0, iv, 500).unwrap();
        for (sa, sb) in a.states.iter().zip(&b.states) {
            assert_eq!(sa[2], sb[2]);
        }
    }

    #[test]
    fn equal_inputs_leave_areas_at_zero() {
        let u = InputSignal::constant(0.8f64, Domain::Canonical);
        let b = integrate_gnhi(
            &vec![u; 3],
            &GnhiState::origin(3).unwrap(),
            Interval::of(Domain::Canonical),
            100,
        )
        .unwrap();
        assert!(b.terminal_gnhi().areas.iter().all(|&v| v.abs() < 1e-15));
        assert!(integrate_gnhi(
            &[InputSignal::constant(1.0, Domain::Canonical)],
            &GnhiState::origin(3).unwrap(),
            Interval::of(Domain::Canonical),
            100
        )
        .is_err());
    }

    #[test]
    fn area_index_is_lexicographic() {
        let got: Vec<usize> = area_pairs(4).map(|(i, j)| area_index(4, i, j)).collect();
        assert_eq!(got, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn so3_constant_rate_about_third_axis() {
        let w = |_t: f64| [0.0, 0.0, 1.3];
        let tr = integrate_so3(&w, Rotation::identity(), Interval::new(0.0, 2.0).unwrap(), 200).unwrap();
        let expected = Rotation::about_axis(2, 2.6);
        assert!((tr.rotation(200) - *expected.matrix()).frobenius() < 1e-13);
    }

    #[test]
    fn csv_layout() {
        let z = InputSignal::<f64>::zero(Domain::Canonical);
        let tr = integrate_nhi([&z, &z], NhiState::origin(), Interval::of(Domain::Canonical), 100).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x1,x2,x3,u1,u2"));
        assert_eq!(lines.next(), Some("-1,0,0,0,0,0"));
        let g = integrate_gnhi(
            &vec![z; 3],
            &GnhiState::origin(3).unwrap(),
            Interval::of(Domain::Canonical),
            100,
        )
        .unwrap();
        assert_eq!(g.csv_header(), "t,x1,x2,x3,u1,u2,u3,x12,x13,x23");
    }
}
