//! Steering plans for the nonholonomic integrator and its m-input
//! generalization: constant inputs for the positions, then mean-free
//! opposite-parity pairs scaled to produce the required areas.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    area_index, area_pairs, coupling_displacement, integrate_area, GnhiState, Interval, NhiState, SystemKind,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::orthopoly::{inner_product, BasisElement, Domain, Family, Parity};
use crate::scalar::Real;
use crate::signal::InputSignal;

/// Family used for the area-generating phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SteeringFamily<T> {
    Legendre,
    ChebyshevFirst,
    ChebyshevSecond,
    Jacobi {
        alpha: T,
        beta: T,
    },
    /// `sin(nπt)` as the odd element, `cos(nπt)` as the even one.
    Trig,
}

impl<T: Real> SteeringFamily<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Legendre => "legendre",
            Self::ChebyshevFirst => "chebyshev_first",
            Self::ChebyshevSecond => "chebyshev_second",
            Self::Jacobi { .. } => "jacobi",
            Self::Trig => "trig",
        }
    }

    pub fn default_pair(&self) -> PairIndices {
        match self {
            Self::Trig => PairIndices { odd: 1, even: 1 },
            _ => PairIndices { odd: 1, even: 2 },
        }
    }

    fn element(&self, index: usize, parity: Parity, domain: Domain) -> Result<BasisElement<T>> {
        let family = match (*self, parity) {
            (Self::Legendre, _) => Family::Legendre,
            (Self::ChebyshevFirst, _) => Family::ChebyshevFirst,
            (Self::ChebyshevSecond, _) => Family::ChebyshevSecond,
            (Self::Jacobi { alpha, beta }, _) => Family::Jacobi { alpha, beta },
            (Self::Trig, Parity::Odd) => Family::TrigSin,
            (Self::Trig, Parity::Even) => Family::TrigCos,
        };
        let mut b = BasisElement::new(family, index)?;
        b.domain = domain;
        Ok(b)
    }

    /// `(odd, even)` unit-amplitude inputs, each multiplied by the family
    /// weight so that it integrates to zero.
    pub fn pair_signals(&self, pair: PairIndices, domain: Domain) -> Result<(InputSignal<T>, InputSignal<T>)> {
        if !self.is_trig_like() && (pair.odd % 2 != 1 || !pair.even.is_multiple_of(2)) {
            return Err(Error::argument(format!(
                "pair ({}, {}) must be one odd-order and one even-order element",
                pair.odd, pair.even
            )));
        }
        if pair.odd == 0 || pair.even == 0 {
            return Err(Error::argument(
                "the constant element cannot be part of a steering pair",
            ));
        }
        let odd = self.element(pair.odd, Parity::Odd, domain)?;
        let even = self.element(pair.even, Parity::Even, domain)?;
        Ok((
            InputSignal::basis(odd, T::one(), true),
            InputSignal::basis(even, T::one(), true),
        ))
    }

    fn is_trig_like(&self) -> bool {
        matches!(self, Self::Trig)
    }
}

/// Indices of the odd-order and even-order pair elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairIndices {
    pub odd: usize,
    pub even: usize,
}

/// What a phase is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// Zero inputs; emitted only when start and target coincide.
    Hold,
    /// Constant inputs steering the positions.
    Position,
    /// Mean-free pair steering areas.
    Area,
}

/// One segment of a plan, simulated on `interval` (the family's own
/// domain) and placed at `start_time` on the global clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase<T> {
    pub kind: PhaseKind,
    pub interval: Interval<T>,
    pub start_time: T,
    pub inputs: Vec<InputSignal<T>>,
    pub moves: Vec<String>,
    pub fixes: Vec<String>,
    pub predicted_endpoint: Vec<T>,
    pub cost: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPlan<T> {
    pub system: SystemKind,
    pub start: Vec<T>,
    pub target: Vec<T>,
    pub phases: Vec<Phase<T>>,
    pub predicted_endpoint: Vec<T>,
    /// Sum of the phase costs.
    pub cost: T,
}

/// Relative tolerance between the last predicted endpoint and the target,
/// floored at `256 ε` of the scalar type.
pub const PLANNER_TOL: f64 = 1e-9;

impl<T: Real> SteeringPlan<T> {
    pub fn channels(&self) -> usize {
        match self.system {
            SystemKind::Gnhi { m } => m,
            _ => 2,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        coordinate_labels(self.system)
    }

    pub fn duration(&self) -> T {
        self.phases
            .iter()
            .map(|p| p.interval.length())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Simulates every phase from the end state of the previous one.
    pub fn simulate_phases(&self, steps: usize) -> Result<Vec<Trajectory<T>>> {
        let mut state = self.start.clone();
        let mut out = Vec::with_capacity(self.phases.len());
        for phase in &self.phases {
            let refs: Vec<&InputSignal<T>> = phase.inputs.iter().collect();
            let tr = integrate_area(&refs, state, phase.interval, steps, self.system)?;
            state = tr.terminal().to_vec();
            out.push(tr);
        }
        Ok(out)
    }

    /// Whole maneuver on the global clock; junction samples appear once.
    pub fn simulate(&self, steps: usize) -> Result<Trajectory<T>> {
        let parts = self.simulate_phases(steps)?;
        let mut iter = parts.into_iter().zip(&self.phases);
        let (first, p0) = iter.next().expect("plans have at least one phase");
        let shift = |t: T, p: &Phase<T>| p.start_time + (t - p.interval.start);
        let mut all = Trajectory {
            times: first.times.iter().map(|&t| shift(t, p0)).collect(),
            ..first
        };
        for (tr, p) in iter {
            all.times.extend(tr.times.iter().skip(1).map(|&t| shift(t, p)));
            all.states.extend(tr.states.into_iter().skip(1));
            all.inputs.extend(tr.inputs.into_iter().skip(1));
            all.steps += tr.steps;
        }
        Ok(all)
    }

    /// Largest coordinate error of the simulated endpoint.
    pub fn endpoint_error(&self, steps: usize) -> Result<T> {
        let parts = self.simulate_phases(steps)?;
        let end = parts.last().expect("non-empty").terminal();
        Ok(end
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }
}

pub fn coordinate_labels(system: SystemKind) -> Vec<String> {
    match system {
        SystemKind::Nhi => vec!["x1".into(), "x2".into(), "x3".into()],
        SystemKind::Gnhi { m } => (1..=m)
            .map(|i| format!("x{i}"))
            .chain(area_pairs(m).map(|(i, j)| format!("x{}{}", i + 1, j + 1)))
            .collect(),
        SystemKind::So3 => Vec::new(),
    }
}

/// `(s1, s2)` with `s1 s2 D = target`, `D` the coupling of the unit pair.
///
/// Equal magnitudes; when `target / D < 0` the second factor carries the
/// sign, which is what swapping the channels achieves.
pub fn scale_pair<T: Real>(
    u1: &InputSignal<T>,
    u2: &InputSignal<T>,
    target: T,
    interval: Interval<T>,
) -> Result<(T, T)> {
    let d = coupling_displacement(u1, u2, interval)?;
    scale_for(d, target)
}

fn scale_for<T: Real>(d: T, target: T) -> Result<(T, T)> {
    if !(d.abs() > T::tol(1e-13)) {
        return Err(Error::Planner(format!("pair does not couple (displacement {d})")));
    }
    if target == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    let r = target / d;
    let s = r.abs().sqrt();
    Ok(if r > T::zero() { (s, s) } else { (s, -s) })
}

/// `½ ∫ u² / w dt`, with `w` the family weight the signal is multiplied by.
fn natural_energy<T: Real>(u: &InputSignal<T>) -> Result<T> {
    let Some(first) = u.terms().iter().find(|t| t.scale != T::zero()) else {
        return Ok(T::zero());
    };
    let w = first.factor();
    if u.terms()
        .iter()
        .filter(|t| t.scale != T::zero())
        .any(|t| t.factor() != w)
    {
        return Err(Error::Capability(
            "phase energy needs a common weight across terms".into(),
        ));
    }
    let bare = InputSignal::try_from_terms(
        u.domain(),
        u.terms()
            .iter()
            .map(|t| crate::signal::Term { weighted: false, ..*t })
            .collect(),
    )?;
    Ok(inner_product(&bare, &bare, &w, u.domain())? / T::lit(2.0))
}

fn phase_cost<T: Real>(inputs: &[InputSignal<T>]) -> Result<T> {
    inputs.iter().try_fold(T::zero(), |acc, u| Ok(acc + natural_energy(u)?))
}

struct Layout {
    system: SystemKind,
    m: usize,
}

impl Layout {
    fn label(&self, k: usize) -> String {
        coordinate_labels(self.system)[k].clone()
    }
}

fn plan_areas<T: Real>(
    layout: Layout,
    start: Vec<T>,
    target: Vec<T>,
    family: SteeringFamily<T>,
    pair: PairIndices,
    domain: Domain,
) -> Result<SteeringPlan<T>> {
    let m = layout.m;
    if start.iter().chain(&target).any(|v| !v.is_finite()) {
        return Err(Error::argument("boundary states must be finite"));
    }
    let interval = Interval::of(domain);
    let len = interval.length();
    let dim = start.len();
    let all: Vec<usize> = (0..dim).collect();
    let mut phases: Vec<Phase<T>> = Vec::new();
    let mut state = start.clone();
    let mut clock = interval.start;

    let mut push = |phases: &mut Vec<Phase<T>>,
                    kind: PhaseKind,
                    inputs: Vec<InputSignal<T>>,
                    moves: Vec<usize>,
                    end: &[T]|
     -> Result<()> {
        let fixes = all
            .iter()
            .filter(|k| !moves.contains(k))
            .map(|&k| layout.label(k))
            .collect();
        let cost = phase_cost(&inputs)?;
        phases.push(Phase {
            kind,
            interval,
            start_time: clock,
            inputs,
            moves: moves.iter().map(|&k| layout.label(k)).collect(),
            fixes,
            predicted_endpoint: end.to_vec(),
            cost,
        });
        clock = clock + len;
        Ok(())
    };

    // positions by constant inputs; areas pick up x_i0 Δx_j - x_j0 Δx_i
    let delta: Vec<T> = (0..m).map(|i| target[i] - state[i]).collect();
    if delta.iter().any(|&d| d != T::zero()) {
        let inputs = delta.iter().map(|&d| InputSignal::constant(d / len, domain)).collect();
        let mut next = state.clone();
        let mut moves: Vec<usize> = (0..m).filter(|&i| delta[i] != T::zero()).collect();
        next[..m].copy_from_slice(&target[..m]);
        for (i, j) in area_pairs(m) {
            let gain = state[i] * delta[j] - state[j] * delta[i];
            if gain != T::zero() {
                next[m + area_index(m, i, j)] = state[m + area_index(m, i, j)] + gain;
                moves.push(m + area_index(m, i, j));
            }
        }
        push(&mut phases, PhaseKind::Position, inputs, moves, &next)?;
        state = next;
    }

    let (odd, even) = family.pair_signals(pair, domain)?;
    let d = coupling_displacement(&odd, &even, interval)?;
    if !(d.abs() > T::tol(1e-13)) {
        return Err(Error::Planner(format!(
            "{} pair ({}, {}) does not couple",
            family.name(),
            pair.odd,
            pair.even
        )));
    }
    let zero = InputSignal::zero(domain);
    for i in 0..m.saturating_sub(1) {
        let needs: Vec<(usize, T)> = (i + 1..m)
            .map(|k| (k, target[m + area_index(m, i, k)] - state[m + area_index(m, i, k)]))
            .collect();
        if needs.iter().all(|&(_, v)| v == T::zero()) {
            continue;
        }
        let mut inputs = vec![zero.clone(); m];
        let mut next = state.clone();
        let mut moves = Vec::new();
        if needs.len() == 1 {
            // equal split; a wrong-signed target swaps which channel gets the odd element
            let (k, need) = needs[0];
            let (s, _) = scale_for(d, need.abs())?;
            if need / d > T::zero() {
                inputs[i] = odd.scaled(s);
                inputs[k] = even.scaled(s);
            } else {
                inputs[i] = even.scaled(s);
                inputs[k] = odd.scaled(s);
            }
            next[m + area_index(m, i, k)] = state[m + area_index(m, i, k)] + s * s * d * (need / d).signum();
            moves.push(m + area_index(m, i, k));
        } else {
            let peak = needs.iter().map(|&(_, v)| v.abs()).fold(T::zero(), T::max);
            let lead = (peak / d.abs()).sqrt();
            inputs[i] = odd.scaled(lead);
            for &(k, need) in &needs {
                let amp = need / (lead * d);
                inputs[k] = even.scaled(amp);
                next[m + area_index(m, i, k)] = state[m + area_index(m, i, k)] + lead * amp * d;
                if need != T::zero() {
                    moves.push(m + area_index(m, i, k));
                }
            }
        }
        push(&mut phases, PhaseKind::Area, inputs, moves, &next)?;
        state = next;
    }

    if phases.is_empty() {
        let inputs = vec![zero; m];
        push(&mut phases, PhaseKind::Hold, inputs, Vec::new(), &state)?;
    }
    let gap = state
        .iter()
        .zip(&target)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), T::max);
    let scale = target.iter().map(|v| v.abs()).fold(T::one(), T::max);
    if gap > T::tol(PLANNER_TOL) * scale {
        return Err(Error::Planner(format!("predicted endpoint misses the target by {gap}")));
    }
    let cost = phases.iter().map(|p| p.cost).fold(T::zero(), |a, b| a + b);
    Ok(SteeringPlan {
        system: layout.system,
        start,
        target,
        phases,
        predicted_endpoint: state,
        cost,
    })
}

/// Constant-input phase for `(x1, x2)`, then a weighted opposite-parity
/// pair for the remaining change in `x3`.
pub fn plan_nhi<T: Real>(
    x0: NhiState<T>,
    xf: NhiState<T>,
    family: SteeringFamily<T>,
    pair: PairIndices,
    domain: Domain,
) -> Result<SteeringPlan<T>> {
    plan_areas(
        Layout {
            system: SystemKind::Nhi,
            m: 2,
        },
        x0.to_array().to_vec(),
        xf.to_array().to_vec(),
        family,
        pair,
        domain,
    )
}

/// Constant inputs for `x`, then for each `i` one phase with `u_j = 0`
/// (`j < i`), an odd element on channel `i` and one shared even element on
/// the channels `k > i`, scaled to steer every `x_ik`.
pub fn plan_gnhi<T: Real>(
    s0: &GnhiState<T>,
    sf: &GnhiState<T>,
    family: SteeringFamily<T>,
    domain: Domain,
) -> Result<SteeringPlan<T>> {
    plan_gnhi_with(s0, sf, family, family.default_pair(), domain)
}

pub fn plan_gnhi_with<T: Real>(
    s0: &GnhiState<T>,
    sf: &GnhiState<T>,
    family: SteeringFamily<T>,
    pair: PairIndices,
    domain: Domain,
) -> Result<SteeringPlan<T>> {
    let m = s0.m();
    if sf.m() != m {
        return Err(Error::argument(format!("start has m = {m}, target m = {}", sf.m())));
    }
    plan_areas(
        Layout {
            system: SystemKind::Gnhi { m },
            m,
        },
        s0.flat(),
        sf.flat(),
        family,
        pair,
        domain,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> NhiState<f64> {
        NhiState::origin()
    }

    #[test]
    fn shifted_legendre_scale_is_sqrt_15() {
        let fam = SteeringFamily::<f64>::Legendre;
        let plan = plan_nhi(
            origin(),
            NhiState::new(0.0, 0.0, 1.0),
            fam,
            fam.default_pair(),
            Domain::Shifted,
        )
        .unwrap();
        assert_eq!(plan.phases.len(), 1);
        let s = plan.phases[0].inputs[0].terms()[0].scale;
        assert!((s - 15f64.sqrt()).abs() < 1e-10);
        assert!(plan.endpoint_error(4000).unwrap() < 1e-6);
    }

    #[test]
    fn canonical_legendre_scale_matches_simulation_amplitude() {
        let fam = SteeringFamily::<f64>::Legendre;
        let plan = plan_nhi(
            origin(),
            NhiState::new(0.0, 0.0, 1.0),
            fam,
            fam.default_pair(),
            Domain::Canonical,
        )
        .unwrap();
        let s = plan.phases[0].inputs[1].terms()[0].scale;
        assert!((s - (15.0f64 / 4.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn positions_only_need_one_constant_phase() {
        let fam = SteeringFamily::<f64>::Legendre;
        let plan = plan_nhi(
            origin(),
            NhiState::new(1.0, 2.0, 0.0),
            fam,
            fam.default_pair(),
            Domain::Shifted,
        )
        .unwrap();
        assert_eq!(plan.phases.len(), 1);
        let u = &plan.phases[0].inputs;
        assert_eq!((u[0].eval(0.3).unwrap(), u[1].eval(0.3).unwrap()), (1.0, 2.0));
        assert_eq!(plan.phases[0].fixes, vec!["x3".to_string()]);
    }

    #[test]
    fn trig_scale_pair_product() {
        let (a, b) = SteeringFamily::<f64>::Trig
            .pair_signals(PairIndices { odd: 1, even: 1 }, Domain::Canonical)
            .unwrap();
        let (s1, s2) = scale_pair(&a, &b, 1.0, Interval::of(Domain::Canonical)).unwrap();
        assert!((s1 * s2 + std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert_eq!(
            scale_pair(&a, &b, 0.0, Interval::of(Domain::Canonical)).unwrap(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn same_parity_pair_is_rejected() {
        let fam = SteeringFamily::<f64>::Legendre;
        let r = plan_nhi(
            origin(),
            NhiState::new(0.0, 0.0, 1.0),
            fam,
            PairIndices { odd: 2, even: 4 },
            Domain::Canonical,
        );
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn negative_area_swaps_channels() {
        let fam = SteeringFamily::<f64>::ChebyshevFirst;
        let plan = plan_nhi(
            origin(),
            NhiState::new(0.0, 0.0, -0.7),
            fam,
            fam.default_pair(),
            Domain::Canonical,
        )
        .unwrap();
        let u1 = &plan.phases[0].inputs[0];
        assert_eq!(u1.terms()[0].basis.index, 2);
        assert!(plan.endpoint_error(4000).unwrap() < 1e-6);
    }

    #[test]
    fn hold_phase_for_identical_states() {
        let fam = SteeringFamily::<f64>::Legendre;
        let x = NhiState::new(0.3, 0.1, -2.0);
        let plan = plan_nhi(x, x, fam, fam.default_pair(), Domain::Canonical).unwrap();
        assert_eq!(plan.phases.len(), 1);
        assert!(plan.phases[0].moves.is_empty());
        assert_eq!(plan.endpoint_error(100).unwrap(), 0.0);
    }

    #[test]
    fn three_channel_areas() {
        let s0 = GnhiState::origin(3).unwrap();
        let sf = GnhiState::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let plan = plan_gnhi(&s0, &sf, SteeringFamily::Legendre, Domain::Canonical).unwrap();
        assert_eq!(plan.phases.len(), 2);
        assert!(plan.endpoint_error(4000).unwrap() < 1e-6);
    }
}
