//! 3×3 matrices, the hat/vee isomorphism and the exponential and logarithm
//! of SO(3).

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zero() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn scale(&self, k: T) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * k)
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius(&self) -> T {
        self.0.iter().flatten().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn apply(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.0;
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    }

    /// Inverse via the adjugate; `None` for a singular matrix.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = Self([
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ]);
        Some(adj.scale(T::one() / d))
    }

    /// `‖Mᵀ M - I‖_F`.
    pub fn orthogonality_defect(&self) -> T {
        (self.transpose() * *self - Self::identity()).frobenius()
    }

    /// Row-major entries.
    pub fn entries(&self) -> [T; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

/// Skew matrix with `hat(u) w = u × w`.
pub fn hat<T: Real>(v: [T; 3]) -> Mat3<T> {
    let z = T::zero();
    Mat3([[z, -v[2], v[1]], [v[2], z, -v[0]], [-v[1], v[0], z]])
}

/// Inverse of [`hat`]; rejects matrices that are not skew to `1e-12`.
pub fn vee<T: Real>(m: &Mat3<T>) -> Result<[T; 3]> {
    let sym = (*m + m.transpose()).frobenius();
    if sym > T::tol(1e-12) {
        return Err(Error::argument(format!(
            "matrix is not skew-symmetric (‖M + Mᵀ‖ = {sym})"
        )));
    }
    Ok(skew_part(m))
}

/// `vee((M - Mᵀ) / 2)` without the skewness check.
pub fn skew_part<T: Real>(m: &Mat3<T>) -> [T; 3] {
    let h = T::lit(0.5);
    [
        (m.0[2][1] - m.0[1][2]) * h,
        (m.0[0][2] - m.0[2][0]) * h,
        (m.0[1][0] - m.0[0][1]) * h,
    ]
}

/// Basis `E_i = hat(e_i)` of so(3).
pub fn basis<T: Real>(i: usize) -> Mat3<T> {
    let mut v = [T::zero(); 3];
    v[i] = T::one();
    hat(v)
}

pub fn norm3<T: Real>(v: [T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Rodrigues' formula for `exp(hat(v))`.
pub fn exp_so3<T: Real>(v: [T; 3]) -> Mat3<T> {
    let theta = norm3(v);
    let k = hat(v);
    let k2 = k * k;
    // series below the cancellation threshold
    let (a, b) = if theta < T::lit(1e-4) {
        let t2 = theta * theta;
        (T::one() - t2 / T::lit(6.0), T::lit(0.5) - t2 / T::lit(24.0))
    } else {
        (theta.sin() / theta, (T::one() - theta.cos()) / (theta * theta))
    };
    Mat3::identity() + k.scale(a) + k2.scale(b)
}

/// How `log` resolves a rotation by exactly `π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiPolicy {
    Reject,
    /// Make the first nonzero axis component positive.
    TieBreak,
}

/// Principal logarithm as a rotation vector with angle in `[0, π]`.
pub fn log_so3<T: Real>(r: &Mat3<T>, policy: PiPolicy) -> Result<[T; 3]> {
    let cos = ((r.trace() - T::one()) / T::lit(2.0)).max(-T::one()).min(T::one());
    let theta = cos.acos();
    let w = skew_part(r);
    let s = norm3(w);
    if theta < T::lit(1e-4) {
        // sin θ / θ ≈ 1 - θ²/6
        let f = T::one() + theta * theta / T::lit(6.0);
        return Ok(w.map(|c| c * f));
    }
    if theta < T::PI() - T::lit(1e-3) {
        let f = theta / theta.sin();
        return Ok(w.map(|c| c * f));
    }
    // near π: axis from the symmetric part, (R + Rᵀ)/2 = cos θ I + (1 - cos θ) a aᵀ
    let one_minus = T::one() - cos;
    let sym = |i: usize, j: usize| (r.0[i][j] + r.0[j][i]) / T::lit(2.0);
    let diag = [0, 1, 2].map(|i| ((sym(i, i) - cos) / one_minus).max(T::zero()));
    let k = (0..3).fold(0, |best, i| if diag[i] > diag[best] { i } else { best });
    let ak = diag[k].sqrt();
    let mut axis = [T::zero(); 3];
    for (i, a) in axis.iter_mut().enumerate() {
        *a = if i == k { ak } else { sym(k, i) / (one_minus * ak) };
    }
    let n = norm3(axis);
    axis = axis.map(|c| c / n);
    // skew part is sin θ · a; fix the sign with it unless it has vanished
    let dot = axis[0] * w[0] + axis[1] * w[1] + axis[2] * w[2];
    if s > T::tol(1e-12) {
        if dot < T::zero() {
            axis = axis.map(|c| -c);
        }
    } else {
        match policy {
            PiPolicy::Reject => {
                return Err(Error::Ambiguous(format!(
                    "rotation angle is pi, axis ±{:?}",
                    axis.map(|c| c.to_f64_lossy())
                )))
            }
            PiPolicy::TieBreak => {
                let lead = axis
                    .iter()
                    .copied()
                    .find(|c| c.abs() > T::tol(1e-12))
                    .unwrap_or(T::one());
                if lead < T::zero() {
                    axis = axis.map(|c| -c);
                }
            }
        }
    }
    Ok(axis.map(|c| c * theta))
}

/// Orthogonal polar factor by Newton iteration `X ← (X + X⁻ᵀ) / 2`.
pub fn polar_project<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let mut x = *m;
    for _ in 0..50 {
        let Some(inv) = x.inverse() else { break };
        let next = (x + inv.transpose()).scale(T::lit(0.5));
        let change = (next - x).frobenius();
        x = next;
        if change <= T::epsilon() * T::lit(8.0) {
            break;
        }
    }
    x
}

/// Element of SO(3): orthogonal with determinant `+1` to `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "Mat3<T>",
    into = "Mat3<T>",
    bound = "T: Real + Serialize + serde::de::DeserializeOwned"
)]
pub struct Rotation<T: Real>(Mat3<T>);

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn try_new(m: Mat3<T>) -> Result<Self> {
        let defect = m.orthogonality_defect();
        let det = m.det();
        let tol = T::tol(1e-9);
        if !(defect <= tol) || !((det - T::one()).abs() <= tol) {
            return Err(Error::domain(format!(
                "not a rotation: ‖gᵀg - I‖ = {defect}, det = {det}"
            )));
        }
        Ok(Self(m))
    }

    /// `exp(hat(v))`.
    pub fn exp(v: [T; 3]) -> Self {
        Self(exp_so3(v))
    }

    /// Rotation by `angle` about the `axis`-th coordinate axis (0-based).
    pub fn about_axis(axis: usize, angle: T) -> Self {
        let mut v = [T::zero(); 3];
        v[axis] = angle;
        Self::exp(v)
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn log(&self, policy: PiPolicy) -> Result<[T; 3]> {
        log_so3(&self.0, policy)
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &Self) -> T {
        (self.0 - other.0).frobenius()
    }
}

impl<T: Real> Mul for Rotation<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl<T: Real> TryFrom<Mat3<T>> for Rotation<T> {
    type Error = Error;
    fn try_from(m: Mat3<T>) -> Result<Self> {
        Self::try_new(m)
    }
}

impl<T: Real> From<Rotation<T>> for Mat3<T> {
    fn from(r: Rotation<T>) -> Self {
        r.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn hat_basis_and_cross_product() {
        assert_eq!(hat([1.0f64, 0.0, 0.0]), basis(0));
        let u = [0.3f64, -1.2, 2.0];
        let w = [1.5, 0.4, -0.7];
        let c = hat(u).apply(w);
        let cross = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        for i in 0..3 {
            assert!((c[i] - cross[i]).abs() < 1e-12);
        }
        assert_eq!(vee(&hat(u)).unwrap(), u);
        assert!(vee(&Mat3::<f64>::identity()).is_err());
    }

    #[test]
    fn exp_log_round_trip() {
        for v in [
            [0.1f64, -0.2, 0.3],
            [1e-7, 0.0, 2e-7],
            [2.0, 1.0, -0.5],
            [0.0, 0.0, 3.1],
        ] {
            let r = exp_so3(v);
            assert!(r.orthogonality_defect() < 1e-14);
            let back = log_so3(&r, PiPolicy::Reject).unwrap();
            for i in 0..3 {
                assert!((back[i] - v[i]).abs() < 1e-10, "{v:?} -> {back:?}");
            }
        }
    }

    #[test]
    fn rotation_by_pi_is_ambiguous() {
        let r = exp_so3([0.0, -PI, 0.0]);
        assert!(matches!(log_so3(&r, PiPolicy::Reject), Err(Error::Ambiguous(_))));
        let v = log_so3(&r, PiPolicy::TieBreak).unwrap();
        assert!((v[1] - PI).abs() < 1e-9 && v[0].abs() < 1e-9);
    }

    #[test]
    fn polar_projection_restores_orthogonality() {
        let r = exp_so3([0.4, 0.1, -1.0]);
        let noisy = r + Mat3::from_fn(|i, j| 1e-6 * (i as f64 - j as f64 + 0.5));
        let p = polar_project(&noisy);
        assert!(p.orthogonality_defect() < 1e-14);
        assert!((p - r).frobenius() < 1e-5);
    }

    #[test]
    fn rotation_rejects_non_orthogonal() {
        assert!(Rotation::try_new(Mat3::<f64>::identity().scale(2.0)).is_err());
        let flip = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]);
        assert!(Rotation::try_new(flip).is_err());
    }
}
