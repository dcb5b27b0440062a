//! Bloch-vector representation of single-qubit density operators.
//!
//! A state is stored as `r` with `rho = (I + r . sigma) / 2`. Trace and
//! hermiticity are implicit; positivity is the constraint `|r| <= 1`.
//! The computational basis sits on the z axis with `|0>` at `rz = +1`.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Slack allowed on `|r| <= 1` for accumulated rounding.
pub const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
}

impl QubitState {
    pub fn new(rx: f64, ry: f64, rz: f64) -> Result<Self> {
        let s = Self { rx, ry, rz };
        if !(rx.is_finite() && ry.is_finite() && rz.is_finite()) {
            return Err(invalid("Bloch components must be finite"));
        }
        if s.norm() > 1.0 + NORM_SLACK {
            return Err(invalid(format!("Bloch norm {} exceeds 1", s.norm())));
        }
        Ok(s)
    }

    pub(crate) fn from_vector(v: Vector3<f64>) -> Self {
        Self { rx: v.x, ry: v.y, rz: v.z }
    }

    /// Pure state pointing along `axis` (normalized here).
    pub fn pure_along(axis: [f64; 3]) -> Result<Self> {
        let v = Vector3::from(axis);
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("axis must be a finite non-zero vector"));
        }
        Ok(Self::from_vector(v / n))
    }

    pub fn maximally_mixed() -> Self {
        Self { rx: 0.0, ry: 0.0, rz: 0.0 }
    }

    /// `|0><0|`, the pumping target.
    pub fn ket_zero() -> Self {
        Self { rx: 0.0, ry: 0.0, rz: 1.0 }
    }

    /// `|1><1|`.
    pub fn ket_one() -> Self {
        Self { rx: 0.0, ry: 0.0, rz: -1.0 }
    }

    pub fn bloch(&self) -> [f64; 3] {
        [self.rx, self.ry, self.rz]
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.rx, self.ry, self.rz)
    }

    pub fn norm(&self) -> f64 {
        self.vector().norm()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `Tr[rho P]` where `P` projects on the pure state with Bloch vector `other`.
    pub fn overlap(&self, other: &QubitState) -> f64 {
        0.5 * (1.0 + self.vector().dot(&other.vector()))
    }

    /// Populations of `|0>` and `|1>`.
    pub fn z_populations(&self) -> (f64, f64) {
        (0.5 * (1.0 + self.rz), 0.5 * (1.0 - self.rz))
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &QubitState, w: f64) -> QubitState {
        Self::from_vector(self.vector() * w + other.vector() * (1.0 - w))
    }

    pub fn distance(&self, other: &QubitState) -> f64 {
        (self.vector() - other.vector()).norm()
    }
}

/// An SO(3) rotation of the Bloch ball, the image of an SU(2) propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRotation(Rotation3<f64>);

impl BlochRotation {
    pub fn identity() -> Self {
        Self(Rotation3::identity())
    }

    /// Rotation generated by `H = (h . sigma) / 2` acting for unit time, i.e.
    /// the image of `exp(-i H)`: a right-handed turn by `|h|` about `h`.
    pub fn from_generator(h: [f64; 3]) -> Self {
        let v = Vector3::from(h);
        let angle = v.norm();
        if angle == 0.0 {
            return Self::identity();
        }
        Self(Rotation3::from_axis_angle(&Unit::new_normalize(v), angle))
    }

    pub fn about_z(angle: f64) -> Self {
        Self(Rotation3::from_axis_angle(&Vector3::z_axis(), angle))
    }

    pub fn about_x(angle: f64) -> Self {
        Self(Rotation3::from_axis_angle(&Vector3::x_axis(), angle))
    }

    /// `self` applied after `first`.
    pub fn then_after(&self, first: &BlochRotation) -> BlochRotation {
        Self(self.0 * first.0)
    }

    pub fn apply(&self, state: &QubitState) -> QubitState {
        QubitState::from_vector(self.0 * state.vector())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        *self.0.matrix()
    }
}
