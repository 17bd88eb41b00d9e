//! Ambient vectors, covectors and two-forms in chart components.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmbientVector(pub [f64; 3]);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AmbientCovector(pub [f64; 3]);

impl AmbientVector {
    pub fn zero() -> Self {
        Self([0.0; 3])
    }

    pub fn norm(&self) -> f64 {
        dot(self.0, self.0).sqrt()
    }

    pub(crate) fn to_na(self) -> Vector3<f64> {
        Vector3::from(self.0)
    }
}

impl AmbientCovector {
    /// The pairing ⟨self, v⟩.
    pub fn pair(&self, v: &AmbientVector) -> f64 {
        dot(self.0, v.0)
    }

    pub(crate) fn to_na(self) -> Vector3<f64> {
        Vector3::from(self.0)
    }
}

/// A two-form stored as the antisymmetric matrix `W[i][j] = ∂ᵢaⱼ − ∂ⱼaᵢ`,
/// so that `ω(X, Y) = Xᵀ W Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm(pub Matrix3<f64>);

impl TwoForm {
    pub fn from_components(w12: f64, w13: f64, w23: f64) -> Self {
        Self(Matrix3::new(
            0.0, w12, w13, //
            -w12, 0.0, w23, //
            -w13, -w23, 0.0,
        ))
    }

    pub fn eval(&self, a: &AmbientVector, b: &AmbientVector) -> f64 {
        (a.to_na().transpose() * self.0 * b.to_na())[(0, 0)]
    }

    /// Interior product ι_v ω as a covector.
    pub fn contract(&self, v: &AmbientVector) -> AmbientCovector {
        let c = self.0.transpose() * v.to_na();
        AmbientCovector([c[0], c[1], c[2]])
    }

    /// The vector spanning the kernel: `(W₂₃, −W₁₃, W₁₂)`.
    pub fn axial(&self) -> [f64; 3] {
        [self.0[(1, 2)], -self.0[(0, 2)], self.0[(0, 1)]]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    dot(cross(a, b), c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contract_matches_eval() {
        let w = TwoForm::from_components(0.3, -1.2, 2.0);
        let x = AmbientVector([1.0, -2.0, 0.5]);
        let y = AmbientVector([0.2, 0.7, -1.1]);
        let via_contract = w.contract(&x).pair(&y);
        assert!((via_contract - w.eval(&x, &y)).abs() < 1e-14);
        assert!((w.eval(&x, &y) + w.eval(&y, &x)).abs() < 1e-14);
    }

    #[test]
    fn axial_is_kernel() {
        let w = TwoForm::from_components(0.3, -1.2, 2.0);
        let k = AmbientVector(w.axial());
        let c = w.contract(&k);
        assert!(c.0.iter().all(|x| x.abs() < 1e-14));
    }
}
