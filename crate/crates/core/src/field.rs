//! The characteristic foliation of a surface as a planar vector field.
//!
//! For a surface `S` with parametrization `(u, v)` the pulled back form is
//! `β = βᵤ du + βᵥ dv` and the characteristic field is its `du∧dv`-dual
//! `Y = (βᵥ, −βᵤ)`, so that `ι_Y (du∧dv) = β` and `β(Y) = 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::{dot, AmbientVector};
use crate::model::ContactModel;
use crate::surface::{ParamSurface, Pole, SurfaceFrame, Topology};

pub type PlaneFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;
pub type ScaleFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Pullback {
        model: ContactModel,
        surface: ParamSurface,
    },
    Synthetic {
        y: PlaneFn,
    },
}

#[derive(Clone)]
pub struct FoliationField {
    id: String,
    topology: Topology,
    source: Source,
    scale: Option<ScaleFn>,
}

impl fmt::Debug for FoliationField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FoliationField")
            .field("id", &self.id)
            .field("topology", &self.topology)
            .finish()
    }
}

pub const SYNTHETIC_IDS: [&str; 3] = ["generic_torus", "linear_saddle", "linear_node"];

/// Amplitude of the synthetic generic torus field `(1, k sin 2πv)`.
pub const GENERIC_TORUS_K: f64 = 0.25;

impl FoliationField {
    pub fn pullback(model: &ContactModel, surface: &ParamSurface) -> Self {
        Self {
            id: format!("{}/{}", model.id(), surface.id()),
            topology: surface.topology(),
            source: Source::Pullback {
                model: model.clone(),
                surface: surface.clone(),
            },
            scale: None,
        }
    }

    pub fn from_fn<F>(id: &str, topology: Topology, y: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        if topology == Topology::Sphere {
            panic!("synthetic fields on spheres need pole data; use a pullback");
        }
        Self {
            id: id.to_string(),
            topology,
            source: Source::Synthetic { y: Arc::new(y) },
            scale: None,
        }
    }

    /// Hand-built fields: `generic_torus` is a generic foliation of the torus
    /// with one repelling closed leaf (`v = 0`) and one attracting (`v = ½`);
    /// `linear_saddle` and `linear_node` are linear fields centred in the
    /// square.
    pub fn synthetic(id: &str) -> Result<Self> {
        use std::f64::consts::TAU;
        match id {
            "generic_torus" => Ok(Self::from_fn(id, Topology::Torus, |_u, v| {
                [1.0, GENERIC_TORUS_K * (TAU * v).sin()]
            })),
            "linear_saddle" => Ok(Self::from_fn(id, Topology::Plane, |u, v| [u - 0.5, -(v - 0.5)])),
            "linear_node" => Ok(Self::from_fn(id, Topology::Plane, |u, v| [u - 0.5, v - 0.5])),
            _ => Err(Error::UnknownId {
                kind: "synthetic field",
                id: id.to_string(),
                known: SYNTHETIC_IDS.join(", "),
            }),
        }
    }

    /// Multiplies `Y` by a strictly positive function; the foliation (and the
    /// sign of every singularity) is unchanged.
    pub fn rescaled<F>(&self, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let prev = self.scale.clone();
        let f: ScaleFn = match prev {
            Some(g) => Arc::new(move |u, v| g(u, v) * f(u, v)),
            None => Arc::new(f),
        };
        Self {
            scale: Some(f),
            ..self.clone()
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn model(&self) -> Option<&ContactModel> {
        match &self.source {
            Source::Pullback { model, .. } => Some(model),
            Source::Synthetic { .. } => None,
        }
    }

    pub fn surface(&self) -> Option<&ParamSurface> {
        match &self.source {
            Source::Pullback { surface, .. } => Some(surface),
            Source::Synthetic { .. } => None,
        }
    }

    fn scale_at(&self, u: f64, v: f64) -> f64 {
        self.scale.as_ref().map_or(1.0, |f| f(u, v))
    }

    pub fn beta(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        let b = match &self.source {
            Source::Pullback { model, surface } => {
                let fr = surface.frame(u, v)?;
                pull(model, &fr)
            }
            Source::Synthetic { y } => {
                let y = y(u, v);
                [-y[1], y[0]]
            }
        };
        let s = self.scale_at(u, v);
        Ok([s * b[0], s * b[1]])
    }

    pub fn y(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        let b = self.beta(u, v)?;
        Ok([b[1], -b[0]])
    }

    /// `Y` with pole queries mapped to the zero vector; used on hot paths
    /// where the caller handles poles separately.
    pub fn y_or_zero(&self, u: f64, v: f64) -> [f64; 2] {
        let v = if self.topology == Topology::Sphere {
            v.clamp(0.0, 1.0)
        } else {
            v
        };
        self.y(u, v).unwrap_or([0.0, 0.0])
    }

    /// `dβ(∂u, ∂v)`, which equals the divergence of `Y` against `du∧dv`.
    /// Exact for pullbacks (`dβ = ι*dα`), centered differences otherwise.
    pub fn dbeta(&self, u: f64, v: f64) -> Result<f64> {
        match (&self.source, &self.scale) {
            (Source::Pullback { model, surface }, None) => {
                let fr = surface.frame(u, v)?;
                let w = model.eval_form(fr.point)?.dalpha;
                Ok(w.eval(&fr.du, &fr.dv))
            }
            _ => {
                let j = self.jacobian(u, v, 1e-6)?;
                Ok(j.trace())
            }
        }
    }

    /// Centered-difference Jacobian `∂Y/∂(u, v)`.
    pub fn jacobian(&self, u: f64, v: f64, h: f64) -> Result<Matrix2<f64>> {
        let a = self.y(u + h, v)?;
        let b = self.y(u - h, v)?;
        let c = self.y(u, v + h)?;
        let d = self.y(u, v - h)?;
        Ok(Matrix2::new(
            (a[0] - b[0]) / (2.0 * h),
            (c[0] - d[0]) / (2.0 * h),
            (a[1] - b[1]) / (2.0 * h),
            (c[1] - d[1]) / (2.0 * h),
        ))
    }

    /// `Y` in the graph chart around a sphere pole.
    pub fn pole_y(&self, pole: Pole, a: f64, b: f64) -> Result<[f64; 2]> {
        let (model, surface) = match &self.source {
            Source::Pullback { model, surface } => (model, surface),
            Source::Synthetic { .. } => {
                return Err(Error::UnsupportedTopology("synthetic field has no poles".into()))
            }
        };
        let chart = surface
            .pole_chart(pole)
            .ok_or_else(|| Error::UnsupportedTopology("surface has no poles".into()))?;
        let fr = chart.frame(a, b);
        let beta = pull(model, &fr);
        let s = match &self.scale {
            Some(f) => {
                let (u, v) = sphere_params(surface, fr.point);
                f(u, v)
            }
            None => 1.0,
        };
        Ok([s * beta[1], -s * beta[0]])
    }

    pub fn pole_jacobian(&self, pole: Pole, h: f64) -> Result<Matrix2<f64>> {
        let a = self.pole_y(pole, h, 0.0)?;
        let b = self.pole_y(pole, -h, 0.0)?;
        let c = self.pole_y(pole, 0.0, h)?;
        let d = self.pole_y(pole, 0.0, -h)?;
        Ok(Matrix2::new(
            (a[0] - b[0]) / (2.0 * h),
            (c[0] - d[0]) / (2.0 * h),
            (a[1] - b[1]) / (2.0 * h),
            (c[1] - d[1]) / (2.0 * h),
        ))
    }

    pub fn wraps_u(&self) -> bool {
        self.topology != Topology::Plane
    }

    pub fn wraps_v(&self) -> bool {
        self.topology == Topology::Torus
    }

    /// Canonical representative of a parameter point.
    pub fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        let mut q = p;
        if self.wraps_u() {
            q[0] = q[0].rem_euclid(1.0);
        }
        if self.wraps_v() {
            q[1] = q[1].rem_euclid(1.0);
        }
        q
    }

    /// Minimal-image difference `b − a`.
    pub fn delta(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        let mut d = [b[0] - a[0], b[1] - a[1]];
        if self.wraps_u() {
            d[0] -= d[0].round();
        }
        if self.wraps_v() {
            d[1] -= d[1].round();
        }
        d
    }

    pub fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d = self.delta(a, b);
        d[0].hypot(d[1])
    }

    /// Whether `p` lies in the parameter domain where leaves may continue.
    pub fn inside(&self, p: [f64; 2]) -> bool {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        match self.topology {
            Topology::Torus => true,
            Topology::Annulus | Topology::Sphere => in_unit(p[1]),
            Topology::Plane => in_unit(p[0]) && in_unit(p[1]),
            Topology::HigherGenus(_) => false,
        }
    }
}

fn pull(model: &ContactModel, fr: &SurfaceFrame) -> [f64; 2] {
    let a = model.alpha(fr.point);
    [dot(a, fr.du.0), dot(a, fr.dv.0)]
}

fn sphere_params(surface: &ParamSurface, p: [f64; 3]) -> (f64, f64) {
    let (c, r) = surface.sphere_data().unwrap_or(([0.0; 3], 1.0));
    let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
    let theta = (d[2] / r).clamp(-1.0, 1.0).acos();
    let mut u = d[1].atan2(d[0]) / std::f64::consts::TAU;
    u = u.rem_euclid(1.0);
    if surface.is_reflected() {
        u = 1.0 - u;
    }
    (u, 1.0 - theta / std::f64::consts::PI)
}

/// α(∂u), α(∂v) for an explicit frame; exposed for movie bookkeeping.
pub fn pullback_beta(model: &ContactModel, surface: &ParamSurface, u: f64, v: f64) -> Result<[f64; 2]> {
    FoliationField::pullback(model, surface).beta(u, v)
}

pub fn characteristic_field(
    model: &ContactModel,
    surface: &ParamSurface,
    u: f64,
    v: f64,
) -> Result<[f64; 2]> {
    FoliationField::pullback(model, surface).y(u, v)
}

/// `α(∂t)` along a family, used for the product-neighbourhood conditions.
pub fn alpha_on(model: &ContactModel, p: [f64; 3], w: &AmbientVector) -> f64 {
    dot(model.alpha(p), w.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn torus_x_pullback() {
        let m = ContactModel::catalog("t3").unwrap();
        let s = ParamSurface::torus_x(0.7);
        for v in [0.1, 0.25, 0.6, 0.93] {
            let b = pullback_beta(&m, &s, 0.3, v).unwrap();
            assert!(close(b[0], -TAU * (TAU * v).sin()) && close(b[1], 0.0));
            let y = characteristic_field(&m, &s, 0.3, v).unwrap();
            assert!(close(y[0], 0.0) && close(y[1], TAU * (TAU * v).sin()));
        }
        for v in [0.0, 0.5] {
            let b = pullback_beta(&m, &s, 0.8, v).unwrap();
            assert!(b[0].abs() < 1e-12 && b[1].abs() < 1e-12);
        }
    }

    #[test]
    fn torus_z_pullback_is_constant_and_closed() {
        let m = ContactModel::catalog("t3").unwrap();
        let c: f64 = 0.4;
        let s = ParamSurface::torus_z(c);
        let f = FoliationField::pullback(&m, &s);
        for (u, v) in [(0.1, 0.2), (0.5, 0.9), (0.77, 0.01)] {
            let b = f.beta(u, v).unwrap();
            assert!(close(b[0], TAU * c.cos()) && close(b[1], -TAU * c.sin()));
            let y = f.y(u, v).unwrap();
            assert!(close(y[0], -TAU * c.sin()) && close(y[1], -TAU * c.cos()));
            assert!(f.dbeta(u, v).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn std_cyl_sphere_vanishes_only_at_poles() {
        let m = ContactModel::catalog("std_cyl").unwrap();
        let f = FoliationField::pullback(&m, &ParamSurface::sphere(2.0));
        for pole in [Pole::North, Pole::South] {
            let y = f.pole_y(pole, 0.0, 0.0).unwrap();
            assert!(y[0].abs() < 1e-14 && y[1].abs() < 1e-14);
        }
        let mut min = f64::INFINITY;
        for i in 0..50 {
            for j in 1..50 {
                let y = f.y(i as f64 / 50.0, j as f64 / 50.0).unwrap();
                min = min.min(y[0].hypot(y[1]));
            }
        }
        assert!(min > 0.1);
    }

    #[test]
    fn duality() {
        let m = ContactModel::catalog("ot").unwrap();
        let f = FoliationField::pullback(&m, &ParamSurface::sphere(PI));
        let b = f.beta(0.3, 0.4).unwrap();
        let y = f.y(0.3, 0.4).unwrap();
        assert_eq!(b[0] * y[0] + b[1] * y[1], 0.0);
    }

    #[test]
    fn divergence_matches_jacobian_trace() {
        let m = ContactModel::catalog("std_cyl").unwrap();
        let f = FoliationField::pullback(&m, &ParamSurface::sphere(1.5));
        let d = f.dbeta(0.2, 0.3).unwrap();
        let t = f.jacobian(0.2, 0.3, 1e-5).unwrap().trace();
        assert!((d - t).abs() < 1e-6 * d.abs().max(1.0));
    }

    #[test]
    fn wrapping() {
        let f = FoliationField::synthetic("generic_torus").unwrap();
        assert_eq!(f.wrap([1.25, -0.25]), [0.25, 0.75]);
        let d = f.delta([0.95, 0.5], [0.05, 0.5]);
        assert!((d[0] - 0.1).abs() < 1e-12);
    }
}
