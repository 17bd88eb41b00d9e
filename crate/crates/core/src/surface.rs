//! Parametrized surfaces over the unit square `(u, v) ∈ [0,1]²`.
//!
//! All surfaces are oriented so that `(∂u, ∂v, n)` is positive, with `n` the
//! outward (or coorienting) normal. On spheres `v = 0` is the south pole and
//! `v = 1` the north pole.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, norm, AmbientVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Both `u` and `v` periodic.
    Torus,
    /// `u` periodic, `v` a boundary interval.
    Annulus,
    /// `u` periodic, `v = 0` and `v = 1` collapsed to poles.
    Sphere,
    /// The open square with no identifications; only synthetic fields use it.
    Plane,
    /// Closed orientable surface of the given genus, known only
    /// combinatorially (no parametrization).
    #[serde(rename = "genus")]
    HigherGenus(u32),
}

impl Topology {
    pub fn euler_characteristic(self) -> i64 {
        match self {
            Topology::Torus | Topology::Annulus => 0,
            Topology::Sphere => 2,
            Topology::Plane => 1,
            Topology::HigherGenus(g) => 2 - 2 * g as i64,
        }
    }

    pub fn v_periodic(self) -> bool {
        self == Topology::Torus
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    South,
    North,
}

impl Pole {
    pub fn v(self) -> f64 {
        match self {
            Pole::South => 0.0,
            Pole::North => 1.0,
        }
    }
}

type MapFn = Arc<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Sphere {
        center: [f64; 3],
        radius: f64,
    },
    /// `{x = c}` in T³: `(c, 2πu, 2πv)`.
    TorusX {
        c: f64,
    },
    /// `{z = c}` in T³: `(2πu, 2πv, c)`.
    TorusZ {
        c: f64,
    },
    /// Sweep of the circle of radius `rho` centred at `(cx, 0)` under
    /// `((x,y),z) ↦ (R₋₄πv(x,y), z + v)` in ℝ²×S¹.
    RotatingTorus {
        cx: f64,
        rho: f64,
        z0: f64,
    },
    /// The graph `z = t + amp·cos 2πv` over the `xy`-torus of T³.
    WavyTorus {
        t: f64,
        amp: f64,
    },
    Custom {
        map: MapFn,
    },
}

#[derive(Clone)]
pub struct ParamSurface {
    id: String,
    topology: Topology,
    shape: Shape,
    reflected: bool,
}

impl fmt::Debug for ParamSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamSurface")
            .field("id", &self.id)
            .field("topology", &self.topology)
            .field("reflected", &self.reflected)
            .finish()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SurfaceFrame {
    pub point: [f64; 3],
    pub du: AmbientVector,
    pub dv: AmbientVector,
}

impl SurfaceFrame {
    pub fn normal(&self) -> [f64; 3] {
        cross(self.du.0, self.dv.0)
    }
}

/// Graph chart over the tangent plane at a sphere pole:
/// `q(a, b) = C + a·e1 + b·e2 + √(R² − a² − b²)·n`, with `(e1, e2, n)` positive.
#[derive(Clone, Copy, Debug)]
pub struct PoleChart {
    pub pole: Pole,
    pub center: [f64; 3],
    pub radius: f64,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub n: [f64; 3],
}

impl PoleChart {
    pub fn frame(&self, a: f64, b: f64) -> SurfaceFrame {
        let h = (self.radius * self.radius - a * a - b * b).max(0.0).sqrt();
        let mut point = self.center;
        let mut du = [0.0; 3];
        let mut dv = [0.0; 3];
        for k in 0..3 {
            point[k] += a * self.e1[k] + b * self.e2[k] + h * self.n[k];
            du[k] = self.e1[k] - a / h * self.n[k];
            dv[k] = self.e2[k] - b / h * self.n[k];
        }
        SurfaceFrame {
            point,
            du: AmbientVector(du),
            dv: AmbientVector(dv),
        }
    }

    /// Chart coordinates of the surface point at parameter `(u, v)`.
    pub fn coords_of(&self, p: [f64; 3]) -> [f64; 2] {
        let d = [
            p[0] - self.center[0],
            p[1] - self.center[1],
            p[2] - self.center[2],
        ];
        [dot(d, self.e1), dot(d, self.e2)]
    }
}

pub const SURFACE_IDS: &str = "sphere:R, torus_x:c, torus_z:c, rotating_torus[:cx,rho], wavy_torus:t,amp";

const POLE_TOL: f64 = 1e-12;

impl ParamSurface {
    pub fn sphere(radius: f64) -> Self {
        Self::sphere_at([0.0; 3], radius)
    }

    pub fn sphere_at(center: [f64; 3], radius: f64) -> Self {
        Self {
            id: format!("sphere:{radius}"),
            topology: Topology::Sphere,
            shape: Shape::Sphere { center, radius },
            reflected: false,
        }
    }

    pub fn torus_x(c: f64) -> Self {
        Self {
            id: format!("torus_x:{c}"),
            topology: Topology::Torus,
            shape: Shape::TorusX { c },
            reflected: false,
        }
    }

    pub fn torus_z(c: f64) -> Self {
        Self {
            id: format!("torus_z:{c}"),
            topology: Topology::Torus,
            shape: Shape::TorusZ { c },
            reflected: false,
        }
    }

    pub fn rotating_torus(cx: f64, rho: f64) -> Self {
        Self {
            id: format!("rotating_torus:{cx},{rho}"),
            topology: Topology::Torus,
            shape: Shape::RotatingTorus { cx, rho, z0: 0.0 },
            reflected: false,
        }
    }

    pub fn wavy_torus(t: f64, amp: f64) -> Self {
        Self {
            id: format!("wavy_torus:{t},{amp}"),
            topology: Topology::Torus,
            shape: Shape::WavyTorus { t, amp },
            reflected: false,
        }
    }

    /// A user surface; tangent vectors come from centered differences.
    pub fn custom<F>(id: &str, topology: Topology, map: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            topology,
            shape: Shape::Custom { map: Arc::new(map) },
            reflected: false,
        }
    }

    /// Parses identifiers such as `sphere:2`, `torus_x:0.5` or
    /// `rotating_torus:1.1,1`.
    pub fn parse(id: &str) -> Result<Self> {
        let (name, args) = match id.split_once(':') {
            Some((n, a)) => (n, a),
            None => (id, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| unknown(id))?
        };
        if nums.iter().any(|x| !x.is_finite()) {
            return Err(unknown(id));
        }
        let s = match (name, nums.as_slice()) {
            ("sphere", [r]) if *r > 0.0 => Self::sphere(*r),
            ("torus_x", [c]) => Self::torus_x(*c),
            ("torus_z", [c]) => Self::torus_z(*c),
            ("rotating_torus", []) => Self::rotating_torus(1.0, 1.0),
            ("rotating_torus", [cx, rho]) if *rho > 0.0 => Self::rotating_torus(*cx, *rho),
            ("wavy_torus", [t, a]) => Self::wavy_torus(*t, *a),
            _ => return Err(unknown(id)),
        };
        Ok(Self {
            id: id.to_string(),
            ..s
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    /// The same surface with reversed orientation, via `u ↦ 1 − u`.
    pub fn reflected(&self) -> Self {
        Self {
            id: format!("{}~", self.id),
            reflected: !self.reflected,
            ..self.clone()
        }
    }

    pub fn sphere_data(&self) -> Option<([f64; 3], f64)> {
        match self.shape {
            Shape::Sphere { center, radius } => Some((center, radius)),
            _ => None,
        }
    }

    pub fn pole_point(&self, pole: Pole) -> Option<[f64; 3]> {
        let (c, r) = self.sphere_data()?;
        let s = if pole == Pole::North { r } else { -r };
        Some([c[0], c[1], c[2] + s])
    }

    pub fn pole_chart(&self, pole: Pole) -> Option<PoleChart> {
        let (center, radius) = self.sphere_data()?;
        let x = [1.0, 0.0, 0.0];
        let y = [0.0, 1.0, 0.0];
        let (mut e1, mut e2, n) = match pole {
            Pole::North => (x, y, [0.0, 0.0, 1.0]),
            Pole::South => (y, x, [0.0, 0.0, -1.0]),
        };
        if self.reflected {
            std::mem::swap(&mut e1, &mut e2);
        }
        Some(PoleChart {
            pole,
            center,
            radius,
            e1,
            e2,
            n,
        })
    }

    /// Ambient point; defined everywhere including poles.
    pub fn point(&self, u: f64, v: f64) -> [f64; 3] {
        let u = if self.reflected { 1.0 - u } else { u };
        self.raw_frame(u, v, false).point
    }

    pub fn frame(&self, u: f64, v: f64) -> Result<SurfaceFrame> {
        if self.topology == Topology::Sphere {
            for pole in [Pole::South, Pole::North] {
                if (v - pole.v()).abs() < POLE_TOL {
                    return Err(Error::Pole {
                        v,
                        pole: self.pole_point(pole).unwrap_or([0.0; 3]),
                    });
                }
            }
        }
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::Domain {
                chart: "parameter square",
                point: [u, v, 0.0],
                reason: "non-finite parameter".into(),
            });
        }
        if self.reflected {
            let mut f = self.raw_frame(1.0 - u, v, true);
            f.du = AmbientVector(f.du.0.map(|x| -x));
            Ok(f)
        } else {
            Ok(self.raw_frame(u, v, true))
        }
    }

    fn raw_frame(&self, u: f64, v: f64, with_tangents: bool) -> SurfaceFrame {
        match &self.shape {
            Shape::Sphere { center, radius } => {
                let theta = PI * (1.0 - v);
                let phi = TAU * u;
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                let r = *radius;
                SurfaceFrame {
                    point: [
                        center[0] + r * st * cp,
                        center[1] + r * st * sp,
                        center[2] + r * ct,
                    ],
                    du: AmbientVector([-TAU * r * st * sp, TAU * r * st * cp, 0.0]),
                    dv: AmbientVector([-PI * r * ct * cp, -PI * r * ct * sp, PI * r * st]),
                }
            }
            Shape::TorusX { c } => SurfaceFrame {
                point: [*c, TAU * u, TAU * v],
                du: AmbientVector([0.0, TAU, 0.0]),
                dv: AmbientVector([0.0, 0.0, TAU]),
            },
            Shape::TorusZ { c } => SurfaceFrame {
                point: [TAU * u, TAU * v, *c],
                du: AmbientVector([TAU, 0.0, 0.0]),
                dv: AmbientVector([0.0, TAU, 0.0]),
            },
            Shape::RotatingTorus { cx, rho, z0 } => {
                let (su, cu) = (TAU * u).sin_cos();
                let (x0, y0) = (cx + rho * cu, rho * su);
                let (dx0, dy0) = (-TAU * rho * su, TAU * rho * cu);
                // rotation by −4πv
                let (s, c) = (-2.0 * TAU * v).sin_cos();
                let rot = |x: f64, y: f64| [c * x - s * y, s * x + c * y];
                let p = rot(x0, y0);
                let du = rot(dx0, dy0);
                let w = -2.0 * TAU;
                SurfaceFrame {
                    point: [p[0], p[1], z0 + v],
                    du: AmbientVector([du[0], du[1], 0.0]),
                    dv: AmbientVector([-w * p[1], w * p[0], 1.0]),
                }
            }
            Shape::WavyTorus { t, amp } => {
                let (s, c) = (TAU * v).sin_cos();
                SurfaceFrame {
                    point: [TAU * u, TAU * v, t + amp * c],
                    du: AmbientVector([TAU, 0.0, 0.0]),
                    dv: AmbientVector([0.0, TAU, -TAU * amp * s]),
                }
            }
            Shape::Custom { map } => {
                let point = map(u, v);
                if !with_tangents {
                    return SurfaceFrame {
                        point,
                        du: AmbientVector::zero(),
                        dv: AmbientVector::zero(),
                    };
                }
                let h = 1e-6;
                let (a, b) = (map(u + h, v), map(u - h, v));
                let (c, d) = (map(u, v + h), map(u, v - h));
                let diff = |p: [f64; 3], q: [f64; 3]| {
                    AmbientVector([
                        (p[0] - q[0]) / (2.0 * h),
                        (p[1] - q[1]) / (2.0 * h),
                        (p[2] - q[2]) / (2.0 * h),
                    ])
                };
                SurfaceFrame {
                    point,
                    du: diff(a, b),
                    dv: diff(c, d),
                }
            }
        }
    }

    /// Whether `p` and `q` agree modulo the given chart periods.
    pub fn same_point(p: [f64; 3], q: [f64; 3], periods: [Option<f64>; 3], tol: f64) -> bool {
        (0..3).all(|k| {
            let mut d = p[k] - q[k];
            if let Some(per) = periods[k] {
                d -= per * (d / per).round();
            }
            d.abs() <= tol
        })
    }

    /// Smallest `|∂u × ∂v|` on a grid avoiding the poles.
    pub fn min_immersion(&self, n: usize) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let u = (i as f64 + 0.5) / n as f64;
                let v = (j as f64 + 0.5) / n as f64;
                if let Ok(f) = self.frame(u, v) {
                    m = m.min(norm(f.normal()));
                }
            }
        }
        m
    }
}

fn unknown(id: &str) -> Error {
    Error::UnknownId {
        kind: "surface",
        id: id.to_string(),
        known: SURFACE_IDS.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(s: &ParamSurface, u: f64, v: f64) -> f64 {
        let f = s.frame(u, v).unwrap();
        let h = 1e-6;
        let mut err: f64 = 0.0;
        for k in 0..3 {
            let du = (s.point(u + h, v)[k] - s.point(u - h, v)[k]) / (2.0 * h);
            let dv = (s.point(u, v + h)[k] - s.point(u, v - h)[k]) / (2.0 * h);
            err = err.max((du - f.du.0[k]).abs()).max((dv - f.dv.0[k]).abs());
        }
        err
    }

    #[test]
    fn torus_x_frame() {
        let f = ParamSurface::torus_x(0.3).frame(0.2, 0.7).unwrap();
        assert_eq!(f.du.0, [0.0, TAU, 0.0]);
        assert_eq!(f.dv.0, [0.0, 0.0, TAU]);
    }

    #[test]
    fn sphere_equator_and_poles() {
        let s = ParamSurface::sphere(2.5);
        for u in [0.0, 0.3, 0.9] {
            assert!((norm(s.frame(u, 0.5).unwrap().point) - 2.5).abs() < 1e-14);
        }
        match s.frame(0.4, 1.0) {
            Err(Error::Pole { pole, .. }) => assert_eq!(pole, [0.0, 0.0, 2.5]),
            other => panic!("expected pole error, got {other:?}"),
        }
        assert!(matches!(s.frame(0.4, 0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn sphere_normal_is_outward() {
        let s = ParamSurface::sphere(1.7);
        for (u, v) in [(0.1, 0.2), (0.6, 0.5), (0.9, 0.85)] {
            let f = s.frame(u, v).unwrap();
            assert!(dot(f.normal(), f.point) > 0.0);
            let r = s.reflected().frame(u, v).unwrap();
            assert!(dot(r.normal(), r.point) < 0.0);
        }
    }

    #[test]
    fn analytic_tangents_match_differences() {
        let surfaces = [
            ParamSurface::sphere(2.0),
            ParamSurface::rotating_torus(1.0, 1.0),
            ParamSurface::rotating_torus(1.3, 0.7),
            ParamSurface::wavy_torus(0.4, 0.3),
            ParamSurface::sphere(3.0).reflected(),
        ];
        for s in &surfaces {
            for (u, v) in [(0.13, 0.27), (0.5, 0.5), (0.77, 0.91)] {
                assert!(fd_check(s, u, v) < 1e-6, "{}", s.id());
            }
        }
    }

    #[test]
    fn rotating_torus_edges_identify() {
        let s = ParamSurface::rotating_torus(1.0, 1.0);
        let periods = [None, None, Some(1.0)];
        for t in [0.0, 0.3, 0.71] {
            assert!(ParamSurface::same_point(
                s.point(t, 0.0),
                s.point(t, 1.0),
                periods,
                1e-12
            ));
            assert!(ParamSurface::same_point(
                s.point(0.0, t),
                s.point(1.0, t),
                periods,
                1e-12
            ));
        }
        // the swept circle passes through the z-axis at u = 1/2
        let p = s.point(0.5, 0.37);
        assert!(p[0].hypot(p[1]) < 1e-12);
    }

    #[test]
    fn pole_chart_matches_sphere() {
        let s = ParamSurface::sphere(2.0);
        for pole in [Pole::North, Pole::South] {
            let ch = s.pole_chart(pole).unwrap();
            let f = ch.frame(0.0, 0.0);
            assert_eq!(f.point, s.pole_point(pole).unwrap());
            // chart orientation agrees with the outward normal
            assert!(dot(f.normal(), ch.n) > 0.0);
        }
    }

    #[test]
    fn parse_ids() {
        assert_eq!(
            ParamSurface::parse("sphere:2").unwrap().topology(),
            Topology::Sphere
        );
        assert!(ParamSurface::parse("rotating_torus").is_ok());
        assert!(ParamSurface::parse("sphere:-1").is_err());
        assert!(ParamSurface::parse("klein:1").is_err());
        assert!(ParamSurface::parse("sphere:abc").is_err());
    }
}
