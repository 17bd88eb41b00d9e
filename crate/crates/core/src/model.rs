//! Catalog of contact forms on explicit charts.
//!
//! Every catalog form is given in Cartesian chart components together with
//! its exterior derivative in closed form. Forms that are naturally written
//! in cylindrical coordinates (`dz + r²dθ`, the overtwisted form) are stored
//! Cartesianized (`r²dθ = x dy − y dx`) so the z-axis is a regular point; the
//! cylindrical presentation is available through
//! [`ContactModel::eval_form_cylindrical`] for display.
//!
//! User supplied forms are accepted through [`ContactModel::from_fn`]; their
//! derivative is obtained by centered differences and is only accurate to
//! roughly `1e-10` in absolute terms.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, AmbientCovector, AmbientVector, TwoForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    CartesianR3,
    CylindricalR3,
    TorusT3,
    CylinderR2S1,
}

impl ChartKind {
    fn name(self) -> &'static str {
        match self {
            ChartKind::CartesianR3 => "cartesian-R3",
            ChartKind::CylindricalR3 => "cylindrical-R3",
            ChartKind::TorusT3 => "torus-T3",
            ChartKind::CylinderR2S1 => "cylinder-R2xS1",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum CatalogForm {
    /// cos z dx − sin z dy with angular frequency `freq`.
    Rotating { freq: f64 },
    /// dt + p dq
    Jet,
    /// dz + scale·(x dy − y dx)
    Radial { scale: f64 },
    /// cos r dz + r sin r dθ
    Overtwisted,
    /// dz, not a contact form.
    Flat,
}

type FormFn = Arc<dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync>;

#[derive(Clone)]
enum Form {
    Catalog(CatalogForm),
    Numeric(FormFn),
}

/// A cooriented plane field `ξ = ker α` on one of the supported charts.
#[derive(Clone)]
pub struct ContactModel {
    id: String,
    formula: String,
    chart: ChartKind,
    periods: [Option<f64>; 3],
    form: Form,
}

impl fmt::Debug for ContactModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContactModel")
            .field("id", &self.id)
            .field("chart", &self.chart)
            .field("periods", &self.periods)
            .finish()
    }
}

/// α and dα at one chart point.
#[derive(Clone, Copy, Debug)]
pub struct FormValue {
    pub alpha: AmbientCovector,
    pub dalpha: TwoForm,
}

impl FormValue {
    /// Density of α∧dα against dx₁∧dx₂∧dx₃.
    pub fn volume(&self) -> f64 {
        dot(self.alpha.0, self.dalpha.axial())
    }
}

pub const CATALOG_IDS: [&str; 7] = [
    "std_xyz",
    "std_jet",
    "std_cyl",
    "std_cyl_half",
    "ot",
    "t3",
    "r2s1",
];

const DEGENERACY_TOL: f64 = 1e-12;

impl ContactModel {
    pub fn catalog(id: &str) -> Result<Self> {
        let none = [None; 3];
        let (chart, periods, form, formula) = match id {
            "std_xyz" => (
                ChartKind::CartesianR3,
                none,
                CatalogForm::Rotating { freq: 1.0 },
                "cos z dx - sin z dy",
            ),
            "std_jet" => (ChartKind::CartesianR3, none, CatalogForm::Jet, "dt + p dq"),
            "std_cyl" => (
                ChartKind::CylindricalR3,
                none,
                CatalogForm::Radial { scale: 1.0 },
                "dz + r^2 dtheta",
            ),
            "std_cyl_half" => (
                ChartKind::CylindricalR3,
                none,
                CatalogForm::Radial { scale: 0.5 },
                "dz + 1/2 r^2 dtheta",
            ),
            "ot" => (
                ChartKind::CylindricalR3,
                none,
                CatalogForm::Overtwisted,
                "cos r dz + r sin r dtheta",
            ),
            "t3" => (
                ChartKind::TorusT3,
                [Some(TAU); 3],
                CatalogForm::Rotating { freq: 1.0 },
                "cos z dx - sin z dy on R^3/(2 pi Z)^3",
            ),
            "r2s1" => (
                ChartKind::CylinderR2S1,
                [None, None, Some(1.0)],
                CatalogForm::Rotating { freq: TAU },
                "cos 2 pi z dx - sin 2 pi z dy",
            ),
            _ => {
                return Err(Error::UnknownId {
                    kind: "model",
                    id: id.to_string(),
                    known: CATALOG_IDS.join(", "),
                })
            }
        };
        Ok(Self {
            id: id.to_string(),
            formula: formula.to_string(),
            chart,
            periods,
            form: Form::Catalog(form),
        })
    }

    /// The non-contact control form `dz`.
    pub fn flat() -> Self {
        Self {
            id: "flat".into(),
            formula: "dz".into(),
            chart: ChartKind::CartesianR3,
            periods: [None; 3],
            form: Form::Catalog(CatalogForm::Flat),
        }
    }

    /// A user form given by its Cartesian components. dα is computed by
    /// centered differences.
    pub fn from_fn<F>(id: &str, chart: ChartKind, periods: [Option<f64>; 3], alpha: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    {
        Self {
            id: id.to_string(),
            formula: "user form (numerical derivative)".into(),
            chart,
            periods,
            form: Form::Numeric(Arc::new(alpha)),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn formula(&self) -> &str {
        &self.formula
    }

    pub fn chart(&self) -> ChartKind {
        self.chart
    }

    pub fn periods(&self) -> [Option<f64>; 3] {
        self.periods
    }

    /// Chart box used by sampling checks: one period for periodic
    /// coordinates, `[-4, 4]` otherwise.
    pub fn sample_box(&self) -> [[f64; 2]; 3] {
        let mut b = [[-4.0, 4.0]; 3];
        for (k, p) in self.periods.iter().enumerate() {
            if let Some(p) = p {
                b[k] = [0.0, *p];
            }
        }
        b
    }

    fn check_point(&self, p: [f64; 3]) -> Result<()> {
        if p.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain {
                chart: self.chart.name(),
                point: p,
                reason: "non-finite coordinate".into(),
            })
        }
    }

    /// Components of α only; the hot path for pullbacks.
    pub fn alpha(&self, p: [f64; 3]) -> [f64; 3] {
        match &self.form {
            Form::Catalog(c) => catalog_alpha(*c, p),
            Form::Numeric(f) => f(p),
        }
    }

    pub fn eval_form(&self, p: [f64; 3]) -> Result<FormValue> {
        self.check_point(p)?;
        let (alpha, dalpha) = match &self.form {
            Form::Catalog(c) => (catalog_alpha(*c, p), catalog_dalpha(*c, p)),
            Form::Numeric(f) => (f(p), numeric_dalpha(f.as_ref(), p, 1e-5)),
        };
        Ok(FormValue {
            alpha: AmbientCovector(alpha),
            dalpha,
        })
    }

    /// α in `(dr, dθ, dz)` components at a cylindrical point.
    pub fn eval_form_cylindrical(&self, r: f64, theta: f64, z: f64) -> Result<[f64; 3]> {
        if r < 0.0 || !r.is_finite() {
            return Err(Error::Domain {
                chart: ChartKind::CylindricalR3.name(),
                point: [r, theta, z],
                reason: "radius must be non-negative".into(),
            });
        }
        let (s, c) = theta.sin_cos();
        let a = self.eval_form([r * c, r * s, z])?.alpha.0;
        Ok([a[0] * c + a[1] * s, r * (-a[0] * s + a[1] * c), a[2]])
    }

    pub fn contact_volume(&self, p: [f64; 3]) -> Result<f64> {
        Ok(self.eval_form(p)?.volume())
    }

    /// Smallest α∧dα density over an `n³` grid of cell centres in
    /// [`Self::sample_box`].
    pub fn min_contact_volume(&self, n: usize) -> Result<f64> {
        let b = self.sample_box();
        let at = |k: usize, i: usize| b[k][0] + (i as f64 + 0.5) / n as f64 * (b[k][1] - b[k][0]);
        let mut min = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    min = min.min(self.contact_volume([at(0, i), at(1, j), at(2, k)])?);
                }
            }
        }
        Ok(min)
    }

    /// The Reeb field: ι_R dα = 0 and α(R) = 1.
    pub fn reeb_field(&self, p: [f64; 3]) -> Result<AmbientVector> {
        let fv = self.eval_form(p)?;
        solve_contact_system(&fv, p, Vector3::zeros(), 1.0)
    }

    /// The contact vector field with Hamiltonian `f`, i.e. the unique contact
    /// field with α(X) = f. The differential of `f` is taken by centered
    /// differences.
    pub fn contact_hamiltonian_field(
        &self,
        f: &dyn Fn([f64; 3]) -> f64,
        p: [f64; 3],
    ) -> Result<AmbientVector> {
        let fv = self.eval_form(p)?;
        let value = f(p);
        let df = gradient(f, p);
        // Reeb direction is needed for df(R); it shares the same matrix.
        let reeb = solve_contact_system(&fv, p, Vector3::zeros(), 1.0)?;
        let df_r = dot(df, reeb.0);
        let alpha = fv.alpha.to_na();
        // ι_X dα = df(R) α − df
        let rhs = alpha * df_r - Vector3::from(df);
        solve_contact_system(&fv, p, rhs, value)
    }
}

/// Solves `ι_X dα = b`, `α(X) = f` through the normal equations
/// `(W Wᵀ + α αᵀ) X = W b + α f`.
fn solve_contact_system(fv: &FormValue, p: [f64; 3], b: Vector3<f64>, f: f64) -> Result<AmbientVector> {
    let density = fv.volume();
    let w = fv.dalpha.0;
    let a = fv.alpha.to_na();
    let scale = 1.0 + a.norm() * w.norm();
    if density.abs() <= DEGENERACY_TOL * scale {
        return Err(Error::Degenerate { point: p, density });
    }
    let m: Matrix3<f64> = w * w.transpose() + a * a.transpose();
    let rhs = w * b + a * f;
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::Degenerate { point: p, density })?;
    Ok(AmbientVector([x[0], x[1], x[2]]))
}

fn gradient(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3]) -> [f64; 3] {
    let mut g = [0.0; 3];
    for k in 0..3 {
        let h = 1e-6 * (1.0 + p[k].abs());
        let mut a = p;
        let mut b = p;
        a[k] += h;
        b[k] -= h;
        g[k] = (f(a) - f(b)) / (2.0 * h);
    }
    g
}

fn numeric_dalpha(f: &dyn Fn([f64; 3]) -> [f64; 3], p: [f64; 3], h: f64) -> TwoForm {
    // d[i][j] = ∂ᵢ aⱼ
    let mut d = [[0.0; 3]; 3];
    for (i, row) in d.iter_mut().enumerate() {
        let mut a = p;
        let mut b = p;
        a[i] += h;
        b[i] -= h;
        let (fa, fb) = (f(a), f(b));
        for j in 0..3 {
            row[j] = (fa[j] - fb[j]) / (2.0 * h);
        }
    }
    TwoForm::from_components(d[0][1] - d[1][0], d[0][2] - d[2][0], d[1][2] - d[2][1])
}

/// `sin r / r` and `(r cos r − sin r) / r³`, both smooth at 0.
fn sinc_pair(r: f64) -> (f64, f64) {
    if r < 1e-2 {
        let r2 = r * r;
        let s = 1.0 - r2 / 6.0 + r2 * r2 / 120.0 - r2 * r2 * r2 / 5040.0;
        let g = -1.0 / 3.0 + r2 / 30.0 - r2 * r2 / 840.0 + r2 * r2 * r2 / 45360.0;
        (s, g)
    } else {
        let (sr, cr) = r.sin_cos();
        (sr / r, (r * cr - sr) / (r * r * r))
    }
}

fn catalog_alpha(form: CatalogForm, p: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = p;
    match form {
        CatalogForm::Rotating { freq } => {
            let (s, c) = (freq * z).sin_cos();
            [c, -s, 0.0]
        }
        CatalogForm::Jet => [1.0, 0.0, y],
        CatalogForm::Radial { scale } => [-scale * y, scale * x, 1.0],
        CatalogForm::Overtwisted => {
            let r = x.hypot(y);
            let (s, _) = sinc_pair(r);
            [-y * s, x * s, r.cos()]
        }
        CatalogForm::Flat => [0.0, 0.0, 1.0],
    }
}

fn catalog_dalpha(form: CatalogForm, p: [f64; 3]) -> TwoForm {
    let [x, y, z] = p;
    match form {
        CatalogForm::Rotating { freq } => {
            let (s, c) = (freq * z).sin_cos();
            TwoForm::from_components(0.0, freq * s, freq * c)
        }
        CatalogForm::Jet => TwoForm::from_components(0.0, 0.0, 1.0),
        CatalogForm::Radial { scale } => TwoForm::from_components(2.0 * scale, 0.0, 0.0),
        CatalogForm::Overtwisted => {
            let r = x.hypot(y);
            let (s, g) = sinc_pair(r);
            TwoForm::from_components(2.0 * s + r * r * g, -s * x, -s * y)
        }
        CatalogForm::Flat => TwoForm::from_components(0.0, 0.0, 0.0),
    }
}

/// Analytic α∧dα density of the overtwisted form: `1 + sin r cos r / r`.
pub fn overtwisted_volume(r: f64) -> f64 {
    if r == 0.0 {
        2.0
    } else {
        1.0 + (r.sin() * r.cos()) / r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn std_cyl_at_origin() {
        let m = ContactModel::catalog("std_cyl").unwrap();
        let fv = m.eval_form([0.0; 3]).unwrap();
        assert_eq!(fv.alpha.0, [0.0, 0.0, 1.0]);
        // dα = 2 dx∧dy
        assert_eq!(fv.dalpha.0[(0, 1)], 2.0);
        assert_eq!(fv.dalpha.0[(0, 2)], 0.0);
        assert_eq!(fv.dalpha.0[(1, 2)], 0.0);
    }

    #[test]
    fn t3_at_z_zero() {
        let m = ContactModel::catalog("t3").unwrap();
        assert_eq!(m.eval_form([0.4, 1.0, 0.0]).unwrap().alpha.0, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn overtwisted_cylindrical_components_at_pi() {
        let m = ContactModel::catalog("ot").unwrap();
        for (theta, z) in [(0.0, 0.0), (1.3, -2.0), (4.0, 7.5)] {
            let a = m.eval_form_cylindrical(PI, theta, z).unwrap();
            assert!(close(a[0], 0.0, 1e-15));
            assert!(close(a[1], 0.0, 1e-14));
            assert!(close(a[2], -1.0, 1e-15));
        }
    }

    #[test]
    fn negative_radius_is_domain_error() {
        let m = ContactModel::catalog("ot").unwrap();
        assert!(matches!(
            m.eval_form_cylindrical(-1.0, 0.0, 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            m.eval_form([f64::NAN, 0.0, 0.0]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn volumes() {
        assert_eq!(ContactModel::flat().contact_volume([1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ContactModel::flat().min_contact_volume(4).unwrap(), 0.0);
        let t3 = ContactModel::catalog("t3").unwrap();
        let cyl = ContactModel::catalog("std_cyl").unwrap();
        for p in [[0.0, 0.0, 0.0], [1.0, -2.0, 0.3], [3.0, 0.5, 5.9]] {
            assert!(close(t3.contact_volume(p).unwrap(), 1.0, 1e-15));
            assert!(close(cyl.contact_volume(p).unwrap(), 2.0, 1e-15));
        }
        let ot = ContactModel::catalog("ot").unwrap();
        for r in [0.0, 1e-3, 0.5, 2.0, PI, 3.7] {
            let v = ot.contact_volume([r * 0.6, r * 0.8, 0.1]).unwrap();
            assert!(close(v, overtwisted_volume(r), 1e-12), "r={r}: {v}");
        }
    }

    #[test]
    fn reeb_examples() {
        let cyl = ContactModel::catalog("std_cyl").unwrap();
        let r = cyl.reeb_field([0.7, -1.1, 2.0]).unwrap();
        assert!(close(r.0[0], 0.0, 1e-14) && close(r.0[1], 0.0, 1e-14) && close(r.0[2], 1.0, 1e-14));
        let t3 = ContactModel::catalog("t3").unwrap();
        let z: f64 = 0.9;
        let r = t3.reeb_field([0.1, 0.2, z]).unwrap();
        assert!(close(r.0[0], z.cos(), 1e-14) && close(r.0[1], -z.sin(), 1e-14) && close(r.0[2], 0.0, 1e-14));
    }

    #[test]
    fn reeb_on_flat_is_degenerate() {
        assert!(matches!(
            ContactModel::flat().reeb_field([0.0; 3]),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let m = ContactModel::catalog("ot").unwrap();
        let p = [0.4, 1.3, -0.2];
        let one = m.contact_hamiltonian_field(&|_| 1.0, p).unwrap();
        assert_eq!(one, m.reeb_field(p).unwrap());
        let zero = m.contact_hamiltonian_field(&|_| 0.0, p).unwrap();
        assert!(zero.norm() < 1e-14);
    }

    #[test]
    fn radial_contact_field_of_std_cyl() {
        let m = ContactModel::catalog("std_cyl").unwrap();
        let f = |p: [f64; 3]| 2.0 * p[2];
        for p in [[1.0, 0.5, -0.3], [-2.0, 0.1, 1.7], [0.3, -0.9, 0.0]] {
            let x = m.contact_hamiltonian_field(&f, p).unwrap();
            let expected = [p[0], p[1], 2.0 * p[2]];
            for k in 0..3 {
                assert!(close(x.0[k], expected[k], 1e-8), "{:?} vs {:?}", x, expected);
            }
        }
    }

    #[test]
    fn numeric_form_matches_catalog() {
        let cat = ContactModel::catalog("std_xyz").unwrap();
        let num = ContactModel::from_fn("num", ChartKind::CartesianR3, [None; 3], |p| {
            [p[2].cos(), -p[2].sin(), 0.0]
        });
        let p = [0.1, 0.2, 0.8];
        let a = cat.eval_form(p).unwrap().dalpha.0;
        let b = num.eval_form(p).unwrap().dalpha.0;
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn unknown_id() {
        let err = ContactModel::catalog("nope").unwrap_err();
        assert!(err.to_string().contains("std_cyl"));
    }
}
