use std::f64::consts::TAU;
use std::sync::OnceLock;

use contact_core::singularity::classify_jacobian;
use contact_core::*;
use nalgebra::Matrix2;
use proptest::prelude::*;

struct Portrait {
    field: FoliationField,
    sings: Vec<(Option<Pole>, [f64; 2], i8, bool)>,
}

fn portraits() -> &'static [Portrait] {
    static ALL: OnceLock<Vec<Portrait>> = OnceLock::new();
    ALL.get_or_init(|| {
        let cfg = AnalysisConfig::default();
        [
            ("std_cyl", ParamSurface::sphere(2.0)),
            ("ot", ParamSurface::sphere(5.0)),
            ("r2s1", ParamSurface::rotating_torus(1.0, 1.0)),
        ]
        .into_iter()
        .map(|(id, s)| {
            let m = ContactModel::catalog(id).unwrap();
            let a = analyze_foliation(&m, &s, &cfg).unwrap();
            let sings = a
                .singularities
                .iter()
                .map(|x| (x.pole, x.location, x.sign, x.is_saddle()))
                .collect();
            Portrait {
                field: FoliationField::pullback(&m, &s),
                sings,
            }
        })
        .collect()
    })
}

fn local_jacobian(f: &FoliationField, pole: Option<Pole>, p: [f64; 2]) -> Matrix2<f64> {
    match pole {
        Some(pole) => f.pole_jacobian(pole, 1e-6).unwrap(),
        None => f.jacobian(p[0], p[1], 1e-6).unwrap(),
    }
}

#[test]
fn portraits_have_saddles_and_both_signs() {
    let all: Vec<_> = portraits().iter().flat_map(|p| p.sings.iter()).collect();
    assert!(all.iter().any(|s| s.3));
    assert!(all.iter().any(|s| s.2 > 0) && all.iter().any(|s| s.2 < 0));
}

// dα of the closed-form models against centered differences of α
fn fd_dalpha(m: &ContactModel, p: [f64; 3]) -> [f64; 3] {
    let h = 1e-5;
    let mut d = [[0.0; 3]; 3];
    for (i, row) in d.iter_mut().enumerate() {
        let (mut a, mut b) = (p, p);
        a[i] += h;
        b[i] -= h;
        let (fa, fb) = (m.alpha(a), m.alpha(b));
        for j in 0..3 {
            row[j] = (fa[j] - fb[j]) / (2.0 * h);
        }
    }
    [d[0][1] - d[1][0], d[0][2] - d[2][0], d[1][2] - d[2][1]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn divergence_sign_survives_positive_rescaling(
        c in prop::array::uniform5(-1.0f64..1.0),
    ) {
        let f = move |u: f64, v: f64| {
            (c[0] + c[1] * (TAU * u + c[2]).sin() + c[3] * (TAU * v + c[4]).cos()).exp()
        };
        let cfg = AnalysisConfig::default();
        for p in portraits() {
            let g = p.field.rescaled(f);
            for &(pole, loc, sign, saddle) in &p.sings {
                let j = local_jacobian(&g, pole, loc);
                let (kind, s, _, _) = classify_jacobian(&j, loc, &cfg).unwrap();
                prop_assert_eq!(s, sign, "{} at {:?}", p.field.id(), loc);
                prop_assert_eq!(kind == singularity::SingularityKind::Saddle, saddle);
            }
        }
    }

    #[test]
    fn reflection_flips_dbeta(r in 0.5f64..6.0, u in 0.0f64..1.0, v in 0.05f64..0.95) {
        let m = ContactModel::catalog("ot").unwrap();
        let s = ParamSurface::sphere(r);
        let a = FoliationField::pullback(&m, &s).dbeta(u, v).unwrap();
        let b = FoliationField::pullback(&m, &s.reflected()).dbeta(1.0 - u, v).unwrap();
        prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn analytic_dalpha_matches_differences(k in 0usize..7, x in prop::array::uniform3(0.0f64..1.0)) {
        let m = ContactModel::catalog(model::CATALOG_IDS[k]).unwrap();
        let bx = m.sample_box();
        let p: [f64; 3] = std::array::from_fn(|i| bx[i][0] + x[i] * (bx[i][1] - bx[i][0]));
        let w = m.eval_form(p).unwrap().dalpha.0;
        let fd = fd_dalpha(&m, p);
        for (got, want) in [w[(0, 1)], w[(0, 2)], w[(1, 2)]].into_iter().zip(fd) {
            prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{} at {:?}: {got} vs {want}", m.id(), p);
        }
    }

    #[test]
    fn dbeta_matches_divergence(k in 0usize..3, u in 0.0f64..1.0, v in 0.05f64..0.95) {
        let f = &portraits()[k].field;
        let exact = f.dbeta(u, v).unwrap();
        let tr = f.jacobian(u, v, 1e-5).unwrap().trace();
        prop_assert!((exact - tr).abs() <= 1e-6 * exact.abs().max(1.0), "{}: {exact} vs {tr}", f.id());
    }
}
