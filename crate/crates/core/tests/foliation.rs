use std::f64::consts::PI;

use contact_core::closed_leaf::ClosedLeafStatus;
use contact_core::leaf::LeafLimit;
use contact_core::separatrix::SeparatrixKind;
use contact_core::singularity::SingularityKind;
use contact_core::{
    analyze_field, analyze_foliation, AnalysisConfig, ContactModel, FoliationAnalysis, FoliationField,
    ParamSurface, Pole,
};

fn model(id: &str) -> ContactModel {
    ContactModel::catalog(id).unwrap()
}

fn analyze(m: &str, s: &ParamSurface) -> FoliationAnalysis {
    analyze_foliation(&model(m), s, &AnalysisConfig::default()).unwrap()
}

#[test]
fn std_cyl_sphere_portrait() {
    let a = analyze("std_cyl", &ParamSurface::sphere(2.0));
    assert_eq!(a.singularities.len(), 2);
    assert_eq!(a.saddles().count(), 0);
    assert!(a.closed_leaves.is_empty());
    assert!(a.connections.is_empty());
    assert!(a.pb_satisfied);
    assert!(a.generic);
    let north = a
        .singularities
        .iter()
        .find(|s| s.pole == Some(Pole::North))
        .unwrap();
    let south = a
        .singularities
        .iter()
        .find(|s| s.pole == Some(Pole::South))
        .unwrap();
    assert!(north.kind.is_nodal() && north.sign == 1);
    assert!(south.kind.is_nodal() && south.sign == -1);
    // source and sink
    assert!(north.eigen.values.iter().all(|l| l[0] > 0.0));
    assert!(south.eigen.values.iter().all(|l| l[0] < 0.0));
}

#[test]
fn ot_sphere_radius_two_has_only_the_poles() {
    let a = analyze("ot", &ParamSurface::sphere(2.0));
    assert_eq!(a.singularities.len(), 2);
    assert!(a.singularities.iter().all(|s| s.pole.is_some()));
    assert!(a.closed_leaves.is_empty());
}

#[test]
fn ot_sphere_radius_five() {
    let s = ParamSurface::sphere(5.0);
    let a = analyze("ot", &s);
    assert_eq!(a.singularities.len(), 2);
    assert_eq!(a.closed_leaves.len(), 2);
    assert!(a.pb_satisfied);
    let mut statuses: Vec<_> = a.closed_leaves.iter().map(|l| l.status).collect();
    statuses.sort_by_key(|s| format!("{s:?}"));
    assert_eq!(
        statuses,
        [ClosedLeafStatus::Attracting, ClosedLeafStatus::Repelling]
    );
    for l in &a.closed_leaves {
        // the leaves are where the sphere meets the cylinder r = π
        for q in l.polyline.iter().step_by(7) {
            let p = s.point(q[0].rem_euclid(1.0), q[1]);
            assert!((p[0].hypot(p[1]) - PI).abs() < 1e-3, "{p:?}");
        }
        assert_eq!(l.status == ClosedLeafStatus::Attracting, l.multiplier < 1.0);
        assert_eq!(l.log_multiplier > 0.0, l.multiplier > 1.0);
        assert!((l.multiplier - 1.0).abs() > 1e-4);
    }
}

#[test]
fn ot_sphere_radius_pi_equator_is_degenerate() {
    let a = analyze("ot", &ParamSurface::sphere(PI));
    assert_eq!(a.closed_leaves.len(), 1);
    let l = &a.closed_leaves[0];
    assert!(l.status.is_degenerate());
    assert!((l.multiplier - 1.0).abs() < 1e-4);
    assert!(l.second_order.is_some());
    assert!(l.polyline.iter().all(|q| (q[1] - 0.5).abs() < 1e-6));
}

#[test]
fn rotating_torus_connections() {
    let a = analyze("r2s1", &ParamSurface::rotating_torus(1.0, 1.0));
    assert_eq!(a.singularities.len(), 4);
    let has = |kind: SingularityKind, sign: i8| {
        a.singularities
            .iter()
            .any(|s| (s.kind == kind || kind.is_nodal() && s.kind.is_nodal()) && s.sign == sign)
    };
    assert!(has(SingularityKind::Node, 1) && has(SingularityKind::Node, -1));
    assert!(has(SingularityKind::Saddle, 1) && has(SingularityKind::Saddle, -1));
    let retro: Vec<_> = a.retrograde_connections().collect();
    assert_eq!(retro.len(), 2);
    let sign = |id: usize| a.singularities.iter().find(|s| s.id == id).unwrap().sign;
    for c in retro {
        assert_eq!((sign(c.source), sign(c.target)), (-1, 1));
    }
    assert!(a.pb_satisfied);
}

#[test]
fn translated_rotating_torus_has_no_connection() {
    let a = analyze("r2s1", &ParamSurface::rotating_torus(1.1, 1.0));
    assert!(a.connections.is_empty());
    let nodes: Vec<usize> = a
        .singularities
        .iter()
        .filter(|s| s.kind.is_nodal())
        .map(|s| s.id)
        .collect();
    assert_eq!(a.saddles().count(), 2);
    for s in &a.separatrices {
        match s.path.limit {
            LeafLimit::Singularity(id) => assert!(nodes.contains(&id), "{:?}", s.path.limit),
            other => panic!("separatrix limit {other:?}"),
        }
    }
}

#[test]
fn torus_z_irrational_fails_pb() {
    let a = analyze("t3", &ParamSurface::torus_z(0.5));
    assert!(a.singularities.is_empty());
    assert!(a.closed_leaves.is_empty());
    assert!(!a.pb_satisfied);
}

#[test]
fn torus_x_is_non_generic() {
    let a = analyze("t3", &ParamSurface::torus_x(0.3));
    assert!(!a.generic);
    assert_eq!(a.non_generic_loci.len(), 2);
    for l in &a.non_generic_loci {
        let v = l.points[0][1];
        // sin z = 0 with z = 2πv
        assert!((v - 0.0).abs().min((v - 0.5).abs()).min((v - 1.0).abs()) < 1e-3);
        assert!(l.points.iter().all(|q| (q[1] - v).abs() < 1e-3));
    }
}

#[test]
fn positive_nodes_are_sources() {
    for (m, s) in [
        ("std_cyl", ParamSurface::sphere(1.5)),
        ("ot", ParamSurface::sphere(5.0)),
        ("r2s1", ParamSurface::rotating_torus(1.0, 1.0)),
        ("std_cyl_half", ParamSurface::sphere(1.0)),
    ] {
        let a = analyze(m, &s);
        for sing in a.singularities.iter().filter(|x| x.kind.is_nodal()) {
            let re = sing.eigen.values.map(|l| l[0]);
            if sing.sign > 0 {
                assert!(re.iter().all(|x| *x > 0.0), "{m}: {sing:?}");
            } else {
                assert!(re.iter().all(|x| *x < 0.0), "{m}: {sing:?}");
            }
        }
    }
}

#[test]
fn statuses_stable_under_halved_tolerances() {
    let cfg = AnalysisConfig::default();
    for r in [5.0, PI] {
        let f = FoliationField::pullback(&model("ot"), &ParamSurface::sphere(r));
        let a = analyze_field(&f, &cfg).unwrap();
        let b = analyze_field(&f, &cfg.halved()).unwrap();
        let st = |x: &FoliationAnalysis| {
            let mut v: Vec<String> = x
                .closed_leaves
                .iter()
                .map(|l| format!("{:?}", l.status))
                .collect();
            v.sort();
            v
        };
        assert_eq!(st(&a), st(&b));
    }
}

#[test]
fn orientation_reversal_flips_signs_and_statuses() {
    let s = ParamSurface::sphere(5.0);
    let a = analyze("ot", &s);
    let b = analyze("ot", &s.reflected());
    assert_eq!(a.singularities.len(), b.singularities.len());
    for x in &a.singularities {
        let y = b.singularities.iter().find(|y| y.pole == x.pole).unwrap();
        assert_eq!(x.sign, -y.sign);
    }
    assert_eq!(a.closed_leaves.len(), b.closed_leaves.len());
    for x in &a.closed_leaves {
        let y = b
            .closed_leaves
            .iter()
            .find(|y| (y.base[1] - x.base[1]).abs() < 1e-3)
            .unwrap();
        let swapped = match x.status {
            ClosedLeafStatus::Attracting => ClosedLeafStatus::Repelling,
            ClosedLeafStatus::Repelling => ClosedLeafStatus::Attracting,
            other => other,
        };
        assert_eq!(y.status, swapped);
    }

    let r = ParamSurface::rotating_torus(1.0, 1.0);
    let a = analyze("r2s1", &r);
    let b = analyze("r2s1", &r.reflected());
    let mut sa: Vec<i8> = a.singularities.iter().map(|s| s.sign).collect();
    let mut sb: Vec<i8> = b.singularities.iter().map(|s| -s.sign).collect();
    sa.sort();
    sb.sort();
    assert_eq!(sa, sb);
}

#[test]
fn separatrix_labels_match_eigen_directions() {
    let a = analyze("r2s1", &ParamSurface::rotating_torus(1.0, 1.0));
    for s in &a.separatrices {
        let saddle = a.singularities.iter().find(|x| x.id == s.saddle).unwrap();
        let y = a
            .field
            .y(
                saddle.location[0] + 1e-4 * s.departure[0],
                saddle.location[1] + 1e-4 * s.departure[1],
            )
            .unwrap();
        let along = y[0] * s.departure[0] + y[1] * s.departure[1];
        match s.kind {
            SeparatrixKind::Unstable => assert!(along > 0.0),
            SeparatrixKind::Stable => assert!(along < 0.0),
        }
    }
}
