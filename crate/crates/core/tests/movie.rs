use contact_core::movie::{linspace, CrossingVerdict, EventKind, Evidence, FamilyKind, Ordering, Timeline};
use contact_core::*;

fn cfg() -> AnalysisConfig {
    AnalysisConfig::default()
}

// root of r sin r: the equator of the sphere of radius r is a leaf of ker(cos r dz + r sin r dθ)
fn equator_leaf_radius(mut lo: f64, mut hi: f64) -> f64 {
    let f = |r: f64| r * r.sin();
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn gamma_constant_between_events(tl: &Timeline) {
    for w in tl.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (Some(ga), Some(gb)) = (a.gamma_components, b.gamma_components) else {
            continue;
        };
        let crossed = tl.events.iter().any(|e| e.t_hi > a.t && e.t_lo < b.t);
        if !crossed {
            assert_eq!(ga, gb, "Γ count changed on [{}, {}] without an event", a.t, b.t);
        }
    }
}

#[test]
fn ot_spheres_birth_and_reversal() {
    let m = ContactModel::catalog("ot").unwrap();
    let fam = SurfaceFamily::parse("spheres").unwrap();
    let cfg = cfg();
    let tl = analyze_movie(&m, &fam, &linspace(2.8, 3.5, 8), &cfg).unwrap();
    assert_eq!(tl.events.len(), 1);
    let e = &tl.events[0];
    assert_eq!(e.kind, EventKind::DegenerateLeaf);
    assert!(e.t_hi - e.t_lo <= cfg.t_tol);
    let star = equator_leaf_radius(2.8, 3.5);
    assert!((0.5 * (e.t_lo + e.t_hi) - star).abs() < 1e-3);
    gamma_constant_between_events(&tl);

    let p = birth_death_profile(&m, &fam, e, &cfg).unwrap();
    assert_eq!((p.count_before, p.count_after, p.sign), (0, 2, 1));
    assert!(p.consistent && !p.flagged);

    let rev = fam.time_reversed();
    let tl = analyze_movie(&m, &rev, &linspace(-3.5, -2.8, 8), &cfg).unwrap();
    assert_eq!(tl.events.len(), 1);
    let e = &tl.events[0];
    assert!((0.5 * (e.t_lo + e.t_hi) + star).abs() < 1e-3);
    let p = birth_death_profile(&m, &rev, e, &cfg).unwrap();
    assert_eq!((p.count_before, p.count_after, p.sign), (2, 0, -1));
    assert!(p.consistent);
}

#[test]
fn std_cyl_spheres_stay_convex() {
    let m = ContactModel::catalog("std_cyl").unwrap();
    let fam = SurfaceFamily::parse("spheres").unwrap();
    let tl = analyze_movie(&m, &fam, &linspace(1.0, 3.0, 5), &cfg()).unwrap();
    assert!(tl.events.is_empty());
    assert!(tl.accumulations.is_empty());
    for s in &tl.samples {
        assert_eq!(s.gamma_components, Some(1), "t = {}", s.t);
        assert_eq!(s.verdict.as_ref().map(|v| v.convex), Some(true));
    }
}

#[test]
fn rotating_tori_crossing() {
    let m = ContactModel::catalog("r2s1").unwrap();
    let base = SurfaceFamily::parse("rotating_tori").unwrap();
    let cfg = cfg();
    let grid = linspace(-0.1, 0.1, 4);

    let run = |fam: &SurfaceFamily| {
        let tl = analyze_movie(&m, fam, &grid, &cfg).unwrap();
        let events: Vec<_> = tl.events_of(EventKind::RetrogradeConnection).cloned().collect();
        assert_eq!(events.len(), 2, "{}", fam.id);
        for e in &events {
            assert!(e.t_lo <= 0.0 && 0.0 <= e.t_hi && e.t_hi - e.t_lo <= 2.0 * cfg.t_tol);
            let Evidence::RetrogradeConnection { gap_lo, gap_hi, .. } = e.evidence else {
                panic!("wrong evidence");
            };
            assert!(gap_lo * gap_hi < 0.0);
        }
        events
            .iter()
            .map(|e| crossing_direction(&m, fam, e, &cfg).unwrap())
            .collect::<Vec<_>>()
    };

    for r in run(&base) {
        assert_eq!(r.verdict, CrossingVerdict::Consistent);
        assert_eq!(
            (r.before, r.after),
            (Some(Ordering::Below), Some(Ordering::Above))
        );
        assert!(r.readings.len() >= 2);
        for t in &r.readings {
            assert_eq!((t.before, t.after), (r.before, r.after));
        }
    }
    for r in run(&base.time_reversed()) {
        assert_eq!(
            (r.before, r.after),
            (Some(Ordering::Above), Some(Ordering::Below))
        );
        assert_eq!(r.verdict, CrossingVerdict::Consistent);
    }
    for r in run(&base.non_contact_control()) {
        assert_eq!(r.verdict, CrossingVerdict::Inconsistent);
    }
}

#[test]
fn wavy_tori_birth_then_death() {
    let m = ContactModel::catalog("t3").unwrap();
    let amp = 0.3;
    let fam = SurfaceFamily::new(FamilyKind::WavyTori { amp });
    let cfg = cfg();
    let tl = analyze_movie(&m, &fam, &linspace(1.0, 2.2, 7), &cfg).unwrap();
    let dl: Vec<_> = tl.events_of(EventKind::DegenerateLeaf).collect();
    assert_eq!(dl.len(), 2);
    let half_pi = std::f64::consts::FRAC_PI_2;
    for (e, want, counts, sign) in [
        (dl[0], half_pi - amp, (0, 2), 1),
        (dl[1], half_pi + amp, (2, 0), -1),
    ] {
        assert!((0.5 * (e.t_lo + e.t_hi) - want).abs() < 1e-3, "{e:?}");
        let p = birth_death_profile(&m, &fam, e, &cfg).unwrap();
        assert_eq!(((p.count_before, p.count_after), p.sign), (counts, sign));
        assert!(p.consistent);
    }
    gamma_constant_between_events(&tl);
}
