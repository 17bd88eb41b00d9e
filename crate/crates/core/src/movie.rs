//! Movies `t ↦ Sₜ`: per-frame convexity, bifurcation events and the
//! Birth/Death and Crossing lemma checks across them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{analyze_field, FoliationAnalysis};
use crate::closed_leaf::{ReturnMap, Transversal};
use crate::config::AnalysisConfig;
use crate::convexity::{convexity_verdict, ConvexityVerdict};
use crate::error::{Error, Result};
use crate::field::FoliationField;
use crate::leaf::point_segment_distance;
use crate::model::ContactModel;
use crate::separatrix::{Separatrix, SeparatrixKind};
use crate::singularity::Singularity;
use crate::surface::ParamSurface;

/// Saddles and separatrices are matched across frames within this distance.
const MATCH_RADIUS: f64 = 0.1;
/// Closed leaves this close to the newborn pair belong to its annulus.
const ANNULUS_RADIUS: f64 = 0.1;
const TRANSVERSAL_OFFSETS: [f64; 3] = [0.03, 0.06, 0.09];
const TRANSVERSAL_HALF_WIDTH: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FamilyKind {
    /// Spheres of radius `t` about the origin.
    Spheres,
    /// `{x = t}` in T³.
    TorusX,
    /// `{z = t}` in T³.
    TorusZ,
    /// Swept circles of radius `1 + t` centred at `(1, 0)`; the circle passes
    /// through the axis at `t = 0`.
    RotatingTori,
    /// Graphs `z = t + amp·cos 2πv` in T³.
    WavyTori { amp: f64 },
}

pub const FAMILY_IDS: [&str; 5] = ["spheres", "torus_x", "torus_z", "rotating_tori", "wavy_tori:A"];

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceFamily {
    pub id: String,
    pub kind: FamilyKind,
    /// Frames are taken at `−t`.
    pub time_reversed: bool,
    /// Replaces the coorientation read off the geometry.
    pub declared_coorientation: Option<i8>,
}

impl SurfaceFamily {
    pub fn new(kind: FamilyKind) -> Self {
        let id = match kind {
            FamilyKind::Spheres => "spheres".to_string(),
            FamilyKind::TorusX => "torus_x".to_string(),
            FamilyKind::TorusZ => "torus_z".to_string(),
            FamilyKind::RotatingTori => "rotating_tori".to_string(),
            FamilyKind::WavyTori { amp } => format!("wavy_tori:{amp}"),
        };
        Self {
            id,
            kind,
            time_reversed: false,
            declared_coorientation: None,
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "surface family",
            id: id.to_string(),
            known: FAMILY_IDS.join(", "),
        };
        let kind = match id.split_once(':') {
            None => match id {
                "spheres" => FamilyKind::Spheres,
                "torus_x" => FamilyKind::TorusX,
                "torus_z" => FamilyKind::TorusZ,
                "rotating_tori" => FamilyKind::RotatingTori,
                _ => return Err(unknown()),
            },
            Some(("wavy_tori", a)) => {
                let amp: f64 = a.trim().parse().map_err(|_| unknown())?;
                if !amp.is_finite() {
                    return Err(unknown());
                }
                FamilyKind::WavyTori { amp }
            }
            _ => return Err(unknown()),
        };
        Ok(Self::new(kind))
    }

    /// The same surfaces traversed backwards: `t ↦ S₋ₜ`.
    pub fn time_reversed(&self) -> Self {
        Self {
            id: format!("{}@-t", self.id),
            time_reversed: !self.time_reversed,
            ..self.clone()
        }
    }

    /// The time-reversed family declared with the orientation of the
    /// original one. The contact condition fails for the resulting movie.
    pub fn non_contact_control(&self) -> Self {
        let rev = self.time_reversed();
        Self {
            id: format!("{}@control", self.id),
            declared_coorientation: Some(1),
            ..rev
        }
    }

    pub fn frame(&self, t: f64) -> Result<ParamSurface> {
        let s = if self.time_reversed { -t } else { t };
        let bad = |what: &str| Err(Error::Precondition(format!("{} at t = {t}: {what}", self.id)));
        if !s.is_finite() {
            return bad("non-finite parameter");
        }
        Ok(match self.kind {
            FamilyKind::Spheres if s <= 0.0 => return bad("radius must be positive"),
            FamilyKind::Spheres => ParamSurface::sphere(s),
            FamilyKind::TorusX => ParamSurface::torus_x(s),
            FamilyKind::TorusZ => ParamSurface::torus_z(s),
            FamilyKind::RotatingTori if 1.0 + s <= 0.0 => return bad("radius must be positive"),
            FamilyKind::RotatingTori => ParamSurface::rotating_torus(1.0, 1.0 + s),
            FamilyKind::WavyTori { amp } => ParamSurface::wavy_torus(s, amp),
        })
    }

    /// `+1` when the frames move along their positive normal as `t`
    /// increases, so that `Sₜ × t` carries the ambient orientation.
    pub fn coorientation(&self, t: f64) -> Result<i8> {
        if let Some(c) = self.declared_coorientation {
            return Ok(c);
        }
        let h = 1e-5;
        let (a, b, s) = (self.frame(t - h)?, self.frame(t + h)?, self.frame(t)?);
        let mut total = 0.0;
        for (u, v) in [(0.31, 0.37), (0.63, 0.71), (0.17, 0.83)] {
            let (p, q) = (a.point(u, v), b.point(u, v));
            let n = s.frame(u, v)?.normal();
            let dot: f64 = (0..3).map(|i| (q[i] - p[i]) * n[i]).sum();
            total += dot.signum();
        }
        if total == 0.0 {
            return Err(Error::Degenerate {
                point: [t, 0.0, 0.0],
                density: 0.0,
            });
        }
        Ok(if total > 0.0 { 1 } else { -1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// A retrograde saddle connection.
    #[serde(rename = "sigma1_sc")]
    RetrogradeConnection,
    /// A degenerate closed leaf.
    #[serde(rename = "sigma1_dl")]
    DegenerateLeaf,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// An unstable separatrix of a negative saddle sweeps across a positive
    /// saddle. Gaps are signed closest approaches, positive with the saddle
    /// on the left of the separatrix.
    RetrogradeConnection {
        negative_saddle: [f64; 2],
        departure: [f64; 2],
        positive_saddle: [f64; 2],
        gap_lo: f64,
        gap_hi: f64,
    },
    /// Closed-leaf counts at the bracket ends and the smallest `|π′(0) − 1|`
    /// over the leaves present.
    DegenerateLeaf {
        count_lo: usize,
        count_hi: usize,
        defect_lo: Option<f64>,
        defect_hi: Option<f64>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct MovieEvent {
    pub t_lo: f64,
    pub t_hi: f64,
    pub kind: EventKind,
    /// Set when bisection stalled or brackets of both kinds overlap.
    pub resolution_limited: bool,
    pub evidence: Evidence,
}

/// More events in one grid interval than `event_cap`.
#[derive(Clone, Debug, Serialize)]
pub struct Accumulation {
    pub t_lo: f64,
    pub t_hi: f64,
    pub kind: EventKind,
    pub events: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameSample {
    pub t: f64,
    pub resolved: bool,
    pub verdict: Option<ConvexityVerdict>,
    pub gamma_components: Option<usize>,
    pub closed_leaves: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timeline {
    pub model: String,
    pub family: String,
    pub samples: Vec<FrameSample>,
    pub events: Vec<MovieEvent>,
    pub accumulations: Vec<Accumulation>,
    pub warnings: Vec<String>,
}

impl Timeline {
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &MovieEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

type Frame = std::result::Result<Arc<FoliationAnalysis>, String>;

struct Frames<'a> {
    model: &'a ContactModel,
    family: &'a SurfaceFamily,
    cfg: &'a AnalysisConfig,
    cache: RefCell<HashMap<u64, Frame>>,
}

impl<'a> Frames<'a> {
    fn new(model: &'a ContactModel, family: &'a SurfaceFamily, cfg: &'a AnalysisConfig) -> Self {
        Self {
            model,
            family,
            cfg,
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn compute(model: &ContactModel, family: &SurfaceFamily, cfg: &AnalysisConfig, t: f64) -> Frame {
        let s = family.frame(t).map_err(|e| e.to_string())?;
        let field = FoliationField::pullback(model, &s);
        analyze_field(&field, cfg)
            .map(Arc::new)
            .map_err(|e| e.to_string())
    }

    fn insert(&self, t: f64, f: Frame) {
        self.cache.borrow_mut().insert(t.to_bits(), f);
    }

    fn get(&self, t: f64) -> Frame {
        if let Some(f) = self.cache.borrow().get(&t.to_bits()) {
            return f.clone();
        }
        let f = Self::compute(self.model, self.family, self.cfg, t);
        self.insert(t, f.clone());
        f
    }

    fn ok(&self, t: f64) -> Option<Arc<FoliationAnalysis>> {
        self.get(t).ok()
    }
}

#[derive(Clone, Copy, Debug)]
struct Bracket {
    lo: f64,
    hi: f64,
    s_lo: i64,
    s_hi: i64,
    limited: bool,
}

/// Bisects every change of a piecewise constant indicator inside `[lo, hi]`
/// down to width `tol`. Returns `None` once more than `cap` changes show up.
fn locate<F>(lo: f64, s_lo: i64, hi: f64, s_hi: i64, tol: f64, cap: usize, f: F) -> Option<Vec<Bracket>>
where
    F: Fn(f64) -> Option<i64>,
{
    let mut out = Vec::new();
    let mut stack = vec![(lo, s_lo, hi, s_hi)];
    while let Some((lo, s_lo, hi, s_hi)) = stack.pop() {
        if hi - lo <= tol {
            out.push(Bracket {
                lo,
                hi,
                s_lo,
                s_hi,
                limited: false,
            });
        } else {
            let m = 0.5 * (lo + hi);
            match f(m) {
                None => out.push(Bracket {
                    lo,
                    hi,
                    s_lo,
                    s_hi,
                    limited: true,
                }),
                Some(s) if s == s_lo => stack.push((m, s, hi, s_hi)),
                Some(s) if s == s_hi => stack.push((lo, s_lo, m, s)),
                Some(s) => {
                    stack.push((m, s, hi, s_hi));
                    stack.push((lo, s_lo, m, s));
                }
            }
        }
        if out.len() > cap {
            return None;
        }
    }
    out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    // brackets meeting at a frame where the indicator takes a third value
    // (an exact hit) describe one event
    let mut merged: Vec<Bracket> = Vec::new();
    for b in out {
        match merged.last_mut() {
            Some(p) if p.hi >= b.lo => {
                p.hi = b.hi;
                p.s_hi = b.s_hi;
                p.limited |= b.limited;
            }
            _ => merged.push(b),
        }
    }
    Some(merged)
}

fn defect(a: &FoliationAnalysis) -> Option<f64> {
    a.closed_leaves
        .iter()
        .map(|l| (l.multiplier - 1.0).abs())
        .min_by(f64::total_cmp)
}

/// Identifies an unstable separatrix of a negative saddle and a positive
/// saddle across nearby frames.
#[derive(Clone, Copy, Debug)]
struct Track {
    negative: [f64; 2],
    departure: [f64; 2],
    positive: [f64; 2],
}

fn nearest_saddle<'a>(a: &'a FoliationAnalysis, sign: i8, p: [f64; 2]) -> Option<&'a Singularity> {
    a.saddles()
        .filter(|s| s.sign == sign && s.pole.is_none())
        .map(|s| (s, a.field.dist(s.location, p)))
        .filter(|(_, d)| *d < MATCH_RADIUS)
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(s, _)| s)
}

fn best_separatrix<'a>(
    a: &'a FoliationAnalysis,
    saddle: usize,
    kind: SeparatrixKind,
    dir: [f64; 2],
) -> Option<&'a Separatrix> {
    a.separatrices_of(saddle)
        .filter(|s| s.kind == kind)
        .map(|s| (s, s.departure[0] * dir[0] + s.departure[1] * dir[1]))
        .filter(|(_, d)| *d > 0.5)
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(s, _)| s)
}

/// The separatrix `c⁻`, the positive saddle, and the signed closest approach
/// of `c⁻` to it together with the index of the segment where it occurs.
fn reading<'a>(
    a: &'a FoliationAnalysis,
    tr: &Track,
) -> Option<(&'a Separatrix, &'a Singularity, f64, usize)> {
    let n = nearest_saddle(a, -1, tr.negative)?;
    let p = nearest_saddle(a, 1, tr.positive)?;
    let c = best_separatrix(a, n.id, SeparatrixKind::Unstable, tr.departure)?;
    let pts = &c.path.points;
    if c.path.limit == crate::leaf::LeafLimit::Singularity(p.id) {
        return Some((c, p, 0.0, pts.len().saturating_sub(2)));
    }
    let mut best: Option<(f64, usize)> = None;
    for i in 0..pts.len().saturating_sub(1) {
        let seg = [pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1]];
        let d = a.field.delta(pts[i], p.location);
        let dist = point_segment_distance(d, seg);
        if best.map_or(true, |(b, _)| dist < b.abs()) {
            let side = if seg[0] * d[1] - seg[1] * d[0] >= 0.0 {
                1.0
            } else {
                -1.0
            };
            best = Some((side * dist, i));
        }
    }
    let (gap, i) = best?;
    Some((c, p, gap, i))
}

fn tracks(a: &FoliationAnalysis) -> Vec<Track> {
    let mut out = Vec::new();
    for n in a.saddles().filter(|s| s.sign < 0 && s.pole.is_none()) {
        for c in a
            .separatrices_of(n.id)
            .filter(|s| s.kind == SeparatrixKind::Unstable)
        {
            for p in a.saddles().filter(|s| s.sign > 0 && s.pole.is_none()) {
                out.push(Track {
                    negative: n.location,
                    departure: c.departure,
                    positive: p.location,
                });
            }
        }
    }
    out
}

fn gap_of(frames: &Frames, t: f64, tr: &Track) -> Option<f64> {
    let a = frames.ok(t)?;
    reading(&a, tr).map(|r| r.2)
}

fn state(g: f64) -> i64 {
    if g > 0.0 {
        1
    } else if g < 0.0 {
        -1
    } else {
        0
    }
}

pub fn analyze_movie(
    model: &ContactModel,
    family: &SurfaceFamily,
    t_grid: &[f64],
    cfg: &AnalysisConfig,
) -> Result<Timeline> {
    cfg.validate()?;
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition(
            "t_grid must be strictly increasing with at least two values".into(),
        ));
    }
    let frames = Frames::new(model, family, cfg);
    let computed: Vec<(Frame, Option<Result<ConvexityVerdict>>)> = t_grid
        .par_iter()
        .map(|&t| {
            let f = Frames::compute(model, family, cfg, t);
            let v = f.as_ref().ok().map(|a| convexity_verdict(a, cfg));
            (f, v)
        })
        .collect();

    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    for (&t, (f, v)) in t_grid.iter().zip(computed) {
        frames.insert(t, f.clone());
        let mut sample = FrameSample {
            t,
            resolved: false,
            verdict: None,
            gamma_components: None,
            closed_leaves: None,
            error: None,
        };
        match (f, v) {
            (Ok(a), Some(Ok(v))) => {
                sample.resolved = true;
                sample.closed_leaves = Some(a.closed_leaves.len());
                sample.gamma_components = v.dividing_set.as_ref().map(|d| d.components.len());
                sample.verdict = Some(v);
            }
            (Ok(a), Some(Err(e))) => {
                sample.closed_leaves = Some(a.closed_leaves.len());
                sample.error = Some(e.to_string());
            }
            (Err(e), _) => sample.error = Some(e),
            (Ok(_), None) => {}
        }
        if let Some(e) = &sample.error {
            warnings.push(format!("frame t = {t} unresolved: {e}"));
        }
        samples.push(sample);
    }

    let mut events = Vec::new();
    let mut accumulations = Vec::new();
    let count = |t: f64| frames.ok(t).map(|a| a.closed_leaves.len() as i64);

    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let (Some(a0), Some(a1)) = (frames.ok(t0), frames.ok(t1)) else {
            continue;
        };

        let (c0, c1) = (a0.closed_leaves.len() as i64, a1.closed_leaves.len() as i64);
        if c0 != c1 {
            match locate(t0, c0, t1, c1, cfg.t_tol, cfg.event_cap, count) {
                Some(list) => {
                    for b in list {
                        let (lo, hi) = (frames.ok(b.lo), frames.ok(b.hi));
                        events.push(MovieEvent {
                            t_lo: b.lo,
                            t_hi: b.hi,
                            kind: EventKind::DegenerateLeaf,
                            resolution_limited: b.limited,
                            evidence: Evidence::DegenerateLeaf {
                                count_lo: b.s_lo as usize,
                                count_hi: b.s_hi as usize,
                                defect_lo: lo.as_deref().and_then(defect),
                                defect_hi: hi.as_deref().and_then(defect),
                            },
                        });
                    }
                }
                None => accumulations.push(Accumulation {
                    t_lo: t0,
                    t_hi: t1,
                    kind: EventKind::DegenerateLeaf,
                    events: cfg.event_cap + 1,
                }),
            }
        }

        let mut found = 0;
        let mut sc = Vec::new();
        for tr in tracks(&a0) {
            let (Some(g0), Some(g1)) = (reading(&a0, &tr).map(|r| r.2), reading(&a1, &tr).map(|r| r.2))
            else {
                continue;
            };
            if state(g0) == state(g1) {
                continue;
            }
            let f = |t: f64| gap_of(&frames, t, &tr).map(state);
            let Some(list) = locate(t0, state(g0), t1, state(g1), cfg.t_tol, cfg.event_cap, f) else {
                found = cfg.event_cap + 1;
                break;
            };
            for b in list {
                let (Some(glo), Some(ghi)) = (gap_of(&frames, b.lo, &tr), gap_of(&frames, b.hi, &tr)) else {
                    continue;
                };
                // a jump of the closest approach is not a crossing
                if glo.abs().min(ghi.abs()) > cfg.pass_radius {
                    continue;
                }
                found += 1;
                sc.push(MovieEvent {
                    t_lo: b.lo,
                    t_hi: b.hi,
                    kind: EventKind::RetrogradeConnection,
                    resolution_limited: b.limited,
                    evidence: Evidence::RetrogradeConnection {
                        negative_saddle: tr.negative,
                        departure: tr.departure,
                        positive_saddle: tr.positive,
                        gap_lo: glo,
                        gap_hi: ghi,
                    },
                });
            }
        }
        if found > cfg.event_cap {
            accumulations.push(Accumulation {
                t_lo: t0,
                t_hi: t1,
                kind: EventKind::RetrogradeConnection,
                events: found,
            });
        } else {
            events.extend(sc);
        }
    }

    // the two codimension-one strata cannot be told apart inside one bracket
    let overlaps = |a: &MovieEvent, b: &MovieEvent| a.t_lo <= b.t_hi && b.t_lo <= a.t_hi;
    let clash: Vec<bool> = events
        .iter()
        .map(|e| events.iter().any(|f| f.kind != e.kind && overlaps(e, f)))
        .collect();
    for (e, c) in events.iter_mut().zip(clash) {
        e.resolution_limited |= c;
    }
    events.sort_by(|a, b| a.t_lo.total_cmp(&b.t_lo));
    for a in &accumulations {
        warnings.push(format!(
            "accumulation suspected in [{}, {}]: more than {} events",
            a.t_lo, a.t_hi, cfg.event_cap
        ));
    }

    Ok(Timeline {
        model: model.id().to_string(),
        family: family.id.clone(),
        samples,
        events,
        accumulations,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingVerdict {
    Consistent,
    Inconsistent,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalReading {
    pub base: [f64; 2],
    pub tau: [f64; 2],
    /// `s(c⁻) − s(c⁺)` at `t_lo` and `t_hi`.
    pub gap_before: Option<f64>,
    pub gap_after: Option<f64>,
    pub before: Option<Ordering>,
    pub after: Option<Ordering>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingReport {
    pub t_lo: f64,
    pub t_hi: f64,
    pub coorientation: i8,
    /// Ordering of `c⁻` relative to `c⁺` predicted before and after.
    pub expected: [Ordering; 2],
    pub readings: Vec<TransversalReading>,
    pub before: Option<Ordering>,
    pub after: Option<Ordering>,
    pub verdict: CrossingVerdict,
}

/// Ordinates of crossings of `pts` with the segment `base + s·τ`, `|s| ≤ w`.
fn crossings(field: &FoliationField, pts: &[[f64; 2]], base: [f64; 2], tau: [f64; 2], w: f64) -> Vec<f64> {
    let n = [-tau[1], tau[0]];
    let mut out = Vec::new();
    for i in 0..pts.len().saturating_sub(1) {
        let d0 = field.delta(base, pts[i]);
        let d1 = [
            d0[0] + pts[i + 1][0] - pts[i][0],
            d0[1] + pts[i + 1][1] - pts[i][1],
        ];
        let (h0, h1) = (d0[0] * n[0] + d0[1] * n[1], d1[0] * n[0] + d1[1] * n[1]);
        if (h0 > 0.0) == (h1 > 0.0) || h0 == h1 {
            continue;
        }
        let l = h0 / (h0 - h1);
        let q = [d0[0] + l * (d1[0] - d0[0]), d0[1] + l * (d1[1] - d0[1])];
        let s = q[0] * tau[0] + q[1] * tau[1];
        if s.abs() <= w {
            out.push(s);
        }
    }
    out
}

fn closest(xs: Vec<f64>) -> Option<f64> {
    xs.into_iter().min_by(|a, b| a.abs().total_cmp(&b.abs()))
}

/// `c⁺`: the stable separatrix of the positive saddle that `c⁻` runs along
/// on its way in.
fn partner<'a>(a: &'a FoliationAnalysis, tr: &Track) -> Option<(&'a Separatrix, &'a Separatrix)> {
    let (c, p, _, i) = reading(a, tr)?;
    let upstream = &c.path.points[..=i];
    let plus = a
        .separatrices_of(p.id)
        .filter(|s| s.kind == SeparatrixKind::Stable)
        .filter_map(|s| {
            let q = point_at_arclength(&s.path.points, TRANSVERSAL_OFFSETS[0])?;
            let d = upstream
                .iter()
                .map(|x| a.field.dist(*x, q))
                .fold(f64::INFINITY, f64::min);
            Some((s, d))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))?
        .0;
    Some((c, plus))
}

fn point_at_arclength(pts: &[[f64; 2]], s: f64) -> Option<[f64; 2]> {
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let l = (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        if acc + l >= s && l > 0.0 {
            let r = (s - acc) / l;
            return Some([
                w[0][0] + r * (w[1][0] - w[0][0]),
                w[0][1] + r * (w[1][1] - w[0][1]),
            ]);
        }
        acc += l;
    }
    None
}

/// Orders `c⁻` against `c⁺` on three transversals near the positive saddle
/// at both ends of a retrograde-connection bracket. A transversal `τ` is
/// positive when `(τ, Y)` is a positive basis, so "above" is to the right of
/// the leaves.
pub fn crossing_direction(
    model: &ContactModel,
    family: &SurfaceFamily,
    event: &MovieEvent,
    cfg: &AnalysisConfig,
) -> Result<CrossingReport> {
    let Evidence::RetrogradeConnection {
        negative_saddle,
        departure,
        positive_saddle,
        ..
    } = event.evidence
    else {
        return Err(Error::Precondition(
            "crossing direction needs a retrograde-connection event".into(),
        ));
    };
    let tr = Track {
        negative: negative_saddle,
        departure,
        positive: positive_saddle,
    };
    let analyze = |t: f64| -> Result<FoliationAnalysis> {
        analyze_field(&FoliationField::pullback(model, &family.frame(t)?), cfg)
    };
    let lo = analyze(event.t_lo)?;
    let hi = analyze(event.t_hi)?;
    let coorientation = family.coorientation(0.5 * (event.t_lo + event.t_hi))?;
    let expected = if coorientation > 0 {
        [Ordering::Below, Ordering::Above]
    } else {
        [Ordering::Above, Ordering::Below]
    };

    let mut readings = Vec::new();
    if let Some((_, plus)) = partner(&lo, &tr) {
        for off in TRANSVERSAL_OFFSETS {
            let Some(base) = point_at_arclength(&plus.path.points, off) else {
                continue;
            };
            let Some(tv) = Transversal::at(&lo.field, base, TRANSVERSAL_HALF_WIDTH) else {
                continue;
            };
            // (τ, Y) positive: τ points to the right of the leaves
            let tau = [-tv.tau[0], -tv.tau[1]];
            // positively transverse in both frames, or re-seed
            let transverse = |a: &FoliationAnalysis| {
                a.field
                    .y(base[0], base[1])
                    .map_or(false, |y| tau[0] * y[1] - tau[1] * y[0] > 0.0)
            };
            if !transverse(&lo) || !transverse(&hi) {
                continue;
            }
            let gap = |a: &FoliationAnalysis| -> Option<f64> {
                let (minus, plus) = partner(a, &tr)?;
                let sm = closest(crossings(
                    &a.field,
                    &minus.path.points,
                    base,
                    tau,
                    TRANSVERSAL_HALF_WIDTH,
                ))?;
                let sp = closest(crossings(
                    &a.field,
                    &plus.path.points,
                    base,
                    tau,
                    TRANSVERSAL_HALF_WIDTH,
                ))?;
                Some(sm - sp)
            };
            let order = |g: Option<f64>| g.map(|g| if g < 0.0 { Ordering::Below } else { Ordering::Above });
            let (gb, ga) = (gap(&lo), gap(&hi));
            readings.push(TransversalReading {
                base,
                tau,
                gap_before: gb,
                gap_after: ga,
                before: order(gb),
                after: order(ga),
            });
        }
    }

    let complete: Vec<(Ordering, Ordering)> = readings
        .iter()
        .filter_map(|r| Some((r.before?, r.after?)))
        .collect();
    let agreed = complete
        .first()
        .filter(|first| complete.iter().all(|x| x == *first))
        .copied();
    let verdict = match agreed {
        None => CrossingVerdict::Indeterminate,
        Some((b, a)) if [b, a] == expected => CrossingVerdict::Consistent,
        Some(_) => CrossingVerdict::Inconsistent,
    };
    Ok(CrossingReport {
        t_lo: event.t_lo,
        t_hi: event.t_hi,
        coorientation,
        expected,
        readings,
        before: agreed.map(|x| x.0),
        after: agreed.map(|x| x.1),
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BirthDeathProfile {
    pub count_before: usize,
    pub count_after: usize,
    /// Sign of `π″` on a positive transversal, times the coorientation.
    pub sign: i8,
    pub second_order: i8,
    pub coorientation: i8,
    /// `count_after − count_before = 2·sign`.
    pub consistent: bool,
    /// More than two leaves appeared or disappeared.
    pub flagged: bool,
}

fn annulus_count(a: &FoliationAnalysis, pair: &[&[[f64; 2]]; 2]) -> usize {
    let near = |q: [f64; 2]| {
        pair.iter()
            .any(|poly| poly.iter().any(|p| a.field.dist(*p, q) < ANNULUS_RADIUS))
    };
    a.closed_leaves
        .iter()
        .filter(|l| l.polyline.iter().step_by(4).any(|q| near(*q)))
        .count()
}

/// Closed-leaf counts in the annulus around a degenerate-leaf event and the
/// sign of the degenerate leaf.
pub fn birth_death_profile(
    model: &ContactModel,
    family: &SurfaceFamily,
    event: &MovieEvent,
    cfg: &AnalysisConfig,
) -> Result<BirthDeathProfile> {
    if event.kind != EventKind::DegenerateLeaf {
        return Err(Error::Precondition(
            "birth/death profile needs a degenerate-leaf event".into(),
        ));
    }
    let analyze = |t: f64, cfg: &AnalysisConfig| -> Result<FoliationAnalysis> {
        analyze_field(&FoliationField::pullback(model, &family.frame(t)?), cfg)
    };
    let lo = analyze(event.t_lo, cfg)?;
    let hi = analyze(event.t_hi, cfg)?;
    let rich = if hi.closed_leaves.len() >= lo.closed_leaves.len() {
        &hi
    } else {
        &lo
    };

    // the two closest leaves on the richer side came out of the degenerate one
    let leaves = &rich.closed_leaves;
    let mut pair: Option<(usize, usize, f64)> = None;
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            let d = leaves[j]
                .polyline
                .iter()
                .map(|q| rich.field.dist(*q, leaves[i].base))
                .fold(f64::INFINITY, f64::min);
            if pair.map_or(true, |p| d < p.2) {
                pair = Some((i, j, d));
            }
        }
    }
    let Some((i, j, _)) = pair else {
        return Err(Error::Resolution(format!(
            "no pair of closed leaves near the event in [{}, {}]",
            event.t_lo, event.t_hi
        )));
    };
    let (a, b) = (&leaves[i], &leaves[j]);
    let polys = [a.polyline.as_slice(), b.polyline.as_slice()];
    let counts = |lo: &FoliationAnalysis, hi: &FoliationAnalysis| {
        (annulus_count(lo, &polys), annulus_count(hi, &polys))
    };
    let (count_before, count_after) = counts(&lo, &hi);
    let half = cfg.halved();
    if counts(&analyze(event.t_lo, &half)?, &analyze(event.t_hi, &half)?) != (count_before, count_after) {
        return Err(Error::Resolution(
            "closed-leaf counts change under tolerance halving".into(),
        ));
    }

    // π(s) − s ≈ c (s − s_a)(s − s_b) near the pair: the sign of c is minus
    // the sign of the displacement between the two leaves
    let tr = Transversal::at(&rich.field, a.base, 0.1)
        .ok_or_else(|| Error::Resolution("transversal at a pole".into()))?;
    let sb = closest(crossings(&rich.field, &b.polyline, a.base, tr.tau, 0.1))
        .ok_or_else(|| Error::Resolution("paired leaf misses the transversal".into()))?;
    let rm = ReturnMap::new(&rich.field, tr, cfg.return_rtol, 1.0);
    let g = rm
        .disp(0.5 * sb)
        .ok_or_else(|| Error::Resolution("return map undefined between the paired leaves".into()))?;
    let second_order: i8 = if g < 0.0 { 1 } else { -1 };
    let coorientation = family.coorientation(0.5 * (event.t_lo + event.t_hi))?;
    let sign = second_order * coorientation;
    let diff = count_after as i64 - count_before as i64;
    Ok(BirthDeathProfile {
        count_before,
        count_after,
        sign,
        second_order,
        coorientation,
        consistent: diff == 2 * sign as i64,
        flagged: diff.abs() > 2,
    })
}

/// `n` evenly spaced values from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}
