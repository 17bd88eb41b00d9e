//! Integration of individual leaves with limit classification.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::field::FoliationField;
use crate::ode::{Dopri5, Vec2};
use crate::singularity::Singularity;
use crate::surface::Pole;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum LeafLimit {
    Singularity(usize),
    ClosedLeaf(usize),
    /// A curve of non-isolated singularities.
    Locus(usize),
    BoundaryExit,
    BudgetExhausted,
    /// The field vanished at an unlisted point.
    Stalled,
}

impl LeafLimit {
    pub fn is_resolved(self) -> bool {
        !matches!(self, LeafLimit::BudgetExhausted | LeafLimit::Stalled)
    }
}

/// Closest approach of a leaf to a saddle it passed without being captured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaddlePass {
    pub saddle: usize,
    /// Side of the leaf on which the saddle lies: `+1` left, `−1` right.
    pub side: i8,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafPath {
    /// Samples in unwrapped parameter coordinates, in direction of travel.
    pub points: Vec<[f64; 2]>,
    pub direction: Direction,
    pub limit: LeafLimit,
    pub arclength: f64,
    #[serde(skip)]
    pub passes: Vec<SaddlePass>,
}

impl LeafPath {
    pub fn end(&self) -> [f64; 2] {
        *self.points.last().expect("leaf paths are non-empty")
    }
}

/// Uniform bucket grid over the parameter square holding polyline segments.
#[derive(Clone, Debug)]
pub struct PolyIndex {
    n: usize,
    buckets: Vec<Vec<usize>>,
    /// Segments as (start, minimal-image offset, owner).
    segments: Vec<([f64; 2], [f64; 2], usize)>,
}

impl PolyIndex {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            buckets: vec![Vec::new(); n * n],
            segments: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn add_polyline(&mut self, field: &FoliationField, pts: &[[f64; 2]], closed: bool, owner: usize) {
        let m = pts.len();
        if m == 0 {
            return;
        }
        let count = if closed { m } else { m.saturating_sub(1) };
        if m == 1 {
            self.add_segment(field, pts[0], [0.0, 0.0], owner);
        }
        for i in 0..count {
            let a = field.wrap(pts[i]);
            let d = field.delta(pts[i], pts[(i + 1) % m]);
            self.add_segment(field, a, d, owner);
        }
    }

    fn add_segment(&mut self, field: &FoliationField, a: [f64; 2], d: [f64; 2], owner: usize) {
        let idx = self.segments.len();
        self.segments.push((a, d, owner));
        let n = self.n as f64;
        let lo = [a[0].min(a[0] + d[0]), a[1].min(a[1] + d[1])];
        let hi = [a[0].max(a[0] + d[0]), a[1].max(a[1] + d[1])];
        let (i0, i1) = ((lo[0] * n).floor() as i64, (hi[0] * n).floor() as i64);
        let (j0, j1) = ((lo[1] * n).floor() as i64, (hi[1] * n).floor() as i64);
        for i in i0..=i1 {
            for j in j0..=j1 {
                if let Some(b) = self.bucket(field, i, j) {
                    if !self.buckets[b].contains(&idx) {
                        self.buckets[b].push(idx);
                    }
                }
            }
        }
    }

    fn bucket(&self, field: &FoliationField, i: i64, j: i64) -> Option<usize> {
        let n = self.n as i64;
        let wrap = |k: i64, periodic: bool| -> Option<usize> {
            if periodic {
                Some(k.rem_euclid(n) as usize)
            } else if (0..n).contains(&k) {
                Some(k as usize)
            } else if k == n {
                Some((n - 1) as usize)
            } else {
                None
            }
        };
        let bi = wrap(i, field.wraps_u())?;
        let bj = wrap(j, field.wraps_v())?;
        Some(bj * self.n + bi)
    }

    /// Nearest segment owner within `radius` (which should not exceed the
    /// bucket width by much; neighbouring buckets are scanned).
    pub fn nearest(&self, field: &FoliationField, p: [f64; 2], radius: f64) -> Option<(usize, f64)> {
        let p = field.wrap(p);
        let n = self.n as f64;
        let reach = (radius * n).ceil() as i64;
        let (ci, cj) = ((p[0] * n).floor() as i64, (p[1] * n).floor() as i64);
        let mut best: Option<(usize, f64)> = None;
        for i in ci - reach..=ci + reach {
            for j in cj - reach..=cj + reach {
                let Some(b) = self.bucket(field, i, j) else {
                    continue;
                };
                for &s in &self.buckets[b] {
                    let (a, d, owner) = self.segments[s];
                    let q = field.delta(a, p);
                    let dist = point_segment_distance(q, d);
                    if dist <= radius && best.map_or(true, |(_, bd)| dist < bd) {
                        best = Some((owner, dist));
                    }
                }
            }
        }
        best
    }
}

/// Distance from `q` to the segment from the origin to `d`.
pub fn point_segment_distance(q: [f64; 2], d: [f64; 2]) -> f64 {
    let dd = d[0] * d[0] + d[1] * d[1];
    let t = if dd == 0.0 {
        0.0
    } else {
        ((q[0] * d[0] + q[1] * d[1]) / dd).clamp(0.0, 1.0)
    };
    (q[0] - t * d[0]).hypot(q[1] - t * d[1])
}

/// Everything a leaf can terminate on.
#[derive(Clone, Debug)]
pub struct LeafTargets {
    pub points: Vec<(usize, [f64; 2], Option<Pole>, bool)>,
    pub closed: PolyIndex,
    pub loci: PolyIndex,
}

impl LeafTargets {
    pub fn new(singularities: &[Singularity]) -> Self {
        Self {
            points: singularities
                .iter()
                .map(|s| (s.id, s.location, s.pole, s.is_saddle()))
                .collect(),
            closed: PolyIndex::new(64),
            loci: PolyIndex::new(64),
        }
    }

    pub fn empty() -> Self {
        Self::new(&[])
    }
}

#[derive(Clone, Debug)]
pub struct LeafOptions {
    pub capture_eps: f64,
    pub budget: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Singularity ignored until the leaf first leaves its capture ball.
    pub ignore: Option<usize>,
    /// Saddles passed within this distance are recorded in `passes`.
    pub pass_radius: f64,
    /// Keep every accepted step (otherwise thinned to `sample_spacing`).
    pub sample_spacing: f64,
}

impl LeafOptions {
    pub fn from_config(cfg: &AnalysisConfig) -> Self {
        Self {
            capture_eps: cfg.capture_eps,
            budget: cfg.budget,
            rtol: cfg.rtol,
            atol: cfg.atol,
            ignore: None,
            pass_radius: cfg.pass_radius,
            sample_spacing: 0.0,
        }
    }
}

/// The normalized field `±Y/|Y|` at an unwrapped point.
pub fn unit_field(field: &FoliationField, p: Vec2, sign: f64) -> Option<Vec2> {
    let q = field.wrap(p);
    let y = field.y(q[0], q[1]).ok()?;
    let n = y[0].hypot(y[1]);
    if n < 1e-14 || !n.is_finite() {
        return None;
    }
    Some([sign * y[0] / n, sign * y[1] / n])
}

pub fn integrate_leaf(
    field: &FoliationField,
    targets: &LeafTargets,
    seed: [f64; 2],
    direction: Direction,
    opts: &LeafOptions,
) -> LeafPath {
    let sign = direction.sign();
    let ode = Dopri5 {
        rtol: opts.rtol,
        atol: opts.atol,
        h_max: 0.01,
        h_min: 1e-13,
    };
    let mut f = |p: Vec2| unit_field(field, p, sign);
    let mut points = vec![seed];
    let mut y = seed;
    let mut h = ode.h_max;
    let mut length = 0.0;
    let mut ignoring = opts.ignore;
    let mut passes: Vec<SaddlePass> = Vec::new();
    let mut open_pass: Option<SaddlePass> = None;
    let mut since_sample = 0.0;

    let limit = loop {
        if length >= opts.budget {
            break LeafLimit::BudgetExhausted;
        }
        let Some(step) = ode.adaptive(&mut f, y, &mut h) else {
            break if field.inside(y) {
                LeafLimit::Stalled
            } else {
                LeafLimit::BoundaryExit
            };
        };
        let seg = [step.y1[0] - step.y0[0], step.y1[1] - step.y0[1]];
        length += seg[0].hypot(seg[1]);
        since_sample += seg[0].hypot(seg[1]);
        y = step.y1;
        if since_sample >= opts.sample_spacing {
            points.push(y);
            since_sample = 0.0;
        }
        if !field.inside(y) {
            break LeafLimit::BoundaryExit;
        }

        // singularities
        let mut hit = None;
        for &(id, loc, pole, is_saddle) in &targets.points {
            let dist = match pole {
                Some(p) => (field.wrap(y)[1] - p.v()).abs(),
                None => point_segment_distance(field.delta(step.y0, loc), seg),
            };
            if ignoring == Some(id) {
                if dist > 2.0 * opts.capture_eps {
                    ignoring = None;
                }
                continue;
            }
            if dist < opts.capture_eps {
                hit = Some(id);
                break;
            }
            if is_saddle && pole.is_none() && dist < opts.pass_radius {
                let d = field.delta(step.y0, loc);
                let cross = seg[0] * d[1] - seg[1] * d[0];
                let side = if cross >= 0.0 { 1 } else { -1 };
                match &mut open_pass {
                    Some(op) if op.saddle == id => {
                        if dist < op.distance {
                            op.distance = dist;
                            op.side = side;
                        }
                    }
                    _ => {
                        if let Some(op) = open_pass.take() {
                            passes.push(op);
                        }
                        open_pass = Some(SaddlePass {
                            saddle: id,
                            side,
                            distance: dist,
                        });
                    }
                }
            } else if matches!(open_pass, Some(op) if op.saddle == id) {
                passes.extend(open_pass.take());
            }
        }
        if let Some(id) = hit {
            break LeafLimit::Singularity(id);
        }
        if !targets.closed.is_empty() {
            if let Some((id, _)) = targets.closed.nearest(field, y, opts.capture_eps) {
                break LeafLimit::ClosedLeaf(id);
            }
        }
        if !targets.loci.is_empty() {
            if let Some((id, _)) = targets.loci.nearest(field, y, opts.capture_eps) {
                break LeafLimit::Locus(id);
            }
        }
    };
    if let Some(op) = open_pass {
        passes.push(op);
    }
    if points.last() != Some(&y) {
        points.push(y);
    }
    LeafPath {
        points,
        direction,
        limit,
        arclength: length,
        passes,
    }
}
