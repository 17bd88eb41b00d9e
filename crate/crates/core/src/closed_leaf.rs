//! Closed leaves from recurrence of probe leaves and Poincaré return maps.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::error::Result;
use crate::field::FoliationField;
use crate::leaf::{integrate_leaf, unit_field, Direction, LeafLimit, LeafOptions, LeafTargets, PolyIndex};
use crate::ode::{Dopri5, Vec2};
use crate::singularity::find_singularities;
use crate::surface::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosedLeafStatus {
    Attracting,
    Repelling,
    DegeneratePositive,
    DegenerateNegative,
}

impl ClosedLeafStatus {
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            ClosedLeafStatus::DegeneratePositive | ClosedLeafStatus::DegenerateNegative
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedLeaf {
    pub id: usize,
    /// One lap, unwrapped, starting at `base`.
    pub polyline: Vec<[f64; 2]>,
    pub base: [f64; 2],
    /// Unit transversal at `base`, pointing to the left of `Y`.
    pub transversal: [f64; 2],
    /// `π′(0)` of the forward return map on the transversal.
    pub multiplier: f64,
    pub log_multiplier: f64,
    /// Sign of `π″(0)`, recorded for degenerate leaves.
    pub second_order: Option<i8>,
    pub status: ClosedLeafStatus,
    pub length: f64,
    /// `|π(0) − 0|` at the fixed point; nonzero only for resolution-limited
    /// tangential fixed points.
    pub gap: f64,
}

/// A straight transversal `p + s·τ`, `|s| ≤ w`, with `τ` the left normal of `Y(p)`.
#[derive(Clone, Copy, Debug)]
pub struct Transversal {
    pub base: [f64; 2],
    pub yhat: [f64; 2],
    pub tau: [f64; 2],
    pub half_width: f64,
}

impl Transversal {
    pub fn at(field: &FoliationField, p: [f64; 2], half_width: f64) -> Option<Self> {
        let y = unit_field(field, p, 1.0)?;
        Some(Self {
            base: p,
            yhat: y,
            tau: [-y[1], y[0]],
            half_width,
        })
    }

    pub fn point(&self, s: f64) -> [f64; 2] {
        [self.base[0] + s * self.tau[0], self.base[1] + s * self.tau[1]]
    }
}

const MAX_STEPS: usize = 200_000;
const POLE_GUARD: f64 = 1e-3;

/// First-return map to a transversal along the flow of `sign·Y`. The
/// transversal coordinate is the same for both signs, so the backward map
/// is the inverse of the forward one.
pub struct ReturnMap<'a> {
    pub field: &'a FoliationField,
    pub tr: Transversal,
    pub sign: f64,
    pub ode: Dopri5,
    pub max_len: f64,
}

impl<'a> ReturnMap<'a> {
    pub fn new(field: &'a FoliationField, tr: Transversal, rtol: f64, sign: f64) -> Self {
        Self {
            field,
            tr,
            sign,
            ode: Dopri5 {
                rtol,
                atol: rtol * 1e-2,
                h_max: 0.01,
                h_min: 1e-14,
            },
            max_len: 20.0,
        }
    }

    /// Signed distance from the transversal line, positive ahead of it.
    fn g(&self, x: Vec2) -> f64 {
        let d = self.field.delta(self.tr.base, x);
        self.sign * (d[0] * self.tr.yhat[0] + d[1] * self.tr.yhat[1])
    }

    fn s_of(&self, x: Vec2) -> f64 {
        let d = self.field.delta(self.tr.base, x);
        d[0] * self.tr.tau[0] + d[1] * self.tr.tau[1]
    }

    /// `π(s)`, or `None` when the orbit does not come back near the transversal.
    pub fn eval(&self, s: f64) -> Option<f64> {
        self.orbit(s, false).map(|(s1, _, _)| s1)
    }

    /// Returns `(π(s), samples, arclength)`.
    pub fn orbit(&self, s: f64, record: bool) -> Option<(f64, Vec<[f64; 2]>, f64)> {
        let field = self.field;
        let sign = self.sign;
        let mut f = |x: Vec2| unit_field(field, x, sign);
        let mut x = self.tr.point(s);
        let mut pts = if record { vec![x] } else { Vec::new() };
        let mut len = 0.0;
        let mut h = 0.005;
        let w = self.tr.half_width;
        let sphere = field.topology() == Topology::Sphere;
        let mut steps = 0;
        while len < self.max_len && steps < MAX_STEPS {
            steps += 1;
            let step = self.ode.adaptive(&mut f, x, &mut h)?;
            if !field.inside(step.y1) {
                return None;
            }
            // the parametrization degenerates at the poles
            if sphere && (step.y1[1] < POLE_GUARD || step.y1[1] > 1.0 - POLE_GUARD) {
                return None;
            }
            len += (step.y1[0] - step.y0[0]).hypot(step.y1[1] - step.y0[1]);
            let (g0, g1) = (self.g(step.y0), self.g(step.y1));
            if len > 2.0 * w && g0 < 0.0 && g1 >= 0.0 {
                let s1 = self.s_of(step.y1);
                if s1.abs() <= 3.0 * w {
                    let (_, xc) = self.ode.locate(&mut f, &step, |y| self.g(y))?;
                    if self.g(xc).abs() < 1e-9 {
                        if record {
                            pts.push(xc);
                        }
                        return Some((self.s_of(xc), pts, len));
                    }
                }
            }
            x = step.y1;
            if record {
                pts.push(x);
            }
        }
        None
    }

    /// `π(s) − s`.
    pub fn disp(&self, s: f64) -> Option<f64> {
        Some(self.eval(s)? - s)
    }
}

#[derive(Clone, Copy, Debug)]
struct FixedPoint {
    s: f64,
    gap: f64,
}

/// Root of `π(s) − s` on a sign change. A bracket that shrinks onto a jump
/// (the first return switching laps) is rejected.
fn bisect_root(rm: &ReturnMap, mut a: f64, mut ga: f64, mut b: f64, tol: f64) -> Option<f64> {
    let mut gb = rm.disp(b)?;
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        let m = 0.5 * (a + b);
        let gm = rm.disp(m)?;
        if gm == 0.0 {
            return Some(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    (ga.abs().min(gb.abs()) <= tol).then_some(0.5 * (a + b))
}

/// Minimizes `sigma·g` on `[a, b]` by golden-section search.
fn golden_min(rm: &ReturnMap, mut a: f64, mut b: f64, sigma: f64) -> Option<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = sigma * rm.disp(c)?;
    let mut fd = sigma * rm.disp(d)?;
    for _ in 0..60 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sigma * rm.disp(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sigma * rm.disp(d)?;
        }
        if fc < 0.0 || fd < 0.0 {
            break;
        }
    }
    Some(if fc < fd { (c, fc) } else { (d, fd) })
}

fn fixed_points(rm: &ReturnMap, cfg: &AnalysisConfig) -> Vec<FixedPoint> {
    let n = cfg.transversal_samples;
    let w = rm.tr.half_width;
    let ss: Vec<f64> = (0..n).map(|i| -w + 2.0 * w * i as f64 / (n - 1) as f64).collect();
    let gs: Vec<Option<f64>> = ss.par_iter().map(|&s| rm.disp(s)).collect();
    let mut out: Vec<FixedPoint> = Vec::new();
    let push = |out: &mut Vec<FixedPoint>, fp: FixedPoint| {
        if !out.iter().any(|q| (q.s - fp.s).abs() < 1e-7) {
            out.push(fp);
        }
    };
    for i in 0..n - 1 {
        if let (Some(a), Some(b)) = (gs[i], gs[i + 1]) {
            if a == 0.0 {
                push(&mut out, FixedPoint { s: ss[i], gap: 0.0 });
            } else if (a > 0.0) != (b > 0.0) && b != 0.0 {
                if let Some(s) = bisect_root(rm, ss[i], a, ss[i + 1], cfg.degenerate_gap) {
                    push(&mut out, FixedPoint { s, gap: 0.0 });
                }
            }
        }
    }
    for i in 1..n - 1 {
        let (Some(a), Some(b), Some(c)) = (gs[i - 1], gs[i], gs[i + 1]) else {
            continue;
        };
        let same = (a > 0.0) == (b > 0.0) && (b > 0.0) == (c > 0.0);
        if !same || b.abs() > a.abs() || b.abs() > c.abs() {
            continue;
        }
        let sigma = b.signum();
        let Some((sm, vm)) = golden_min(rm, ss[i - 1], ss[i + 1], sigma) else {
            continue;
        };
        if vm < 0.0 {
            // the extremum crosses zero: two nearby fixed points
            for (lo, glo, hi) in [(ss[i - 1], a, sm), (sm, sigma * vm, ss[i + 1])] {
                if let Some(s) = bisect_root(rm, lo, glo, hi, cfg.degenerate_gap) {
                    push(&mut out, FixedPoint { s, gap: 0.0 });
                }
            }
        } else if vm < cfg.degenerate_gap {
            push(&mut out, FixedPoint { s: sm, gap: vm });
        }
    }
    out.sort_by(|a, b| a.s.total_cmp(&b.s));
    out
}

fn build_leaf(rm: &ReturnMap, fp: FixedPoint, cfg: &AnalysisConfig) -> Option<ClosedLeaf> {
    let s = fp.s;
    let (_, mut polyline, length) = rm.orbit(s, true)?;
    if rm.sign < 0.0 {
        polyline.reverse();
    }
    let log_multiplier = log_multiplier(rm.field, &polyline);
    let mut multiplier = log_multiplier.exp();
    let mut second_order = None;
    if (multiplier - 1.0).abs() < 100.0 * cfg.degenerate_band {
        // close to 1 the return map itself is well conditioned and more
        // accurate than the quadrature
        let h = 1e-5;
        let m = 1.0 + (rm.disp(s + h)? - rm.disp(s - h)?) / (2.0 * h);
        multiplier = if rm.sign < 0.0 { 1.0 / m } else { m };
        if (multiplier - 1.0).abs() < cfg.degenerate_band {
            let h2 = 2e-3;
            let g0 = rm.disp(s)?;
            let g2 = (rm.disp(s + h2)? - 2.0 * g0 + rm.disp(s - h2)?) / (h2 * h2);
            // the backward map is the inverse: its second derivative flips
            let g2 = if rm.sign < 0.0 { -g2 } else { g2 };
            second_order = Some(if g2 > 0.0 {
                1
            } else if g2 < 0.0 {
                -1
            } else {
                0
            });
        }
    }
    let status = match second_order {
        Some(sg) if sg >= 0 => ClosedLeafStatus::DegeneratePositive,
        Some(_) => ClosedLeafStatus::DegenerateNegative,
        None if multiplier < 1.0 => ClosedLeafStatus::Attracting,
        None => ClosedLeafStatus::Repelling,
    };
    Some(ClosedLeaf {
        id: 0,
        polyline,
        base: rm.field.wrap(rm.tr.point(s)),
        transversal: rm.tr.tau,
        multiplier,
        log_multiplier,
        second_order,
        status,
        length,
        gap: fp.gap,
    })
}

/// `log π′(0) = ∮ div Y dt = ∮ (div Y / |Y|) ds` along a closed orbit.
pub fn log_multiplier(field: &FoliationField, polyline: &[[f64; 2]]) -> f64 {
    let f = |p: [f64; 2]| -> f64 {
        let q = field.wrap(p);
        let y = field.y_or_zero(q[0], q[1]);
        let n = y[0].hypot(y[1]);
        match field.dbeta(q[0], q[1]) {
            Ok(d) if n > 0.0 => d / n,
            _ => 0.0,
        }
    };
    let vals: Vec<f64> = polyline.iter().map(|p| f(*p)).collect();
    let mut acc = 0.0;
    for i in 0..polyline.len().saturating_sub(1) {
        let (a, b) = (polyline[i], polyline[i + 1]);
        acc += 0.5 * (vals[i] + vals[i + 1]) * (b[0] - a[0]).hypot(b[1] - a[1]);
    }
    acc
}

/// Long-run probe leaf from a grid seed.
#[derive(Clone, Debug)]
pub struct Probe {
    pub seed: [f64; 2],
    pub direction: Direction,
    pub limit: LeafLimit,
    pub end: [f64; 2],
}

pub fn run_probes(field: &FoliationField, targets: &LeafTargets, cfg: &AnalysisConfig) -> Vec<Probe> {
    let n = (cfg.grid / 4).max(4);
    let mut opts = LeafOptions::from_config(cfg);
    opts.budget = cfg.probe_budget;
    opts.sample_spacing = f64::INFINITY;
    let jobs: Vec<([f64; 2], Direction)> = (0..n * n)
        .flat_map(|k| {
            let seed = [
                ((k % n) as f64 + 0.5) / n as f64,
                ((k / n) as f64 + 0.5) / n as f64,
            ];
            [(seed, Direction::Forward), (seed, Direction::Backward)]
        })
        .collect();
    jobs.par_iter()
        .filter_map(|&(seed, direction)| {
            unit_field(field, seed, 1.0)?;
            let path = integrate_leaf(field, targets, seed, direction, &opts);
            Some(Probe {
                seed,
                direction,
                limit: path.limit,
                end: path.end(),
            })
        })
        .collect()
}

/// Closed leaves near the end points of unresolved probes.
pub fn closed_leaves_from_probes(
    field: &FoliationField,
    probes: &[Probe],
    cfg: &AnalysisConfig,
    warnings: &mut Vec<String>,
) -> Vec<ClosedLeaf> {
    let w = cfg.transversal_half_width;
    let mut leaves: Vec<ClosedLeaf> = Vec::new();
    let mut index = PolyIndex::new(32);
    let mut dead: Vec<[f64; 2]> = Vec::new();
    let mut examined = 0;
    for probe in probes.iter().filter(|p| p.limit == LeafLimit::BudgetExhausted) {
        let p = field.wrap(probe.end);
        if index.nearest(field, p, w).is_some() || dead.iter().any(|d| field.dist(*d, p) < 0.5 * w) {
            continue;
        }
        if examined >= cfg.max_candidates {
            warnings.push(format!(
                "closed-leaf search stopped after {} recurrence candidates",
                cfg.max_candidates
            ));
            break;
        }
        examined += 1;
        let Some(tr) = Transversal::at(field, p, w) else {
            dead.push(p);
            continue;
        };
        let rm = ReturnMap::new(field, tr, cfg.return_rtol, probe.direction.sign());
        let fps = fixed_points(&rm, cfg);
        if fps.is_empty() {
            dead.push(p);
        }
        for fp in fps {
            match build_leaf(&rm, fp, cfg) {
                Some(leaf) => {
                    if index.nearest(field, leaf.base, 1e-4).is_none() {
                        index.add_polyline(field, &leaf.polyline, true, leaves.len());
                        leaves.push(leaf);
                    }
                }
                None => warnings.push(format!(
                    "return map at {:?} did not converge; candidate dropped",
                    rm.tr.point(fp.s)
                )),
            }
        }
    }
    leaves.sort_by(|a, b| {
        (a.base[1], a.base[0])
            .partial_cmp(&(b.base[1], b.base[0]))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (i, l) in leaves.iter_mut().enumerate() {
        l.id = i;
    }
    leaves
}

/// Stand-alone closed-leaf detection (singularities are located first so
/// probes terminate on them).
pub fn detect_closed_leaves(field: &FoliationField, cfg: &AnalysisConfig) -> Result<Vec<ClosedLeaf>> {
    let (sings, loci) = find_singularities(field, cfg)?;
    let mut targets = LeafTargets::new(&sings);
    for (i, l) in loci.iter().enumerate() {
        targets.loci.add_polyline(field, &l.points, l.closed, i);
    }
    let probes = run_probes(field, &targets, cfg);
    let mut warnings = Vec::new();
    Ok(closed_leaves_from_probes(field, &probes, cfg, &mut warnings))
}
