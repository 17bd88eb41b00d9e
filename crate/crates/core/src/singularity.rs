//! Zeros of the characteristic field: search, classification and the
//! non-isolated singular curves of non-generic foliations.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::field::FoliationField;
use crate::surface::{Pole, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    Node,
    Saddle,
    SaddleNode,
    Focus,
    DegenerateCirclePoint,
}

impl SingularityKind {
    /// Nodes and foci play the same role in every graph construction.
    pub fn is_nodal(self) -> bool {
        matches!(self, SingularityKind::Node | SingularityKind::Focus)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Eigen {
    /// `(re, im)` pairs, real eigenvalues sorted ascending.
    pub values: [[f64; 2]; 2],
    /// Unit eigenvectors for real eigenvalues, matching `values`.
    pub vectors: Option<[[f64; 2]; 2]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Singularity {
    pub id: usize,
    pub location: [f64; 2],
    /// Set for sphere poles; their eigen data live in the pole chart.
    pub pole: Option<Pole>,
    pub kind: SingularityKind,
    pub sign: i8,
    pub eigen: Eigen,
    pub divergence: f64,
}

impl Singularity {
    pub fn is_saddle(&self) -> bool {
        self.kind == SingularityKind::Saddle
    }

    /// Index of the singularity as a zero of a planar vector field.
    pub fn index(&self) -> i64 {
        match self.kind {
            SingularityKind::Saddle => -1,
            SingularityKind::SaddleNode | SingularityKind::DegenerateCirclePoint => 0,
            _ => 1,
        }
    }
}

/// A curve of non-isolated zeros.
#[derive(Clone, Debug, Serialize)]
pub struct SingularLocus {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    /// Largest `|Y|` along the traced polyline.
    pub residual: f64,
}

/// Classifies the zero `p` from the Jacobian of `Y`.
pub fn classify_singularity(
    field: &FoliationField,
    p: [f64; 2],
    cfg: &AnalysisConfig,
) -> Result<(SingularityKind, i8, Eigen, f64)> {
    let y = field.y(p[0], p[1])?;
    let scale = jacobian_scale(field, p)?;
    if y[0].hypot(y[1]) > 1e-6 * scale.max(1.0) {
        return Err(Error::Precondition(format!(
            "classify_singularity: |Y| = {:e} is not small at {p:?}",
            y[0].hypot(y[1])
        )));
    }
    let j = field.jacobian(p[0], p[1], 1e-6)?;
    classify_jacobian(&j, p, cfg)
}

fn jacobian_scale(field: &FoliationField, p: [f64; 2]) -> Result<f64> {
    Ok(field.jacobian(p[0], p[1], 1e-6)?.norm())
}

pub fn classify_jacobian(
    j: &Matrix2<f64>,
    location: [f64; 2],
    cfg: &AnalysisConfig,
) -> Result<(SingularityKind, i8, Eigen, f64)> {
    let tr = j.trace();
    let det = j.determinant();
    let norm = j.norm().max(f64::MIN_POSITIVE);
    if tr.abs() <= cfg.divergence_tol * norm.max(1.0) {
        return Err(Error::ZeroDivergence {
            location,
            trace: tr,
            tol: cfg.divergence_tol,
        });
    }
    let sign = if tr > 0.0 { 1 } else { -1 };
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        let im = (-disc).sqrt() / 2.0;
        let eigen = Eigen {
            values: [[tr / 2.0, -im], [tr / 2.0, im]],
            vectors: None,
        };
        return Ok((SingularityKind::Focus, sign, eigen, tr));
    }
    let s = disc.sqrt();
    let (l1, l2) = ((tr - s) / 2.0, (tr + s) / 2.0);
    let vectors = [eigvec(j, l1), eigvec(j, l2)];
    let eigen = Eigen {
        values: [[l1, 0.0], [l2, 0.0]],
        vectors: Some(vectors),
    };
    let kind = if l1.abs().min(l2.abs()) <= 1e-6 * norm {
        SingularityKind::SaddleNode
    } else if l1 * l2 < 0.0 {
        SingularityKind::Saddle
    } else {
        SingularityKind::Node
    };
    Ok((kind, sign, eigen, tr))
}

fn eigvec(j: &Matrix2<f64>, l: f64) -> [f64; 2] {
    let (a, b, c, d) = (j[(0, 0)] - l, j[(0, 1)], j[(1, 0)], j[(1, 1)] - l);
    // rows of J − λI are both orthogonal to the eigenvector; use the larger
    let v = if a.hypot(b) >= c.hypot(d) {
        [-b, a]
    } else {
        [-d, c]
    };
    let n = v[0].hypot(v[1]);
    if n == 0.0 {
        [1.0, 0.0]
    } else {
        [v[0] / n, v[1] / n]
    }
}

enum Seed {
    Point([f64; 2], Matrix2<f64>),
    Locus([f64; 2]),
}

fn newton(field: &FoliationField, p0: [f64; 2], cell: f64, cfg: &AnalysisConfig) -> Option<Seed> {
    let mut p = p0;
    for _ in 0..60 {
        let y = field.y(p[0], p[1]).ok()?;
        let j = field.jacobian(p[0], p[1], 1e-7).ok()?;
        let ny = y[0].hypot(y[1]);
        let sv = j.singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if ny < cfg.newton_tol {
            if smin <= 1e-6 * smax {
                return Some(Seed::Locus(p));
            }
            // one extra correction for accuracy
            return Some(Seed::Point(field.wrap(p), j));
        }
        let step = if smin > 1e-9 * smax {
            j.lu().solve(&Vector2::new(y[0], y[1]))?
        } else {
            j.pseudo_inverse(1e-9 * smax).ok()? * Vector2::new(y[0], y[1])
        };
        let mut dx = [-step[0], -step[1]];
        let len = dx[0].hypot(dx[1]);
        if !len.is_finite() {
            return None;
        }
        if len > cell {
            dx = [dx[0] * cell / len, dx[1] * cell / len];
        }
        p = [p[0] + dx[0], p[1] + dx[1]];
        if !field.inside(p) {
            return None;
        }
    }
    None
}

/// All isolated zeros of `Y` (poles included) and the curves of non-isolated
/// zeros. Results are sorted by location and numbered in that order.
pub fn find_singularities(
    field: &FoliationField,
    cfg: &AnalysisConfig,
) -> Result<(Vec<Singularity>, Vec<SingularLocus>)> {
    let n = cfg.grid;
    let cell = 1.0 / n as f64;
    let pole_margin = 1e-6;
    let seeds: Vec<[f64; 2]> = (0..n * n)
        .map(|k| [((k % n) as f64 + 0.5) * cell, ((k / n) as f64 + 0.5) * cell])
        .collect();
    let results: Vec<Option<Seed>> = seeds.par_iter().map(|&s| newton(field, s, cell, cfg)).collect();

    let mut points: Vec<([f64; 2], Matrix2<f64>)> = Vec::new();
    let mut locus_seeds: Vec<[f64; 2]> = Vec::new();
    for r in results.into_iter().flatten() {
        match r {
            Seed::Point(p, j) => {
                if field.topology() == Topology::Sphere && (p[1] < pole_margin || p[1] > 1.0 - pole_margin) {
                    continue;
                }
                if !points.iter().any(|(q, _)| field.dist(*q, p) < cfg.merge_radius) {
                    points.push((p, j));
                }
            }
            Seed::Locus(p) => locus_seeds.push(field.wrap(p)),
        }
    }

    let mut loci: Vec<SingularLocus> = Vec::new();
    let locus_step = 1.0 / 256.0;
    for s in locus_seeds {
        let near_existing = loci
            .iter()
            .any(|l| l.points.iter().any(|q| field.dist(*q, s) < 4.0 * locus_step));
        if !near_existing {
            if let Some(l) = trace_locus(field, s, locus_step, cfg) {
                loci.push(l);
            }
        }
    }
    // isolated points lying on a traced locus are part of it
    points.retain(|(p, _)| {
        !loci
            .iter()
            .any(|l| l.points.iter().any(|q| field.dist(*q, *p) < 2.0 * locus_step))
    });

    let mut out = Vec::new();
    for (p, j) in points {
        let (kind, sign, eigen, divergence) = classify_jacobian(&j, p, cfg)?;
        out.push(Singularity {
            id: 0,
            location: p,
            pole: None,
            kind,
            sign,
            eigen,
            divergence,
        });
    }
    if field.topology() == Topology::Sphere {
        for pole in [Pole::South, Pole::North] {
            let y = field.pole_y(pole, 0.0, 0.0)?;
            if y[0].hypot(y[1]) < cfg.newton_tol {
                let j = field.pole_jacobian(pole, 1e-6)?;
                let loc = [0.0, pole.v()];
                let (kind, sign, eigen, divergence) = classify_jacobian(&j, loc, cfg)?;
                out.push(Singularity {
                    id: 0,
                    location: loc,
                    pole: Some(pole),
                    kind,
                    sign,
                    eigen,
                    divergence,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (a.location[1], a.location[0])
            .partial_cmp(&(b.location[1], b.location[0]))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (i, s) in out.iter_mut().enumerate() {
        s.id = i;
    }
    Ok((out, loci))
}

/// Pseudo-arclength continuation of a zero curve through `p0`.
fn trace_locus(
    field: &FoliationField,
    p0: [f64; 2],
    step: f64,
    cfg: &AnalysisConfig,
) -> Option<SingularLocus> {
    let kernel = |p: [f64; 2]| -> Option<([f64; 2], Matrix2<f64>)> {
        let j = field.jacobian(p[0], p[1], 1e-7).ok()?;
        let svd = j.svd(false, true);
        let vt = svd.v_t?;
        let k = if svd.singular_values[0] < svd.singular_values[1] {
            0
        } else {
            1
        };
        Some(([vt[(k, 0)], vt[(k, 1)]], j))
    };
    let correct = |mut p: [f64; 2]| -> Option<[f64; 2]> {
        for _ in 0..20 {
            let y = field.y(p[0], p[1]).ok()?;
            if y[0].hypot(y[1]) < cfg.newton_tol {
                return Some(p);
            }
            let j = field.jacobian(p[0], p[1], 1e-7).ok()?;
            let smax = j.singular_values().max();
            let d = j.pseudo_inverse(1e-6 * smax).ok()? * Vector2::new(y[0], y[1]);
            p = [p[0] - d[0], p[1] - d[1]];
        }
        let y = field.y(p[0], p[1]).ok()?;
        (y[0].hypot(y[1]) < 1e3 * cfg.newton_tol).then_some(p)
    };
    let mut forward = vec![p0];
    let mut residual: f64 = 0.0;
    let mut closed = false;
    let (k0, _) = kernel(p0)?;
    let mut dir = k0;
    let mut p = p0;
    let max_steps = (64.0 / step) as usize;
    for i in 0..max_steps {
        let q = [p[0] + step * dir[0], p[1] + step * dir[1]];
        let Some(q) = correct(q) else { break };
        if !field.inside(q) {
            break;
        }
        let y = field.y(q[0], q[1]).ok()?;
        residual = residual.max(y[0].hypot(y[1]));
        let Some((k, _)) = kernel(q) else { break };
        dir = if k[0] * dir[0] + k[1] * dir[1] >= 0.0 {
            k
        } else {
            [-k[0], -k[1]]
        };
        p = q;
        if i > 2 && field.dist(p, p0) < 0.75 * step {
            closed = true;
            break;
        }
        forward.push(field.wrap(p));
    }
    if !closed {
        // extend in the other direction
        let mut back = Vec::new();
        let mut dir = [-k0[0], -k0[1]];
        let mut p = p0;
        for _ in 0..max_steps {
            let q = [p[0] + step * dir[0], p[1] + step * dir[1]];
            let Some(q) = correct(q) else { break };
            if !field.inside(q) {
                break;
            }
            let Some((k, _)) = kernel(q) else { break };
            dir = if k[0] * dir[0] + k[1] * dir[1] >= 0.0 {
                k
            } else {
                [-k[0], -k[1]]
            };
            p = q;
            back.push(field.wrap(p));
        }
        back.reverse();
        back.extend(forward);
        forward = back;
    }
    (forward.len() >= 3).then_some(SingularLocus {
        points: forward,
        closed,
        residual,
    })
}
