//! Dividing sets as the zero level of `d₋ − d₊`, where `d₊` is the backward
//! flow distance to a neighbourhood of `G₊` and `d₋` the forward flow
//! distance to a neighbourhood of `G₋`. The difference decreases at unit
//! rate along every leaf, so its zero level is transverse to the foliation.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::graph::{giroux_graph, GirouxGraph};
use crate::analysis::FoliationAnalysis;
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::field::FoliationField;
use crate::leaf::{unit_field, PolyIndex};
use crate::ode::Dopri5;
use crate::surface::{Pole, Topology};

const H_MAX: f64 = 0.02;
/// Flow distance after which a raster sample counts as unreached.
const FLOW_BUDGET: f64 = 12.0;
/// Smallest accepted angle between `Y` and a dividing curve, in radians.
pub const MIN_MARGIN: f64 = 1e-3;
const MARGIN_SAMPLES: usize = 100;

#[derive(Clone, Debug, Serialize)]
pub struct DividingCurve {
    /// Closed polyline in unwrapped parameter coordinates, `S₊` on its left.
    pub points: Vec<[f64; 2]>,
    /// Net number of turns in `u` and `v`.
    pub winding: [i64; 2],
    /// Smallest signed angle between the curve and `Y`; positive when `Y`
    /// crosses from `S₊` to `S₋`.
    pub margin: f64,
    pub plus_region: usize,
    pub minus_region: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Region {
    pub sign: i8,
    /// Raster samples in the region.
    pub samples: usize,
    /// Euler characteristic of the raster cell complex of the region.
    pub euler_characteristic: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DividingSet {
    pub topology: Topology,
    pub components: Vec<DividingCurve>,
    pub regions: Vec<Region>,
    /// `χ(S₊)` and `χ(S₋)` from the Giroux graph.
    pub chi_plus: i64,
    pub chi_minus: i64,
    /// The same from the raster regions.
    pub raster_chi_plus: i64,
    pub raster_chi_minus: i64,
    /// `Σ sign·index` over the singularities.
    pub index_sum: i64,
    pub grid: usize,
    pub neighborhood_radius: f64,
    #[serde(skip)]
    values: Vec<f64>,
}

impl DividingSet {
    /// Combinatorial dividing set with no geometry; used for surfaces
    /// without a parametrization.
    pub fn combinatorial(topology: Topology, graph: &GirouxGraph, index_sum: i64) -> Self {
        let chi_plus = graph.g_plus.euler_characteristic();
        let chi_minus = graph.g_minus.euler_characteristic();
        Self {
            topology,
            components: Vec::new(),
            regions: Vec::new(),
            chi_plus,
            chi_minus,
            raster_chi_plus: chi_plus,
            raster_chi_minus: chi_minus,
            index_sum,
            grid: 0,
            neighborhood_radius: 0.0,
            values: Vec::new(),
        }
    }

    /// `+1` in `S₊`, `−1` in `S₋`, from the raster by bilinear interpolation.
    pub fn side_at(&self, p: [f64; 2]) -> Option<i8> {
        let n = self.grid;
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let x = p[0].rem_euclid(1.0) * nf - 0.5;
        let y = if self.topology == Topology::Torus {
            p[1].rem_euclid(1.0)
        } else {
            p[1].clamp(0.5 / nf, 1.0 - 0.5 / nf)
        } * nf
            - 0.5;
        let (i0, j0) = (x.floor(), y.floor());
        let (tx, ty) = (x - i0, y - j0);
        let wrap = |k: f64| (k as i64).rem_euclid(n as i64) as usize;
        let (i0, i1) = (wrap(i0), wrap(i0 + 1.0));
        let (j0, j1) = if self.topology == Topology::Torus {
            (wrap(j0), wrap(j0 + 1.0))
        } else {
            let j = (j0.max(0.0) as usize).min(n - 1);
            (j, (j + 1).min(n - 1))
        };
        let f = |i: usize, j: usize| clamp_value(self.values[j * n + i]);
        let v = (1.0 - tx) * (1.0 - ty) * f(i0, j0)
            + tx * (1.0 - ty) * f(i1, j0)
            + tx * ty * f(i1, j1)
            + (1.0 - tx) * ty * f(i0, j1);
        if v.is_nan() {
            None
        } else {
            Some(if v > 0.0 { 1 } else { -1 })
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn build_dividing_set(a: &FoliationAnalysis, cfg: &AnalysisConfig) -> Result<DividingSet> {
    let graph = giroux_graph(a)?;
    dividing_set_from_graph(a, &graph, cfg)
}

pub fn dividing_set_from_graph(
    a: &FoliationAnalysis,
    graph: &GirouxGraph,
    cfg: &AnalysisConfig,
) -> Result<DividingSet> {
    let topology = a.field.topology();
    if !matches!(topology, Topology::Torus | Topology::Sphere | Topology::Annulus) {
        return Err(Error::UnsupportedTopology(format!(
            "dividing sets are built on tori, annuli and spheres, not {topology:?}"
        )));
    }
    let n = cfg.dividing_grid;
    let min_r = 1.5 / n as f64;
    let mut r = cfg.neighborhood_radius.max(min_r);
    loop {
        let ds = attempt(a, graph, n, r)?;
        if ds.min_margin() > MIN_MARGIN {
            if ds.raster_chi_plus != ds.chi_plus || ds.raster_chi_minus != ds.chi_minus {
                return Err(Error::Inconsistent(format!(
                    "regions of the dividing set have χ(S₊), χ(S₋) = {}, {} but the Giroux graph gives {}, {}",
                    ds.raster_chi_plus, ds.raster_chi_minus, ds.chi_plus, ds.chi_minus
                )));
            }
            return Ok(ds);
        }
        if r / 2.0 < min_r {
            return Err(Error::Resolution(format!(
                "dividing curves not transverse (margin {:.3e}) down to neighbourhood radius {r:.3e}",
                ds.min_margin()
            )));
        }
        r /= 2.0;
    }
}

/// Singularities, separatrices and closed leaves of one Giroux graph side.
struct Tube {
    points: Vec<([f64; 2], Option<Pole>)>,
    lines: PolyIndex,
}

impl Tube {
    fn new(a: &FoliationAnalysis, graph: &GirouxGraph, sign: i8, reach: f64) -> Self {
        let side = graph.side(sign);
        let field = &a.field;
        let points = a
            .singularities
            .iter()
            .filter(|s| side.vertices.contains(&s.id))
            .map(|s| (s.location, s.pole))
            .collect();
        let mut lines = PolyIndex::new(((1.0 / reach).floor() as usize).clamp(4, 64));
        for (k, e) in side.edges.iter().enumerate() {
            if let Some(i) = e.separatrix {
                lines.add_polyline(field, &a.separatrices[i].path.points, false, k);
            }
        }
        for l in a.closed_leaves.iter().filter(|l| side.cycles.contains(&l.id)) {
            lines.add_polyline(field, &l.polyline, true, l.id);
        }
        Self { points, lines }
    }

    /// Distance to the nearest object, or infinity beyond `reach`.
    fn distance(&self, field: &FoliationField, p: [f64; 2], reach: f64) -> f64 {
        let mut d = f64::INFINITY;
        for &(loc, pole) in &self.points {
            let x = match pole {
                Some(pl) => (field.wrap(p)[1] - pl.v()).abs(),
                None => field.dist(p, loc),
            };
            d = d.min(x);
        }
        if let Some((_, x)) = self.lines.nearest(field, p, reach) {
            d = d.min(x);
        }
        d
    }
}

/// Arclength along `sign·Y` from `p` to the `r`-neighbourhood of the tube.
fn flow_distance(field: &FoliationField, tube: &Tube, p: [f64; 2], sign: f64, r: f64) -> Option<f64> {
    let reach = r + 2.0 * H_MAX;
    let mut d0 = tube.distance(field, p, reach);
    if d0 < r {
        return Some(0.0);
    }
    let ode = Dopri5 {
        rtol: 1e-7,
        atol: 1e-9,
        h_max: H_MAX,
        h_min: 1e-10,
    };
    let mut f = |x: [f64; 2]| unit_field(field, x, sign);
    let mut y = p;
    let mut h = H_MAX;
    let mut len = 0.0;
    while len < FLOW_BUDGET {
        let step = ode.adaptive(&mut f, y, &mut h)?;
        if !field.inside(step.y1) {
            return None;
        }
        let seg = (step.y1[0] - step.y0[0]).hypot(step.y1[1] - step.y0[1]);
        let d1 = tube.distance(field, step.y1, reach);
        if d1 < r {
            let theta = if d0.is_finite() && d0 > d1 {
                ((d0 - r) / (d0 - d1)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            return Some(len + theta * seg);
        }
        len += seg;
        y = step.y1;
        d0 = d1;
    }
    None
}

fn clamp_value(f: f64) -> f64 {
    f.clamp(-FLOW_BUDGET, FLOW_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum EdgeKey {
    /// Lattice edge from node `(i, j)` to `(i + 1, j)`.
    H(usize, usize),
    /// Lattice edge from node `(i, j)` to `(i, j + 1)`.
    V(usize, usize),
}

struct Segment {
    start: EdgeKey,
    end: EdgeKey,
    p0: [f64; 2],
    p1: [f64; 2],
    /// Lattice nodes on the plus and minus side of the start edge.
    plus_node: usize,
    minus_node: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn attempt(a: &FoliationAnalysis, graph: &GirouxGraph, n: usize, r: f64) -> Result<DividingSet> {
    let field = &a.field;
    let topology = field.topology();
    let torus = topology == Topology::Torus;
    let reach = r + 2.0 * H_MAX;
    let plus = Tube::new(a, graph, 1, reach);
    let minus = Tube::new(a, graph, -1, reach);
    let nf = n as f64;
    let center = |i: usize, j: usize| [(i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf];

    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let p = center(k % n, k / n);
            let dp = flow_distance(field, &plus, p, -1.0, r).unwrap_or(f64::INFINITY);
            let dm = flow_distance(field, &minus, p, 1.0, r).unwrap_or(f64::INFINITY);
            if dp.is_infinite() && dm.is_infinite() {
                f64::NAN
            } else {
                dm - dp
            }
        })
        .collect();
    let unresolved = values.iter().filter(|v| v.is_nan()).count();
    if unresolved > 0 {
        return Err(Error::Resolution(format!(
            "{unresolved} raster samples reach neither G₊ nor G₋"
        )));
    }
    let is_plus = |k: usize| values[k] > 0.0;
    let node = |i: usize, j: usize| j * n + i;

    let rows = if torus { n } else { n - 1 };
    let mut segments: Vec<Segment> = Vec::new();
    let mut ambiguous: Vec<(usize, usize, bool)> = Vec::new();
    for j in 0..rows {
        for i in 0..n {
            let (ip, jp) = ((i + 1) % n, (j + 1) % n);
            let c = [node(i, j), node(ip, j), node(ip, jp), node(i, jp)];
            let (x0, y0) = ((i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf);
            let (x1, y1) = (x0 + 1.0 / nf, y0 + 1.0 / nf);
            let xy = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
            let keys = [
                EdgeKey::H(i, j),
                EdgeKey::V(ip, j),
                EdgeKey::H(i, jp),
                EdgeKey::V(i, j),
            ];
            let fv = c.map(|k| clamp_value(values[k]));
            let pl = c.map(is_plus);
            // crossings in counterclockwise order: (edge, point, plus-to-minus, plus node, minus node)
            let mut cr = Vec::with_capacity(4);
            for e in 0..4 {
                let (s, t) = (e, (e + 1) % 4);
                if pl[s] != pl[t] {
                    let w = fv[s] / (fv[s] - fv[t]);
                    let pt = [
                        xy[s][0] + w * (xy[t][0] - xy[s][0]),
                        xy[s][1] + w * (xy[t][1] - xy[s][1]),
                    ];
                    let (pn, mn) = if pl[s] { (c[s], c[t]) } else { (c[t], c[s]) };
                    cr.push((keys[e], pt, pl[s], pn, mn));
                }
            }
            let plus_joined = if cr.len() == 4 {
                let joined = fv.iter().sum::<f64>() > 0.0;
                ambiguous.push((i, j, joined));
                joined
            } else {
                true
            };
            let m = cr.len();
            for k in 0..m {
                let (key, pt, p2m, pn, mn) = cr[k];
                if !p2m {
                    continue;
                }
                let partner = if plus_joined {
                    cr[(k + 1) % m]
                } else {
                    cr[(k + m - 1) % m]
                };
                segments.push(Segment {
                    start: key,
                    end: partner.0,
                    p0: pt,
                    p1: partner.1,
                    plus_node: pn,
                    minus_node: mn,
                });
            }
        }
    }

    // regions
    let poles = topology == Topology::Sphere;
    let total = n * n + if poles { 2 } else { 0 };
    let mut uf = UnionFind((0..total).collect());
    for j in 0..n {
        for i in 0..n {
            let k = node(i, j);
            let right = node((i + 1) % n, j);
            if is_plus(k) == is_plus(right) {
                uf.union(k, right);
            }
            if j + 1 < n || torus {
                let up = node(i, (j + 1) % n);
                if is_plus(k) == is_plus(up) {
                    uf.union(k, up);
                }
            }
        }
    }
    for &(i, j, joined) in &ambiguous {
        let (ip, jp) = ((i + 1) % n, (j + 1) % n);
        let (a0, a2) = (node(i, j), node(ip, jp));
        let (a1, a3) = (node(ip, j), node(i, jp));
        if is_plus(a0) == joined {
            uf.union(a0, a2);
        } else {
            uf.union(a1, a3);
        }
    }
    let mut pole_sign = [0i8; 2];
    if poles {
        for (slot, pole, row) in [(0usize, Pole::South, 0usize), (1, Pole::North, n - 1)] {
            let s = a
                .singularities
                .iter()
                .find(|s| s.pole == Some(pole))
                .ok_or_else(|| Error::Inconsistent(format!("no singularity at the {pole:?} pole")))?;
            pole_sign[slot] = s.sign;
            for i in 0..n {
                let k = node(i, row);
                if (s.sign > 0) != is_plus(k) {
                    return Err(Error::Resolution(format!(
                        "dividing set reaches the raster row next to the {pole:?} pole"
                    )));
                }
                uf.union(k, n * n + slot);
            }
        }
    }
    let mut label_of: HashMap<usize, usize> = HashMap::new();
    let mut regions: Vec<Region> = Vec::new();
    let mut label = vec![0usize; total];
    for k in 0..total {
        let root = uf.find(k);
        let idx = *label_of.entry(root).or_insert_with(|| {
            let sign = if k < n * n {
                if is_plus(k) {
                    1
                } else {
                    -1
                }
            } else {
                pole_sign[k - n * n]
            };
            regions.push(Region {
                sign,
                samples: 0,
                euler_characteristic: 0,
            });
            regions.len() - 1
        });
        label[k] = idx;
        if k < n * n {
            regions[idx].samples += 1;
        }
    }

    // V − E + F of the sub-complex spanned by each region
    let mut chi = vec![0i64; regions.len()];
    for k in 0..total {
        chi[label[k]] += 1;
    }
    let edge = |x: usize, y: usize, chi: &mut Vec<i64>| {
        if label[x] == label[y] {
            chi[label[x]] -= 1;
        }
    };
    for j in 0..n {
        for i in 0..n {
            edge(node(i, j), node((i + 1) % n, j), &mut chi);
            if j + 1 < n || torus {
                edge(node(i, j), node(i, (j + 1) % n), &mut chi);
            }
        }
    }
    if poles {
        for i in 0..n {
            edge(node(i, 0), n * n, &mut chi);
            edge(node(i, n - 1), n * n + 1, &mut chi);
        }
    }
    let amb: HashMap<(usize, usize), bool> = ambiguous.iter().map(|&(i, j, b)| ((i, j), b)).collect();
    for j in 0..rows {
        for i in 0..n {
            let (ip, jp) = ((i + 1) % n, (j + 1) % n);
            let c = [node(i, j), node(ip, j), node(ip, jp), node(i, jp)];
            if let Some(&joined) = amb.get(&(i, j)) {
                // split along the joined diagonal into two mixed triangles
                let (d0, d1) = if is_plus(c[0]) == joined {
                    (c[0], c[2])
                } else {
                    (c[1], c[3])
                };
                edge(d0, d1, &mut chi);
            } else if c.iter().all(|&x| label[x] == label[c[0]]) {
                chi[label[c[0]]] += 1;
            }
        }
    }
    if poles {
        for (pole, row) in [(n * n, 0), (n * n + 1, n - 1)] {
            for i in 0..n {
                let (x, y) = (node(i, row), node((i + 1) % n, row));
                if label[x] == label[pole] && label[y] == label[pole] {
                    chi[label[pole]] += 1;
                }
            }
        }
    }
    for (rg, c) in regions.iter_mut().zip(&chi) {
        rg.euler_characteristic = *c;
    }

    let components = chain(field, &segments, &label)?
        .into_iter()
        .map(|(points, plus_region, minus_region)| {
            let winding = winding(&points);
            let margin = margin(field, &points);
            DividingCurve {
                points,
                winding,
                margin,
                plus_region,
                minus_region,
            }
        })
        .collect();

    let sum_chi = |s: i8| -> i64 {
        regions
            .iter()
            .filter(|r| r.sign == s)
            .map(|r| r.euler_characteristic)
            .sum()
    };
    let index_sum = a.singularities.iter().map(|s| s.sign as i64 * s.index()).sum();
    Ok(DividingSet {
        topology,
        components,
        raster_chi_plus: sum_chi(1),
        raster_chi_minus: sum_chi(-1),
        regions,
        chi_plus: graph.g_plus.euler_characteristic(),
        chi_minus: graph.g_minus.euler_characteristic(),
        index_sum,
        grid: n,
        neighborhood_radius: r,
        values,
    })
}

/// Joins marching-squares segments into closed curves.
fn chain(
    field: &FoliationField,
    segments: &[Segment],
    label: &[usize],
) -> Result<Vec<(Vec<[f64; 2]>, usize, usize)>> {
    let by_start: HashMap<EdgeKey, usize> = segments.iter().enumerate().map(|(k, s)| (s.start, k)).collect();
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    for first in 0..segments.len() {
        if used[first] {
            continue;
        }
        let s0 = &segments[first];
        let mut pts = vec![s0.p0];
        let mut cur = first;
        loop {
            used[cur] = true;
            let s = &segments[cur];
            let last = *pts.last().unwrap();
            let d = field.delta(last, s.p1);
            pts.push([last[0] + d[0], last[1] + d[1]]);
            match by_start.get(&s.end) {
                Some(&next) if next == first => break,
                Some(&next) if !used[next] => cur = next,
                _ => {
                    return Err(Error::Resolution(
                        "dividing curve does not close up on the raster".into(),
                    ))
                }
            }
        }
        out.push((pts, label[s0.plus_node], label[s0.minus_node]));
    }
    Ok(out)
}

/// Turns of a closed curve whose last point repeats the first up to periods.
fn winding(points: &[[f64; 2]]) -> [i64; 2] {
    let (a, b) = (points[0], points[points.len() - 1]);
    [(b[0] - a[0]).round() as i64, (b[1] - a[1]).round() as i64]
}

fn margin(field: &FoliationField, points: &[[f64; 2]]) -> f64 {
    let m = points.len();
    let mut cum = vec![0.0];
    for w in points.windows(2) {
        cum.push(cum.last().unwrap() + (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]));
    }
    let total = *cum.last().unwrap();
    if m < 2 || total == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut worst = f64::INFINITY;
    let mut seg = 0;
    for k in 0..MARGIN_SAMPLES {
        let s = total * (k as f64 + 0.5) / MARGIN_SAMPLES as f64;
        while seg + 2 < m && cum[seg + 1] < s {
            seg += 1;
        }
        let (a, b) = (points[seg], points[seg + 1]);
        let len = cum[seg + 1] - cum[seg];
        if len == 0.0 {
            continue;
        }
        let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        let w = (s - cum[seg]) / len;
        let p = [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])];
        let Some(y) = unit_field(field, p, 1.0) else {
            return f64::NEG_INFINITY;
        };
        // S₊ lies to the left, so Y should point to the right
        let right = -(t[0] * y[1] - t[1] * y[0]);
        worst = worst.min(right.clamp(-1.0, 1.0).asin());
    }
    worst
}
