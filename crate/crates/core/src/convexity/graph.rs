//! The Giroux graphs `G₊` and `G₋` of a convex foliation.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::Serialize;

use super::obstructions;
use crate::analysis::FoliationAnalysis;
use crate::closed_leaf::ClosedLeafStatus;
use crate::error::{Error, Result};
use crate::field::FoliationField;
use crate::leaf::LeafLimit;
use crate::separatrix::SeparatrixKind;
use crate::singularity::Singularity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum GraphNode {
    Singularity(usize),
    ClosedLeaf(usize),
}

/// A separatrix joining a saddle to a node or closed leaf of the same side.
#[derive(Clone, Debug, Serialize)]
pub struct GraphEdge {
    /// Index into the separatrices of the analysis; `None` for synthetic graphs.
    pub separatrix: Option<usize>,
    pub saddle: usize,
    pub end: GraphNode,
    /// Direction of the edge leaving the saddle.
    pub saddle_angle: f64,
    /// Direction of arrival at a node, or position along a closed leaf, in radians.
    pub end_angle: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSide {
    pub sign: i8,
    /// Singularity ids.
    pub vertices: Vec<usize>,
    /// Closed-leaf ids.
    pub cycles: Vec<usize>,
    pub edges: Vec<GraphEdge>,
    /// Edge indices around each vertex, counterclockwise.
    pub rotation: BTreeMap<usize, Vec<usize>>,
}

impl GraphSide {
    fn new(sign: i8, vertices: Vec<usize>, cycles: Vec<usize>, edges: Vec<GraphEdge>) -> Self {
        let mut ends: BTreeMap<usize, Vec<(f64, usize)>> =
            vertices.iter().map(|&v| (v, Vec::new())).collect();
        for (k, e) in edges.iter().enumerate() {
            ends.entry(e.saddle)
                .or_default()
                .push((e.saddle_angle.rem_euclid(TAU), k));
            if let GraphNode::Singularity(v) = e.end {
                ends.entry(v).or_default().push((e.end_angle.rem_euclid(TAU), k));
            }
        }
        let rotation = ends
            .into_iter()
            .map(|(v, mut list)| {
                list.sort_by(|a, b| a.0.total_cmp(&b.0));
                (v, list.into_iter().map(|(_, k)| k).collect())
            })
            .collect();
        Self {
            sign,
            vertices,
            cycles,
            edges,
            rotation,
        }
    }

    /// `V − E` of the graph as a cell complex. Edges ending on a closed
    /// leaf subdivide it; a bare closed leaf is one vertex and one loop.
    pub fn euler_characteristic(&self) -> i64 {
        let mut attached = vec![0i64; self.cycles.len()];
        for e in &self.edges {
            if let GraphNode::ClosedLeaf(c) = e.end {
                if let Some(k) = self.cycles.iter().position(|&x| x == c) {
                    attached[k] += 1;
                }
            }
        }
        let cycle_cells: i64 = attached.iter().map(|&a| a.max(1)).sum();
        let v = self.vertices.len() as i64 + cycle_cells;
        let e = self.edges.len() as i64 + cycle_cells;
        v - e
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GirouxGraph {
    pub g_plus: GraphSide,
    pub g_minus: GraphSide,
}

impl GirouxGraph {
    pub fn side(&self, sign: i8) -> &GraphSide {
        if sign > 0 {
            &self.g_plus
        } else {
            &self.g_minus
        }
    }

    /// A graph given directly by its vertices and edges, without a foliation.
    /// `edges` are `(saddle, end)` pairs.
    pub fn synthetic(singularities: &[Singularity], edges: &[(usize, usize)]) -> Result<Self> {
        let side = |sign: i8| -> Result<GraphSide> {
            let vertices: Vec<usize> = singularities
                .iter()
                .filter(|s| s.sign == sign)
                .map(|s| s.id)
                .collect();
            let mut list = Vec::new();
            for &(saddle, end) in edges {
                if !vertices.contains(&saddle) {
                    continue;
                }
                if !vertices.contains(&end) {
                    return Err(Error::Structure(format!(
                        "edge {saddle}-{end} joins singularities of different signs"
                    )));
                }
                let k = list.len() as f64;
                list.push(GraphEdge {
                    separatrix: None,
                    saddle,
                    end: GraphNode::Singularity(end),
                    saddle_angle: k,
                    end_angle: k,
                });
            }
            Ok(GraphSide::new(sign, vertices, Vec::new(), list))
        };
        Ok(Self {
            g_plus: side(1)?,
            g_minus: side(-1)?,
        })
    }
}

/// `G₊`: positive singularities, stable separatrices of positive saddles and
/// repelling closed leaves; `G₋` symmetrically with unstable separatrices and
/// attracting closed leaves.
pub fn giroux_graph(a: &FoliationAnalysis) -> Result<GirouxGraph> {
    let obs = obstructions(a);
    if !obs.is_empty() {
        return Err(Error::Obstructed(obs));
    }
    Ok(GirouxGraph {
        g_plus: build_side(a, 1)?,
        g_minus: build_side(a, -1)?,
    })
}

fn build_side(a: &FoliationAnalysis, sign: i8) -> Result<GraphSide> {
    let field = &a.field;
    let by_id = |id: usize| a.singularities.iter().find(|s| s.id == id);
    let vertices: Vec<usize> = a
        .singularities
        .iter()
        .filter(|s| s.sign == sign)
        .map(|s| s.id)
        .collect();
    let cycle_status = if sign > 0 {
        ClosedLeafStatus::Repelling
    } else {
        ClosedLeafStatus::Attracting
    };
    let cycles: Vec<usize> = a
        .closed_leaves
        .iter()
        .filter(|l| l.status == cycle_status)
        .map(|l| l.id)
        .collect();
    let kind = if sign > 0 {
        SeparatrixKind::Stable
    } else {
        SeparatrixKind::Unstable
    };

    let mut edges = Vec::new();
    for (k, sep) in a.separatrices.iter().enumerate() {
        let Some(saddle) = by_id(sep.saddle) else { continue };
        if saddle.sign != sign || sep.kind != kind {
            continue;
        }
        let saddle_angle = sep.departure[1].atan2(sep.departure[0]);
        let last = *sep.path.points.last().unwrap_or(&saddle.location);
        let (end, end_angle) = match sep.path.limit {
            LeafLimit::Singularity(id) => {
                let node = by_id(id).ok_or_else(|| {
                    Error::Inconsistent(format!("separatrix {k} ends at unknown singularity {id}"))
                })?;
                if node.sign != sign {
                    return Err(Error::Inconsistent(format!(
                        "separatrix {k} of saddle {} ends at singularity {id} of the other sign",
                        sep.saddle
                    )));
                }
                (GraphNode::Singularity(id), arrival_angle(field, node, last))
            }
            LeafLimit::ClosedLeaf(id) => {
                let leaf = a.closed_leaves.iter().find(|l| l.id == id).ok_or_else(|| {
                    Error::Inconsistent(format!("separatrix {k} ends at unknown closed leaf {id}"))
                })?;
                if leaf.status != cycle_status {
                    return Err(Error::Inconsistent(format!(
                        "separatrix {k} of saddle {} accumulates on closed leaf {id} of the other side",
                        sep.saddle
                    )));
                }
                let m = leaf.polyline.len().max(1);
                let nearest = leaf
                    .polyline
                    .iter()
                    .enumerate()
                    .min_by(|x, y| field.dist(*x.1, last).total_cmp(&field.dist(*y.1, last)))
                    .map_or(0, |(i, _)| i);
                (GraphNode::ClosedLeaf(id), TAU * nearest as f64 / m as f64)
            }
            other => {
                return Err(Error::Precondition(format!(
                    "separatrix {k} of saddle {} has limit {other:?}",
                    sep.saddle
                )))
            }
        };
        edges.push(GraphEdge {
            separatrix: Some(k),
            saddle: sep.saddle,
            end,
            saddle_angle,
            end_angle,
        });
    }
    Ok(GraphSide::new(sign, vertices, cycles, edges))
}

/// Angle at which a leaf ending at `last` arrives at `node`, in the pole chart
/// for sphere poles.
fn arrival_angle(field: &FoliationField, node: &Singularity, last: [f64; 2]) -> f64 {
    if let (Some(pole), Some(surface)) = (node.pole, field.surface()) {
        if let Some(chart) = surface.pole_chart(pole) {
            let q = field.wrap(last);
            let c = chart.coords_of(surface.point(q[0], q[1]));
            return c[1].atan2(c[0]);
        }
    }
    let d = field.delta(node.location, last);
    d[1].atan2(d[0])
}
