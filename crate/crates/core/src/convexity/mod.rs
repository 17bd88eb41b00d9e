//! Convexity: Giroux graphs, dividing sets and the tightness criteria.

mod dividing;
mod graph;

use serde::Serialize;

use crate::analysis::FoliationAnalysis;
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::singularity::{Eigen, Singularity, SingularityKind};
use crate::surface::Topology;

pub use dividing::{
    build_dividing_set, dividing_set_from_graph, DividingCurve, DividingSet, Region, MIN_MARGIN,
};
pub use graph::{giroux_graph, GirouxGraph, GraphEdge, GraphNode, GraphSide};

/// An object that prevents a surface from being convex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    DegenerateClosedLeaf { leaf: usize, multiplier: f64 },
    RetrogradeConnection { source: usize, target: usize },
    PbFailure { unresolved_leaves: usize },
    NonGenericLocus { locus: usize },
    NonGenericSingularity { singularity: usize },
}

pub fn obstructions(a: &FoliationAnalysis) -> Vec<Obstruction> {
    let mut out = Vec::new();
    if !a.pb_satisfied {
        out.push(Obstruction::PbFailure {
            unresolved_leaves: a.unresolved_leaves,
        });
    }
    for l in a.closed_leaves.iter().filter(|l| l.status.is_degenerate()) {
        out.push(Obstruction::DegenerateClosedLeaf {
            leaf: l.id,
            multiplier: l.multiplier,
        });
    }
    for c in a.retrograde_connections() {
        out.push(Obstruction::RetrogradeConnection {
            source: c.source,
            target: c.target,
        });
    }
    for i in 0..a.non_generic_loci.len() {
        out.push(Obstruction::NonGenericLocus { locus: i });
    }
    for s in &a.singularities {
        if matches!(
            s.kind,
            SingularityKind::SaddleNode | SingularityKind::DegenerateCirclePoint
        ) {
            out.push(Obstruction::NonGenericSingularity { singularity: s.id });
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityVerdict {
    pub convex: bool,
    pub obstructions: Vec<Obstruction>,
    pub giroux_graph: Option<GirouxGraph>,
    pub dividing_set: Option<DividingSet>,
}

pub fn convexity_verdict(a: &FoliationAnalysis, cfg: &AnalysisConfig) -> Result<ConvexityVerdict> {
    let obstructions = obstructions(a);
    if !obstructions.is_empty() {
        return Ok(ConvexityVerdict {
            convex: false,
            obstructions,
            giroux_graph: None,
            dividing_set: None,
        });
    }
    let graph = giroux_graph(a)?;
    let div = dividing_set_from_graph(a, &graph, cfg)?;
    Ok(ConvexityVerdict {
        convex: true,
        obstructions,
        giroux_graph: Some(graph),
        dividing_set: Some(div),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Neighborhood {
    TightNeighborhood,
    OvertwistedNeighborhood,
}

/// Tightness of a neighbourhood of a convex surface read off its dividing
/// set: on a sphere the set must be connected, on a torus or annulus no
/// component may bound a disk.
pub fn giroux_criterion(div: &DividingSet, topology: Topology) -> Result<Neighborhood> {
    let tight = match topology {
        Topology::Sphere => div.components.len() == 1,
        // a closed curve bounds a disk exactly when it is null-homologous
        Topology::Torus => div.components.iter().all(|c| c.winding != [0, 0]),
        Topology::Annulus => div.components.iter().all(|c| c.winding[0] != 0),
        other => {
            return Err(Error::UnsupportedTopology(format!(
                "criterion not evaluated on {other:?}"
            )))
        }
    };
    Ok(if tight {
        Neighborhood::TightNeighborhood
    } else {
        Neighborhood::OvertwistedNeighborhood
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EulerBennequin {
    pub e_value: i64,
    pub bound: i64,
    pub pass: bool,
}

/// `⟨e(ξ), S⟩ = χ(S₊) − χ(S₋)` against the bound `max(0, −χ(S))`. The value
/// is recomputed as the signed index sum of the singularities.
pub fn euler_bennequin_check(div: &DividingSet, topology: Topology) -> Result<EulerBennequin> {
    let e_value = div.chi_plus - div.chi_minus;
    if e_value != div.index_sum {
        return Err(Error::Inconsistent(format!(
            "χ(S₊) − χ(S₋) = {e_value} but the signed index sum is {}",
            div.index_sum
        )));
    }
    let bound = (-topology.euler_characteristic()).max(0);
    Ok(EulerBennequin {
        e_value,
        bound,
        pass: e_value.abs() <= bound,
    })
}

/// A convex genus-2 surface given by its Giroux graph: `G₊` is a node with a
/// saddle whose two edges return to it (an annulus), `G₋` a node with three
/// saddles (a twice-punctured torus).
pub fn genus_two_example() -> Result<(GirouxGraph, DividingSet)> {
    let sing = |id: usize, kind: SingularityKind, sign: i8| Singularity {
        id,
        location: [0.0, 0.0],
        pole: None,
        kind,
        sign,
        eigen: Eigen {
            values: [[0.0; 2]; 2],
            vectors: None,
        },
        divergence: sign as f64,
    };
    let sings = vec![
        sing(0, SingularityKind::Node, 1),
        sing(1, SingularityKind::Saddle, 1),
        sing(2, SingularityKind::Node, -1),
        sing(3, SingularityKind::Saddle, -1),
        sing(4, SingularityKind::Saddle, -1),
        sing(5, SingularityKind::Saddle, -1),
    ];
    let edges = [(1, 0), (1, 0), (3, 2), (3, 2), (4, 2), (4, 2), (5, 2), (5, 2)];
    let graph = GirouxGraph::synthetic(&sings, &edges)?;
    let index_sum = sings.iter().map(|s| s.sign as i64 * s.index()).sum();
    let div = DividingSet::combinatorial(Topology::HigherGenus(2), &graph, index_sum);
    Ok((graph, div))
}
