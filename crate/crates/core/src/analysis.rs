//! The full qualitative portrait of a characteristic foliation.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_leaf::{closed_leaves_from_probes, run_probes, ClosedLeaf};
use crate::config::AnalysisConfig;
use crate::error::Result;
use crate::field::FoliationField;
use crate::leaf::{LeafLimit, LeafTargets};
use crate::model::ContactModel;
use crate::separatrix::{trace_separatrices, Separatrix, SeparatrixKind};
use crate::singularity::{find_singularities, SingularLocus, Singularity, SingularityKind};
use crate::surface::{ParamSurface, Topology};

/// A leaf running from one saddle to another.
#[derive(Clone, Debug, Serialize)]
pub struct Connection {
    pub source: usize,
    pub target: usize,
    /// Index into [`FoliationAnalysis::separatrices`] of the unstable
    /// separatrix of `source` realizing the connection.
    pub separatrix: usize,
    pub retrograde: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationAnalysis {
    #[serde(skip)]
    pub field: FoliationField,
    pub topology: Topology,
    pub singularities: Vec<Singularity>,
    pub separatrices: Vec<Separatrix>,
    pub closed_leaves: Vec<ClosedLeaf>,
    pub connections: Vec<Connection>,
    pub pb_satisfied: bool,
    /// False when non-isolated singularities or saddle-nodes are present.
    pub generic: bool,
    pub non_generic_loci: Vec<SingularLocus>,
    /// Probe leaves and separatrices whose limit could not be resolved.
    pub unresolved_leaves: usize,
    pub warnings: Vec<String>,
}

impl FoliationAnalysis {
    pub fn saddles(&self) -> impl Iterator<Item = &Singularity> {
        self.singularities.iter().filter(|s| s.is_saddle())
    }

    pub fn retrograde_connections(&self) -> impl Iterator<Item = &Connection> {
        self.connections.iter().filter(|c| c.retrograde)
    }

    pub fn separatrices_of(&self, saddle: usize) -> impl Iterator<Item = &Separatrix> {
        self.separatrices.iter().filter(move |s| s.saddle == saddle)
    }

    /// Leaf targets (singularities, closed leaves, loci) for further
    /// integrations on the same field.
    pub fn targets(&self) -> LeafTargets {
        let mut t = LeafTargets::new(&self.singularities);
        for l in &self.closed_leaves {
            t.closed.add_polyline(&self.field, &l.polyline, true, l.id);
        }
        for (i, l) in self.non_generic_loci.iter().enumerate() {
            t.loci.add_polyline(&self.field, &l.points, l.closed, i);
        }
        t
    }
}

pub fn analyze_foliation(
    model: &ContactModel,
    surface: &ParamSurface,
    cfg: &AnalysisConfig,
) -> Result<FoliationAnalysis> {
    analyze_field(&FoliationField::pullback(model, surface), cfg)
}

pub fn analyze_field(field: &FoliationField, cfg: &AnalysisConfig) -> Result<FoliationAnalysis> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let (singularities, loci) = find_singularities(field, cfg)?;
    let mut targets = LeafTargets::new(&singularities);
    for (i, l) in loci.iter().enumerate() {
        targets.loci.add_polyline(field, &l.points, l.closed, i);
    }
    let probes = run_probes(field, &targets, cfg);
    let closed_leaves = closed_leaves_from_probes(field, &probes, cfg, &mut warnings);
    for l in &closed_leaves {
        targets.closed.add_polyline(field, &l.polyline, true, l.id);
    }

    let saddles: Vec<&Singularity> = singularities
        .iter()
        .filter(|s| matches!(s.kind, SingularityKind::Saddle | SingularityKind::SaddleNode))
        .collect();
    let traced: Vec<Result<Vec<Separatrix>>> = saddles
        .par_iter()
        .map(|s| trace_separatrices(field, &targets, s, cfg))
        .collect();
    let mut separatrices = Vec::new();
    for t in traced {
        separatrices.extend(t?);
    }

    let by_id = |id: usize| singularities.iter().find(|s| s.id == id);
    let mut connections = Vec::new();
    for (k, sep) in separatrices.iter().enumerate() {
        if sep.kind != SeparatrixKind::Unstable {
            continue;
        }
        if let LeafLimit::Singularity(t) = sep.path.limit {
            let (Some(src), Some(dst)) = (by_id(sep.saddle), by_id(t)) else {
                continue;
            };
            if matches!(dst.kind, SingularityKind::Saddle | SingularityKind::SaddleNode) {
                connections.push(Connection {
                    source: src.id,
                    target: dst.id,
                    separatrix: k,
                    retrograde: src.sign < 0 && dst.sign > 0,
                });
            }
        }
    }

    let w = cfg.transversal_half_width;
    let mut unresolved = 0;
    for p in &probes {
        let settled = match p.limit {
            LeafLimit::BudgetExhausted => targets.closed.nearest(field, p.end, w).is_some(),
            LeafLimit::Stalled => false,
            _ => true,
        };
        if !settled {
            unresolved += 1;
        }
    }
    for s in &separatrices {
        if !s.path.limit.is_resolved() {
            unresolved += 1;
        }
    }
    let stalled = probes.iter().filter(|p| p.limit == LeafLimit::Stalled).count();
    if stalled > 0 {
        warnings.push(format!("{stalled} probe leaves stalled at an unlisted zero of Y"));
    }
    let generic = loci.is_empty()
        && !singularities
            .iter()
            .any(|s| s.kind == SingularityKind::SaddleNode);
    if !loci.is_empty() {
        warnings.push(format!(
            "{} curve(s) of non-isolated singularities; foliation is not generic",
            loci.len()
        ));
    }
    Ok(FoliationAnalysis {
        field: field.clone(),
        topology: field.topology(),
        singularities,
        separatrices,
        closed_leaves,
        connections,
        pb_satisfied: unresolved == 0,
        generic,
        non_generic_loci: loci,
        unresolved_leaves: unresolved,
        warnings,
    })
}
