//! Stable and unstable separatrices of saddles.

use serde::Serialize;

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::field::FoliationField;
use crate::leaf::{integrate_leaf, Direction, LeafOptions, LeafPath, LeafTargets};
use crate::singularity::{Singularity, SingularityKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeparatrixKind {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Separatrix {
    pub saddle: usize,
    pub kind: SeparatrixKind,
    /// Unit departure direction from the saddle in parameter coordinates.
    pub departure: [f64; 2],
    pub path: LeafPath,
}

/// The four separatrices of `saddle`: two stable (traced backwards away from
/// the saddle) and two unstable (traced forwards). For a saddle-node the
/// hyperbolic pair is traced together with the two center-direction seeds.
pub fn trace_separatrices(
    field: &FoliationField,
    targets: &LeafTargets,
    saddle: &Singularity,
    cfg: &AnalysisConfig,
) -> Result<Vec<Separatrix>> {
    if !matches!(saddle.kind, SingularityKind::Saddle | SingularityKind::SaddleNode) {
        return Err(Error::Precondition(format!(
            "singularity {} is a {:?}, not a saddle",
            saddle.id, saddle.kind
        )));
    }
    if saddle.pole.is_some() {
        return Err(Error::UnsupportedTopology(
            "saddles at sphere poles are not traced".into(),
        ));
    }
    let vectors = saddle
        .eigen
        .vectors
        .ok_or_else(|| Error::Inconsistent("saddle without real eigenvectors".into()))?;
    let values = saddle.eigen.values;
    let mut opts = LeafOptions::from_config(cfg);
    opts.ignore = Some(saddle.id);
    let delta = cfg.separatrix_offset;
    let p = saddle.location;

    let mut seeds: Vec<(SeparatrixKind, [f64; 2], Direction)> = Vec::new();
    for k in 0..2 {
        let lambda = values[k][0];
        let v = vectors[k];
        for s in [1.0, -1.0] {
            let d = [s * v[0], s * v[1]];
            let kind = if saddle.kind == SingularityKind::SaddleNode
                && lambda.abs() < 1e-6 * values[1 - k][0].abs()
            {
                // center direction: the leaf through the seed is traced in
                // whichever time direction moves it away from the point
                let q = [p[0] + delta * d[0], p[1] + delta * d[1]];
                let y = field.y_or_zero(q[0], q[1]);
                if y[0] * d[0] + y[1] * d[1] >= 0.0 {
                    SeparatrixKind::Unstable
                } else {
                    SeparatrixKind::Stable
                }
            } else if lambda > 0.0 {
                SeparatrixKind::Unstable
            } else {
                SeparatrixKind::Stable
            };
            let dir = match kind {
                SeparatrixKind::Unstable => Direction::Forward,
                SeparatrixKind::Stable => Direction::Backward,
            };
            seeds.push((kind, d, dir));
        }
    }
    let out = seeds
        .into_iter()
        .map(|(kind, d, dir)| {
            let seed = [p[0] + delta * d[0], p[1] + delta * d[1]];
            let path = integrate_leaf(field, targets, seed, dir, &opts);
            Separatrix {
                saddle: saddle.id,
                kind,
                departure: d,
                path,
            }
        })
        .collect();
    Ok(out)
}
