//! Characteristic foliations of surfaces in contact 3-manifolds.

pub mod analysis;
pub mod closed_leaf;
pub mod config;
pub mod convexity;
pub mod error;
pub mod field;
pub mod geometry;
pub mod leaf;
pub mod model;
pub mod movie;
pub mod ode;
pub mod ribbon;
pub mod separatrix;
pub mod singularity;
pub mod surface;

pub use analysis::{analyze_field, analyze_foliation, Connection, FoliationAnalysis};
pub use config::{AnalysisConfig, RunConfig};
pub use convexity::{
    build_dividing_set, convexity_verdict, euler_bennequin_check, giroux_criterion, giroux_graph,
    ConvexityVerdict, DividingSet, GirouxGraph, Neighborhood, Obstruction,
};
pub use error::{Error, Result};
pub use field::FoliationField;
pub use geometry::{AmbientCovector, AmbientVector, TwoForm};
pub use model::{ChartKind, ContactModel};
pub use movie::{analyze_movie, birth_death_profile, crossing_direction, SurfaceFamily, Timeline};
pub use ribbon::{
    enumerate_instances, gamma_plus_of, prop_trees_conditions, verify_tree_proposition, BifurcationArc,
    Chirality, GammaPlus, RibbonGraph, SegmentReading, TreeVerification,
};
pub use surface::{ParamSurface, Pole, Topology};
