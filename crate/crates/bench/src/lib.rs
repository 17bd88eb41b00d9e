//! Fixtures shared by the benchmarks.

use contact_core::{ContactModel, FoliationField, ParamSurface};

/// Catalog surfaces covering poles, closed leaves and saddles.
pub fn surfaces() -> Vec<(&'static str, FoliationField)> {
    [
        ("std_cyl/sphere:2", "std_cyl", ParamSurface::sphere(2.0)),
        ("ot/sphere:5", "ot", ParamSurface::sphere(5.0)),
        (
            "r2s1/rotating_torus",
            "r2s1",
            ParamSurface::rotating_torus(1.0, 1.0),
        ),
    ]
    .into_iter()
    .map(|(name, m, s)| {
        (
            name,
            FoliationField::pullback(&ContactModel::catalog(m).unwrap(), &s),
        )
    })
    .collect()
}
