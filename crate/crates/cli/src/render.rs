//! SVG phase portraits on the parameter square.

use std::fmt::Write;

use contact_core::leaf::{integrate_leaf, Direction, LeafOptions};
use contact_core::{AnalysisConfig, DividingSet, FoliationAnalysis};

const SIZE: f64 = 1000.0;
const SEEDS: usize = 14;
const POSITIVE: &str = "#c62828";
const NEGATIVE: &str = "#1565c0";

fn xy(p: [f64; 2]) -> (f64, f64) {
    (SIZE * p[0], SIZE * (1.0 - p[1]))
}

/// Splits an unwrapped polyline into pieces that stay inside the square.
fn pieces(a: &FoliationAnalysis, pts: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    let mut out: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut cur: Vec<[f64; 2]> = Vec::new();
    for p in pts {
        let q = a.field.wrap(*p);
        if let Some(last) = cur.last() {
            if (q[0] - last[0]).abs() > 0.5 || (q[1] - last[1]).abs() > 0.5 {
                out.push(std::mem::take(&mut cur));
            }
        }
        cur.push(q);
    }
    out.push(cur);
    out.retain(|c| c.len() > 1);
    out
}

/// One `<path>` per object, one subpath per piece.
fn path(out: &mut String, pieces: &[Vec<[f64; 2]>], attrs: &str) {
    if pieces.is_empty() {
        return;
    }
    let mut d = String::new();
    for pts in pieces {
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = xy(*p);
            let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { " M" } else { " L" });
        }
    }
    let _ = writeln!(out, r#"<path d="{}" fill="none" {attrs}/>"#, d.trim_start());
}

pub fn render_svg(a: &FoliationAnalysis, div: Option<&DividingSet>, cfg: &AnalysisConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="1000" height="1000" viewBox="0 0 1000 1000">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="1000" height="1000" fill="white" stroke="black"/>"#
    );

    let targets = a.targets();
    let mut opts = LeafOptions::from_config(cfg);
    opts.budget = 1.5;
    opts.sample_spacing = 0.004;
    let _ = writeln!(s, r##"<g id="leaves" stroke="#9e9e9e" stroke-width="1">"##);
    for i in 0..SEEDS {
        for j in 0..SEEDS {
            let seed = [(i as f64 + 0.5) / SEEDS as f64, (j as f64 + 0.5) / SEEDS as f64];
            for dir in [Direction::Forward, Direction::Backward] {
                let leaf = integrate_leaf(&a.field, &targets, seed, dir, &opts);
                path(&mut s, &pieces(a, &leaf.points), "");
            }
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="separatrices" stroke="black" stroke-width="1.5">"#);
    for sep in &a.separatrices {
        path(&mut s, &pieces(a, &sep.path.points), "");
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="closed-leaves" stroke="black" stroke-width="3">"#);
    for l in &a.closed_leaves {
        path(&mut s, &pieces(a, &l.polyline), "");
    }
    for l in &a.non_generic_loci {
        path(&mut s, &pieces(a, &l.points), r#"stroke-dasharray="2 4""#);
    }
    let _ = writeln!(s, "</g>");

    if let Some(div) = div {
        let _ = writeln!(
            s,
            r##"<g id="dividing-set" stroke="#2e7d32" stroke-width="2.5" stroke-dasharray="12 8">"##
        );
        for c in &div.components {
            path(&mut s, &pieces(a, &c.points), "");
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r#"<g id="singularities">"#);
    for sing in &a.singularities {
        let mut q = a.field.wrap(sing.location);
        if sing.pole.is_some() {
            // the whole edge collapses to the pole
            q[0] = 0.5;
        }
        let (x, y) = xy(q);
        let color = if sing.sign > 0 { POSITIVE } else { NEGATIVE };
        if sing.is_saddle() {
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="14" height="14" fill="{color}"/>"#,
                x - 7.0,
                y - 7.0
            );
        } else {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="8" fill="{color}"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
