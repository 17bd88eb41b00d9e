mod render;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_core::field::SYNTHETIC_IDS;
use contact_core::model::CATALOG_IDS;
use contact_core::movie::{linspace, EventKind, FAMILY_IDS};
use contact_core::ribbon::CounterexampleKind;
use contact_core::surface::SURFACE_IDS;
use contact_core::*;
use serde_json::json;

use report::{to_value, Report};

/// Environment variable naming the directory for reports written without `-o`.
const OUT_DIR_VAR: &str = "CONTACTFOL_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "contactfol",
    version,
    about = "Characteristic foliations, convexity and bifurcations of surfaces in contact 3-manifolds"
)]
struct Cli {
    /// TOML file with inputs (model, surface, t_start, t_end, t_steps) and tolerance overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; defaults to $CONTACTFOL_OUT_DIR/<name> or stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SurfaceInput {
    /// Catalog contact model.
    #[arg(long)]
    model: Option<String>,
    /// Surface id such as `sphere:2` or `rotating_torus:1,1`.
    #[arg(long)]
    surface: Option<String>,
    /// Synthetic foliation instead of a model/surface pullback.
    #[arg(long, conflicts_with_all = ["model", "surface"])]
    synthetic: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog models, surfaces, families and synthetic fields.
    Catalog {
        #[command(flatten)]
        out: Output,
    },
    /// Foliation analysis, convexity verdict, dividing set and Giroux criterion of one surface.
    SurfaceReport {
        #[command(flatten)]
        input: SurfaceInput,
        #[command(flatten)]
        out: Output,
        /// Exit with status 1 when the surface is not convex.
        #[arg(long)]
        strict: bool,
    },
    /// Bifurcation timeline of a one-parameter family of surfaces.
    MovieReport {
        #[arg(long)]
        model: Option<String>,
        /// Family id: spheres, torus_x, torus_z, rotating_tori, wavy_tori:A.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t_start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t_end: Option<f64>,
        #[arg(long)]
        t_steps: Option<usize>,
        /// Traverse the family backwards in time.
        #[arg(long)]
        reverse: bool,
        #[command(flatten)]
        out: Output,
        /// Exit with status 1 when any bifurcation event is found.
        #[arg(long)]
        strict: bool,
    },
    /// Exhaustive check of the tree proposition over small plane trees.
    VerifyTrees {
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
        /// Reading of condition 2: inner_segment or local.
        #[arg(long, default_value = "inner_segment")]
        reading: String,
        #[command(flatten)]
        out: Output,
        /// Exit with status 1 when a counterexample is found.
        #[arg(long)]
        strict: bool,
    },
    /// SVG phase portrait on the parameter square.
    Render {
        #[command(flatten)]
        input: SurfaceInput,
        #[command(flatten)]
        out: Output,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownId { .. } | Error::Config(_) | Error::Parse { .. } => 2,
            _ => 1,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self {
            code: 1,
            msg: e.to_string(),
        }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn load_config(path: Option<&PathBuf>) -> Run<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let rc = RunConfig::parse(&text)?;
    rc.analysis.validate()?;
    Ok(rc)
}

fn emit(out: &Output, default_name: &str, content: &str) -> Run<()> {
    let path = match (&out.output, std::env::var_os(OUT_DIR_VAR)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(PathBuf::from(dir).join(default_name)),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&p, content).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Resolved {
    field: FoliationField,
    model: Option<String>,
    surface: String,
    topology: Topology,
}

fn resolve_surface(input: &SurfaceInput, rc: &RunConfig) -> Run<Resolved> {
    if let Some(id) = &input.synthetic {
        let field = FoliationField::synthetic(id)?;
        let topology = field.topology();
        return Ok(Resolved {
            field,
            model: None,
            surface: id.clone(),
            topology,
        });
    }
    let model = input.model.clone().or_else(|| rc.model.clone()).ok_or_else(|| {
        Failure::input(format!(
            "--model is required; catalog: {}",
            CATALOG_IDS.join(", ")
        ))
    })?;
    let surface = input
        .surface
        .clone()
        .or_else(|| rc.surface.clone())
        .ok_or_else(|| Failure::input(format!("--surface is required; known: {SURFACE_IDS}")))?;
    let m = ContactModel::catalog(&model)?;
    let s = ParamSurface::parse(&surface)?;
    Ok(Resolved {
        field: FoliationField::pullback(&m, &s),
        topology: s.topology(),
        model: Some(model),
        surface,
    })
}

fn catalog(out: &Output) -> Run<u8> {
    let mut models = Vec::new();
    for id in CATALOG_IDS {
        let m = ContactModel::catalog(id)?;
        models.push(json!({
            "id": id,
            "formula": m.formula(),
            "chart": format!("{:?}", m.chart()),
            "periods": m.periods(),
            "min_contact_density_48": m.min_contact_volume(48)?,
        }));
    }
    let payload = json!({
        "models": models,
        "surfaces": SURFACE_IDS,
        "families": FAMILY_IDS,
        "synthetic": SYNTHETIC_IDS,
    });
    let r = Report::new("catalog", json!({}), payload, Vec::new());
    emit(out, "catalog.json", &r.to_canonical_json()?)?;
    Ok(0)
}

fn surface_report(input: &SurfaceInput, out: &Output, strict: bool, rc: &RunConfig) -> Run<u8> {
    let cfg = &rc.analysis;
    let r = resolve_surface(input, rc)?;
    let a = analyze_field(&r.field, cfg)?;
    let v = convexity_verdict(&a, cfg)?;
    let mut warnings = a.warnings.clone();
    let (neighborhood, eb) = match &v.dividing_set {
        Some(div) => {
            let n = match giroux_criterion(div, r.topology) {
                Ok(n) => Some(n),
                Err(e) => {
                    warnings.push(e.to_string());
                    None
                }
            };
            let eb = match euler_bennequin_check(div, r.topology) {
                Ok(eb) => Some(eb),
                Err(e) => {
                    warnings.push(e.to_string());
                    None
                }
            };
            (n, eb)
        }
        None => (None, None),
    };
    let payload = json!({
        "convex": v.convex,
        "gamma_components": v.dividing_set.as_ref().map(|d| d.components.len()),
        "giroux_criterion": neighborhood,
        "tight_neighborhood": neighborhood.map(|n| n == Neighborhood::TightNeighborhood),
        "euler_bennequin": eb,
        "obstructions": v.obstructions,
        "giroux_graph": v.giroux_graph,
        "dividing_set": v.dividing_set,
        "analysis": to_value(&a),
    });
    let input = json!({ "model": r.model, "surface": r.surface, "cfg": cfg });
    let report = Report::new("surface-report", input, payload, warnings);
    let name = format!(
        "surface-report-{}-{}.json",
        slug(r.model.as_deref().unwrap_or("synthetic")),
        slug(&r.surface)
    );
    emit(out, &name, &report.to_canonical_json()?)?;
    Ok(if strict && !v.convex { 1 } else { 0 })
}

#[allow(clippy::too_many_arguments)]
fn movie_report(
    model: Option<&String>,
    family: Option<&String>,
    t: [Option<f64>; 2],
    steps: Option<usize>,
    reverse: bool,
    out: &Output,
    strict: bool,
    rc: &RunConfig,
) -> Run<u8> {
    let cfg = &rc.analysis;
    let model = model.cloned().or_else(|| rc.model.clone()).ok_or_else(|| {
        Failure::input(format!(
            "--model is required; catalog: {}",
            CATALOG_IDS.join(", ")
        ))
    })?;
    let family = family
        .cloned()
        .ok_or_else(|| Failure::input(format!("--family is required; known: {}", FAMILY_IDS.join(", "))))?;
    let t_start = t[0]
        .or(rc.t_start)
        .ok_or_else(|| Failure::input("--t-start is required"))?;
    let t_end = t[1]
        .or(rc.t_end)
        .ok_or_else(|| Failure::input("--t-end is required"))?;
    let steps = steps.or(rc.t_steps).unwrap_or(8);
    if steps < 2 || t_start.partial_cmp(&t_end) != Some(std::cmp::Ordering::Less) {
        return Err(Failure::input("need t_start < t_end and at least 2 steps"));
    }
    let m = ContactModel::catalog(&model)?;
    let mut fam = SurfaceFamily::parse(&family)?;
    if reverse {
        fam = fam.time_reversed();
    }
    let tl = analyze_movie(&m, &fam, &linspace(t_start, t_end, steps), cfg)?;
    let mut warnings = tl.warnings.clone();

    let mut profiles = Vec::new();
    for (i, e) in tl
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EventKind::DegenerateLeaf)
    {
        match birth_death_profile(&m, &fam, e, cfg) {
            Ok(p) => profiles.push(json!({ "event": i, "profile": p })),
            Err(err) => warnings.push(format!("event {i}: {err}")),
        }
    }
    let mut crossings = Vec::new();
    for (i, e) in tl
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.kind == EventKind::RetrogradeConnection)
    {
        match crossing_direction(&m, &fam, e, cfg) {
            Ok(c) => crossings.push(json!({ "event": i, "crossing": c })),
            Err(err) => warnings.push(format!("event {i}: {err}")),
        }
    }
    let obstructed = !tl.events.is_empty() || !tl.accumulations.is_empty();
    let payload = json!({ "timeline": tl, "profiles": profiles, "crossings": crossings });
    let input = json!({
        "model": model,
        "family": fam.id,
        "t_start": t_start,
        "t_end": t_end,
        "t_steps": steps,
        "cfg": cfg,
    });
    let report = Report::new("movie-report", input, payload, warnings);
    let name = format!("movie-report-{}-{}.json", slug(&model), slug(&fam.id));
    emit(out, &name, &report.to_canonical_json()?)?;
    Ok(if strict && obstructed { 1 } else { 0 })
}

fn verify_trees(max_vertices: usize, reading: &str, out: &Output, strict: bool) -> Run<u8> {
    if max_vertices == 0 || max_vertices > 9 {
        return Err(Failure::input("--max-vertices must be between 1 and 9"));
    }
    let reading: SegmentReading = reading.parse()?;
    let r = verify_tree_proposition(max_vertices, reading);
    let (reversed, counterexamples): (Vec<_>, Vec<_>) = r
        .counterexamples
        .iter()
        .partition(|c| c.kind == CounterexampleKind::ReversedCorollary);
    let payload = json!({
        "passed": r.passed(),
        "max_vertices": r.max_vertices,
        "reading": r.reading,
        "trees": r.trees,
        "instances": r.instances,
        "crossing_excluded": r.crossing_excluded,
        "valid_pairs": r.valid_pairs,
        "cond1": r.cond1,
        "cond2": r.cond2,
        "mismatches": r.mismatches,
        "corollary_failures": r.corollary_failures,
        "counterexamples": counterexamples,
        "reversed_variant": {
            "cond1": r.reversed_cond1,
            "corollary_failures": r.reversed_corollary_failures,
            "examples": reversed,
        },
    });
    let input = json!({ "max_vertices": max_vertices, "reading": reading });
    let report = Report::new("verify-trees", input, payload, Vec::new());
    emit(
        out,
        &format!("verify-trees-{max_vertices}.json"),
        &report.to_canonical_json()?,
    )?;
    Ok(if strict && !r.passed() { 1 } else { 0 })
}

fn render(input: &SurfaceInput, out: &Output, rc: &RunConfig) -> Run<u8> {
    let cfg = &rc.analysis;
    let r = resolve_surface(input, rc)?;
    let a = analyze_field(&r.field, cfg)?;
    let v = convexity_verdict(&a, cfg)?;
    let svg = render::render_svg(&a, v.dividing_set.as_ref(), cfg);
    let name = format!(
        "render-{}-{}.svg",
        slug(r.model.as_deref().unwrap_or("synthetic")),
        slug(&r.surface)
    );
    emit(out, &name, &svg)?;
    Ok(0)
}

fn run(cli: Cli) -> Run<u8> {
    let rc = load_config(cli.config.as_ref())?;
    match &cli.command {
        Command::Catalog { out } => catalog(out),
        Command::SurfaceReport { input, out, strict } => surface_report(input, out, *strict, &rc),
        Command::MovieReport {
            model,
            family,
            t_start,
            t_end,
            t_steps,
            reverse,
            out,
            strict,
        } => movie_report(
            model.as_ref(),
            family.as_ref(),
            [*t_start, *t_end],
            *t_steps,
            *reverse,
            out,
            *strict,
            &rc,
        ),
        Command::VerifyTrees {
            max_vertices,
            reading,
            out,
            strict,
        } => verify_trees(*max_vertices, reading, out, *strict),
        Command::Render { input, out } => render(input, out, &rc),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("contactfol: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
