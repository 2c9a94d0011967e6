//! `coarse`: profiles, sequence checks and model generators on the command line.
//!
//! Exit status is 0 when every verdict holds, 1 when a mathematical verdict
//! fails or is inconclusive, 2 on unusable input.

mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use coarse_core::coarse_space::{
    are_close, is_coarsely_excisive, validate_coarse_map, Decomposition, PointMap, PointSet,
    TruncatedCoarseSpace,
};
use coarse_core::homology::{homology, ChainComplex};
use coarse_core::nerve::SimplicialComplex;
use coarse_core::report::{barcode_svg, profile_rows, rows_to_csv, Report};
use coarse_core::spaces::{
    homray_homotopy, make_cell, make_grid_ball, make_line, make_ray, open_cone, CellKind, CellSpec, ConeSpec,
    RayKind,
};
use coarse_core::theory::{
    close_maps_agree, coarse_homology_profile, induced_profile_map, les_of_pair_check, mayer_vietoris_check,
    validate_homotopy, HomotopyData, ProfileConfig,
};
use coarse_core::{CoarseError, Field, FieldKind, Rational, F2};

#[derive(Parser)]
#[command(name = "coarse", version, about = "Coarse homology of truncated coarse spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a model space as JSON.
    Gen {
        #[command(subcommand)]
        model: Model,
    },
    /// Coarse homology profile of a space.
    Profile {
        space: PathBuf,
        #[command(flatten)]
        opts: ProfileOpts,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Mayer-Vietoris sequence for a decomposition.
    MvCheck {
        space: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Allow `A ∪ B` to be a proper subset of the space.
        #[arg(long)]
        within: bool,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
        #[command(flatten)]
        opts: ProfileOpts,
    },
    /// Long exact sequence of a pair.
    LesCheck {
        space: PathBuf,
        #[arg(long)]
        sub: String,
        #[command(flatten)]
        opts: ProfileOpts,
    },
    /// Coarse excisiveness of a decomposition.
    ExcisionCheck {
        space: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        within: bool,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
    },
    /// Coarseness of a map and the map it induces on profiles.
    MapCheck {
        map: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
        #[command(flatten)]
        opts: ProfileOpts,
    },
    /// Closeness of two maps and agreement of their induced maps.
    CloseCheck {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
        #[command(flatten)]
        opts: ProfileOpts,
    },
    /// Validity of a coarse homotopy, from a file or the half-disk fold model.
    HomotopyCheck {
        file: Option<PathBuf>,
        /// Use the fold homotopy on the half-disk of this radius.
        #[arg(long, conflicts_with = "file")]
        fold: Option<usize>,
        #[arg(long, default_value_t = 2.0)]
        budget: f64,
    },
    /// Profile of an open cone against the reduced homology of its base.
    Cone {
        #[command(flatten)]
        base: ConeBase,
        #[arg(long, default_value_t = 40)]
        radius: usize,
        #[arg(long)]
        density: Option<usize>,
        #[command(flatten)]
        opts: ProfileOpts,
    },
}

#[derive(Subcommand)]
enum Model {
    Ray {
        #[arg(long)]
        length: usize,
        /// Unit gauge instead of the bounded structure.
        #[arg(long)]
        gauge: bool,
    },
    Line {
        #[arg(long)]
        half: usize,
    },
    GridBall {
        #[arg(long)]
        radius: usize,
    },
    Cell {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        gauge: bool,
        #[arg(long, default_value_t = 1)]
        density: usize,
    },
    Cone {
        #[command(flatten)]
        base: ConeBase,
        #[arg(long, default_value_t = 40)]
        radius: usize,
        #[arg(long)]
        density: Option<usize>,
    },
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct ConeBase {
    /// Two antipodal points.
    #[arg(long)]
    sphere0: bool,
    /// This many points on the circle.
    #[arg(long)]
    points: Option<usize>,
    /// Boundary of the regular polygon with this many sides.
    #[arg(long)]
    polygon: Option<usize>,
    /// JSON file `{vertices, simplices}` with unit vertex vectors.
    #[arg(long)]
    complex: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ProfileOpts {
    /// `doubling`, `increments` or explicit radii `r1,r2,...`.
    #[arg(long, default_value = "doubling")]
    schedule: String,
    /// Inclusive degree range `a..b`.
    #[arg(long, default_value = "0..2")]
    degrees: String,
    /// Coefficient field by characteristic: 2 or 0.
    #[arg(long, default_value_t = 2)]
    field: u32,
    /// Nerve dimension cap (default: top degree + 1).
    #[arg(long)]
    dim_cap: Option<usize>,
    /// Trailing stages over which ranks must agree.
    #[arg(long, default_value_t = 3)]
    window: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

/// Output text and whether every verdict held.
struct Outcome {
    text: String,
    ok: bool,
}

type Run = Result<Outcome, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, &outcome.text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{}", outcome.text);
                    Ok(())
                }
            };
            match written {
                Err(e) => fail(&e),
                Ok(()) if outcome.ok => ExitCode::SUCCESS,
                Ok(()) => ExitCode::from(1),
            }
        }
        Err(e) => fail(&e),
    }
}

fn fail(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

fn e(err: CoarseError) -> String {
    err.to_string()
}

impl ProfileOpts {
    fn config(&self) -> Result<(ProfileConfig, FieldKind), String> {
        let schedule = input::parse_schedule(&self.schedule)?;
        let (lo, hi) = input::parse_degrees(&self.degrees)?;
        let field = FieldKind::from_characteristic(self.field)
            .ok_or_else(|| format!("unsupported field characteristic {}; use 2 or 0", self.field))?;
        let config = ProfileConfig { schedule, lo, hi, dim_cap: self.dim_cap, window: self.window };
        config.validate().map_err(e)?;
        Ok((config, field))
    }
}

fn config_value(config: &ProfileConfig, field: FieldKind, extra: Value) -> Value {
    let mut v = json!({ "profile": config, "field": field.characteristic() });
    if let (Value::Object(map), Value::Object(more)) = (&mut v, extra) {
        map.extend(more);
    }
    v
}

fn envelope<T: Serialize>(command: &str, config: Value, result: T, ok: bool) -> Run {
    let text = Report::new(command, config, result).to_json().map_err(e)? + "\n";
    Ok(Outcome { text, ok })
}

macro_rules! with_field {
    ($field:expr, $f:ident ( $($arg:expr),* )) => {
        match $field {
            FieldKind::F2 => $f::<F2>($($arg),*),
            FieldKind::Rational => $f::<Rational>($($arg),*),
        }
    };
}

fn run(command: Command) -> Run {
    match command {
        Command::Gen { model } => generate(model),
        Command::Profile { space, opts, format } => {
            let space = input::load_space(&space)?;
            let (config, field) = opts.config()?;
            with_field!(field, profile(space, &config, field, format))
        }
        Command::MvCheck { space, a, b, within, budget, opts } => {
            let space = input::load_space(&space)?;
            let (config, field) = opts.config()?;
            let dec = decomposition(space, &a, &b, within)?;
            with_field!(field, mv_check(&dec, &config, field, budget))
        }
        Command::LesCheck { space, sub, opts } => {
            let space = input::load_space(&space)?;
            let (config, field) = opts.config()?;
            let sub = input::select(&space, &sub)?;
            with_field!(field, les_check(&space, &sub, &config, field))
        }
        Command::ExcisionCheck { space, a, b, within, budget } => {
            let space = input::load_space(&space)?;
            let dec = decomposition(space, &a, &b, within)?;
            let report = is_coarsely_excisive(&dec, budget).map_err(e)?;
            let ok = report.excisive;
            envelope("excision-check", json!({ "budget": budget, "within": within }), report, ok)
        }
        Command::MapCheck { map, budget, opts } => {
            let (config, field) = opts.config()?;
            with_field!(field, map_check(&map, &config, field, budget))
        }
        Command::CloseCheck { f, g, budget, opts } => {
            let (config, field) = opts.config()?;
            with_field!(field, close_check(&f, &g, &config, field, budget))
        }
        Command::HomotopyCheck { file, fold, budget } => homotopy_check(file.as_deref(), fold, budget),
        Command::Cone { base, radius, density, opts } => {
            let (config, field) = opts.config()?;
            let spec = cone_spec(&base, radius, density)?;
            with_field!(field, cone_check(&spec, &config, field))
        }
    }
}

fn generate(model: Model) -> Run {
    let space = match model {
        Model::Ray { length, gauge } => {
            let kind = if gauge { RayKind::Gauge(vec![coarse_core::coarse_space::Gauge::unit()]) } else { RayKind::Bounded };
            make_ray(length, &kind)
        }
        Model::Line { half } => make_line(half),
        Model::GridBall { radius } => make_grid_ball(radius),
        Model::Cell { dim, radius, gauge, density } => {
            let kind = if gauge { CellKind::Gauge } else { CellKind::Bounded };
            make_cell(&CellSpec { dim, kind, radius, density }).map(|c| (*c.space).clone())
        }
        Model::Cone { base, radius, density } => {
            let spec = cone_spec(&base, radius, density)?;
            open_cone(&spec).map(|c| (*c.space).clone())
        }
    }
    .map_err(e)?;
    Ok(Outcome { text: space.to_json().map_err(e)? + "\n", ok: true })
}

fn cone_spec(base: &ConeBase, radius: usize, density: Option<usize>) -> Result<ConeSpec, String> {
    let mut spec = if base.sphere0 {
        ConeSpec::sphere0(radius)
    } else if let Some(k) = base.points {
        ConeSpec::points_on_circle(k, radius)
    } else if let Some(k) = base.polygon {
        ConeSpec::polygon(k, radius)
    } else if let Some(path) = &base.complex {
        let file: input::ComplexFile =
            serde_json::from_str(&input::read(path)?).map_err(|err| format!("{}: {err}", path.display()))?;
        ConeSpec::new(file.vertices, file.simplices, radius)
    } else {
        return Err("choose a cone base".into());
    };
    spec.density = density;
    Ok(spec)
}

fn decomposition(space: Arc<TruncatedCoarseSpace>, a: &str, b: &str, within: bool) -> Result<Decomposition, String> {
    let a = input::select(&space, a)?;
    let b = input::select(&space, b)?;
    if within { Decomposition::within(space, a, b) } else { Decomposition::new(space, a, b) }.map_err(e)
}

fn profile<F: Field>(space: Arc<TruncatedCoarseSpace>, config: &ProfileConfig, field: FieldKind, format: Format) -> Run {
    let p = coarse_homology_profile::<F>(space, config).map_err(e)?;
    let ok = p.is_stable();
    match format {
        Format::Json => envelope("profile", config_value(config, field, json!({})), p.to_json(), ok),
        Format::Csv => Ok(Outcome { text: rows_to_csv(&profile_rows(&p)).map_err(e)?, ok }),
        Format::Svg => Ok(Outcome { text: barcode_svg(&profile_rows(&p)), ok }),
    }
}

fn mv_check<F: Field>(dec: &Decomposition, config: &ProfileConfig, field: FieldKind, budget: f64) -> Run {
    let report = mayer_vietoris_check::<F>(dec, config, budget).map_err(e)?;
    let ok = report.refusal.is_none() && report.exact;
    envelope("mv-check", config_value(config, field, json!({ "budget": budget })), report, ok)
}

fn les_check<F: Field>(space: &Arc<TruncatedCoarseSpace>, sub: &PointSet, config: &ProfileConfig, field: FieldKind) -> Run {
    let report = les_of_pair_check::<F>(space, sub, config).map_err(e)?;
    let ok = report.exact;
    envelope("les-check", config_value(config, field, json!({})), report, ok)
}

fn map_check<F: Field>(path: &Path, config: &ProfileConfig, field: FieldKind, budget: f64) -> Run {
    let f = input::load_map(path)?;
    let report = validate_coarse_map(&f, budget);
    let cfg = config_value(config, field, json!({ "budget": budget }));
    if !report.coarse {
        return envelope("map-check", cfg, json!({ "coarse": report, "induced": Value::Null }), false);
    }
    let px = coarse_homology_profile::<F>(f.source().clone(), config).map_err(e)?;
    let py = coarse_homology_profile::<F>(f.target().clone(), config).map_err(e)?;
    let induced = induced_profile_map(&f, &px, &py).map_err(e)?;
    let ok = px.is_stable() && py.is_stable() && induced.degrees.iter().all(|m| m.well_defined);
    envelope("map-check", cfg, json!({ "coarse": report, "induced": induced }), ok)
}

fn close_check<F: Field>(f: &Path, g: &Path, config: &ProfileConfig, field: FieldKind, budget: f64) -> Run {
    let f = input::load_map(f)?;
    let g = input::load_map(g)?;
    let cfg = config_value(config, field, json!({ "budget": budget }));
    if f.source() != g.source() || f.target() != g.target() {
        return Err("the two maps must have the same source and target".into());
    }
    let g = PointMap::new(f.source().clone(), f.target().clone(), g.images().to_vec()).map_err(e)?;
    let closeness = are_close(&f, &g).map_err(e)?;
    if !closeness.close || closeness.witness > budget {
        let refusal = format!("maps are not close within budget {budget}");
        return envelope("close-check", cfg, json!({ "closeness": closeness, "refusal": refusal }), false);
    }
    let px = coarse_homology_profile::<F>(f.source().clone(), config).map_err(e)?;
    let py = coarse_homology_profile::<F>(f.target().clone(), config).map_err(e)?;
    let agreement = close_maps_agree(&f, &g, &px, &py, budget).map_err(e)?;
    let ok = agreement.agree;
    envelope("close-check", cfg, agreement, ok)
}

fn homotopy_check(file: Option<&Path>, fold: Option<usize>, budget: f64) -> Run {
    let (h, source) = match (file, fold) {
        (_, Some(n)) => (homray_homotopy(n).map_err(e)?, json!({ "fold": n })),
        (Some(path), None) => {
            let file: input::HomotopyFile =
                serde_json::from_str(&input::read(path)?).map_err(|err| format!("{}: {err}", path.display()))?;
            let source = Arc::new(file.source.build().map_err(e)?);
            let target = Arc::new(file.target.build().map_err(e)?);
            let values = file.values.concat();
            let mut h = HomotopyData::new(source, target, file.t_max, values, file.limit, file.base).map_err(e)?;
            if let Some(settle) = file.settle {
                h = h.with_settle(settle);
            }
            (h, json!({ "file": path.display().to_string() }))
        }
        (None, None) => return Err("give a homotopy file or --fold N".into()),
    };
    let report = validate_homotopy(&h, budget).map_err(e)?;
    let ok = report.valid;
    let mut cfg = json!({ "budget": budget });
    if let (Value::Object(map), Value::Object(more)) = (&mut cfg, source) {
        map.extend(more);
    }
    envelope("homotopy-check", cfg, report, ok)
}

/// Ranks of the reduced homology of a finite complex in degrees `0..=hi`.
fn reduced_betti<F: Field>(n_vertices: usize, simplices: &[Vec<usize>], hi: usize) -> Result<Vec<usize>, String> {
    let generators = (0..n_vertices as u32)
        .map(|v| vec![v])
        .chain(simplices.iter().map(|s| s.iter().map(|&v| v as u32).collect()));
    let complex = Arc::new(SimplicialComplex::from_simplices(n_vertices, hi + 1, generators).map_err(e)?);
    let cc = ChainComplex::<F>::absolute(complex);
    let mut ranks = (0..=hi).map(|p| homology(&cc, p).map(|h| h.rank)).collect::<coarse_core::Result<Vec<_>>>().map_err(e)?;
    if n_vertices > 0 {
        ranks[0] -= 1;
    }
    Ok(ranks)
}

fn cone_check<F: Field>(spec: &ConeSpec, config: &ProfileConfig, field: FieldKind) -> Run {
    let base = reduced_betti::<F>(spec.vertices.len(), &spec.simplices, config.hi)?;
    let expected: Vec<usize> = config.degrees().map(|p| if p == 0 { 0 } else { base[p - 1] }).collect();
    let cone = open_cone(spec).map_err(e)?;
    let p = coarse_homology_profile::<F>(cone.space.clone(), config).map_err(e)?;
    let observed = p.limit_ranks();
    let ok = p.is_stable() && observed == expected;
    let result = json!({
        "points": cone.space.len(),
        "density": cone.density,
        "base_reduced_betti": base,
        "expected": expected,
        "observed": observed,
        "matches": observed == expected,
        "profile": p.to_json(),
    });
    envelope("cone", config_value(config, field, json!({ "radius": spec.radius })), result, ok)
}
