//! `ctl`: verify curvature identities and conformal laws on built-in or
//! user-supplied geometries.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ctl_core::catalog::{self, CatalogParams};
use ctl_core::conformal::TransformLawId;
use ctl_core::curvature::{CurvatureBundle, Quantity};
use ctl_core::identities::{self, Family, Filter, Structure, VerifyConfig};
use ctl_core::tolerance::Tolerances;
use ctl_core::{CtlError, GeometryInstance, TensorValue};

#[derive(Parser)]
#[command(name = "ctl", version, about = "Jet-based checks of curvature and soliton identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity families, single identities or conformal laws.
    Verify(VerifyArgs),
    /// Print orthonormal components of a quantity at a point.
    Eval(EvalArgs),
    /// Built-in geometries.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Identity registry.
    Identities {
        #[command(subcommand)]
        action: IdentitiesAction,
    },
    /// Conformal transformation laws.
    Laws {
        #[command(subcommand)]
        action: LawsAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Print an entry as a geometry spec.
    Export {
        name: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum IdentitiesAction {
    List {
        /// Comma-separated families.
        #[arg(long, value_delimiter = ',')]
        family: Vec<Family>,
        #[arg(long)]
        requires_u: Option<bool>,
        #[arg(long)]
        requires_f: Option<bool>,
        #[arg(long = "requires-x")]
        requires_x: Option<bool>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum LawsAction {
    List {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Seed for random catalog entries; defaults to --seed.
    #[arg(long)]
    catalog_seed: Option<u64>,
}

#[derive(Args)]
struct Source {
    /// Built-in geometry name.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    catalog: Option<String>,
    /// Geometry spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Families, e.g. COMM,SOL; `ALL` for every family.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Identity ids.
    #[arg(long, value_delimiter = ',')]
    id: Vec<String>,
    /// Conformal law ids; `all` for every law.
    #[arg(long, value_delimiter = ',')]
    law: Vec<String>,
    #[arg(long, default_value_t = 8)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to CTL_JET_ORDER, else 6.
    #[arg(long)]
    jet_order: Option<usize>,
    /// Overrides such as A=1e-10,C=1e-4.
    #[arg(long)]
    tol_class: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    /// Quantity name (see `ctl eval --list`), or a structure with --residual.
    #[arg(long, required_unless_present_any = ["residual", "list"])]
    quantity: Option<String>,
    /// Number of covariant derivatives.
    #[arg(long, default_value_t = 0)]
    deriv: usize,
    /// Print LHS − RHS of a structure equation instead.
    #[arg(long)]
    residual: Option<Structure>,
    /// Comma-separated coordinates; defaults to the domain centre.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jet_order: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// List quantity names and exit.
    #[arg(long)]
    list: bool,
}

enum Failure {
    Config(String),
    Certification(String),
}

impl From<CtlError> for Failure {
    fn from(e: CtlError) -> Self {
        match e {
            CtlError::Certification { .. } => Failure::Certification(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

/// Writes to stdout; a closed pipe ends the process quietly.
fn put(text: &str) {
    if let Err(e) = io::stdout().lock().write_all(text.as_bytes()) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

macro_rules! outln {
    ($($t:tt)*) => {
        put(&(format!($($t)*) + "\n"))
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Catalog { action } => cmd_catalog(action),
        Command::Identities { action } => cmd_identities(action),
        Command::Laws { action } => cmd_laws(action),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Certification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn catalog_params(p: &ParamArgs, seed: u64) -> CatalogParams {
    CatalogParams {
        dim: p.dim,
        radius: p.radius,
        lambda: p.lambda,
        degree: p.degree,
        eps: p.eps,
        seed: p.catalog_seed.unwrap_or(seed),
    }
}

fn load_geometry(src: &Source, seed: u64) -> Result<GeometryInstance, Failure> {
    if let Some(name) = &src.catalog {
        return Ok(catalog::load(name, &catalog_params(&src.params, seed))?.geometry);
    }
    let path = src.spec.as_ref().expect("clap enforces a source");
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(GeometryInstance::from_json(&text)?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            put(text);
            if !text.ends_with('\n') {
                put("\n");
            }
            Ok(())
        }
    }
}

fn parse_families(names: &[String]) -> Result<Vec<Family>, Failure> {
    let mut out = Vec::new();
    for n in names {
        if n.eq_ignore_ascii_case("all") {
            out.extend(Family::ALL);
        } else {
            out.push(n.parse::<Family>()?);
        }
    }
    out.dedup();
    Ok(out)
}

fn parse_laws(names: &[String]) -> Result<Vec<TransformLawId>, Failure> {
    let mut out = Vec::new();
    for n in names {
        if n.eq_ignore_ascii_case("all") {
            out.extend(TransformLawId::ALL);
        } else {
            out.push(
                TransformLawId::parse(n.trim())
                    .ok_or_else(|| Failure::Config(format!("unknown law `{n}`")))?,
            );
        }
    }
    Ok(out)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let tolerances = match &a.tol_class {
        Some(t) => t.parse::<Tolerances>()?,
        None => Tolerances::default(),
    };
    let cfg = VerifyConfig {
        points: a.points,
        seed: a.seed,
        jet_order: a.jet_order.unwrap_or_else(identities::default_jet_order),
        tolerances,
    };
    if cfg.points == 0 {
        return Err(Failure::Config("--points must be at least 1".into()));
    }
    let mut families = parse_families(&a.suite)?;
    let laws = parse_laws(&a.law)?;
    if families.is_empty() && a.id.is_empty() && laws.is_empty() {
        families = Family::ALL.to_vec();
    }
    let geom = load_geometry(&a.source, a.seed)?;
    let records = identities::select(&families, &a.id)?;
    let mut report = identities::verify(&geom, &records, &cfg)?;
    if !laws.is_empty() {
        report = report.merge(identities::verify_laws(&geom, &laws, &cfg)?);
    }
    let text = match a.format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json(),
    };
    emit(&text, a.out.as_ref())?;
    Ok(report.passed())
}

/// Fixed decimal with 12 digits after the point; scientific outside a sane range.
fn fmt12(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e12).contains(&a) {
        format!("{v:.12}")
    } else {
        format!("{v:.11e}")
    }
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    geometry: &'a str,
    quantity: String,
    deriv: usize,
    point: &'a [f64],
    dim: usize,
    rank: usize,
    components: &'a [f64],
}

fn cmd_eval(a: EvalArgs) -> Outcome {
    if a.list {
        for q in Quantity::ALL {
            outln!("{}", q.name());
        }
        return Ok(true);
    }
    let geom = load_geometry(&a.source, a.seed)?;
    let m = geom.dim();
    let point: Vec<f64> = if a.point.is_empty() {
        geom.spec.domain.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect()
    } else {
        a.point.clone()
    };
    if point.len() != m {
        return Err(Failure::Config(format!("point has {} coordinates, geometry has dimension {m}", point.len())));
    }
    let (label, value): (String, TensorValue) = match a.residual {
        Some(s) => {
            let lambda = geom.lambda().ok_or_else(|| CtlError::MissingField("lambda".into()))?;
            (format!("residual:{}", s.name()), identities::structure_residual(&geom, s, lambda, &point)?)
        }
        None => {
            let name = a.quantity.as_deref().expect("clap requires a quantity");
            let q = Quantity::parse(name.trim())
                .ok_or_else(|| CtlError::Unknown { kind: "quantity", name: name.to_string() })?;
            let order = a.jet_order.unwrap_or_else(identities::default_jet_order);
            let bundle = CurvatureBundle::new(&geom, &point, order)?;
            (q.name().to_string(), (*bundle.value(q, a.deriv)?).clone())
        }
    };
    let rank = value.rank();
    match a.format {
        Format::Json => {
            let out = EvalOutput {
                geometry: geom.name(),
                quantity: label,
                deriv: a.deriv,
                point: &point,
                dim: m,
                rank,
                components: &value.data,
            };
            outln!("{}", serde_json::to_string_pretty(&out).expect("plain data serializes"));
        }
        Format::Table if rank == 0 => outln!("{}", fmt12(value.data[0])),
        Format::Table => {
            let mut idx = vec![0usize; rank];
            for v in &value.data {
                let key: Vec<String> = idx.iter().map(usize::to_string).collect();
                outln!("[{}] {}", key.join(","), fmt12(*v));
                for slot in (0..rank).rev() {
                    idx[slot] += 1;
                    if idx[slot] < m {
                        break;
                    }
                    idx[slot] = 0;
                }
            }
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct CatalogRow {
    name: &'static str,
    params: &'static str,
    dim: usize,
    claims: Vec<String>,
    description: &'static str,
}

fn cmd_catalog(action: CatalogAction) -> Outcome {
    match action {
        CatalogAction::List { format } => {
            let mut rows = Vec::new();
            for &(name, params, description) in catalog::ENTRIES {
                let e = catalog::load(name, &CatalogParams::default())?;
                rows.push(CatalogRow { name, params, dim: e.geometry.dim(), claims: e.claims_text(), description });
            }
            match format {
                Format::Json => outln!("{}", serde_json::to_string_pretty(&rows).expect("plain data serializes")),
                Format::Table => {
                    for r in &rows {
                        let claims = if r.claims.is_empty() { "-".to_string() } else { r.claims.join(", ") };
                        outln!("{:<32} m={}  {:<60} {}", r.name, r.dim, claims, r.description);
                    }
                }
            }
            Ok(true)
        }
        CatalogAction::Export { name, params, out } => {
            let e = catalog::load(&name, &catalog_params(&params, 0))?;
            emit(&e.export(), out.as_ref())?;
            Ok(true)
        }
    }
}

fn cmd_identities(action: IdentitiesAction) -> Outcome {
    let IdentitiesAction::List { family, requires_u, requires_f, requires_x, format } = action;
    let filter = Filter { families: family, requires_u, requires_f, requires_x };
    let rows = identities::list_identities(&filter);
    match format {
        Format::Json => outln!("{}", serde_json::to_string_pretty(&rows).expect("plain data serializes")),
        Format::Table => {
            for r in &rows {
                outln!("{:<28} {:<6} {:<40} {}", r.id, r.family, r.paper_eq, r.tol_class);
            }
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct LawRow {
    id: &'static str,
    paper_eq: &'static str,
    anchor: &'static str,
    tol_class: String,
    jet_order: usize,
}

fn cmd_laws(action: LawsAction) -> Outcome {
    let LawsAction::List { format } = action;
    let rows: Vec<LawRow> = TransformLawId::ALL
        .iter()
        .map(|l| {
            let info = l.info();
            LawRow {
                id: info.id,
                paper_eq: info.paper_eq,
                anchor: info.anchor,
                tol_class: l.tol_class().to_string(),
                jet_order: l.required_order(),
            }
        })
        .collect();
    match format {
        Format::Json => outln!("{}", serde_json::to_string_pretty(&rows).expect("plain data serializes")),
        Format::Table => {
            for r in &rows {
                outln!("{:<28} {:<40} {} order {}", r.id, r.paper_eq, r.tol_class, r.jet_order);
            }
        }
    }
    Ok(true)
}
