//! Command-line front end: classification, codimension, determinacy,
//! unfolding, versality, stability, catalog access, and mesh generation.
//!
//! Exit codes: 0 on success (NOT_SIMPLE is a verdict, not an error),
//! 1 on usage errors, 2 on domain errors (parse failures, unknown keys,
//! infinite codimension where a construction needs finite, ...).

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog;
use crate::classify::classify_detailed;
use crate::geom::mesh::{
    caustic, export_mesh, wavefront, DiscriminantMesh, ExportFormat, MeshConfig,
};
use crate::local::{codimension, determinacy_bound, Codim, Mode};
use crate::parse::parse_in;
use crate::poly::{CornerPoly, VarSet};
use crate::unfold::{build_versal, stability_verdict, FamilyKind, GeneratingFamily};

#[derive(Parser, Debug)]
#[command(
    name = "reticular",
    about = "Classify function germs on an r-corner and extract the caustics and wavefronts of their generating families",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    R,
    Rplus,
    K,
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::R | ModeArg::Rplus => Mode::R,
            ModeArg::K => Mode::K,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Obj,
    Ply,
}

impl FormatArg {
    fn format(self) -> ExportFormat {
        match self {
            FormatArg::Csv => ExportFormat::Csv,
            FormatArg::Obj => ExportFormat::Obj,
            FormatArg::Ply => ExportFormat::Ply,
        }
    }
}

#[derive(Args, Debug)]
struct GermArgs {
    /// Germ expression over x1..xr, y1..yk
    germ: String,
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// Family expression over x1..xr, y1..yk, q1..qn (and z with --legendrian)
    family: String,
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    n: usize,
    #[arg(long)]
    legendrian: bool,
}

#[derive(Args, Debug)]
struct MeshArgs {
    /// Family expression (omit when using --catalog)
    family: Option<String>,
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long, default_value_t = 0)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Box per axis: a:b or a:b,c:d,... (single range replicates)
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 100)]
    res: usize,
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    tol_eq: Option<f64>,
    /// Seed box a:b for the critical-point search
    #[arg(long, allow_hyphen_values = true)]
    seed_box: Option<String>,
    #[arg(long)]
    refine_gap: Option<f64>,
    #[arg(long)]
    seeds_per_dim: Option<usize>,
    /// key=value config file for solver parameters
    #[arg(long)]
    config: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Recognize the simple class of a germ
    Classify {
        #[command(flatten)]
        germ: GermArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::R)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// Codimension and quotient basis
    Codim {
        #[command(flatten)]
        germ: GermArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Rplus)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// Sufficient finite-determinacy order
    Determinacy {
        #[command(flatten)]
        germ: GermArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::R)]
        mode: ModeArg,
        #[arg(long, default_value_t = crate::local::DEFAULT_DETERMINACY_CAP)]
        l_max: usize,
        #[arg(long)]
        json: bool,
    },
    /// Build a miniversal unfolding
    Unfold {
        #[command(flatten)]
        germ: GermArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Rplus)]
        mode: ModeArg,
        #[arg(long)]
        legendrian: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check infinitesimal versality of a family
    Versal {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Rplus)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// Stability verdict for the map the family generates
    Stability {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Rplus)]
        mode: ModeArg,
        #[arg(long)]
        json: bool,
    },
    /// Sample the caustic of a Lagrangian family
    Caustic {
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Sample the wavefront of a Legendrian family
    Wavefront {
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Catalog access
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    /// TSV listing: key, r, kind, n, family
    List {
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        legendrian: bool,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// One entry as JSON
    Get {
        key: String,
        #[arg(long)]
        legendrian: bool,
    },
}

/// Print a line to stdout, exiting quietly if the pipe closed (e.g. under
/// `reticular catalog list | head`).
fn emit(line: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if writeln!(out, "{line}").is_err() {
        std::process::exit(0);
    }
}

#[derive(Debug)]
struct DomainError(String);

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<E: std::error::Error> From<E> for DomainError {
    fn from(e: E) -> Self {
        DomainError(e.to_string())
    }
}

fn parse_germ(args: &GermArgs) -> Result<CornerPoly, DomainError> {
    Ok(parse_in(&args.germ, VarSet::germ(args.r, args.k))?)
}

fn parse_family(args: &FamilyArgs) -> Result<GeneratingFamily, DomainError> {
    let mut params: Vec<String> = (1..=args.n).map(|i| format!("q{i}")).collect();
    let kind = if args.legendrian {
        params.push("z".to_string());
        FamilyKind::Legendrian
    } else {
        FamilyKind::Lagrangian
    };
    let vars = VarSet::new(args.r, args.k, params);
    let poly = parse_in(&args.family, vars)?;
    Ok(GeneratingFamily::new(poly, kind)?)
}

fn codim_json(c: &Codim) -> serde_json::Value {
    match c {
        Codim::Finite(n) => serde_json::json!(n),
        Codim::Infinite => serde_json::json!("INFINITE"),
    }
}

fn parse_ranges(text: &str, want: usize) -> Result<Vec<(f64, f64)>, DomainError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| DomainError(format!("range `{part}` must be a:b")))?;
        let a: f64 = a
            .trim()
            .parse()
            .map_err(|_| DomainError(format!("bad range bound `{a}`")))?;
        let b: f64 = b
            .trim()
            .parse()
            .map_err(|_| DomainError(format!("bad range bound `{b}`")))?;
        if b <= a {
            return Err(DomainError(format!("empty range `{part}`")));
        }
        out.push((a, b));
    }
    if out.len() == 1 && want > 1 {
        out = vec![out[0]; want];
    }
    if out.len() != want {
        return Err(DomainError(format!(
            "expected {want} ranges, got {}",
            out.len()
        )));
    }
    Ok(out)
}

fn mesh_family(args: &MeshArgs, kind: FamilyKind) -> Result<GeneratingFamily, DomainError> {
    if let Some(key) = &args.catalog {
        let entry = catalog::get(key, kind)?;
        return Ok(entry.family.clone());
    }
    let Some(text) = &args.family else {
        return Err(DomainError("need a family expression or --catalog".into()));
    };
    let fa = FamilyArgs {
        family: text.clone(),
        r: args.r,
        k: args.k,
        n: args.n,
        legendrian: kind == FamilyKind::Legendrian,
    };
    parse_family(&fa)
}

fn mesh_config(args: &MeshArgs) -> Result<MeshConfig, DomainError> {
    let mut cfg = MeshConfig::default();
    if let Some(path) = &args.config {
        cfg.load_file(path).map_err(DomainError)?;
    }
    if let Some(t) = args.tol_eq {
        cfg.tol_eq = t;
    }
    if let Some(sb) = &args.seed_box {
        let (a, b) = sb
            .split_once(':')
            .ok_or_else(|| DomainError("seed box must be a:b".into()))?;
        cfg.seed_box = (
            a.trim()
                .parse()
                .map_err(|_| DomainError("bad seed box".into()))?,
            b.trim()
                .parse()
                .map_err(|_| DomainError("bad seed box".into()))?,
        );
    }
    if let Some(g) = args.refine_gap {
        cfg.refine_gap = Some(g);
    }
    if let Some(s) = args.seeds_per_dim {
        cfg.seeds_per_dim = s;
    }
    Ok(cfg)
}

fn finish_mesh(args: &MeshArgs, mesh: &DiscriminantMesh) -> Result<(), DomainError> {
    if let Some(path) = &args.out {
        export_mesh(mesh, args.format.format(), path)?;
    }
    let mut summary = mesh.summary_json();
    if let Some(path) = &args.out {
        summary["out"] = serde_json::json!(path);
    }
    emit(format_args!("{summary}"));
    Ok(())
}

fn run_cmd(cmd: Cmd) -> Result<(), DomainError> {
    match cmd {
        Cmd::Classify {
            germ,
            mode,
            json: _,
        } => {
            let f = parse_germ(&germ)?;
            let detail = classify_detailed(&f, mode.mode())?;
            let det = determinacy_bound(&f, mode.mode(), crate::local::DEFAULT_DETERMINACY_CAP)?;
            let out = serde_json::json!({
                "class": detail.outcome.label(),
                "codim": codim_json(&detail.codim_report.codim),
                "determinacy": match det { Some(d) => serde_json::json!(d), None => serde_json::json!("FAIL") },
            });
            emit(format_args!("{out}"));
        }
        Cmd::Codim {
            germ,
            mode,
            json: _,
        } => {
            let f = parse_germ(&germ)?;
            let rep = codimension(&f, mode.mode())?;
            emit(format_args!("{}", rep.to_json(&f)));
        }
        Cmd::Determinacy {
            germ,
            mode,
            l_max,
            json: _,
        } => {
            let f = parse_germ(&germ)?;
            let det = determinacy_bound(&f, mode.mode(), l_max)?;
            let out = serde_json::json!({
                "determinacy": match det { Some(d) => serde_json::json!(d), None => serde_json::json!("FAIL") },
                "mode": format!("{:?}", mode.mode()),
            });
            emit(format_args!("{out}"));
        }
        Cmd::Unfold {
            germ,
            mode,
            legendrian,
            json: _,
        } => {
            let f = parse_germ(&germ)?;
            let kind = if legendrian {
                FamilyKind::Legendrian
            } else {
                FamilyKind::Lagrangian
            };
            let fam = build_versal(&f, mode.mode(), kind)?;
            let out = serde_json::json!({
                "family": fam.to_string(),
                "kind": format!("{:?}", fam.kind),
                "n": fam.n(),
                "params": fam.param_names(),
            });
            emit(format_args!("{out}"));
        }
        Cmd::Versal {
            family,
            mode,
            json: _,
        } => {
            let fam = parse_family(&family)?;
            let versal = crate::unfold::check_versality(&fam, mode.mode())?;
            emit(format_args!("{}", serde_json::json!({ "versal": versal })));
        }
        Cmd::Stability {
            family,
            mode,
            json: _,
        } => {
            let fam = parse_family(&family)?;
            let rep = stability_verdict(&fam, mode.mode())?;
            emit(format_args!(
                "{}",
                serde_json::to_string(&rep).expect("report serializes")
            ));
        }
        Cmd::Caustic { mesh: args } => {
            let fam = mesh_family(&args, FamilyKind::Lagrangian)?;
            let cfg = mesh_config(&args)?;
            let region = parse_ranges(&args.range, fam.n())?;
            let mesh = caustic(&fam, &region, args.res, &cfg)?;
            finish_mesh(&args, &mesh)?;
        }
        Cmd::Wavefront { mesh: args } => {
            let fam = mesh_family(&args, FamilyKind::Legendrian)?;
            let cfg = mesh_config(&args)?;
            let region = parse_ranges(&args.range, fam.n() + 1)?;
            let mesh = wavefront(&fam, &region, args.res, &cfg)?;
            finish_mesh(&args, &mesh)?;
        }
        Cmd::Catalog { cmd } => match cmd {
            CatalogCmd::List {
                r,
                legendrian,
                n_max,
            } => {
                let kind = if legendrian {
                    FamilyKind::Legendrian
                } else {
                    FamilyKind::Lagrangian
                };
                for e in catalog::entries(kind) {
                    if let Some(rr) = r {
                        if e.r != rr {
                            continue;
                        }
                    }
                    if let Some(nm) = n_max {
                        if e.n > nm {
                            continue;
                        }
                    }
                    emit(format_args!("{}\t{}\t{:?}\t{}\t{}", e.key, e.r, e.kind(), e.n, e.family));
                }
            }
            CatalogCmd::Get { key, legendrian } => {
                let kind = if legendrian {
                    FamilyKind::Legendrian
                } else {
                    FamilyKind::Lagrangian
                };
                let e = catalog::get(&key, kind)?;
                let out = serde_json::json!({
                    "key": e.key,
                    "r": e.r,
                    "kind": format!("{:?}", e.kind()),
                    "n": e.n,
                    "germ": e.germ.to_string(),
                    "family": e.family.to_string(),
                    "paper_label": e.paper_label,
                });
                emit(format_args!("{out}"));
            }
        },
    }
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error; those are success
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run_cmd(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
