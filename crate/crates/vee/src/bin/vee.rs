use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use vee::catalogue::{parse_params, scan_family, verify_entry, Catalogue, Params};
use vee::config::{CovectorConfiguration, Tolerance, DEFAULT_RTOL};
use vee::deform::{build_system, Mode};
use vee::document::{ConfigDocument, ReportDocument};
use vee::matroid::fingerprint;
use vee::projgeom::{builtin_script, check_reconstruction, ReconstructionScript};
use vee::relations::{relations, verify_relation, RelationKind};
use vee::verify::{check_harmonic, check_vee, solve_weights, WeightStatus};

#[derive(Parser)]
#[command(name = "vee", version, about = "Analyse rank-3 vee-systems of covectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance for the vee-conditions.
    #[arg(long, global = true, default_value_t = DEFAULT_RTOL)]
    rtol: f64,
}

#[derive(Args, Clone)]
struct Input {
    /// Configuration document (JSON).
    path: Option<PathBuf>,
    /// Use a catalogue entry instead of a file.
    #[arg(long)]
    catalogue: Option<String>,
    /// Catalogue parameters, `k=v[,k=v]`.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the vee-conditions and write the full report.
    Verify(Input),
    /// Corank of the linearised conditions, optionally over a parameter grid.
    Deform {
        #[command(flatten)]
        input: Input,
        /// free, fixed or both.
        #[arg(long, default_value = "both")]
        mode: String,
        /// `default` for the entry's grid, or `k=v,k=v;k=v,...`.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Print the 2-flats.
    Matroid(Input),
    /// Print the nu-function on the multi flats.
    Nu(Input),
    /// Solve for admissible weights and the universal relation.
    Weights(Input),
    /// Cross-ratios of the 4-member flats.
    Harmonic(Input),
    /// Run a reconstruction script against a configuration.
    Reconstruct {
        #[command(flatten)]
        input: Input,
        /// Shipped script name (a3, b3, h3, h4a1) or a path.
        #[arg(long)]
        script: String,
        /// Root of the branch equation: 0 for +sqrt, 1 for -sqrt.
        #[arg(long)]
        branch: Option<usize>,
    },
    /// The built-in catalogue.
    Catalogue {
        #[command(subcommand)]
        action: CatalogueAction,
        /// Use printed relation sets and skip flagged rows.
        #[arg(long, global = true)]
        strict: bool,
    },
}

#[derive(Subcommand, Clone, Copy)]
enum CatalogueAction {
    List,
    VerifyAll,
    Relations,
}

/// Exit 2 for usage and parse errors.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Loaded {
    config: CovectorConfiguration,
    bytes: Vec<u8>,
}

fn load(input: &Input) -> Result<Loaded, Usage> {
    match (&input.path, &input.catalogue) {
        (Some(p), None) => {
            if input.params.is_some() {
                return Err(Usage("--params needs --catalogue".into()));
            }
            let bytes = std::fs::read(p).map_err(|e| Usage(format!("{}: {e}", p.display())))?;
            let text = String::from_utf8(bytes.clone())?;
            let doc = ConfigDocument::parse(&text).map_err(|e| Usage(format!("{}: {e}", p.display())))?;
            let config = doc.to_config().map_err(|e| Usage(format!("{}: {e}", p.display())))?;
            Ok(Loaded { config, bytes })
        }
        (None, Some(id)) => {
            let params = match &input.params {
                Some(s) => parse_params(s)?,
                None => {
                    let e = Catalogue::builtin().get(id)?;
                    e.samples.first().cloned().unwrap_or_default()
                }
            };
            let config = Catalogue::builtin().construct(id, &params)?;
            let mut doc = ConfigDocument::from_config(&config);
            doc.source = Some(id.clone());
            doc.parameters = Some(params);
            Ok(Loaded {
                config,
                bytes: doc.to_json().into_bytes(),
            })
        }
        (Some(_), Some(_)) => Err(Usage("give either a path or --catalogue, not both".into())),
        (None, None) => Err(Usage("missing input: a path or --catalogue ID".into())),
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), Usage> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_grid(spec: &str, id: Option<&str>) -> Result<Vec<Params>, Usage> {
    if spec == "default" {
        let id = id.ok_or_else(|| Usage("--grid default needs --catalogue".into()))?;
        return Ok(Catalogue::builtin().get(id)?.grid.clone());
    }
    spec.split(';').map(|p| parse_params(p).map_err(Usage)).collect()
}

fn run(cli: Cli) -> Result<bool, Usage> {
    let tol = Tolerance::new(cli.rtol);
    let out = &cli.out;
    match &cli.command {
        Command::Verify(input) => {
            let l = load(input)?;
            let report = ReportDocument::build(&l.config, &l.bytes, tol)?;
            match out {
                Some(p) => std::fs::write(p, report.to_json()).map_err(|e| Usage(format!("{}: {e}", p.display())))?,
                None => print!("{}", report.to_json()),
            }
            eprintln!(
                "vee-system: {} (max residual {:e}, rtol {:e})",
                report.vee.is_vee_system, report.vee.max_residual, tol.rtol
            );
            Ok(report.vee.is_vee_system)
        }
        Command::Deform { input, mode, grid } => {
            let modes = match mode.as_str() {
                "both" => vec![Mode::FreeNu, Mode::FixedNu],
                m => vec![m.parse::<Mode>()?],
            };
            if let Some(g) = grid {
                let id = input
                    .catalogue
                    .as_deref()
                    .ok_or_else(|| Usage("--grid needs --catalogue".into()))?;
                let rows = scan_family(Catalogue::builtin(), id, &parse_grid(g, Some(id))?, tol)?;
                for r in &rows {
                    eprintln!(
                        "{:?}: free {:?} fixed {:?}",
                        r.params, r.free_nu_corank, r.fixed_nu_corank
                    );
                }
                emit(out, &json!({ "catalogue": id, "rtol": tol.rtol, "rows": rows }))?;
                return Ok(true);
            }
            let l = load(input)?;
            let mut systems = Vec::new();
            for m in modes {
                let s = match build_system(&l.config, m, tol) {
                    Ok(s) => s,
                    Err(e @ vee::VeeError::NotAVeeSystem(_)) => {
                        eprintln!("{e}");
                        return Ok(false);
                    }
                    Err(e) => return Err(e.into()),
                };
                eprintln!("{m:?}: corank {} (spectral gap {:e})", s.corank, s.spectral_gap);
                systems.push(s);
            }
            emit(out, &json!({ "rtol": tol.rtol, "systems": systems }))?;
            Ok(true)
        }
        Command::Matroid(input) => {
            let l = load(input)?;
            let r = check_vee(&l.config, tol)?;
            let d = &r.decomposition;
            emit(
                out,
                &json!({
                    "n": d.n,
                    "flats": d.label_sets(l.config.labels()),
                    "near_degenerate": d.near_degenerate,
                    "fingerprint": fingerprint(d),
                }),
            )?;
            Ok(true)
        }
        Command::Nu(input) => {
            let l = load(input)?;
            let r = ReportDocument::build(&l.config, &l.bytes, tol)?;
            emit(out, &json!({ "rtol": tol.rtol, "is_vee_system": r.vee.is_vee_system, "nu": r.nu_table }))?;
            Ok(r.vee.is_vee_system)
        }
        Command::Weights(input) => {
            let l = load(input)?;
            let w = solve_weights(&l.config)?;
            emit(out, &w)?;
            Ok(w.status != WeightStatus::Infeasible)
        }
        Command::Harmonic(input) => {
            let l = load(input)?;
            let h = check_harmonic(&l.config, 1e-8)?;
            emit(out, &h)?;
            Ok(h.iter().all(|r| r.verdict))
        }
        Command::Reconstruct { input, script, branch } => {
            let s: ReconstructionScript = match builtin_script(script) {
                Some(s) => s,
                None => std::fs::read_to_string(script)
                    .map_err(|e| Usage(format!("{script}: {e}")))?
                    .parse()?,
            };
            let l = load(input)?;
            let r = check_reconstruction(&s, &l.config, *branch)?;
            eprintln!("max error {:e}, unreached {:?}", r.max_error, r.unreached);
            let ok = r.unreached.is_empty() && r.max_error < 1e-8;
            emit(out, &r)?;
            Ok(ok)
        }
        Command::Catalogue { action, strict } => catalogue(*action, *strict, tol, out),
    }
}

fn catalogue(action: CatalogueAction, strict: bool, tol: Tolerance, out: &Option<PathBuf>) -> Result<bool, Usage> {
    let cat = Catalogue::builtin();
    match action {
        CatalogueAction::List => {
            let list: Vec<_> = cat
                .entries()
                .iter()
                .map(|e| {
                    eprintln!("{:<12} n={:<3} params={:?} {}", e.id, e.n(), e.params, e.name);
                    json!({
                        "id": e.id,
                        "name": e.name,
                        "n": e.n(),
                        "params": e.params,
                        "admissible": e.admissible,
                        "erratum": e.erratum,
                    })
                })
                .collect();
            emit(out, &json!({ "sha256": cat.sha256(), "entries": list }))?;
            Ok(true)
        }
        CatalogueAction::VerifyAll => {
            let mut entries = Vec::new();
            let mut ok = true;
            for e in cat.entries() {
                for p in &e.samples {
                    let r = verify_entry(cat, &e.id, p, tol)?;
                    eprintln!("{} {}", if r.pass { "ok  " } else { "FAIL" }, e.describe(p));
                    ok &= r.pass;
                    entries.push(r);
                }
            }
            let rels = relation_reports(cat, strict, tol)?;
            ok &= rels.iter().all(|r| r.pass);
            emit(out, &json!({ "rtol": tol.rtol, "strict": strict, "entries": entries, "relations": rels }))?;
            Ok(ok)
        }
        CatalogueAction::Relations => {
            let rels = relation_reports(cat, strict, tol)?;
            let t1 = relations().iter().filter(|r| r.kind == RelationKind::Extension).count();
            let t2 = relations().iter().filter(|r| r.kind == RelationKind::Degeneration).count();
            eprintln!("extensions: {t1} rows, degenerations: {t2} rows");
            let ok = rels.iter().all(|r| r.pass);
            emit(out, &json!({ "strict": strict, "relations": rels }))?;
            Ok(ok)
        }
    }
}

fn relation_reports(cat: &Catalogue, strict: bool, tol: Tolerance) -> Result<Vec<vee::relations::RelationReport>, Usage> {
    relations()
        .iter()
        .map(|rel| {
            let r = verify_relation(cat, rel, strict, tol)?;
            let tag = match (r.skipped, r.pass) {
                (true, _) => "skip",
                (_, true) => "ok  ",
                _ => "FAIL",
            };
            eprintln!("{tag} {}", r.label);
            for f in &r.failures {
                eprintln!("       {f}");
            }
            Ok(r)
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
