//! `biclosed`: batch checks of convolution, reflection, localisation and
//! extension on model files. Exit 0 when every check passes, 1 when a check
//! fails (the report carries the witness), 2 on input or configuration errors.

mod model;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use biclosed::calculus::IdentityReflector;
use biclosed::extend::{compare_with_oracle, ext_iso_check, extend_structure, ExtensionSetup, OracleMode};
use biclosed::localise::{localise_probicat, SigmaLocal};
use biclosed::probicat::{check_cocontinuity, check_probicat, Biclosed, Convolution, Probicategory, Scope};
use biclosed::reflect::{run_conditions, ConditionSide, ReflectionSetup};
use biclosed::report::Report;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use model::{parse_model, Derive, Model, ModelError, NSpec, SCHEMA};

#[derive(Parser)]
#[command(name = "biclosed", version, about = "Exact checks for finite probicategories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convolution laws: adjunction, unit laws, associativity.
    Check(Common),
    /// Composition table of the scope presheaves, with cocontinuity.
    Convolve {
        #[command(flatten)]
        common: Common,
        /// Hom triple `x,y,z` (object names or positions).
        #[arg(long, default_value = "0,0,0")]
        at: String,
        /// Presheaf names to compose instead of the whole table.
        #[arg(long, requires = "right")]
        left: Option<String>,
        #[arg(long, requires = "left")]
        right: Option<String>,
    },
    /// A reflection from the model: validation, conditions 1 to 6, transfer.
    Reflect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reflection: String,
    },
    /// Localisation at a Σ set from the model.
    Localise {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma: String,
    },
    /// Extension along a dense family.
    Extend {
        #[command(flatten)]
        common: Common,
        /// A named extension setup from the model.
        #[arg(long, conflicts_with_all = ["target", "n"])]
        setup: Option<String>,
        /// `presheaves`, or a reflection from the model.
        #[arg(long)]
        target: Option<String>,
        /// `yoneda` or `localised`.
        #[arg(long)]
        n: Option<String>,
        /// Σ set for `--n localised`.
        #[arg(long)]
        sigma: Option<String>,
    },
    /// Extension compared with its special case.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Σ set for `--mode localisation`.
        #[arg(long)]
        sigma: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Yoneda,
    Localisation,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedOrder {
    Canonical,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Probicategory name; may be omitted when the model has only one.
    #[arg(long)]
    probicat: Option<String>,
    /// `finset` or `quantale:NAME`, overriding the model's backend.
    #[arg(long)]
    backend: Option<String>,
    /// Largest set per object in enumerated scopes.
    #[arg(long, default_value_t = 2)]
    scope: usize,
    #[arg(long, default_value_t = biclosed::localise::DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "canonical")]
    seed_order: SeedOrder,
    /// Include wall-clock timing (makes reports differ across runs).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] biclosed::Error),
    #[error("{0}")]
    Usage(String),
}

/// Checks plus command-specific results.
struct Outcome {
    passed: bool,
    checks: Report,
    result: Value,
}

impl Outcome {
    fn from_report(checks: Report) -> Self {
        Outcome { passed: checks.passed(), checks, result: Value::Null }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, echo) = describe(&cli.command);
    let started = Instant::now();
    let outcome = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut report = json!({
        "schema": SCHEMA,
        "command": echo,
        "status": if outcome.passed { "pass" } else { "fail" },
        "checks": outcome.checks.to_value()["checks"],
        "result": outcome.result,
    });
    if common.timing {
        report["timing"] = json!({ "elapsed_ms": started.elapsed().as_millis() as u64 });
    }
    let text = serde_json::to_string_pretty(&report).expect("report serialises");
    match &common.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("{name}: {}", if outcome.passed { "pass" } else { "fail" });
        }
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
        }
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn describe(command: &Command) -> (&'static str, &Common, Value) {
    let base = |c: &Common| {
        json!({
            "model": c.model.display().to_string(),
            "probicat": c.probicat,
            "backend": c.backend,
            "scope": c.scope,
            "max_iter": c.max_iter,
            "seed_order": "canonical",
        })
    };
    let with = |name: &'static str, c: &Common, extra: Value| {
        let mut v = base(c);
        v["name"] = json!(name);
        for (k, x) in extra.as_object().expect("object").iter() {
            v[k] = x.clone();
        }
        (name, v)
    };
    let (name, common, echo) = match command {
        Command::Check(c) => {
            let (n, v) = with("check", c, json!({}));
            (n, c, v)
        }
        Command::Convolve { common, at, left, right } => {
            let (n, v) = with("convolve", common, json!({ "at": at, "left": left, "right": right }));
            (n, common, v)
        }
        Command::Reflect { common, reflection } => {
            let (n, v) = with("reflect", common, json!({ "reflection": reflection }));
            (n, common, v)
        }
        Command::Localise { common, sigma } => {
            let (n, v) = with("localise", common, json!({ "sigma": sigma }));
            (n, common, v)
        }
        Command::Extend { common, setup, target, n, sigma } => {
            let (name, v) = with("extend", common, json!({ "setup": setup, "target": target, "n": n, "sigma": sigma }));
            (name, common, v)
        }
        Command::Compare { common, mode, sigma } => {
            let mode = match mode {
                Mode::Yoneda => "yoneda",
                Mode::Localisation => "localisation",
            };
            let (n, v) = with("compare", common, json!({ "mode": mode, "sigma": sigma }));
            (n, common, v)
        }
    };
    (name, common, echo)
}

fn scope(c: &Common) -> Scope {
    Scope::with_max_elements(c.scope)
}

fn probicat_name(model: &Model, c: &Common, wanted: Option<&str>) -> Result<String, Failure> {
    if let Some(name) = c.probicat.as_deref().or(wanted) {
        return Ok(name.to_string());
    }
    match model.probicategory_names().as_slice() {
        [only] => Ok(only.to_string()),
        [] => Err(Failure::Usage("the model defines no probicategory".into())),
        _ => Err(Failure::Usage("the model defines several probicategories; pass --probicat".into())),
    }
}

fn load(c: &Common, wanted: Option<&str>) -> Result<(Model, Probicategory), Failure> {
    let model = parse_model(&c.model)?;
    let name = probicat_name(&model, c, wanted)?;
    let p = model.probicategory(&name, c.backend.as_deref())?;
    Ok((model, p))
}

fn run(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Check(c) => {
            let (_, p) = load(c, None)?;
            Ok(Outcome::from_report(check_probicat(&p, &scope(c))?))
        }
        Command::Convolve { common, at, left, right } => convolve(common, at, left.as_deref(), right.as_deref()),
        Command::Reflect { common, reflection } => reflect(common, reflection),
        Command::Localise { common, sigma } => {
            let model = parse_model(&common.model)?;
            let spec = model
                .file
                .sigma_sets
                .0
                .get(sigma)
                .ok_or_else(|| ModelError::Unresolved(format!("sigma set `{sigma}`")))?;
            let name = probicat_name(&model, common, Some(&spec.probicategory))?;
            let p = model.probicategory(&name, common.backend.as_deref())?;
            let s = model.sigma(sigma, &p)?;
            let localised = localise_probicat(&p, s, scope(common), None, common.max_iter)?;
            let held: Vec<&str> =
                localised.conditions.checks.iter().filter(|c| c.passed()).map(|c| c.name.as_str()).collect();
            let result = json!({
                "verified": localised.verified,
                "conditions": localised.conditions.to_value()["checks"],
                "held": held,
                "local_objects": localised.setup.local(0, 0).len(),
            });
            Ok(Outcome { passed: localised.passed(), checks: localised.report, result })
        }
        Command::Extend { common, setup, target, n, sigma } => {
            extend(common, setup.as_deref(), target.as_deref(), n.as_deref(), sigma.as_deref())
        }
        Command::Compare { common, mode, sigma } => {
            let (model, p) = load(common, None)?;
            let (s, oracle) = match mode {
                Mode::Yoneda => (ExtensionSetup::yoneda(&p, scope(common))?, OracleMode::Yoneda),
                Mode::Localisation => {
                    let sigma =
                        sigma.as_deref().ok_or_else(|| Failure::Usage("--mode localisation needs --sigma".into()))?;
                    let s = model.sigma(sigma, &p)?;
                    (ExtensionSetup::localised(&p, s, common.max_iter, scope(common))?, OracleMode::Localisation)
                }
            };
            let report = compare_with_oracle(&s, oracle)?;
            Ok(Outcome { passed: report.passed() && !report.has_error(), checks: report, result: Value::Null })
        }
    }
}

fn parse_at(p: &Probicategory, at: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<&str> = at.split(',').map(str::trim).collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(Failure::Usage(format!("--at expects `x,y,z`, got `{at}`")));
    };
    let find = |s: &str| {
        p.objects()
            .iter()
            .position(|o| o == s)
            .or_else(|| s.parse::<usize>().ok().filter(|&i| i < p.object_count()))
            .ok_or_else(|| Failure::Usage(format!("unknown object `{s}`")))
    };
    Ok((find(x)?, find(y)?, find(z)?))
}

fn convolve(c: &Common, at: &str, left: Option<&str>, right: Option<&str>) -> Result<Outcome, Failure> {
    let (model, p) = load(c, None)?;
    let (x, y, z) = parse_at(&p, at)?;
    let conv = Convolution::new(&p);
    if let (Some(l), Some(r)) = (left, right) {
        let f = model.presheaf(l, p.hom(y, z))?;
        let g = model.presheaf(r, p.hom(x, y))?;
        let result = json!({ "objects": [x, y, z], "composite": conv.compose(x, y, z, &f, &g)? });
        return Ok(Outcome { passed: true, checks: Report::new(), result });
    }
    let sc = scope(c);
    let fs = sc.presheaves(p.hom(y, z))?;
    let gs = sc.presheaves(p.hom(x, y))?;
    let mut table = Vec::with_capacity(fs.len() * gs.len());
    for (i, f) in fs.iter().enumerate() {
        for (j, g) in gs.iter().enumerate() {
            table.push(json!({ "f": i, "g": j, "composite": conv.compose(x, y, z, f, g)? }));
        }
    }
    let mut checks = Report::new();
    checks.push(check_cocontinuity(&p, x, y, z, &fs, &gs, sc.cap)?);
    let result =
        json!({ "objects": [x, y, z], "left": fs, "right": gs, "identity": conv.identity(x)?, "table": table });
    Ok(Outcome { passed: checks.passed(), checks, result })
}

fn reflect(c: &Common, name: &str) -> Result<Outcome, Failure> {
    let model = parse_model(&c.model)?;
    let spec = model
        .file
        .reflections
        .0
        .get(name)
        .ok_or_else(|| ModelError::Unresolved(format!("reflection `{name}`")))?
        .clone();
    let pname = probicat_name(&model, c, Some(&spec.probicategory))?;
    let p = model.probicategory(&pname, c.backend.as_deref())?;
    let cogens = if spec.cogens.is_empty() { None } else { Some(model.hom_lists(&spec.cogens, &p)?) };
    let reflector: Box<dyn biclosed::calculus::Reflector> = match (&spec.derive, &spec.sigma) {
        (Some(Derive::Localise), Some(sigma)) => {
            Box::new(SigmaLocal { sigma: model.sigma(sigma, &p)?, max_iter: c.max_iter })
        }
        _ if spec.local.is_empty() => Box::new(IdentityReflector),
        _ => Box::new(model.closure_reflector(&spec, &p)?),
    };
    let setup = ReflectionSetup::with_representables(&p, reflector, scope(c), cogens)?;
    let (conditions, verified) = run_conditions(&setup, ConditionSide::Both)?;
    let mut checks = setup.validate()?;
    if verified.is_some() {
        checks.extend(setup.transfer_and_verify()?);
    }
    let passed = verified.is_some() && checks.passed();
    let result = json!({ "verified": verified, "conditions": conditions.to_value()["checks"] });
    Ok(Outcome { passed, checks, result })
}

fn extend(
    c: &Common,
    setup: Option<&str>,
    target: Option<&str>,
    n: Option<&str>,
    sigma: Option<&str>,
) -> Result<Outcome, Failure> {
    let model = parse_model(&c.model)?;
    let spec = match setup {
        Some(name) => Some(
            model
                .file
                .extensions
                .0
                .get(name)
                .ok_or_else(|| ModelError::Unresolved(format!("extension `{name}`")))?
                .clone(),
        ),
        None => None,
    };
    let pname = probicat_name(&model, c, spec.as_ref().map(|s| s.probicategory.as_str()))?;
    let p = model.probicategory(&pname, c.backend.as_deref())?;
    let target = spec.as_ref().map(|s| s.target.as_str()).or(target).unwrap_or("presheaves");
    let reflection = match target {
        "presheaves" => None,
        name => Some(
            model
                .file
                .reflections
                .0
                .get(name)
                .ok_or_else(|| ModelError::Unresolved(format!("reflection `{name}` (extension target)")))?
                .clone(),
        ),
    };
    let n_spec = match (&spec, n) {
        (Some(s), _) => s.n.clone(),
        (None, Some(n)) => NSpec::Named(n.to_string()),
        (None, None) => NSpec::Named("yoneda".into()),
    };
    let require_density = spec.as_ref().is_none_or(|s| s.require_density);
    let sc = scope(c);
    let s = match n_spec {
        NSpec::Named(ref n) if n == "yoneda" => {
            if reflection.is_some() {
                return Err(Failure::Usage("N = yoneda extends into all presheaves; drop the target".into()));
            }
            ExtensionSetup::yoneda(&p, sc)?
        }
        NSpec::Named(ref n) if n == "localised" => {
            let sigma = match (&reflection, sigma) {
                (_, Some(s)) => s.to_string(),
                (Some(r), None) if r.derive.is_some() => r.sigma.clone().expect("checked on parse"),
                _ => return Err(Failure::Usage("N = localised needs --sigma or a localising target".into())),
            };
            ExtensionSetup::localised(&p, model.sigma(&sigma, &p)?, c.max_iter, sc)?
        }
        NSpec::Named(n) => return Err(Failure::Usage(format!("unknown N `{n}`; use yoneda, localised or --setup"))),
        NSpec::Family(names) => {
            let k = p.object_count();
            if names.len() != k * k {
                return Err(Failure::Usage(format!("N needs {} presheaves, one per hom", k * k)));
            }
            let mut family = Vec::with_capacity(names.len());
            for (i, name) in names.iter().enumerate() {
                let cat = p.hom(i / k, i % k);
                family.push(model.presheaf(name, &cat.op().product(cat).map_err(Failure::Engine)?)?);
            }
            let reflector: Option<Box<dyn biclosed::calculus::Reflector>> = match &reflection {
                None => None,
                Some(r) => match (&r.derive, &r.sigma) {
                    (Some(Derive::Localise), Some(sigma)) => {
                        Some(Box::new(SigmaLocal { sigma: model.sigma(sigma, &p)?, max_iter: c.max_iter }))
                    }
                    _ => Some(Box::new(model.closure_reflector(r, &p)?)),
                },
            };
            // density failures become report entries rather than errors
            ExtensionSetup::new(&p, family, reflector, sc, false)?
        }
    };
    let mut ext = extend_structure(&s)?;
    let density_failed = ext.report.check("density").is_some_and(|c| !c.passed());
    if density_failed && !require_density {
        ext.report.extend(ext_iso_check(&s)?);
    }
    let result = match &ext.structure {
        Some(t) => {
            let k = p.object_count();
            let identities: Vec<Value> = (0..k).map(|x| t.identity(x).map(|i| json!(i))).collect::<Result<_, _>>()?;
            json!({ "emitted": true, "identities": identities })
        }
        None => json!({ "emitted": false }),
    };
    Ok(Outcome { passed: ext.structure.is_some(), checks: ext.report, result })
}
