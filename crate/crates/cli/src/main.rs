use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use qchull::coneplane::{broom_check, brunn2_verify, ConeConfig, ConePoint};
use qchull::convexify::{nu_estimate, tree_brunn_check, ConvOptions};
use qchull::euclid_hull::{brunn_verify_rn, Vector};
use qchull::product::ProductPoint;
use qchull::rational::{fmt_q, parse_q, to_f64, Q};
use qchull::subgroup::{
    classify, cocompactness_radius, find_translation_powers, hull_product_check, orbit_ball, HullOptions,
    SubgroupGens,
};
use qchull::tree::TreePoint;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: qchull::Error },
    #[error(transparent)]
    Lib(#[from] qchull::Error),
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qchull", version, about = "Iterated convex hulls in tree x R^n, cone planes and subgroups of F_m x Z^n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// nu(L) curve of orbit balls, as CSV.
    QcEstimate(QcArgs),
    /// Brunn-number check in R^n, a cone plane or a tree.
    Brunn(BrunnArgs),
    /// Classify a subgroup and search for translation witnesses.
    Classify(ClassifyArgs),
    /// Hull-structure check and cocompactness radius of an orbit ball.
    HullCheck(HullArgs),
    /// Geodesic broom check through the cone apex.
    ConeBroom(BroomArgs),
}

#[derive(Args)]
struct QcArgs {
    /// Subgroup file (JSON or TOML).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "1/8")]
    epsilon: String,
    /// Largest word length L; the curve covers L = 1..=max_len.
    #[arg(long, default_value_t = 6)]
    max_len: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Space {
    Rn,
    Cone,
    Tree,
}

#[derive(Args)]
struct BrunnArgs {
    #[arg(long, value_enum)]
    space: Space,
    /// Point set (JSON); a seeded random instance is used when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "1/20")]
    epsilon: String,
    /// Dimension of random R^n instances.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Generation compared with conv^1 in the tree space.
    #[arg(long, default_value_t = 2)]
    iters: usize,
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
    /// Snap generations larger than this; defaults to 2000 in R^3 and trees, otherwise the cap.
    #[arg(long)]
    snap_above: Option<usize>,
    #[arg(long, default_value = "5/2·π")]
    theta: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    input: PathBuf,
    /// Word length searched for witnesses.
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    /// Word length for the hull check and radius; 0 skips them.
    #[arg(long, default_value_t = 3)]
    hull_len: usize,
    #[arg(long, default_value = "1/8")]
    epsilon: String,
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
}

#[derive(Args)]
struct HullArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    #[arg(long, default_value = "1/8")]
    epsilon: String,
    #[arg(long, default_value_t = 200_000)]
    cap: usize,
}

#[derive(Args)]
struct BroomArgs {
    /// Configuration {"a1": .., "a2": .., "b": ..} (JSON); seeded random when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "5/2·π")]
    theta: String,
    #[arg(long, default_value_t = 9)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match &cli.out {
            Some(path) => match fs::write(path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    ExitCode::FAILURE
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(e @ CliError::Usage(_)) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::QcEstimate(a) => qc_estimate(a),
        Command::Brunn(a) => brunn(a),
        Command::Classify(a) => classify_cmd(a),
        Command::HullCheck(a) => hull_check(a),
        Command::ConeBroom(a) => cone_broom(a),
    }
}

fn envelope(command: &str, config: Value, report: Value) -> Result<String> {
    let doc = json!({
        "tool": "qchull",
        "version": qchull::VERSION,
        "command": command,
        "config": config,
        "report": report,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
    s.push('\n');
    Ok(s)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn epsilon(s: &str) -> Result<Q> {
    let e = parse_q(s).map_err(|_| CliError::Usage(format!("--epsilon: invalid rational {s:?}")))?;
    if e <= Q::from_integer(0) {
        return Err(CliError::Usage("--epsilon must be positive".into()));
    }
    Ok(e)
}

fn cone_config(s: &str) -> Result<ConeConfig> {
    s.parse().map_err(|e: qchull::Error| CliError::Usage(format!("--theta: {e}")))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_subgroup(path: &Path) -> Result<SubgroupGens> {
    let text = read(path)?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => SubgroupGens::from_toml(&text),
        _ => SubgroupGens::from_json(&text),
    };
    parsed.map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

fn subgroup_value(h: &SubgroupGens) -> Value {
    serde_json::from_str(&h.to_json()).expect("subgroup json")
}

fn qc_estimate(a: &QcArgs) -> Result<String> {
    let eps = epsilon(&a.epsilon)?;
    if a.max_len == 0 {
        return Err(CliError::Usage("--max-len must be at least 1".into()));
    }
    let h = load_subgroup(&a.input)?;
    let x0 = ProductPoint::origin(h.dim());
    let config = json!({
        "input": a.input.display().to_string(),
        "subgroup": subgroup_value(&h),
        "epsilon": fmt_q(&eps),
        "max_len": a.max_len,
        "basepoint": x0,
    });
    let mut out = String::new();
    writeln!(out, "# qchull {} qc-estimate", qchull::VERSION).unwrap();
    writeln!(out, "# config {}", serde_json::to_string(&config).expect("json")).unwrap();
    writeln!(out, "L,orbit_size,nu").unwrap();
    for l in 1..=a.max_len {
        let ball = orbit_ball(&h, &x0, l)?;
        let nu = nu_estimate(&ball.cloud, &eps)?;
        writeln!(out, "{l},{},{}", ball.cloud.len(), nu.value).unwrap();
    }
    Ok(out)
}

fn random_rn(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Vector> {
    // R^3 instances live in a smaller box so that conv^3 stays tractable
    let hi = if dim == 3 { 32 } else { 64 };
    (0..5).map(|_| (0..dim).map(|_| Q::new(rng.gen_range(0..=hi), 64)).collect()).collect()
}

fn random_cone(rng: &mut ChaCha8Rng, cfg: &ConeConfig) -> Result<Vec<ConePoint>> {
    (0..4)
        .map(|_| Ok(ConePoint::new(rng.gen_range(0.05..0.5), rng.gen_range(0.0..cfg.theta()), cfg)?))
        .collect()
}

fn random_tree(rng: &mut ChaCha8Rng) -> Vec<TreePoint> {
    const WORDS: [&str; 5] = ["", "a", "b", "A", "B"];
    const LETTERS: [char; 4] = ['a', 'b', 'A', 'B'];
    (0..5)
        .map(|_| {
            let w = WORDS[rng.gen_range(0..WORDS.len())];
            let spec = if rng.gen_bool(0.5) {
                w.to_string()
            } else {
                let back = w.chars().last().map(|c| if c.is_lowercase() { c.to_ascii_uppercase() } else { c.to_ascii_lowercase() });
                let choices: Vec<char> = LETTERS.iter().copied().filter(|&c| Some(c) != back).collect();
                let x = choices[rng.gen_range(0..choices.len())];
                format!("{w}+{x}@{}/8", rng.gen_range(1..8))
            };
            spec.parse().expect("well-formed tree point")
        })
        .collect()
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Input { path: path.to_path_buf(), source: qchull::Error::Parse(e.to_string()) })
}

fn brunn(a: &BrunnArgs) -> Result<String> {
    let eps = epsilon(&a.epsilon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut config = json!({
        "space": a.space,
        "epsilon": fmt_q(&eps),
        "seed": a.seed,
        "input": a.input.as_ref().map(|p| p.display().to_string()),
    });
    let report = match a.space {
        Space::Rn => {
            let points: Vec<Vector> = match &a.input {
                Some(p) => {
                    let raw: Vec<Vec<String>> = parse_json(p, &read(p)?)?;
                    raw.iter()
                        .map(|v| v.iter().map(|x| parse_q(x)).collect::<qchull::Result<Vector>>())
                        .collect::<qchull::Result<_>>()
                        .map_err(|source| CliError::Input { path: p.clone(), source })?
                }
                None => {
                    if !(2..=3).contains(&a.dim) {
                        return Err(CliError::Usage("--dim must be 2 or 3".into()));
                    }
                    random_rn(&mut rng, a.dim)
                }
            };
            let dim = points.first().map_or(0, |p| p.len());
            let opts = ConvOptions {
                cap: a.cap,
                snap_above: a.snap_above.or(if dim == 3 { Some(2000) } else { None }),
                pair_budget: None,
            };
            config["cap"] = json!(opts.cap);
            config["snap_above"] = json!(opts.snap_above);
            config["points"] = json!(points.iter().map(|p| p.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>());
            to_value(&brunn_verify_rn(&points, &eps, &opts)?)
        }
        Space::Cone => {
            let cfg = cone_config(&a.theta)?;
            let points: Vec<ConePoint> = match &a.input {
                Some(p) => {
                    let raw: Vec<ConePoint> = parse_json(p, &read(p)?)?;
                    raw.iter()
                        .map(|c| ConePoint::new(c.r, c.phi, &cfg))
                        .collect::<qchull::Result<_>>()
                        .map_err(|source| CliError::Input { path: p.clone(), source })?
                }
                None => random_cone(&mut rng, &cfg)?,
            };
            config["theta"] = json!(cfg);
            config["points"] = json!(points);
            to_value(&brunn2_verify(&points, to_f64(&eps), &cfg)?)
        }
        Space::Tree => {
            let points: Vec<TreePoint> = match &a.input {
                Some(p) => {
                    let raw: Vec<String> = parse_json(p, &read(p)?)?;
                    raw.iter()
                        .map(|s| s.parse::<TreePoint>())
                        .collect::<qchull::Result<_>>()
                        .map_err(|source| CliError::Input { path: p.clone(), source })?
                }
                None => random_tree(&mut rng),
            };
            if a.iters == 0 {
                return Err(CliError::Usage("--iters must be at least 1".into()));
            }
            let m = points.iter().map(|t| t.base().max_generator()).max().unwrap_or(0).max(2);
            let opts = ConvOptions { cap: a.cap, snap_above: a.snap_above.or(Some(2000)), pair_budget: None };
            config["m"] = json!(m);
            config["iters"] = json!(a.iters);
            config["cap"] = json!(opts.cap);
            config["snap_above"] = json!(opts.snap_above);
            config["points"] = json!(points);
            to_value(&tree_brunn_check(&points, m, a.iters, &eps, &opts)?)
        }
    };
    envelope("brunn", config, report)
}

fn hull_options(cap: usize) -> HullOptions {
    HullOptions { conv: ConvOptions::with_cap(cap), ..Default::default() }
}

fn skipped_or<T: Serialize>(r: qchull::Result<T>) -> Result<Value> {
    match r {
        Ok(x) => Ok(to_value(&x)),
        Err(qchull::Error::Precondition(msg)) => Ok(json!({ "skipped": msg })),
        Err(e) => Err(e.into()),
    }
}

fn classify_cmd(a: &ClassifyArgs) -> Result<String> {
    let eps = epsilon(&a.epsilon)?;
    let h = load_subgroup(&a.input)?;
    let x0 = ProductPoint::origin(h.dim());
    let config = json!({
        "input": a.input.display().to_string(),
        "subgroup": subgroup_value(&h),
        "max_len": a.max_len,
        "hull_len": a.hull_len,
        "epsilon": fmt_q(&eps),
        "cap": a.cap,
        "basepoint": x0,
    });
    let mut report = json!({
        "classification": to_value(&classify(&h, a.max_len)?),
        "translations": to_value(&find_translation_powers(&h, a.max_len)?),
    });
    if a.hull_len > 0 {
        let opts = hull_options(a.cap);
        report["hull_check"] = skipped_or(hull_product_check(&h, &x0, a.hull_len, &eps, &opts))?;
        report["cocompactness"] = skipped_or(cocompactness_radius(&h, &x0, a.hull_len, &eps, &opts))?;
    }
    envelope("classify", config, report)
}

fn hull_check(a: &HullArgs) -> Result<String> {
    let eps = epsilon(&a.epsilon)?;
    let h = load_subgroup(&a.input)?;
    let x0 = ProductPoint::origin(h.dim());
    let config = json!({
        "input": a.input.display().to_string(),
        "subgroup": subgroup_value(&h),
        "max_len": a.max_len,
        "epsilon": fmt_q(&eps),
        "cap": a.cap,
        "basepoint": x0,
    });
    let opts = hull_options(a.cap);
    let report = json!({
        "hull_check": to_value(&hull_product_check(&h, &x0, a.max_len, &eps, &opts)?),
        "cocompactness": to_value(&cocompactness_radius(&h, &x0, a.max_len, &eps, &opts)?),
    });
    envelope("hull-check", config, report)
}

#[derive(Serialize, serde::Deserialize)]
struct BroomInput {
    a1: ConePoint,
    a2: ConePoint,
    b: ConePoint,
}

fn cone_broom(a: &BroomArgs) -> Result<String> {
    let cfg = cone_config(&a.theta)?;
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let input = match &a.input {
        Some(p) => {
            let raw: BroomInput = parse_json(p, &read(p)?)?;
            let fix = |c: &ConePoint| ConePoint::new(c.r, c.phi, &cfg);
            BroomInput { a1: fix(&raw.a1)?, a2: fix(&raw.a2)?, b: fix(&raw.b)? }
        }
        None => {
            // both a_i at angular gap >= pi from b, so [a_i, b] runs through the apex
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let pi = std::f64::consts::PI;
            let phi_b = rng.gen_range(0.0..cfg.theta());
            let b = ConePoint::new(rng.gen_range(0.1..2.0), phi_b, &cfg)?;
            let mut far = || -> Result<ConePoint> {
                let phi = phi_b + pi + rng.gen_range(0.0..=cfg.theta() - 2.0 * pi);
                Ok(ConePoint::new(rng.gen_range(0.1..2.0), phi, &cfg)?)
            };
            BroomInput { a1: far()?, a2: far()?, b }
        }
    };
    let config = json!({
        "theta": cfg,
        "samples": a.samples,
        "seed": a.seed,
        "input": a.input.as_ref().map(|p| p.display().to_string()),
        "configuration": input,
    });
    let report = broom_check(&input.a1, &input.a2, &input.b, a.samples, &cfg)?;
    envelope("cone-broom", config, to_value(&report))
}
