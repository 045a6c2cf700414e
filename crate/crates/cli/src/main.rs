//! `confdiv`: batch front-end for conformal divergence evaluation,
//! population minimizers, robustness sweeps and clustering.
//!
//! Exit codes: 0 success, 2 domain/precondition/input errors, 3 solver
//! non-convergence (best-effort diagnostics are still written).

mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use confdiv_core::geometry::structure_from_spec;
use confdiv_core::minimizers::right_minimizer_auto;
use confdiv_core::robustness::{SweepConfig, DEFAULT_TAU};
use confdiv_core::{
    clustering, conformal_div, generator_from_id, influence, left_minimizer, make_structure,
    mapping_from_id, right_minimizer_nd, robustness_sweep, scaled_conformal_div,
    scaled_left_minimizer, symmetry_defect, weight_from_id, DivergenceSpec, Error, Result, Side,
    SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "confdiv",
    version,
    about = "Conformal divergences, their population minimizers, robustness and clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Residual tolerance of the 1D right-minimizer equation.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_root: f64,
    /// Normalized orthogonality tolerance certifying right minimizers.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_orth: f64,
    /// Iteration budget per solve.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,
    /// Output format where tabular output exists.
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct SpecArgs {
    /// Generator id: neg_log | inverse | square | half_square | power:<p> |
    /// exp | xlogx | xexpx | quadratic:<matrix-file>.
    #[arg(long)]
    gen: String,
    /// Weight: const:<K> | gbot:<K> | gp:<K>:<p> | composed-u:<K> | composed-up:<K>:<p>.
    #[arg(long)]
    weight: String,
    /// Structure as `<u-mapping>/<v-mapping>` (default: the identity
    /// structure grad:<gen>/identity).
    #[arg(long)]
    structure: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a divergence between two points.
    Eval {
        #[command(flatten)]
        spec: SpecArgs,
        /// Left point, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Right point, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        /// Positive scale w: evaluates w·D(x/w : y/w).
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Left population minimizer (closed-form weighted u-mean).
    Leftmin {
        #[command(flatten)]
        spec: SpecArgs,
        /// Sample file: {"points": [[..],..], "weights": [..]?}.
        #[arg(long)]
        points: PathBuf,
        /// Per-point positive scales: switches to the scaled left path.
        #[arg(long)]
        scales: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Right population minimizer (bracketed 1D root or q-norm path).
    Rightmin {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        points: PathBuf,
        /// q-norm order: p must equal 2k/(2k−1); defaults to the weight's k.
        #[arg(short, long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Influence of one outlier under ε-contamination.
    Influence {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        outlier: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value = "left")]
        side: String,
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Outlier sweep driven by a JSON config; CSV or JSON rows.
    Robustness {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lloyd clustering with left or right centroids.
    Cluster {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "left")]
        side: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan random pairs for the symmetry defect of a divergence.
    SymmetryScan {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scan box lower bound (defaults to the generator domain box).
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate (u, v, phi) triples from a JSON config file.
    ValidateStructure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn build_spec(args: &SpecArgs, dim: usize) -> Result<DivergenceSpec> {
    let gen = generator_from_id(&args.gen)?;
    let weight = weight_from_id(&args.weight)?;
    let structure = structure_from_spec(args.structure.as_deref(), gen, dim)?;
    Ok(DivergenceSpec::with_structure(structure, weight))
}

fn solver_config(cli: &Cli) -> SolverConfig {
    SolverConfig {
        root_tol: cli.tol_root,
        orth_tol: cli.tol_orth,
        max_iter: cli.max_iter,
        ..SolverConfig::default()
    }
}

#[derive(Deserialize)]
struct StructureEntry {
    u: String,
    v: String,
    phi: String,
    #[serde(default)]
    dim: Option<usize>,
}

#[derive(Serialize)]
struct StructureReport {
    u: String,
    v: String,
    phi: String,
    valid: bool,
    error: Option<String>,
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = solver_config(cli);
    match &cli.command {
        Command::Eval { spec, x, y, scale } => {
            let x = io::parse_vector(x)?;
            let y = io::parse_vector(y)?;
            if x.len() != y.len() {
                return Err(Error::InvalidInput(format!(
                    "field `y` has dimension {}, expected {}",
                    y.len(),
                    x.len()
                )));
            }
            let sp = build_spec(spec, x.len())?;
            let value = match scale {
                None => conformal_div(&sp, &x, &y)?,
                Some(w) => scaled_conformal_div(&sp, &x, &y, *w)?,
            };
            println!("{}", json!({ "value": value }));
            Ok(())
        }
        Command::Leftmin {
            spec,
            points,
            scales,
            out,
        } => {
            let sample = io::read_sample(points)?;
            let sp = build_spec(spec, sample.dim())?;
            let result = match scales {
                None => left_minimizer(sp.structure(), sp.weight(), &sample, &cfg)?,
                Some(s) => {
                    let scales = io::parse_vector(s)?;
                    scaled_left_minimizer(sp.generator(), sp.weight(), &sample, &scales, &cfg)?
                }
            };
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&result).unwrap(),
            )
        }
        Command::Rightmin {
            spec,
            points,
            k,
            out,
        } => {
            let sample = io::read_sample(points)?;
            let sp = build_spec(spec, sample.dim())?;
            let result = match k {
                None | Some(1) => right_minimizer_auto(sp.structure(), sp.weight(), &sample, &cfg)?,
                Some(k) => right_minimizer_nd(sp.structure(), sp.weight(), &sample, *k, &cfg)?,
            };
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&result).unwrap(),
            )
        }
        Command::Influence {
            spec,
            points,
            outlier,
            epsilon,
            side,
            tau,
            out,
        } => {
            let sample = io::read_sample(points)?;
            let sp = build_spec(spec, sample.dim())?;
            let outlier = io::parse_vector(outlier)?;
            let side: Side = side.parse()?;
            let report = influence(
                sp.structure(),
                sp.weight(),
                &sample,
                &outlier,
                *epsilon,
                side,
                *tau,
                &cfg,
            )?;
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).unwrap(),
            )
        }
        Command::Robustness { config, out } => {
            let text = std::fs::read_to_string(config).map_err(|e| {
                Error::InvalidInput(format!("cannot read `{}`: {e}", config.display()))
            })?;
            let sweep: SweepConfig = serde_json::from_str(&text).map_err(|e| {
                Error::InvalidInput(format!("`{}`: bad sweep config: {e}", config.display()))
            })?;
            let rows = robustness_sweep(&sweep, &cfg)?;
            let rendered = if cli.format == "json" && out.is_none() {
                serde_json::to_string_pretty(&rows).unwrap()
            } else {
                io::sweep_csv(&rows)
            };
            io::emit(out.as_deref(), &rendered)
        }
        Command::Cluster {
            spec,
            k,
            side,
            seed,
            points,
            iters,
            out,
        } => {
            let sample = io::read_sample(points)?;
            let sp = build_spec(spec, sample.dim())?;
            let side: Side = side.parse()?;
            let model = clustering::fit(&sample, *k, &sp, side, *seed, *iters, &cfg)?;
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&model).unwrap(),
            )
        }
        Command::SymmetryScan {
            spec,
            pairs,
            seed,
            lo,
            hi,
            out,
        } => {
            let sp = build_spec(spec, 1)?;
            let (mut blo, mut bhi) = sp.generator().domain1().probe_box(3.0);
            if let Some(l) = lo {
                blo = *l;
            }
            if let Some(h) = hi {
                bhi = *h;
            }
            if bhi <= blo || bhi.is_nan() || blo.is_nan() {
                return Err(Error::InvalidInput(format!(
                    "field `lo`/`hi`: empty scan box [{blo}, {bhi}]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut max_defect = 0.0f64;
            let mut min_defect = f64::INFINITY;
            let mut argmax = (0.0, 0.0);
            for _ in 0..*pairs {
                let a = rng.gen_range(blo..bhi);
                let mut b = rng.gen_range(blo..bhi);
                // keep the pair separated so the defect is informative
                while (a - b).abs() < 1e-3 * (bhi - blo) {
                    b = rng.gen_range(blo..bhi);
                }
                let d = symmetry_defect(&sp, &[a], &[b])?;
                if d > max_defect {
                    max_defect = d;
                    argmax = (a, b);
                }
                min_defect = min_defect.min(d);
            }
            let report = json!({
                "pairs": pairs,
                "max_defect": max_defect,
                "min_defect": min_defect,
                "argmax_pair": [argmax.0, argmax.1],
            });
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).unwrap(),
            )
        }
        Command::ValidateStructure { config, out } => {
            let text = std::fs::read_to_string(config).map_err(|e| {
                Error::InvalidInput(format!("cannot read `{}`: {e}", config.display()))
            })?;
            let entries: Vec<StructureEntry> = serde_json::from_str(&text).map_err(|e| {
                Error::InvalidInput(format!(
                    "`{}`: expected [{{\"u\", \"v\", \"phi\"}}] entries: {e}",
                    config.display()
                ))
            })?;
            let mut reports = Vec::new();
            for e in entries {
                let outcome = (|| -> Result<()> {
                    let gen = generator_from_id(&e.phi)?;
                    let dim = e.dim.or(gen.fixed_dim()).unwrap_or(1);
                    make_structure(mapping_from_id(&e.u)?, mapping_from_id(&e.v)?, gen, dim)?;
                    Ok(())
                })();
                reports.push(StructureReport {
                    u: e.u,
                    v: e.v,
                    phi: e.phi,
                    valid: outcome.is_ok(),
                    error: outcome.err().map(|err| err.to_string()),
                });
            }
            io::emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&reports).unwrap(),
            )
        }
    }
}

fn init_threads() {
    if let Ok(n) = std::env::var("CONFDIV_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() {
    let cli = Cli::parse();
    init_threads();
    if let Err(e) = run(&cli) {
        let code = e.exit_code();
        if let Error::NoConvergence {
            iterations,
            residual,
            best,
        } = &e
        {
            // best-effort diagnostics on the failure path
            let diag = json!({
                "error": e.to_string(),
                "best": best,
                "residual": residual,
                "iterations": iterations,
            });
            println!("{diag}");
        }
        eprintln!("error: {e}");
        std::process::exit(code);
    }
}
