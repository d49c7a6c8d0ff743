//! Command-line driver.
//!
//! Exit codes: 0 on success, 1 on validation or input errors, 2 when a
//! resource cap (matrix size, photon number, term or signature count) is hit.
//! Every run writes a JSON manifest: to `--manifest` if given, else next to
//! the first output file as `<stem>.manifest.json`, else as one line on
//! stderr.

use super::config::ExperimentConfig;
use super::{bound_check, fock_reduction_check, hom_check, sig9};
use crate::amplitudes::GAMMA_CHUNK_TERMS;
use crate::error::{Error, Result};
use crate::optics::{haar_random_unitary, permanent, MatrixFile};
use crate::sampler::{build_distribution, draw_samples, register_digest, unitary_digest, write_samples_csv};
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const THREADS_ENV: &str = "CATSAMPLER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "catsampler", version, about = "Cat-state boson-sampling simulator")]
struct Cli {
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Print reports as JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the output distribution of a configured experiment and sample it.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dist: Option<PathBuf>,
        #[arg(long)]
        out_samples: Option<PathBuf>,
    },
    /// Two odd cats on a 50/50 beamsplitter.
    Hom {
        #[arg(long)]
        alpha: f64,
    },
    /// Compare small-amplitude odd cats with single-photon boson sampling.
    Reduction {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Single-photon fidelity of n odd cats against the floor c * n^-k.
    Bound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Permanent of a square matrix file.
    Permanent {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Write a Haar-random unitary as a matrix file.
    Haar {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    args: Vec<String>,
    seeds: BTreeMap<&'static str, u64>,
    threads: usize,
    gamma_chunk_terms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    captured_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    register_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitary_digest: Option<String>,
    outputs: Vec<String>,
    timestamp_unix: u64,
}

/// Run the CLI on `argv` (program name first) and return the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = match thread_count() {
        Ok(t) => t,
        Err(e) => return report_error(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => return report_error(&Error::InvalidArgument(format!("thread pool: {e}"))),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        args: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        seeds: BTreeMap::new(),
        threads: pool.current_num_threads(),
        gamma_chunk_terms: GAMMA_CHUNK_TERMS,
        captured_mass: None,
        register_digest: None,
        unitary_digest: None,
        outputs: Vec::new(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    match pool.install(|| execute(&cli, manifest)) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    if e.is_resource_cap() {
        2
    } else {
        1
    }
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Hom { .. } => "hom",
        Command::Reduction { .. } => "reduction",
        Command::Bound { .. } => "bound",
        Command::Permanent { .. } => "permanent",
        Command::Haar { .. } => "haar",
    }
}

fn execute(cli: &Cli, mut manifest: Manifest) -> Result<()> {
    let report = match &cli.command {
        Command::Simulate {
            config,
            samples,
            seed,
            out_dist,
            out_samples,
        } => {
            let cfg = ExperimentConfig::load(config)?;
            let exp = cfg.build()?;
            let seed = seed.unwrap_or(cfg.seed);
            let count = samples.unwrap_or(cfg.samples);
            let dist = build_distribution(&exp.unitary, &exp.register, &exp.policy)?;
            let drawn = if count > 0 { draw_samples(&dist, count, seed)? } else { Vec::new() };

            manifest.seeds.insert("sampling", seed);
            manifest.captured_mass = Some(dist.captured_mass);
            manifest.register_digest = Some(register_digest(&exp.register));
            manifest.unitary_digest = Some(unitary_digest(&exp.unitary));

            if let Some(path) = out_dist.as_ref().or(cfg.out_dist.as_ref()) {
                write_file(path, |w| dist.write_csv(w))?;
                manifest.outputs.push(path.display().to_string());
                if cli.json {
                    let mirror = path.with_extension("json");
                    write_json(&mirror, &dist.to_json())?;
                    manifest.outputs.push(mirror.display().to_string());
                }
            }
            if let Some(path) = out_samples.as_ref().or(cfg.out_samples.as_ref()) {
                write_file(path, |w| write_samples_csv(dist.modes, &drawn, w))?;
                manifest.outputs.push(path.display().to_string());
                if cli.json {
                    let mirror = path.with_extension("json");
                    write_json(&mirror, &json!({ "modes": dist.modes, "samples": drawn }))?;
                    manifest.outputs.push(mirror.display().to_string());
                }
            }

            let text = vec![
                ("modes", dist.modes.to_string()),
                ("cutoffs", format!("{:?}", exp.policy.per_mode_max)),
                ("signatures", dist.entries.len().to_string()),
                ("captured_mass", sig9(dist.captured_mass)),
                ("samples", drawn.len().to_string()),
                ("seed", seed.to_string()),
            ];
            let value = json!({
                "modes": dist.modes,
                "cutoffs": exp.policy.per_mode_max,
                "signatures": dist.entries.len(),
                "captured_mass": dist.captured_mass,
                "samples": drawn.len(),
                "seed": seed,
            });
            (text, value)
        }
        Command::Hom { alpha } => {
            let r = hom_check(*alpha)?;
            manifest.captured_mass = Some(r.captured_mass);
            manifest.register_digest = Some(r.distribution.register_digest.clone());
            manifest.unitary_digest = Some(r.distribution.unitary_digest.clone());
            let text = vec![
                ("alpha", sig9(r.alpha)),
                ("P(1,1)", sig9(r.p11)),
                ("P(2,0)", sig9(r.p20)),
                ("P(0,2)", sig9(r.p02)),
                ("|P(2,0) - 1/2|", sig9(r.dev20)),
                ("|P(0,2) - 1/2|", sig9(r.dev02)),
                ("gamma(1,1)", complex9(r.gamma11)),
                ("gamma(2,0)", complex9(r.gamma20)),
                ("gamma(0,2)", complex9(r.gamma02)),
                ("signs_match", r.signs_match.to_string()),
                ("captured_mass", sig9(r.captured_mass)),
            ];
            (text, serde_json::to_value(&r).expect("report serializes"))
        }
        Command::Reduction { n, m, alpha, seed } => {
            let r = fock_reduction_check(*n, *m, *alpha, *seed)?;
            manifest.seeds.insert("haar", *seed);
            let text = vec![
                ("n", r.n.to_string()),
                ("m", r.m.to_string()),
                ("alpha", sig9(r.alpha)),
                ("seed", r.seed.to_string()),
                ("signatures_checked", r.signatures_checked.to_string()),
                ("max_deviation", sig9(r.max_deviation)),
                ("fitted_c", sig9(r.fitted_c)),
            ];
            (text, serde_json::to_value(&r).expect("report serializes"))
        }
        Command::Bound { n, alpha, c, k } => {
            let r = bound_check(*n, *alpha, *c, *k)?;
            let text = vec![
                ("n", r.n.to_string()),
                ("alpha", sig9(r.alpha)),
                ("probability", sig9(r.probability)),
                ("ln_probability", sig9(r.ln_probability)),
                ("threshold", sig9(r.threshold)),
                ("satisfied", r.satisfied.to_string()),
                ("underflow", r.underflow.to_string()),
            ];
            (text, serde_json::to_value(&r).expect("report serializes"))
        }
        Command::Permanent { matrix } => {
            let file: MatrixFile = read_json(matrix)?;
            let value = permanent(&file.to_matrix()?)?;
            let text = vec![("dim", file.dim.to_string()), ("permanent", complex9(value))];
            (text, json!({ "dim": file.dim, "permanent": [value.re, value.im] }))
        }
        Command::Haar { m, seed, out } => {
            if *m == 0 {
                return Err(Error::InvalidArgument("m must be at least 1".into()));
            }
            let u = haar_random_unitary(*m, *seed);
            write_json(out, &MatrixFile::from_matrix(u.matrix()))?;
            manifest.seeds.insert("haar", *seed);
            manifest.unitary_digest = Some(unitary_digest(&u));
            manifest.outputs.push(out.display().to_string());
            let text = vec![
                ("m", m.to_string()),
                ("seed", seed.to_string()),
                ("unitarity_deviation", sig9(u.unitarity_deviation())),
                ("out", out.display().to_string()),
            ];
            (text, json!({ "m": m, "seed": seed, "out": out }))
        }
    };

    let (text, value) = report;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
    } else {
        for (key, val) in text {
            println!("{key} = {val}");
        }
    }
    emit_manifest(cli.manifest.as_deref(), &manifest)
}

fn complex9(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{} {sign} {}i", sig9(z.re), sig9(z.im.abs()))
}

fn emit_manifest(explicit: Option<&Path>, manifest: &Manifest) -> Result<()> {
    let target = explicit.map(Path::to_path_buf).or_else(|| {
        manifest.outputs.first().map(|first| {
            let first = Path::new(first);
            let stem = first.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            first.with_file_name(format!("{stem}.manifest.json"))
        })
    });
    let value = serde_json::to_value(manifest).expect("manifest serializes");
    match target {
        Some(path) => write_json(&path, &value),
        None => {
            eprintln!("{value}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), &e))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    body(&mut writer)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::json(path.display().to_string(), &e))?;
        writeln!(w).map_err(|e| Error::io(path, e))
    })
}

