//! Experiment runner and report emitter for the Walsh phase-plane library.
//!
//! One entry point: `walsh-carleson --experiment <name> [flags]`.  Reports go
//! to `--out` as CSV (one `# `-prefixed header block, then a deterministic
//! body) or as a JSON envelope; the exit status is nonzero iff an assertion
//! with a configured constant failed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, ValueEnum};

use walsh_carleson::config::Constants;
use walsh_carleson::dyadic::LacunarySequence;
use walsh_carleson::experiments::{self, RunSettings};
use walsh_carleson::io;
use walsh_carleson::report::{content_hash, ExperimentReport, ExtraFiles, ReportEnvelope};

const MAX_CLI_RESOLUTION: u8 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Transform,
    CarlesonIdentity,
    Decompose,
    Zygmund,
    RestrictedWeak,
    StrongType,
    Distribution,
    Antonov,
    FinalNorms,
    VerifyCertificate,
}

impl ExperimentName {
    fn as_str(&self) -> &'static str {
        match self {
            Self::Transform => "transform",
            Self::CarlesonIdentity => "carleson-identity",
            Self::Decompose => "decompose",
            Self::Zygmund => "zygmund",
            Self::RestrictedWeak => "restricted-weak",
            Self::StrongType => "strong-type",
            Self::Distribution => "distribution",
            Self::Antonov => "antonov",
            Self::FinalNorms => "final-norms",
            Self::VerifyCertificate => "verify-certificate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "walsh-carleson",
    about = "Walsh phase-plane experiments: transforms, tile decompositions, and the lacunary Carleson inequality suites"
)]
struct Cli {
    /// Experiment to run.
    #[arg(long, value_enum)]
    experiment: ExperimentName,

    /// Dyadic grid resolution K (2^K cells), at most 16.
    #[arg(long, default_value_t = 10)]
    resolution: u8,

    /// Lacunarity ratio for a generated sequence (default 2: terms 2^j).
    #[arg(long, conflicts_with = "lacunary_list")]
    lacunary_ratio: Option<f64>,

    /// Explicit comma-separated sequence, e.g. 2,4,8,16.
    #[arg(long)]
    lacunary_list: Option<String>,

    /// Inclusive m-range a..b for the 2^-m family experiments.
    #[arg(long)]
    m_range: Option<String>,

    /// RNG seed; identical config+seed replays byte-identical CSV bodies.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker threads for grid experiments.
    #[arg(long, default_value_t = 1)]
    jobs: usize,

    /// Output directory.
    #[arg(long, default_value = "reports")]
    out: PathBuf,

    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Constant override NAME=VALUE (repeatable); unknown names rejected.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,

    /// Certificate JSON for --experiment verify-certificate.
    #[arg(long)]
    certificate: Option<PathBuf>,
}

fn build_settings(cli: &Cli) -> anyhow::Result<RunSettings> {
    if cli.resolution < 2 || cli.resolution > MAX_CLI_RESOLUTION {
        bail!(
            "field --resolution: {} is outside 2..={MAX_CLI_RESOLUTION}",
            cli.resolution
        );
    }
    let seq = if let Some(list) = &cli.lacunary_list {
        let seq = io::parse_lacunary_list(list).context("field --lacunary-list")?;
        seq.check_resolution(cli.resolution)
            .context("field --lacunary-list")?;
        seq
    } else if let Some(ratio) = cli.lacunary_ratio {
        if (ratio - 2.0).abs() < 1e-12 {
            LacunarySequence::powers_of_two(cli.resolution)?
        } else {
            LacunarySequence::geometric(ratio, 2, cli.resolution)?
        }
    } else {
        LacunarySequence::powers_of_two(cli.resolution)?
    };
    let mut consts = Constants::default();
    for s in &cli.set {
        let (name, value) = io::parse_set_override(s).context("field --set")?;
        consts.set(&name, value).context("field --set")?;
    }
    let mut settings = RunSettings::new(cli.resolution, seq, cli.seed);
    settings.consts = consts;
    settings.jobs = cli.jobs.max(1);
    if let Some(r) = &cli.m_range {
        settings.m_range = io::parse_m_range(r).context("field --m-range")?;
    }
    Ok(settings)
}

fn config_json(cli: &Cli, settings: &RunSettings) -> serde_json::Value {
    serde_json::json!({
        "experiment": cli.experiment.as_str(),
        "resolution": settings.resolution,
        "sequence": settings.seq.terms(),
        "sequence_ratio": settings.seq.ratio(),
        "m_range": [settings.m_range.0, settings.m_range.1],
        "seed": settings.seed,
        "jobs": settings.jobs,
        "constants": settings.consts,
        "format": match cli.format { Format::Csv => "csv", Format::Json => "json" },
    })
}

/// Written files are tracked so a failing run leaves nothing behind.
struct OutputTracker {
    written: Vec<PathBuf>,
}

impl OutputTracker {
    fn new() -> Self {
        Self {
            written: Vec::new(),
        }
    }

    fn write(&mut self, path: &Path, body: &str) -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    fn discard_all(&mut self) {
        for path in self.written.drain(..) {
            let _ = fs::remove_file(path);
        }
    }
}

fn emit(
    cli: &Cli,
    settings: &RunSettings,
    report: ExperimentReport,
    extra: ExtraFiles,
    tracker: &mut OutputTracker,
) -> anyhow::Result<bool> {
    let config = config_json(cli, settings);
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let pass = report.pass;
    match cli.format {
        Format::Csv => {
            let mut text = String::new();
            text.push_str(&format!("# walsh-carleson {}\n", report.experiment));
            text.push_str(&format!("# timestamp: {stamp}\n"));
            text.push_str(&format!(
                "# config-hash: {}\n",
                content_hash(config.to_string().as_bytes())
            ));
            for note in &report.notes {
                text.push_str(&format!("# note: {note}\n"));
            }
            text.push_str(&report.csv_body());
            let path = cli.out.join(format!("{}.csv", report.experiment));
            tracker.write(&path, &text)?;
        }
        Format::Json => {
            let envelope = ReportEnvelope::new(config, vec![report.clone()]);
            let path = cli.out.join(format!("{}.json", report.experiment));
            tracker.write(&path, &envelope.to_json())?;
        }
    }
    for (stem, body) in &extra.csv {
        tracker.write(&cli.out.join(format!("{stem}.csv")), body)?;
    }
    for (stem, body) in &extra.json {
        tracker.write(&cli.out.join(format!("{stem}.json")), body)?;
    }
    Ok(pass)
}

fn verify_certificate(path: &Path) -> anyhow::Result<bool> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = io::parse_certificate_json(&bytes)?;
    if let Some(f) = &parsed.f {
        if f.resolution() != parsed.resolution {
            bail!(
                "resolution mismatch: certificate says K={} but f has K={}",
                parsed.resolution,
                f.resolution()
            );
        }
    }
    if let Some(g) = &parsed.g {
        if g.resolution() != parsed.resolution {
            bail!(
                "resolution mismatch: certificate says K={} but G has K={}",
                parsed.resolution,
                g.resolution()
            );
        }
    }
    let outcome = parsed.certificate.verify(
        parsed.f.as_ref(),
        parsed.g.as_ref(),
        parsed.choice.as_ref(),
    )?;
    println!(
        "certificate: kind={:?} members={} trees={} claimed sum {}",
        parsed.certificate.kind,
        parsed.certificate.input.len(),
        parsed.certificate.trees.len(),
        parsed.certificate.tree_top_length_sum,
    );
    let recomputed: f64 = parsed
        .certificate
        .trees
        .iter()
        .map(walsh_carleson::tiles::Tree::top_length)
        .sum();
    println!(
        "recomputed: sum {} ratio {}",
        recomputed, parsed.certificate.measured_ratio
    );
    if outcome.ok() {
        println!("verify: PASS");
        Ok(true)
    } else {
        for d in &outcome.diffs {
            println!("diff: {d}");
        }
        println!("verify: FAIL");
        Ok(false)
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if cli.experiment == ExperimentName::VerifyCertificate {
        let path = cli
            .certificate
            .as_ref()
            .ok_or_else(|| anyhow!("field --certificate: required for verify-certificate"))?;
        return verify_certificate(path);
    }
    let settings = build_settings(cli)?;
    let mut tracker = OutputTracker::new();
    let result = (|| -> anyhow::Result<bool> {
        let (report, extra) = match cli.experiment {
            ExperimentName::Transform => experiments::run_transform(&settings)?,
            ExperimentName::CarlesonIdentity => experiments::run_carleson_identity(&settings)?,
            ExperimentName::Decompose => experiments::run_decompose(&settings)?,
            ExperimentName::Zygmund => experiments::run_zygmund(&settings)?,
            ExperimentName::RestrictedWeak => experiments::run_restricted_weak(&settings)?,
            ExperimentName::StrongType => experiments::run_strong_type(&settings)?,
            ExperimentName::Distribution => experiments::run_distribution(&settings)?,
            ExperimentName::Antonov => experiments::run_antonov(&settings)?,
            ExperimentName::FinalNorms => experiments::run_final_norms(&settings)?,
            ExperimentName::VerifyCertificate => unreachable!("handled above"),
        };
        emit(cli, &settings, report, extra, &mut tracker)
    })();
    match result {
        Ok(pass) => {
            if pass {
                println!("{}: PASS", cli.experiment.as_str());
            } else {
                println!(
                    "{}: FAIL (see {})",
                    cli.experiment.as_str(),
                    cli.out.display()
                );
            }
            Ok(pass)
        }
        Err(e) => {
            tracker.discard_all();
            Err(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
