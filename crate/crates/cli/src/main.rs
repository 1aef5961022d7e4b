use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fabry::entire_products::ProductSpec;
use fabry::experiment::{theorem1_experiment, ExperimentOptions};
use fabry::lattice_sets::{
    density_curve_with, DensityOptions, IndexSet, DEFAULT_MIN_WINDOW_POINTS, DEFAULT_R_GRID,
};
use fabry::series_builder::{build_series, HypothesisTolerances, REGULARITY_TOLERANCE, RADIUS_TOLERANCE};
use fabry::sign_analysis::{
    gap_profile, lemma4_bound, regularity_profile, sign_change_set, RealSequence, DEFAULT_SUPPORT_TOLERANCE,
};
use fabry::singularity_probe::{probe, FroissartPolicy, ProbeOptions, DOUBLET_TOLERANCE, UNIT_BAND};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

/// Sign-change gap theorem experiments: densities, sign changes, entire
/// products, series construction and singularity probes.
#[derive(Parser, Debug)]
#[command(name = "fabry", version)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Window-density curve and scalar min/max density estimates of a set.
    Density(DensityArgs),
    /// Support, sign changes, zero-count bound, gap and regularity profiles.
    Signs(SignsArgs),
    /// Evaluate an entire product with zeros on a set.
    Product {
        #[command(subcommand)]
        command: ProductCommand,
    },
    /// Build the series a_m = (-1)^m F(m) whose support is the given set.
    Build(BuildArgs),
    /// Radius estimate, Padé poles and arc clearance of a coefficient file.
    Probe(ProbeArgs),
    /// Run the full theorem experiment on a set.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1(VerifyArgs),
    /// Write a periodic set file.
    GenSet(GenSetArgs),
}

#[derive(Args, Debug)]
struct DensityArgs {
    set_file: PathBuf,
    #[command(flatten)]
    density: DensityFlags,
}

#[derive(Args, Debug, Clone)]
struct DensityFlags {
    /// Decreasing window ratios r.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_R_GRID.to_vec())]
    r_grid: Vec<f64>,
    /// Lower end of the x scan (default horizon/8).
    #[arg(long)]
    x_lo: Option<f64>,
    /// Smallest admissible r·x_lo.
    #[arg(long, default_value_t = DEFAULT_MIN_WINDOW_POINTS)]
    min_window_points: f64,
}

impl DensityFlags {
    fn options(&self) -> DensityOptions {
        DensityOptions {
            r_grid: self.r_grid.clone(),
            x_lo: self.x_lo,
            min_window_points: self.min_window_points,
        }
    }
}

#[derive(Args, Debug)]
struct SignsArgs {
    coeff_file: PathBuf,
    /// Relative support threshold τ.
    #[arg(long, default_value_t = DEFAULT_SUPPORT_TOLERANCE)]
    tolerance: f64,
    /// Window ratio of the gap profile.
    #[arg(long, default_value_t = 0.1)]
    gap_r: f64,
    /// First index of the regularity profile (default max(1, N/2)).
    #[arg(long)]
    m_min: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum ProductCommand {
    /// log|F(z)| at the given points.
    Eval {
        spec_file: PathBuf,
        /// Points as `re,im`; repeatable.
        #[arg(long = "z", required = true, allow_hyphen_values = true)]
        z: Vec<String>,
    },
    /// Indicator estimate along the ray arg z = θ.
    Indicator {
        spec_file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 1000.0)]
        t_max: f64,
    },
    /// Zero counts #(S ∩ [m, (1+r)m]) / m, or on [from, to].
    Zeros {
        spec_file: PathBuf,
        #[arg(long, required_unless_present = "from")]
        m: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, requires = "to")]
        from: Option<f64>,
        #[arg(long, requires = "from")]
        to: Option<f64>,
    },
}

#[derive(Args, Debug)]
struct BuildArgs {
    set_file: PathBuf,
    #[arg(long)]
    n: u64,
    /// Also write the coefficients in the m,a_m CSV format.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeFlags {
    /// Padé numerator degree (default ⌊N/2⌋ - 1).
    #[arg(long)]
    l: Option<usize>,
    /// Padé denominator degree (default ⌊N/2⌋ - 1).
    #[arg(long)]
    m: Option<usize>,
    /// Half-width of the unit-circle band.
    #[arg(long, default_value_t = UNIT_BAND)]
    band: f64,
    /// Relative pole–zero distance of a Froissart doublet.
    #[arg(long, default_value_t = DOUBLET_TOLERANCE)]
    doublet_tolerance: f64,
}

impl ProbeFlags {
    fn options(&self) -> ProbeOptions {
        ProbeOptions {
            l: self.l,
            m: self.m,
            band: self.band,
            froissart: FroissartPolicy {
                tolerance: self.doublet_tolerance,
            },
        }
    }
}

#[derive(Args, Debug)]
struct ProbeArgs {
    coeff_file: PathBuf,
    #[arg(long)]
    delta: f64,
    #[command(flatten)]
    probe: ProbeFlags,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    set_file: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    n: u64,
    /// Analyse this coefficient file instead of building a series.
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, default_value_t = REGULARITY_TOLERANCE)]
    regularity_tolerance: f64,
    #[arg(long, default_value_t = RADIUS_TOLERANCE)]
    radius_tolerance: f64,
    #[command(flatten)]
    density: DensityFlags,
    #[command(flatten)]
    probe: ProbeFlags,
}

#[derive(Args, Debug)]
struct GenSetArgs {
    #[arg(long)]
    period: u64,
    #[arg(long, value_delimiter = ',', required = true)]
    residues: Vec<u64>,
    #[arg(long)]
    horizon: u64,
}

/// Failure modes mapped to exit codes.
enum Failure {
    Input(String),
    Verdict,
}

impl From<fabry::Error> for Failure {
    fn from(e: fabry::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: fabry::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_set(path: &Path) -> Result<IndexSet, Failure> {
    with_path(path, IndexSet::parse(&read(path)?))
}

fn read_series(path: &Path) -> Result<RealSequence, Failure> {
    with_path(path, RealSequence::parse_csv(&read(path)?))
}

fn parse_point(s: &str) -> Result<Complex64, Failure> {
    let bad = || Failure::Input(format!("point `{s}` is not of the form re,im"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn envelope(command: &str, parameters: Value, result: impl Serialize) -> Value {
    json!({
        "command": command,
        "parameters": parameters,
        "result": result,
    })
}

struct Outcome {
    report: Value,
    verdict_failed: bool,
}

fn ok(report: Value) -> Outcome {
    Outcome {
        report,
        verdict_failed: false,
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Density(a) => {
            let set = read_set(&a.set_file)?;
            let opts = a.density.options();
            let (r_grid, x_lo) = opts.resolve(&set);
            let curve = density_curve_with(&set, &opts)?;
            let params = json!({
                "set_file": a.set_file,
                "horizon": set.horizon(),
                "r_grid": r_grid,
                "x_lo": x_lo,
                "min_window_points": opts.min_window_points,
            });
            let result = json!({
                "curve": curve,
                "measurability": set.measurability(),
                "periodicity": set.minimal_period(fabry::entire_products::MAX_DETECTED_PERIOD),
            });
            Ok(ok(envelope("density", params, result)))
        }
        Command::Signs(a) => {
            let parsed = read_series(&a.coeff_file)?;
            let seq = RealSequence::with_tolerance(parsed.values().to_vec(), a.tolerance)?;
            let m_min = a.m_min.unwrap_or((seq.degree() / 2).max(1));
            let changes = sign_change_set(&seq);
            let params = json!({
                "coeff_file": a.coeff_file,
                "n": seq.degree(),
                "tolerance": a.tolerance,
                "gap_r": a.gap_r,
                "m_min": m_min,
            });
            let result = json!({
                "support": seq.support().elements(),
                "sign_changes": changes.elements(),
                "lemma4_bound": lemma4_bound(&seq),
                "gap_profile": gap_profile(&seq, a.gap_r)?,
                "regularity": regularity_profile(&seq, m_min)?,
            });
            Ok(ok(envelope("signs", params, result)))
        }
        Command::Product { command } => run_product(command),
        Command::Build(a) => {
            let set = read_set(&a.set_file)?;
            let report = build_series(&set, a.n)?;
            if let Some(csv) = &a.csv {
                fs::write(csv, report.coefficients.to_csv())
                    .map_err(|e| Failure::Input(format!("{}: {e}", csv.display())))?;
            }
            let failed = report.checks.values().any(|&c| !c);
            let params = json!({
                "set_file": a.set_file,
                "n": a.n,
                "csv": a.csv,
            });
            Ok(Outcome {
                report: envelope("build", params, &report),
                verdict_failed: failed,
            })
        }
        Command::Probe(a) => {
            let seq = read_series(&a.coeff_file)?;
            let opts = a.probe.options();
            let report = probe(&seq, a.delta, &opts)?;
            let params = json!({
                "coeff_file": a.coeff_file,
                "n": seq.degree(),
                "delta": a.delta,
                "l": report.l,
                "m": report.m,
                "band": opts.band,
                "doublet_tolerance": opts.froissart.tolerance,
            });
            Ok(ok(envelope("probe", params, &report)))
        }
        Command::VerifyTheorem1(a) => {
            let set = read_set(&a.set_file)?;
            let series = a.series.as_deref().map(read_series).transpose()?;
            let options = ExperimentOptions {
                density: a.density.options(),
                tolerances: HypothesisTolerances {
                    regularity: a.regularity_tolerance,
                    radius: a.radius_tolerance,
                },
                probe: a.probe.options(),
            };
            let record = theorem1_experiment(&set, a.delta, a.n, series.as_ref(), &options)?;
            let (r_grid, x_lo) = options.density.resolve(&set);
            let params = json!({
                "set_file": a.set_file,
                "series": a.series,
                "delta": a.delta,
                "n": a.n,
                "regularity_tolerance": options.tolerances.regularity,
                "radius_tolerance": options.tolerances.radius,
                "r_grid": r_grid,
                "x_lo": x_lo,
                "min_window_points": options.density.min_window_points,
                "l": record.singularity.l,
                "m": record.singularity.m,
                "band": options.probe.band,
                "doublet_tolerance": options.probe.froissart.tolerance,
            });
            let failed = record.failed();
            Ok(Outcome {
                report: envelope("verify-theorem1", params, &record),
                verdict_failed: failed,
            })
        }
        Command::GenSet(a) => {
            let set = IndexSet::periodic(a.period, &a.residues, a.horizon)?;
            let text = set.to_text();
            match &cli.out {
                Some(path) => fs::write(path, text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(ok(Value::Null))
        }
    }
}

fn run_product(command: &ProductCommand) -> Result<Outcome, Failure> {
    match command {
        ProductCommand::Eval { spec_file, z } => {
            let spec = with_path(spec_file, ProductSpec::parse(&read(spec_file)?))?;
            let points = z.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
            let values = points
                .iter()
                .map(|&p| {
                    Ok(json!({
                        "re": p.re,
                        "im": p.im,
                        "log_abs": spec.eval_log_abs(p)?,
                        "tail_error_bound": spec.tail_error_bound(p),
                    }))
                })
                .collect::<Result<Vec<Value>, fabry::Error>>()?;
            let params = product_params(spec_file, &spec);
            Ok(ok(envelope("product eval", params, values)))
        }
        ProductCommand::Indicator {
            spec_file,
            theta,
            t_max,
        } => {
            let spec = with_path(spec_file, ProductSpec::parse(&read(spec_file)?))?;
            let sample = spec.indicator_estimate(*theta, *t_max)?;
            let mut params = product_params(spec_file, &spec);
            params["theta"] = json!(theta);
            params["t_max"] = json!(t_max);
            let result = json!({
                "sample": sample,
                "within_bound": sample.within_bound(),
            });
            Ok(ok(envelope("product indicator", params, result)))
        }
        ProductCommand::Zeros {
            spec_file,
            m,
            r,
            from,
            to,
        } => {
            let spec = with_path(spec_file, ProductSpec::parse(&read(spec_file)?))?;
            let mut params = product_params(spec_file, &spec);
            let result = match (from, to) {
                (Some(c), Some(d)) => {
                    params["from"] = json!(c);
                    params["to"] = json!(d);
                    json!({ "count": spec.zero_count_interval(*c, *d)? })
                }
                _ => {
                    let m = m.expect("clap requires --m without --from");
                    params["m"] = json!(m);
                    params["r"] = json!(r);
                    json!({ "scaled_count": spec.scaled_zero_count(m, *r)? })
                }
            };
            Ok(ok(envelope("product zeros", params, result)))
        }
    }
}

fn product_params(path: &Path, spec: &ProductSpec) -> Value {
    json!({
        "spec_file": path,
        "horizon": spec.zeros().horizon(),
        "truncation": spec.truncation(),
        "tail": spec.tail(),
    })
}

fn emit(out: Option<&Path>, report: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        if !outcome.report.is_null() {
            emit(cli.out.as_deref(), &outcome.report)?;
        }
        if outcome.verdict_failed {
            Err(Failure::Verdict)
        } else {
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => {
            eprintln!("fabry: a requested check failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("fabry: {msg}");
            ExitCode::from(2)
        }
    }
}
