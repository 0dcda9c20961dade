use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypercirc::core::baselines::CircularDistance;
use hypercirc::core::circular::{vm_fit, vm_sample, VonMisesParams};
use hypercirc::core::hyperbolic::{embed, project_to_radius, DiskPoint, PreferredDirection};
use hypercirc::core::inference::{DEFAULT_ALPHA, DEFAULT_RESAMPLES};
use hypercirc::core::rng::{substream, Purpose};
use hypercirc::io::{read_two_groups, write_angles, AngleFile, AngleUnit};
use hypercirc::montecarlo::{run_experiment, ExperimentConfig};
use hypercirc::parallel::{threads_from_env, with_threads};
use hypercirc::pipeline::{
    analyze, degeneracy_label, run_method, AnalysisOptions, AnalysisReport, GroupFit, PipelineOrder, TestMethod,
    TestOutcome, TestSettings,
};
use hypercirc::{Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hypercirc", version, about = "Hyperbolic two-sample tests for circular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a von Mises distribution to each group.
    Fit(FitArgs),
    /// Two-sample test of equal distance to the preferred direction.
    Test(TestArgs),
    /// Draw a von Mises sample as CSV.
    Sample(SampleArgs),
    /// Embed von Mises parameters in the Poincare disk.
    Embed(EmbedArgs),
    /// Project a disk point onto the preferred radius.
    Project(ProjectArgs),
    /// Run a size or power experiment from a JSON config.
    Simulate(SimulateArgs),
    /// Transform, impute, fit and test two groups; prints a report.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// One file with an `angle,group` layout, or one file per group.
    #[arg(required = true, num_args = 1..=2)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = AngleUnit::Radians)]
    unit: AngleUnit,
    /// The first line is data, not a header.
    #[arg(long)]
    no_header: bool,
}

impl InputArgs {
    fn angle_files(&self) -> Vec<AngleFile> {
        self.files
            .iter()
            .map(|p| AngleFile::new(p).unit(self.unit).header(!self.no_header))
            .collect()
    }

    fn names(&self) -> Vec<String> {
        self.files.iter().map(|p| p.display().to_string()).collect()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    Geodesic,
    Cosine,
}

impl From<DistanceArg> for CircularDistance {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Geodesic => CircularDistance::Geodesic,
            DistanceArg::Cosine => CircularDistance::Cosine,
        }
    }
}

#[derive(Args)]
struct SettingsArgs {
    /// Preferred direction in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu0: f64,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Distance to the preferred direction used by the rank test.
    #[arg(long, value_enum, default_value_t = DistanceArg::Geodesic)]
    distance: DistanceArg,
}

impl SettingsArgs {
    fn settings(&self) -> TestSettings {
        TestSettings {
            mu0: self.mu0,
            resamples: self.resamples,
            seed: self.seed,
            alpha: self.alpha,
            distance: self.distance.into(),
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = AngleUnit::Radians)]
    unit: AngleUnit,
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = TestMethod::PoincarePerm)]
    method: TestMethod,
    #[command(flatten)]
    settings: SettingsArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Unit of the written angles.
    #[arg(long, value_enum, default_value_t = AngleUnit::Radians)]
    unit: AngleUnit,
    /// Adds a group column with this label.
    #[arg(long)]
    group: Option<String>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu0: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long, allow_negative_numbers = true)]
    re: f64,
    #[arg(long, allow_negative_numbers = true)]
    im: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu0: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    config: PathBuf,
    /// CSV of rejection rates.
    #[arg(long)]
    out: PathBuf,
    /// Provenance sidecar; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Use 1000 iterations and 2500 resamples regardless of the config.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Quadruple every angle modulo 2 pi.
    #[arg(long)]
    fourfold: bool,
    /// Fill missing values with the group's circular mean.
    #[arg(long)]
    impute: bool,
    /// Impute on the raw angles, then transform.
    #[arg(long, requires = "impute")]
    impute_before_transform: bool,
    /// Tests to run; repeat the flag for several.
    #[arg(long = "method", value_enum)]
    methods: Vec<TestMethod>,
    #[command(flatten)]
    settings: SettingsArgs,
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn pool<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    with_threads(threads_from_env()?, f)?
}

fn fit_table(fits: &[GroupFit]) {
    println!(
        "{:<16} {:>6} {:>12} {:>12} {:>10}  degeneracy",
        "group", "n", "mu", "kappa", "r_bar"
    );
    for f in fits {
        println!(
            "{:<16} {:>6} {:>12.6} {:>12.6} {:>10.6}  {}",
            f.group,
            f.n,
            f.fit.params.mu.radians(),
            f.fit.params.kappa,
            f.fit.summary.r_bar,
            degeneracy_label(f.fit.degeneracy)
        );
    }
}

fn test_table(tests: &[TestOutcome]) {
    println!("{:<14} {:>14} {:>10}  decision", "test", "statistic", "p_value");
    for t in tests {
        let decision = if t.reject() { "reject" } else { "do not reject" };
        println!("{:<14} {:>14.6} {:>10.6}  {decision}", t.name(), t.statistic(), t.p_value());
        if let TestOutcome::Poincare(r) = t {
            println!(
                "{:<14} d1 = {:.6}, d2 = {:.6}, B = {}, degenerate replicates = {}{}",
                "",
                r.d1,
                r.d2,
                r.resamples,
                r.degenerate_replicates,
                if r.degenerate_warning { " (warning)" } else { "" }
            );
        }
    }
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let mut fits = Vec::new();
    for path in &args.files {
        let file = AngleFile::new(path).unit(args.unit).header(!args.no_header);
        for (i, group) in file.read()?.iter().enumerate() {
            let sample = group.complete(i + 1)?;
            fits.push(GroupFit {
                group: sample.label().unwrap_or_default().to_string(),
                n: sample.len(),
                fit: vm_fit(&sample)?,
            });
        }
    }
    if args.json {
        print_json(&fits)
    } else {
        fit_table(&fits);
        Ok(())
    }
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let [g1, g2] = read_two_groups(&args.input.angle_files())?;
    let (s1, s2) = (g1.complete(1)?, g2.complete(2)?);
    let settings = args.settings.settings();
    let outcome = pool(|| run_method(args.method, &s1, &s2, &settings))?;
    if args.json {
        print_json(&outcome)
    } else {
        test_table(&[outcome]);
        Ok(())
    }
}

fn cmd_sample(args: &SampleArgs) -> Result<()> {
    let params = VonMisesParams::new(args.mu, args.kappa)?;
    let sample = vm_sample(params, args.n, &mut substream(args.seed, 0, Purpose::Sampling));
    let out = std::io::stdout().lock();
    write_angles(out, &sample, args.unit, args.group.as_deref())
}

#[derive(Serialize)]
struct EmbedOutput {
    params: VonMisesParams,
    xi: DiskPoint,
    norm: f64,
    mu0: f64,
    t_star: f64,
    distance_to_preferred: f64,
}

fn projection_output(params: VonMisesParams, xi: DiskPoint, mu0: f64) -> Result<EmbedOutput> {
    let p = project_to_radius(xi, PreferredDirection::new(mu0)?)?;
    Ok(EmbedOutput {
        params,
        xi,
        norm: xi.norm(),
        mu0,
        t_star: p.t_star,
        distance_to_preferred: p.distance,
    })
}

fn print_projection(o: &EmbedOutput, json: bool) -> Result<()> {
    if json {
        return print_json(o);
    }
    println!("mu                     {:.12}", o.params.mu.radians());
    println!("kappa                  {:.12}", o.params.kappa);
    println!("xi                     ({:.12}, {:.12})", o.xi.re, o.xi.im);
    println!("|xi|                   {:.12}", o.norm);
    println!("t_star                 {:.12}", o.t_star);
    println!("distance_to_preferred  {:.12}", o.distance_to_preferred);
    Ok(())
}

fn cmd_embed(args: &EmbedArgs) -> Result<()> {
    let params = VonMisesParams::new(args.mu, args.kappa)?;
    let xi = embed(params)?;
    print_projection(&projection_output(params, xi, args.mu0)?, args.json)
}

fn cmd_project(args: &ProjectArgs) -> Result<()> {
    let xi = DiskPoint::new(args.re, args.im)?;
    let params = xi.to_params()?;
    print_projection(&projection_output(params, xi, args.mu0)?, args.json)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if args.full_scale {
        config = config.with_full_scale();
    }
    let result = pool(|| run_experiment(&config))?;
    let mut csv = create(&args.out)?;
    result.write_csv(&mut csv)?;
    csv.flush().map_err(|e| Error::io(&args.out, e))?;
    let sidecar = args.sidecar.clone().unwrap_or_else(|| args.out.with_extension("json"));
    let mut side = create(&sidecar)?;
    result.write_sidecar(&mut side)?;
    side.flush().map_err(|e| Error::io(&sidecar, e))?;
    let skipped = result.records.iter().filter(|r| r.skipped.is_some()).count();
    let errors: usize = result.records.iter().map(|r| r.errors).sum();
    eprintln!(
        "{} records written to {} ({} skipped, {} failed iterations)",
        result.records.len(),
        args.out.display(),
        skipped,
        errors
    );
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let groups = read_two_groups(&args.input.angle_files())?;
    let mut options = AnalysisOptions {
        fourfold: args.fourfold,
        impute: args.impute,
        order: if args.impute_before_transform {
            PipelineOrder::ImputeThenTransform
        } else {
            PipelineOrder::TransformThenImpute
        },
        settings: args.settings.settings(),
        ..AnalysisOptions::default()
    };
    if !args.methods.is_empty() {
        options.methods = args.methods.clone();
    }
    let report: AnalysisReport = pool(|| analyze(&groups, args.input.unit, args.input.names(), &options))?;
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
    }
    if args.json {
        return print_json(&report);
    }
    println!("pipeline: {}", report.provenance.pipeline.join(" -> "));
    for entry in &report.imputation_log {
        println!(
            "imputed {} value(s) in {} with {:.6}",
            entry.indices.len(),
            entry.group,
            entry.value
        );
    }
    println!();
    fit_table(&report.fits);
    println!();
    for e in &report.embeddings {
        println!(
            "{:<16} xi = ({:.6}, {:.6})  d_R = {:.6}",
            e.group, e.xi.re, e.xi.im, e.distance_to_preferred
        );
    }
    println!();
    test_table(&report.tests);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Test(a) => cmd_test(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Project(a) => cmd_project(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
