//! Command-line definitions and dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use feature_probe_core::ef::EfParams;
use feature_probe_core::planner::{InjectionRule, ParamsEcho};
use feature_probe_core::sc::ScParams;
use feature_probe_core::synth::{EDGE_ENCODER_ID, EDGE_ENCODER_PEAK_STRIDE, STRUCTURE_ENCODER_ID};

use crate::commands::{self, Output};
use crate::error::{ProbeError, Result};
use crate::sweep::{Assertion, Parameter, SweepSpec};

#[derive(Debug, Parser)]
#[command(
    name = "feature-probe",
    version,
    about = "Label-free structure and edge diagnostics for encoder feature pyramids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every stride of every manifest and write an assessment report.
    Assess(AssessArgs),
    /// Choose master, auxiliary and injection stride from profiles.
    Plan(PlanArgs),
    /// Compare SC against labels, or correlate metric/outcome pairs.
    Validate(ValidateArgs),
    /// Write synthetic fixtures described by a spec JSON.
    Synth(SynthArgs),
    /// Vary one hyperparameter over a grid and check orderings.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Indent the JSON output.
    #[arg(long)]
    pub pretty: bool,
}

impl OutputArgs {
    fn output(&self) -> Output {
        Output { out: self.out.clone(), pretty: self.pretty }
    }
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub grid_k: Option<usize>,
    #[arg(long)]
    pub pca_dims: Option<usize>,
    /// Comma-separated cluster counts.
    #[arg(long, value_delimiter = ',')]
    pub k_set: Option<Vec<usize>>,
    #[arg(long)]
    pub sample_cap: Option<usize>,
    #[arg(long)]
    pub r_in: Option<u32>,
    #[arg(long)]
    pub r_out: Option<u32>,
    #[arg(long)]
    pub rho_low: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Largest shift radius as a fraction of min(H, W).
    #[arg(long)]
    pub radii_cap: Option<f64>,
    #[arg(long, env = "FEATURE_PROBE_SEED")]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs serially.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ParamArgs {
    pub fn params(&self) -> ParamsEcho {
        let mut sc = ScParams::default();
        let mut ef = EfParams::default();
        macro_rules! set {
            ($($field:ident => $target:expr),*) => {$(
                if let Some(v) = self.$field.clone() {
                    $target = v;
                }
            )*};
        }
        set!(grid_k => sc.grid_k, pca_dims => sc.pca_dims, k_set => sc.k_set, sample_cap => sc.sample_cap,
             r_in => ef.r_in, r_out => ef.r_out, rho_low => ef.rho_low, tau => ef.tau, gamma => ef.gamma,
             alpha => ef.alpha, radii_cap => ef.radii_cap_fraction, seed => sc.seed, seed => ef.seed);
        ParamsEcho { sc, ef }
    }
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    /// Manifest JSON; repeat for more images or encoders.
    #[arg(long, required = true)]
    pub manifest: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Leave out the generated_at field.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    EfArgmax,
    ScArgmax,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Assessment report, profile list or single profile; repeatable.
    #[arg(long = "profiles", alias = "report", required = true)]
    pub profiles: Vec<PathBuf>,
    /// Force the master encoder.
    #[arg(long)]
    pub master: Option<String>,
    /// Force the auxiliary encoder.
    #[arg(long)]
    pub aux: Option<String>,
    #[arg(long, value_enum, default_value = "ef-argmax")]
    pub rule: RuleArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Manifest with a label_map; repeatable.
    #[arg(long)]
    pub manifest: Vec<PathBuf>,
    /// JSON list of {"key", "metric", "outcome"} objects.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator spec, or {"encoder_pair": {"seed": n}}.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ParameterArg {
    GridK,
    PcaDims,
    K,
    RIn,
    ROut,
    RhoLow,
    Tau,
}

impl From<ParameterArg> for Parameter {
    fn from(p: ParameterArg) -> Self {
        match p {
            ParameterArg::GridK => Parameter::GridK,
            ParameterArg::PcaDims => Parameter::PcaDims,
            ParameterArg::K => Parameter::K,
            ParameterArg::RIn => Parameter::RIn,
            ParameterArg::ROut => Parameter::ROut,
            ParameterArg::RhoLow => Parameter::RhoLow,
            ParameterArg::Tau => Parameter::Tau,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, conflicts_with = "synthetic_seed")]
    pub manifest: Vec<PathBuf>,
    /// Sweep the built-in synthetic encoder pair for this seed.
    #[arg(long)]
    pub synthetic_seed: Option<u64>,
    /// Full sweep spec JSON.
    #[arg(long, conflicts_with_all = ["parameter", "values"])]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub parameter: Option<ParameterArg>,
    /// Comma-separated grid; the published grid when absent.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// HIGHER,LOWER encoder ids.
    #[arg(long, value_delimiter = ',')]
    pub expect_mean_sc_greater: Option<Vec<String>>,
    /// HIGHER,LOWER encoder ids.
    #[arg(long, value_delimiter = ',')]
    pub expect_peak_ef_greater: Option<Vec<String>>,
    /// ENCODER=STRIDE.
    #[arg(long)]
    pub expect_ef_argmax: Vec<String>,
    /// Encoder whose EF argmax must match the base parameters.
    #[arg(long)]
    pub expect_ef_argmax_unchanged: Vec<String>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Orderings the synthetic pair is built to show.
pub fn synthetic_assertions() -> Vec<Assertion> {
    vec![
        Assertion::MeanScGreater { higher: STRUCTURE_ENCODER_ID.into(), lower: EDGE_ENCODER_ID.into() },
        Assertion::EfArgmaxStride { encoder: EDGE_ENCODER_ID.into(), stride: EDGE_ENCODER_PEAK_STRIDE },
        Assertion::PeakEfGreater { higher: EDGE_ENCODER_ID.into(), lower: STRUCTURE_ENCODER_ID.into() },
    ]
}

fn pair(v: &[String], flag: &str) -> Result<[String; 2]> {
    match v {
        [a, b] => Ok([a.clone(), b.clone()]),
        _ => Err(ProbeError::Usage(format!("{flag} wants HIGHER,LOWER"))),
    }
}

impl SweepArgs {
    fn spec(&self) -> Result<SweepSpec> {
        if let Some(path) = &self.spec {
            let text = fs::read_to_string(path).map_err(|e| ProbeError::io(path, e))?;
            return serde_json::from_str(&text)
                .map_err(|e| ProbeError::BadFile { path: path.clone(), message: format!("not a sweep spec: {e}") });
        }
        let parameter: Parameter = self.parameter.expect("clap requires --parameter without --spec").into();
        let mut assertions = Vec::new();
        if let Some(v) = &self.expect_mean_sc_greater {
            let [higher, lower] = pair(v, "--expect-mean-sc-greater")?;
            assertions.push(Assertion::MeanScGreater { higher, lower });
        }
        if let Some(v) = &self.expect_peak_ef_greater {
            let [higher, lower] = pair(v, "--expect-peak-ef-greater")?;
            assertions.push(Assertion::PeakEfGreater { higher, lower });
        }
        for e in &self.expect_ef_argmax {
            let parsed = e.split_once('=').and_then(|(enc, s)| s.parse().ok().map(|s| (enc.to_string(), s)));
            let (encoder, stride) = parsed
                .ok_or_else(|| ProbeError::Usage(format!("--expect-ef-argmax wants ENCODER=STRIDE, got {e:?}")))?;
            assertions.push(Assertion::EfArgmaxStride { encoder, stride });
        }
        for encoder in &self.expect_ef_argmax_unchanged {
            assertions.push(Assertion::EfArgmaxUnchanged { encoder: encoder.clone() });
        }
        if assertions.is_empty() && self.synthetic_seed.is_some() {
            assertions = synthetic_assertions();
        }
        Ok(SweepSpec { parameter, values: self.values.clone(), base: self.params.params(), assertions })
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Assess(a) => {
            let report = commands::cmd_assess(&a.manifest, &a.params.params(), a.params.threads, !a.no_timestamp)?;
            a.output.output().emit(&report)
        }
        Command::Plan(a) => {
            let rule = match a.rule {
                RuleArg::EfArgmax => InjectionRule::EfArgmax,
                RuleArg::ScArgmax => InjectionRule::ScArgmax,
            };
            let plan = commands::cmd_plan(&a.profiles, a.master.as_deref(), a.aux.as_deref(), rule)?;
            a.output.output().emit(&plan)
        }
        Command::Validate(a) => {
            let report = commands::cmd_validate(
                &a.manifest,
                a.pairs.as_deref(),
                &a.params.params(),
                a.params.threads,
                !a.no_timestamp,
            )?;
            a.output.output().emit(&report)
        }
        Command::Synth(a) => {
            let summary = commands::cmd_synth(&a.spec, &a.out_dir)?;
            Output { out: None, pretty: a.pretty }.emit(&summary)
        }
        Command::Sweep(a) => {
            let spec = a.spec()?;
            let inputs = commands::sweep_inputs(&a.manifest, a.synthetic_seed)?;
            let report = commands::cmd_sweep(&spec, &inputs, a.params.threads)?;
            a.output.output().emit(&report)
        }
    }
}

/// Parses `args` and runs the command, returning the process exit code.
///
/// Help and version print to stdout and exit 0; other parse failures are usage
/// errors (exit 1). Failures after parsing print a JSON object to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
