//! Subcommand implementations. Each returns the JSON document it produced.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use feature_probe_core::planner::{plan_from_profiles, FusionPlan, InjectionRule, ParamsEcho, PlanOptions};
use feature_probe_core::sc::sc;
use feature_probe_core::synth::{self, PairSpec, SynthOutput, SynthSpec, EDGE_ENCODER_ID, STRUCTURE_ENCODER_ID};
use feature_probe_core::validation::{correlate_profiles, sc_gt, OutcomePair};
use feature_probe_core::{EncoderFeatureSet, Error as CoreError, FeatureTensor, STRIDES};

use crate::assess::{assess, with_threads, Input};
use crate::error::{ProbeError, Result};
use crate::ften;
use crate::manifest::{load_manifest, Manifest, Stage};
use crate::report::{read_profiles, AssessmentReport, ScGtRow, ValidationReport, TOOLKIT, VERSION};
use crate::sweep::{run_sweep, SweepReport, SweepSpec};

/// Output settings shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub out: Option<PathBuf>,
    pub pretty: bool,
}

impl Output {
    /// Writes `value` to the output file, or to stdout when none was given.
    pub fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = if self.pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
            .expect("reports serialize");
        match &self.out {
            Some(path) => {
                fs::write(path, text + "\n").map_err(|e| ProbeError::IoFailure { path: path.clone(), source: e })
            }
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

fn timestamp(enabled: bool) -> Option<String> {
    enabled.then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

/// Loads manifests in parallel, keeping argument order.
pub fn load_inputs(paths: &[PathBuf]) -> Result<Vec<Input>> {
    paths
        .par_iter()
        .map(|p| Ok(Input { name: p.display().to_string(), set: load_manifest(p)? }))
        .collect::<Vec<Result<Input>>>()
        .into_iter()
        .collect()
}

pub fn cmd_assess(
    manifests: &[PathBuf],
    params: &ParamsEcho,
    threads: Option<usize>,
    stamp: bool,
) -> Result<AssessmentReport> {
    if manifests.is_empty() {
        return Err(ProbeError::Usage("assess needs at least one --manifest".into()));
    }
    let inputs = with_threads(threads, || load_inputs(manifests))??;
    let result = with_threads(threads, || assess(&inputs, params))??;
    let multi = result.profiles.iter().any(|p| p.images > 1);
    Ok(AssessmentReport {
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        generated_at: timestamp(stamp),
        params: params.clone(),
        profiles: result.profiles,
        per_image: if multi { result.per_image } else { Vec::new() },
        sc_gt: result.sc_gt,
    })
}

pub fn cmd_plan(
    profiles: &[PathBuf],
    master: Option<&str>,
    aux: Option<&str>,
    rule: InjectionRule,
) -> Result<FusionPlan> {
    let mut all = Vec::new();
    for p in profiles {
        all.extend(read_profiles(p)?);
    }
    Ok(plan_from_profiles(&all, &PlanOptions { master, aux, rule })?)
}

fn read_pairs(path: &Path) -> Result<Vec<OutcomePair>> {
    let text = fs::read_to_string(path).map_err(|e| ProbeError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ProbeError::BadFile { path: path.to_path_buf(), message: e.to_string() })
}

fn sc_gt_rows(inputs: &[Input], params: &ParamsEcho) -> Result<Vec<ScGtRow>> {
    let jobs: Vec<(&Input, u32)> = inputs.iter().flat_map(|i| STRIDES.iter().map(move |s| (i, *s))).collect();
    jobs.par_iter()
        .map(|&(input, stride)| {
            let labels = input.set.label_map.as_ref().ok_or_else(|| ProbeError::BadManifest {
                path: PathBuf::from(&input.name),
                message: "validation needs a label_map".into(),
            })?;
            let tensor = input.set.tensor(stride)?;
            let g = sc_gt(tensor, labels).map_err(|e| e.at_stride(stride))?;
            let s = sc(tensor, &params.sc).map_err(|e| e.at_stride(stride))?;
            Ok(ScGtRow {
                encoder_id: input.set.encoder_id.clone(),
                manifest: input.name.clone(),
                stride,
                sc: s.sc,
                sc_gt: g.sc_gt,
                segments: g.segments,
            })
        })
        .collect::<Vec<Result<ScGtRow>>>()
        .into_iter()
        .collect()
}

/// SC_GT rows for labelled manifests and Spearman correlations.
///
/// SC is correlated with SC_GT over all rows when there are at least three and
/// neither side is constant.
pub fn cmd_validate(
    manifests: &[PathBuf],
    pairs: Option<&Path>,
    params: &ParamsEcho,
    threads: Option<usize>,
    stamp: bool,
) -> Result<ValidationReport> {
    if manifests.is_empty() && pairs.is_none() {
        return Err(ProbeError::Usage("validate needs --manifest or --pairs".into()));
    }
    params.sc.validate()?;
    let rows = with_threads(threads, || load_inputs(manifests).and_then(|inputs| sc_gt_rows(&inputs, params)))??;
    let sc_vs_sc_gt = if rows.len() >= 3 {
        let pairs: Vec<OutcomePair> = rows
            .iter()
            .map(|r| OutcomePair {
                key: format!("{}@{}", r.manifest, r.stride),
                metric_value: r.sc,
                outcome_value: r.sc_gt,
            })
            .collect();
        match correlate_profiles(&pairs) {
            Ok(r) => Some(r),
            Err(CoreError::ZeroVariance) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let outcome = pairs.map(|p| read_pairs(p).and_then(|v| Ok(correlate_profiles(&v)?))).transpose()?;
    Ok(ValidationReport {
        toolkit: TOOLKIT.into(),
        version: VERSION.into(),
        generated_at: timestamp(stamp),
        sc_gt: rows,
        sc_vs_sc_gt,
        outcome,
    })
}

/// Input of `synth`: one generator spec, or the synthetic encoder pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SynthRequest {
    Pair { encoder_pair: PairRequest },
    Single(SynthSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRequest {
    pub seed: u64,
    #[serde(default)]
    pub height: Option<usize>,
    #[serde(default)]
    pub width: Option<usize>,
    #[serde(default)]
    pub regions: Option<usize>,
    #[serde(default)]
    pub channels: Option<usize>,
}

impl PairRequest {
    pub fn spec(&self) -> PairSpec {
        let mut spec = PairSpec::with_seed(self.seed);
        spec.scene.height = self.height.unwrap_or(spec.scene.height);
        spec.scene.width = self.width.unwrap_or(spec.scene.width);
        spec.scene.regions = self.regions.unwrap_or(spec.scene.regions);
        spec.channels = self.channels.unwrap_or(spec.channels);
        spec
    }
}

/// Files written by `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub files: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub manifests: Vec<PathBuf>,
}

fn map_tensor(map: &feature_probe_core::image_ops::ScalarMap) -> Result<FeatureTensor> {
    Ok(FeatureTensor::new(1, map.height(), map.width(), 1, map.values().to_vec())?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| ProbeError::IoFailure { path: dir.to_path_buf(), source: e })
}

/// Writes the pair's shared image and labels, every stage, and one manifest per encoder.
pub fn write_encoder_pair(spec: &PairSpec, dir: &Path) -> Result<SynthSummary> {
    create_dir(dir)?;
    let (structure, edge) = synth::encoder_pair(spec)?;
    let mut files = Vec::new();
    let image = dir.join("image.ften");
    ften::write_feature_tensor(&map_tensor(&structure.image)?, &image)?;
    files.push(image);
    let labels = dir.join("labels.ften");
    ften::write_label_map(structure.label_map.as_ref().expect("pair carries labels"), &labels)?;
    files.push(labels);
    let mut manifests = Vec::new();
    for (set, id) in [(&structure, STRUCTURE_ENCODER_ID), (&edge, EDGE_ENCODER_ID)] {
        let mut stages = Vec::new();
        for (stride, tensor) in &set.tensors {
            let name = format!("{id}_s{stride}.ften");
            ften::write_feature_tensor(tensor, &dir.join(&name))?;
            files.push(dir.join(&name));
            stages.push(Stage { stride: *stride, path: name.into() });
        }
        let manifest = Manifest {
            encoder_id: id.into(),
            image: "image.ften".into(),
            label_map: Some("labels.ften".into()),
            stages,
        };
        let path = dir.join(format!("{id}.json"));
        manifest.write(&path)?;
        manifests.push(path);
    }
    Ok(SynthSummary { files, manifests })
}

pub fn cmd_synth(spec_path: &Path, dir: &Path) -> Result<SynthSummary> {
    let text = fs::read_to_string(spec_path).map_err(|e| ProbeError::io(spec_path, e))?;
    let request: SynthRequest = serde_json::from_str(&text).map_err(|e| ProbeError::BadFile {
        path: spec_path.to_path_buf(),
        message: format!("not a synth spec: {e}"),
    })?;
    let spec = match request {
        SynthRequest::Pair { encoder_pair } => return write_encoder_pair(&encoder_pair.spec(), dir),
        SynthRequest::Single(spec) => spec,
    };
    let name = synth::spec_name(&spec);
    let output = synth::generate(&spec)?;
    create_dir(dir)?;
    let mut files = Vec::new();
    let main = dir.join(format!("{name}.ften"));
    match output {
        SynthOutput::Map(map) => ften::write_feature_tensor(&map_tensor(&map)?, &main)?,
        SynthOutput::Tensor { tensor, image } => {
            ften::write_feature_tensor(&tensor, &main)?;
            if let Some(image) = image {
                let path = dir.join(format!("{name}_image.ften"));
                ften::write_feature_tensor(&map_tensor(&image)?, &path)?;
                files.push(path);
            }
        }
    }
    files.insert(0, main);
    Ok(SynthSummary { files, manifests: Vec::new() })
}

/// Loads manifests, or builds the synthetic pair in memory.
pub fn sweep_inputs(manifests: &[PathBuf], synthetic_seed: Option<u64>) -> Result<Vec<Input>> {
    match (manifests.is_empty(), synthetic_seed) {
        (false, None) => load_inputs(manifests),
        (true, Some(seed)) => {
            let (s, e) = synth::encoder_pair(&PairSpec::with_seed(seed))?;
            Ok(synthetic_inputs(s, e))
        }
        _ => Err(ProbeError::Usage("sweep needs either --manifest or --synthetic-seed".into())),
    }
}

pub fn synthetic_inputs(structure: EncoderFeatureSet, edge: EncoderFeatureSet) -> Vec<Input> {
    vec![Input { name: STRUCTURE_ENCODER_ID.into(), set: structure }, Input { name: EDGE_ENCODER_ID.into(), set: edge }]
}

pub fn cmd_sweep(spec: &SweepSpec, inputs: &[Input], threads: Option<usize>) -> Result<SweepReport> {
    with_threads(threads, || run_sweep(spec, inputs))?
}
