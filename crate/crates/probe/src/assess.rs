//! Scores loaded feature sets in parallel with deterministic output order.

use std::collections::BTreeMap;

use rayon::prelude::*;

use feature_probe_core::planner::{aggregate_profiles, assess_stride, ParamsEcho, StrideProfile, StrideRow};
use feature_probe_core::validation::sc_gt;
use feature_probe_core::{EncoderFeatureSet, STRIDES};

use crate::error::{ProbeError, Result};
use crate::report::{ImageProfile, ScGtRow};

/// One loaded manifest.
#[derive(Debug, Clone)]
pub struct Input {
    /// Label used in per-image rows, usually the manifest path.
    pub name: String,
    pub set: EncoderFeatureSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    /// One aggregated profile per encoder, sorted by encoder id.
    pub profiles: Vec<StrideProfile>,
    /// One profile per input, in input order.
    pub per_image: Vec<ImageProfile>,
    /// SC_GT for every stride of every input that carries labels.
    pub sc_gt: Vec<ScGtRow>,
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(ProbeError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| ProbeError::Usage(format!("cannot start {n} threads: {e}"))),
    }
}

pub fn assess(inputs: &[Input], params: &ParamsEcho) -> Result<Assessment> {
    params.sc.validate()?;
    params.ef.validate()?;
    let jobs: Vec<(usize, u32)> = (0..inputs.len()).flat_map(|i| STRIDES.iter().map(move |s| (i, *s))).collect();
    // Collecting an indexed parallel iterator keeps job order, so the first
    // error and every row are independent of scheduling.
    let rows: Vec<Result<(StrideRow, Option<ScGtRow>)>> = jobs
        .par_iter()
        .map(|&(i, stride)| {
            let input = &inputs[i];
            let row = assess_stride(&input.set, stride, &params.sc, &params.ef)?;
            let gt = match &input.set.label_map {
                Some(labels) => {
                    let tensor = input.set.tensor(stride)?;
                    let g = sc_gt(tensor, labels).map_err(|e| e.at_stride(stride))?;
                    Some(ScGtRow {
                        encoder_id: input.set.encoder_id.clone(),
                        manifest: input.name.clone(),
                        stride,
                        sc: row.sc,
                        sc_gt: g.sc_gt,
                        segments: g.segments,
                    })
                }
                None => None,
            };
            Ok((row, gt))
        })
        .collect();

    let mut per_image = Vec::with_capacity(inputs.len());
    let mut gt_rows = Vec::new();
    let mut rows = rows.into_iter();
    for input in inputs {
        let mut map = BTreeMap::new();
        for s in STRIDES {
            let (row, gt) = rows.next().expect("one result per job")?;
            map.insert(s, row);
            gt_rows.extend(gt);
        }
        let profile = StrideProfile::new(input.set.encoder_id.clone(), map, Some(params.clone()))?;
        per_image.push(ImageProfile { manifest: input.name.clone(), profile });
    }

    let mut by_encoder: BTreeMap<&str, Vec<StrideProfile>> = BTreeMap::new();
    for p in &per_image {
        by_encoder.entry(p.profile.encoder_id.as_str()).or_default().push(p.profile.clone());
    }
    let profiles = by_encoder.values().map(|v| aggregate_profiles(v)).collect::<Result<Vec<_>, _>>()?;
    Ok(Assessment { profiles, per_image, sc_gt: gt_rows })
}
