//! Supervised counterparts used to sanity-check the label-free scores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::numerics::{average_ranks, spearman};
use crate::tensor::{FeatureTensor, LabelMap};
use crate::{Error, Result};

/// Segments smaller than this (after downsampling) are ignored.
pub const MIN_SEGMENT_PIXELS: usize = 4;

/// Variance decomposition behind [`sc_gt`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScGt {
    pub sc_gt: f64,
    pub inter: f64,
    pub intra: f64,
    pub segments: usize,
}

/// `inter / (inter + intra)` over ground-truth segments.
///
/// Labels are resampled to the tensor grid by nearest neighbour; id 0 and
/// segments under [`MIN_SEGMENT_PIXELS`] pixels are dropped. Both variances are
/// pixel-weighted population variances averaged over channels.
pub fn sc_gt(tensor: &FeatureTensor, labels: &LabelMap) -> Result<ScGt> {
    let (h, w) = (tensor.height(), tensor.width());
    let labels = if (labels.height(), labels.width()) == (h, w) { labels.clone() } else { labels.resize_nearest(h, w) };
    let mut members: BTreeMap<u16, Vec<usize>> = BTreeMap::new();
    for (p, id) in labels.ids().iter().enumerate() {
        if *id != LabelMap::IGNORE {
            members.entry(*id).or_default().push(p);
        }
    }
    members.retain(|_, px| px.len() >= MIN_SEGMENT_PIXELS);
    if members.len() < 2 {
        return Err(Error::NoValidSegments);
    }
    let total: usize = members.values().map(Vec::len).sum();
    let channels = tensor.channels();
    let (mut inter, mut intra) = (0.0, 0.0);
    for c in 0..channels {
        let plane = tensor.channel(c);
        let mut means = Vec::with_capacity(members.len());
        let mut within = 0.0;
        for px in members.values() {
            let n = px.len() as f64;
            let mean = px.iter().map(|&p| plane[p] as f64).sum::<f64>() / n;
            let var = px.iter().map(|&p| (plane[p] as f64 - mean) * (plane[p] as f64 - mean)).sum::<f64>() / n;
            within += n * var;
            means.push((n, mean));
        }
        let global = means.iter().map(|(n, m)| n * m).sum::<f64>() / total as f64;
        inter += means.iter().map(|(n, m)| n * (m - global) * (m - global)).sum::<f64>() / total as f64;
        intra += within / total as f64;
    }
    inter /= channels as f64;
    intra /= channels as f64;
    let sc_gt = if inter + intra == 0.0 { 0.0 } else { inter / (inter + intra) };
    Ok(ScGt { sc_gt, inter, intra, segments: members.len() })
}

/// One (label-free metric, external outcome) observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePair {
    pub key: String,
    #[serde(rename = "metric")]
    pub metric_value: f64,
    #[serde(rename = "outcome")]
    pub outcome_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub key: String,
    pub metric_rank: f64,
    pub outcome_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpearmanReport {
    pub rho: f64,
    pub n: usize,
    pub ranks: Vec<RankRow>,
}

/// Spearman correlation between metric values and outcomes, with the rank table.
pub fn correlate_profiles(pairs: &[OutcomePair]) -> Result<SpearmanReport> {
    if pairs.iter().any(|p| !p.metric_value.is_finite() || !p.outcome_value.is_finite()) {
        return Err(Error::InvalidParams("outcome pairs must be finite"));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.metric_value).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.outcome_value).collect();
    let rho = spearman(&x, &y)?;
    let (rx, ry) = (average_ranks(&x), average_ranks(&y));
    let ranks = pairs
        .iter()
        .zip(rx.iter().zip(&ry))
        .map(|(p, (a, b))| RankRow { key: p.key.clone(), metric_rank: *a, outcome_rank: *b })
        .collect();
    Ok(SpearmanReport { rho, n: pairs.len(), ranks })
}
