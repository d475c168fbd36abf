//! Per-stride profiles and the master/auxiliary fusion plan.
//!
//! The master is the encoder with the highest mean SC over the pyramid. The
//! auxiliary replaces exactly one stage of the master pyramid: the stride where
//! its own EF peaks (ties go to the larger stride).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ef::{ef, EfParams};
use crate::sc::{sc, ScParams};
use crate::tensor::{EncoderFeatureSet, STRIDES};
use crate::{Error, Flag, Result};

/// Metric values of one encoder at one stride.
///
/// Only `sc` and `ef` are needed for planning; the factor fields are absent
/// when a profile is transcribed from a published table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideRow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sfc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scs: Option<f64>,
    pub sc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sp: Option<f64>,
    pub ef: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_tau_px: Option<f64>,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

impl StrideRow {
    /// Row holding only the two composite scores.
    pub fn summary(sc: f64, ef: f64) -> Self {
        Self { sfc: None, scs: None, sc, ec: None, nc: None, fc: None, sp: None, ef, r_tau_px: None, flags: Vec::new() }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        [self.sfc, self.scs, Some(self.sc), self.ec, self.nc, self.fc, self.sp, Some(self.ef), self.r_tau_px]
            .into_iter()
            .flatten()
    }
}

/// Parameters a profile was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub sc: ScParams,
    pub ef: EfParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrideProfile {
    pub encoder_id: String,
    /// Number of images averaged into the rows.
    #[serde(default = "one")]
    pub images: usize,
    pub rows: BTreeMap<u32, StrideRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params_echo: Option<ParamsEcho>,
}

fn one() -> usize {
    1
}

impl StrideProfile {
    pub fn new(encoder_id: String, rows: BTreeMap<u32, StrideRow>, params_echo: Option<ParamsEcho>) -> Result<Self> {
        let profile = Self { encoder_id, images: 1, rows, params_echo };
        profile.validate()?;
        Ok(profile)
    }

    /// Rows must cover exactly the pyramid strides with finite values.
    pub fn validate(&self) -> Result<()> {
        for s in STRIDES {
            let row = self.rows.get(&s).ok_or(Error::MissingStride(s))?;
            if row.values().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParams("profile values must be finite"));
            }
        }
        if self.rows.len() != STRIDES.len() {
            return Err(Error::InvalidParams("profile rows must cover exactly strides 4, 8, 16, 32"));
        }
        Ok(())
    }

    pub fn mean_sc(&self) -> f64 {
        STRIDES.iter().map(|s| self.rows[s].sc).sum::<f64>() / STRIDES.len() as f64
    }

    pub fn peak_ef(&self) -> f64 {
        STRIDES.iter().map(|s| self.rows[s].ef).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sc_row(&self) -> BTreeMap<u32, f64> {
        self.rows.iter().map(|(s, r)| (*s, r.sc)).collect()
    }

    pub fn ef_row(&self) -> BTreeMap<u32, f64> {
        self.rows.iter().map(|(s, r)| (*s, r.ef)).collect()
    }
}

/// Scores one stride of an encoder feature set.
pub fn assess_stride(
    set: &EncoderFeatureSet,
    stride: u32,
    sc_params: &ScParams,
    ef_params: &EfParams,
) -> Result<StrideRow> {
    let run = || -> Result<StrideRow> {
        let tensor = set.tensor(stride)?;
        let s = sc(tensor, sc_params)?;
        let e = ef(tensor, &set.image, ef_params)?;
        let mut flags = s.flags;
        flags.extend(e.flags);
        Ok(StrideRow {
            sfc: Some(s.sfc),
            scs: Some(s.scs),
            sc: s.sc,
            ec: Some(e.ec),
            nc: Some(e.nc),
            fc: Some(e.fc),
            sp: Some(e.sp),
            ef: e.ef,
            r_tau_px: Some(e.r_tau_px),
            flags,
        })
    };
    run().map_err(|e| e.at_stride(stride))
}

/// Scores every stride of one encoder feature set, in stride order.
pub fn assess_encoder(set: &EncoderFeatureSet, sc_params: &ScParams, ef_params: &EfParams) -> Result<StrideProfile> {
    sc_params.validate()?;
    ef_params.validate()?;
    let mut rows = BTreeMap::new();
    for s in STRIDES {
        rows.insert(s, assess_stride(set, s, sc_params, ef_params)?);
    }
    StrideProfile::new(set.encoder_id.clone(), rows, Some(ParamsEcho { sc: sc_params.clone(), ef: ef_params.clone() }))
}

/// Averages several per-image profiles of one encoder field by field; flags are unioned.
pub fn aggregate_profiles(profiles: &[StrideProfile]) -> Result<StrideProfile> {
    let first = profiles.first().ok_or(Error::TooFewProfiles(0))?;
    if profiles.iter().any(|p| p.encoder_id != first.encoder_id) {
        return Err(Error::InvalidParams("aggregated profiles must share one encoder id"));
    }
    let images: usize = profiles.iter().map(|p| p.images).sum();
    let mean = |get: &dyn Fn(&StrideRow) -> Option<f64>, s: u32| -> Option<f64> {
        let mut acc = 0.0;
        for p in profiles {
            acc += get(&p.rows[&s])? * p.images as f64;
        }
        Some(acc / images as f64)
    };
    let mut rows = BTreeMap::new();
    for s in STRIDES {
        for p in profiles {
            p.rows.get(&s).ok_or(Error::MissingStride(s))?;
        }
        let mut flags: Vec<Flag> = profiles.iter().flat_map(|p| p.rows[&s].flags.iter().copied()).collect();
        flags.sort();
        flags.dedup();
        rows.insert(
            s,
            StrideRow {
                sfc: mean(&|r| r.sfc, s),
                scs: mean(&|r| r.scs, s),
                sc: mean(&|r| Some(r.sc), s).unwrap_or_default(),
                ec: mean(&|r| r.ec, s),
                nc: mean(&|r| r.nc, s),
                fc: mean(&|r| r.fc, s),
                sp: mean(&|r| r.sp, s),
                ef: mean(&|r| Some(r.ef), s).unwrap_or_default(),
                r_tau_px: mean(&|r| r.r_tau_px, s),
                flags,
            },
        );
    }
    let mut out = StrideProfile::new(first.encoder_id.clone(), rows, first.params_echo.clone())?;
    out.images = images;
    Ok(out)
}

/// Encoder with the highest mean SC; exact ties go to the lexicographically smallest id.
pub fn select_master(profiles: &[StrideProfile]) -> Result<String> {
    if profiles.len() < 2 {
        return Err(Error::TooFewProfiles(profiles.len()));
    }
    let mut best: Option<(&str, f64)> = None;
    for p in profiles {
        p.validate()?;
        let m = p.mean_sc();
        best = match best {
            Some((id, v)) if v > m || (v == m && id <= p.encoder_id.as_str()) => Some((id, v)),
            _ => Some((&p.encoder_id, m)),
        };
    }
    Ok(best.map(|(id, _)| id.to_string()).unwrap_or_default())
}

/// How the auxiliary's injection stride is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionRule {
    /// Stride of the auxiliary's highest EF.
    #[default]
    EfArgmax,
    /// Stride of the auxiliary's highest SC. Not backed by published results.
    ScArgmax,
}

fn argmax_largest(row: &BTreeMap<u32, f64>) -> u32 {
    let mut best = (STRIDES[0], f64::NEG_INFINITY);
    for s in STRIDES {
        let v = row[&s];
        if v >= best.1 {
            best = (s, v);
        }
    }
    best.0
}

/// Stride where the auxiliary's EF peaks; ties go to the largest stride.
pub fn select_injection_stride(aux: &StrideProfile) -> Result<u32> {
    select_injection_stride_with(aux, InjectionRule::EfArgmax)
}

pub fn select_injection_stride_with(aux: &StrideProfile, rule: InjectionRule) -> Result<u32> {
    aux.validate()?;
    Ok(match rule {
        InjectionRule::EfArgmax => argmax_largest(&aux.ef_row()),
        InjectionRule::ScArgmax => argmax_largest(&aux.sc_row()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Master,
    Aux,
}

/// Numbers behind a plan's two decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationale {
    /// `"highest_mean_sc"` or `"override"`.
    pub master_rule: String,
    pub mean_sc: BTreeMap<String, f64>,
    pub injection_rule: InjectionRule,
    /// The auxiliary's row that the injection stride was read from.
    pub aux_row: BTreeMap<u32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionPlan {
    pub master: String,
    pub aux: String,
    pub injection_stride: u32,
    pub pyramid: BTreeMap<u32, Source>,
    pub rationale: Rationale,
}

/// Master pyramid with the auxiliary substituted at its selected stride.
pub fn build_fusion_plan(master: &StrideProfile, aux: &StrideProfile) -> Result<FusionPlan> {
    build_fusion_plan_with(master, aux, InjectionRule::EfArgmax)
}

pub fn build_fusion_plan_with(master: &StrideProfile, aux: &StrideProfile, rule: InjectionRule) -> Result<FusionPlan> {
    if master.encoder_id == aux.encoder_id {
        return Err(Error::SameEncoder(master.encoder_id.clone()));
    }
    master.validate()?;
    let stride = select_injection_stride_with(aux, rule)?;
    let pyramid = STRIDES.iter().map(|s| (*s, if *s == stride { Source::Aux } else { Source::Master })).collect();
    let mut mean_sc = BTreeMap::new();
    mean_sc.insert(master.encoder_id.clone(), master.mean_sc());
    mean_sc.insert(aux.encoder_id.clone(), aux.mean_sc());
    Ok(FusionPlan {
        master: master.encoder_id.clone(),
        aux: aux.encoder_id.clone(),
        injection_stride: stride,
        pyramid,
        rationale: Rationale {
            master_rule: "highest_mean_sc".into(),
            mean_sc,
            injection_rule: rule,
            aux_row: match rule {
                InjectionRule::EfArgmax => aux.ef_row(),
                InjectionRule::ScArgmax => aux.sc_row(),
            },
        },
    })
}

/// Options for [`plan_from_profiles`].
#[derive(Debug, Clone, Default)]
pub struct PlanOptions<'a> {
    pub master: Option<&'a str>,
    pub aux: Option<&'a str>,
    pub rule: InjectionRule,
}

/// Plans a fusion from any number (at least two) of encoder profiles.
///
/// Without an override the master is [`select_master`]'s pick and the
/// auxiliary is the remaining encoder with the highest peak EF. When the caller
/// forces a master that is not the SC leader, roles are complementary the other
/// way round and the auxiliary is the remaining encoder with the highest mean
/// SC. Ties in either choice go to the smallest id.
pub fn plan_from_profiles(profiles: &[StrideProfile], options: &PlanOptions<'_>) -> Result<FusionPlan> {
    let leader = select_master(profiles)?;
    let find =
        |id: &str| profiles.iter().find(|p| p.encoder_id == id).ok_or_else(|| Error::UnknownEncoder(id.to_string()));
    let master_id = options.master.unwrap_or(&leader);
    let master = find(master_id)?;
    let aux = match options.aux {
        Some(id) => find(id)?,
        None => {
            let key: fn(&StrideProfile) -> f64 =
                if master.encoder_id == leader { StrideProfile::peak_ef } else { StrideProfile::mean_sc };
            let mut best: Option<&StrideProfile> = None;
            for p in profiles.iter().filter(|p| p.encoder_id != master.encoder_id) {
                best = match best {
                    Some(b) if key(b) > key(p) || (key(b) == key(p) && b.encoder_id <= p.encoder_id) => Some(b),
                    _ => Some(p),
                };
            }
            best.ok_or(Error::TooFewProfiles(1))?
        }
    };
    let mut plan = build_fusion_plan_with(master, aux, options.rule)?;
    plan.rationale.mean_sc = profiles.iter().map(|p| (p.encoder_id.clone(), p.mean_sc())).collect();
    if options.master.is_some() && master.encoder_id != leader {
        plan.rationale.master_rule = "override".into();
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn profile(id: &str, sc: [f64; 4], ef: [f64; 4]) -> StrideProfile {
        let rows = STRIDES.iter().enumerate().map(|(i, s)| (*s, StrideRow::summary(sc[i], ef[i]))).collect();
        StrideProfile::new(id.into(), rows, None).unwrap()
    }

    fn dinov3() -> StrideProfile {
        profile("DINOv3", [0.73, 0.71, 0.65, 0.53], [1.27, 1.64, 2.33, 5.88])
    }

    fn sam2() -> StrideProfile {
        profile("SAM2", [0.49, 0.44, 0.11, 0.41], [6.60, 8.59, 17.13, 12.47])
    }

    #[test]
    fn master_by_mean_sc() {
        assert_eq!(select_master(&[sam2(), dinov3()]).unwrap(), "DINOv3");
        assert!((dinov3().mean_sc() - 0.655).abs() < 1e-12);
        assert!((sam2().mean_sc() - 0.3625).abs() < 1e-12);
        assert_eq!(select_master(&[sam2()]), Err(Error::TooFewProfiles(1)));
    }

    #[test]
    fn master_tie_is_lexicographic() {
        let a = profile("b", [0.5; 4], [1.0; 4]);
        let b = profile("a", [0.5; 4], [1.0; 4]);
        assert_eq!(select_master(&[a, b]).unwrap(), "a");
    }

    #[test]
    fn injection_stride_examples() {
        assert_eq!(select_injection_stride(&sam2()).unwrap(), 16);
        assert_eq!(select_injection_stride(&dinov3()).unwrap(), 32);
        assert_eq!(select_injection_stride(&profile("x", [0.1; 4], [3.0; 4])).unwrap(), 32);
    }

    #[test]
    fn plan_pyramid() {
        let plan = build_fusion_plan(&dinov3(), &sam2()).unwrap();
        assert_eq!(plan.injection_stride, 16);
        let sources: Vec<Source> = plan.pyramid.values().copied().collect();
        assert_eq!(sources, vec![Source::Master, Source::Master, Source::Aux, Source::Master]);
        assert_eq!(build_fusion_plan(&sam2(), &sam2()).unwrap_err(), Error::SameEncoder("SAM2".into()));
    }

    #[test]
    fn override_swaps_roles() {
        let profiles = [dinov3(), sam2()];
        let plan = plan_from_profiles(&profiles, &PlanOptions { master: Some("SAM2"), ..Default::default() }).unwrap();
        assert_eq!((plan.master.as_str(), plan.aux.as_str(), plan.injection_stride), ("SAM2", "DINOv3", 32));
        assert_eq!(plan.rationale.master_rule, "override");
    }

    #[test]
    fn profile_needs_all_strides() {
        let mut rows = BTreeMap::new();
        rows.insert(4, StrideRow::summary(0.1, 1.0));
        assert_eq!(StrideProfile::new("x".into(), rows, None).unwrap_err(), Error::MissingStride(8));
    }

    #[test]
    fn aggregate_means() {
        let a = profile("e", [0.2; 4], [2.0; 4]);
        let b = profile("e", [0.4; 4], [4.0; 4]);
        let m = aggregate_profiles(&[a, b]).unwrap();
        assert_eq!(m.images, 2);
        assert!((m.rows[&8].sc - 0.3).abs() < 1e-12);
        assert!((m.rows[&8].ef - 3.0).abs() < 1e-12);
    }
}
