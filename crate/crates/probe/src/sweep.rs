//! One-at-a-time hyperparameter sweeps with ordering assertions.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use feature_probe_core::planner::{select_injection_stride, ParamsEcho, StrideProfile};

use crate::assess::{assess, Input};
use crate::error::{ProbeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    GridK,
    PcaDims,
    /// A single cluster count, used as `k_set = {k}`.
    K,
    RIn,
    ROut,
    RhoLow,
    Tau,
}

impl Parameter {
    pub const ALL: [Parameter; 7] = [
        Parameter::GridK,
        Parameter::PcaDims,
        Parameter::K,
        Parameter::RIn,
        Parameter::ROut,
        Parameter::RhoLow,
        Parameter::Tau,
    ];

    /// Published default grid.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Parameter::GridK => vec![8.0, 12.0, 16.0, 20.0],
            Parameter::PcaDims => vec![16.0, 32.0, 64.0],
            Parameter::K => vec![4.0, 6.0, 8.0, 10.0, 12.0],
            Parameter::RIn => vec![2.0, 3.0, 4.0],
            Parameter::ROut => vec![6.0, 7.0, 8.0],
            Parameter::RhoLow => vec![0.10, 0.15, 0.20],
            Parameter::Tau => vec![0.4, 0.5, 0.6],
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Parameter::RhoLow | Parameter::Tau)
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &ParamsEcho, value: f64) -> Result<ParamsEcho> {
        if !value.is_finite() || (self.is_integer() && (value.fract() != 0.0 || value < 0.0)) {
            return Err(ProbeError::Usage(format!("{value} is not a valid value for {self:?}")));
        }
        let mut p = base.clone();
        let n = value as usize;
        match self {
            Parameter::GridK => p.sc.grid_k = n,
            Parameter::PcaDims => p.sc.pca_dims = n,
            Parameter::K => p.sc.k_set = vec![n],
            Parameter::RIn => p.ef.r_in = n as u32,
            Parameter::ROut => p.ef.r_out = n as u32,
            Parameter::RhoLow => p.ef.rho_low = value,
            Parameter::Tau => p.ef.tau = value,
        }
        Ok(p)
    }
}

/// An ordering claim checked at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assertion {
    MeanScGreater {
        higher: String,
        lower: String,
    },
    PeakEfGreater {
        higher: String,
        lower: String,
    },
    EfArgmaxStride {
        encoder: String,
        stride: u32,
    },
    /// The EF argmax matches the one found with the base parameters.
    EfArgmaxUnchanged {
        encoder: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: Parameter,
    /// The published grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default = "default_base")]
    pub base: ParamsEcho,
    pub assertions: Vec<Assertion>,
}

fn default_base() -> ParamsEcho {
    ParamsEcho { sc: Default::default(), ef: Default::default() }
}

impl SweepSpec {
    pub fn new(parameter: Parameter, assertions: Vec<Assertion>) -> Self {
        Self { parameter, values: None, base: default_base(), assertions }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.values.clone().unwrap_or_else(|| self.parameter.default_grid())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub assertion: Assertion,
    pub holds: bool,
    pub observed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub profiles: Vec<StrideProfile>,
    pub assertions: Vec<AssertionOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: Parameter,
    pub points: Vec<SweepPoint>,
    pub all_hold: bool,
}

fn find<'a>(profiles: &'a [StrideProfile], id: &str) -> Result<&'a StrideProfile> {
    profiles
        .iter()
        .find(|p| p.encoder_id == id)
        .ok_or_else(|| ProbeError::Usage(format!("assertion names unknown encoder {id:?}")))
}

fn check(a: &Assertion, profiles: &[StrideProfile], base: &[StrideProfile]) -> Result<AssertionOutcome> {
    let (holds, observed) = match a {
        Assertion::MeanScGreater { higher, lower } => {
            let (h, l) = (find(profiles, higher)?.mean_sc(), find(profiles, lower)?.mean_sc());
            (h > l, format!("{h:.6} vs {l:.6}"))
        }
        Assertion::PeakEfGreater { higher, lower } => {
            let (h, l) = (find(profiles, higher)?.peak_ef(), find(profiles, lower)?.peak_ef());
            (h > l, format!("{h:.6} vs {l:.6}"))
        }
        Assertion::EfArgmaxStride { encoder, stride } => {
            let s = select_injection_stride(find(profiles, encoder)?)?;
            (s == *stride, format!("argmax at stride {s}"))
        }
        Assertion::EfArgmaxUnchanged { encoder } => {
            let s = select_injection_stride(find(profiles, encoder)?)?;
            let b = select_injection_stride(find(base, encoder)?)?;
            (s == b, format!("argmax at stride {s}, base {b}"))
        }
    };
    Ok(AssertionOutcome { assertion: a.clone(), holds, observed })
}

/// Scores `inputs` once per grid value (in parallel) and checks every assertion.
pub fn run_sweep(spec: &SweepSpec, inputs: &[Input]) -> Result<SweepReport> {
    let grid = spec.grid();
    if grid.is_empty() {
        return Err(ProbeError::Usage("sweep grid is empty".into()));
    }
    let settings = grid.iter().map(|v| spec.parameter.apply(&spec.base, *v)).collect::<Result<Vec<_>>>()?;
    let needs_base = spec.assertions.iter().any(|a| matches!(a, Assertion::EfArgmaxUnchanged { .. }));
    let base = if needs_base { assess(inputs, &spec.base)?.profiles } else { Vec::new() };
    let results: Vec<Result<SweepPoint>> = settings
        .par_iter()
        .zip(&grid)
        .map(|(params, value)| {
            let profiles = assess(inputs, params)?.profiles;
            let assertions = spec.assertions.iter().map(|a| check(a, &profiles, &base)).collect::<Result<Vec<_>>>()?;
            Ok(SweepPoint { value: *value, profiles, assertions })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    let all_hold = points.iter().all(|p| p.assertions.iter().all(|a| a.holds));
    Ok(SweepReport { parameter: spec.parameter, points, all_hold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_sets_one_field() {
        let base = default_base();
        let p = Parameter::K.apply(&base, 12.0).unwrap();
        assert_eq!(p.sc.k_set, vec![12]);
        assert_eq!(p.ef, base.ef);
        assert_eq!(Parameter::Tau.apply(&base, 0.4).unwrap().ef.tau, 0.4);
        assert!(Parameter::GridK.apply(&base, 8.5).is_err());
        assert!(Parameter::RIn.apply(&base, -1.0).is_err());
    }

    #[test]
    fn published_grids() {
        assert_eq!(Parameter::GridK.default_grid(), vec![8.0, 12.0, 16.0, 20.0]);
        assert_eq!(Parameter::ALL.iter().map(|p| p.default_grid().len()).sum::<usize>(), 24);
        let spec = SweepSpec::new(Parameter::RhoLow, Vec::new());
        assert_eq!(spec.grid(), vec![0.10, 0.15, 0.20]);
    }

    #[test]
    fn empty_grid_is_a_usage_error() {
        let spec = SweepSpec { values: Some(Vec::new()), ..SweepSpec::new(Parameter::Tau, Vec::new()) };
        assert!(matches!(run_sweep(&spec, &[]), Err(ProbeError::Usage(_))));
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"parameter":"rho_low","assertions":[{"kind":"ef_argmax_stride","encoder":"e","stride":16}]}"#;
        let spec: SweepSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.values, None);
        assert_eq!(spec.assertions, vec![Assertion::EfArgmaxStride { encoder: "e".into(), stride: 16 }]);
    }
}
