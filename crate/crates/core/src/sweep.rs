//! Parameter grids, figure presets, and their CSV/JSON encodings.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrology::{qfi, Method, Probe};
use crate::model::{Level, ModelParams, Param};

/// Parameters a sweep may run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    J,
    D,
    B1,
    B2,
    #[serde(rename = "theta")]
    Theta,
}

impl SweepParam {
    pub fn param(self) -> Param {
        match self {
            SweepParam::J => Param::J,
            SweepParam::D => Param::D,
            SweepParam::B1 => Param::B1,
            SweepParam::B2 => Param::B2,
            SweepParam::Theta => Param::Theta,
        }
    }

    pub fn name(self) -> &'static str {
        self.param().name()
    }
}

/// Optional family of curves: one full sweep per listed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub sweep_param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub levels: Vec<Level>,
    pub probes: Vec<Probe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Series>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::InvalidSpec(format!("need finite start < stop, got [{}, {}]", self.start, self.stop)));
        }
        if self.points < 2 {
            return Err(Error::InvalidSpec(format!("need at least 2 points, got {}", self.points)));
        }
        if self.levels.is_empty() || self.probes.is_empty() {
            return Err(Error::InvalidSpec("levels and probes must be non-empty".into()));
        }
        if let Some(s) = &self.series {
            if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec("series values must be finite and non-empty".into()));
            }
            if s.param == self.sweep_param {
                return Err(Error::InvalidSpec("series parameter must differ from the swept one".into()));
            }
        }
        Ok(())
    }

    /// Grid values in ascending order; θ grids are clipped to `[0, π]`.
    pub fn grid(&self) -> Vec<f64> {
        let (mut lo, mut hi) = (self.start, self.stop);
        if self.sweep_param == SweepParam::Theta {
            lo = lo.clamp(0.0, PI);
            hi = hi.clamp(0.0, PI);
        }
        let n = self.points - 1;
        (0..=n)
            .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
            .collect()
    }

    /// Sorted, de-duplicated levels and probes, in column order.
    fn columns(&self) -> Vec<(Probe, Level)> {
        let mut probes = self.probes.clone();
        probes.sort();
        probes.dedup();
        let mut levels = self.levels.clone();
        levels.sort();
        levels.dedup();
        probes.iter().flat_map(|&p| levels.iter().map(move |&l| (p, l))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepEntry {
    pub probe: Probe,
    pub level: Level,
    /// `None` when the point has a degenerate spectrum.
    pub value: Option<f64>,
    pub method: Option<Method>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointFlag {
    ClosedForm,
    Fallback,
    Degenerate,
}

impl PointFlag {
    fn csv(self) -> &'static str {
        match self {
            PointFlag::ClosedForm => "0",
            PointFlag::Fallback => "1",
            PointFlag::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_value: Option<f64>,
    pub sweep_value: f64,
    pub entries: Vec<SweepEntry>,
    pub fallback: PointFlag,
}

/// Every requested QFI at one parameter point. Degenerate spectra yield
/// empty values rather than an error.
pub fn evaluate_point(params: &ModelParams, columns: &[(Probe, Level)]) -> (Vec<SweepEntry>, PointFlag) {
    let mut flag = PointFlag::ClosedForm;
    let entries = columns
        .iter()
        .map(|&(probe, level)| match qfi(params, level, probe) {
            Ok(v) => {
                if v.method != Method::ClosedForm && flag == PointFlag::ClosedForm {
                    flag = PointFlag::Fallback;
                }
                SweepEntry { probe, level, value: Some(v.value), method: Some(v.method) }
            }
            Err(_) => {
                flag = PointFlag::Degenerate;
                SweepEntry { probe, level, value: None, method: None }
            }
        })
        .collect();
    (entries, flag)
}

/// All probes and levels, in the standard column order.
pub fn all_columns() -> Vec<(Probe, Level)> {
    Probe::ALL.iter().flat_map(|&p| Level::ALL.iter().map(move |&l| (p, l))).collect()
}

/// Evaluate a sweep. Points are computed in parallel; the output order is
/// series value (as listed) then ascending sweep value.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let columns = spec.columns();
    let grid = spec.grid();
    let series: Vec<Option<f64>> = match &spec.series {
        Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };

    let mut jobs = Vec::with_capacity(series.len() * grid.len());
    for &sv in &series {
        let base = match (sv, &spec.series) {
            (Some(v), Some(s)) => spec.base.with(s.param.param(), v)?,
            _ => spec.base,
        };
        for &x in &grid {
            jobs.push((sv, x, base.with(spec.sweep_param.param(), x)?));
        }
    }

    Ok(jobs
        .par_iter()
        .map(|(sv, x, params)| {
            let (entries, fallback) = evaluate_point(params, &columns);
            SweepRecord { series_value: *sv, sweep_value: *x, entries, fallback }
        })
        .collect())
}

/// Round-trip exact decimal rendering (17 significant digits).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(spec: &SweepSpec) -> String {
    let mut cols = vec!["sweep_param".to_string(), "sweep_value".to_string()];
    if spec.series.is_some() {
        cols.push("series_param".into());
        cols.push("series_value".into());
    }
    for (p, l) in spec.columns() {
        cols.push(format!("qfi_{}_{}", p.label(), l));
    }
    cols.push("fallback".into());
    cols.join(",")
}

pub fn to_csv(spec: &SweepSpec, records: &[SweepRecord]) -> String {
    let mut out = csv_header(spec);
    out.push('\n');
    for r in records {
        let mut fields = vec![spec.sweep_param.name().to_string(), format_f64(r.sweep_value)];
        if let Some(s) = &spec.series {
            fields.push(s.param.name().to_string());
            fields.push(r.series_value.map(format_f64).unwrap_or_default());
        }
        fields.extend(r.entries.iter().map(|e| e.value.map(format_f64).unwrap_or_default()));
        fields.push(r.fallback.csv().to_string());
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    spec: &'a SweepSpec,
    records: &'a [SweepRecord],
}

pub fn to_json(spec: &SweepSpec, records: &[SweepRecord]) -> String {
    serde_json::to_string_pretty(&SweepOutput { spec, records }).expect("sweep output is always serializable")
}

pub const PRESETS: [&str; 9] = ["fig1", "fig2a", "fig2b", "fig3", "fig4", "fig5", "fig6a", "fig6b", "fig7"];

pub const DEFAULT_POINTS: usize = 201;
const COUPLING_RANGE: (f64, f64) = (-5.0, 5.0);
const FIELD_RANGE: (f64, f64) = (0.0, 10.0);

/// Parameter grids behind the published figures. Sweep ranges and curve
/// values the captions leave open are defaults here and may be overridden.
pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    let lv = |js: &[u8]| js.iter().map(|&j| Level::new(j).expect("static level")).collect::<Vec<_>>();
    let params = |j, d, b1, b2, theta| ModelParams::new(j, d, b1, b2, theta, 0.0).expect("static preset");
    let spec = |base, sweep_param, (start, stop): (f64, f64), levels, probes: &[Probe], series: Series| SweepSpec {
        base,
        sweep_param,
        start,
        stop,
        points: DEFAULT_POINTS,
        levels,
        probes: probes.to_vec(),
        preset_name: Some(name.to_string()),
        series: Some(series),
    };
    let two = [Probe::TwoQubit];
    let one = [Probe::A];
    let thetas_full = vec![FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2, 5.0 * FRAC_PI_8, 3.0 * FRAC_PI_4, 7.0 * FRAC_PI_8];

    Ok(match name {
        "fig1" => spec(
            params(0.1, 0.0, 1.2, 3.0, FRAC_PI_4),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 3]),
            &two,
            Series { param: SweepParam::Theta, values: thetas_full },
        ),
        "fig2a" => spec(
            params(1.3, 0.0, 1.5, 3.0, FRAC_PI_4),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 3]),
            &two,
            Series { param: SweepParam::B1, values: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0] },
        ),
        "fig2b" => spec(
            params(1.3, 0.0, 1.5, 3.0, FRAC_PI_4),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 3]),
            &two,
            Series { param: SweepParam::B2, values: vec![1.0, 2.0, 3.0, 4.0, 5.0] },
        ),
        "fig3" => spec(
            params(1.3, 0.0, 1.0, 3.0, FRAC_PI_2),
            SweepParam::B2,
            FIELD_RANGE,
            lv(&[1, 2, 3, 4]),
            &two,
            Series { param: SweepParam::Theta, values: vec![FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2] },
        ),
        "fig4" => spec(
            params(0.2, 0.0, 3.0, 2.2, FRAC_PI_4),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 2, 3, 4]),
            &one,
            Series { param: SweepParam::Theta, values: vec![0.3, 0.6, 0.9, 1.2, 1.5] },
        ),
        "fig5" => spec(
            params(0.5, 0.0, 3.0, 2.5, 0.5),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 2, 3, 4]),
            &one,
            Series { param: SweepParam::J, values: vec![0.1, 0.5, 1.0, 2.0, 3.0] },
        ),
        "fig6a" => spec(
            params(0.5, 0.0, 3.0, 2.2, 1.1),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 2, 3, 4]),
            &one,
            Series { param: SweepParam::B1, values: vec![0.5, 1.0, 2.0, 3.0, 4.0] },
        ),
        "fig6b" => spec(
            params(0.5, 0.0, 3.0, 2.2, 1.1),
            SweepParam::D,
            COUPLING_RANGE,
            lv(&[1, 2, 3, 4]),
            &one,
            Series { param: SweepParam::B2, values: vec![1.0, 2.2, 4.0, 6.0, 8.0] },
        ),
        // Negative static fields matter here, so B1 runs over the coupling range.
        "fig7" => spec(
            params(1.3, -0.9, 0.0, 1.0, 0.6),
            SweepParam::B1,
            COUPLING_RANGE,
            lv(&[1, 2, 3, 4]),
            &one,
            Series { param: SweepParam::Theta, values: vec![0.6, PI - 0.6] },
        ),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}
