//! Cross-product parameter sweeps described by a JSON file.
//!
//! ```json
//! {
//!   "backend": "sim",
//!   "pattern": "1d",
//!   "bsize": 1024,
//!   "size_bytes": 16777216,
//!   "axes": {
//!     "config": ["R1W1", "R2W1"],
//!     "interleave": [false],
//!     "vector": [1, 2, 4, 8, 16, 32],
//!     "halo": [0],
//!     "pad": [0],
//!     "freq_mhz": [266.666]
//!   },
//!   "mem": { "rw_turnaround_ctrl_cycles": 2 },
//!   "host": { "repetitions": 3 },
//!   "chart": { "x": "vector", "kind": "line" }
//! }
//! ```
//!
//! Every axis is optional but at least one must be given, and none may be
//! empty. Points are enumerated in the order config, interleave, vector, halo,
//! pad, freq_mhz, with the last axis varying fastest.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::point::{Backend, HostOptions, RunPoint, DEFAULT_FREQ_MHZ};
use super::report::ReportRow;
use super::svg::{Chart, ChartKind};
use super::CliError;
use crate::memmodel::MemConfig;
use crate::patterns::{ArrayConfig, PatternKind};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axes {
    pub config: Option<Vec<ArrayConfig>>,
    pub interleave: Option<Vec<bool>>,
    pub vector: Option<Vec<u32>>,
    pub halo: Option<Vec<u64>>,
    pub pad: Option<Vec<u64>>,
    pub freq_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Config,
    Interleave,
    Vector,
    Halo,
    Pad,
    FreqMhz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub x: AxisName,
    #[serde(default)]
    pub kind: ChartKind,
    pub title: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_pattern")]
    pub pattern: PatternKind,
    pub bsize: Option<u64>,
    pub size_bytes: Option<u64>,
    pub dims: Option<Vec<u64>>,
    #[serde(default = "default_elem_bytes")]
    pub elem_bytes: u32,
    #[serde(default)]
    pub row_pad: u64,
    #[serde(default)]
    pub plane_pad: u64,
    pub axes: Axes,
    #[serde(default)]
    pub mem: MemConfig,
    #[serde(default)]
    pub host: HostOptions,
    pub chart: Option<ChartSpec>,
}

fn default_pattern() -> PatternKind {
    PatternKind::OneD
}

fn default_elem_bytes() -> u32 {
    4
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Schema {
                path,
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    fn check_axes(&self) -> Result<(), CliError> {
        let a = &self.axes;
        let lens = [
            ("axes.config", a.config.as_ref().map(Vec::len)),
            ("axes.interleave", a.interleave.as_ref().map(Vec::len)),
            ("axes.vector", a.vector.as_ref().map(Vec::len)),
            ("axes.halo", a.halo.as_ref().map(Vec::len)),
            ("axes.pad", a.pad.as_ref().map(Vec::len)),
            ("axes.freq_mhz", a.freq_mhz.as_ref().map(Vec::len)),
        ];
        if lens.iter().all(|(_, l)| l.is_none()) {
            return Err(CliError::Schema {
                path: "axes".into(),
                message: "at least one axis is required".into(),
            });
        }
        if let Some((name, _)) = lens.iter().find(|(_, l)| *l == Some(0)) {
            return Err(CliError::Schema {
                path: (*name).into(),
                message: "axis has no values".into(),
            });
        }
        Ok(())
    }

    /// All points of the cross product, in canonical order.
    pub fn points(&self) -> Result<Vec<RunPoint>, CliError> {
        self.check_axes()?;
        let a = &self.axes;
        let configs = a
            .config
            .clone()
            .unwrap_or_else(|| vec![RunPoint::default().config]);
        let interleaves = a
            .interleave
            .clone()
            .unwrap_or_else(|| vec![self.mem.interleave]);
        let vectors = a
            .vector
            .clone()
            .unwrap_or_else(|| vec![RunPoint::default().lanes]);
        let halos = a.halo.clone().unwrap_or_else(|| vec![0]);
        let pads = a.pad.clone().unwrap_or_else(|| vec![0]);
        let freqs = a.freq_mhz.clone().unwrap_or_else(|| vec![DEFAULT_FREQ_MHZ]);

        let mut out = Vec::new();
        for &config in &configs {
            for &interleave in &interleaves {
                for &lanes in &vectors {
                    for &halo in &halos {
                        for &pad in &pads {
                            for &freq_mhz in &freqs {
                                out.push(RunPoint {
                                    backend: self.backend,
                                    pattern: self.pattern,
                                    config,
                                    lanes,
                                    elem_bytes: self.elem_bytes,
                                    halo,
                                    pad,
                                    row_pad: self.row_pad,
                                    plane_pad: self.plane_pad,
                                    bsize: self.bsize,
                                    size_bytes: self.size_bytes,
                                    dims: self.dims.clone(),
                                    freq_mhz,
                                    mem: MemConfig {
                                        interleave,
                                        ..self.mem
                                    },
                                    host: self.host,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Execute every point. Simulation points run in parallel, host points
/// serially; rows come back in point order either way.
pub fn run_points(points: &[RunPoint]) -> Result<Vec<ReportRow>, CliError> {
    let run = |(i, p): (usize, &RunPoint)| {
        p.execute().map_err(|e| CliError::Point {
            index: i,
            source: Box::new(e),
        })
    };
    if points.iter().all(|p| p.backend == Backend::Sim) {
        points.par_iter().enumerate().map(run).collect()
    } else {
        points.iter().enumerate().map(run).collect()
    }
}

fn axis_label(point: &RunPoint, axis: AxisName) -> String {
    match axis {
        AxisName::Config => point.config.to_string(),
        AxisName::Interleave => {
            if point.mem.interleave {
                "interleaved".into()
            } else {
                "manual".into()
            }
        }
        AxisName::Vector => format!("V{}", point.lanes),
        AxisName::Halo => format!("halo {}", point.halo),
        AxisName::Pad => format!("pad {}", point.pad),
        AxisName::FreqMhz => format!("{} MHz", point.freq_mhz),
    }
}

fn axis_value(point: &RunPoint, axis: AxisName) -> String {
    match axis {
        AxisName::Config => point.config.to_string(),
        AxisName::Interleave => point.mem.interleave.to_string(),
        AxisName::Vector => point.lanes.to_string(),
        AxisName::Halo => point.halo.to_string(),
        AxisName::Pad => point.pad.to_string(),
        AxisName::FreqMhz => point.freq_mhz.to_string(),
    }
}

const ALL_AXES: [AxisName; 6] = [
    AxisName::Config,
    AxisName::Interleave,
    AxisName::Vector,
    AxisName::Halo,
    AxisName::Pad,
    AxisName::FreqMhz,
];

/// Effective bandwidth along `spec.x`, one series per combination of the
/// other axes.
pub fn chart(
    sweep: &SweepSpec,
    spec: &ChartSpec,
    points: &[RunPoint],
    rows: &[ReportRow],
) -> Chart {
    let mut categories: Vec<String> = Vec::new();
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    let varying: Vec<AxisName> = ALL_AXES
        .into_iter()
        .filter(|&a| a != spec.x)
        .filter(|&a| {
            points
                .first()
                .map(|p0| points.iter().any(|p| axis_value(p, a) != axis_value(p0, a)))
                .unwrap_or(false)
        })
        .collect();
    for p in points {
        let c = axis_value(p, spec.x);
        if !categories.contains(&c) {
            categories.push(c);
        }
    }
    for (p, row) in points.iter().zip(rows) {
        let label = if varying.is_empty() {
            "gbps_effective".to_string()
        } else {
            varying
                .iter()
                .map(|&a| axis_label(p, a))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let idx = match series.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                series.push((label, vec![f64::NAN; categories.len()]));
                series.len() - 1
            }
        };
        let ci = categories
            .iter()
            .position(|c| *c == axis_value(p, spec.x))
            .expect("category collected above");
        series[idx].1[ci] = row.gbps_effective;
    }
    let x_label = serde_json::to_value(spec.x)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    Chart {
        kind: spec.kind,
        title: spec.title.clone().unwrap_or_else(|| {
            format!(
                "{} {} effective bandwidth",
                sweep.backend.name(),
                sweep.pattern
            )
        }),
        x_label,
        y_label: "GB/s".into(),
        categories,
        series,
    }
}
