//! Trend checks of the memory model against reference anchors.
//!
//! Each anchor names a metric computed from a fixed set of simulations and
//! states how the computed value must relate to the anchor value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analysis::efficiency;
use crate::memmodel::{saturation_lanes, simulate, KernelConfig, MemConfig, SimResult};
use crate::patterns::{block_geometry, fit_array_size, gen_1d, PaddingSpec, VectorSpec};

pub const BUNDLED_ANCHORS: &str = include_str!("../../data/anchors.json");

const FREQ: f64 = 266.666;
const SIM_BYTES: u64 = 4 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    /// |computed − value| ≤ tolerance
    Within,
    /// computed ≤ value + tolerance
    AtMost,
    /// computed ≥ value − tolerance
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceAnchor {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub compare: Compare,
    /// Where the anchor value comes from.
    pub origin: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorFile {
    pub anchors: Vec<ReferenceAnchor>,
}

impl AnchorFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_ANCHORS).expect("bundled anchor file parses")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorOutcome {
    pub name: String,
    pub computed: f64,
    pub value: f64,
    pub tolerance: f64,
    pub compare: Compare,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub outcomes: Vec<AnchorOutcome>,
    /// Metrics with no anchor in the file.
    pub missing: Vec<String>,
    /// Anchors naming a metric that does not exist.
    pub unknown: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.unknown.is_empty() && self.outcomes.iter().all(|o| o.pass)
    }
}

fn sim(
    cfg: &str,
    lanes: u32,
    halo: u64,
    pad: u64,
    freq: f64,
    mem: &MemConfig,
) -> Result<SimResult, CliError> {
    let block = block_geometry(1024, halo)?;
    let n = fit_array_size(SIM_BYTES, block.csize(), 4)?;
    let stream = gen_1d(
        n,
        block,
        PaddingSpec::leading(pad),
        VectorSpec::floats(lanes)?,
        cfg.parse()?,
    )?;
    Ok(simulate(&stream, &KernelConfig::new(freq)?, mem, None)?)
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    max / min - 1.0
}

/// Names of every metric `check` can compute.
pub const METRICS: [&str; 11] = [
    "aligned_peak_fraction",
    "aligned_vs_hardware_efficiency",
    "misalignment_ratio",
    "interleaved_vector_scaling",
    "interleaved_single_bank_ceiling",
    "saturation_lanes_1",
    "saturation_lanes_2",
    "saturation_lanes_4",
    "halo_equivalence_2_6_14",
    "halo_equivalence_4_12_20",
    "expected_cap_rule",
];

/// Compute all metrics from the pinned simulations.
pub fn compute_metrics() -> Result<BTreeMap<&'static str, f64>, CliError> {
    let manual = MemConfig::manual();
    let inter = MemConfig::default();
    let mut m = BTreeMap::new();

    let aligned = sim("R1W1", 16, 0, 0, FREQ, &manual)?;
    m.insert("aligned_peak_fraction", aligned.efficiency_vs_peak);
    m.insert("aligned_vs_hardware_efficiency", aligned.efficiency_vs_peak);

    let quarter = sim("R1W1", 16, 0, 4, FREQ, &manual)?;
    m.insert(
        "misalignment_ratio",
        quarter.gbps_effective / aligned.gbps_effective,
    );

    let v16 = sim("R1W0", 16, 0, 0, FREQ, &inter)?;
    let v32 = sim("R1W0", 32, 0, 0, FREQ, &inter)?;
    m.insert(
        "interleaved_vector_scaling",
        v32.gbps_effective / v16.gbps_effective,
    );
    m.insert(
        "interleaved_single_bank_ceiling",
        v16.gbps_effective.max(v32.gbps_effective) / inter.bank_peak_gbps(),
    );

    for (name, ports) in [
        ("saturation_lanes_1", 1),
        ("saturation_lanes_2", 2),
        ("saturation_lanes_4", 4),
    ] {
        m.insert(name, f64::from(saturation_lanes(&manual, ports, 4)));
    }

    for (name, halos) in [
        ("halo_equivalence_2_6_14", [2, 6, 14]),
        ("halo_equivalence_4_12_20", [4, 12, 20]),
    ] {
        let g = halos
            .iter()
            .map(|&h| sim("R1W1", 16, h, 0, FREQ, &manual).map(|r| r.gbps_effective))
            .collect::<Result<Vec<_>, _>>()?;
        m.insert(name, spread(&g));
    }

    // Oversubscribed: expected exceeds peak, so the expected-relative
    // efficiency must use peak as its denominator.
    let over = sim("R2W2", 16, 0, 0, FREQ, &manual)?;
    let capped = efficiency(over.gbps_effective, over.expected_gbps, over.peak_gbps);
    m.insert(
        "expected_cap_rule",
        if over.expected_gbps > over.peak_gbps {
            capped / over.efficiency_vs_peak
        } else {
            f64::NAN
        },
    );
    Ok(m)
}

pub fn evaluate(file: &AnchorFile, metrics: &BTreeMap<&'static str, f64>) -> CheckReport {
    let mut outcomes = Vec::new();
    let mut unknown = Vec::new();
    for a in &file.anchors {
        let Some(&computed) = metrics.get(a.name.as_str()) else {
            unknown.push(a.name.clone());
            continue;
        };
        let pass = match a.compare {
            Compare::Within => (computed - a.value).abs() <= a.tolerance,
            Compare::AtMost => computed <= a.value + a.tolerance,
            Compare::AtLeast => computed >= a.value - a.tolerance,
        };
        outcomes.push(AnchorOutcome {
            name: a.name.clone(),
            computed,
            value: a.value,
            tolerance: a.tolerance,
            compare: a.compare,
            pass,
        });
    }
    let missing = METRICS
        .iter()
        .filter(|m| !file.anchors.iter().any(|a| a.name == **m))
        .map(|m| m.to_string())
        .collect();
    CheckReport {
        outcomes,
        missing,
        unknown,
    }
}

pub fn run_check(file: &AnchorFile) -> Result<CheckReport, CliError> {
    Ok(evaluate(file, &compute_metrics()?))
}
