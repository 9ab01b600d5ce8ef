//! Closed-form throughput analytics and alignment/padding/merge advisors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::memmodel::{round_port_width, MemConfig};
use crate::patterns::{ArrayConfig, GridSpec, PatternSpec, VectorSpec};

/// Stable rule identifiers carried in reports.
pub mod rules {
    pub const HALO_MULTIPLE: &str = "halo-multiple-of-vector";
    pub const HALF_VECTOR_PAD: &str = "half-vector-padding";
    pub const PAD_HALO_RESIDUE: &str = "pad-halo-residue";
    pub const BLOCK_STRIDE_MISALIGNED: &str = "block-stride-misaligned";
    pub const AOS_MERGE: &str = "aos-merge";
    pub const ALREADY_MINIMAL: &str = "already-minimal";
    pub const NO_MERGE: &str = "no-straightforward-merge";
    pub const ALL_ALIGNED: &str = "all-accesses-aligned";
    pub const SOME_BLOCKS_ALIGNED: &str = "some-block-starts-aligned";
    pub const NONE_ALIGNED: &str = "no-block-start-aligned";
}

/// arrays × lanes × f × elem_bytes, in GB/s.
pub fn expected_throughput(num_arrays: u32, lanes: u32, f_mhz: f64, elem_bytes: u32) -> f64 {
    f64::from(num_arrays) * f64::from(lanes) * f_mhz * 1e6 * f64::from(elem_bytes) / 1e9
}

/// Expected throughput as used for efficiency denominators: never above peak.
pub fn capped_expected(expected_gbps: f64, peak_gbps: f64) -> f64 {
    expected_gbps.min(peak_gbps)
}

pub fn efficiency(measured_gbps: f64, expected_gbps: f64, peak_gbps: f64) -> f64 {
    measured_gbps / capped_expected(expected_gbps, peak_gbps)
}

/// Alignment needed for full-rate accesses: the port width, up to one bus word.
pub fn alignment_requirement(lanes: u32, elem_bytes: u32, bus_word_bytes: u64) -> u64 {
    let port = u64::from(round_port_width(lanes).rounded) * u64::from(elem_bytes);
    port.min(bus_word_bytes)
}

/// Largest power-of-two byte alignment guaranteed for a set of addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlignmentClass {
    Bytes(u64),
    /// Every address is aligned to any granularity (e.g. halo 0).
    Unbounded,
}

impl AlignmentClass {
    pub fn meets(&self, requirement_bytes: u64) -> bool {
        match *self {
            AlignmentClass::Unbounded => true,
            AlignmentClass::Bytes(g) => g >= requirement_bytes,
        }
    }

    fn of_gcd(g: u64) -> Self {
        if g == 0 {
            AlignmentClass::Unbounded
        } else {
            AlignmentClass::Bytes(lowest_bit(g))
        }
    }
}

impl fmt::Display for AlignmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlignmentClass::Bytes(b) => write!(f, "{b}"),
            AlignmentClass::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for AlignmentClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            AlignmentClass::Bytes(b) => s.serialize_u64(b),
            AlignmentClass::Unbounded => s.serialize_str("inf"),
        }
    }
}

fn lowest_bit(x: u64) -> u64 {
    x & x.wrapping_neg()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Alignment class of a halo: the largest power of two dividing it, in bytes,
/// capped at the access width. Halos sharing a class behave identically.
pub fn halo_class(halo: u64, lanes: u32, elem_bytes: u32) -> AlignmentClass {
    if halo == 0 {
        return AlignmentClass::Unbounded;
    }
    let port = u64::from(round_port_width(lanes).rounded) * u64::from(elem_bytes);
    AlignmentClass::Bytes((lowest_bit(halo) * u64::from(elem_bytes)).min(port))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictedClass {
    Full,
    Partial,
    None,
}

impl fmt::Display for PredictedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictedClass::Full => "full",
            PredictedClass::Partial => "partial",
            PredictedClass::None => "none",
        })
    }
}

/// Array-of-structs merge of equally sized arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub read_struct_bytes: u64,
    pub write_struct_bytes: u64,
    pub merged: ArrayConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdvisorReport {
    /// Recommended leading pad in elements.
    pub pad: u64,
    pub class: PredictedClass,
    pub rule: String,
    pub merge: Option<MergePlan>,
}

/// Leading pad that makes overlapped 1D blocks start aligned.
///
/// Works in units of the alignment requirement `r` (elements). A halo that is
/// a multiple of `r` needs nothing; a halo at `r/2` is fixed by padding `r/2`
/// since the block stride is then already a multiple of `r`. Anything else
/// can only align the blocks whose start lands on `r` after padding by the
/// halo residue.
pub fn padding_advice(
    halo: u64,
    vector: VectorSpec,
    csize: u64,
    bus_word_bytes: u64,
) -> AdvisorReport {
    let eb = u64::from(vector.elem_bytes);
    let req = alignment_requirement(vector.lanes, vector.elem_bytes, bus_word_bytes);
    let r = (req / eb).max(1);
    let residue = halo % r;
    let (pad, mut class, mut rule) = if residue == 0 {
        (0, PredictedClass::Full, rules::HALO_MULTIPLE)
    } else if r.is_multiple_of(2) && residue == r / 2 {
        (r / 2, PredictedClass::Full, rules::HALF_VECTOR_PAD)
    } else {
        (residue, PredictedClass::Partial, rules::PAD_HALO_RESIDUE)
    };
    if class == PredictedClass::Full && !csize.is_multiple_of(r) {
        class = PredictedClass::Partial;
        rule = rules::BLOCK_STRIDE_MISALIGNED;
    }
    AdvisorReport {
        pad,
        class,
        rule: rule.to_string(),
        merge: None,
    }
}

fn zero_or_pow2(x: u32) -> bool {
    x == 0 || x.is_power_of_two()
}

pub fn merge_advice(arrays: ArrayConfig, elem_bytes: u32) -> AdvisorReport {
    let eb = u64::from(elem_bytes);
    let report = |class, rule: &str, merge| AdvisorReport {
        pad: 0,
        class,
        rule: rule.to_string(),
        merge,
    };
    if arrays.reads <= 1 && arrays.writes <= 1 {
        let plan = MergePlan {
            read_struct_bytes: u64::from(arrays.reads) * eb,
            write_struct_bytes: u64::from(arrays.writes) * eb,
            merged: arrays,
        };
        return report(PredictedClass::Full, rules::ALREADY_MINIMAL, Some(plan));
    }
    if zero_or_pow2(arrays.reads) && zero_or_pow2(arrays.writes) {
        let plan = MergePlan {
            read_struct_bytes: u64::from(arrays.reads) * eb,
            write_struct_bytes: u64::from(arrays.writes) * eb,
            merged: ArrayConfig {
                reads: arrays.reads.min(1),
                writes: arrays.writes.min(1),
            },
        };
        return report(PredictedClass::Full, rules::AOS_MERGE, Some(plan));
    }
    report(PredictedClass::None, rules::NO_MERGE, None)
}

/// Static alignment prediction for a generated stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StreamPrediction {
    /// Guaranteed alignment of every vector start address.
    pub alignment: AlignmentClass,
    pub requirement_bytes: u64,
    pub class: PredictedClass,
    pub rule: String,
    /// Row pad (elements) that would align every row start, when the current
    /// row pitch does not.
    pub row_pad: Option<u64>,
    /// Plane pad (elements) needed on top of `row_pad` for 2.5D.
    pub plane_pad: Option<u64>,
    pub narrative: String,
}

/// Residues mod `modulus` reachable from `start` by adding `step` up to
/// `count - 1` times.
fn spread(reach: &[bool], step: u64, count: u64, modulus: u64) -> Vec<bool> {
    let m = modulus as usize;
    let mut out = vec![false; m];
    let reps = count.min(modulus);
    let step = (step % modulus) as usize;
    for (r, _) in reach.iter().enumerate().filter(|(_, &on)| on) {
        let mut v = r;
        for _ in 0..reps {
            out[v] = true;
            v = (v + step) % m;
        }
    }
    out
}

/// Classify a stream by the alignment of its block start addresses.
///
/// Vector start addresses form `s0 + Σ kᵢ·stepᵢ` (bytes) over the stream's
/// strides: lanes within a row, csize between blocks, row and plane pitches.
/// The largest power of two dividing the gcd of `s0` and all strides that
/// actually occur is the guaranteed alignment. When it falls short of the
/// requirement, the residues of block starts modulo the requirement tell
/// whether some (partial) or none of the blocks start aligned.
pub fn predict_stream_class(spec: &PatternSpec, cfg: &MemConfig) -> StreamPrediction {
    let eb = u64::from(spec.vector.elem_bytes);
    let lanes = u64::from(spec.vector.lanes);
    let req = alignment_requirement(
        spec.vector.lanes,
        spec.vector.elem_bytes,
        cfg.bus_word_bytes(),
    );
    let pad = spec.padding.pad as i64;
    let row = spec.row_pitch();
    let plane = spec.plane_pitch();

    // (stride in elements, number of distinct multiples) for block starts
    let mut strides: Vec<(u64, u64)> = Vec::new();
    let bx = spec.grid.block_x();
    let s0 = match spec.grid {
        GridSpec::OneD { n, block } => {
            strides.push((block.csize(), n / block.csize()));
            pad - block.halo() as i64
        }
        GridSpec::OneHalfD {
            dimx,
            dimy,
            block_x,
        } => {
            strides.push((block_x.csize(), dimx / block_x.csize()));
            strides.push((row, dimy));
            pad - block_x.halo() as i64
        }
        GridSpec::TwoHalfD {
            dimx,
            dimy,
            dimz,
            block_x,
            block_y,
        } => {
            strides.push((block_x.csize(), dimx / block_x.csize()));
            strides.push((
                row,
                (dimy / block_y.csize() - 1) * block_y.csize() + block_y.bsize(),
            ));
            strides.push((plane, dimz));
            pad - block_x.halo() as i64 - block_y.halo() as i64 * row as i64
        }
    };
    let s0_bytes = s0 * eb as i64;

    let mut g = s0_bytes.unsigned_abs();
    if bx.bsize() / lanes > 1 {
        g = gcd(g, lanes * eb);
    }
    for &(step, count) in &strides {
        if count > 1 {
            g = gcd(g, step * eb);
        }
    }
    let alignment = AlignmentClass::of_gcd(g);

    let (class, rule) = if alignment.meets(req) {
        (PredictedClass::Full, rules::ALL_ALIGNED)
    } else {
        let mut reach = vec![false; req as usize];
        reach[s0_bytes.rem_euclid(req as i64) as usize] = true;
        for &(step, count) in &strides {
            reach = spread(&reach, step * eb, count, req);
        }
        if reach[0] {
            (PredictedClass::Partial, rules::SOME_BLOCKS_ALIGNED)
        } else {
            (PredictedClass::None, rules::NONE_ALIGNED)
        }
    };

    let r_elems = (req / eb).max(1);
    let mut row_pad = None;
    let mut plane_pad = None;
    if let GridSpec::OneHalfD { dimx, .. } | GridSpec::TwoHalfD { dimx, .. } = spec.grid {
        if !(row * eb).is_multiple_of(req) {
            row_pad = Some((r_elems - dimx % r_elems) % r_elems);
        }
        if let GridSpec::TwoHalfD { dimy, .. } = spec.grid {
            let fixed_row = dimx + row_pad.unwrap_or(spec.padding.row_pad);
            let body = dimy * fixed_row + spec.padding.plane_pad;
            if !(body * eb).is_multiple_of(req) {
                plane_pad = Some((r_elems - (dimy * fixed_row) % r_elems) % r_elems);
            }
        }
    }

    let mut narrative = format!(
        "vector starts are {alignment}-byte aligned against a {req}-byte requirement: {}",
        match class {
            PredictedClass::Full => "every access is aligned",
            PredictedClass::Partial => "only some blocks start aligned",
            PredictedClass::None => "no block starts aligned",
        }
    );
    if let Some(p) = row_pad {
        narrative.push_str(&format!("; row pitch is misaligned, use row_pad {p}"));
    }
    if let Some(p) = plane_pad {
        narrative.push_str(&format!("; plane pitch is misaligned, use plane_pad {p}"));
    }

    StreamPrediction {
        alignment,
        requirement_bytes: req,
        class,
        rule: rule.to_string(),
        row_pad,
        plane_pad,
        narrative,
    }
}
