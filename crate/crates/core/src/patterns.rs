//! Access-stream generators.
//!
//! Three traversal classes are supported, all issuing one vector access per
//! array port per kernel cycle:
//!
//! - 1D overlapped blocking: blocks of `bsize` elements, each starting at
//!   `b * csize - halo` where `csize = bsize - 2 * halo`. A halo of zero is
//!   plain sequential streaming.
//! - 1.5D: the x dimension is blocked; for every x-block the traversal marches
//!   all rows of y.
//! - 2.5D: x and y are blocked into tiles; for every tile the traversal marches
//!   the z planes, row-major inside a plane.
//!
//! Every array port sees the same logical index stream. Lanes that fall
//! outside the grid are emitted as invalid (they occupy the issue slot but
//! carry no bytes); in-bound lanes already visited by an earlier block are
//! flagged redundant and still count as traffic.
//!
//! Streams are lazy. A [`Slot`] can be decoded from its cycle number alone,
//! so any prefix or subrange can be replayed deterministically.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lane masks are `u64`, which bounds the vector width.
pub const MAX_LANES: u32 = 64;

/// Block size used when none is given.
pub const DEFAULT_BSIZE: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("degenerate block: bsize {bsize} must be larger than 2 x halo (halo = {halo})")]
    DegenerateBlock { bsize: u64, halo: u64 },
    #[error("vector width {lanes} does not divide block size {bsize}")]
    LanesNotDividingBlock { lanes: u32, bsize: u64 },
    #[error("{dim} extent {extent} is not a multiple of csize {csize}")]
    ExtentNotMultiple { dim: char, extent: u64, csize: u64 },
    #[error("{dim} extent must be at least 1")]
    EmptyExtent { dim: char },
    #[error("vector width must be in 1..={MAX_LANES}, got {0}")]
    InvalidLanes(u32),
    #[error("element size must be at least one byte")]
    InvalidElemBytes,
    #[error("array configuration needs at least one array")]
    NoArrays,
    #[error("cannot parse array configuration {0:?} (expected e.g. R1W1)")]
    BadConfigName(String),
    #[error("target of {target_bytes} B is smaller than one block of {block_bytes} B")]
    TargetTooSmall { target_bytes: u64, block_bytes: u64 },
    #[error("csize must be at least 1")]
    ZeroCsize,
}

pub type Result<T, E = PatternError> = std::result::Result<T, E>;

/// Width of one vector access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorSpec {
    pub lanes: u32,
    pub elem_bytes: u32,
}

impl VectorSpec {
    pub fn new(lanes: u32, elem_bytes: u32) -> Result<Self> {
        if lanes == 0 || lanes > MAX_LANES {
            return Err(PatternError::InvalidLanes(lanes));
        }
        if elem_bytes == 0 {
            return Err(PatternError::InvalidElemBytes);
        }
        Ok(Self { lanes, elem_bytes })
    }

    /// Vector of 4-byte floats.
    pub fn floats(lanes: u32) -> Result<Self> {
        Self::new(lanes, 4)
    }

    pub fn access_bytes(&self) -> u64 {
        u64::from(self.lanes) * u64::from(self.elem_bytes)
    }
}

/// Number of read and write arrays, each a separate memory port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArrayConfig {
    pub reads: u32,
    pub writes: u32,
}

impl ArrayConfig {
    pub fn new(reads: u32, writes: u32) -> Result<Self> {
        if reads + writes == 0 {
            return Err(PatternError::NoArrays);
        }
        Ok(Self { reads, writes })
    }

    pub fn num_ports(&self) -> u32 {
        self.reads + self.writes
    }

    /// Ports in issue order: reads first, then writes.
    pub fn ports(&self) -> impl Iterator<Item = Port> + '_ {
        (0..self.num_ports()).map(move |index| self.port(index))
    }

    pub fn port(&self, index: u32) -> Port {
        let dir = if index < self.reads {
            Direction::Read
        } else {
            Direction::Write
        };
        Port { index, dir }
    }
}

impl fmt::Display for ArrayConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}W{}", self.reads, self.writes)
    }
}

impl FromStr for ArrayConfig {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || PatternError::BadConfigName(s.to_string());
        let upper = s.trim().to_ascii_uppercase();
        let rest = upper.strip_prefix('R').ok_or_else(bad)?;
        let (r, w) = rest.split_once('W').ok_or_else(bad)?;
        let reads = r.parse().map_err(|_| bad())?;
        let writes = w.parse().map_err(|_| bad())?;
        Self::new(reads, writes)
    }
}

impl Serialize for ArrayConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArrayConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Read,
    Write,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Read => "read",
            Direction::Write => "write",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Port {
    pub index: u32,
    pub dir: Direction,
}

/// Overlapped block along one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block1D {
    bsize: u64,
    halo: u64,
    csize: u64,
}

impl Block1D {
    pub fn bsize(&self) -> u64 {
        self.bsize
    }

    pub fn halo(&self) -> u64 {
        self.halo
    }

    /// Distance between consecutive block starts.
    pub fn csize(&self) -> u64 {
        self.csize
    }

    /// First element index of block `b` (may be negative).
    pub fn start(&self, b: u64) -> i64 {
        (b * self.csize) as i64 - self.halo as i64
    }
}

pub fn block_geometry(bsize: u64, halo: u64) -> Result<Block1D> {
    if halo.checked_mul(2).is_none_or(|h2| bsize <= h2) {
        return Err(PatternError::DegenerateBlock { bsize, halo });
    }
    Ok(Block1D {
        bsize,
        halo,
        csize: bsize - 2 * halo,
    })
}

/// Element count that is a multiple of `csize` and whose byte size is nearest
/// to `target_bytes`. Ties go to the smaller candidate.
pub fn fit_array_size(target_bytes: u64, csize: u64, elem_bytes: u64) -> Result<u64> {
    if csize == 0 {
        return Err(PatternError::ZeroCsize);
    }
    if elem_bytes == 0 {
        return Err(PatternError::InvalidElemBytes);
    }
    let unit = u128::from(csize) * u128::from(elem_bytes);
    let target = u128::from(target_bytes);
    if target < unit {
        return Err(PatternError::TargetTooSmall {
            target_bytes,
            block_bytes: unit as u64,
        });
    }
    let lo = target / unit;
    let below = target - lo * unit;
    let above = (lo + 1) * unit - target;
    let k = if above < below { lo + 1 } else { lo };
    Ok((k * u128::from(csize)) as u64)
}

/// Grid extents and blocking per traversal class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridSpec {
    #[serde(rename = "1d")]
    OneD { n: u64, block: Block1D },
    #[serde(rename = "15d")]
    OneHalfD {
        dimx: u64,
        dimy: u64,
        block_x: Block1D,
    },
    #[serde(rename = "25d")]
    TwoHalfD {
        dimx: u64,
        dimy: u64,
        dimz: u64,
        block_x: Block1D,
        block_y: Block1D,
    },
}

impl GridSpec {
    pub fn kind(&self) -> PatternKind {
        match self {
            GridSpec::OneD { .. } => PatternKind::OneD,
            GridSpec::OneHalfD { .. } => PatternKind::OneHalfD,
            GridSpec::TwoHalfD { .. } => PatternKind::TwoHalfD,
        }
    }

    pub fn block_x(&self) -> Block1D {
        match *self {
            GridSpec::OneD { block, .. } => block,
            GridSpec::OneHalfD { block_x, .. } | GridSpec::TwoHalfD { block_x, .. } => block_x,
        }
    }

    /// Number of in-bound elements.
    pub fn domain_len(&self) -> u64 {
        match *self {
            GridSpec::OneD { n, .. } => n,
            GridSpec::OneHalfD { dimx, dimy, .. } => dimx * dimy,
            GridSpec::TwoHalfD {
                dimx, dimy, dimz, ..
            } => dimx * dimy * dimz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "15d")]
    OneHalfD,
    #[serde(rename = "25d")]
    TwoHalfD,
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatternKind::OneD => "1d",
            PatternKind::OneHalfD => "15d",
            PatternKind::TwoHalfD => "25d",
        })
    }
}

impl FromStr for PatternKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "1d" => Ok(PatternKind::OneD),
            "15d" | "1.5d" => Ok(PatternKind::OneHalfD),
            "25d" | "2.5d" => Ok(PatternKind::TwoHalfD),
            other => Err(format!(
                "unknown pattern {other:?} (expected 1d, 15d or 25d)"
            )),
        }
    }
}

/// Element offsets added to the array layout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaddingSpec {
    /// Leading offset added to every array's base.
    pub pad: u64,
    /// Extra elements at the end of every x row (1.5D / 2.5D).
    pub row_pad: u64,
    /// Extra elements at the end of every z plane (2.5D).
    pub plane_pad: u64,
}

impl PaddingSpec {
    pub fn leading(pad: u64) -> Self {
        Self {
            pad,
            ..Self::default()
        }
    }
}

/// Full description of a generated stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub grid: GridSpec,
    pub padding: PaddingSpec,
    pub vector: VectorSpec,
    pub arrays: ArrayConfig,
}

impl PatternSpec {
    /// Elements between the starts of consecutive x rows.
    pub fn row_pitch(&self) -> u64 {
        match self.grid {
            GridSpec::OneD { n, .. } => n,
            GridSpec::OneHalfD { dimx, .. } | GridSpec::TwoHalfD { dimx, .. } => {
                dimx + self.padding.row_pad
            }
        }
    }

    /// Elements between the starts of consecutive z planes.
    pub fn plane_pitch(&self) -> u64 {
        match self.grid {
            GridSpec::TwoHalfD { dimy, .. } => dimy * self.row_pitch() + self.padding.plane_pad,
            _ => self.row_pitch(),
        }
    }

    /// Linear element index of a grid coordinate (before the leading pad).
    pub fn linear_index(&self, x: i64, y: i64, z: i64) -> i64 {
        z * self.plane_pitch() as i64 + y * self.row_pitch() as i64 + x
    }

    /// Elements an array buffer must hold, leading pad included.
    pub fn span_elems(&self) -> u64 {
        let body = match self.grid {
            GridSpec::OneD { n, .. } => n,
            GridSpec::OneHalfD { dimy, .. } => dimy * self.row_pitch(),
            GridSpec::TwoHalfD { dimz, .. } => dimz * self.plane_pitch(),
        };
        self.padding.pad + body
    }

    pub fn byte_addr(&self, elem_index: i64) -> i64 {
        (self.padding.pad as i64 + elem_index) * i64::from(self.vector.elem_bytes)
    }

    /// Whether a padded-layout index (before the leading pad) lies in the grid.
    pub fn in_domain(&self, elem_index: i64) -> bool {
        if elem_index < 0 {
            return false;
        }
        let e = elem_index as u64;
        match self.grid {
            GridSpec::OneD { n, .. } => e < n,
            GridSpec::OneHalfD { dimx, dimy, .. } => {
                let row = self.row_pitch();
                e / row < dimy && e % row < dimx
            }
            GridSpec::TwoHalfD {
                dimx, dimy, dimz, ..
            } => {
                let (plane, row) = (self.plane_pitch(), self.row_pitch());
                let rem = e % plane;
                e / plane < dimz && rem / row < dimy && rem % row < dimx
            }
        }
    }
}

/// One vector position of the shared index stream. Every port issues the
/// same slot in the same kernel cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub cycle: u64,
    /// Padded-layout index of lane 0.
    pub elem_index: i64,
    pub valid_mask: u64,
    pub redundant_mask: u64,
}

impl Slot {
    pub fn valid_lanes(&self) -> u32 {
        self.valid_mask.count_ones()
    }

    pub fn redundant_lanes(&self) -> u32 {
        self.redundant_mask.count_ones()
    }

    /// No lane is in bounds: the slot is issued but moves no data.
    pub fn is_skipped(&self) -> bool {
        self.valid_mask == 0
    }
}

/// One port's vector access within an issue group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VectorAccess {
    pub port: Port,
    pub elem_index: i64,
    pub byte_addr: i64,
    pub lanes: u32,
    pub valid_mask: u64,
    pub redundant_mask: u64,
}

/// All accesses issued in one kernel cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssueGroup {
    pub cycle: u64,
    pub accesses: Vec<VectorAccess>,
}

/// Lane-level view of an access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AccessRecord {
    pub cycle: u64,
    pub port: Port,
    pub elem_index: i64,
    pub byte_addr: i64,
    pub valid: bool,
    pub redundant: bool,
}

/// Exact element accounting over a stream, summed across ports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RedundancyStats {
    pub issued: u64,
    pub valid: u64,
    pub unique: u64,
    pub redundant: u64,
    pub skipped: u64,
    /// Vector accesses with no valid lane.
    pub skipped_slots: u64,
    pub effective_bytes: u64,
    pub redundant_bytes: u64,
}

impl RedundancyStats {
    /// Issued elements per unique element.
    pub fn issued_per_unique(&self) -> f64 {
        self.issued as f64 / self.unique as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    vecs_per_row: u64,
    slots: u64,
}

/// A validated, lazily generated access stream.
#[derive(Debug, Clone)]
pub struct AccessStream {
    spec: PatternSpec,
    plan: Plan,
}

fn check_block_lanes(block: &Block1D, lanes: u32) -> Result<()> {
    if !block.bsize.is_multiple_of(u64::from(lanes)) {
        return Err(PatternError::LanesNotDividingBlock {
            lanes,
            bsize: block.bsize,
        });
    }
    Ok(())
}

fn check_extent(dim: char, extent: u64, csize: Option<u64>) -> Result<()> {
    if extent == 0 {
        return Err(PatternError::EmptyExtent { dim });
    }
    if let Some(csize) = csize {
        if !extent.is_multiple_of(csize) {
            return Err(PatternError::ExtentNotMultiple { dim, extent, csize });
        }
    }
    Ok(())
}

/// Bits `lo..hi` set, clamped to `0..=64`.
fn range_mask(lo: i64, hi: i64, lanes: u32) -> u64 {
    let lo = lo.clamp(0, i64::from(lanes)) as u32;
    let hi = hi.clamp(0, i64::from(lanes)) as u32;
    if hi <= lo {
        return 0;
    }
    let upto = |n: u32| if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    upto(hi) & !upto(lo)
}

impl AccessStream {
    pub fn new(spec: PatternSpec) -> Result<Self> {
        let VectorSpec { lanes, elem_bytes } = spec.vector;
        VectorSpec::new(lanes, elem_bytes)?;
        ArrayConfig::new(spec.arrays.reads, spec.arrays.writes)?;
        let lanes64 = u64::from(lanes);
        let plan = match spec.grid {
            GridSpec::OneD { n, block } => {
                check_block_lanes(&block, lanes)?;
                check_extent('x', n, Some(block.csize))?;
                let vpr = block.bsize / lanes64;
                Plan {
                    vecs_per_row: vpr,
                    slots: n / block.csize * vpr,
                }
            }
            GridSpec::OneHalfD {
                dimx,
                dimy,
                block_x,
            } => {
                check_block_lanes(&block_x, lanes)?;
                check_extent('x', dimx, Some(block_x.csize))?;
                check_extent('y', dimy, None)?;
                let vpr = block_x.bsize / lanes64;
                Plan {
                    vecs_per_row: vpr,
                    slots: dimx / block_x.csize * dimy * vpr,
                }
            }
            GridSpec::TwoHalfD {
                dimx,
                dimy,
                dimz,
                block_x,
                block_y,
            } => {
                check_block_lanes(&block_x, lanes)?;
                check_extent('x', dimx, Some(block_x.csize))?;
                check_extent('y', dimy, Some(block_y.csize))?;
                check_extent('z', dimz, None)?;
                let vpr = block_x.bsize / lanes64;
                let tiles = (dimx / block_x.csize) * (dimy / block_y.csize);
                Plan {
                    vecs_per_row: vpr,
                    slots: tiles * dimz * block_y.bsize * vpr,
                }
            }
        };
        Ok(Self { spec, plan })
    }

    pub fn spec(&self) -> &PatternSpec {
        &self.spec
    }

    pub fn num_ports(&self) -> u32 {
        self.spec.arrays.num_ports()
    }

    /// Kernel cycles needed to issue the whole stream.
    pub fn num_slots(&self) -> u64 {
        self.plan.slots
    }

    pub fn vecs_per_row(&self) -> u64 {
        self.plan.vecs_per_row
    }

    /// Decode the slot issued at `cycle`.
    pub fn slot(&self, cycle: u64) -> Slot {
        debug_assert!(cycle < self.plan.slots);
        let lanes = self.spec.vector.lanes;
        let l = i64::from(lanes);
        let vpr = self.plan.vecs_per_row;
        match self.spec.grid {
            GridSpec::OneD { n, block } => {
                let b = cycle / vpr;
                let x0 = block.start(b) + ((cycle % vpr) as i64) * l;
                let valid = range_mask(-x0, n as i64 - x0, lanes);
                let redundant = if b > 0 {
                    valid
                        & range_mask(
                            i64::MIN / 2,
                            block.start(b) + 2 * block.halo as i64 - x0,
                            lanes,
                        )
                } else {
                    0
                };
                Slot {
                    cycle,
                    elem_index: x0,
                    valid_mask: valid,
                    redundant_mask: redundant,
                }
            }
            GridSpec::OneHalfD {
                dimx,
                dimy,
                block_x,
            } => {
                let per_block = dimy * vpr;
                let k = cycle / per_block;
                let rem = cycle % per_block;
                let y = (rem / vpr) as i64;
                let x0 = block_x.start(k) + ((rem % vpr) as i64) * l;
                let valid = range_mask(-x0, dimx as i64 - x0, lanes);
                let redundant = if k > 0 {
                    valid
                        & range_mask(
                            i64::MIN / 2,
                            block_x.start(k) + 2 * block_x.halo as i64 - x0,
                            lanes,
                        )
                } else {
                    0
                };
                Slot {
                    cycle,
                    elem_index: self.spec.linear_index(x0, y, 0),
                    valid_mask: valid,
                    redundant_mask: redundant,
                }
            }
            GridSpec::TwoHalfD {
                dimx,
                dimy,
                dimz,
                block_x,
                block_y,
            } => {
                let tiles_x = dimx / block_x.csize;
                let per_plane = block_y.bsize * vpr;
                let per_tile = dimz * per_plane;
                let tile = cycle / per_tile;
                let (by, bx) = (tile / tiles_x, tile % tiles_x);
                let rem = cycle % per_tile;
                let z = (rem / per_plane) as i64;
                let rem = rem % per_plane;
                let y = block_y.start(by) + (rem / vpr) as i64;
                let x0 = block_x.start(bx) + ((rem % vpr) as i64) * l;
                let valid = if (0..dimy as i64).contains(&y) {
                    range_mask(-x0, dimx as i64 - x0, lanes)
                } else {
                    0
                };
                let seen_x = if bx > 0 {
                    range_mask(
                        i64::MIN / 2,
                        block_x.start(bx) + 2 * block_x.halo as i64 - x0,
                        lanes,
                    )
                } else {
                    0
                };
                let seen_y = by > 0 && y < block_y.start(by) + 2 * block_y.halo as i64;
                let redundant = valid & if seen_y { u64::MAX } else { seen_x };
                Slot {
                    cycle,
                    elem_index: self.spec.linear_index(x0, y, z),
                    valid_mask: valid,
                    redundant_mask: redundant,
                }
            }
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.plan.slots).map(move |c| self.slot(c))
    }

    /// Slots for the cycle range `[start, end)`.
    pub fn slot_range(&self, start: u64, end: u64) -> impl Iterator<Item = Slot> + '_ {
        (start..end.min(self.plan.slots)).map(move |c| self.slot(c))
    }

    pub fn group(&self, slot: &Slot) -> IssueGroup {
        let lanes = self.spec.vector.lanes;
        let accesses = self
            .spec
            .arrays
            .ports()
            .map(|port| VectorAccess {
                port,
                elem_index: slot.elem_index,
                byte_addr: self.spec.byte_addr(slot.elem_index),
                lanes,
                valid_mask: slot.valid_mask,
                redundant_mask: slot.redundant_mask,
            })
            .collect();
        IssueGroup {
            cycle: slot.cycle,
            accesses,
        }
    }

    pub fn groups(&self) -> impl Iterator<Item = IssueGroup> + '_ {
        self.slots().map(move |s| self.group(&s))
    }

    /// Lane-level records, ports interleaved within each cycle.
    pub fn records(&self) -> impl Iterator<Item = AccessRecord> + '_ {
        let lanes = self.spec.vector.lanes;
        let eb = i64::from(self.spec.vector.elem_bytes);
        self.slots().flat_map(move |slot| {
            self.spec.arrays.ports().flat_map(move |port| {
                (0..lanes).map(move |lane| {
                    let elem_index = slot.elem_index + i64::from(lane);
                    AccessRecord {
                        cycle: slot.cycle,
                        port,
                        elem_index,
                        byte_addr: self.spec.byte_addr(slot.elem_index) + i64::from(lane) * eb,
                        valid: slot.valid_mask >> lane & 1 == 1,
                        redundant: slot.redundant_mask >> lane & 1 == 1,
                    }
                })
            })
        })
    }

    /// Write the lane-level trace as CSV. Debugging aid; the format is not
    /// meant to be stable.
    pub fn write_trace<W: Write>(&self, out: W, max_cycles: Option<u64>) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "cycle",
            "port",
            "dir",
            "elem_index",
            "byte_addr",
            "valid",
            "redundant",
        ])?;
        let limit = max_cycles.unwrap_or(u64::MAX);
        for rec in self.records().take_while(|r| r.cycle < limit) {
            w.write_record([
                rec.cycle.to_string(),
                rec.port.index.to_string(),
                rec.port.dir.to_string(),
                rec.elem_index.to_string(),
                rec.byte_addr.to_string(),
                u8::from(rec.valid).to_string(),
                u8::from(rec.redundant).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn redundancy_stats(&self) -> RedundancyStats {
        redundancy_stats(self)
    }
}

pub fn redundancy_stats(stream: &AccessStream) -> RedundancyStats {
    let lanes = u64::from(stream.spec.vector.lanes);
    let ports = u64::from(stream.num_ports());
    let eb = u64::from(stream.spec.vector.elem_bytes);
    let mut st = RedundancyStats::default();
    for slot in stream.slots() {
        let valid = u64::from(slot.valid_lanes());
        let redundant = u64::from(slot.redundant_lanes());
        st.issued += lanes;
        st.valid += valid;
        st.redundant += redundant;
        st.skipped_slots += u64::from(slot.is_skipped());
    }
    st.issued *= ports;
    st.valid *= ports;
    st.redundant *= ports;
    st.skipped_slots *= ports;
    st.unique = st.valid - st.redundant;
    st.skipped = st.issued - st.valid;
    st.effective_bytes = st.valid * eb;
    st.redundant_bytes = st.redundant * eb;
    st
}

pub fn gen_1d(
    n: u64,
    block: Block1D,
    padding: PaddingSpec,
    vector: VectorSpec,
    arrays: ArrayConfig,
) -> Result<AccessStream> {
    AccessStream::new(PatternSpec {
        grid: GridSpec::OneD { n, block },
        padding,
        vector,
        arrays,
    })
}

pub fn gen_15d(
    dimx: u64,
    dimy: u64,
    block_x: Block1D,
    padding: PaddingSpec,
    vector: VectorSpec,
    arrays: ArrayConfig,
) -> Result<AccessStream> {
    AccessStream::new(PatternSpec {
        grid: GridSpec::OneHalfD {
            dimx,
            dimy,
            block_x,
        },
        padding,
        vector,
        arrays,
    })
}

pub fn gen_25d(
    [dimx, dimy, dimz]: [u64; 3],
    block_x: Block1D,
    block_y: Block1D,
    padding: PaddingSpec,
    vector: VectorSpec,
    arrays: ArrayConfig,
) -> Result<AccessStream> {
    AccessStream::new(PatternSpec {
        grid: GridSpec::TwoHalfD {
            dimx,
            dimy,
            dimz,
            block_x,
            block_y,
        },
        padding,
        vector,
        arrays,
    })
}
