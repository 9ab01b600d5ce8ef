//! A single fully resolved configuration and its execution on either backend.

use serde::{Deserialize, Serialize};

use super::report::ReportRow;
use super::CliError;
use crate::hostbench::{run_host, verify_checksum, HostRunSpec, Reference};
use crate::memmodel::{simulate, KernelConfig, MemConfig};
use crate::patterns::{
    block_geometry, fit_array_size, ArrayConfig, Block1D, GridSpec, PaddingSpec, PatternKind,
    PatternSpec, VectorSpec, DEFAULT_BSIZE,
};

pub const DEFAULT_FREQ_MHZ: f64 = 266.666;
pub const SIM_DEFAULT_BYTES: u64 = 16 << 20;
pub const HOST_DEFAULT_BYTES: u64 = 256 << 20;
const DEFAULT_BSIZE_25D: u64 = 256;
const DIMX_15D: u64 = 18432;
const DIMXY_25D: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Sim,
    Host,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Sim => "sim",
            Backend::Host => "host",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HostOptions {
    pub repetitions: u32,
    pub warmup: u32,
    pub threads: usize,
    pub streaming_stores: bool,
    pub pin_core: Option<usize>,
}

impl Default for HostOptions {
    fn default() -> Self {
        Self {
            repetitions: 5,
            warmup: 1,
            threads: 1,
            streaming_stores: false,
            pin_core: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunPoint {
    pub backend: Backend,
    pub pattern: PatternKind,
    pub config: ArrayConfig,
    pub lanes: u32,
    pub elem_bytes: u32,
    pub halo: u64,
    pub pad: u64,
    pub row_pad: u64,
    pub plane_pad: u64,
    pub bsize: Option<u64>,
    pub size_bytes: Option<u64>,
    /// Explicit extents; derived from `size_bytes` when absent.
    pub dims: Option<Vec<u64>>,
    pub freq_mhz: f64,
    pub mem: MemConfig,
    pub host: HostOptions,
}

impl Default for RunPoint {
    fn default() -> Self {
        Self {
            backend: Backend::Sim,
            pattern: PatternKind::OneD,
            config: ArrayConfig {
                reads: 1,
                writes: 1,
            },
            lanes: 16,
            elem_bytes: 4,
            halo: 0,
            pad: 0,
            row_pad: 0,
            plane_pad: 0,
            bsize: None,
            size_bytes: None,
            dims: None,
            freq_mhz: DEFAULT_FREQ_MHZ,
            mem: MemConfig::default(),
            host: HostOptions::default(),
        }
    }
}

fn nearest_multiple(target: u64, csize: u64) -> u64 {
    let k = ((target + csize / 2) / csize).max(1);
    k * csize
}

impl RunPoint {
    pub fn bsize(&self) -> u64 {
        self.bsize.unwrap_or(match self.pattern {
            PatternKind::TwoHalfD => DEFAULT_BSIZE_25D,
            _ => DEFAULT_BSIZE,
        })
    }

    fn target_bytes(&self) -> u64 {
        self.size_bytes.unwrap_or(match self.backend {
            Backend::Sim => SIM_DEFAULT_BYTES,
            Backend::Host => HOST_DEFAULT_BYTES,
        })
    }

    fn block(&self) -> Result<Block1D, CliError> {
        block_geometry(self.bsize(), self.halo).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn dim(&self, i: usize) -> Option<u64> {
        self.dims.as_ref().and_then(|d| d.get(i).copied())
    }

    /// Resolve extents and build the pattern. Inconsistent parameters are
    /// usage errors.
    pub fn pattern_spec(&self) -> Result<PatternSpec, CliError> {
        let usage = |e: crate::patterns::PatternError| CliError::Usage(e.to_string());
        let vector = VectorSpec::new(self.lanes, self.elem_bytes).map_err(usage)?;
        let block = self.block()?;
        let eb = u64::from(self.elem_bytes);
        let target = self.target_bytes();
        let grid = match self.pattern {
            PatternKind::OneD => {
                let n = match self.dim(0) {
                    Some(n) => n,
                    None => fit_array_size(target, block.csize(), eb).map_err(usage)?,
                };
                GridSpec::OneD { n, block }
            }
            PatternKind::OneHalfD => {
                let dimx = self
                    .dim(0)
                    .unwrap_or_else(|| nearest_multiple(DIMX_15D, block.csize()));
                let dimy = self.dim(1).unwrap_or_else(|| {
                    let row = (dimx + self.row_pad) * eb;
                    ((target + row / 2) / row).max(1)
                });
                GridSpec::OneHalfD {
                    dimx,
                    dimy,
                    block_x: block,
                }
            }
            PatternKind::TwoHalfD => {
                let dimx = self
                    .dim(0)
                    .unwrap_or_else(|| nearest_multiple(DIMXY_25D, block.csize()));
                let dimy = self.dim(1).unwrap_or(dimx);
                let dimz = self.dim(2).unwrap_or_else(|| {
                    let plane = (dimy * (dimx + self.row_pad) + self.plane_pad) * eb;
                    ((target + plane / 2) / plane).max(1)
                });
                GridSpec::TwoHalfD {
                    dimx,
                    dimy,
                    dimz,
                    block_x: block,
                    block_y: block,
                }
            }
        };
        let spec = PatternSpec {
            grid,
            padding: PaddingSpec {
                pad: self.pad,
                row_pad: self.row_pad,
                plane_pad: self.plane_pad,
            },
            vector,
            arrays: self.config,
        };
        crate::patterns::AccessStream::new(spec).map_err(usage)?;
        Ok(spec)
    }

    fn row(&self) -> ReportRow {
        ReportRow {
            backend: self.backend.name().to_string(),
            pattern: self.pattern.to_string(),
            config: self.config.to_string(),
            vector: self.lanes,
            halo: self.halo,
            pad: self.pad,
            interleave: self.mem.interleave,
            freq_mhz: None,
            bsize: self.bsize(),
            gbps_effective: 0.0,
            gbps_bus: None,
            eff_expected: None,
            eff_peak: None,
            bytes_effective: 0,
            kernel_cycles: None,
            checksum: None,
        }
    }

    pub fn execute(&self) -> Result<ReportRow, CliError> {
        let spec = self.pattern_spec()?;
        match self.backend {
            Backend::Sim => {
                let stream = crate::patterns::AccessStream::new(spec)?;
                let kernel = KernelConfig::new(self.freq_mhz)?;
                let r = simulate(&stream, &kernel, &self.mem, None)?;
                Ok(ReportRow {
                    freq_mhz: Some(self.freq_mhz),
                    gbps_effective: r.gbps_effective,
                    gbps_bus: Some(r.gbps_bus),
                    eff_expected: Some(r.efficiency_vs_expected),
                    eff_peak: Some(r.efficiency_vs_peak),
                    bytes_effective: r.effective_bytes,
                    kernel_cycles: Some(r.kernel_cycles),
                    ..self.row()
                })
            }
            Backend::Host => {
                let run = HostRunSpec {
                    repetitions: self.host.repetitions,
                    warmup: self.host.warmup,
                    threads: self.host.threads,
                    streaming_stores: self.host.streaming_stores,
                    pin_core: self.host.pin_core,
                    ..HostRunSpec::new(spec)
                };
                let r = run_host(&run)?;
                let verdict = verify_checksum(&r, &Reference::new(&spec));
                let row = ReportRow {
                    gbps_effective: r.best_gbps,
                    bytes_effective: r.effective_bytes,
                    checksum: Some(if verdict.is_ok() { "pass" } else { "fail" }.to_string()),
                    ..self.row()
                };
                match verdict {
                    Ok(()) => Ok(row),
                    Err(e) => Err(CliError::Checksum {
                        row: Box::new(row),
                        source: e,
                    }),
                }
            }
        }
    }
}
