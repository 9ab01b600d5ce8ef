//! Vector memory-access pattern generation, a cycle-level banked memory
//! model, alignment/padding analysis and a host-memory measurement backend.
//!
//! The `examples/` directory holds one runnable program per capability:
//!
//! | example | shows |
//! |---|---|
//! | `block_geometry` | overlapped block layout and redundancy accounting |
//! | `aligned_vs_misaligned` | effect of a leading pad on simulated bandwidth |
//! | `interleave_ceiling` | single-bank ceiling of interleaved mapping |
//! | `frequency_scaling` | kernel clock vs delivered bandwidth |
//! | `halo_classes` | halo widths that behave identically |
//! | `padding_advisor` | pad recommendations for halo/vector pairs |
//! | `merge_advisor` | folding arrays into structs of arrays |
//! | `host_stream` | timed host replay with checksum verification |
//! | `vector_sweep` | a parallel sweep written as CSV |
//! | `check_anchors` | validate the model against reference anchors |
//! | `turnaround_calibration` | fitting the read/write turnaround penalty |
//!
//! ```
//! use membench::patterns::{fit_array_size, gen_1d, PaddingSpec};
//! use membench::{block_geometry, simulate, ArrayConfig, KernelConfig, MemConfig, VectorSpec};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let block = block_geometry(1024, 16)?;
//! assert_eq!(block.csize(), 992);
//! let n = fit_array_size(1 << 20, block.csize(), 4)?;
//! let stream = gen_1d(n, block, PaddingSpec::leading(0),
//!                     VectorSpec::floats(16)?, ArrayConfig::new(1, 1)?)?;
//! let r = simulate(&stream, &KernelConfig::new(266.666)?, &MemConfig::manual(), None)?;
//! assert!(r.gbps_effective > 0.0);
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod cli;
pub mod hostbench;
pub mod memmodel;
pub mod patterns;

pub use analysis::{padding_advice, predict_stream_class, AdvisorReport, AlignmentClass};
pub use hostbench::{run_host, verify_checksum, HostResult, HostRunSpec, Reference};
pub use memmodel::{simulate, split_access, KernelConfig, MemConfig, SimResult};
pub use patterns::{
    block_geometry, AccessStream, ArrayConfig, GridSpec, PaddingSpec, PatternSpec, VectorSpec,
};
