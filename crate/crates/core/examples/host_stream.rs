//! Timed replay of a 1D pattern on the host, verified against the scalar
//! reference.
//!
//! cargo run --release --example host_stream -- 64

use membench::patterns::{GridSpec, PaddingSpec};
use membench::{
    block_geometry, run_host, verify_checksum, ArrayConfig, HostRunSpec, PatternSpec, Reference,
    VectorSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mib: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(64);
    let block = block_geometry(1024, 0)?;
    let n = (mib << 20) / 4 / block.csize() * block.csize();
    for (cfg, pad) in [("R1W1", 0), ("R1W1", 4), ("R2W1", 0), ("R1W0", 0)] {
        let spec = PatternSpec {
            grid: GridSpec::OneD { n, block },
            padding: PaddingSpec::leading(pad),
            vector: VectorSpec::floats(16)?,
            arrays: cfg.parse::<ArrayConfig>()?,
        };
        let result = run_host(&HostRunSpec {
            repetitions: 5,
            ..HostRunSpec::new(spec)
        })?;
        verify_checksum(&result, &Reference::new(&spec))?;
        println!(
            "{cfg} pad {pad}: best {:.2} GB/s, median {:.2} GB/s, checksum {:016x}",
            result.best_gbps, result.median_gbps, result.checksum
        );
    }
    Ok(())
}
