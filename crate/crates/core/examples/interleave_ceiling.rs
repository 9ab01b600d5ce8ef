//! A single read stream under interleaved banking never beats one bank.

use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, simulate, KernelConfig, MemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = KernelConfig::new(266.666)?;
    let block = block_geometry(1024, 0)?;
    let n = fit_array_size(4 << 20, block.csize(), 4)?;

    for mem in [MemConfig::default(), MemConfig::manual()] {
        println!(
            "interleave {}: bank peak {:.3} GB/s, board peak {:.3} GB/s",
            mem.interleave,
            mem.bank_peak_gbps(),
            mem.peak_gbps()
        );
        for lanes in [4, 8, 16, 32] {
            let stream = gen_1d(
                n,
                block,
                PaddingSpec::default(),
                VectorSpec::floats(lanes)?,
                ArrayConfig::new(1, 0)?,
            )?;
            let r = simulate(&stream, &kernel, &mem, None)?;
            println!("  R1W0 V{lanes:<2} {:>7.3} GB/s", r.gbps_effective);
        }
    }
    Ok(())
}
