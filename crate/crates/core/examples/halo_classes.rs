//! Halo widths sharing the lowest set bit land in the same alignment class
//! and simulate to the same bandwidth.

use membench::analysis::halo_class;
use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, simulate, KernelConfig, MemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mem = MemConfig::manual();
    let kernel = KernelConfig::new(266.666)?;
    for halo in 0..=20 {
        let block = block_geometry(1024, halo)?;
        let n = fit_array_size(2 << 20, block.csize(), 4)?;
        let stream = gen_1d(
            n,
            block,
            PaddingSpec::default(),
            VectorSpec::floats(16)?,
            ArrayConfig::new(1, 1)?,
        )?;
        let r = simulate(&stream, &kernel, &mem, None)?;
        println!(
            "halo {halo:>2}  class {:<10}  {:>7.3} GB/s",
            halo_class(halo, 16, 4).to_string(),
            r.gbps_effective
        );
    }
    Ok(())
}
