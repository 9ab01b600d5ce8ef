//! Leading pad versus simulated bandwidth for R1W1 at 16 lanes.

use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, simulate, KernelConfig, MemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mem = MemConfig::manual();
    let kernel = KernelConfig::new(266.666)?;
    let block = block_geometry(1024, 0)?;
    let n = fit_array_size(4 << 20, block.csize(), 4)?;

    println!("pad  GB/s     eff/peak");
    let mut base = None;
    for pad in 0..=16 {
        let stream = gen_1d(
            n,
            block,
            PaddingSpec::leading(pad),
            VectorSpec::floats(16)?,
            ArrayConfig::new(1, 1)?,
        )?;
        let r = simulate(&stream, &kernel, &mem, None)?;
        let b = *base.get_or_insert(r.gbps_effective);
        println!(
            "{pad:>3}  {:>7.3}  {:.3}  ({:.2}x aligned)",
            r.gbps_effective,
            r.efficiency_vs_peak,
            r.gbps_effective / b
        );
    }
    Ok(())
}
