//! Kernel clock against delivered bandwidth.
//!
//! Narrow vectors scale linearly with the kernel clock; a four-port
//! configuration that already asks for more than the board can supply does
//! not gain from a faster clock.

use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, simulate, KernelConfig, MemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mem = MemConfig::manual();
    let block = block_geometry(1024, 0)?;
    let n = fit_array_size(4 << 20, block.csize(), 4)?;
    let stream = |cfg: &str, lanes| {
        gen_1d(
            n,
            block,
            PaddingSpec::default(),
            VectorSpec::floats(lanes).unwrap(),
            cfg.parse::<ArrayConfig>().unwrap(),
        )
    };
    let narrow = stream("R1W1", 8)?;
    let wide = stream("R2W2", 16)?;

    println!("MHz      R1W1 V8   R2W2 V16  (GB/s)");
    for f in [100.0, 150.0, 200.0, 266.666, 300.0] {
        let k = KernelConfig::new(f)?;
        let a = simulate(&narrow, &k, &mem, None)?;
        let b = simulate(&wide, &k, &mem, None)?;
        println!(
            "{f:>7.3}  {:>8.3}  {:>8.3}",
            a.gbps_effective, b.gbps_effective
        );
    }
    Ok(())
}
