//! Overlapped 1D blocks: where each block starts and how much of the
//! issued work is redundant or skipped.
//!
//! cargo run --example block_geometry -- 1024 16

use membench::block_geometry;
use membench::patterns::{gen_1d, ArrayConfig, PaddingSpec, VectorSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>());
    let bsize = args.next().transpose()?.unwrap_or(1024);
    let halo = args.next().transpose()?.unwrap_or(16);

    let block = block_geometry(bsize, halo)?;
    println!("bsize {bsize} halo {halo} -> csize {}", block.csize());
    for b in 0..4 {
        println!("  block {b} starts at element {}", block.start(b));
    }

    let n = 8 * block.csize();
    let stream = gen_1d(
        n,
        block,
        PaddingSpec::default(),
        VectorSpec::floats(16)?,
        ArrayConfig::new(1, 1)?,
    )?;
    let st = stream.redundancy_stats();
    println!("{n} elements over 8 blocks, 16 lanes");
    println!(
        "  issued {} valid {} unique {} redundant {} skipped {}",
        st.issued, st.valid, st.unique, st.redundant, st.skipped
    );
    println!("  issued per unique element: {:.4}", st.issued_per_unique());
    Ok(())
}
