//! Pad recommendations for halo/vector pairs, checked by simulation.

use membench::analysis::PredictedClass;
use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, padding_advice, simulate, KernelConfig, MemConfig};

fn gbps(lanes: u32, halo: u64, pad: u64) -> Result<f64, Box<dyn std::error::Error>> {
    let block = block_geometry(1024, halo)?;
    let n = fit_array_size(2 << 20, block.csize(), 4)?;
    let stream = gen_1d(
        n,
        block,
        PaddingSpec::leading(pad),
        VectorSpec::floats(lanes)?,
        ArrayConfig::new(1, 1)?,
    )?;
    let r = simulate(
        &stream,
        &KernelConfig::new(266.666)?,
        &MemConfig::manual(),
        None,
    )?;
    Ok(r.gbps_effective)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bus = MemConfig::default().bus_word_bytes();
    for (halo, lanes) in [(0, 16), (16, 16), (8, 16), (4, 8), (2, 4), (2, 16), (6, 16)] {
        let csize = block_geometry(1024, halo)?.csize();
        let adv = padding_advice(halo, VectorSpec::floats(lanes)?, csize, bus);
        let before = gbps(lanes, halo, 0)?;
        let after = gbps(lanes, halo, adv.pad)?;
        let base = gbps(lanes, 0, 0)?;
        let mark = if adv.class == PredictedClass::Full {
            ""
        } else {
            "  (partial)"
        };
        println!(
            "halo {halo:>2} V{lanes:<2}  pad {:>2} [{}]  {before:>7.3} -> {after:>7.3} GB/s of {base:.3}{mark}",
            adv.pad, adv.rule
        );
    }
    Ok(())
}
