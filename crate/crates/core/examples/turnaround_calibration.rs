//! Pick the read/write turnaround penalty whose simulated efficiency is
//! closest to a measured one.
//!
//! cargo run --example turnaround_calibration -- 0.50

use membench::patterns::{fit_array_size, gen_1d, ArrayConfig, PaddingSpec, VectorSpec};
use membench::{block_geometry, simulate, KernelConfig, MemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let target: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.50);
    let block = block_geometry(1024, 0)?;
    let n = fit_array_size(2 << 20, block.csize(), 4)?;
    // interleaved R1W1 shares both banks between the read and write port,
    // so every direction switch pays the penalty
    let stream = gen_1d(
        n,
        block,
        PaddingSpec::default(),
        VectorSpec::floats(16)?,
        ArrayConfig::new(1, 1)?,
    )?;
    let kernel = KernelConfig::new(266.666)?;

    let mut best = (u32::MAX, f64::INFINITY);
    for t in 0..=8 {
        let mem = MemConfig {
            rw_turnaround_ctrl_cycles: t,
            ..MemConfig::default()
        };
        let eff = simulate(&stream, &kernel, &mem, None)?.efficiency_vs_peak;
        println!("turnaround {t}: efficiency {eff:.4}");
        if (eff - target).abs() < best.1 {
            best = (t, (eff - target).abs());
        }
    }
    println!(
        "closest to {target}: {} cycles (off by {:.4})",
        best.0, best.1
    );
    Ok(())
}
