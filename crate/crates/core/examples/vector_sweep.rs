//! A sweep over configurations and vector widths, written to stdout as CSV.

use std::io;

use membench::cli::report::{write_rows, Format};
use membench::cli::sweep::{run_points, SweepSpec};

const SPEC: &str = r#"{
    "pattern": "1d",
    "size_bytes": 4194304,
    "axes": {
        "config": ["R1W0", "R1W1", "R2W1", "R2W2"],
        "interleave": [false],
        "vector": [1, 2, 4, 8, 16, 32]
    }
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SweepSpec::from_json(SPEC)?;
    let rows = run_points(&spec.points()?)?;
    write_rows(io::stdout().lock(), &rows, Format::Csv, true)?;
    Ok(())
}
