//! Compare the model with the bundled reference anchors, or with an anchor
//! file given as the first argument.

use membench::cli::check::{run_check, AnchorFile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = match std::env::args().nth(1) {
        Some(path) => AnchorFile::from_json(&std::fs::read_to_string(path)?)?,
        None => AnchorFile::bundled(),
    };
    let report = run_check(&file)?;
    for o in &report.outcomes {
        println!(
            "{:<4} {:<34} {:>10.5} vs {:>8.4} ({:?}, tol {})",
            if o.pass { "ok" } else { "FAIL" },
            o.name,
            o.computed,
            o.value,
            o.compare,
            o.tolerance
        );
    }
    for m in &report.missing {
        println!("missing anchor: {m}");
    }
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
