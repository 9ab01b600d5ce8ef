//! Folding several equally sized arrays into one struct array per direction.

use membench::analysis::merge_advice;
use membench::ArrayConfig;

fn main() {
    for (r, w) in [(1, 1), (2, 1), (2, 2), (4, 2), (3, 1), (0, 4)] {
        let cfg = ArrayConfig::new(r, w).unwrap();
        let rep = merge_advice(cfg, 4);
        match rep.merge {
            Some(m) => println!(
                "{cfg}: read struct {} B, write struct {} B -> {} ({})",
                m.read_struct_bytes, m.write_struct_bytes, m.merged, rep.rule
            ),
            None => println!("{cfg}: {}", rep.rule),
        }
    }
}
