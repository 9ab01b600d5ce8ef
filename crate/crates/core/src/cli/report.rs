//! Result rows and their CSV / JSON-lines encodings.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "backend,pattern,config,vector,halo,pad,interleave,freq_mhz,bsize,\
gbps_effective,gbps_bus,eff_expected,eff_peak,bytes_effective,kernel_cycles,checksum";

/// One executed configuration. Fields that a backend does not produce are
/// left empty in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub backend: String,
    pub pattern: String,
    pub config: String,
    pub vector: u32,
    pub halo: u64,
    pub pad: u64,
    pub interleave: bool,
    pub freq_mhz: Option<f64>,
    pub bsize: u64,
    pub gbps_effective: f64,
    pub gbps_bus: Option<f64>,
    pub eff_expected: Option<f64>,
    pub eff_peak: Option<f64>,
    pub bytes_effective: u64,
    pub kernel_cycles: Option<u64>,
    pub checksum: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

pub fn write_rows<W: Write>(
    out: W,
    rows: &[ReportRow],
    format: Format,
    header: bool,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(header)
                .from_writer(out);
            for row in rows {
                w.serialize(row).map_err(io::Error::other)?;
            }
            w.flush()
        }
        Format::Jsonl => {
            let mut out = out;
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        }
    }
}

pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            backend: "sim".into(),
            pattern: "1d".into(),
            config: "R1W1".into(),
            vector: 16,
            halo: 0,
            pad: 4,
            interleave: false,
            freq_mhz: Some(266.666),
            bsize: 1024,
            gbps_effective: 17.066_406_25,
            gbps_bus: Some(34.1),
            eff_expected: Some(0.5),
            eff_peak: Some(0.5),
            bytes_effective: 1 << 24,
            kernel_cycles: Some(262_145),
            checksum: None,
        }
    }

    #[test]
    fn header_matches_struct() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row()], Format::Csv, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert!(text.lines().nth(1).unwrap().ends_with(",262145,"));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let rows = vec![
            row(),
            ReportRow {
                backend: "host".into(),
                freq_mhz: None,
                gbps_bus: None,
                kernel_cycles: None,
                checksum: Some("pass".into()),
                ..row()
            },
        ];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, Format::Csv, true).unwrap();
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);

        let mut buf = Vec::new();
        write_rows(&mut buf, &rows, Format::Jsonl, false).unwrap();
        let back: Vec<ReportRow> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(back, rows);
    }
}
