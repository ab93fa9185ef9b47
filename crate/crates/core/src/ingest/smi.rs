use std::fmt::Write as _;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{check_sample, parse_f64, IngestError};
use crate::types::{Mhz, PowerSample};

pub const SMI_HEADER: [&str; 4] = ["timestamp_ms", "power_w", "core_clock_mhz", "mem_clock_mhz"];

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    IngestError::parse(line, e.to_string())
}

pub(crate) fn check_header(record: &StringRecord, expected: &[&str]) -> Result<(), IngestError> {
    let got: Vec<&str> = record.iter().collect();
    if got != expected {
        return Err(IngestError::parse(
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn optional_clock(line: usize, field: &str, what: &str) -> Result<Option<Mhz>, IngestError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_f64(line, field, what).map(|v| Some(Mhz(v)))
    }
}

/// Parses an SmiCsv power log.
pub fn parse_smi_csv(text: &str) -> Result<Vec<PowerSample>, IngestError> {
    if text.trim().is_empty() {
        return Err(IngestError::parse(1, "empty power log"));
    }
    let mut reader = ReaderBuilder::new()
        .trim(Trim::All)
        .has_headers(true)
        .from_reader(text.as_bytes());
    check_header(reader.headers().map_err(csv_error)?, &SMI_HEADER)?;

    let mut samples: Vec<PowerSample> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let sample = PowerSample {
            t_ms: parse_f64(line, &record[0], "timestamp")?,
            power_w: parse_f64(line, &record[1], "power")?,
            core_clock: optional_clock(line, &record[2], "core clock")?,
            mem_clock: optional_clock(line, &record[3], "memory clock")?,
        };
        check_sample(line, &sample, samples.last())?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(IngestError::parse(2, "power log has a header but no samples"));
    }
    Ok(samples)
}

/// Serializes samples as SmiCsv. Values use the shortest representation
/// that parses back to the identical `f64`.
pub fn write_smi_csv(samples: &[PowerSample]) -> String {
    let mut out = SMI_HEADER.join(",");
    out.push('\n');
    let clock = |c: Option<Mhz>| c.map(|m| m.0.to_string()).unwrap_or_default();
    for s in samples {
        let _ = writeln!(out, "{},{},{},{}", s.t_ms, s.power_w, clock(s.core_clock), clock(s.mem_clock));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "timestamp_ms,power_w,core_clock_mhz,mem_clock_mhz\n";

    #[test]
    fn direct_field_mapping() {
        let s = parse_smi_csv(&format!("{HEADER}1000.0, 55.20, 945, 877\n")).unwrap();
        assert_eq!(
            s,
            vec![PowerSample::new(1000.0, 55.2).with_clocks(Some(Mhz(945.0)), Some(Mhz(877.0)))]
        );
    }

    #[test]
    fn empty_clock_fields_are_absent() {
        let s = parse_smi_csv(&format!("{HEADER}0,10,,\n5,11,1000,\n")).unwrap();
        assert_eq!(s[0].core_clock, None);
        assert_eq!(s[1].core_clock, Some(Mhz(1000.0)));
        assert_eq!(s[1].mem_clock, None);
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_smi_csv(""), Err(IngestError::Parse { .. })));
        assert!(matches!(parse_smi_csv(HEADER), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = parse_smi_csv("t,p,c,m\n0,1,2,3\n").unwrap_err();
        assert!(matches!(err, IngestError::Parse { line: 1, .. }));
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let text = format!("{HEADER}0,10,945,877\n10,abc,945,877\n");
        assert_eq!(
            parse_smi_csv(&text).unwrap_err(),
            IngestError::Parse {
                line: 3,
                message: "invalid power \"abc\"".into()
            }
        );
        let short = format!("{HEADER}0,10,945,877\n10,11\n");
        assert!(matches!(parse_smi_csv(&short), Err(IngestError::Parse { line: 3, .. })));
        let negative = format!("{HEADER}0,-1,945,877\n");
        assert!(matches!(parse_smi_csv(&negative), Err(IngestError::Parse { line: 2, .. })));
        let zero_clock = format!("{HEADER}0,1,0,877\n");
        assert!(matches!(parse_smi_csv(&zero_clock), Err(IngestError::Parse { line: 2, .. })));
    }

    #[test]
    fn backwards_timestamp_is_an_order_error() {
        let text = format!("{HEADER}0,10,945,877\n10,10,945,877\n10,10,945,877\n9,10,945,877\n");
        assert_eq!(
            parse_smi_csv(&text).unwrap_err(),
            IngestError::Order {
                line: 5,
                previous_ms: 10.0,
                current_ms: 9.0
            }
        );
    }

    #[test]
    fn writer_output_parses_back() {
        let samples = vec![
            PowerSample::new(0.1, 55.2).with_clocks(Some(Mhz(945.0)), Some(Mhz(877.0))),
            PowerSample::new(14.2, 1e-7).with_clocks(None, None),
        ];
        assert_eq!(parse_smi_csv(&write_smi_csv(&samples)).unwrap(), samples);
    }
}
