//! Atomic CSV/JSON report emission: CSV with RFC-4180 quoting, a header
//! row, UTF-8 and LF line endings; JSON with stable (sorted) key order.
//! Both files are written to a temporary file in the target directory and
//! renamed into place, so partially written artifacts are never observed.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::Result;

/// One tabular + structured result set, ready for emission.
#[derive(Debug, Clone)]
pub struct Report {
    /// CSV column names; an empty result set still emits this header.
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// The structured summary; serde_json maps iterate in sorted key
    /// order, which keeps re-runs byte-identical.
    pub summary: Value,
}

impl Report {
    pub fn new(header: Vec<String>, summary: Value) -> Report {
        Report {
            header,
            rows: Vec::new(),
            summary,
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Paths of the two artifacts written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<stem>.csv` and `<stem>.json` into `out_dir` atomically and
/// returns their paths.
pub fn emit_report(report: &Report, out_dir: &Path, stem: &str) -> Result<ReportPaths> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));

    let mut csv_tmp = tempfile::NamedTempFile::new_in(out_dir)?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut csv_tmp);
        w.write_record(&report.header)?;
        for row in &report.rows {
            w.write_record(row)?;
        }
        w.flush()?;
    }
    csv_tmp
        .persist(&csv_path)
        .map_err(|e| crate::error::Error::Io(e.error))?;

    let mut json_tmp = tempfile::NamedTempFile::new_in(out_dir)?;
    serde_json::to_writer_pretty(&mut json_tmp, &report.summary)?;
    json_tmp.write_all(b"\n")?;
    json_tmp
        .persist(&json_path)
        .map_err(|e| crate::error::Error::Io(e.error))?;

    Ok(ReportPaths {
        csv: csv_path,
        json: json_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_result_set_emits_header_only_csv() {
        let dir = tempfile::tempdir().unwrap();
        let r = Report::new(vec!["b".into(), "n".into()], json!({"rows": 0}));
        let paths = emit_report(&r, dir.path(), "empty").unwrap();
        let csv = std::fs::read_to_string(&paths.csv).unwrap();
        assert_eq!(csv, "b,n\n");
        let json_text = std::fs::read_to_string(&paths.json).unwrap();
        assert!(json_text.ends_with('\n'));
        assert_eq!(
            serde_json::from_str::<serde_json::Value>(&json_text).unwrap(),
            json!({"rows": 0})
        );
    }

    #[test]
    fn quoting_and_line_endings_follow_csv_conventions() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new(vec!["label".into(), "value".into()], json!({}));
        r.push_row(vec!["needs,quote".into(), "1/2".into()]);
        r.push_row(vec!["has \"quotes\"".into(), "-3".into()]);
        let paths = emit_report(&r, dir.path(), "quoting").unwrap();
        let csv = std::fs::read_to_string(&paths.csv).unwrap();
        assert_eq!(
            csv,
            "label,value\n\"needs,quote\",1/2\n\"has \"\"quotes\"\"\",-3\n"
        );
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn reruns_are_byte_identical_and_keys_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new(
            vec!["x".into()],
            json!({"zeta": 1, "alpha": [1, 2], "mid": {"b": 2, "a": 1}}),
        );
        r.push_row(vec!["7".into()]);
        let p1 = emit_report(&r, dir.path(), "rerun").unwrap();
        let csv1 = std::fs::read(&p1.csv).unwrap();
        let json1 = std::fs::read(&p1.json).unwrap();
        let p2 = emit_report(&r, dir.path(), "rerun").unwrap();
        assert_eq!(csv1, std::fs::read(&p2.csv).unwrap());
        assert_eq!(json1, std::fs::read(&p2.json).unwrap());
        // sorted key order in the serialized text
        let text = String::from_utf8(json1).unwrap();
        let za = text.find("zeta").unwrap();
        let al = text.find("alpha").unwrap();
        assert!(al < za);
    }
}
