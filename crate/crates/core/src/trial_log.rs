//! Line-delimited JSON trial logs.
//!
//! One record per line, fields in this order:
//!
//! ```text
//! {"index":0,"a":1,"b":2,"x":1,"y":-1,"revealed":[1,-1,-1,1]}
//! ```
//!
//! `a`, `b` are 1 or 2; `x`, `y` are 1 or −1; `revealed` is `(X₁, X₂, Y₁, Y₂)`
//! or `null`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::engine::TrialRecord;
use crate::error::{Error, Result};

pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_log(path: &Path, records: &[TrialRecord]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

/// Parses one line. Records whose outcomes disagree with their revealed
/// quadruple are rejected.
pub fn parse_record(line: &str, line_no: usize) -> Result<TrialRecord> {
    let r: TrialRecord = serde_json::from_str(line)
        .map_err(|e| Error::Config(format!("trial log line {line_no}: {e}")))?;
    if !r.is_consistent() {
        return Err(Error::Contract(format!(
            "trial log line {line_no}: outcomes disagree with the revealed quadruple"
        )));
    }
    Ok(r)
}

/// Streams records from a reader, skipping blank lines.
pub fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<TrialRecord>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(parse_record(&l, i + 1)),
        Err(e) => Some(Err(Error::Io(e))),
    })
}

pub fn open_log(path: &Path) -> Result<impl Iterator<Item = Result<TrialRecord>>> {
    let f = File::open(path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    Ok(records(BufReader::new(f)))
}

pub fn read_log(path: &Path) -> Result<Vec<TrialRecord>> {
    open_log(path)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ExecutionMode;
    use crate::outcomes::{Outcome, Quadruple, SettingLabel};

    #[test]
    fn writes_one_line_per_record() {
        let q = Quadruple::from_values([1, -1, -1, 1]).unwrap();
        let r = TrialRecord {
            index: 0,
            a: SettingLabel::One,
            b: SettingLabel::Two,
            x: Outcome::Plus,
            y: Outcome::Plus,
            revealed: Some(q),
            mode: ExecutionMode::Parallel,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[r, r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"index\":0,\"a\":1,\"b\":2,\"x\":1,\"y\":1,\"revealed\":[1,-1,-1,1]}\n".repeat(2)
        );
        let back: Vec<_> = records(text.as_bytes()).collect::<Result<_>>().unwrap();
        assert_eq!(back, vec![r, r]);
    }

    #[test]
    fn bad_lines_are_reported() {
        let bad = "{\"index\":0,\"a\":3,\"b\":2,\"x\":1,\"y\":1,\"revealed\":null}\n";
        let err = records(bad.as_bytes()).next().unwrap().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let inconsistent = "{\"index\":0,\"a\":1,\"b\":1,\"x\":-1,\"y\":1,\"revealed\":[1,1,1,1]}\n";
        let err = records(inconsistent.as_bytes()).next().unwrap().unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
