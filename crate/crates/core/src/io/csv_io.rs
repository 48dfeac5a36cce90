use std::io::{Read, Write};
use std::path::Path;

use crate::error::{AuditError, Result};
use crate::probability::{Label, SampleRecord};

/// Reads `z,y_obs,y_pred[,y_construct]`. Quotes are not interpreted, so a
/// label containing a comma shows up as an extra field and is rejected.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SampleRecord>> {
    let mut rdr = csv::ReaderBuilder::new().quoting(false).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let with_construct = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["z", "y_obs", "y_pred"] => false,
        ["z", "y_obs", "y_pred", "y_construct"] => true,
        _ => {
            return Err(AuditError::Parse(format!(
                "expected header `z,y_obs,y_pred[,y_construct]`, found `{}`",
                header.join(",")
            )))
        }
    };
    let mut out = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| AuditError::Parse(format!("row {}: {e}", line + 2)))?;
        let z = match &row[0] {
            "0" => 0,
            "1" => 1,
            other => return Err(AuditError::UnknownLabel { variable: "Z".into(), label: other.into() }),
        };
        let field = |i: usize| -> Result<Label> {
            let s = &row[i];
            if s.is_empty() {
                return Err(AuditError::Parse(format!("row {}: empty label", line + 2)));
            }
            Ok(Label::parse(s))
        };
        let construct = if with_construct { Some(field(3)?) } else { None };
        out.push(SampleRecord::new(z, field(1)?, field(2)?, construct));
    }
    Ok(out)
}

pub fn read_csv_path(path: &Path) -> Result<Vec<SampleRecord>> {
    read_csv(std::fs::File::open(path)?)
}

pub fn write_csv<W: Write>(records: &[SampleRecord], writer: W) -> Result<()> {
    let with_construct = records.first().is_some_and(|r| r.y_construct.is_some());
    if records.iter().any(|r| r.y_construct.is_some() != with_construct) {
        return Err(AuditError::MixedConstructPresence);
    }
    let mut w = csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Never).from_writer(writer);
    let mut header = vec!["z", "y_obs", "y_pred"];
    if with_construct {
        header.push("y_construct");
    }
    w.write_record(&header)?;
    let check = |l: &Label| -> Result<String> {
        let s = l.to_string();
        if s.contains([',', '\n', '\r', '"']) {
            return Err(AuditError::Parse(format!("label `{s}` cannot be written to CSV")));
        }
        Ok(s)
    };
    for r in records {
        let mut row = vec![r.z.to_string(), check(&r.y_obs)?, check(&r.y_pred)?];
        if let Some(c) = &r.y_construct {
            row.push(check(c)?);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(records: &[SampleRecord], path: &Path) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_writes() {
        let text = "z,y_obs,y_pred,y_construct\n0,1,0,a\n1,0,1,b\n";
        let rows = read_csv(text.as_bytes()).unwrap();
        assert_eq!(rows[1].y_construct, Some(Label::text("b")));
        assert_eq!(rows[0].y_obs, Label::int(1));
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn commas_inside_labels_are_rejected() {
        assert!(read_csv("z,y_obs,y_pred\n0,\"a,b\",1\n".as_bytes()).is_err());
        let rows = vec![SampleRecord::new(0, Label::text("a,b"), Label::int(1), None)];
        assert!(write_csv(&rows, Vec::new()).is_err());
    }

    #[test]
    fn header_and_group_are_checked() {
        assert!(matches!(read_csv("a,b,c\n".as_bytes()), Err(AuditError::Parse(_))));
        assert!(matches!(read_csv("z,y_obs,y_pred\n2,0,0\n".as_bytes()), Err(AuditError::UnknownLabel { .. })));
    }
}
