//! Minimal RFC-4180 reader: comma separator, optional `"` quoting with `""`
//! escapes, LF or CRLF line endings, decimal-point reals.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read_path(path: impl AsRef<Path>, has_header: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, has_header)
    }

    pub fn parse(text: &str, has_header: bool) -> Result<Self> {
        let mut records = parse_records(text)?;
        let header = if has_header && !records.is_empty() {
            Some(records.remove(0))
        } else {
            None
        };
        Ok(Self {
            header,
            rows: records,
        })
    }
}

/// Splits `text` into records. Blank lines are skipped.
pub fn parse_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut records = Vec::new();
    let mut record: Vec<String> = Vec::new();
    let mut field = String::new();
    let mut in_quotes = false;
    let mut field_started = false;
    let mut line = 1usize;
    let mut chars = text.chars().peekable();

    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' if chars.peek() == Some(&'"') => {
                    chars.next();
                    field.push('"');
                }
                '"' => in_quotes = false,
                '\n' => {
                    line += 1;
                    field.push(c);
                }
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if !field_started => {
                in_quotes = true;
                field_started = true;
            }
            ',' => {
                record.push(std::mem::take(&mut field));
                field_started = false;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' => {
                end_record(&mut records, &mut record, &mut field, field_started);
                field_started = false;
                line += 1;
            }
            _ => {
                field.push(c);
                field_started = true;
            }
        }
    }
    if in_quotes {
        return Err(Error::Parse {
            row: line,
            column: String::from("?"),
            message: "unterminated quoted field".into(),
        });
    }
    end_record(&mut records, &mut record, &mut field, field_started);
    Ok(records)
}

fn end_record(
    records: &mut Vec<Vec<String>>,
    record: &mut Vec<String>,
    field: &mut String,
    field_started: bool,
) {
    if record.is_empty() && field.is_empty() && !field_started {
        return;
    }
    record.push(std::mem::take(field));
    records.push(std::mem::take(record));
}

/// Parses a decimal-point real, naming the location on failure.
pub fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: "missing value".into(),
        });
    }
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("'{trimmed}' is not a number"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_and_quoted_fields() {
        let t = CsvTable::parse("a,b\r\n1,\"x,\"\"y\"\"\"\n\n2,z", true).unwrap();
        assert_eq!(t.header, Some(vec!["a".to_string(), "b".to_string()]));
        assert_eq!(t.rows, vec![vec!["1", "x,\"y\""], vec!["2", "z"]]);
    }

    #[test]
    fn trailing_newline_and_empty_quoted() {
        let t = CsvTable::parse("1,\"\"\n", false).unwrap();
        assert_eq!(t.rows, vec![vec!["1".to_string(), String::new()]]);
    }

    #[test]
    fn unterminated_quote_is_an_error() {
        assert!(matches!(
            CsvTable::parse("1,\"abc\n", false),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn real_parsing() {
        assert_eq!(parse_real(" 4.5 ", 1, "c").unwrap(), 4.5);
        assert!(parse_real("abc", 3, "c").is_err());
        assert!(parse_real("", 3, "c").is_err());
    }
}
