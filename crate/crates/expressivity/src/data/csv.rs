//! Plain-text loaders and writers: comma-separated feature rows and
//! one-value-per-line attribute files. Neither format has a header.

use std::path::Path;

use crate::data::{AttributeKind, AttributeVector, FeatureMatrix};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Loads an `n x m` feature matrix from a headerless CSV of numeric rows.
///
/// Every row must have the same number of fields as the first; every value
/// must parse as a finite number. Errors cite the offending row and column
/// (0-based). Trailing blank lines are tolerated.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let lines = effective_lines(&text, path)?;
    if lines.is_empty() {
        return Err(Error::Data(format!(
            "{}: feature file holds no rows",
            path.display()
        )));
    }

    let cols = lines[0].1.split(',').count();
    let mut data = Vec::with_capacity(lines.len() * cols);
    for (row, (line_no, line)) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(Error::Format(format!(
                "{}: row {} (line {}) has {} fields but row 0 has {}",
                path.display(),
                row,
                line_no + 1,
                fields.len(),
                cols
            )));
        }
        for (col, field) in fields.iter().enumerate() {
            data.push(parse_value(field, path, row, col)?);
        }
    }
    let matrix = Matrix::from_vec(lines.len(), cols, data)?;
    FeatureMatrix::new(matrix, path.display().to_string())
}

/// Loads an attribute column: one numeric value per line, no header.
///
/// The values are validated against `kind` (binary columns must hold
/// exactly 0 or 1).
pub fn load_attributes_csv(
    path: impl AsRef<Path>,
    name: impl Into<String>,
    kind: AttributeKind,
    units: impl Into<String>,
) -> Result<AttributeVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let lines = effective_lines(&text, path)?;
    let mut values = Vec::with_capacity(lines.len());
    for (row, (_, line)) in lines.iter().enumerate() {
        values.push(parse_value(line, path, row, 0)?);
    }
    if values.is_empty() {
        return Err(Error::Data(format!(
            "{}: attribute file holds no values",
            path.display()
        )));
    }
    AttributeVector::new(name, kind, values, units)
}

/// Non-blank lines with their original line numbers. Blank lines are only
/// allowed at the end of the file.
/// Writes an attribute column in the format [`load_attributes_csv`]
/// reads: one value per line. Values are rendered with round-trip
/// precision, so loading the file back reproduces the exact bits.
pub fn write_attributes_csv(a: &AttributeVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut body = String::with_capacity(a.n() * 8);
    for v in a.values() {
        // serde_json renders the shortest digits that round-trip, the
        // same digits the JSON reports use.
        body.push_str(&serde_json::to_string(v).unwrap_or_else(|_| "0".to_string()));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| Error::io(path.display(), e))
}

fn effective_lines<'a>(text: &'a str, path: &Path) -> Result<Vec<(usize, &'a str)>> {
    let mut lines: Vec<(usize, &str)> = text.lines().map(|l| l.trim()).enumerate().collect();
    while matches!(lines.last(), Some((_, ""))) {
        lines.pop();
    }
    if let Some((line_no, _)) = lines.iter().find(|(_, l)| l.is_empty()) {
        return Err(Error::Format(format!(
            "{}: blank line {} inside the data",
            path.display(),
            line_no + 1
        )));
    }
    Ok(lines)
}

fn parse_value(field: &str, path: &Path, row: usize, col: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| {
        Error::Format(format!(
            "{}: unparseable number {:?} at row {}, column {}",
            path.display(),
            field.trim(),
            row,
            col
        ))
    })?;
    if !value.is_finite() {
        return Err(Error::Data(format!(
            "{}: non-finite value {} at row {}, column {}",
            path.display(),
            value,
            row,
            col
        )));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_a_small_feature_matrix() {
        let f = write_temp("1.0,2.0\n3.5,-4.0\n");
        let m = load_features_csv(f.path()).unwrap();
        assert_eq!((m.n(), m.m()), (2, 2));
        assert_eq!(m.values().get(1, 1), -4.0);
        assert!(!m.standardized);
    }

    #[test]
    fn rejects_inf_with_row_and_column() {
        let f = write_temp("1.0,2.0\n3.0,inf\n");
        let err = load_features_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        assert!(err.to_string().contains("row 1, column 1"), "{err}");
    }

    #[test]
    fn rejects_ragged_rows() {
        let f = write_temp("1.0,2.0\n3.0\n");
        let err = load_features_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn rejects_unparseable_tokens() {
        let f = write_temp("1.0,x\n");
        let err = load_features_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("column 1"), "{err}");
    }

    #[test]
    fn missing_file_is_an_io_error_naming_the_path() {
        let err = load_features_csv("/nonexistent/features.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/features.csv"));
    }

    #[test]
    fn loads_binary_attributes_and_enforces_the_encoding() {
        let ok = write_temp("0\n1\n1\n0\n");
        let a = load_attributes_csv(ok.path(), "gender", AttributeKind::Binary, "").unwrap();
        assert_eq!(a.values(), &[0.0, 1.0, 1.0, 0.0]);

        let bad = write_temp("0\n0.5\n");
        let err =
            load_attributes_csv(bad.path(), "gender", AttributeKind::Binary, "").unwrap_err();
        assert!(matches!(err, Error::Encoding(_)));
    }

    #[test]
    fn empty_attribute_file_is_a_data_error() {
        let f = write_temp("");
        let err = load_attributes_csv(f.path(), "a", AttributeKind::Continuous, "").unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn windows_line_endings_are_tolerated() {
        let f = write_temp("1.0,2.0\r\n3.0,4.0\r\n");
        let m = load_features_csv(f.path()).unwrap();
        assert_eq!(m.values().get(1, 0), 3.0);
    }

    #[test]
    fn written_attributes_load_back_bit_for_bit() {
        let values = vec![0.1 + 0.2, -1.5, 2.0f64.sqrt(), 0.0];
        let a = AttributeVector::new("attr", AttributeKind::Continuous, values.clone(), "").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("attr.csv");
        write_attributes_csv(&a, &path).unwrap();
        let back = load_attributes_csv(&path, "attr", AttributeKind::Continuous, "").unwrap();
        assert_eq!(back.values(), values.as_slice());

        let binary =
            AttributeVector::new("b", AttributeKind::Binary, vec![0.0, 1.0, 1.0], "").unwrap();
        let bpath = dir.path().join("b.csv");
        write_attributes_csv(&binary, &bpath).unwrap();
        let back = load_attributes_csv(&bpath, "b", AttributeKind::Binary, "").unwrap();
        assert_eq!(back.values(), &[0.0, 1.0, 1.0]);
    }
}
