//! Observation tables, validation, and CSV ingestion.
//!
//! An [`ObservationTable`] is the unit of all estimation: covariate rows,
//! a binary treatment column, and at least one of the outcome / surrogate
//! columns. Datasets that carry only the outcome pair with datasets that
//! carry only the surrogate; a unified dataset carries both. Tables are
//! immutable after construction and safe to share across workers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which endpoint a column or regression target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Outcome,
    Surrogate,
}

/// Dense row-major matrix of covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput("feature matrix must be n >= 1, d >= 1"));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "feature matrix storage",
                expected: rows * cols,
                got: values.len(),
            });
        }
        Ok(FeatureMatrix { values, rows, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("feature matrix must have rows"));
        }
        let cols = rows[0].len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "covariate row width",
                    expected: cols,
                    got: r.len(),
                });
            }
            let _ = i;
            values.extend_from_slice(r);
        }
        FeatureMatrix::new(values, rows.len(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn subset(&self, idx: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            values,
            rows: idx.len(),
            cols: self.cols,
        }
    }
}

/// Rows of (covariates, treatment, outcome and/or surrogate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationTable {
    covariates: FeatureMatrix,
    treatment: Vec<u8>,
    outcome: Option<Vec<f64>>,
    surrogate: Option<Vec<f64>>,
}

impl ObservationTable {
    /// Build and validate a table. Errors carry row/column locations.
    ///
    /// Invariants checked: n >= 1, d >= 1, no non-finite entries, treatment
    /// entries exactly 0 or 1, and at least one of outcome/surrogate present.
    pub fn new(
        covariates: FeatureMatrix,
        treatment: Vec<u8>,
        outcome: Option<Vec<f64>>,
        surrogate: Option<Vec<f64>>,
    ) -> Result<Self> {
        let table = ObservationTable {
            covariates,
            treatment,
            outcome,
            surrogate,
        };
        table.validate()
    }

    /// Convenience constructor from covariate rows.
    pub fn from_rows(
        covariates: &[Vec<f64>],
        treatment: Vec<u8>,
        outcome: Option<Vec<f64>>,
        surrogate: Option<Vec<f64>>,
    ) -> Result<Self> {
        ObservationTable::new(
            FeatureMatrix::from_rows(covariates)?,
            treatment,
            outcome,
            surrogate,
        )
    }

    /// Re-check every invariant, consuming and returning the table.
    pub fn validate(self) -> Result<Self> {
        let n = self.covariates.rows();
        if self.treatment.len() != n {
            return Err(Error::DimensionMismatch {
                what: "treatment length",
                expected: n,
                got: self.treatment.len(),
            });
        }
        for (row, &a) in self.treatment.iter().enumerate() {
            if a > 1 {
                return Err(Error::NonBinaryTreatment { row });
            }
        }
        for i in 0..n {
            for (j, v) in self.covariates.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        column: format!("x{}", j + 1),
                        row: i,
                    });
                }
            }
        }
        if self.outcome.is_none() && self.surrogate.is_none() {
            return Err(Error::MissingColumn(
                "at least one of y / s must be present".to_string(),
            ));
        }
        for (name, col) in [("y", &self.outcome), ("s", &self.surrogate)] {
            if let Some(col) = col {
                if col.len() != n {
                    return Err(Error::DimensionMismatch {
                        what: "endpoint column length",
                        expected: n,
                        got: col.len(),
                    });
                }
                if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite {
                        column: name.to_string(),
                        row,
                    });
                }
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.covariates.rows()
    }

    pub fn dim(&self) -> usize {
        self.covariates.cols()
    }

    pub fn covariates(&self) -> &FeatureMatrix {
        &self.covariates
    }

    pub fn covariate_row(&self, i: usize) -> &[f64] {
        self.covariates.row(i)
    }

    pub fn treatment(&self) -> &[u8] {
        &self.treatment
    }

    pub fn outcome(&self) -> Option<&[f64]> {
        self.outcome.as_deref()
    }

    pub fn surrogate(&self) -> Option<&[f64]> {
        self.surrogate.as_deref()
    }

    /// The endpoint column, or a missing-column error naming it.
    pub fn endpoint(&self, which: Endpoint) -> Result<&[f64]> {
        match which {
            Endpoint::Outcome => self
                .outcome()
                .ok_or_else(|| Error::MissingColumn("y".to_string())),
            Endpoint::Surrogate => self
                .surrogate()
                .ok_or_else(|| Error::MissingColumn("s".to_string())),
        }
    }

    /// New table holding the given rows (indices may repeat, as in a
    /// bootstrap resample).
    pub fn subset(&self, idx: &[usize]) -> ObservationTable {
        ObservationTable {
            covariates: self.covariates.subset(idx),
            treatment: idx.iter().map(|&i| self.treatment[i]).collect(),
            outcome: self
                .outcome
                .as_ref()
                .map(|c| idx.iter().map(|&i| c[i]).collect()),
            surrogate: self
                .surrogate
                .as_ref()
                .map(|c| idx.iter().map(|&i| c[i]).collect()),
        }
    }

    /// Indices of rows in the given treatment arm.
    pub fn arm_indices(&self, arm: u8) -> Vec<usize> {
        (0..self.n())
            .filter(|&i| self.treatment[i] == arm)
            .collect()
    }

    /// Copy of the table without one endpoint column (used when splitting a
    /// unified dataset into outcome-only / surrogate-only halves).
    pub fn drop_endpoint(&self, which: Endpoint) -> Result<ObservationTable> {
        let mut t = self.clone();
        match which {
            Endpoint::Outcome => t.outcome = None,
            Endpoint::Surrogate => t.surrogate = None,
        }
        t.validate()
    }
}

/// Potential outcomes `Y(0), Y(1), S(0), S(1)` — simulation only, never
/// observed jointly in real data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialTable {
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub s0: Vec<f64>,
    pub s1: Vec<f64>,
}

impl PotentialTable {
    /// Realized endpoint values under the consistency rule
    /// `Y = A·Y(1) + (1−A)·Y(0)` and likewise for `S`.
    pub fn realize(&self, treatment: &[u8]) -> (Vec<f64>, Vec<f64>) {
        let y = treatment
            .iter()
            .enumerate()
            .map(|(i, &a)| if a == 1 { self.y1[i] } else { self.y0[i] })
            .collect();
        let s = treatment
            .iter()
            .enumerate()
            .map(|(i, &a)| if a == 1 { self.s1[i] } else { self.s0[i] })
            .collect();
        (y, s)
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion / emission
//
// Schema: header row with columns `x1..xd` (reals), `a` (0/1), optional `y`
// (real), optional `s` (real); UTF-8, comma-separated, `.` decimal. Columns
// may appear in any order; no other columns are accepted. This accepts a
// Criteo-shaped export (12 covariates, treatment, visit/exposure/conversion
// mapped to `s`/`y` by the caller).
// ---------------------------------------------------------------------------

/// Parse a table from CSV text.
pub fn table_from_csv_str(text: &str) -> Result<ObservationTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(Error::EmptyInput("csv has no header row"))?;

    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let mut x_cols: Vec<(usize, usize)> = Vec::new(); // (covariate index, column position)
    let mut a_col = None;
    let mut y_col = None;
    let mut s_col = None;
    for (pos, name) in names.iter().enumerate() {
        match *name {
            "a" => a_col = Some(pos),
            "y" => y_col = Some(pos),
            "s" => s_col = Some(pos),
            other => {
                let k = other
                    .strip_prefix('x')
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::Csv {
                        line: 1,
                        reason: format!("unknown column {other:?} (expected x1..xd, a, y, s)"),
                    })?;
                x_cols.push((k - 1, pos));
            }
        }
    }
    let a_col = a_col.ok_or_else(|| Error::MissingColumn("a".to_string()))?;
    let d = x_cols.len();
    if d == 0 {
        return Err(Error::MissingColumn("x1".to_string()));
    }
    {
        let mut seen = vec![false; d];
        for &(k, _) in &x_cols {
            if k >= d || seen[k] {
                return Err(Error::Csv {
                    line: 1,
                    reason: format!("covariate columns must be exactly x1..x{d}"),
                });
            }
            seen[k] = true;
        }
    }
    x_cols.sort_unstable();

    let parse = |field: &str, line: usize, col: &str| -> Result<f64> {
        field.trim().parse::<f64>().map_err(|_| Error::Csv {
            line,
            reason: format!("cannot parse {field:?} in column {col}"),
        })
    };

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut a: Vec<u8> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    let mut s: Vec<f64> = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::Csv {
                line: lineno + 1,
                reason: format!("expected {} fields, got {}", names.len(), fields.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for &(_, pos) in &x_cols {
            row.push(parse(fields[pos], lineno + 1, names[pos])?);
        }
        xs.push(row);
        let av = parse(fields[a_col], lineno + 1, "a")?;
        if av == 0.0 {
            a.push(0);
        } else if av == 1.0 {
            a.push(1);
        } else {
            return Err(Error::NonBinaryTreatment { row: lineno - 1 });
        }
        if let Some(pos) = y_col {
            y.push(parse(fields[pos], lineno + 1, "y")?);
        }
        if let Some(pos) = s_col {
            s.push(parse(fields[pos], lineno + 1, "s")?);
        }
    }
    if xs.is_empty() {
        return Err(Error::EmptyInput("csv has no data rows"));
    }
    ObservationTable::from_rows(&xs, a, y_col.map(|_| y), s_col.map(|_| s))
}

/// Read a table from a CSV file.
pub fn read_csv(path: impl AsRef<std::path::Path>) -> Result<ObservationTable> {
    let text = std::fs::read_to_string(path)?;
    table_from_csv_str(&text)
}

/// Serialize a table back to the CSV schema (column order x1..xd, a, y, s).
pub fn table_to_csv_string(table: &ObservationTable) -> String {
    let d = table.dim();
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    header.push("a".to_string());
    if table.outcome().is_some() {
        header.push("y".to_string());
    }
    if table.surrogate().is_some() {
        header.push("s".to_string());
    }
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..table.n() {
        let mut fields: Vec<String> = table
            .covariate_row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        fields.push(format!("{}", table.treatment()[i]));
        if let Some(y) = table.outcome() {
            fields.push(format!("{}", y[i]));
        }
        if let Some(s) = table.surrogate() {
            fields.push(format!("{}", s[i]));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_row_table() -> ObservationTable {
        ObservationTable::from_rows(
            &[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]],
            vec![0, 1, 1],
            Some(vec![1.0, 0.0, 1.0]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn well_formed_table_is_valid() {
        let t = three_row_table();
        assert_eq!(t.n(), 3);
        assert_eq!(t.dim(), 2);
    }

    #[test]
    fn non_binary_treatment_is_rejected_with_row() {
        let err = ObservationTable::from_rows(
            &[vec![0.0], vec![0.0], vec![0.0]],
            vec![0, 2, 1],
            Some(vec![0.0, 0.0, 0.0]),
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn nan_outcome_is_rejected_with_location() {
        let err = ObservationTable::from_rows(
            &[vec![0.0], vec![0.0]],
            vec![0, 1],
            Some(vec![1.0, f64::NAN]),
            None,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("column y") && msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn missing_both_endpoints_is_rejected() {
        assert!(ObservationTable::from_rows(&[vec![0.0]], vec![0], None, None).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = three_row_table();
        let csv = table_to_csv_string(&t);
        let back = table_from_csv_str(&csv).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn csv_errors_name_the_problem() {
        // missing `a`
        let err = table_from_csv_str("x1,y\n1,2\n").unwrap_err();
        assert!(err.to_string().contains("missing column a"), "{err}");
        // unknown column
        let err = table_from_csv_str("x1,a,conversion\n1,0,2\n").unwrap_err();
        assert!(err.to_string().contains("conversion"), "{err}");
        // bad field
        let err = table_from_csv_str("x1,a,y\n1,0,oops\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        // gap in covariate numbering
        let err = table_from_csv_str("x1,x3,a,y\n1,2,0,3\n").unwrap_err();
        assert!(err.to_string().contains("x1..x2"), "{err}");
    }

    #[test]
    fn consistency_realization_matches_assignment() {
        let p = PotentialTable {
            y0: vec![0.0, 1.0],
            y1: vec![2.0, 3.0],
            s0: vec![4.0, 5.0],
            s1: vec![6.0, 7.0],
        };
        let (y, s) = p.realize(&[1, 0]);
        assert_eq!(y, vec![2.0, 1.0]);
        assert_eq!(s, vec![6.0, 5.0]);
    }
}
