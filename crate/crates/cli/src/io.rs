//! CSV ingestion and output.
//!
//! Censored data: `time,status,<covariates...>` with status 1 = event,
//! 0 = censored. Complete data: `y,<covariates...>`. Either may carry a
//! `prediction` column. Non-numeric covariate columns are one-hot encoded
//! against their first level in sorted order.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use predacc::pipeline::Dataset;
use predacc::sample::Covariates;
use predacc::{CensoredSample, CompleteSample, PredictionVector};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DataKind {
    Censored,
    Complete,
}

impl DataKind {
    pub fn name(self) -> &'static str {
        match self {
            DataKind::Censored => "censored",
            DataKind::Complete => "complete",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub data: Dataset,
    pub covariate_names: Vec<String>,
    pub predictions: Option<PredictionVector>,
}

struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> CliResult<RawTable> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Input(format!("{shown}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(RawTable { header, rows })
}

fn find(header: &[String], name: &str) -> Option<usize> {
    header.iter().position(|h| h.eq_ignore_ascii_case(name))
}

fn parse_numeric(path: &str, table: &RawTable, col: usize) -> CliResult<Vec<f64>> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let cell = &r[col];
            cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                CliError::Input(format!(
                    "{path}: line {}: column `{}`: `{cell}` is not a finite number",
                    i + 2,
                    table.header[col]
                ))
            })
        })
        .collect()
}

/// Numeric columns pass through; others become indicator columns.
fn encode_covariates(path: &str, table: &RawTable, cols: &[usize]) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let n = table.rows.len();
    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for &c in cols {
        let name = &table.header[c];
        if let Some(i) = table.rows.iter().position(|r| r[c].is_empty()) {
            return Err(CliError::Input(format!(
                "{path}: line {}: column `{name}` is empty",
                i + 2
            )));
        }
        let numeric: Option<Vec<f64>> = table.rows.iter().map(|r| r[c].parse::<f64>().ok()).collect();
        match numeric {
            Some(v) => {
                if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                    return Err(CliError::Input(format!(
                        "{path}: line {}: column `{name}` is not finite",
                        i + 2
                    )));
                }
                names.push(name.clone());
                columns.push(v);
            }
            None => {
                let levels: BTreeSet<&str> = table.rows.iter().map(|r| r[c].as_str()).collect();
                for level in levels.iter().skip(1) {
                    names.push(format!("{name}={level}"));
                    columns.push(
                        table
                            .rows
                            .iter()
                            .map(|r| if r[c] == *level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                }
            }
        }
    }
    let rows = (0..n).map(|i| columns.iter().map(|col| col[i]).collect()).collect();
    Ok((names, rows))
}

pub fn load(path: &Path, kind: DataKind) -> CliResult<Loaded> {
    let shown = path.display().to_string();
    let table = read_table(path)?;
    if table.rows.is_empty() {
        return Err(CliError::Input(format!("{shown}: no data rows")));
    }
    let required: &[&str] = match kind {
        DataKind::Censored => &["time", "status"],
        DataKind::Complete => &["y"],
    };
    let mut used = Vec::new();
    for name in required {
        let c = find(&table.header, name)
            .ok_or_else(|| CliError::Input(format!("{shown}: missing required column `{name}`")))?;
        used.push(c);
    }
    let pred_col = find(&table.header, "prediction");
    let cov_cols: Vec<usize> = (0..table.header.len())
        .filter(|c| !used.contains(c) && Some(*c) != pred_col)
        .collect();
    let (covariate_names, x) = encode_covariates(&shown, &table, &cov_cols)?;
    let predictions = match pred_col {
        Some(c) => Some(PredictionVector::new(parse_numeric(&shown, &table, c)?).map_err(CliError::model(&shown))?),
        None => None,
    };

    let data = match kind {
        DataKind::Censored => {
            let t = parse_numeric(&shown, &table, used[0])?;
            let status = parse_numeric(&shown, &table, used[1])?;
            if let Some(i) = status.iter().position(|&s| s != 0.0 && s != 1.0) {
                return Err(CliError::Model {
                    context: format!("{shown}: line {}", i + 2),
                    source: predacc::Error::InvalidIndicator {
                        row: i,
                        value: status[i],
                    },
                });
            }
            if t.iter().any(|&v| v <= 0.0) {
                log::warn!("{shown}: nonpositive times present; AFT models will reject them");
            }
            let event = status.iter().map(|&s| s == 1.0).collect();
            let x = Covariates::from_rows(&x).map_err(CliError::model(&shown))?;
            Dataset::Censored(CensoredSample::new(t, event, x).map_err(CliError::model(&shown))?)
        }
        DataKind::Complete => {
            let y = parse_numeric(&shown, &table, used[0])?;
            let x = Covariates::from_rows(&x).map_err(CliError::model(&shown))?;
            Dataset::Complete(CompleteSample::new(y, x).map_err(CliError::model(&shown))?)
        }
    };
    Ok(Loaded {
        data,
        covariate_names,
        predictions,
    })
}

/// A single column of predictions, with or without a header line.
pub fn load_predictions(path: &Path) -> CliResult<PredictionVector> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("{shown}: {e}")))?;
        if rec.len() != 1 {
            return Err(CliError::Input(format!("{shown}: line {}: expected one column", i + 1)));
        }
        match rec[0].parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Input(format!(
                    "{shown}: line {}: `{}` is not a finite number",
                    i + 1,
                    &rec[0]
                )))
            }
        }
    }
    PredictionVector::new(values).map_err(CliError::model(&shown))
}

pub fn write_censored<W: Write>(out: W, sample: &CensoredSample, names: &[String]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend(names.iter().cloned());
    let err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(&header).map_err(err)?;
    for i in 0..sample.len() {
        let mut rec = vec![
            sample.time()[i].to_string(),
            if sample.event()[i] { "1" } else { "0" }.to_string(),
        ];
        rec.extend(sample.x().row(i).iter().map(f64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Input(e.to_string()))
}

pub fn write_complete<W: Write>(out: W, sample: &CompleteSample, names: &[String]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_string()];
    header.extend(names.iter().cloned());
    let err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(&header).map_err(err)?;
    for i in 0..sample.len() {
        let mut rec = vec![sample.y()[i].to_string()];
        rec.extend(sample.x().row(i).iter().map(f64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Input(e.to_string()))
}

/// Write `contents` to `path`, or to stdout when there is no path.
pub fn emit(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(CliError::io(p.display().to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).map_err(CliError::io("<stdout>"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn censored_with_prediction_column() {
        let f = file("time,status,age,prediction\n1,1,50,0\n2,0,60,0\n3,1,55,1\n4,1,70,1\n");
        let l = load(f.path(), DataKind::Censored).unwrap();
        assert_eq!(l.covariate_names, vec!["age"]);
        assert_eq!(l.predictions.unwrap().as_slice(), &[0.0, 0.0, 1.0, 1.0]);
        match l.data {
            Dataset::Censored(s) => {
                assert_eq!(s.event(), &[true, false, true, true]);
                assert_eq!(s.x().column(0), vec![50.0, 60.0, 55.0, 70.0]);
            }
            _ => panic!("expected censored data"),
        }
    }

    #[test]
    fn categorical_columns_are_one_hot() {
        let f = file("y,arm\n1,b\n2,a\n3,c\n4,a\n");
        let l = load(f.path(), DataKind::Complete).unwrap();
        assert_eq!(l.covariate_names, vec!["arm=b", "arm=c"]);
        match l.data {
            Dataset::Complete(s) => {
                assert_eq!(s.x().row(0), &[1.0, 0.0]);
                assert_eq!(s.x().row(1), &[0.0, 0.0]);
                assert_eq!(s.x().row(2), &[0.0, 1.0]);
            }
            _ => panic!("expected complete data"),
        }
    }

    #[test]
    fn bad_status_reports_line() {
        let f = file("time,status\n1,1\n2,2\n3,1\n");
        let e = load(f.path(), DataKind::Censored).unwrap_err();
        assert!(matches!(
            e,
            CliError::Model {
                source: predacc::Error::InvalidIndicator { row: 1, .. },
                ..
            }
        ));
        assert!(e.to_string().contains("line 3"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn missing_column() {
        let f = file("t,status\n1,1\n2,1\n");
        let e = load(f.path(), DataKind::Censored).unwrap_err();
        assert!(e.to_string().contains("`time`"));
    }

    #[test]
    fn predictions_file_with_and_without_header() {
        let a = load_predictions(file("prediction\n1.5\n2\n").path()).unwrap();
        let b = load_predictions(file("1.5\n2\n").path()).unwrap();
        assert_eq!(a, b);
        assert!(load_predictions(file("1\nx\n").path()).is_err());
    }

    #[test]
    fn censored_round_trip() {
        let s = predacc::validate_censored(
            &[0.1, 2.5, 1.0 / 3.0],
            &[1.0, 0.0, 1.0],
            &[vec![1e-300, -2.0], vec![0.7, 3.25], vec![std::f64::consts::PI, 0.0]],
        )
        .unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let mut buf = Vec::new();
        write_censored(&mut buf, &s, &names).unwrap();
        let f = file(std::str::from_utf8(&buf).unwrap());
        let l = load(f.path(), DataKind::Censored).unwrap();
        assert_eq!(l.covariate_names, names);
        assert_eq!(l.data, Dataset::Censored(s));
    }
}
