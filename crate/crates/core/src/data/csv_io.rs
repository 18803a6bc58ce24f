use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// What to do with rows that contain a missing cell ("" or "NA").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NaPolicy {
    /// Drop incomplete rows and report how many were dropped.
    #[default]
    RejectRow,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

pub fn load_csv(path: impl AsRef<Path>, na_policy: NaPolicy) -> Result<(Dataset, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, na_policy)
}

pub fn read_csv<R: Read>(reader: R, na_policy: NaPolicy) -> Result<(Dataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || (names.len() == 1 && names[0].is_empty()) {
        return Err(Error::Csv("missing header row".into()));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut report = LoadReport::default();
    let mut row_buf = Vec::with_capacity(names.len());
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        row_buf.clear();
        let mut missing = None;
        for (j, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                missing.get_or_insert(j);
                row_buf.push(f64::NAN);
                continue;
            }
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::NonNumeric {
                    column: names[j].clone(),
                    row: row + 1,
                    value: cell.to_string(),
                })?;
            row_buf.push(value);
        }
        if let Some(j) = missing {
            match na_policy {
                NaPolicy::Fail => {
                    return Err(Error::Missing {
                        column: names[j].clone(),
                        row: row + 1,
                    })
                }
                NaPolicy::RejectRow => {
                    report.dropped_rows += 1;
                    continue;
                }
            }
        }
        for (col, &v) in columns.iter_mut().zip(&row_buf) {
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((Dataset::new(names, columns)?, report))
}

/// Writes with shortest round-trip float formatting, so reading back yields the same values.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::Csv(e.to_string());
    wtr.write_record(dataset.column_names()).map_err(to_err)?;
    let cols: Vec<&[f64]> = dataset.columns().map(|(_, c)| c).collect();
    let mut record = Vec::with_capacity(cols.len());
    for i in 0..dataset.n_rows() {
        record.clear();
        record.extend(cols.iter().map(|c| c[i].to_string()));
        wtr.write_record(&record).map_err(to_err)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read(text: &str, policy: NaPolicy) -> Result<(Dataset, LoadReport)> {
        read_csv(text.as_bytes(), policy)
    }

    #[test]
    fn three_rows() {
        let (ds, rep) = read("a,b\n1,2\n3,4\n5,6", NaPolicy::RejectRow).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.column("a").unwrap(), &[1.0, 3.0, 5.0]);
        assert_eq!(ds.column("b").unwrap(), &[2.0, 4.0, 6.0]);
        assert_eq!(rep.dropped_rows, 0);
    }

    #[test]
    fn na_rows_dropped_or_rejected() {
        let text = "a,b\n1,2\nNA,4\n5,6\n";
        let (ds, rep) = read(text, NaPolicy::RejectRow).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(rep.dropped_rows, 1);
        assert!(matches!(read(text, NaPolicy::Fail), Err(Error::Missing { .. })));

        let (ds, rep) = read("a,b\n1,\n3,4\n", NaPolicy::RejectRow).unwrap();
        assert_eq!((ds.n_rows(), rep.dropped_rows), (1, 1));
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            read("a,b\n1,x\n", NaPolicy::RejectRow),
            Err(Error::NonNumeric { .. })
        ));
        assert!(matches!(
            read("a,b\n1,inf\n", NaPolicy::RejectRow),
            Err(Error::NonNumeric { .. })
        ));
        assert!(matches!(
            read("a,b\nNA,1\n", NaPolicy::RejectRow),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            read("a,a\n1,2\n", NaPolicy::RejectRow),
            Err(Error::DuplicateColumn(_))
        ));
        assert!(matches!(read("a,b\n1,2,3\n", NaPolicy::RejectRow), Err(Error::Csv(_))));
    }

    #[test]
    fn quoted_header() {
        let (ds, _) = read("\"a b\",c\n1,2\n", NaPolicy::RejectRow).unwrap();
        assert_eq!(ds.column_names(), &["a b".to_string(), "c".to_string()]);
    }

    #[test]
    fn mtcars_fixture_loads() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/mtcars.csv");
        let (ds, _) = load_csv(path, NaPolicy::RejectRow).unwrap();
        assert_eq!(ds.n_rows(), 32);
        assert_eq!(ds.n_cols(), 11);
        assert!(ds.column("mpg").is_some());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in 1usize..20,
            seed in proptest::collection::vec(-1e6f64..1e6, 60),
        ) {
            let a: Vec<f64> = seed.iter().cycle().take(rows).copied().collect();
            let b: Vec<f64> = seed.iter().rev().cycle().take(rows).map(|v| v / 7.0).collect();
            let ds = Dataset::from_pairs(vec![("a", a), ("b", b)]).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            let (back, _) = read_csv(buf.as_slice(), NaPolicy::Fail).unwrap();
            prop_assert_eq!(&back, &ds);
            let mut buf2 = Vec::new();
            write_csv(&back, &mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
        }
    }
}
