use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Samples from one environment: `n` rows, one column per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentData {
    env_id: String,
    names: Vec<String>,
    samples: DMatrix<f64>,
}

impl EnvironmentData {
    /// Requires more rows than columns.
    pub fn new(env_id: impl Into<String>, names: Vec<String>, samples: DMatrix<f64>) -> Result<Self> {
        let env_id = env_id.into();
        let (n, p) = samples.shape();
        if names.len() != p {
            return Err(Error::data(&env_id, format!("{} names for {p} columns", names.len())));
        }
        if n <= p {
            return Err(Error::data(
                &env_id,
                format!("{n} rows for {p} variables, need more rows than variables"),
            ));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::data(&env_id, "non-finite value"));
        }
        Ok(EnvironmentData { env_id, names, samples })
    }

    pub fn env_id(&self) -> &str {
        &self.env_id
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn p(&self) -> usize {
        self.samples.ncols()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    /// `XᵀX`, the uncentered second-moment matrix times `n`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.samples.tr_mul(&self.samples)
    }

    /// Subtracts each column's mean.
    pub fn centered(&self) -> EnvironmentData {
        let mut x = self.samples.clone();
        for mut col in x.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        EnvironmentData {
            env_id: self.env_id.clone(),
            names: self.names.clone(),
            samples: x,
        }
    }

    /// Reads a comma-separated file with a header row of variable names.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let label = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| Error::data(&label, e.to_string()))?;
        EnvironmentData::from_csv_reader(&label, file)
    }

    pub fn from_csv_reader(label: &str, reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::data(label, format!("line 1: {e}")))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if names.is_empty() || names.iter().all(|n| n.is_empty()) {
            return Err(Error::data(label, "line 1: missing header row"));
        }
        let p = names.len();
        let mut values = Vec::new();
        let mut n = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|pos| pos.line()).unwrap_or(0);
                Error::data(label, format!("line {line}: {e}"))
            })?;
            let line = rec.position().map(|pos| pos.line()).unwrap_or(n as u64 + 2);
            if rec.len() != p {
                return Err(Error::data(
                    label,
                    format!("line {line}: expected {p} fields, found {}", rec.len()),
                ));
            }
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::data(
                        label,
                        format!("line {line}: cannot parse {:?} in column {}", field, names[k]),
                    )
                })?;
                values.push(v);
            }
            n += 1;
        }
        let samples = DMatrix::from_row_slice(n, p, &values);
        EnvironmentData::new(label, names, samples)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.to_csv_writer(std::io::BufWriter::new(file))
    }

    /// Values use the shortest representation that parses back to the same
    /// `f64`, so a write/read cycle is lossless.
    pub fn to_csv_writer(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.names).map_err(io)?;
        let mut buf: Vec<String> = Vec::with_capacity(self.p());
        for r in 0..self.n() {
            buf.clear();
            buf.extend((0..self.p()).map(|c| format!("{}", self.samples[(r, c)])));
            w.write_record(&buf).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reports_bad_lines() {
        let ok = "a,b\n1,2\n3,4.5\n-1,0\n";
        let d = EnvironmentData::from_csv_reader("t.csv", ok.as_bytes()).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.names(), ["a", "b"]);
        assert_eq!(d.samples()[(1, 1)], 4.5);

        let bad = "a,b\n1,2\n3,x\n-1,0\n";
        let err = EnvironmentData::from_csv_reader("t.csv", bad.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t.csv") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn rejects_too_few_rows() {
        let short = "a,b,c\n1,2,3\n";
        assert!(EnvironmentData::from_csv_reader("s.csv", short.as_bytes()).is_err());
    }

    #[test]
    fn centering_zeroes_means() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 6.0]);
        let d = EnvironmentData::new("e", vec!["a".into()], x).unwrap().centered();
        assert!(d.samples().column(0).sum().abs() < 1e-12);
    }
}
