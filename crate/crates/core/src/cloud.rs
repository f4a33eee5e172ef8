//! Point clouds: `n` samples of `d` real-valued variables, stored row-major.
//!
//! Columns are the variables of a multivariate system and rows are joint
//! observations. Every coordinate is finite and the shape is fixed once built.
//!
//! Clouds serialize to CSV with one row per sample and every value written
//! with 17 significant digits, which round-trips any `f64` exactly. An
//! optional header line `x1,x2,...` is accepted on input.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointCloud {
    /// Builds a cloud from row-major data.
    pub fn new(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!(
                "point cloud needs n >= 1 and d >= 1, got {n}x{d}"
            )));
        }
        if data.len() != n * d {
            return Err(Error::invalid(format!(
                "expected {} values for a {n}x{d} cloud, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(data, rows.len(), d)
    }

    /// Builds a cloud whose columns are the given equal-length series.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Result<Self> {
        let d = cols.len();
        let n = cols.first().map(|c| c.as_ref().len()).unwrap_or(0);
        if cols.iter().any(|c| c.as_ref().len() != n) {
            return Err(Error::invalid("columns have unequal lengths"));
        }
        let mut data = Vec::with_capacity(n * d);
        for t in 0..n {
            data.extend(cols.iter().map(|c| c.as_ref()[t]));
        }
        Self::new(data, n, d)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.d..(t + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn get(&self, t: usize, j: usize) -> f64 {
        self.data[t * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New cloud made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.d) {
            return Err(Error::invalid(format!(
                "column {c} out of range for a cloud with {} columns",
                self.d
            )));
        }
        let mut data = Vec::with_capacity(self.n * cols.len());
        for r in self.rows() {
            data.extend(cols.iter().map(|&c| r[c]));
        }
        Self::new(data, self.n, cols.len())
    }

    /// New cloud made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.d);
        for &t in rows {
            if t >= self.n {
                return Err(Error::invalid(format!("row {t} out of range")));
            }
            data.extend_from_slice(self.row(t));
        }
        Self::new(data, rows.len(), self.d)
    }

    /// Applies `f` to every row, producing a cloud of width `d_out`.
    pub fn map_rows(&self, d_out: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Result<Self> {
        let mut data = vec![0.0; self.n * d_out];
        for (src, dst) in self.rows().zip(data.chunks_exact_mut(d_out)) {
            f(src, dst);
        }
        Self::new(data, self.n, d_out)
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for r in self.rows() {
            for (a, &v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|a| *a /= self.n as f64);
        m
    }

    /// Sample variance of every column (denominator `n - 1`; zero when `n == 1`).
    pub fn column_variances(&self) -> Vec<f64> {
        let m = self.column_means();
        let mut v = vec![0.0; self.d];
        for r in self.rows() {
            for j in 0..self.d {
                let e = r[j] - m[j];
                v[j] += e * e;
            }
        }
        let denom = (self.n.max(2) - 1) as f64;
        v.iter_mut().for_each(|a| *a /= denom);
        v
    }

    pub fn write_csv<W: Write>(&self, w: W, header: bool) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        if header {
            let names: Vec<String> = (1..=self.d).map(|j| format!("x{j}")).collect();
            out.write_record(&names).map_err(csv_err)?;
        }
        for r in self.rows() {
            out.write_record(r.iter().map(|v| format_f64(*v)))
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, header: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, header)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Parses CSV. A first line whose fields are not all numbers is treated as
    /// a header. Errors carry the 1-based line number.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(r);
        let mut data = Vec::new();
        let mut d = None;
        let mut n = 0usize;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|f| f.parse::<f64>()).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if n == 0 && d.is_none() && i == 0 => {
                    // header line
                    d = Some(rec.len());
                    continue;
                }
                Err(e) => {
                    return Err(Error::Parse {
                        line,
                        message: format!("invalid number: {e}"),
                    })
                }
            };
            match d {
                Some(w) if w != row.len() => {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {w} fields, found {}", row.len()),
                    })
                }
                _ => d = Some(row.len()),
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value {v}"),
                });
            }
            data.extend(row);
            n += 1;
        }
        let d = d.unwrap_or(0);
        if n == 0 {
            return Err(Error::Parse {
                line: 0,
                message: "no data rows".into(),
            });
        }
        Self::new(data, n, d)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, header: bool) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f), header)
    }
}

/// Formats a double with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(PointCloud::new(vec![1.0, f64::NAN], 1, 2).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0], 1, 3).is_err());
        assert!(PointCloud::new(vec![], 0, 3).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = PointCloud::from_rows(&[[0.1, -1.0 / 3.0, 1e-300], [f64::MAX, 2.5, -0.0]])
            .unwrap();
        for header in [true, false] {
            let s = c.to_csv_string(header);
            let back = PointCloud::read_csv(s.as_bytes()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn header_is_optional() {
        let c = PointCloud::read_csv("x1,x2\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!((c.n(), c.d()), (2, 2));
        assert_eq!(c.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn parse_errors_report_line() {
        match PointCloud::read_csv("1,2\n3,4\n5,abc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match PointCloud::read_csv("1,2\n3,4,5\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn column_selection() {
        let c = PointCloud::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let s = c.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.row(1), &[6.0, 4.0]);
        assert!(c.select_columns(&[3]).is_err());
        assert_eq!(c.column(1), vec![2.0, 5.0]);
    }
}
