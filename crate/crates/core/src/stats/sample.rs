use std::io::Write;

use serde::{Deserialize, Serialize};

use super::RngSpec;
use crate::error::{invalid, Result};

/// Monte Carlo draws of a `dim`-vector, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    dim: usize,
    draws: Vec<f64>,
    seed_info: Option<RngSpec>,
}

impl SampleSet {
    pub fn new(dim: usize, draws: Vec<f64>) -> Result<Self> {
        if dim == 0 || draws.is_empty() || !draws.len().is_multiple_of(dim) {
            return Err(invalid("sample set needs dim >= 1 and at least one complete draw"));
        }
        if draws.iter().any(|x| !x.is_finite()) {
            return Err(invalid("sample contains non-finite values"));
        }
        Ok(Self { dim, draws, seed_info: None })
    }

    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("rows differ in length"));
        }
        Self::new(dim, rows.concat())
    }

    pub fn with_seed(mut self, spec: RngSpec) -> Self {
        self.seed_info = Some(spec);
        self
    }

    pub fn seed_info(&self) -> Option<RngSpec> {
        self.seed_info
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.draws.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// One row per draw, columns `x0, x1, ...`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record((0..self.dim).map(|j| format!("x{j}")))?;
        for r in self.rows() {
            out.write_record(r.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_columns() {
        let s = SampleSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.column(1), vec![2.0, 4.0]);
        assert!(SampleSet::new(1, vec![f64::NAN]).is_err());
        assert!(SampleSet::new(2, vec![]).is_err());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x0,x1\n1,2\n3,4\n");
    }
}
