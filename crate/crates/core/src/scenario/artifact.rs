use std::fs::File;
use std::path::Path;

use crate::dist::io::{write_charfn_csv, write_measure_csv};
use crate::dist::{CharFn, Measure};
use crate::error::Result;
use crate::gshift::PathGrid;
use crate::stats::SampleSet;

/// Payload of a CSV artifact.
#[derive(Clone, Debug)]
pub enum ArtifactData {
    Measure(Measure),
    CharFn(CharFn),
    Samples(SampleSet),
    Paths(PathGrid),
    /// Header plus numeric rows.
    Table { header: Vec<String>, rows: Vec<Vec<f64>> },
}

/// A named file written next to `report.json`.
#[derive(Clone, Debug)]
pub struct Artifact {
    /// File name including the `.csv` extension.
    pub name: String,
    pub data: ArtifactData,
}

impl Artifact {
    pub fn measure(name: impl Into<String>, m: impl Into<Measure>) -> Self {
        Self { name: format!("{}.csv", name.into()), data: ArtifactData::Measure(m.into()) }
    }

    pub fn charfn(name: impl Into<String>, phi: CharFn) -> Self {
        Self { name: format!("{}.csv", name.into()), data: ArtifactData::CharFn(phi) }
    }

    pub fn samples(name: impl Into<String>, s: SampleSet) -> Self {
        Self { name: format!("{}.csv", name.into()), data: ArtifactData::Samples(s) }
    }

    pub fn paths(name: impl Into<String>, p: PathGrid) -> Self {
        Self { name: format!("{}.csv", name.into()), data: ArtifactData::Paths(p) }
    }

    pub fn table(name: impl Into<String>, header: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: format!("{}.csv", name.into()),
            data: ArtifactData::Table { header: header.iter().map(|h| h.to_string()).collect(), rows },
        }
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let f = File::create(dir.join(&self.name))?;
        match &self.data {
            ArtifactData::Measure(m) => write_measure_csv(m, f),
            ArtifactData::CharFn(phi) => write_charfn_csv(phi, f),
            ArtifactData::Samples(s) => s.write_csv(f),
            ArtifactData::Paths(p) => p.write_csv(f),
            ArtifactData::Table { header, rows } => {
                let mut w = csv::Writer::from_writer(f);
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r.iter().map(|x| x.to_string()))?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }
}
