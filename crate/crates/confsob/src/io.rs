//! JSON and CSV formats.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use confsob_core::conformal::ConformalMap;
use confsob_core::dynamics::{MovingCenter, MovingSphereReport};
use confsob_core::harmonics::HarmonicCoeffs;
use confsob_core::sphere::SpherePoint;
use serde::{Deserialize, Serialize};

use crate::BoxError;

/// Version tag written into every JSON report.
pub const SCHEMA: u32 = 1;

/// `{ "n": 2, "L": 32, "coeffs": [[l, m, value], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffFile {
    pub n: usize,
    #[serde(rename = "L")]
    pub band_limit: usize,
    pub coeffs: Vec<(usize, i64, f64)>,
}

impl From<&HarmonicCoeffs> for CoeffFile {
    fn from(c: &HarmonicCoeffs) -> Self {
        Self {
            n: c.dim(),
            band_limit: c.band_limit(),
            coeffs: c.iter().collect(),
        }
    }
}

impl TryFrom<&CoeffFile> for HarmonicCoeffs {
    type Error = confsob_core::Error;

    /// Missing entries are zero; a repeated `(l, m)` keeps the last value.
    fn try_from(f: &CoeffFile) -> Result<Self, Self::Error> {
        let mut c = HarmonicCoeffs::zeros(f.n, f.band_limit)?;
        for &(l, m, v) in &f.coeffs {
            if !v.is_finite() {
                return Err(confsob_core::Error::Parameter("coefficients must be finite"));
            }
            c.set(l, m, v)?;
        }
        Ok(c)
    }
}

pub fn read_coeffs(path: &Path) -> Result<HarmonicCoeffs, BoxError> {
    let file: CoeffFile = serde_json::from_reader(io::BufReader::new(File::open(path)?))?;
    Ok(HarmonicCoeffs::try_from(&file)?)
}

pub fn write_coeffs(path: &Path, c: &HarmonicCoeffs) -> Result<(), BoxError> {
    write_json(Some(path), &CoeffFile::from(c))
}

/// Serialized form of a [`ConformalMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Inversion { lambda: f64, xi0: Vec<f64> },
    Reflection { alpha: f64, e: Vec<f64> },
    Moebius { zeta: Vec<f64> },
}

impl From<&ConformalMap> for MapSpec {
    fn from(map: &ConformalMap) -> Self {
        match map {
            ConformalMap::LiftedInversion(i) => Self::Inversion {
                lambda: i.lambda(),
                xi0: i.xi0().coords().to_vec(),
            },
            ConformalMap::LiftedReflection(r) => Self::Reflection {
                alpha: r.alpha(),
                e: r.normal().to_vec(),
            },
            ConformalMap::Moebius(m) => Self::Moebius {
                zeta: m.zeta().to_vec(),
            },
        }
    }
}

impl MapSpec {
    pub fn to_map(&self) -> confsob_core::Result<ConformalMap> {
        match self {
            Self::Inversion { lambda, xi0 } => ConformalMap::inversion(*lambda, SpherePoint::new(xi0.clone())?),
            Self::Reflection { alpha, e } => ConformalMap::reflection(*alpha, e.clone()),
            Self::Moebius { zeta } => ConformalMap::moebius(zeta.clone()),
        }
    }
}

/// Pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize + ?Sized>(path: Option<&Path>, value: &T) -> Result<(), BoxError> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, BoxError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Per-parameter profile: `lambda` (or `alpha`), `min_w`, `sup_abs_w`, `defect`.
pub fn write_profile_csv(path: Option<&Path>, report: &MovingSphereReport) -> Result<(), BoxError> {
    let mut w = csv_writer(path)?;
    let key = match report.center {
        MovingCenter::Inversion { .. } => "lambda",
        MovingCenter::Reflection { .. } => "alpha",
    };
    w.write_record([key, "min_w", "sup_abs_w", "defect"])?;
    for i in 0..report.values.len() {
        w.write_record([
            fmt(report.values[i]),
            fmt(report.min_w[i]),
            fmt(report.sup_abs_w[i]),
            fmt(report.defects[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and rows keyed by an integer first column.
pub fn write_table_csv(path: Option<&Path>, header: &[String], rows: &[(usize, Vec<f64>)]) -> Result<(), BoxError> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for (key, row) in rows {
        w.write_record(std::iter::once(key.to_string()).chain(row.iter().map(|&v| fmt(v))))?;
    }
    w.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    // Shortest round-trip representation.
    format!("{v:?}")
}
