//! Interchange formats: grid JSON, boundary-function and field CSV, the
//! experiment dataset consumed by reconstruction, moment tables, decay and
//! residual-ladder CSV, and 16-bit binary PGM images with a JSON sidecar
//! recording the normalization. Complex numbers serialize as `[re, im]`
//! pairs everywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dnmap::{MomentMethod, MomentRecord};
use crate::error::{Error, Result};
use crate::grid::{build_grid, BoundaryFunction, BoundaryPartition, Field, Grid, GridKind};
use crate::reconstruct::{MomentSample, ProbeRegime};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n: usize,
}

pub fn grid_to_json(grid: &Grid) -> String {
    serde_json::to_string(&GridSpec {
        kind: grid.kind(),
        n: grid.n(),
    })
    .expect("grid spec serializes")
}

pub fn grid_from_json(text: &str) -> Result<Grid> {
    let spec: GridSpec =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("grid json: {e}")))?;
    build_grid(spec.kind, spec.n)
}

/// CSV rows `index,s,re,im` over the boundary loop.
pub fn boundary_to_csv(grid: &Grid, f: &BoundaryFunction) -> String {
    let mut out = String::from("index,s,re,im\n");
    for (k, b) in grid.boundary_nodes().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            k, b.s, f.values[k].re, f.values[k].im
        ));
    }
    out
}

/// CSV rows `i,j,x,y,re,im` over all grid nodes.
pub fn field_to_csv(grid: &Grid, f: &Field) -> String {
    let mut out = String::from("i,j,x,y,re,im\n");
    let n = grid.n();
    for node in 0..grid.node_count() {
        let (i, j) = (node % n, node / n);
        let [x, y] = grid.coords(node);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i, j, x, y, f.values[node].re, f.values[node].im
        ));
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryFnDto {
    pub values: Vec<[f64; 2]>,
    pub support: Vec<bool>,
}

impl BoundaryFnDto {
    pub fn from_fn(f: &BoundaryFunction) -> Self {
        BoundaryFnDto {
            values: f.values.iter().map(|v| [v.re, v.im]).collect(),
            support: f.support_mask.clone(),
        }
    }

    pub fn into_fn(&self, grid: &Grid) -> Result<BoundaryFunction> {
        if self.values.len() != grid.boundary_count() || self.support.len() != self.values.len() {
            return Err(Error::Invalid(format!(
                "boundary function has {} values, grid loop has {}",
                self.values.len(),
                grid.boundary_count()
            )));
        }
        Ok(BoundaryFunction {
            n: grid.n(),
            values: self
                .values
                .iter()
                .map(|[re, im]| Complex64::new(*re, *im))
                .collect(),
            support_mask: self.support.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentRecordDto {
    pub z: [f64; 2],
    pub f1: BoundaryFnDto,
    pub f2: BoundaryFnDto,
    pub f0: BoundaryFnDto,
    pub eps: f64,
    pub moment: [f64; 2],
    pub method: MomentMethod,
}

impl MomentRecordDto {
    pub fn new(z: [f64; 2], record: &MomentRecord) -> Self {
        MomentRecordDto {
            z,
            f1: BoundaryFnDto::from_fn(&record.f1),
            f2: BoundaryFnDto::from_fn(&record.f2),
            f0: BoundaryFnDto::from_fn(&record.f0),
            eps: record.eps,
            moment: [record.moment.re, record.moment.im],
            method: record.method,
        }
    }

    pub fn sample(&self) -> MomentSample {
        MomentSample {
            z: self.z,
            moment: self.moment,
        }
    }
}

/// The experiment dataset: everything reconstruction needs to consume the
/// simulated measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetFile {
    pub grid: GridSpec,
    pub kappa: f64,
    pub band_radius: f64,
    pub lattice_step: f64,
    pub probes: ProbeRegime,
    pub partition: Option<BoundaryPartition>,
    pub records: Vec<MomentRecordDto>,
}

pub fn dataset_to_json(dataset: &DatasetFile) -> String {
    serde_json::to_string_pretty(dataset).expect("dataset serializes")
}

pub fn dataset_from_json(text: &str) -> Result<DatasetFile> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("dataset json: {e}")))
}

/// 16-bit big-endian binary PGM (P5), min-max normalized, rows top-down
/// (row 0 is y = 1). Returns the bytes with the recorded scale.
pub fn pgm16(grid: &Grid, values: &[f64]) -> (Vec<u8>, f64, f64) {
    let n = grid.n();
    assert_eq!(values.len(), n * n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 0.0;
    }
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut bytes = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for row in (0..n).rev() {
        for i in 0..n {
            let v = values[row * n + i];
            let t = ((v - lo) / span).clamp(0.0, 1.0);
            let px = (t * 65535.0).round() as u16;
            bytes.extend_from_slice(&px.to_be_bytes());
        }
    }
    (bytes, lo, hi)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub width: usize,
    pub height: usize,
    pub min: f64,
    pub max: f64,
    /// Which grid row the first pixel row holds.
    pub row0: String,
}

/// CSV rows `h,norm,fit` for a decay ladder with its fitted line.
pub fn decay_csv(samples: &[(f64, f64)], slope: f64, intercept: f64) -> String {
    let mut out = String::from("h,norm,fit\n");
    for &(h, norm) in samples {
        let fit = (slope / h + intercept).exp();
        out.push_str(&format!("{h},{norm},{fit}\n"));
    }
    out
}

/// CSV rows `modes,residual` for a Runge ladder.
pub fn ladder_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("modes,residual\n");
    for &(n, r) in rows {
        out.push_str(&format!("{n},{r}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridKind};

    #[test]
    fn grid_json_roundtrip() {
        let g = build_grid(GridKind::Rectangle, 9).unwrap();
        let text = grid_to_json(&g);
        assert_eq!(text, r#"{"kind":"rectangle","n":9}"#);
        let back = grid_from_json(&text).unwrap();
        assert_eq!(back.n(), 9);
        assert!(grid_from_json(r#"{"kind":"rectangle","n":2}"#).is_err());
    }

    #[test]
    fn boundary_csv_has_one_row_per_node() {
        let g = build_grid(GridKind::Rectangle, 5).unwrap();
        let f = g.boundary_from_fn(|[x, y]| Complex64::new(x, y));
        let text = boundary_to_csv(&g, &f);
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + g.boundary_count());
        assert_eq!(lines[0], "index,s,re,im");
        assert_eq!(lines[1], "0,0,0,0");
    }

    #[test]
    fn pgm_is_sixteen_bit_big_endian() {
        let g = build_grid(GridKind::Rectangle, 4).unwrap();
        let mut values = vec![0.0; 16];
        values[12] = 2.0; // node (0, 3): top-left pixel
        let (bytes, lo, hi) = pgm16(&g, &values);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 2.0);
        let header = b"P5\n4 4\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let body = &bytes[header.len()..];
        assert_eq!(body.len(), 16 * 2);
        // first pixel is the top-left: value 2.0 -> 65535
        assert_eq!([body[0], body[1]], 65535u16.to_be_bytes());
        assert_eq!([body[2], body[3]], 0u16.to_be_bytes());
    }

    #[test]
    fn dataset_json_roundtrip_preserves_records() {
        use crate::dnmap::{MomentMethod, MomentRecord};
        let g = build_grid(GridKind::Rectangle, 5).unwrap();
        let f = g.boundary_from_fn(|[x, _]| Complex64::new(x, -x));
        let record = MomentRecord {
            f1: f.clone(),
            f2: f.clone(),
            f0: f.clone(),
            eps: 1e-3,
            moment: Complex64::new(0.25, -0.5),
            method: MomentMethod::Analytic,
        };
        let dataset = DatasetFile {
            grid: GridSpec {
                kind: GridKind::Rectangle,
                n: 5,
            },
            kappa: 2.0,
            band_radius: 4.0,
            lattice_step: 1.0,
            probes: ProbeRegime::Real,
            partition: None,
            records: vec![MomentRecordDto::new([1.0, -1.0], &record)],
        };
        let text = dataset_to_json(&dataset);
        let back = dataset_from_json(&text).unwrap();
        assert_eq!(back.records.len(), 1);
        assert_eq!(back.records[0].z, [1.0, -1.0]);
        assert_eq!(back.records[0].moment, [0.25, -0.5]);
        let f1 = back.records[0].f1.into_fn(&g).unwrap();
        assert_eq!(f1.values, f.values);
        // identical inputs produce byte-identical output
        assert_eq!(text, dataset_to_json(&back));
    }
}
