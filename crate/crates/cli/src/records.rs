//! Sweep records and the CSV emission contract.
//!
//! Every sweep CSV carries the same thirteen columns. Values are printed
//! fixed-point with nine significant digits, so files are byte-identical
//! across reruns and round-trip through any CSV reader to better than 1e−8
//! relative. Non-converged rows keep their parameter cells but leave every
//! decision cell blank; nothing downstream can mistake them for results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tesc_core::{BoundaryPoint, Structure};

/// Column header shared by every sweep CSV.
pub const SWEEP_HEADER: &str = "structure,param_name,param_value,y,e,b,pi_r,pi_pc,pi_hq,\
foc_residual,boundary_flag,converged,iterations";

/// Column header of boundary CSVs; `beta` is blank at markup levels where
/// the scan found no instrument-ranking crossing.
pub const BOUNDARY_HEADER: &str = "alpha,beta,crossings";

/// One sweep point. `outcome` is `None` when the solve failed or did not
/// converge.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub structure: Structure,
    pub param_name: String,
    pub param_value: f64,
    pub outcome: Option<SweepOutcome>,
}

/// Decision values of a converged solve. `b` and `pi_pc` exist only under
/// the limited-risk structure; `foc_residual` is the effort first-order
/// condition under the commissionaire structure and the share-formula
/// residual under the limited-risk structure.
#[derive(Debug, Clone, Copy)]
pub struct SweepOutcome {
    pub y: f64,
    pub e: f64,
    pub b: Option<f64>,
    pub pi_r: f64,
    pub pi_pc: Option<f64>,
    pub pi_hq: f64,
    pub foc_residual: f64,
    pub boundary: bool,
    pub iterations: usize,
}

/// Fixed-point decimal with nine significant digits: zero prints as `0`,
/// non-finite values print as an empty cell.
pub fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return String::new();
    }
    let decimals = (8 - v.abs().log10().floor() as i64).max(0) as usize;
    format!("{v:.decimals$}")
}

fn opt9(v: Option<f64>) -> String {
    v.map(sig9).unwrap_or_default()
}

impl SweepRecord {
    fn line(&self) -> String {
        let head = format!(
            "{},{},{}",
            self.structure.label(),
            self.param_name,
            sig9(self.param_value)
        );
        match self.outcome {
            Some(o) => format!(
                "{head},{},{},{},{},{},{},{},{},true,{}",
                sig9(o.y),
                sig9(o.e),
                opt9(o.b),
                sig9(o.pi_r),
                opt9(o.pi_pc),
                sig9(o.pi_hq),
                sig9(o.foc_residual),
                o.boundary,
                o.iterations,
            ),
            None => format!("{head},,,,,,,,,false,"),
        }
    }
}

/// Writes sweep records in input order, line-feed terminated.
pub fn write_sweep_csv(records: &[SweepRecord], path: &Path) -> std::io::Result<()> {
    debug_assert!(!records.is_empty());
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SWEEP_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for r in records {
        w.write_all(r.line().as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Writes dominance-boundary points in input order.
pub fn write_boundary_csv(points: &[BoundaryPoint], path: &Path) -> std::io::Result<()> {
    debug_assert!(!points.is_empty());
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(BOUNDARY_HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for p in points {
        let line = format!("{},{},{}\n", sig9(p.alpha), opt9(p.beta), p.crossings);
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}
