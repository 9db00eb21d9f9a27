//! CSV output and snapshot input.
//!
//! Floats are written with `{}` (shortest round-trip form), lines end in LF
//! and every file starts with a header row.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::dynamics::{MaxRecord, Trajectory};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::selfsim::{EnergyTrace, RescaledFrame};
use crate::steady::BranchPoint;
use crate::sweep::SweepRow;

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn num(v: f64) -> String {
    // adding zero turns -0 into 0
    format!("{}", v + 0.0)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn flag(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

/// `node_index, x_or_r, value`.
pub fn write_field(path: &Path, field: &Field) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["node_index", "x_or_r", "value"])?;
    for (i, (x, v)) in field.mesh().nodes().iter().zip(field.values()).enumerate() {
        w.write_record([i.to_string(), num(*x), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `lambda, sup_w, mu1`.
pub fn write_branch(path: &Path, points: &[BranchPoint]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lambda", "sup_w", "mu1"])?;
    for p in points {
        w.write_record([num(p.lambda), num(p.sup_w), num(p.mu1)])?;
    }
    w.flush()?;
    Ok(())
}

/// One `(x, 1 - u)` file per stored snapshot plus `index.csv` listing
/// `index, t, file`. Returns every written path.
pub fn write_snapshots(dir: &Path, trajectory: &Trajectory) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut index = writer(&dir.join("index.csv"))?;
    index.write_record(["index", "t", "file"])?;
    for (k, (t, field)) in trajectory.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:06}.csv");
        let path = dir.join(&name);
        let mut w = writer(&path)?;
        w.write_record(["x", "one_minus_u"])?;
        for (x, u) in field.mesh().nodes().iter().zip(field.values()) {
            w.write_record([num(*x), num(1.0 - u)])?;
        }
        w.flush()?;
        index.write_record([k.to_string(), num(*t), name])?;
        written.push(path);
    }
    index.flush()?;
    written.insert(0, dir.join("index.csv"));
    Ok(written)
}

/// Reads snapshots written by [`write_snapshots`] back onto `mesh`.
pub fn read_snapshots(dir: &Path, mesh: &Arc<Mesh>, lambda: f64) -> Result<Trajectory> {
    let index_path = dir.join("index.csv");
    if !index_path.exists() {
        return Err(Error::MissingData(format!("{} not found", index_path.display())));
    }
    let mut snapshots = Vec::new();
    for rec in csv::Reader::from_path(&index_path)?.records() {
        let rec = rec?;
        let t: f64 = parse(&rec[1])?;
        let mut values = Vec::with_capacity(mesh.len());
        for row in csv::Reader::from_path(dir.join(&rec[2]))?.records() {
            let row = row?;
            values.push(1.0 - parse(&row[1])?);
        }
        if values.len() != mesh.len() {
            return Err(Error::IncompatibleGeometry(format!(
                "snapshot {} has {} nodes, mesh has {}",
                &rec[2],
                values.len(),
                mesh.len()
            )));
        }
        snapshots.push((t, Field::new(mesh.clone(), values)?));
    }
    if snapshots.is_empty() {
        return Err(Error::MissingData("snapshot index is empty".into()));
    }
    Ok(Trajectory {
        lambda,
        snapshots,
        max_history: Vec::new(),
        liapunov_history: Vec::new(),
    })
}

fn parse(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
}

/// `t, sup_u, argmax` with argmax coordinates joined by `;`.
pub fn write_max_history(path: &Path, history: &[MaxRecord]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "sup_u", "argmax"])?;
    for r in history {
        let arg: Vec<String> = r.argmax.iter().map(|x| num(*x)).collect();
        w.write_record([num(r.t), num(r.sup_u), arg.join(";")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "lambda",
        "quenched",
        "T_measured",
        "T_L",
        "T1_arctan",
        "T1_simplified",
        "gg2",
        "lower_1_7",
        "upper_1_7",
        "location_lhs",
        "lower_ordering_ok",
        "upper_ordering_ok",
        "failure",
    ])?;
    for r in rows {
        w.write_record([
            num(r.lambda),
            r.quenched.to_string(),
            opt(r.t_measured),
            opt(r.t_lower),
            opt(r.t1_arctan),
            opt(r.t1_simplified),
            opt(r.bound_gg2),
            opt(r.lower_1_7),
            opt(r.upper_1_7),
            opt(r.location_lhs),
            flag(r.lower_ordering_ok),
            flag(r.upper_ordering_ok),
            r.failure.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `s, y, w`, preceded by `# ` comment lines when `warnings` is nonempty.
pub fn write_frame(path: &Path, frame: &RescaledFrame, warnings: &[String]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut out = String::new();
    for line in warnings {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["s", "y", "w"])?;
    for smp in &frame.samples {
        for (y, v) in smp.y.iter().zip(&smp.w) {
            w.write_record([num(smp.s), num(*y), num(*v)])?;
        }
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    fs::write(path, out)?;
    Ok(())
}

/// `s, E, k_a, E_of_k, w_center`.
pub fn write_energy(path: &Path, trace: &EnergyTrace) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["s", "E", "k_a", "E_of_k", "w_center"])?;
    for r in &trace.rows {
        w.write_record([num(r.s), num(r.energy), num(trace.k_a), num(r.energy_of_k), num(r.w_center)])?;
    }
    w.flush()?;
    Ok(())
}
