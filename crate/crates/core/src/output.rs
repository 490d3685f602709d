//! CSV and JSON writers. Every CSV starts with a header row and prints numbers
//! with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coupling::Simulation;
use crate::diagnostics::{ChainMargins, DiagnosticsRecord};
use crate::error::Result;
use crate::grid::PhaseGrid;

pub const DIAGNOSTICS_HEADER: &str = "step,t,mass,kinetic,field,total,p_of_t,sup_dtA,sup_dxdtA,sup_j,f_max,undershoot,margin_i,margin_ii,margin_iii,margin_envelope";
pub const FIELDS_HEADER: &str = "t,x,A,dtA,dxA,B_plus,B_minus";
pub const MOMENTS_HEADER: &str = "t,x,rho,j";
pub const SNAPSHOT_HEADER: &str = "x,v,f";

/// `{:.16e}`: 17 significant digits, enough to round-trip every `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// One row per record; the chain margins are matched by position.
pub fn write_diagnostics(w: &mut impl Write, records: &[DiagnosticsRecord], margins: &[ChainMargins]) -> Result<()> {
    writeln!(w, "{DIAGNOSTICS_HEADER}")?;
    for (r, m) in records.iter().zip(margins) {
        let cols = [
            r.t,
            r.mass,
            r.kinetic,
            r.field,
            r.total,
            r.p_of_t,
            r.sup_dta,
            r.sup_dxdta,
            r.sup_j,
            r.f_max,
            r.undershoot,
            m.field_from_current,
            m.current_from_support,
            m.support_from_field,
            m.envelope,
        ];
        write!(w, "{}", r.step)?;
        for c in cols {
            write!(w, ",{}", num(c))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Field rows of the current state.
pub fn write_fields_rows(w: &mut impl Write, sim: &Simulation) -> Result<()> {
    let g = &sim.grid;
    let fs = &sim.state.fields;
    let t = num(sim.time());
    for i in 0..g.nx1() {
        let (p, m) = (fs.b_plus[i], fs.b_minus[i]);
        writeln!(
            w,
            "{t},{},{},{},{},{},{}",
            num(g.x.node(i)),
            num(fs.a[i]),
            num(0.5 * (p + m)),
            num(0.5 * (p - m)),
            num(p),
            num(m)
        )?;
    }
    Ok(())
}

/// Moment rows of the current state.
pub fn write_moments_rows(w: &mut impl Write, sim: &Simulation) -> Result<()> {
    let g = &sim.grid;
    let t = num(sim.time());
    for i in 0..g.nx1() {
        writeln!(w, "{t},{},{},{}", num(g.x.node(i)), num(sim.state.rho[i]), num(sim.state.j[i]))?;
    }
    Ok(())
}

/// `x, v, f` for every node, x-major.
pub fn write_snapshot(w: &mut impl Write, grid: &PhaseGrid, f: &[f64]) -> Result<()> {
    writeln!(w, "{SNAPSHOT_HEADER}")?;
    for i in 0..grid.nx1() {
        let x = num(grid.x.node(i));
        for j in 0..grid.nv1() {
            writeln!(w, "{x},{},{}", num(grid.v.node(j)), num(f[grid.idx(i, j)]))?;
        }
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Streams the per-step files of an evolve run into one directory.
pub struct RunWriter {
    dir: PathBuf,
    snapshot_every: usize,
    csv: bool,
    json: bool,
    fields: Option<BufWriter<File>>,
    moments: Option<BufWriter<File>>,
}

impl RunWriter {
    pub fn new(dir: &Path, snapshot_every: usize, csv: bool, json: bool) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let (mut fields, mut moments) = (None, None);
        if csv {
            let mut f = create(&dir.join("fields.csv"))?;
            writeln!(f, "{FIELDS_HEADER}")?;
            let mut m = create(&dir.join("moments.csv"))?;
            writeln!(m, "{MOMENTS_HEADER}")?;
            fields = Some(f);
            moments = Some(m);
        }
        Ok(RunWriter { dir: dir.to_path_buf(), snapshot_every, csv, json, fields, moments })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write the snapshot files for the current step when it falls on the
    /// cadence or is the last step.
    pub fn observe(&mut self, sim: &Simulation) -> Result<()> {
        let step = sim.state.step;
        let due = self.snapshot_every > 0 && step.is_multiple_of(self.snapshot_every);
        if !self.csv || !(due || step == sim.grid.n_steps) {
            return Ok(());
        }
        if let Some(f) = self.fields.as_mut() {
            write_fields_rows(f, sim)?;
        }
        if let Some(m) = self.moments.as_mut() {
            write_moments_rows(m, sim)?;
        }
        let mut w = create(&self.dir.join(format!("f_{step}.csv")))?;
        write_snapshot(&mut w, &sim.grid, &sim.state.distribution.values)?;
        w.flush()?;
        Ok(())
    }

    pub fn finish(mut self, records: &[DiagnosticsRecord], margins: &[ChainMargins], audit: &impl Serialize) -> Result<()> {
        for w in [self.fields.as_mut(), self.moments.as_mut()].into_iter().flatten() {
            w.flush()?;
        }
        if self.csv {
            let mut w = create(&self.dir.join("diagnostics.csv"))?;
            write_diagnostics(&mut w, records, margins)?;
            w.flush()?;
        }
        if self.json {
            write_json(&self.dir.join("audit.json"), audit)?;
        }
        Ok(())
    }
}
