use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use orlicz_core::{EpsRecord, Field, SweepRecord};
use serde_json::Value;

fn create(dir: &Path, name: &str) -> std::io::Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_report(dir: &Path, report: &Value) -> std::io::Result<()> {
    let mut w = create(dir, "report.json")?;
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_field(dir: &Path, name: &str, u: &Field) -> std::io::Result<()> {
    let mut w = create(dir, name)?;
    u.write_csv(&mut w)?;
    w.flush()
}

pub fn write_with(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> std::io::Result<()> {
    let mut w = create(dir, name)?;
    body(&mut w)?;
    w.flush()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_ladder(dir: &Path, records: &[EpsRecord]) -> std::io::Result<()> {
    write_with(dir, "ladder.csv", |w| {
        writeln!(
            w,
            "eps,ell_eps,iterations,energy,dirichlet_eps,residual,phi_integral,flux_integral,w11,pairing,increment_w11,increment_w1phi"
        )?;
        for r in records {
            let b = &r.bound_monitor;
            writeln!(
                w,
                "{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
                r.eps,
                r.ell_eps,
                r.iterations,
                r.energy,
                r.dirichlet_eps,
                r.residual,
                b.phi_integral,
                b.flux_integral,
                b.w11,
                r.pairing,
                opt(r.increment_w11),
                opt(r.increment_w1phi)
            )?;
        }
        Ok(())
    })
}

pub fn write_sweeps(dir: &Path, name: &str, sweeps: &[SweepRecord]) -> std::io::Result<()> {
    write_with(dir, name, |w| {
        writeln!(w, "sweep,level,residual,cerami,gbar_integral,step")?;
        for s in sweeps {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{:e}",
                s.sweep, s.level, s.residual, s.cerami, s.gbar_integral, s.step
            )?;
        }
        Ok(())
    })
}
