//! CSV and JSON emission for the named file formats.
//!
//! CSV conventions: `,` separator, `.` decimal point, 17 significant digits
//! so oracle comparisons are bit-stable, and infinities spelled `inf`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::exact_dynamics::WignerGrid;
use crate::tomography::QuadratureSet;

/// Full-precision float formatting: 17 significant digits, `inf` literals.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// WignerGrid CSV: one `(q, p, w)` row per cell, q-major.
pub fn write_wigner_csv(grid: &WignerGrid, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "q,p,w")?;
    for (iq, &q) in grid.q_axis.iter().enumerate() {
        for (ip, &p) in grid.p_axis.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                fmt_float(q),
                fmt_float(p),
                fmt_float(grid.values[[iq, ip]])
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON sidecar carrying the grid metadata needed to reinterpret the CSV.
pub fn write_wigner_sidecar(grid: &WignerGrid, path: &Path) -> Result<()> {
    let meta = serde_json::json!({
        "t": grid.t,
        "big_n": grid.big_n,
        "n_q": grid.q_axis.len(),
        "n_p": grid.p_axis.len(),
        "q_min": grid.q_axis.first(),
        "q_max": grid.q_axis.last(),
        "p_min": grid.p_axis.first(),
        "p_max": grid.p_axis.last(),
        "rescaling": "q = sqrt(N)·Q, p = Pi/sqrt(N)",
        "layout": "q-major rows in the companion csv",
    });
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &meta).map_err(std::io::Error::other)?;
    w.flush()?;
    Ok(())
}

/// QuadratureSet CSV: `(angle, x, probability)` rows, angle-major.
pub fn write_quadratures_csv(quads: &QuadratureSet, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "angle,x,probability")?;
    for (a, dist) in quads.angles.iter().zip(&quads.distributions) {
        for (&x, &p) in quads.x_axis.iter().zip(dist) {
            writeln!(w, "{},{},{}", fmt_float(*a), fmt_float(x), fmt_float(p))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sampled quadratures CSV: `(angle, sample_index, value)` rows.
pub fn write_samples_csv(
    angles: &[f64],
    samples: &[Vec<f64>],
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "angle,sample_index,value")?;
    for (a, values) in angles.iter().zip(samples) {
        for (i, &v) in values.iter().enumerate() {
            writeln!(w, "{},{},{}", fmt_float(*a), i, fmt_float(v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Checksum every file in `names` (relative to `dir`).
pub fn checksum_files(dir: &Path, names: &[String]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for name in names {
        map.insert(name.clone(), sha256_hex(&dir.join(name))?);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        let x = 0.1 + 0.2;
        let parsed: f64 = fmt_float(x).parse().unwrap();
        assert_eq!(parsed, x, "17 significant digits round-trip exactly");
    }
}
