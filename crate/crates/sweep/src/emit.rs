//! Serialization of sweep records: CSV, JSON lines, a run manifest and
//! optional per-point matrix dumps.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Dim, Matrix, RawStorage};
use optomech_core::conventions::CONVENTIONS;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Output, SweepConfig};
use crate::run::{Reason, SweepRecord};

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("nothing to emit")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
    fn jsonl(self) -> bool {
        matches!(self, Format::Jsonl | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Int(u64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl Cell {
    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Float)
    }

    /// CSV text; floats carry 12 significant digits.
    pub fn csv_text(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format!("{x:.11e}"),
            Cell::Float(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Str(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Null => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Bool(b) => json!(b),
            Cell::Str(s) => json!(s),
        }
    }
}

/// Column names and per-record cells, identical for every row of a sweep.
pub fn table(cfg: &SweepConfig, records: &[SweepRecord]) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(cfg.axes.iter().map(|a| a.parameter.clone()));
    header.push("reason".into());
    let steady = cfg.wants(Output::SteadyState);
    let stab = cfg.wants(Output::Stability);
    let mm = cfg.wants(Output::EnMirrorMirror);
    let du = cfg.wants(Output::Duan);
    let bb = cfg.wants(Output::EnBeamBeam);
    if steady {
        header.extend(
            [
                "n_roots",
                "root_index",
                "q1_s",
                "q2_s",
                "n1",
                "n2",
                "delta_eff1_over_omega_m",
                "delta_eff2_over_omega_m",
                "steady_residual",
            ]
            .map(String::from),
        );
    }
    if stab {
        header.extend(["stable_eigen", "stable_rh", "max_re_eig_over_omega_m"].map(String::from));
    }
    if mm {
        header.extend(["EN_mirror_mirror", "eta_minus_mirror_mirror"].map(String::from));
    }
    if du {
        header.push("duan_mirror_mirror".into());
        if bb {
            header.push("duan_beam_beam".into());
        }
    }
    if bb {
        header.extend(["EN_beam_beam", "S_out"].map(String::from));
    }
    header.extend(["lyapunov_residual", "physicality_min_eig", "message"].map(String::from));

    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![Cell::Int(r.index as u64)];
            row.extend(r.axis_values.iter().map(|&v| Cell::Float(v)));
            row.push(Cell::Str(r.reason.code().into()));
            if steady {
                match &r.steady {
                    Some(s) => row.extend([
                        Cell::Int(s.n_roots as u64),
                        Cell::Int(s.root_index as u64),
                        Cell::Float(s.q_s[0]),
                        Cell::Float(s.q_s[1]),
                        Cell::Float(s.intensity[0]),
                        Cell::Float(s.intensity[1]),
                        Cell::Float(s.delta_eff_over_omega_m[0]),
                        Cell::Float(s.delta_eff_over_omega_m[1]),
                        Cell::Float(s.residual),
                    ]),
                    None => row.extend(std::iter::repeat_n(Cell::Null, 9)),
                }
            }
            if stab {
                match &r.stability {
                    Some(s) => row.extend([
                        Cell::Bool(s.stable_eigen),
                        Cell::Bool(s.stable_rh),
                        Cell::Float(s.max_re_eig_over_omega_m),
                    ]),
                    None => row.extend(std::iter::repeat_n(Cell::Null, 3)),
                }
            }
            let m = &r.measures;
            if mm {
                row.push(Cell::opt(m.en_mirror_mirror));
                row.push(Cell::opt(m.eta_minus_mirror_mirror));
            }
            if du {
                row.push(Cell::opt(m.duan_mirror_mirror));
                if bb {
                    row.push(Cell::opt(m.duan_beam_beam));
                }
            }
            if bb {
                row.push(Cell::opt(m.en_beam_beam));
                row.push(Cell::opt(m.s_out));
            }
            row.push(Cell::opt(m.lyapunov_residual));
            row.push(Cell::opt(m.physicality));
            row.push(Cell::Str(r.message.clone()));
            row
        })
        .collect();
    (header, rows)
}

fn spectrum_table(cfg: &SweepConfig, records: &[SweepRecord]) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(cfg.axes.iter().map(|a| a.parameter.clone()));
    header.extend(
        [
            "omega_over_omega_m",
            "S_out",
            "EN_beam_beam",
            "duan_beam_beam",
        ]
        .map(String::from),
    );
    let rows = records
        .iter()
        .flat_map(|r| {
            r.spectrum.iter().map(move |s| {
                let mut row = vec![Cell::Int(r.index as u64)];
                row.extend(r.axis_values.iter().map(|&v| Cell::Float(v)));
                row.extend([
                    Cell::Float(s.omega_over_omega_m),
                    Cell::Float(s.s_out),
                    Cell::Float(s.en_beam_beam),
                    Cell::Float(s.duan_beam_beam),
                ]);
                row
            })
        })
        .collect();
    (header, rows)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmitError + '_ {
    move |source| EmitError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<Cell>]) -> Result<(), EmitError> {
    let csv_err = |source| EmitError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(Cell::csv_text))
            .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_jsonl(path: &Path, header: &[String], rows: &[Vec<Cell>]) -> Result<(), EmitError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        // Keys in column order.
        let fields: Vec<String> = header
            .iter()
            .zip(row)
            .map(|(k, c)| format!("{}:{}", Value::from(k.as_str()), c.json()))
            .collect();
        writeln!(w, "{{{}}}", fields.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write_matrix<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(
    path: &Path,
    m: &Matrix<f64, R, C, S>,
) -> Result<(), EmitError> {
    let mut text = String::new();
    for i in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.15e}", m[(i, j)]))
            .collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(io_err(path))
}

fn export_matrices(dir: &Path, records: &[SweepRecord]) -> Result<Vec<PathBuf>, EmitError> {
    let dir = dir.join("matrices");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut files = Vec::new();
    for r in records {
        let Some((model, cov)) = &r.matrices else {
            continue;
        };
        let stem = format!("point_{:05}", r.index);
        let drift = dir.join(format!("{stem}_drift.csv"));
        write_matrix(&drift, &model.drift)?;
        let diffusion = dir.join(format!("{stem}_diffusion.csv"));
        write_matrix(&diffusion, &model.diffusion)?;
        files.extend([drift, diffusion]);
        if let Some(v) = cov {
            let p = dir.join(format!("{stem}_covariance.csv"));
            write_matrix(&p, &v.matrix)?;
            files.push(p);
        }
    }
    Ok(files)
}

/// Writes all requested files into `dir` and returns their paths.
pub fn emit(
    dir: &Path,
    cfg: &SweepConfig,
    config_bytes: &[u8],
    records: &[SweepRecord],
    format: Format,
    matrices: bool,
) -> Result<Vec<PathBuf>, EmitError> {
    if records.is_empty() {
        return Err(EmitError::Empty);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    let (header, rows) = table(cfg, records);
    let spectrum = cfg
        .wants(Output::Spectrum)
        .then(|| spectrum_table(cfg, records));
    if format.csv() {
        let p = dir.join("records.csv");
        write_csv(&p, &header, &rows)?;
        files.push(p);
        if let Some((h, r)) = &spectrum {
            let p = dir.join("spectrum.csv");
            write_csv(&p, h, r)?;
            files.push(p);
        }
    }
    if format.jsonl() {
        let p = dir.join("records.jsonl");
        write_jsonl(&p, &header, &rows)?;
        files.push(p);
        if let Some((h, r)) = &spectrum {
            let p = dir.join("spectrum.jsonl");
            write_jsonl(&p, h, r)?;
            files.push(p);
        }
    }
    if matrices {
        files.extend(export_matrices(dir, records)?);
    }

    let count = |f: &dyn Fn(Reason) -> bool| records.iter().filter(|r| f(r.reason)).count();
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(config_bytes),
        "conventions_sha256": sha256_hex(CONVENTIONS.as_bytes()),
        "conventions": CONVENTIONS,
        "resolved_config": cfg,
        "points": records.len(),
        "ok": count(&|r| r == Reason::Ok),
        "unstable": count(&|r| r == Reason::Unstable),
        "failed": count(&Reason::is_failure),
        "files": files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect::<Vec<_>>(),
    });
    let p = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is valid JSON") + "\n";
    fs::write(&p, text).map_err(io_err(&p))?;
    files.push(p);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_have_twelve_significant_digits() {
        assert_eq!(Cell::Float(1.0 / 3.0).csv_text(), "3.33333333333e-1");
        assert_eq!(Cell::Float(-2.5e-7).csv_text(), "-2.50000000000e-7");
        assert_eq!(Cell::Null.csv_text(), "");
        assert_eq!(Cell::Float(f64::NAN).json(), Value::Null);
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
