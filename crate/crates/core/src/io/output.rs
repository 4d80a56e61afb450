//! Text writers for grids, cuts and the JSON summary.
//!
//! Every file starts with a comment block carrying the format version and the full
//! resolved configuration. Floating-point values are written as `{:.8e}`, i.e. nine
//! significant digits, which together with deterministic inputs makes reruns
//! byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use super::manifest::{emit_config, RunManifest};
use crate::analysis::CutProfile;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Suffix appended to files of a run that did not complete.
pub const PARTIAL_SUFFIX: &str = ".partial";

/// Nine significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

/// Comment block opening every emitted text file.
pub fn file_header(manifest: &RunManifest) -> String {
    let mut out = format!("# biphoton format_version={}\n", manifest.format_version);
    for line in emit_config(manifest).lines() {
        out.push_str("# config: ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Row-major `x1, x2, value` listing of a grid; `x1` is the slow index.
pub fn grid_csv<G: Grid<f64> + ?Sized>(header: &str, grid: &G, integer_values: bool) -> String {
    let (n1, n2) = grid.shape();
    let mut out = String::with_capacity(header.len() + n1 * n2 * 48);
    out.push_str(header);
    out.push_str("# x1_m,x2_m,value\n");
    let (c1, c2) = (grid.centres1(), grid.centres2());
    for (i, &x1) in c1.iter().enumerate() {
        for (j, &x2) in c2.iter().enumerate() {
            let v = grid.value(i, j);
            let value = if integer_values {
                format!("{}", v as u64)
            } else {
                format_value(v)
            };
            out.push_str(&format!(
                "{},{},{}\n",
                format_value(x1),
                format_value(x2),
                value
            ));
        }
    }
    out
}

/// Cut profile with its error-bar column (zero for noiseless sources).
pub fn cut_csv(header: &str, cut: &CutProfile<f64>) -> String {
    let mut out = String::from(header);
    out.push_str(&format!("# cut: {}\n# x_m,y,y_err\n", cut.kind()));
    for (k, (&x, &y)) in cut.x().iter().zip(cut.y()).enumerate() {
        let err = cut.y_err().map_or(0.0, |e| e[k]);
        out.push_str(&format!(
            "{},{},{}\n",
            format_value(x),
            format_value(y),
            format_value(err)
        ));
    }
    out
}

/// Whitespace-separated two-column version of a cut for plotting tools.
pub fn cut_dat(header: &str, cut: &CutProfile<f64>) -> String {
    let mut out = String::from(header);
    out.push_str(&format!("# cut: {}\n# x_m y\n", cut.kind()));
    for (&x, &y) in cut.x().iter().zip(cut.y()) {
        out.push_str(&format!("{} {}\n", format_value(x), format_value(y)));
    }
    out
}

/// Singles counts of both detectors against the (shared) bin centres.
pub fn singles_csv(header: &str, centres: &[f64], singles1: &[u64], singles2: &[u64]) -> String {
    let mut out = String::from(header);
    out.push_str("# x_m,singles_d1,singles_d2\n");
    for ((&x, s1), s2) in centres.iter().zip(singles1).zip(singles2) {
        out.push_str(&format!("{},{s1},{s2}\n", format_value(x)));
    }
    out
}

/// Writes the files of one run and remembers them so a failed run can be marked.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let probe = root.join(".biphoton-write-probe");
        fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
        fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.root.join(name);
        // A stale marker from an earlier failed run would contradict this one.
        let _ = fs::remove_file(partial_path(&path));
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Renames every file written so far to `<name>.partial`.
    pub fn mark_partial(&mut self) -> Result<()> {
        for path in &mut self.written {
            let target = partial_path(path);
            fs::rename(&*path, &target).map_err(|e| Error::io(&*path, e))?;
            *path = target;
        }
        Ok(())
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(PARTIAL_SUFFIX);
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_value(1.0), "1.00000000e0");
        assert_eq!(format_value(-3e-3), "-3.00000000e-3");
        assert_eq!(format_value(0.1234567891234), "1.23456789e-1");
    }

    #[test]
    fn partial_marking() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("run")).unwrap();
        out.write("a.csv", "1\n").unwrap();
        out.mark_partial().unwrap();
        assert!(dir.path().join("run/a.csv.partial").exists());
        assert!(!dir.path().join("run/a.csv").exists());
        // A clean rewrite removes the stale marker.
        let mut out = OutputDir::create(dir.path().join("run")).unwrap();
        out.write("a.csv", "1\n").unwrap();
        assert!(!dir.path().join("run/a.csv.partial").exists());
    }
}
