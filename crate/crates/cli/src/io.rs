//! File I/O helpers: sample loading, atomic output, CSV formatting.

use std::fs;
use std::path::{Path, PathBuf};

use confdiv_core::robustness::SweepRow;
use confdiv_core::sample::SampleFile;
use confdiv_core::{Error, Result, Sample};

pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read `{}`: {e}", path.display())))?;
    let file: SampleFile = serde_json::from_str(&text).map_err(|e| {
        Error::InvalidInput(format!(
            "`{}`: field `points` must be a JSON array of points ({e})",
            path.display()
        ))
    })?;
    Sample::from_file(file)
}

/// Write atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp: PathBuf = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .map_err(|e| Error::InvalidInput(format!("cannot write `{}`: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        Error::InvalidInput(format!("cannot rename onto `{}`: {e}", path.display()))
    })?;
    Ok(())
}

/// Emit to the file when given, to stdout otherwise.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

/// 17 significant digits, the round-trip-exact width of an f64.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("spec,side,epsilon,outlier,delta_norm,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.spec,
            r.side,
            fmt_real(r.epsilon),
            fmt_real(r.outlier),
            fmt_real(r.delta_norm),
            fmt_real(r.bound)
        ));
    }
    out
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("field expects comma-separated reals, got `{text}`"))
            })
        })
        .collect()
}
