//! File emission: CSV with 17 significant digits, pretty JSON, `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Failure;

/// `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<PathBuf, Failure>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::io(&path, e))?;
        w.write_record(header).map_err(|e| Failure::io(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| Failure::io(&path, e))?;
        }
        w.flush().map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }

    /// Writes `meta.json`; the only output that varies between identical runs.
    pub fn finish(mut self, config: &RunConfig, wall: Duration) -> Result<Vec<String>, Failure> {
        #[derive(Serialize)]
        struct Meta<'a> {
            tool: &'static str,
            version: &'static str,
            config: &'a RunConfig,
            wall_time_seconds: f64,
            outputs: &'a [String],
        }
        let outputs = self.written.clone();
        self.json(
            "meta.json",
            &Meta {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                config,
                wall_time_seconds: wall.as_secs_f64(),
                outputs: &outputs,
            },
        )?;
        Ok(self.written)
    }
}
