//! Artifact writers. Numbers are printed in Rust's shortest round-trip form,
//! which is locale-free and deterministic.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

/// Formats a float for CSV; non-finite values become `inf`, `-inf` or `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

/// A JSON number, or the same strings as [`fmt_f64`] when not finite.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(fmt_f64(x))
    }
}

pub fn json_f64s(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_f64(x)).collect())
}

/// Space-separated 1-based profile, e.g. `2 1`.
pub fn fmt_profile(one_based: &[usize]) -> String {
    one_based.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Output directory that records every file written to it.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        let path = self.record(name);
        fs::write(path, text)?;
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain text, not listed among the deterministic artifacts.
    pub fn text(&self, name: &str, content: &str) -> Result<()> {
        fs::write(self.dir.join(name), content)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(1e-20), "0.00000000000000000001");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(json_f64(f64::INFINITY), Value::from("inf"));
        assert_eq!(json_f64(2.5), Value::from(2.5));
        assert_eq!(fmt_profile(&[2, 1]), "2 1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::create(&dir.path().join("x")).unwrap();
        a.csv("t.csv", &["a", "b"], vec![vec!["1".into(), "2 3".into()]]).unwrap();
        a.json("r.json", &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(a.written(), ["t.csv", "r.json"]);
        assert_eq!(fs::read_to_string(a.dir().join("t.csv")).unwrap(), "a,b\n1,2 3\n");
        assert_eq!(fs::read_to_string(a.dir().join("r.json")).unwrap(), "{\n  \"k\": 1\n}\n");
    }
}
