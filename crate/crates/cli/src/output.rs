//! Deterministic formatting and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// 17 significant digits, scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of already formatted cells, with a config comment line and header.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new<C: Serialize>(config: &C, header: &[&str]) -> Self {
        let mut text = String::new();
        text.push_str("# config: ");
        text.push_str(&serde_json::to_string(config).expect("config serializes"));
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let joined: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&joined.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

/// Write to `path` via a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
