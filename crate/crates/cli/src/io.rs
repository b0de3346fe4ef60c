//! Paths where `-` stands for stdin or stdout.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliResult, Context};

pub fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

pub fn read_all(path: &Path) -> CliResult<Vec<u8>> {
    if is_stdio(path) {
        let mut buf = Vec::new();
        io::stdin().lock().read_to_end(&mut buf).at("<stdin>")?;
        Ok(buf)
    } else {
        fs::read(path).at(path)
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    let bytes = read_all(path)?;
    String::from_utf8(bytes).map_err(|e| crate::error::CliError::data(format!("{}: {e}", path.display())))
}

pub fn write_all(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if is_stdio(path) {
        let mut out = io::stdout().lock();
        out.write_all(bytes).at("<stdout>")?;
        out.flush().at("<stdout>")
    } else {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).at(dir)?;
        }
        fs::write(path, bytes).at(path)
    }
}

/// `<output>.manifest.toml`, or `None` when the output goes to stdout.
pub fn manifest_beside(output: &Path) -> Option<PathBuf> {
    if is_stdio(output) {
        return None;
    }
    let mut name = output.file_name()?.to_os_string();
    name.push(".manifest.toml");
    Some(output.with_file_name(name))
}
