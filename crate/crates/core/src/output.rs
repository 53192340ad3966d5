//! Deterministic text output: fixed float formatting, metadata headers and
//! atomic file replacement.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Twelve significant digits in scientific notation.
pub fn fmt(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(",")
}

/// Make free text safe for a single CSV field.
pub fn csv_text(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' => ' ',
            c => c,
        })
        .collect()
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Prefix every line of `meta` with `# `.
pub fn comment_block(meta: &str) -> String {
    meta.lines().map(|l| format!("# {l}\n")).collect()
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Write `contents` to a temporary sibling and rename it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = sibling(path, ".tmp");
    let write = || -> std::io::Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()
    };
    write().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Either an atomically replaced file or standard output.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

/// Incrementally written table that survives interruption.
///
/// Rows go to `<path>.partial` and are flushed one by one; `finish` renames
/// the file into place. Reopening with the same header resumes after the
/// last complete row.
pub struct ResumableTable {
    path: PathBuf,
    partial: PathBuf,
    file: File,
    done: usize,
}

impl ResumableTable {
    /// Open for writing. Returns the table and the number of data rows that
    /// are already complete. A finished file with an identical header counts
    /// as fully complete; a mismatching header is an error.
    pub fn open(path: &Path, header: &str) -> Result<Self> {
        let partial = sibling(path, ".partial");
        if !partial.exists() && path.exists() {
            // A finished run: continue from it so a rerun is a no-op.
            fs::rename(path, &partial).map_err(|e| io_err(path, e))?;
        }
        let mut done = 0;
        if partial.exists() {
            let (rows, keep) = Self::scan(&partial, header)?;
            done = rows;
            let f = OpenOptions::new()
                .write(true)
                .open(&partial)
                .map_err(|e| io_err(&partial, e))?;
            f.set_len(keep).map_err(|e| io_err(&partial, e))?;
        } else {
            fs::write(&partial, header).map_err(|e| io_err(&partial, e))?;
        }
        let file = OpenOptions::new()
            .append(true)
            .open(&partial)
            .map_err(|e| io_err(&partial, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            partial,
            file,
            done,
        })
    }

    /// Count complete data rows and the byte length that keeps only them.
    fn scan(partial: &Path, header: &str) -> Result<(usize, u64)> {
        let f = File::open(partial).map_err(|e| io_err(partial, e))?;
        let mut reader = BufReader::new(f);
        let mut buf = String::new();
        let mut consumed = 0usize;
        let header_len = header.len();
        while consumed < header_len {
            buf.clear();
            let n = reader.read_line(&mut buf).map_err(|e| io_err(partial, e))?;
            if n == 0 {
                break;
            }
            if !header[consumed..].starts_with(buf.as_str()) {
                return Err(Error::Config(format!(
                    "{} was produced with different settings; remove it to start over",
                    partial.display()
                )));
            }
            consumed += n;
        }
        if consumed < header_len {
            // Interrupted while writing the header itself.
            fs::write(partial, header).map_err(|e| io_err(partial, e))?;
            return Ok((0, header_len as u64));
        }
        let mut rows = 0;
        let mut keep = consumed as u64;
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf).map_err(|e| io_err(partial, e))?;
            if n == 0 || !buf.ends_with('\n') {
                break;
            }
            rows += 1;
            keep += n as u64;
        }
        Ok((rows, keep))
    }

    pub fn completed(&self) -> usize {
        self.done
    }

    pub fn append(&mut self, line: &str) -> Result<()> {
        writeln!(self.file, "{line}")
            .and_then(|_| self.file.flush())
            .map_err(|e| io_err(&self.partial, e))?;
        self.done += 1;
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        self.file.sync_all().map_err(|e| io_err(&self.partial, e))?;
        fs::rename(&self.partial, &self.path).map_err(|e| io_err(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt(1.0), "1.00000000000e0");
        assert_eq!(fmt(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(fmt(9.0e8), "9.00000000000e8");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert!(!dir.path().join("a.txt.tmp").exists());
    }

    #[test]
    fn resume_skips_complete_rows_and_drops_torn_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let header = "# meta\nx,y\n";
        {
            let mut t = ResumableTable::open(&p, header).unwrap();
            assert_eq!(t.completed(), 0);
            t.append("1,2").unwrap();
            t.append("3,4").unwrap();
        }
        let partial = dir.path().join("s.csv.partial");
        let mut f = OpenOptions::new().append(true).open(&partial).unwrap();
        f.write_all(b"5,").unwrap();
        drop(f);

        let mut t = ResumableTable::open(&p, header).unwrap();
        assert_eq!(t.completed(), 2);
        t.append("5,6").unwrap();
        t.finish().unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "# meta\nx,y\n1,2\n3,4\n5,6\n");

        let t = ResumableTable::open(&p, header).unwrap();
        assert_eq!(t.completed(), 3);
        t.finish().unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "# meta\nx,y\n1,2\n3,4\n5,6\n");

        assert!(ResumableTable::open(&p, "# other\nx,y\n").is_err());
    }
}
