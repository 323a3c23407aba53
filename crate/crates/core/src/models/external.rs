//! Replays a guess file produced by any other tool. Line order is taken as
//! the producer's descending-quality order.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use super::GuessSource;
use crate::error::{Error, Result};
use crate::io::{read_line, Line};

pub struct ExternalGuessStream {
    name: String,
    path: PathBuf,
    reader: BufReader<File>,
    buf: Vec<u8>,
    seen: Option<HashSet<String>>,
    invalid_lines: u64,
    suppressed: u64,
}

/// Opens `path` as a guess stream. With `dedupe_on_read`, a guess already
/// yielded is skipped instead of being yielded again.
pub fn open_external_stream(path: &Path, dedupe_on_read: bool) -> Result<ExternalGuessStream> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".into());
    Ok(ExternalGuessStream {
        name,
        path: path.to_owned(),
        reader: BufReader::with_capacity(1 << 16, file),
        buf: Vec::new(),
        seen: dedupe_on_read.then(HashSet::new),
        invalid_lines: 0,
        suppressed: 0,
    })
}

impl ExternalGuessStream {
    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_owned();
        self
    }

    /// Lines skipped because they were not valid UTF-8.
    pub fn invalid_lines(&self) -> u64 {
        self.invalid_lines
    }

    /// Repeats skipped by `dedupe_on_read`.
    pub fn suppressed(&self) -> u64 {
        self.suppressed
    }
}

impl GuessSource for ExternalGuessStream {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_guess(&mut self) -> Result<Option<String>> {
        loop {
            let line =
                read_line(&mut self.reader, &mut self.buf).map_err(|e| Error::io(&self.path, e))?;
            match line {
                None => {
                    if self.invalid_lines > 0 {
                        log::warn!(
                            "{}: skipped {} undecodable lines",
                            self.path.display(),
                            self.invalid_lines
                        );
                    }
                    return Ok(None);
                }
                Some(Line::Invalid) => self.invalid_lines += 1,
                Some(Line::Text(guess)) => {
                    if let Some(seen) = &mut self.seen {
                        if !seen.insert(guess.clone()) {
                            self.suppressed += 1;
                            continue;
                        }
                    }
                    return Ok(Some(guess));
                }
            }
        }
    }
}
