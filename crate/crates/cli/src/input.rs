//! Sample files: newline-delimited decimal nanoseconds, or a raw stream of
//! little-endian u32 values.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("reading samples: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {text:?} is not an unsigned integer")]
    Parse { line: usize, text: String },
    #[error("line {line}: {value} does not fit in 32 bits")]
    OutOfRange { line: usize, value: u64 },
    #[error("binary stream length {len} is not a multiple of 4 bytes")]
    TruncatedBinary { len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// One decimal RTT per line; blank lines are skipped.
    #[default]
    Text,
    /// Consecutive little-endian u32 values.
    BinaryLe,
}

pub fn read_samples(path: &Path, format: InputFormat) -> Result<Vec<u32>, InputError> {
    match format {
        InputFormat::Text => read_text(path),
        InputFormat::BinaryLe => read_binary(path),
    }
}

fn read_text(path: &Path) -> Result<Vec<u32>, InputError> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line?;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: u64 = trimmed.parse().map_err(|_| InputError::Parse {
            line: line_no,
            text: trimmed.to_string(),
        })?;
        let value = u32::try_from(value).map_err(|_| InputError::OutOfRange {
            line: line_no,
            value,
        })?;
        samples.push(value);
    }
    Ok(samples)
}

fn read_binary(path: &Path) -> Result<Vec<u32>, InputError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 4 != 0 {
        return Err(InputError::TruncatedBinary { len: bytes.len() });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|chunk| u32::from_le_bytes(chunk.try_into().expect("chunks of 4")))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn text_files_parse_with_blank_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.txt");
        std::fs::write(&path, "12\n\n  34 \n4294967295\n").unwrap();
        assert_eq!(
            read_samples(&path, InputFormat::Text).unwrap(),
            vec![12, 34, u32::MAX]
        );
    }

    #[test]
    fn text_rejects_garbage_and_overflow() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "12\nnope\n").unwrap();
        assert!(matches!(
            read_samples(&path, InputFormat::Text),
            Err(InputError::Parse { line: 2, .. })
        ));
        std::fs::write(&path, "4294967296\n").unwrap();
        assert!(matches!(
            read_samples(&path, InputFormat::Text),
            Err(InputError::OutOfRange { line: 1, .. })
        ));
    }

    #[test]
    fn binary_round_trips_and_rejects_tails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.bin");
        let mut file = File::create(&path).unwrap();
        for v in [0u32, 7, u32::MAX] {
            file.write_all(&v.to_le_bytes()).unwrap();
        }
        drop(file);
        assert_eq!(
            read_samples(&path, InputFormat::BinaryLe).unwrap(),
            vec![0, 7, u32::MAX]
        );
        std::fs::write(&path, [1u8, 2, 3]).unwrap();
        assert!(matches!(
            read_samples(&path, InputFormat::BinaryLe),
            Err(InputError::TruncatedBinary { len: 3 })
        ));
    }
}
