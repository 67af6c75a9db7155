//! IDX files as used by Fashion-MNIST, optionally gzip-compressed.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, ParseError, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Raw image tensor: `count` images of `rows x cols` bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| ParseError::Truncated(format!("{what} header")).into())
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = be_u32(bytes, 0, "IDX")?;
    if found != expected {
        return Err(ParseError::Magic { found, expected }.into());
    }
    Ok(())
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    check_magic(bytes, IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4, "image")? as usize;
    let rows = be_u32(bytes, 8, "image")? as usize;
    let cols = be_u32(bytes, 12, "image")? as usize;
    let body = &bytes[16..];
    let need = count * rows * cols;
    if body.len() < need {
        return Err(ParseError::Truncated(format!("{count} images need {need} bytes, found {}", body.len())).into());
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: body[..need].to_vec(),
    })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC)?;
    let count = be_u32(bytes, 4, "label")? as usize;
    let body = &bytes[8..];
    if body.len() < count {
        return Err(ParseError::Truncated(format!("{count} labels, found {} bytes", body.len())).into());
    }
    Ok(body[..count].to_vec())
}

/// File contents, transparently gunzipped when the name ends in `.gz`.
pub fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| ParseError::Truncated(format!("{}: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

#[cfg(test)]
pub(crate) fn encode_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let count = pixels.len() / (rows * cols);
    let mut out = Vec::new();
    for v in [IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

#[cfg(test)]
pub(crate) fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_small_files() {
        let img = parse_images(&encode_images(2, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12])).unwrap();
        assert_eq!((img.count, img.rows, img.cols), (2, 2, 3));
        assert_eq!(img.pixels[11], 12);
        assert_eq!(parse_labels(&encode_labels(&[3, 9])).unwrap(), vec![3, 9]);
    }

    #[test]
    fn swapped_magic_is_rejected() {
        let err = parse_images(&encode_labels(&[1])).unwrap_err();
        assert!(matches!(
            err,
            Error::Parse(ParseError::Magic {
                found: LABELS_MAGIC,
                expected: IMAGES_MAGIC
            })
        ));
        assert!(matches!(
            parse_labels(&encode_images(1, 1, &[0])),
            Err(Error::Parse(ParseError::Magic { .. }))
        ));
    }

    #[test]
    fn truncation_is_detected() {
        let mut bytes = encode_images(2, 2, &[0; 8]);
        bytes.pop();
        assert!(matches!(parse_images(&bytes), Err(Error::Parse(ParseError::Truncated(_)))));
        assert!(matches!(parse_labels(&[0, 0, 8]), Err(Error::Parse(ParseError::Truncated(_)))));
    }
}
