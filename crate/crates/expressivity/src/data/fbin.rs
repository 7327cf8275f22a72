//! The binary feature container.
//!
//! Layout, all little-endian:
//!
//! | offset | size        | contents                         |
//! |--------|-------------|----------------------------------|
//! | 0      | 4           | magic bytes `EXPR`               |
//! | 4      | 4           | format version, `u32`, must be 1 |
//! | 8      | 8           | row count `n`, `u64`             |
//! | 16     | 8           | column count `m`, `u64`          |
//! | 24     | 4 * n * m   | IEEE-754 `f32` values, row-major |
//!
//! Values are stored as 32-bit floats and widened to 64-bit on load, so a
//! load-after-write reproduces exactly the 32-bit rounding of the written
//! values; writing a matrix that already came from this format is lossless.

use std::io::{Read, Write};
use std::path::Path;

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

const MAGIC: &[u8; 4] = b"EXPR";
const VERSION: u32 = 1;

/// Reads only the header of a feature file and returns `(n, m)`.
pub fn read_fbin_dims(path: impl AsRef<Path>) -> Result<(usize, usize)> {
    let path = path.as_ref();
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path.display(), e))?;
    let mut header = [0u8; 24];
    file.read_exact(&mut header)
        .map_err(|_| truncated(path, "header"))?;
    parse_header(&header, path)
}

/// Loads a feature matrix, widening each stored value to `f64`.
pub fn load_features_fbin(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display(), e))?;
    if bytes.len() < 24 {
        return Err(truncated(path, "header"));
    }
    let (n, m) = parse_header(&bytes[..24], path)?;
    let expected = 24 + 4 * n * m;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "{}: expected {} bytes for a {}x{} matrix, found {}",
            path.display(),
            expected,
            n,
            m,
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(n * m);
    for (i, chunk) in bytes[24..].chunks_exact(4).enumerate() {
        let value = f32::from_le_bytes(chunk.try_into().unwrap());
        if !value.is_finite() {
            return Err(Error::Data(format!(
                "{}: non-finite value {} at row {}, column {}",
                path.display(),
                value,
                i / m,
                i % m
            )));
        }
        data.push(f64::from(value));
    }
    let matrix = Matrix::from_vec(n, m, data)?;
    FeatureMatrix::new(matrix, path.display().to_string())
}

/// Writes a feature matrix, narrowing each value to `f32`.
///
/// Values whose magnitude exceeds the 32-bit range cannot be represented
/// and are rejected rather than silently stored as infinity.
pub fn write_feature_matrix(f: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (n, m) = (f.n(), f.m());
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path.display(), e))?,
    );
    let write = |out: &mut dyn Write, bytes: &[u8]| -> Result<()> {
        out.write_all(bytes).map_err(|e| Error::io(path.display(), e))
    };
    write(&mut out, MAGIC)?;
    write(&mut out, &VERSION.to_le_bytes())?;
    write(&mut out, &(n as u64).to_le_bytes())?;
    write(&mut out, &(m as u64).to_le_bytes())?;
    for i in 0..n {
        for (j, value) in f.values().row(i).iter().enumerate() {
            let narrow = *value as f32;
            if !narrow.is_finite() {
                return Err(Error::Data(format!(
                    "value {} at row {}, column {} does not fit a 32-bit float",
                    value, i, j
                )));
            }
            write(&mut out, &narrow.to_le_bytes())?;
        }
    }
    out.flush().map_err(|e| Error::io(path.display(), e))
}

fn parse_header(header: &[u8], path: &Path) -> Result<(usize, usize)> {
    if &header[..4] != MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic bytes {:?}, expected \"EXPR\"",
            path.display(),
            &header[..4]
        )));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported format version {version}, expected {VERSION}",
            path.display()
        )));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap());
    let m = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if n == 0 || m == 0 {
        return Err(Error::Format(format!(
            "{}: empty matrix ({n}x{m})",
            path.display()
        )));
    }
    let (n, m) = (n as usize, m as usize);
    if n.checked_mul(m).and_then(|c| c.checked_mul(4)).is_none() {
        return Err(Error::Format(format!(
            "{}: implausible dimensions {n}x{m}",
            path.display()
        )));
    }
    Ok((n, m))
}

fn truncated(path: &Path, what: &str) -> Error {
    Error::Format(format!("{}: file too short for the {what}", path.display()))
}
