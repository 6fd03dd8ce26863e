//! JSON output with a fixed float format.
//!
//! Artifacts print every float with 17 significant digits in scientific
//! notation (`1.2345678901234567e-1`), which round-trips exactly and is
//! stable byte for byte.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

/// Compact layout except for floats.
#[derive(Debug, Default, Clone, Copy)]
pub struct SigDigitsFormatter;

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_writer<W: Write, T: Serialize + ?Sized>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SigDigitsFormatter);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    to_writer(&mut out, value)?;
    Ok(out)
}

/// Writes `value` to `path` followed by a newline.
pub fn write_file<T: Serialize + ?Sized>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut bytes = to_vec(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_file<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let bytes = std::fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}
