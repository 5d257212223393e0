//! Channel-trace files.
//!
//! Layout: one line of JSON `{"nt":…,"nr":…,"count":…,"source":…}` ending in
//! `\n`, then `count` records of `2·nt·nr` little-endian `f64`s holding the
//! `nr × nt` channel row-major with real and imaginary parts interleaved.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub nt: usize,
    pub nr: usize,
    pub count: usize,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub header: TraceHeader,
    pub channels: Vec<ComplexMatrix>,
}

impl ChannelTrace {
    /// Builds a trace, checking every channel against the header shape.
    pub fn new(nt: usize, nr: usize, source: impl Into<String>, channels: Vec<ComplexMatrix>) -> Result<Self> {
        if let Some(bad) = channels.iter().position(|c| c.rows() != nr || c.cols() != nt) {
            return Err(Error::Trace(format!(
                "channel {bad} is {}x{}, header says {nr}x{nt}",
                channels[bad].rows(),
                channels[bad].cols()
            )));
        }
        Ok(ChannelTrace {
            header: TraceHeader {
                nt,
                nr,
                count: channels.len(),
                source: source.into(),
            },
            channels,
        })
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let h = &self.header;
        if h.count != self.channels.len() {
            return Err(Error::Trace(format!(
                "header count {} but {} channels",
                h.count,
                self.channels.len()
            )));
        }
        let line = serde_json::to_string(h).map_err(|e| Error::Trace(e.to_string()))?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        for c in &self.channels {
            if c.rows() != h.nr || c.cols() != h.nt {
                return Err(Error::Trace("channel shape differs from header".into()));
            }
            for z in c.as_slice() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = Vec::new();
        r.read_until(b'\n', &mut line)?;
        if line.last() != Some(&b'\n') {
            return Err(Error::Trace("missing header line".into()));
        }
        let header: TraceHeader = serde_json::from_slice(&line[..line.len() - 1])
            .map_err(|e| Error::Trace(format!("header: {e}")))?;
        let entries = header
            .nt
            .checked_mul(header.nr)
            .ok_or_else(|| Error::Trace("header dimensions overflow".into()))?;
        let mut buf = vec![0u8; 16 * entries];
        let mut channels = Vec::with_capacity(header.count.min(1 << 16));
        for k in 0..header.count {
            r.read_exact(&mut buf).map_err(|_| {
                Error::Trace(format!("truncated payload in record {k} of {}", header.count))
            })?;
            let data = buf
                .chunks_exact(16)
                .map(|b| {
                    let re = f64::from_le_bytes(b[..8].try_into().unwrap());
                    let im = f64::from_le_bytes(b[8..].try_into().unwrap());
                    Complex64::new(re, im)
                })
                .collect();
            channels.push(
                ComplexMatrix::from_vec(header.nr, header.nt, data)
                    .map_err(|e| Error::Trace(format!("record {k}: {e}")))?,
            );
        }
        let mut extra = [0u8; 1];
        if r.read(&mut extra)? != 0 {
            return Err(Error::Trace("trailing bytes after last record".into()));
        }
        Ok(ChannelTrace { header, channels })
    }
}

pub fn write_trace(path: impl AsRef<Path>, trace: &ChannelTrace) -> Result<()> {
    trace.write_to(BufWriter::new(File::create(path)?))
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<ChannelTrace> {
    ChannelTrace::read_from(BufReader::new(File::open(path)?))
}
