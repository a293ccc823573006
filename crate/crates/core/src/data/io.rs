//! Dataset and truth sidecar files.
//!
//! ```text
//! geotime-dataset v1
//! m=<int> N=<int> layout=row-major
//! <u_1> <u_2> ... <u_m>
//! <N·m little-endian f64>
//! ```
//!
//! The sidecar `<path>.truth` uses the same framing with header
//! `geotime-truth v1`, line 2 `N=<int> cols=4 layout=row-major`, line 3 the
//! ground-truth arc-length parameters of the sensors, and rows
//! `x, y, depth, kind`.

use std::fs;
use std::path::{Path, PathBuf};

use super::plan::{SourceKind, PlannedSource};
use super::TravelTimeDataset;
use crate::error::{Error, Result};
use crate::manifold::Point;

pub const DATASET_MAGIC: &str = "geotime-dataset v1";
pub const TRUTH_MAGIC: &str = "geotime-truth v1";

/// Ground truth withheld from reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthSidecar {
    pub sensor_params: Vec<f64>,
    pub sources: Vec<PlannedSource>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".truth");
    PathBuf::from(s)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

pub fn encode_dataset(ds: &TravelTimeDataset) -> Vec<u8> {
    let mut out = format!("{DATASET_MAGIC}\nm={} N={} layout=row-major\n{}\n", ds.m, ds.n, join(&ds.u)).into_bytes();
    out.reserve(ds.times.len() * 8);
    for v in &ds.times {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn encode_truth(t: &TruthSidecar) -> Vec<u8> {
    let mut out =
        format!("{TRUTH_MAGIC}\nN={} cols=4 layout=row-major\n{}\n", t.sources.len(), join(&t.sensor_params)).into_bytes();
    for s in &t.sources {
        for v in [s.point.x, s.point.y, s.depth, s.kind.code() as f64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_dataset(ds: &TravelTimeDataset, path: &Path) -> Result<()> {
    fs::write(path, encode_dataset(ds))?;
    Ok(())
}

pub fn write_truth(t: &TruthSidecar, dataset_path: &Path) -> Result<()> {
    fs::write(sidecar_path(dataset_path), encode_truth(t))?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        let rest = &self.bytes[start..];
        let Some(nl) = rest.iter().position(|&b| b == b'\n') else {
            return Err(Error::Format { offset: self.bytes.len(), msg: "unterminated header line".into() });
        };
        self.pos += nl + 1;
        std::str::from_utf8(&rest[..nl])
            .map_err(|_| Error::Format { offset: start, msg: "header is not valid UTF-8".into() })
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let need = count * 8;
        let have = self.bytes.len() - self.pos;
        if have < need {
            let at = self.pos + (have / 8) * 8;
            return Err(Error::Format {
                offset: at,
                msg: format!("truncated data block: expected {need} bytes, found {have}"),
            });
        }
        let out = self.bytes[self.pos..self.pos + need]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        self.pos += need;
        if self.pos != self.bytes.len() {
            return Err(Error::Format { offset: self.pos, msg: "trailing bytes after data block".into() });
        }
        Ok(out)
    }
}

fn parse_fields(line: &str, offset: usize, keys: &[&str]) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut it = line.split_whitespace();
    for key in keys {
        let tok = it.next().ok_or_else(|| Error::Format { offset, msg: format!("missing field '{key}'") })?;
        let Some((k, v)) = tok.split_once('=') else {
            return Err(Error::Format { offset, msg: format!("malformed field '{tok}'") });
        };
        if k != *key {
            return Err(Error::Format { offset, msg: format!("expected field '{key}', found '{k}'") });
        }
        out.push(v.to_string());
    }
    if let Some(extra) = it.next() {
        return Err(Error::Format { offset, msg: format!("unexpected field '{extra}'") });
    }
    Ok(out)
}

fn parse_count(v: &str, offset: usize) -> Result<usize> {
    v.parse().map_err(|_| Error::Format { offset, msg: format!("invalid count '{v}'") })
}

fn parse_params(line: &str, offset: usize, expected: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Format { offset, msg: format!("invalid number '{t}'") }))
        .collect::<Result<_>>()?;
    if vals.len() != expected {
        return Err(Error::Format { offset, msg: format!("expected {expected} parameters, found {}", vals.len()) });
    }
    if vals.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Format { offset, msg: "sensor parameters are not strictly increasing".into() });
    }
    Ok(vals)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<TravelTimeDataset> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.line()?;
    if magic != DATASET_MAGIC {
        return Err(Error::Format { offset: 0, msg: format!("unsupported dataset version '{magic}'") });
    }
    let off = c.pos;
    let f = parse_fields(c.line()?, off, &["m", "N", "layout"])?;
    let (m, n) = (parse_count(&f[0], off)?, parse_count(&f[1], off)?);
    if f[2] != "row-major" {
        return Err(Error::Format { offset: off, msg: format!("unsupported layout '{}'", f[2]) });
    }
    let off = c.pos;
    let u = parse_params(c.line()?, off, m)?;
    let times = c.floats(n * m)?;
    Ok(TravelTimeDataset { m, n, u, times })
}

pub fn decode_truth(bytes: &[u8]) -> Result<TruthSidecar> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.line()?;
    if magic != TRUTH_MAGIC {
        return Err(Error::Format { offset: 0, msg: format!("unsupported sidecar version '{magic}'") });
    }
    let off = c.pos;
    let f = parse_fields(c.line()?, off, &["N", "cols", "layout"])?;
    let n = parse_count(&f[0], off)?;
    if f[1] != "4" || f[2] != "row-major" {
        return Err(Error::Format { offset: off, msg: "unsupported sidecar layout".into() });
    }
    let line = c.line()?;
    let sensor_params = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Format { offset: off, msg: format!("invalid number '{t}'") }))
        .collect::<Result<Vec<_>>>()?;
    let block_start = c.pos;
    let vals = c.floats(n * 4)?;
    let mut sources = Vec::with_capacity(n);
    for (i, r) in vals.chunks_exact(4).enumerate() {
        let kind = SourceKind::from_code(r[3] as u8)
            .filter(|_| r[3].fract() == 0.0)
            .ok_or(Error::Format { offset: block_start + i * 32 + 24, msg: format!("invalid source kind {}", r[3]) })?;
        sources.push(PlannedSource { point: Point::new(r[0], r[1]), kind, depth: r[2] });
    }
    Ok(TruthSidecar { sensor_params, sources })
}

pub fn read_dataset(path: &Path) -> Result<TravelTimeDataset> {
    decode_dataset(&fs::read(path)?)
}

/// Reads the sidecar next to `dataset_path`. `blind` forbids the read.
pub fn read_truth(dataset_path: &Path, blind: bool) -> Result<Option<TruthSidecar>> {
    if blind {
        return Ok(None);
    }
    let p = sidecar_path(dataset_path);
    if !p.exists() {
        return Ok(None);
    }
    Ok(Some(decode_truth(&fs::read(p)?)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TravelTimeDataset {
        TravelTimeDataset {
            m: 3,
            n: 2,
            u: vec![0.0, 0.1 + 0.2, 1.0],
            times: vec![0.0, 0.5, f64::NAN, 1.0 / 3.0, 2.0, 1e-300],
        }
    }

    #[test]
    fn bit_exact_round_trip() {
        let ds = sample();
        let back = decode_dataset(&encode_dataset(&ds)).unwrap();
        assert_eq!(back.u, ds.u);
        let a: Vec<u64> = ds.times.iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = back.times.iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_file_names_offset() {
        let bytes = encode_dataset(&sample());
        let cut = &bytes[..bytes.len() - 5];
        match decode_dataset(cut) {
            Err(Error::Format { offset, msg }) => {
                assert!(msg.contains("truncated"));
                assert!(offset > 0 && offset < cut.len());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        let good = String::from_utf8_lossy(&encode_dataset(&sample())[..40]).to_string();
        assert!(good.starts_with(DATASET_MAGIC));
        let bad_version = b"geotime-dataset v2\nm=1 N=0 layout=row-major\n0\n";
        assert!(matches!(decode_dataset(bad_version), Err(Error::Format { offset: 0, .. })));
        let bad_header = b"geotime-dataset v1\nm=2 layout=row-major\n0 1\n";
        assert!(decode_dataset(bad_header).is_err());
        let non_monotone = b"geotime-dataset v1\nm=2 N=0 layout=row-major\n0.5 0.1\n";
        match decode_dataset(non_monotone) {
            Err(Error::Format { msg, .. }) => assert!(msg.contains("increasing")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sidecar_round_trip_and_blind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.bin");
        write_dataset(&sample(), &path).unwrap();
        let t = TruthSidecar {
            sensor_params: vec![0.0, 0.5, 1.0],
            sources: vec![
                PlannedSource { point: Point::new(0.1, 0.2), kind: SourceKind::Lattice, depth: 0.7 },
                PlannedSource { point: Point::new(1.0, 0.0), kind: SourceKind::Gamma, depth: 0.0 },
            ],
        };
        write_truth(&t, &path).unwrap();
        assert_eq!(read_truth(&path, false).unwrap().unwrap(), t);
        assert!(read_truth(&path, true).unwrap().is_none());
        assert_eq!(read_dataset(&path).unwrap().m, 3);
    }
}
