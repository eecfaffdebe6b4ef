//! Run artifacts: cost traces as CSV, centroids as binary PGM.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Write `bytes` to a sibling temp file, then rename it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParams(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub const COST_CSV_HEADER: &str = "epoch,cost";

/// `epoch,cost` header, then one row per epoch numbered from 1.
pub fn cost_csv(trace: &[f64]) -> String {
    let mut out = String::from(COST_CSV_HEADER);
    out.push('\n');
    for (e, c) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", e + 1, c));
    }
    out
}

pub fn parse_cost_csv(text: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::Malformed { format: "cost csv", reason };
    let mut lines = text.lines();
    if lines.next() != Some(COST_CSV_HEADER) {
        return Err(bad("missing epoch,cost header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let (epoch, cost) = line.split_once(',').ok_or_else(|| bad(format!("row {}: {line}", i + 1)))?;
            if epoch.parse::<usize>().ok() != Some(i + 1) {
                return Err(bad(format!("row {} has epoch {epoch}", i + 1)));
            }
            cost.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1)))
        })
        .collect()
}

/// `round((w + 1) / 2 * 255)`, saturating outside `[-1, 1]`.
pub fn weight_to_pixel(w: f64) -> u8 {
    ((w + 1.0) / 2.0 * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn pixel_to_weight(p: u8) -> f64 {
    f64::from(p) / 255.0 * 2.0 - 1.0
}

/// Binary (P5) graymap with maxval 255.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::DimensionMismatch { expected: width * height, found: pixels.len() });
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Parse a P5 graymap with maxval 255; returns `(width, height, pixels)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |reason: &str| Error::Malformed { format: "pgm", reason: reason.into() };
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("unexpected end of header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(bad("not a binary PGM"));
    }
    let width: usize = token()?.parse().map_err(|_| bad("bad width"))?;
    let height: usize = token()?.parse().map_err(|_| bad("bad height"))?;
    if token()? != "255" {
        return Err(bad("only maxval 255 is supported"));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = &bytes[(pos + 1).min(bytes.len())..];
    if data.len() != width * height {
        return Err(bad("raster size does not match header"));
    }
    Ok((width, height, data.to_vec()))
}

pub fn centroid_pgm(weights: &[f64], width: usize, height: usize) -> Result<Vec<u8>> {
    let pixels: Vec<u8> = weights.iter().map(|&w| weight_to_pixel(w)).collect();
    encode_pgm(width, height, &pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_layout() {
        assert_eq!(cost_csv(&[3.5, 2.0]), "epoch,cost\n1,3.5\n2,2\n");
        assert_eq!(parse_cost_csv("epoch,cost\n1,3.5\n2,2\n").unwrap(), vec![3.5, 2.0]);
        assert!(parse_cost_csv("e,c\n").is_err());
        assert!(parse_cost_csv("epoch,cost\n2,1\n").is_err());
    }

    #[test]
    fn pgm_header() {
        let bytes = encode_pgm(2, 1, &[0, 255]).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff");
        assert_eq!(decode_pgm(&bytes).unwrap(), (2, 1, vec![0, 255]));
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert_eq!(decode_pgm(b"P5 # c\n1 1 255\n\x07").unwrap(), (1, 1, vec![7]));
    }

    #[test]
    fn pixel_mapping_endpoints() {
        assert_eq!(weight_to_pixel(-1.0), 0);
        assert_eq!(weight_to_pixel(1.0), 255);
        assert_eq!(weight_to_pixel(0.0), 128);
        assert_eq!(weight_to_pixel(3.0), 255);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    proptest! {
        #[test]
        fn pgm_round_trip_within_quantum(weights in prop::collection::vec(-1.0f64..=1.0, 1..64)) {
            let bytes = centroid_pgm(&weights, weights.len(), 1).unwrap();
            let (_, _, px) = decode_pgm(&bytes).unwrap();
            for (w, p) in weights.iter().zip(px) {
                prop_assert!((pixel_to_weight(p) - w).abs() <= 1.0 / 255.0 + 1e-12);
            }
        }
    }
}
