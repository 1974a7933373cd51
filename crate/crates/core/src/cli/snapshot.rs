//! Snapshot files: a four-line text header followed by the node values as
//! little-endian `f64`, ring-major.
//!
//! ```text
//! MKFLOW 1
//! grid r=0.9 n_rho=128 n_theta=256
//! t=0.5
//! payload f64le row-major rho-major
//! ```
//!
//! Numbers in the header use the shortest representation that parses back
//! to the same `f64`, so a round trip is bit-exact. The ghost ring is not
//! stored.

use crate::dualgeo::DualState;
use crate::error::{Error, Result};
use crate::grid::{build_grid, ScalarField};
use std::io::Write;
use std::path::Path;

const MAGIC: &str = "MKFLOW";
const VERSION: &str = "1";
const PAYLOAD_LINE: &str = "payload f64le row-major rho-major";

pub fn encode_snapshot(state: &DualState) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(128 + 8 * g.len());
    let _ = write!(
        out,
        "{MAGIC} {VERSION}\ngrid r={:?} n_rho={} n_theta={}\nt={:?}\n{PAYLOAD_LINE}\n",
        g.r(),
        g.n_rho(),
        g.n_theta(),
        state.t
    );
    for v in &state.field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn emit_snapshot(state: &DualState, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(state)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_snapshot(path: &Path) -> Result<DualState> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    decode_snapshot(&bytes)
}

fn fmt_err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Format { offset, msg: msg.into() }
}

/// Reads one `\n`-terminated header line starting at `*pos`.
fn header_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<(usize, &'a str)> {
    let start = *pos;
    let end = bytes[start..]
        .iter()
        .position(|&b| b == b'\n')
        .map(|k| start + k)
        .ok_or_else(|| fmt_err(start, "truncated header"))?;
    let line = std::str::from_utf8(&bytes[start..end]).map_err(|_| fmt_err(start, "header is not UTF-8"))?;
    *pos = end + 1;
    Ok((start, line))
}

fn field<'a>(tok: &'a str, key: &str, offset: usize) -> Result<&'a str> {
    tok.strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| fmt_err(offset, format!("expected {key}=<value>, found {tok:?}")))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<DualState> {
    let mut pos = 0;
    let (off, magic) = header_line(bytes, &mut pos)?;
    let version = magic
        .strip_prefix(MAGIC)
        .and_then(|s| s.strip_prefix(' '))
        .ok_or_else(|| fmt_err(off, format!("expected \"{MAGIC} {VERSION}\", found {magic:?}")))?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version.to_string()));
    }
    let (off, grid) = header_line(bytes, &mut pos)?;
    let toks: Vec<&str> = grid.split(' ').collect();
    if toks.len() != 4 || toks[0] != "grid" {
        return Err(fmt_err(off, format!("malformed grid line {grid:?}")));
    }
    let num_err = |what: &str| fmt_err(off, format!("cannot parse {what}"));
    let r: f64 = field(toks[1], "r", off)?.parse().map_err(|_| num_err("r"))?;
    let n_rho: usize = field(toks[2], "n_rho", off)?.parse().map_err(|_| num_err("n_rho"))?;
    let n_theta: usize = field(toks[3], "n_theta", off)?.parse().map_err(|_| num_err("n_theta"))?;
    let (off, tline) = header_line(bytes, &mut pos)?;
    let t: f64 = field(tline, "t", off)?.parse().map_err(|_| fmt_err(off, "cannot parse t"))?;
    let (off, payload) = header_line(bytes, &mut pos)?;
    if payload != PAYLOAD_LINE {
        return Err(fmt_err(off, format!("unsupported payload description {payload:?}")));
    }
    let g = build_grid(r, n_rho, n_theta).map_err(|e| fmt_err(0, e.to_string()))?;
    let need = 8 * g.len();
    let body = &bytes[pos..];
    if body.len() != need {
        return Err(fmt_err(
            pos + body.len().min(need),
            format!("payload holds {} bytes, expected {need}", body.len()),
        ));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    Ok(DualState::new(ScalarField::new(g, values, None)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(seed: u64) -> DualState {
        let g = build_grid(0.9, 5, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| -(1.0 - x[0] * x[0] - x[1] * x[1]).sqrt() * (1.0 + seed as f64 / 7.0));
        DualState::new(ScalarField { ghost: None, ..f }, 0.1 + seed as f64 / 3.0)
    }

    #[test]
    fn header_layout() {
        let b = encode_snapshot(&state(0));
        let text = String::from_utf8_lossy(&b[..80]);
        assert!(text.starts_with("MKFLOW 1\ngrid r=0.9 n_rho=5 n_theta=8\nt=0.1\npayload f64le row-major rho-major\n"));
    }

    #[test]
    fn truncated_and_versioned() {
        let b = encode_snapshot(&state(1));
        match decode_snapshot(&b[..b.len() - 3]) {
            Err(Error::Format { offset, .. }) => assert!(offset > 40),
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode_snapshot(&b[..10]), Err(Error::Format { .. })));
        let mut v2 = b.clone();
        v2[7] = b'2';
        assert!(matches!(decode_snapshot(&v2), Err(Error::UnsupportedVersion(v)) if v == "2"));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(decode_snapshot(&bad), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.mkf");
        let s = state(2);
        emit_snapshot(&s, &p).unwrap();
        assert_eq!(load_snapshot(&p).unwrap(), s);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(vals in proptest::collection::vec(-1e6f64..1e6, 40), t in 0.0f64..100.0) {
            let g = build_grid(0.9, 5, 8).unwrap();
            let s = DualState::new(ScalarField::new(g, vals, None).unwrap(), t);
            let back = decode_snapshot(&encode_snapshot(&s)).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
