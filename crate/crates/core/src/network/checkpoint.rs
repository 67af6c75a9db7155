//! Parameter files: a topology file plus a parallel binary array file.
//!
//! The array file is little-endian: the 8-byte magic `SPTPARAM`, a `u32`
//! version, a `u32` layer count, then per layer the `u64` edge count, the
//! `u64` output width and the `u64` count of activation units, followed by
//! every value as `f64` in [`Params::flatten`] order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{Params, SparseNet};
use crate::error::{Error, ParseError, Result};
use crate::topology::{self, NetworkTopology, TopologyMeta};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SPTPARAM";

pub fn write_params<W: Write>(w: &mut W, p: &Params) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(p.weights.len() as u32).to_le_bytes())?;
    for k in 0..p.weights.len() {
        let units = p.srelu.get(k).map_or(0, Vec::len);
        for n in [p.weights[k].len(), p.biases[k].len(), units] {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
    }
    for v in p.flatten() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let chunk = bytes
        .get(*at..*at + N)
        .ok_or_else(|| ParseError::Truncated("parameter file ends early".into()))?;
    *at += N;
    Ok(chunk.try_into().expect("slice of length N"))
}

/// Read parameters and check them against the topology they belong to.
pub fn read_params<R: Read>(mut r: R, t: &NetworkTopology) -> Result<Params> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)
        .map_err(|e| ParseError::Truncated(format!("unreadable parameter file: {e}")))?;
    let mut at = 0;
    let magic: [u8; 8] = take(&bytes, &mut at)?;
    if &magic != MAGIC {
        return Err(ParseError::Malformed {
            line: 0,
            message: "not a sparsetopo parameter file".into(),
        }
        .into());
    }
    let version = u32::from_le_bytes(take(&bytes, &mut at)?);
    if version != CHECKPOINT_VERSION {
        return Err(ParseError::Version(version.to_string()).into());
    }
    let depth = u32::from_le_bytes(take(&bytes, &mut at)?) as usize;
    let like = Params::zeros_for(t);
    if depth != t.depth() {
        return Err(ParseError::WidthMismatch(format!(
            "parameter file has {depth} layers, topology has {}",
            t.depth()
        ))
        .into());
    }
    for k in 0..depth {
        let mut shape = [0usize; 3];
        for s in &mut shape {
            *s = u64::from_le_bytes(take(&bytes, &mut at)?) as usize;
        }
        let expected = [
            like.weights[k].len(),
            like.biases[k].len(),
            like.srelu.get(k).map_or(0, Vec::len),
        ];
        if shape != expected {
            return Err(ParseError::WidthMismatch(format!(
                "layer {k}: parameter shape {shape:?} does not fit the topology ({expected:?})"
            ))
            .into());
        }
    }
    let body = &bytes[at..];
    if body.len() != 8 * like.len() {
        return Err(ParseError::Truncated(format!(
            "expected {} values, found {} bytes",
            like.len(),
            body.len()
        ))
        .into());
    }
    let flat: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    like.unflatten_like(&flat)
}

/// Write `net` as a topology file and a parameter file, each atomically.
pub fn save_checkpoint(
    topo_path: impl AsRef<Path>,
    params_path: impl AsRef<Path>,
    net: &SparseNet,
    meta: &TopologyMeta,
) -> Result<()> {
    topology::save(topo_path, net.topology(), meta)?;
    crate::fsutil::write_atomic(params_path.as_ref(), |w| write_params(w, net.params()))
}

pub fn load_checkpoint(topo_path: impl AsRef<Path>, params_path: impl AsRef<Path>) -> Result<SparseNet> {
    let (t, _) = topology::load(topo_path)?;
    let path = params_path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let params = read_params(std::io::BufReader::new(file), &t)?;
    SparseNet::new(t, params)
}
