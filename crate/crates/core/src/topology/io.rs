//! Text interchange format for topologies.
//!
//! ```text
//! sparsetopo-topology 1
//! widths 4 3 2
//! edges 5 3
//! epsilon 1.5
//! seed 42
//! layer 0
//! 0 0
//! 3 0
//! ...
//! layer 1
//! ...
//! ```
//!
//! Edges are `source target` pairs written in canonical `(target, source)`
//! order. `epsilon` and `seed` record provenance and may be `none`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, ParseError, Result};
use crate::topology::{LayerTopology, NetworkTopology};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "sparsetopo-topology";

/// Provenance carried in the file header.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TopologyMeta {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

pub fn write_topology<W: Write>(w: &mut W, t: &NetworkTopology, meta: &TopologyMeta) -> std::io::Result<()> {
    writeln!(w, "{MAGIC} {FORMAT_VERSION}")?;
    writeln!(w, "widths {}", join(t.widths()))?;
    writeln!(w, "edges {}", join(&t.layer_edge_counts()))?;
    match meta.epsilon {
        Some(e) => writeln!(w, "epsilon {e}")?,
        None => writeln!(w, "epsilon none")?,
    }
    match meta.seed {
        Some(s) => writeln!(w, "seed {s}")?,
        None => writeln!(w, "seed none")?,
    }
    for (k, layer) in t.layers().iter().enumerate() {
        writeln!(w, "layer {k}")?;
        for (s, tgt) in layer.edges() {
            writeln!(w, "{s} {tgt}")?;
        }
    }
    Ok(())
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Write atomically: the file appears only once fully written.
pub fn save(path: impl AsRef<Path>, t: &NetworkTopology, meta: &TopologyMeta) -> Result<()> {
    let path = path.as_ref();
    crate::fsutil::write_atomic(path, |w| write_topology(w, t, meta))
}

pub fn load(path: impl AsRef<Path>) -> Result<(NetworkTopology, TopologyMeta)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_topology(BufReader::new(file))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-blank line, trimmed.
    fn next(&mut self) -> Result<Option<String>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l.map_err(|e| malformed(self.line, format!("unreadable line: {e}")))?;
            let l = l.trim();
            if !l.is_empty() {
                return Ok(Some(l.to_string()));
            }
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<String> {
        self.next()?
            .ok_or_else(|| Error::from(ParseError::Truncated(format!("missing {what} line"))))
    }

    /// `key v1 v2 ...` → the value tokens.
    fn field(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.expect(key)?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some(key) {
            return Err(malformed(self.line, format!("expected `{key}`, found `{l}`")));
        }
        Ok(toks.map(str::to_string).collect())
    }
}

fn malformed(line: usize, message: impl Into<String>) -> Error {
    ParseError::Malformed {
        line,
        message: message.into(),
    }
    .into()
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| malformed(line, format!("`{tok}` is not a valid number")))
}

pub fn read_topology<R: Read>(r: R) -> Result<(NetworkTopology, TopologyMeta)> {
    let mut lines = Lines {
        inner: BufReader::new(r).lines(),
        line: 0,
    };
    let header = lines.expect("header")?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(MAGIC) {
        return Err(malformed(lines.line, "not a sparsetopo topology file"));
    }
    match toks.next() {
        Some(v) if v == FORMAT_VERSION.to_string() => {}
        Some(v) => return Err(ParseError::Version(v.to_string()).into()),
        None => return Err(malformed(lines.line, "missing format version")),
    }

    let widths: Vec<usize> = lines
        .field("widths")?
        .iter()
        .map(|t| parse_num(t, lines.line))
        .collect::<Result<_>>()?;
    if widths.len() < 2 {
        return Err(ParseError::NoLayers.into());
    }
    if widths.contains(&0) {
        return Err(ParseError::WidthMismatch(format!("zero width in {widths:?}")).into());
    }
    let depth = widths.len() - 1;
    let counts: Vec<usize> = lines
        .field("edges")?
        .iter()
        .map(|t| parse_num(t, lines.line))
        .collect::<Result<_>>()?;
    if counts.len() != depth {
        return Err(ParseError::WidthMismatch(format!(
            "{} widths imply {depth} layers, edge counts list {}",
            widths.len(),
            counts.len()
        ))
        .into());
    }
    let epsilon = match lines.field("epsilon")?.as_slice() {
        [v] if v == "none" => None,
        [v] => Some(parse_num::<f64>(v, lines.line)?),
        _ => return Err(malformed(lines.line, "epsilon takes one value")),
    };
    let seed = match lines.field("seed")?.as_slice() {
        [v] if v == "none" => None,
        [v] => Some(parse_num::<u64>(v, lines.line)?),
        _ => return Err(malformed(lines.line, "seed takes one value")),
    };

    let mut layers: Vec<Vec<(usize, usize)>> = Vec::with_capacity(depth);
    while let Some(l) = lines.next()? {
        let mut toks = l.split_whitespace();
        let (a, b) = (toks.next(), toks.next());
        if toks.next().is_some() {
            return Err(malformed(lines.line, format!("unexpected `{l}`")));
        }
        match (a, b) {
            (Some("layer"), Some(k)) => {
                let k: usize = parse_num(k, lines.line)?;
                if k != layers.len() || k >= depth {
                    return Err(malformed(lines.line, format!("unexpected layer section {k}")));
                }
                layers.push(Vec::with_capacity(counts[k]));
            }
            (Some(s), Some(t)) => {
                let edges = layers
                    .last_mut()
                    .ok_or_else(|| malformed(lines.line, "edge before first layer section"))?;
                edges.push((parse_num(s, lines.line)?, parse_num(t, lines.line)?));
            }
            _ => return Err(malformed(lines.line, format!("unexpected `{l}`"))),
        }
    }
    if layers.is_empty() {
        return Err(ParseError::NoLayers.into());
    }
    if layers.len() != depth {
        return Err(ParseError::Truncated(format!(
            "expected {depth} layer sections, found {}",
            layers.len()
        ))
        .into());
    }

    let mut built = Vec::with_capacity(depth);
    for (k, edges) in layers.into_iter().enumerate() {
        if edges.len() != counts[k] {
            return Err(ParseError::EdgeCount {
                layer: k,
                declared: counts[k],
                found: edges.len(),
            }
            .into());
        }
        built.push(LayerTopology::build(k, widths[k], widths[k + 1], edges)?);
    }
    let t = NetworkTopology::new(widths, built)?;
    Ok((t, TopologyMeta { epsilon, seed }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{er_init, ErConfig};

    fn roundtrip(t: &NetworkTopology, meta: &TopologyMeta) -> (NetworkTopology, TopologyMeta) {
        let mut buf = Vec::new();
        write_topology(&mut buf, t, meta).unwrap();
        read_topology(buf.as_slice()).unwrap()
    }

    #[test]
    fn er_topology_roundtrips() {
        let cfg = ErConfig::new(3.0, 11).unwrap();
        let t = er_init(&[20, 15, 5], &cfg).unwrap();
        let meta = TopologyMeta {
            epsilon: Some(cfg.epsilon),
            seed: Some(cfg.seed),
        };
        assert_eq!(roundtrip(&t, &meta), (t, meta));
    }

    #[test]
    fn target_out_of_range_names_layer() {
        let text = "sparsetopo-topology 1\nwidths 2 2 2\nedges 1 1\nepsilon none\nseed none\nlayer 0\n0 0\nlayer 1\n0 2\n";
        let err = read_topology(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(ParseError::EdgeOutOfRange { layer: 1, to: 2, .. })), "{err}");
        assert!(err.to_string().contains("layer 1"));
    }

    #[test]
    fn empty_layers_rejected() {
        let no_sections = "sparsetopo-topology 1\nwidths 2 2\nedges 0\nepsilon none\nseed none\n";
        assert!(matches!(read_topology(no_sections.as_bytes()), Err(Error::Parse(ParseError::NoLayers))));
        let one_width = "sparsetopo-topology 1\nwidths 2\nedges\nepsilon none\nseed none\n";
        assert!(matches!(read_topology(one_width.as_bytes()), Err(Error::Parse(ParseError::NoLayers))));
    }

    #[test]
    fn distinct_errors() {
        let dup = "sparsetopo-topology 1\nwidths 2 2\nedges 2\nepsilon none\nseed none\nlayer 0\n1 0\n1 0\n";
        assert!(matches!(read_topology(dup.as_bytes()), Err(Error::Parse(ParseError::DuplicateEdge { .. }))));
        let widths = "sparsetopo-topology 1\nwidths 2 2 2\nedges 1\nepsilon none\nseed none\nlayer 0\n1 0\n";
        assert!(matches!(read_topology(widths.as_bytes()), Err(Error::Parse(ParseError::WidthMismatch(_)))));
        let count = "sparsetopo-topology 1\nwidths 2 2\nedges 3\nepsilon none\nseed none\nlayer 0\n1 0\n";
        assert!(matches!(read_topology(count.as_bytes()), Err(Error::Parse(ParseError::EdgeCount { .. }))));
        let version = "sparsetopo-topology 9\nwidths 2 2\n";
        assert!(matches!(read_topology(version.as_bytes()), Err(Error::Parse(ParseError::Version(_)))));
        let junk = "sparsetopo-topology 1\nwidths 2 x\n";
        assert!(matches!(read_topology(junk.as_bytes()), Err(Error::Parse(ParseError::Malformed { line: 2, .. }))));
    }
}
