//! Line-oriented CSI trace files.
//!
//! ```text
//! # plkg csi trace
//! format_version=1
//! num_subcarriers=612
//! probe_interval_ms=10
//! center_frequency_hz=3750000000
//! probe_index,node,timestamp_ms,subcarrier_index,magnitude
//! 0,alice,0,0,8.12345678e-1
//! ...
//! ```
//!
//! Rows are sorted by `(probe_index, node, subcarrier_index)` and every
//! `(probe_index, node)` group holds exactly `num_subcarriers` rows.
//! Magnitudes are written in scientific notation with 9 significant digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::channel::{Node, ProbeTriple, SessionConfig};
use crate::csi::CsiEstimate;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const COLUMNS: &str = "probe_index,node,timestamp_ms,subcarrier_index,magnitude";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceHeader {
    pub format_version: u32,
    pub num_subcarriers: usize,
    pub probe_interval_ms: f64,
    pub center_frequency_hz: f64,
}

/// Per-node, probe-ordered estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub nodes: BTreeMap<Node, Vec<CsiEstimate>>,
}

impl Trace {
    pub fn from_session(cfg: &SessionConfig, triples: &[ProbeTriple]) -> Self {
        let mut nodes: BTreeMap<Node, Vec<CsiEstimate>> = BTreeMap::new();
        for t in triples {
            for node in Node::ALL {
                nodes
                    .entry(node)
                    .or_default()
                    .push(CsiEstimate::from_observation(t.get(node)));
            }
        }
        Self {
            header: TraceHeader {
                format_version: FORMAT_VERSION,
                num_subcarriers: cfg.ofdm.num_subcarriers,
                probe_interval_ms: cfg.probe_interval_ms,
                center_frequency_hz: cfg.ofdm.center_frequency_hz,
            },
            nodes,
        }
    }

    pub fn node(&self, node: Node) -> Result<&[CsiEstimate]> {
        self.nodes
            .get(&node)
            .map(Vec::as_slice)
            .ok_or(Error::MissingNode(node))
    }

    pub fn probe_count(&self) -> usize {
        self.nodes.values().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn write_trace<W: Write>(out: W, trace: &Trace) -> Result<()> {
    let mut w = BufWriter::new(out);
    let h = &trace.header;
    writeln!(w, "# plkg csi trace")?;
    writeln!(w, "format_version={}", h.format_version)?;
    writeln!(w, "num_subcarriers={}", h.num_subcarriers)?;
    writeln!(w, "probe_interval_ms={}", h.probe_interval_ms)?;
    writeln!(w, "center_frequency_hz={}", h.center_frequency_hz)?;
    writeln!(w, "{COLUMNS}")?;
    let mut rows: Vec<&CsiEstimate> = trace.nodes.values().flatten().collect();
    rows.sort_by_key(|e| (e.probe_index, e.node));
    for est in rows {
        for (k, m) in est.magnitudes.iter().enumerate() {
            writeln!(w, "{},{},{},{},{:.8e}", est.probe_index, est.node, est.timestamp_ms, k, m)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace(path: &Path, trace: &Trace) -> Result<()> {
    write_trace(File::create(path)?, trace)
}

fn trace_err(line: usize, message: impl Into<String>) -> Error {
    Error::Trace {
        line,
        message: message.into(),
    }
}

fn header_value<T: std::str::FromStr>(fields: &BTreeMap<String, (usize, String)>, key: &str) -> Result<T> {
    let (line, raw) = fields
        .get(key)
        .ok_or_else(|| trace_err(0, format!("header is missing '{key}'")))?;
    raw.parse()
        .map_err(|_| trace_err(*line, format!("bad value '{raw}' for '{key}'")))
}

struct Group {
    probe_index: u64,
    node: Node,
    timestamp_ms: f64,
    magnitudes: Vec<f64>,
    first_line: usize,
}

impl Group {
    fn finish(self, expected: usize, nodes: &mut BTreeMap<Node, Vec<CsiEstimate>>) -> Result<()> {
        if self.magnitudes.len() != expected {
            return Err(trace_err(
                self.first_line,
                format!(
                    "group (probe {}, {}) has {} of {} subcarrier rows",
                    self.probe_index,
                    self.node,
                    self.magnitudes.len(),
                    expected
                ),
            ));
        }
        nodes
            .entry(self.node)
            .or_default()
            .push(CsiEstimate::new(self.probe_index, self.node, self.timestamp_ms, self.magnitudes));
        Ok(())
    }
}

pub fn parse_trace<R: BufRead>(input: R) -> Result<Trace> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    loop {
        let (n, line) = lines.next().ok_or_else(|| trace_err(0, "missing column header line"))?;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == COLUMNS {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| trace_err(n, format!("expected key=value header, got '{line}'")))?;
        fields.insert(k.trim().to_string(), (n, v.trim().to_string()));
    }
    let format_version: u32 = header_value(&fields, "format_version")?;
    if format_version != FORMAT_VERSION {
        return Err(trace_err(
            fields["format_version"].0,
            format!("unsupported format_version {format_version}, expected {FORMAT_VERSION}"),
        ));
    }
    let header = TraceHeader {
        format_version,
        num_subcarriers: header_value(&fields, "num_subcarriers")?,
        probe_interval_ms: header_value(&fields, "probe_interval_ms")?,
        center_frequency_hz: header_value(&fields, "center_frequency_hz")?,
    };
    if header.num_subcarriers == 0 {
        return Err(trace_err(fields["num_subcarriers"].0, "num_subcarriers must be positive"));
    }

    let mut nodes = BTreeMap::new();
    let mut group: Option<Group> = None;
    for (n, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(trace_err(n, format!("expected 5 columns, got {}", cols.len())));
        }
        let bad = |what: &str| trace_err(n, format!("bad {what} '{line}'"));
        let probe_index: u64 = cols[0].parse().map_err(|_| bad("probe_index"))?;
        let node: Node = cols[1].parse().map_err(|_| bad("node"))?;
        let timestamp_ms: f64 = cols[2].parse().map_err(|_| bad("timestamp_ms"))?;
        let subcarrier: usize = cols[3].parse().map_err(|_| bad("subcarrier_index"))?;
        let magnitude: f64 = cols[4].parse().map_err(|_| bad("magnitude"))?;
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(trace_err(n, format!("magnitude must be finite and nonnegative, got {magnitude}")));
        }

        let same_group = matches!(&group, Some(g) if g.probe_index == probe_index && g.node == node);
        if !same_group {
            if let Some(g) = group.take() {
                if (probe_index, node) <= (g.probe_index, g.node) {
                    return Err(trace_err(
                        n,
                        format!(
                            "rows out of order: (probe {probe_index}, {node}) after (probe {}, {})",
                            g.probe_index, g.node
                        ),
                    ));
                }
                g.finish(header.num_subcarriers, &mut nodes)?;
            }
            group = Some(Group {
                probe_index,
                node,
                timestamp_ms,
                magnitudes: Vec::with_capacity(header.num_subcarriers),
                first_line: n,
            });
        }
        let g = group.as_mut().expect("group just set");
        if subcarrier != g.magnitudes.len() {
            return Err(trace_err(
                n,
                format!(
                    "group (probe {probe_index}, {node}): expected subcarrier {}, got {subcarrier}",
                    g.magnitudes.len()
                ),
            ));
        }
        if subcarrier >= header.num_subcarriers {
            return Err(trace_err(
                n,
                format!("group (probe {probe_index}, {node}) has more than {} rows", header.num_subcarriers),
            ));
        }
        g.magnitudes.push(magnitude);
    }
    if let Some(g) = group {
        g.finish(header.num_subcarriers, &mut nodes)?;
    }
    Ok(Trace { header, nodes })
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    parse_trace(BufReader::new(File::open(path)?))
}
