//! Ingestion of timestamped interactions and snapshot persistence.
//!
//! Raw records carry arbitrary string labels which are mapped to dense ids
//! in order of first appearance. The node universe is the union of all
//! labels in the input and stays fixed across snapshots.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsemat::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalEdge {
    pub u: usize,
    pub v: usize,
    pub ts: i64,
}

/// Raw interaction records over a dense id space.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEdgeList {
    records: Vec<TemporalEdge>,
    labels: Vec<String>,
}

impl TemporalEdgeList {
    /// Builds a list over `node_count` unlabeled nodes (labels are the ids).
    pub fn from_records(node_count: usize, records: Vec<TemporalEdge>) -> Result<Self> {
        for (n, r) in records.iter().enumerate() {
            if r.u >= node_count || r.v >= node_count {
                return Err(Error::OutOfRange {
                    index: r.u.max(r.v),
                    len: node_count,
                });
            }
            if r.u == r.v {
                return Err(Error::SelfLoop {
                    label: r.u.to_string(),
                    line: n + 1,
                });
            }
        }
        Ok(TemporalEdgeList {
            records,
            labels: (0..node_count).map(|i| i.to_string()).collect(),
        })
    }

    pub fn records(&self) -> &[TemporalEdge] {
        &self.records
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Label of each node id.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distinct_timestamps(&self) -> usize {
        self.records.iter().map(|r| r.ts).collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// `u v ts` separated by arbitrary whitespace.
    WhitespaceTriples,
    /// Three columns with a header row.
    Csv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "whitespace" | "whitespace-triples" | "triples" | "txt" => Ok(InputFormat::WhitespaceTriples),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::InvalidParam(format!("unknown input format `{other}`"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::WhitespaceTriples => "whitespace-triples",
            InputFormat::Csv => "csv",
        })
    }
}

struct LabelInterner {
    ids: HashMap<String, usize>,
    labels: Vec<String>,
}

impl LabelInterner {
    fn new() -> Self {
        LabelInterner {
            ids: HashMap::new(),
            labels: Vec::new(),
        }
    }

    fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.ids.insert(label.to_owned(), id);
        self.labels.push(label.to_owned());
        id
    }
}

fn push_record(
    interner: &mut LabelInterner,
    records: &mut Vec<TemporalEdge>,
    fields: [&str; 3],
    line: usize,
) -> Result<()> {
    let [a, b, ts] = fields;
    if a == b {
        return Err(Error::SelfLoop {
            label: a.to_owned(),
            line,
        });
    }
    let ts: i64 = ts.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("timestamp `{ts}` is not an integer"),
    })?;
    let u = interner.intern(a);
    let v = interner.intern(b);
    records.push(TemporalEdge { u, v, ts });
    Ok(())
}

/// Parses temporal edges from any reader.
pub fn parse_temporal_edges(reader: impl Read, format: InputFormat) -> Result<TemporalEdgeList> {
    let mut interner = LabelInterner::new();
    let mut records = Vec::new();
    match format {
        InputFormat::WhitespaceTriples => {
            for (n, line) in BufReader::new(reader).lines().enumerate() {
                let line_no = n + 1;
                let line = line.map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                    continue;
                }
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected 3 fields, found {}", fields.len()),
                    });
                }
                push_record(&mut interner, &mut records, [fields[0], fields[1], fields[2]], line_no)?;
            }
        }
        InputFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(reader);
            for (n, row) in rdr.records().enumerate() {
                // header is line 1
                let line_no = n + 2;
                let row = row.map_err(|e| Error::Parse {
                    line: line_no,
                    msg: e.to_string(),
                })?;
                if row.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected 3 columns, found {}", row.len()),
                    });
                }
                push_record(&mut interner, &mut records, [&row[0], &row[1], &row[2]], line_no)?;
            }
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyInput("no temporal edge records".into()));
    }
    Ok(TemporalEdgeList {
        records,
        labels: interner.labels,
    })
}

pub fn load_temporal_edges(path: impl AsRef<Path>, format: InputFormat) -> Result<TemporalEdgeList> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_temporal_edges(file, format)
}

/// Rule for cutting the time axis into snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentPolicy {
    /// Buckets of equal timestamp width between the first and last record.
    #[default]
    EqualTimeSpan,
    /// Buckets holding (nearly) equal numbers of records in time order.
    EqualEdgeCount,
}

impl FromStr for SegmentPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal-time-span" | "time" => Ok(SegmentPolicy::EqualTimeSpan),
            "equal-edge-count" | "count" => Ok(SegmentPolicy::EqualEdgeCount),
            other => Err(Error::InvalidParam(format!("unknown segmentation policy `{other}`"))),
        }
    }
}

impl fmt::Display for SegmentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentPolicy::EqualTimeSpan => "equal-time-span",
            SegmentPolicy::EqualEdgeCount => "equal-edge-count",
        })
    }
}

/// Ordered snapshots `A_1..A_N` over a fixed node set.
///
/// Every adjacency matrix is symmetric, binary and has a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSequence {
    snapshots: Vec<CsrMatrix>,
    labels: Vec<String>,
    policy: Option<SegmentPolicy>,
}

fn adjacency(node_count: usize, edges: &[(usize, usize)]) -> Result<CsrMatrix> {
    let mut set = BTreeSet::new();
    for &(a, b) in edges {
        if a == b {
            return Err(Error::SelfLoop {
                label: a.to_string(),
                line: 0,
            });
        }
        if a >= node_count || b >= node_count {
            return Err(Error::OutOfRange {
                index: a.max(b),
                len: node_count,
            });
        }
        set.insert((a.min(b), a.max(b)));
    }
    CsrMatrix::from_triplets(
        node_count,
        node_count,
        set.into_iter().flat_map(|(a, b)| [(a, b, 1.0), (b, a, 1.0)]),
    )
}

impl SnapshotSequence {
    /// Builds a sequence from per-snapshot undirected edge lists. Duplicate
    /// and reversed pairs collapse to one binary edge.
    pub fn from_edge_lists(node_count: usize, snapshots: &[Vec<(usize, usize)>]) -> Result<Self> {
        let snapshots = snapshots
            .iter()
            .enumerate()
            .map(|(t, e)| adjacency(node_count, e).map_err(|err| Error::in_snapshot(t + 1, err)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SnapshotSequence {
            snapshots,
            labels: (0..node_count).map(|i| i.to_string()).collect(),
            policy: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.node_count() {
            return Err(Error::InvalidParam(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of snapshots `N`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn policy(&self) -> Option<SegmentPolicy> {
        self.policy
    }

    /// Adjacency matrix of snapshot `t` (0-based).
    pub fn adjacency(&self, t: usize) -> &CsrMatrix {
        &self.snapshots[t]
    }

    pub fn snapshots(&self) -> &[CsrMatrix] {
        &self.snapshots
    }

    pub fn last(&self) -> &CsrMatrix {
        self.snapshots.last().expect("non-empty sequence")
    }

    /// Undirected edges of snapshot `t` as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self, t: usize) -> Vec<(usize, usize)> {
        self.snapshots[t]
            .iter()
            .filter(|&(i, j, _)| i < j)
            .map(|(i, j, _)| (i, j))
            .collect()
    }

    pub fn has_edge(&self, t: usize, i: usize, j: usize) -> bool {
        self.snapshots[t].get(i, j) != 0.0
    }

    /// The first `n` snapshots, same node set and labels.
    pub fn prefix(&self, n: usize) -> SnapshotSequence {
        SnapshotSequence {
            snapshots: self.snapshots[..n.min(self.len())].to_vec(),
            labels: self.labels.clone(),
            policy: self.policy,
        }
    }

    /// Union of all snapshots as one binary adjacency matrix.
    pub fn union(&self) -> CsrMatrix {
        let n = self.node_count();
        let pairs: BTreeSet<(usize, usize)> = self
            .snapshots
            .iter()
            .flat_map(|a| a.iter().map(|(i, j, _)| (i, j)))
            .collect();
        CsrMatrix::from_triplets(n, n, pairs.into_iter().map(|(i, j)| (i, j, 1.0)))
            .expect("indices come from valid snapshots")
    }

    /// Applies a node relabeling `perm[old] = new` to every snapshot.
    pub fn permuted(&self, perm: &[usize]) -> Result<SnapshotSequence> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::InvalidParam("permutation length differs from node count".into()));
        }
        let lists: Vec<Vec<(usize, usize)>> = (0..self.len())
            .map(|t| self.edges(t).into_iter().map(|(i, j)| (perm[i], perm[j])).collect())
            .collect();
        let mut labels = vec![String::new(); n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        SnapshotSequence::from_edge_lists(n, &lists)?.with_labels(labels)
    }
}

/// Assigns each record a bucket in `0..n`.
fn bucket_assignment(edges: &TemporalEdgeList, n: usize, policy: SegmentPolicy) -> Result<Vec<usize>> {
    let records = edges.records();
    match policy {
        SegmentPolicy::EqualTimeSpan => {
            let distinct = edges.distinct_timestamps();
            if n > distinct {
                return Err(Error::InvalidParam(format!(
                    "{n} snapshots requested but only {distinct} distinct timestamps"
                )));
            }
            let lo = records.iter().map(|r| r.ts).min().unwrap() as i128;
            let hi = records.iter().map(|r| r.ts).max().unwrap() as i128;
            let span = hi - lo;
            Ok(records
                .iter()
                .map(|r| {
                    let b = (r.ts as i128 - lo) * n as i128 / span;
                    (b as usize).min(n - 1)
                })
                .collect())
        }
        SegmentPolicy::EqualEdgeCount => {
            let mut order: Vec<usize> = (0..records.len()).collect();
            order.sort_by_key(|&k| records[k].ts);
            let mut buckets = vec![0; records.len()];
            for (rank, &k) in order.iter().enumerate() {
                buckets[k] = rank * n / records.len();
            }
            Ok(buckets)
        }
    }
}

/// Splits the records into `n_snapshots` snapshots over the full node set.
pub fn segment_snapshots(
    edges: &TemporalEdgeList,
    n_snapshots: usize,
    policy: SegmentPolicy,
) -> Result<SnapshotSequence> {
    if n_snapshots < 2 {
        return Err(Error::InvalidParam("at least 2 snapshots are required".into()));
    }
    if edges.records().is_empty() {
        return Err(Error::EmptyInput("no temporal edge records".into()));
    }
    let buckets = bucket_assignment(edges, n_snapshots, policy)?;
    let mut lists = vec![Vec::new(); n_snapshots];
    for (r, &b) in edges.records().iter().zip(&buckets) {
        lists[b].push((r.u, r.v));
    }
    let mut seq = SnapshotSequence::from_edge_lists(edges.node_count(), &lists)?
        .with_labels(edges.labels().to_vec())?;
    seq.policy = Some(policy);
    Ok(seq)
}

/// Bucket index of each record under the given policy; exposed so callers
/// can audit that segmentation is a partition of the input.
pub fn snapshot_of_records(
    edges: &TemporalEdgeList,
    n_snapshots: usize,
    policy: SegmentPolicy,
) -> Result<Vec<usize>> {
    bucket_assignment(edges, n_snapshots, policy)
}

const MANIFEST: &str = "manifest.json";
const LABELS: &str = "labels.txt";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    node_count: usize,
    n_snapshots: usize,
    #[serde(default)]
    segmentation: Option<SegmentPolicy>,
    labels_file: String,
}

fn snapshot_file(t: usize) -> String {
    format!("snapshot_{t}.edges")
}

/// Writes `manifest.json`, `labels.txt` and one `snapshot_<t>.edges` per
/// snapshot (1-based `t`, one `i j` pair per line with `i < j`).
pub fn save_sequence(seq: &SnapshotSequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = Manifest {
        node_count: seq.node_count(),
        n_snapshots: seq.len(),
        segmentation: seq.policy,
        labels_file: LABELS.into(),
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    let path = dir.join(LABELS);
    let mut labels = String::new();
    for l in seq.labels() {
        labels.push_str(l);
        labels.push('\n');
    }
    fs::write(&path, labels).map_err(|e| Error::io(&path, e))?;

    for t in 0..seq.len() {
        let path = dir.join(snapshot_file(t + 1));
        let mut out = std::io::BufWriter::new(fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
        for (i, j) in seq.edges(t) {
            writeln!(out, "{i} {j}").map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn load_sequence(dir: impl AsRef<Path>) -> Result<SnapshotSequence> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("{}: {e}", path.display()),
    })?;

    let path = dir.join(&manifest.labels_file);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let labels: Vec<String> = text.lines().map(str::to_owned).collect();
    if labels.len() != manifest.node_count {
        return Err(Error::Parse {
            line: labels.len(),
            msg: format!(
                "{} lists {} labels, manifest says {} nodes",
                path.display(),
                labels.len(),
                manifest.node_count
            ),
        });
    }

    let mut lists = Vec::with_capacity(manifest.n_snapshots);
    for t in 1..=manifest.n_snapshots {
        let path = dir.join(snapshot_file(t));
        let text = fs::read_to_string(&path).map_err(|e| Error::CorruptSnapshot {
            index: t,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        let mut edges = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(i)), Some(Ok(j)), None) if i < j && j < manifest.node_count => edges.push((i, j)),
                _ => {
                    return Err(Error::CorruptSnapshot {
                        index: t,
                        msg: format!("line {}: malformed edge `{line}`", n + 1),
                    })
                }
            }
        }
        lists.push(edges);
    }
    let mut seq = SnapshotSequence::from_edge_lists(manifest.node_count, &lists)?.with_labels(labels)?;
    seq.policy = manifest.segmentation;
    Ok(seq)
}
