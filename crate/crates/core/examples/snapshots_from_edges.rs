//! Turns timestamped interactions into a snapshot sequence and back.
//!
//! cargo run --example snapshots_from_edges

use tempolink::netio::{load_sequence, parse_temporal_edges, save_sequence, segment_snapshots, InputFormat, SegmentPolicy};

const EDGES: &str = "\
# user user time
alice bob 1
bob carol 2
alice bob 3
carol dave 5
alice carol 6
bob dave 8
";

fn main() -> tempolink::Result<()> {
    let edges = parse_temporal_edges(EDGES.as_bytes(), InputFormat::WhitespaceTriples)?;
    println!("{} records over {} nodes", edges.records().len(), edges.node_count());

    for policy in [SegmentPolicy::EqualTimeSpan, SegmentPolicy::EqualEdgeCount] {
        let seq = segment_snapshots(&edges, 3, policy)?;
        println!("{policy}:");
        for t in 0..seq.len() {
            let named: Vec<String> = seq
                .edges(t)
                .into_iter()
                .map(|(i, j)| format!("{}-{}", seq.labels()[i], seq.labels()[j]))
                .collect();
            println!("  G_{}: {}", t + 1, named.join(" "));
        }
    }

    let dir = std::env::temp_dir().join("tempolink-snapshots-example");
    let seq = segment_snapshots(&edges, 3, SegmentPolicy::default())?;
    save_sequence(&seq, &dir)?;
    assert_eq!(load_sequence(&dir)?, seq);
    println!("saved and reloaded {}", dir.display());
    Ok(())
}
