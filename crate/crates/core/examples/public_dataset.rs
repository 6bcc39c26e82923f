//! Evaluates every method on a real timestamped interaction network.
//!
//! With no arguments it uses the bundled student message network
//! (gzip-compressed `u v minutes` triples) cut into 8 snapshots:
//!
//! cargo run --release --example public_dataset -- [edges-file] [n_snapshots]

use std::fs::File;
use std::io::Read;
use std::time::Instant;

use flate2::read::GzDecoder;
use tempolink::evalkit::{evaluate, Task};
use tempolink::netio::{parse_temporal_edges, segment_snapshots, InputFormat, SegmentPolicy};
use tempolink::pipeline::{predictor_for, RunConfig, METHODS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/collegemsg.txt.gz").to_string());
    let n_snapshots: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);

    let mut raw = Vec::new();
    File::open(&path)?.read_to_end(&mut raw)?;
    let reader: Box<dyn Read> = if path.ends_with(".gz") {
        Box::new(GzDecoder::new(&raw[..]))
    } else {
        Box::new(&raw[..])
    };
    let edges = parse_temporal_edges(reader, InputFormat::WhitespaceTriples)?;
    let seq = segment_snapshots(&edges, n_snapshots, SegmentPolicy::EqualTimeSpan)?;
    println!("{} records, {} nodes, {} snapshots", edges.records().len(), seq.node_count(), seq.len());

    let cfg = RunConfig::default();
    for task in [Task::Link, Task::Unlink] {
        for name in METHODS {
            let start = Instant::now();
            let predictor = predictor_for(name, &cfg)?;
            let r = evaluate(&seq, predictor.as_ref(), task, cfg.trials, 0)?;
            println!(
                "{:<6} {:<6} auc={:.4} ap={:.4} ({:.1}s)",
                task,
                r.method,
                r.auc,
                r.ap,
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
