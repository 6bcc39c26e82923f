//! Lazy and degree-biased random walks and the similarities built from them.
//!
//! cargo run --example walk_similarities

use tempolink::netio::SnapshotSequence;
use tempolink::randwalk::{llrw_transition, mllrw_transition, propagate, snapshot_similarities, WalkConfig};

fn main() -> tempolink::Result<()> {
    // a star: hub 0 with leaves 1..4, plus one edge between two leaves
    let seq = SnapshotSequence::from_edge_lists(5, &[vec![(0, 1), (0, 2), (0, 3), (0, 4), (3, 4)]])?;
    let a = seq.last();

    let lazy = llrw_transition(a, 1.0)?;
    println!("lazy walk from the hub: {:?}", lazy.to_dense().row(0).to_vec());
    let biased = mllrw_transition(a, 1.0, 0.5)?;
    println!("degree-biased walk from the hub: {:?}", biased.to_dense().row(0).to_vec());

    let p4 = propagate(&biased, 4)?;
    println!("4-step rows sum to {:?}", p4.row_sums());

    let pairs = snapshot_similarities(&seq, &WalkConfig::default())?;
    let w = pairs[0].w.to_dense();
    println!("W(3,4) = {:.4} vs W(1,2) = {:.4}: the linked leaves are closer", w[[3, 4]], w[[1, 2]]);
    Ok(())
}
