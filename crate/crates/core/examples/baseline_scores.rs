//! Adamic–Adar and decayed common-neighbour scores on small graphs.
//!
//! cargo run --example baseline_scores

use tempolink::baselines::{adamic_adar, decayed_common_neighbors, StaticContext};
use tempolink::evalkit::Task;
use tempolink::netio::SnapshotSequence;

fn main() -> tempolink::Result<()> {
    // 0 and 1 share neighbours 2 and 3 in the first snapshot, only 2 later
    let seq = SnapshotSequence::from_edge_lists(
        4,
        &[vec![(0, 2), (1, 2), (0, 3), (1, 3)], vec![(0, 2), (1, 2)]],
    )?;

    let link_ctx = StaticContext::for_task(&seq, Task::Link);
    let unlink_ctx = StaticContext::for_task(&seq, Task::Unlink);
    println!("AA(0,1) on the training union: {:.4}", adamic_adar(&link_ctx, 0, 1));
    println!("AA(0,1) on the last snapshot:  {:.4}", adamic_adar(&unlink_ctx, 0, 1));

    for theta in [0.0, 0.4, 1.0] {
        println!("DCN(0,1) with theta {theta}: {:.2}", decayed_common_neighbors(&seq, theta, 0, 1));
    }
    Ok(())
}
