//! Compares the factorization variants against the baselines on a
//! planted-community network with stable and transient edges.
//!
//! cargo run --release --example planted_benchmark -- [seed]

use tempolink::baselines::{AdamicAdar, DecayedCommonNeighbors, Luls, Variant};
use tempolink::evalkit::{evaluate, Predictor, Task};
use tempolink::factor::HyperParams;
use tempolink::randwalk::WalkConfig;
use tempolink::synth::PlantedConfig;

fn main() -> tempolink::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let net = PlantedConfig { seed, ..Default::default() }.generate()?;
    let seq = &net.sequence;
    println!("{} nodes, {} snapshots", seq.node_count(), seq.len());
    for t in 0..seq.len() {
        println!("  G_{}: {} edges", t + 1, seq.edges(t).len());
    }

    let hyper = HyperParams::default();
    let mut methods: Vec<Box<dyn Predictor>> = Variant::ALL
        .iter()
        .map(|&v| Box::new(Luls::new(v, WalkConfig::default(), hyper)) as Box<dyn Predictor>)
        .collect();
    methods.push(Box::new(AdamicAdar));
    methods.push(Box::new(DecayedCommonNeighbors { theta: hyper.theta }));

    println!("{:<8} {:>6} {:>10} {:>10}", "method", "task", "auc", "ap");
    for task in [Task::Link, Task::Unlink] {
        for m in &methods {
            let r = evaluate(seq, m.as_ref(), task, 5, 0)?;
            println!("{:<8} {:>6} {:>10.4} {:>10.4}", r.method, task, r.auc, r.ap);
        }
    }
    Ok(())
}
