//! Held-out evaluation with balanced negatives, and a custom predictor
//! plugged into the same harness.
//!
//! cargo run --example evaluation_protocol

use tempolink::evalkit::{auc, average_precision, evaluate, make_split, PairScorer, Predictor, Task};
use tempolink::netio::SnapshotSequence;
use tempolink::synth::PlantedConfig;

/// Scores a pair by how many training snapshots contained it.
struct Recurrence;

impl Predictor for Recurrence {
    fn name(&self) -> String {
        "recurrence".into()
    }

    fn train(&self, train: &SnapshotSequence, _: Task, _: u64) -> tempolink::Result<Box<dyn PairScorer>> {
        let train = train.clone();
        Ok(Box::new(move |i: usize, j: usize| {
            (0..train.len()).filter(|&t| train.has_edge(t, i, j)).count() as f64
        }))
    }
}

fn main() -> tempolink::Result<()> {
    let c = auc(&[3.0, 1.0], &[2.0, 1.0])?;
    println!("AUC {} from n={} n'={} n''={}", c.auc, c.n, c.n_prime, c.n_dprime);
    println!("AP of [hit, miss, hit, miss] = {:.4}", average_precision(&[true, false, true, false])?);

    let seq = PlantedConfig::default().generate()?.sequence;
    for task in [Task::Link, Task::Unlink] {
        let split = make_split(&seq, task, 0)?;
        println!(
            "{task}: {} positives, {} negatives, trained on {} snapshots",
            split.test_positives.len(),
            split.test_negatives.len(),
            split.train.len()
        );
        let report = evaluate(&seq, &Recurrence, task, 5, 0)?;
        println!("  {}", report.csv_row("planted"));
    }
    Ok(())
}
