//! The prepare / predict / evaluate commands driven from library code, as
//! the `tempolink` binary does.
//!
//! cargo run --example cli_pipeline

use std::fs;

use tempolink::pipeline::{cmd_evaluate, cmd_predict, cmd_prepare, RunConfig};
use tempolink::synth::PlantedConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::temp_dir().join("tempolink-pipeline-example");
    fs::create_dir_all(&root)?;

    // write a timestamped edge file: snapshot t becomes timestamp t
    let net = PlantedConfig::default().generate()?;
    let mut text = String::new();
    for t in 0..net.sequence.len() {
        for (i, j) in net.sequence.edges(t) {
            text.push_str(&format!("v{i} v{j} {t}\n"));
        }
    }
    let dataset = root.join("planted.txt");
    fs::write(&dataset, text)?;

    let cfg = RunConfig::parse(&format!(
        "dataset = {}\nn_snapshots = 5\nsnapshot_dir = {}\noutput_dir = {}\nmethods = luls1, aa, dcn\ntop = 20\n",
        dataset.display(),
        root.join("snapshots").display(),
        root.join("out").display()
    ))?;
    cmd_prepare(&cfg)?;
    let predicted = cmd_predict(&cfg)?;
    println!("ranked candidates in {}", predicted.links.unwrap().display());
    let evaluated = cmd_evaluate(&cfg)?;
    print!("{}", fs::read_to_string(&evaluated.table)?);
    println!("rerun with: tempolink predict --config {}", predicted.metadata.display());
    Ok(())
}
