//! Ranks the pairs most likely to connect and the edges most likely to
//! disappear in the next snapshot.
//!
//! cargo run --example rank_candidates

use tempolink::factor::{fit, HyperParams};
use tempolink::predict::{rank_links, rank_unlinks, score_matrix, write_ranked_csv};
use tempolink::randwalk::{snapshot_similarities, WalkConfig};
use tempolink::synth::PlantedConfig;

fn main() -> tempolink::Result<()> {
    let net = PlantedConfig::default().generate()?;
    let seq = &net.sequence;
    let pairs = snapshot_similarities(seq, &WalkConfig::default())?;
    let r = score_matrix(&fit(&pairs, &HyperParams::default())?)?;

    let links = rank_links(&r, seq.last(), Some(5));
    println!("top new links:");
    for p in &links.pairs {
        let same = net.community[p.i] == net.community[p.j];
        println!("  {:>2} - {:>2}  score {:.4}  same community: {same}", p.i, p.j, p.score);
    }
    let unlinks = rank_unlinks(&r, seq.last(), Some(5));
    println!("most likely to disappear:");
    for p in &unlinks.pairs {
        let latent = net.latent.contains(&(p.i, p.j));
        println!("  {:>2} - {:>2}  score {:.4}  long-term edge: {latent}", p.i, p.j, p.score);
    }

    let path = std::env::temp_dir().join("tempolink-links.csv");
    write_ranked_csv(&path, &rank_links(&r, seq.last(), None), seq.labels())?;
    println!("full ranking written to {}", path.display());
    Ok(())
}
