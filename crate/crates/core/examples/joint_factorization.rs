//! Jointly factorizes the similarities of several snapshots into a shared
//! factor U and one temporary factor per snapshot.
//!
//! RUST_LOG=debug cargo run --example joint_factorization   (per-iteration log)

use tempolink::factor::{fit, FactorState, HyperParams, SmoothnessMode};
use tempolink::randwalk::{snapshot_similarities, WalkConfig};
use tempolink::synth::PlantedConfig;

fn main() -> tempolink::Result<()> {
    env_logger::init();
    let net = PlantedConfig {
        nodes: 30,
        snapshots: 4,
        ..Default::default()
    }
    .generate()?;
    let pairs = snapshot_similarities(&net.sequence, &WalkConfig::default())?;

    for mode in [SmoothnessMode::OneSided, SmoothnessMode::FullGradient] {
        let hp = HyperParams {
            smoothness_mode: mode,
            ..HyperParams::default()
        };
        let state = fit(&pairs, &hp)?;
        println!(
            "{mode}: {} iterations, converged = {}, objective {:.4} -> {:.4}",
            state.iters_run,
            state.converged,
            state.objective_trace[0],
            state.objective_trace.last().unwrap()
        );
        let errs: Vec<String> = state.reconstruction_errors(&pairs)?.iter().map(|e| format!("{e:.4}")).collect();
        println!("  per-snapshot reconstruction error: {}", errs.join(" "));
    }

    let hp = HyperParams::default();
    let state = fit(&pairs, &hp)?;
    let dir = std::env::temp_dir().join("tempolink-factors-example");
    state.save(&dir, &hp)?;
    let (reloaded, _) = FactorState::load(&dir)?;
    println!("U saved to {} and reloaded: {}", dir.display(), reloaded.u == state.u);
    Ok(())
}
