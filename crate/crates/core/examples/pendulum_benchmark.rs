//! Plain L2 against entropy + spp4 on the damped pendulum.
//!
//! `cargo run --release --example pendulum_benchmark -- [epochs] [lambda] [seeds] [batch] [weighting] [k, 0 for plain]`

use rareae::adam::AdamConfig;
use rareae::data::{rarity_bins, simulate_pendulum, PendulumParams};
use rareae::entropy::EntropyLossConfig;
use rareae::loss::LossKind;
use rareae::metrics::{error_vs_frequency, MetricsReport};
use rareae::trainer::{reconstruct_dataset, train, Scheduler, TrainConfig};

fn main() -> rareae::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let lambda: f64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(1.0);
    let seeds: u64 = args.get(3).and_then(|a| a.parse().ok()).unwrap_or(1);
    let batch_size: usize = args.get(4).and_then(|a| a.parse().ok()).unwrap_or(32);
    let weighting: bool = args.get(5).and_then(|a| a.parse().ok()).unwrap_or(true);
    let k: usize = args.get(6).and_then(|a| a.parse().ok()).unwrap_or(4);

    let data = simulate_pendulum(&PendulumParams::default(), 0)?;
    let rarity = rarity_bins(&data, 20)?;
    let rare = rarity.rarest_fraction(0.1);

    let runs = [
        ("l2", LossKind::L2, Scheduler::Plain),
        (
            "entropy+spp4",
            LossKind::Entropy(EntropyLossConfig {
                lambda,
                ..Default::default()
            }),
            if k == 0 {
                Scheduler::Plain
            } else {
                Scheduler::Spp { k, weighting }
            },
        ),
    ];
    for (name, loss, scheduler) in runs {
        for seed in 0..seeds {
            let cfg = TrainConfig {
                hidden1: 2000,
                hidden2: 200,
                latent: 8,
                loss,
                scheduler,
                adam: AdamConfig::default(),
                batch_size,
                epochs,
                seed,
            };
            let out = train(&data, &cfg, |r| {
                eprintln!(
                    "{name} seed {seed} epoch {} loss {:.5e} {:.1}s",
                    r.epoch, r.mean_loss, r.wall_seconds
                )
            })?;
            let recon = reconstruct_dataset(&out.model, &data, 64)?;
            let report = MetricsReport::compute(data.frames(), &recon)?;
            let freq = error_vs_frequency(&report.mae, &rarity)?;
            let agg = report.aggregates();
            println!(
                "{name} seed {seed}: rare10_mse {:.6} flatness {:.4} psnr {:.3} mse {:.6} ssim {:.4}",
                report.mean_mse_over(&rare),
                freq.flatness,
                agg[1].1.mean,
                agg[0].1.mean,
                agg[2].1.mean
            );
        }
    }
    Ok(())
}
