use scma_ris::channel::PhaseMode;
use scma_ris::sim::{run_sweep, DecoderKind, Scheme, SimConfig};

fn main() {
    let grid: Vec<f64> = (-12..=15).step_by(3).map(|x| x as f64).collect();
    let mut configs: Vec<(&str, SimConfig)> = Vec::new();
    let base = SimConfig {
        scheme: Scheme::Scma,
        decoder: DecoderKind::Mpa,
        phase_mode: PhaseMode::Blind,
        m: 2,
        n: 20,
        k: 4,
        sweeps: 1,
        snr_grid_db: grid.clone(),
        max_frames: 30_000,
        min_bit_errors: 400,
        master_seed: 7,
    };
    let conv = SimConfig {
        snr_grid_db: (0..=36).step_by(3).map(|x| x as f64).collect(),
        ..base.clone()
    };
    configs.push(("conv", conv));
    for n in [20usize, 30, 40] {
        configs.push((
            "blind",
            SimConfig {
                scheme: Scheme::ScmaRis,
                n,
                snr_grid_db: (-12..=18).step_by(3).map(|x| x as f64).collect(),
                ..base.clone()
            },
        ));
        configs.push((
            "opt",
            SimConfig {
                scheme: Scheme::ScmaRis,
                phase_mode: PhaseMode::Optimized,
                n,
                snr_grid_db: (-24..=3).step_by(3).map(|x| x as f64).collect(),
                ..base.clone()
            },
        ));
    }
    for (label, config) in configs {
        let records = run_sweep(&config).unwrap();
        print!("{label} N={:<3}", config.n);
        for r in &records {
            print!(" {:.0}:{:.1e}", r.snr_db, r.ber);
        }
        println!();
    }
}
