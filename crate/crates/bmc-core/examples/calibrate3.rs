//! Third calibration pass: sharp data at the tamed learning rate.

use bmc_core::controller::BmcParams;
use bmc_core::toygan::{tail_mean_shifting_difference, train, DataSpec, GanTrainConfig};

fn scan(label: &str, cfg_base: &GanTrainConfig, seeds: std::ops::Range<u64>) {
    let mut wins = 0;
    let mut nans = 0;
    let total = seeds.end - seeds.start;
    print!("{label}: ");
    for s in seeds {
        let mut base = cfg_base.clone();
        base.seed = s;
        base.bmc = BmcParams {
            rho1: 0.0,
            rho2: 0.0,
            beta: 2.0,
        };
        let mut bmc = base.clone();
        bmc.bmc = BmcParams {
            rho1: 0.1,
            rho2: 0.01,
            beta: 2.0,
        };
        let tail = |cfg: &GanTrainConfig| {
            train(cfg)
                .ok()
                .map(|o| tail_mean_shifting_difference(&o, 0.2).unwrap())
        };
        match (tail(&base), tail(&bmc)) {
            (Some(b), Some(m)) if m < b => {
                wins += 1;
                print!("W");
            }
            (Some(_), Some(_)) => print!("-"),
            _ => {
                nans += 1;
                print!("X");
            }
        }
        use std::io::Write;
        std::io::stdout().flush().ok();
    }
    println!("  wins {wins}/{total} nans {nans}");
}

fn main() {
    let null = BmcParams {
        rho1: 0.0,
        rho2: 0.0,
        beta: 2.0,
    };

    let mut h = GanTrainConfig::defaults(
        DataSpec::Gauss1d {
            mean: 4.0,
            std: 0.1,
        },
        null,
        0,
    );
    h.fit_metric_stride = 0;
    h.learning_rate = 0.03;
    h.n_steps = 20_000;
    scan("H mean4 std.10 lr.03 n20k", &h, 0..16);

    let mut i = h.clone();
    i.n_steps = 30_000;
    scan("I mean4 std.10 lr.03 n30k", &i, 0..16);
}
