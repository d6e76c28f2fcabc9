//! Second calibration pass: shorter data distance to cap the |D| transient.

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
    let gauss = |mean: f64, std: f64| DataSpec::Gauss1d { mean, std };

    let mut e = GanTrainConfig::defaults(gauss(2.5, 0.15), null, 0);
    e.fit_metric_stride = 0;
    scan("E mean2.5 std.15 lr.05 n20k", &e, 0..16);

    let mut f = e.clone();
    f.data = gauss(3.0, 0.2);
    scan("F mean3.0 std.20 lr.05 n20k", &f, 0..16);

    let mut g = e.clone();
    g.data = gauss(4.0, 0.25);
    g.learning_rate = 0.03;
    g.n_steps = 30_000;
    scan("G mean4.0 std.25 lr.03 n30k", &g, 0..16);
}
