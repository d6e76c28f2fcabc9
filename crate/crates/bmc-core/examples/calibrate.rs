//! Temporary calibration harness for the paired-run experiment.

use bmc_core::controller::BmcParams;
use bmc_core::toygan::{tail_mean_shifting_difference, train, DataSpec, GanTrainConfig};

fn run_pair(seed: u64, cfg_base: &GanTrainConfig) -> (Option<f64>, Option<f64>) {
    let mut base = cfg_base.clone();
    base.seed = seed;
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
    let tail = |cfg: &GanTrainConfig| -> Option<f64> {
        train(cfg)
            .ok()
            .map(|o| tail_mean_shifting_difference(&o, 0.2).unwrap())
    };
    (tail(&base), tail(&bmc))
}

fn scan(label: &str, cfg: &GanTrainConfig, seeds: std::ops::Range<u64>) {
    let mut wins = 0;
    let mut nans = 0;
    let total = seeds.end - seeds.start;
    print!("{label}: ");
    for s in seeds {
        let (b, m) = run_pair(s, cfg);
        match (b, m) {
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
    let t0 = std::time::Instant::now();
    let data = |mean: f64, std: f64| DataSpec::Gauss1d { mean, std };
    let null = BmcParams {
        rho1: 0.0,
        rho2: 0.0,
        beta: 2.0,
    };

    let mut a = GanTrainConfig::defaults(data(4.0, 0.25), null, 0);
    a.fit_metric_stride = 0;
    scan("A mean4 std.25 lr.05 n20k b64 ", &a, 0..16);
    println!("elapsed {:?}", t0.elapsed());

    let mut b = a.clone();
    b.n_steps = 30_000;
    scan("B mean4 std.25 lr.05 n30k b64 ", &b, 0..16);

    let mut c = a.clone();
    c.learning_rate = 0.08;
    c.n_steps = 15_000;
    scan("C mean4 std.25 lr.08 n15k b64 ", &c, 0..16);

    let mut d = a.clone();
    d.data = data(4.0, 0.1);
    scan("D mean4 std.10 lr.05 n20k b64 ", &d, 0..16);

    println!("total {:?}", t0.elapsed());
}
