use bmc_core::controller::BmcParams;
use bmc_core::toygan::{train, DataSpec, GanTrainConfig};
fn main() {
    let mut cfg = GanTrainConfig::defaults(
        DataSpec::Gauss1d { mean: 4.0, std: 0.25 },
        BmcParams { rho1: 0.1, rho2: 0.01, beta: 2.0 },
        0,
    );
    cfg.fit_metric_stride = 0;
    cfg.n_steps = 2000;
    let t = std::time::Instant::now();
    let out = train(&cfg).unwrap();
    println!("2000 steps: {:?}  (final loss_d {})", t.elapsed(), out.records.last().unwrap().loss_d);
}
