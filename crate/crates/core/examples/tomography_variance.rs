//! Variance analytics of the tomography estimator: separating the
//! per-unitary and per-shot components empirically and comparing against the
//! closed-form predictions, including the sweet-spot scaling 5^N and the
//! measurement-count comparison with the 3^N-setting baseline.
//!
//! ```bash
//! cargo run --release --example tomography_variance
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use xytomo::drive::DriveSet;
use xytomo::qstate::{self, QubitCount};
use xytomo::sampler::{run_experiment, ExperimentPlan};
use xytomo::stats;
use xytomo::tomography::{
    predict_delta_m, predict_delta_u, reconstruct, required_measurements, NaiveBaseline,
    VarianceMode,
};

fn main() -> xytomo::Result<()> {
    println!("shot-noise factor prod_q(5 + 2 S_q) and per-unitary estimates\n");
    println!("  N   (dM)^2 = 5^N   (dU)^2 amortized (mu = 0.4)   naive/Fourier budget ratio");
    for n in 1..=6usize {
        let ds = DriveSet::sweet_spot(QubitCount::new(n)?);
        let dm = predict_delta_m(&ds);
        let du = predict_delta_u(&ds, 0.4, VarianceMode::Amortized);
        let naive = NaiveBaseline::new(QubitCount::new(n)?, 0.4, 0.1)?.n_total();
        let fourier = required_measurements(&ds, 0.1);
        println!("  {n}   {dm:12.1}   {du:10.4}   {:26.3}", naive / fourier);
    }

    // empirical separation at N = 3: run at two shot budgets and solve
    // V N_U = dU^2 + (1/N_M)(dM^2-ish) for the two components
    let n = QubitCount::new(3)?;
    let ds = DriveSet::sweet_spot(n);
    let mut rng = ChaCha12Rng::seed_from_u64(21);
    let rho = qstate::gen_uniform(n, 0.5, &mut rng)?;
    let (n_u, trials) = (48usize, 96usize);
    let shots = [4usize, 64];
    let mean_sq: Vec<f64> = shots
        .iter()
        .enumerate()
        .map(|(s, &n_m)| {
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let plan = ExperimentPlan::new(
                        n_u,
                        n_m,
                        1e5,
                        stats::derive_seed(777, (s * trials + t) as u64),
                    )
                    .unwrap();
                    let log = run_experiment(&ds, &rho, &plan).unwrap();
                    reconstruct(&ds, &log).unwrap().squared_error(&rho)
                })
                .sum::<f64>()
                / trials as f64
        })
        .collect();
    let nu = n_u as f64;
    let inv = [1.0 / shots[0] as f64, 1.0 / shots[1] as f64];
    let dm_emp = (mean_sq[0] * nu - mean_sq[1] * nu) / (inv[0] - inv[1]);
    let du_emp = mean_sq[1] * nu - dm_emp * inv[1];
    println!("\nN = 3, purity {:.3}: empirical separation over {trials} trials", rho.purity());
    println!("  (dM)^2 empirical {dm_emp:8.2}   predicted {:8.2}", predict_delta_m(&ds));
    println!(
        "  (dU)^2 empirical {du_emp:8.2}   amortized {:8.2}",
        predict_delta_u(&ds, rho.purity(), VarianceMode::Amortized)
    );
    Ok(())
}
