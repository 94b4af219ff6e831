//! Full state tomography end to end: sample random rotation times, simulate
//! Z-basis shots, apply the inverse map, and average.
//!
//! ```bash
//! cargo run --example reconstruct_state
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use xytomo::drive::DriveSet;
use xytomo::qstate::{self, QubitCount};
use xytomo::recon::AveragingWindow;
use xytomo::sampler::{run_experiment, ExperimentPlan};
use xytomo::tomography::{
    predict_delta_m, predict_delta_u, reconstruct, reconstruct_analytic, VarianceMode,
};

fn main() -> xytomo::Result<()> {
    let n = QubitCount::new(2)?;
    let ds = DriveSet::sweet_spot(n);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let rho = qstate::gen_geometric(n, 0.5, &mut rng)?;
    println!("true state: 2 qubits, purity {:.4}\n", rho.purity());

    // the estimator's expectation is exact once the rotation-time average is
    // taken over an infinite window
    let ideal = reconstruct_analytic(&ds, &rho, AveragingWindow::Infinite);
    let ideal_err: f64 = ideal
        .rho_hat
        .iter()
        .zip(rho.entries().iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    println!("analytic averaging (no sampling): total squared error {ideal_err:.3e}");

    // Monte-Carlo pipeline: N_U rotations, N_M shots each
    for (n_u, n_m) in [(200usize, 10usize), (2000, 10), (20000, 10)] {
        let plan = ExperimentPlan::new(n_u, n_m, 1e5, 12345)?;
        let log = run_experiment(&ds, &rho, &plan)?;
        let est = reconstruct(&ds, &log)?;
        let err = est.squared_error(&rho);
        let predicted = predict_delta_u(&ds, rho.purity(), VarianceMode::Amortized) / n_u as f64
            + predict_delta_m(&ds) / (n_u as f64 * n_m as f64);
        println!(
            "N_U = {n_u:6}, N_M = {n_m}: sum_ab |rho_hat - rho|^2 = {err:.3e}  (predicted {predicted:.3e})"
        );
    }

    // the raw linear-inversion estimate is Hermitian and unit trace but not
    // necessarily positive; clip it if a physical state is required
    let plan = ExperimentPlan::new(500, 10, 1e5, 99)?;
    let log = run_experiment(&ds, &rho, &plan)?;
    let est = reconstruct(&ds, &log)?;
    let clipped = qstate::clip_to_physical(n, &est.rho_hat)?;
    println!(
        "\nraw estimate trace {:.6}; after eigenvalue clipping: purity {:.4}",
        est.trace().re,
        clipped.purity()
    );
    Ok(())
}
