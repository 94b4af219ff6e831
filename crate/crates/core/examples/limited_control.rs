//! The single-global-drive regime: one common rotation time for all qubits,
//! so reconstruction relies on the smallest nonzero linear combination of the
//! Rabi frequencies. Shows the exponential frequency ladder against random
//! frequency sets, the required rotation-time budgets, and the 1/T decay of
//! the finite-window systematic bias.
//!
//! ```bash
//! cargo run --release --example limited_control
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use xytomo::limited::{
    min_theta, min_theta_ladder_exact, required_time, systematic_bias, FrequencySet, TimeTarget,
};
use xytomo::qstate::{self, QubitCount};
use xytomo::stats;

fn main() -> xytomo::Result<()> {
    println!("smallest nonzero |sum_q lambda_q x_q|, x in {{-2..2}}^N\n");
    println!("  N    ladder (exact)    random (log-mean of 60 draws)");
    for n in 2..=7usize {
        let (ladder_val, _) = min_theta_ladder_exact(n, 3);
        let ladder = (*ladder_val.numer() as f64) / (*ladder_val.denom() as f64);
        let logs: Vec<f64> = (0..60)
            .filter_map(|s| {
                let fs = FrequencySet::uniform_random(n, 1.0, stats::derive_seed(17, (n * 100 + s) as u64));
                min_theta(&fs).ok().map(|mt| mt.value.ln())
            })
            .collect();
        let random = stats::mean(&logs).exp();
        println!("  {n}    {ladder:14.3e}    {random:14.3e}");
    }
    println!("\n(ladder decays as 3^-(N-1); random sets decay roughly as 4.6^-N)");

    // rotation-time budgets for full tomography vs purity only
    let fs = FrequencySet::ladder(4, 3, 1.0);
    println!(
        "\n4-qubit ladder: T >~ {:.1} for tomography, {:.1} for purity",
        required_time(&fs, TimeTarget::Tomography)?,
        required_time(&fs, TimeTarget::Purity)?
    );

    // finite-window systematic bias of the single-time reconstruction
    let fs2 = FrequencySet::ladder(2, 3, 1.0);
    let ds = fs2.drives()?;
    let theta_min = min_theta(&fs2)?.value;
    let n = QubitCount::new(2)?;
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    let rho = qstate::gen_uniform(n, 0.5, &mut rng)?;
    println!("\nsingle-time reconstruction bias (2-qubit ladder, theta_min = {theta_min:.3}):");
    println!("    T * theta_min    max_ab |rho_hat - rho|");
    for k in 0..6 {
        let t = 30.0 / theta_min * 10f64.powi(k) / 3.0;
        let bias = systematic_bias(&ds, t, &rho)?;
        println!("    {:12.0}    {bias:.3e}", t * theta_min);
    }

    // a degenerate set is rejected outright
    match min_theta(&FrequencySet::explicit(vec![1.0, 0.5])) {
        Err(e) => println!("\ndegenerate set {{1, 0.5}}: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
