//! Single-axis X/Y rotations: drive parameters, the rotation eigenbasis, and
//! the forward map from density-matrix elements to outcome probabilities.
//!
//! ```bash
//! cargo run --example rotation_drives
//! ```

use num_complex::Complex64;
use xytomo::drive::{
    eigenbasis, forward_map, outcome_probabilities, DriveSet, QubitDrive, RotationTimes,
};
use xytomo::qstate::{BasisIndex, DensityMatrix, PureState, QubitCount};

fn main() -> xytomo::Result<()> {
    // a detuned pulse rotates the qubit about a tilted Bloch axis at the
    // generalized Rabi frequency lambda = sqrt(g^2 + nu^2)
    let d = QubitDrive::new(2.0f64.sqrt(), 1.0, 0.0)?;
    println!(
        "drive g={:.4} nu={:.4}: lambda={:.4}, S={:.4} (sweet spot: S = 0 at g = sqrt2 nu)",
        d.g(),
        d.nu(),
        d.lambda(),
        d.s_param()
    );
    let (plus, minus) = eigenbasis(&d);
    println!("rotation axis eigenstates (amplitudes over |up>, |down>):");
    println!("  |+> = [{:.4}, {:.4}]", plus[0], plus[1]);
    println!("  |-> = [{:.4}, {:.4}]", minus[0], minus[1]);

    // Rabi oscillation of the up-state survival probability:
    // P_up(t) = 1 - (g^2/lambda^2) sin^2(lambda t / 2)
    let n = QubitCount::new(1)?;
    let ds = DriveSet::new(vec![d])?;
    let rho = DensityMatrix::from_pure(&PureState::basis(n, 0));
    println!("\n   t      P_up(t)   closed form");
    for k in 0..8 {
        let t = 0.5 * k as f64;
        let p = outcome_probabilities(&ds, &RotationTimes(vec![t]), &rho)?;
        let closed = 1.0 - (2.0 / 3.0) * (d.lambda() * t / 2.0).sin().powi(2);
        println!("  {t:4.1}   {:.6}   {closed:.6}", p[0]);
    }

    // the forward map M_{s,a,b} is the coefficient of rho_ab in P_s; its
    // diagonal coefficients sum to one (probability completeness)
    let ds2 = DriveSet::sweet_spot(QubitCount::new(2)?);
    let t = RotationTimes(vec![0.7, 1.9]);
    let mut total = Complex64::ZERO;
    for s in 0..4 {
        total += forward_map(&ds2, &t, BasisIndex(s), BasisIndex(2), BasisIndex(2));
    }
    println!("\ntwo qubits: sum_s M_(s,a,a) = {total:.6} (completeness)");
    Ok(())
}
