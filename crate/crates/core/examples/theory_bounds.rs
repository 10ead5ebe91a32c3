//! Closed-form conditions and bounds for a few problem sizes.

use greedy_ssc::pursuit::Method;
use greedy_ssc::theory::{
    admissible_smax, clustering_condition, reference_rho_of_aff, reference_rho_of_sigma,
    tau_admissible_range, theorem3_tp_lower_bound, TheoryConstants,
    TheoryParams,
};

fn main() -> greedy_ssc::Result<()> {
    for (sigma, aff) in [(0.0, 0.002), (0.0, 0.1), (0.05, 0.2), (0.5, 0.5)] {
        let p = TheoryParams {
            m: 2000,
            counts: vec![5000; 3],
            dims: vec![50; 3],
            sigma,
            s_max: 10,
            max_aff: aff,
            method: Method::Omp,
            constants: TheoryConstants::default(),
        };
        let c = clustering_condition(&p)?;
        println!("sigma={sigma} aff={aff}: lhs {:.4} rhs {:.5} satisfied {}", c.lhs, c.rhs, c.satisfied);
    }

    let (d, n, m, sigma) = (1000, 2001, 5000, 0.5);
    let range = tau_admissible_range(d, m, sigma)?;
    println!("tau range for d={d} m={m} sigma={sigma}: [0, {:.4}]", range.upper);
    for tau in [0.0, 0.1, 0.2, 0.3] {
        let b = theorem3_tp_lower_bound(d, n, m, sigma, tau, 0.1)?;
        println!("  tau={tau}: TP >= {} (admissible {})", b.value, b.admissible);
    }
    println!("largest admissible s_max for d={d}, n={n}: {}", admissible_smax(d, n, 0.1)?);

    for aff in [0.0, 0.3, 0.6] {
        println!("reference rho at aff={aff}: {:.3}", reference_rho_of_aff(aff)?);
    }
    println!("reference rho at sigma=0.8: {:.3}", reference_rho_of_sigma(0.8)?);
    Ok(())
}
