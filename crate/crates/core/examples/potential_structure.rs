//! The built-in double-phase potentials, their fluxes, and the randomized
//! structure checks.

use double_phase::grid::Grid;
use double_phase::operator::{
    check_flux_consistency, check_growth_sandwich, check_structural_s, check_uniform_convexity, flux, potential_value, PotentialSpec,
};
use double_phase::profile::{Profile, Weight};
use double_phase::random::{fork, seeded};

fn main() {
    let g = Grid::new(2, 4.0, 33).expect("grid");
    let typical = PotentialSpec::typical(Profile::constant(2.0), Profile::constant(3.0));
    println!("typical p = 2, q = 3 at x = 0:");
    for r in [0.0, 0.5, 1.0, 2.0] {
        let xi = [r, 0.0];
        println!(
            "  |ξ| = {r}: 𝒜 = {:.6}  A = {:?}",
            potential_value(&typical, &[0.0, 0.0], &xi),
            flux(&typical, &[0.0, 0.0], &xi)
        );
    }

    let specs = [
        ("typical", typical.clone()),
        (
            "weighted",
            PotentialSpec::weighted(
                Profile::constant(2.0),
                Profile::constant(3.0),
                Weight::constant(1.0),
                Weight::gaussian(1.0, 2.0),
            ),
        ),
        (
            "two-branch",
            PotentialSpec::bcm(
                Profile::constant(2.0),
                Profile::constant(3.0),
                Profile::constant(2.5),
                Profile::constant(3.5),
                Weight::constant(0.5),
            ),
        ),
    ];
    let mut rng = seeded(11);
    for (name, spec) in &specs {
        let growth = check_growth_sandwich(spec, &g, 10_000, &mut fork(&mut rng));
        let fd = check_flux_consistency(spec, &g, 1e-3, 10_000, &mut fork(&mut rng));
        let conv = check_uniform_convexity(spec, &[0.1, 0.3, 0.5], &g, 10_000, &mut fork(&mut rng));
        println!(
            "{name:>10}: 𝒜 <= A·ξ violations {}, c1 {:.3} c2 {:.3}; flux error {:.1e}; δ̂ {:?}",
            growth.violations,
            growth.c1,
            growth.c2,
            fd.extremal_ratio,
            conv.entries.iter().map(|e| format!("{:.2e}", e.delta_hat)).collect::<Vec<_>>()
        );
    }

    // A·ξ <= s 𝒜 fails just past the seam when s is too small
    for s in [2.0, 3.0] {
        let rep = check_structural_s(&typical, &Profile::constant(s), &g, 10_000, &mut fork(&mut rng));
        println!(
            "A·ξ <= s𝒜 with s = {s}: {} violations, worst ratio {:.4}",
            rep.violations, rep.extremal_ratio
        );
    }
}
