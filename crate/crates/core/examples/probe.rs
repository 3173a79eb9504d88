use anisoreg_core::diagnostics::sup_bound_report;
use anisoreg_core::exponents::derive_exponents;
use anisoreg_core::field::Field;
use anisoreg_core::grid::build_grid;
use anisoreg_core::presets;
use anisoreg_core::solver::{minimize, SolverConfig};
use std::time::Instant;

fn main() {
    let f1 = presets::f1(2).unwrap();
    let derived = derive_exponents(f1.integrand.profile()).unwrap();
    let radii: Vec<f64> = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8].iter().map(|m| m * 0.5).collect();
    for res in [32usize, 64, 128] {
        let grid = build_grid(f1.domain.clone(), res, false).unwrap();
        let boundary = Field::affine(&grid, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).unwrap();
        let cfg = SolverConfig { grad_tol: 1e-7, max_iters: 60000, ..Default::default() };
        let t0 = Instant::now();
        let out = minimize(&f1.integrand, &grid, &boundary, &cfg).unwrap();
        let rep = sup_bound_report(&f1.integrand, &grid, &out.field, &derived, &[0.5, 0.5], &radii).unwrap();
        println!("N={res} solve {:?} converged={} gn={:.1e}", t0.elapsed(), out.converged, out.final_grad_norm);
        for f in &rep.fits {
            println!("  R={:.3} c1={:.4e} c2={:.4e} res1={} res2={}", f.radius, f.c1, f.c2, f.resolved_c1, f.resolved_c2);
        }
        println!("  spread(resolved c1) = {:?}", rep.c1_spread);
    }
}
