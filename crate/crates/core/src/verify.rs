//! Sampled verification of the structural hypotheses of an integrand.
//!
//! For the closed-form power-sum family every one of these bounds is an
//! algebraic identity, so the expected violation count is zero and any hit
//! points at a broken integrand (see the corrupted-exponent negative control
//! in the tests).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::BoxDomain;
use crate::integrand::{Integrand, MatrixPoint};

/// Relative slack tolerated before a sample counts as a violation; covers
/// `powf` rounding only.
pub const STRUCTURE_REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct StructureCheck {
    pub name: &'static str,
    pub violations: usize,
    /// Largest relative margin seen; values above [`STRUCTURE_REL_TOL`]
    /// are violations.
    pub worst_slack: f64,
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<StructureCheck>,
    /// Smallest scaling exponent consistent with the sampled points; flags
    /// over-conservative `tau` inputs.
    pub empirical_tau: f64,
}

impl StructureReport {
    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn check(&self, name: &str) -> Option<&StructureCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tally {
    name: &'static str,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, violations: 0, worst: f64::NEG_INFINITY }
    }

    fn record(&mut self, margin: f64) {
        if margin > STRUCTURE_REL_TOL {
            self.violations += 1;
        }
        if margin > self.worst {
            self.worst = margin;
        }
    }

    fn into_check(self) -> StructureCheck {
        StructureCheck { name: self.name, violations: self.violations, worst_slack: self.worst }
    }
}

fn rel_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
    (lhs - rhs) / scale
}

/// Apply a random orthogonal map (Givens rotations plus sign flips) to `col`.
fn random_rotation(rng: &mut ChaCha8Rng, col: &mut [f64]) {
    let m = col.len();
    if m >= 2 {
        for _ in 0..2 * m {
            let a = rng.gen_range(0..m);
            let mut b = rng.gen_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = theta.sin_cos();
            let (va, vb) = (col[a], col[b]);
            col[a] = c * va - s * vb;
            col[b] = s * va + c * vb;
        }
    }
    for v in col.iter_mut() {
        if rng.gen_bool(0.5) {
            *v = -*v;
        }
    }
}

/// Check the structural hypotheses on `samples` seeded random points of
/// `domain x R^{m x n}`: column-radial invariance, the scaling bound with
/// `tau`, subadditivity, the two-sided growth sandwich, the section
/// derivative bound and monotonicity in each column norm.
pub fn verify_structure(
    integrand: &Integrand,
    domain: &BoxDomain,
    samples: usize,
    seed: u64,
) -> StructureReport {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = integrand.n();
    let m = integrand.m();
    let tau = integrand.tau_f64();
    let q = integrand.q_f64();
    let p = integrand.p_f64().to_vec();

    let mut radial = Tally::new("radial_invariance");
    let mut scaling = Tally::new("scaling_bound");
    let mut subadd = Tally::new("subadditivity");
    let mut sandwich = Tally::new("growth_sandwich");
    let mut section = Tally::new("section_derivative_bound");
    let mut monotone = Tally::new("radial_monotonicity");
    let mut empirical_tau = 1.0f64;

    let density = |x: &[f64], xi: &[f64]| {
        integrand
            .eval_density(&MatrixPoint::new(x.to_vec(), xi.to_vec()))
            .expect("sample point lies inside the domain")
    };

    for k in 0..samples {
        let x: Vec<f64> = (0..n)
            .map(|i| rng.gen_range(domain.lo[i]..domain.hi[i]))
            .collect();
        let scale = (rng.gen_range(-2.5f64..2.5)).exp();
        let xi: Vec<f64> = (0..m * n)
            .map(|_| scale * (rng.gen_range(-1.0f64..1.0) + rng.gen_range(-1.0f64..1.0)))
            .collect();
        let eta: Vec<f64> = (0..m * n)
            .map(|_| scale * (rng.gen_range(-1.0f64..1.0) + rng.gen_range(-1.0f64..1.0)))
            .collect();
        let f_xi = density(&x, &xi);

        // per-column orthogonal maps leave the density unchanged
        {
            let mut rotated = xi.clone();
            for i in 0..n {
                random_rotation(&mut rng, &mut rotated[i * m..(i + 1) * m]);
            }
            let f_rot = density(&x, &rotated);
            let diff = (f_rot - f_xi).abs() / f_xi.abs().max(f_rot.abs()).max(1e-300);
            radial.record(diff);
        }

        // scaling: f(x, g xi) <= max(1, g^tau) f(x, xi)
        let gamma = (rng.gen_range(-2.3f64..2.3)).exp();
        {
            let scaled: Vec<f64> = xi.iter().map(|v| gamma * v).collect();
            let f_scaled = density(&x, &scaled);
            scaling.record(rel_margin(f_scaled, gamma.powf(tau).max(1.0) * f_xi));
            if gamma > 1.0 && f_xi > 1e-280 && f_scaled > 0.0 {
                let required = (f_scaled / f_xi).ln() / gamma.ln();
                empirical_tau = empirical_tau.max(required);
            }
        }

        // subadditivity: f(x, xi + eta) <= 2^{tau-1} [f(x, xi) + f(x, eta)]
        {
            let sum: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| a + b).collect();
            let f_sum = density(&x, &sum);
            let f_eta = density(&x, &eta);
            subadd.record(rel_margin(f_sum, 2f64.powf(tau - 1.0) * (f_xi + f_eta)));
        }

        // growth sandwich with the monomial weights and the mu majorant
        {
            let mut lower = 0.0;
            for i in 0..n {
                let s2: f64 = xi[i * m..(i + 1) * m].iter().map(|v| v * v).sum();
                lower += integrand.eval_weight(i, &x) * crate::integrand::pow_half(s2, p[i]);
            }
            let mu = integrand.mu_majorant(&x).expect("inside domain");
            let frob2: f64 = xi.iter().map(|v| v * v).sum();
            let upper = mu * (1.0 + crate::integrand::pow_half(frob2, q));
            sandwich.record(rel_margin(lower, f_xi).max(rel_margin(f_xi, upper)));
        }

        // section derivative: h'(t) t <= tau h(t) for the 1-D section in
        // direction i, where h(t) is the density with |xi_i| set to t
        {
            let i = k % n;
            let t = (rng.gen_range(-2.0f64..2.0)).exp();
            let mut sect = xi.clone();
            let col = &mut sect[i * m..(i + 1) * m];
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in col.iter_mut() {
                    *v *= t / norm;
                }
            } else {
                col[0] = t;
            }
            let h_t = density(&x, &sect);
            let w = integrand.full_weight(i, &x).expect("inside domain");
            let h_prime_t_times_t = w * p[i] * t.powf(p[i]);
            section.record(rel_margin(h_prime_t_times_t, tau * h_t));
        }

        // monotonicity in each column norm
        {
            let i = (k + 1) % n;
            let factor: f64 = rng.gen_range(1.0f64..10.0);
            let mut grown = xi.clone();
            for v in &mut grown[i * m..(i + 1) * m] {
                *v *= factor;
            }
            let f_grown = density(&x, &grown);
            monotone.record(rel_margin(f_xi, f_grown));
        }
    }

    StructureReport {
        samples,
        seed,
        checks: vec![
            radial.into_check(),
            scaling.into_check(),
            subadd.into_check(),
            sandwich.into_check(),
            section.into_check(),
            monotone.into_check(),
        ],
        empirical_tau,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::AnisotropyProfile;
    use crate::integrand::WeightSpec;
    use crate::presets;
    use crate::rational::{rat, rat_int, ExtRational};

    #[test]
    fn presets_pass_with_zero_violations() {
        for preset in [presets::f1(2).unwrap(), presets::f2(3).unwrap()] {
            let report = verify_structure(&preset.integrand, &preset.domain, 2000, 42);
            assert_eq!(report.total_violations(), 0, "{}: {report:?}", preset.name);
            assert_eq!(report.checks.len(), 6);
            // tau = max{p_i} = 4 is attained by the quartic direction
            assert!(report.empirical_tau <= preset.integrand.tau_f64() + 1e-9);
            assert!(report.empirical_tau > 3.5, "tau estimate {}", report.empirical_tau);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let preset = presets::f1(2).unwrap();
        let a = verify_structure(&preset.integrand, &preset.domain, 500, 9);
        let b = verify_structure(&preset.integrand, &preset.domain, 500, 9);
        for (ca, cb) in a.checks.iter().zip(&b.checks) {
            assert_eq!(ca.violations, cb.violations);
            assert_eq!(ca.worst_slack.to_bits(), cb.worst_slack.to_bits());
        }
        assert_eq!(a.empirical_tau.to_bits(), b.empirical_tau.to_bits());
    }

    #[test]
    fn shrinking_never_increases_the_density() {
        let preset = presets::f1(2).unwrap();
        let f = &preset.integrand;
        let x = vec![0.6, 0.7];
        let xi = vec![0.3, -1.2, 0.8, 0.1];
        let base = f
            .eval_density(&crate::integrand::MatrixPoint::new(x.clone(), xi.clone()))
            .unwrap();
        for gamma in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let scaled: Vec<f64> = xi.iter().map(|v| gamma * v).collect();
            let val = f
                .eval_density(&crate::integrand::MatrixPoint::new(x.clone(), scaled))
                .unwrap();
            assert!(val <= base * (1.0 + 1e-12));
            if gamma == 1.0 {
                assert_eq!(val, base);
            }
        }
    }

    #[test]
    fn corrupted_growth_exponent_is_caught() {
        // q below max{p_i}: the upper growth bound must fail on large fields
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat_int(2), rat_int(4)],
            rat(5, 2), // q = 5/2 < p_2 = 4
            vec![ExtRational::Infinity, ExtRational::Infinity],
            ExtRational::Infinity,
            rat_int(4),
            None,
        )
        .unwrap();
        let bad = crate::integrand::Integrand::new(
            profile,
            vec![
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
            ],
            0.0,
        )
        .unwrap();
        let domain = crate::grid::BoxDomain::unit_square();
        let report = verify_structure(&bad, &domain, 2000, 3);
        let sandwich = report.check("growth_sandwich").unwrap();
        assert!(sandwich.violations > 0, "{report:?}");
    }
}
