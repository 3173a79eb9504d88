//! Weighted anisotropic power-sum energy densities.
//!
//! The implemented class is
//!
//! ```text
//! f(x, xi) = sum_i c_i |x|^{a_i p_i} |xi_i|^{p_i}  +  |x|^{-beta} sum_i k_i |xi_i|^{p_i}
//! ```
//!
//! with per-direction monomial weights and an optional shared singular
//! factor. Densities, column gradients and the growth majorant `mu` are all
//! closed-form, which turns the structural hypotheses into checkable
//! identities instead of sampled hopes.

use num_traits::ToPrimitive;

use crate::error::{CoreError, Result};
use crate::exponents::AnisotropyProfile;

/// Monomial weight of one gradient direction: `lambda_i(x) = c |x|^{alpha p_i}`,
/// plus the coefficient of the shared singular term.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    pub c: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// A point `(x, xi)` with `xi` an `m x n` matrix stored column-major:
/// `xi[i * m + alpha]` is component `alpha` of column `i`.
#[derive(Clone, Debug)]
pub struct MatrixPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl MatrixPoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        MatrixPoint { x, xi }
    }

    pub fn column<'a>(&'a self, m: usize, i: usize) -> &'a [f64] {
        &self.xi[i * m..(i + 1) * m]
    }
}

/// `|t|^p` via the squared argument, with fast paths for the common powers.
#[inline]
pub(crate) fn pow_half(s2: f64, p: f64) -> f64 {
    if p == 2.0 {
        s2
    } else if p == 4.0 {
        s2 * s2
    } else if p == 3.0 {
        s2 * s2.sqrt()
    } else {
        s2.powf(0.5 * p)
    }
}

/// `|t|^{p-2}` via the squared argument; the continuous extension at 0 is 0
/// for `p > 2` and 1 for `p = 2`.
#[inline]
pub(crate) fn pow_half_minus_one(s2: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if p == 4.0 {
        s2
    } else if p == 3.0 {
        s2.sqrt()
    } else {
        s2.powf(0.5 * p - 1.0)
    }
}

/// An admissible integrand: profile plus weights, with cached f64 exponents.
#[derive(Clone, Debug)]
pub struct Integrand {
    profile: AnisotropyProfile,
    weights: Vec<WeightSpec>,
    beta: f64,
    p: Vec<f64>,
    alpha_p: Vec<f64>,
    q: f64,
    tau: f64,
    c0: f64,
    k0: f64,
    smooth: bool,
}

impl Integrand {
    pub fn new(profile: AnisotropyProfile, weights: Vec<WeightSpec>, beta: f64) -> Result<Self> {
        let n = profile.n;
        if weights.len() != n {
            return Err(CoreError::InvalidIntegrand(format!(
                "{} weights for n = {n}",
                weights.len()
            )));
        }
        if !(0.0..(n as f64)).contains(&beta) {
            return Err(CoreError::InvalidIntegrand(format!(
                "beta = {beta} not in [0, n)"
            )));
        }
        let p: Vec<f64> = profile.p.iter().map(|v| v.to_f64().expect("p fits f64")).collect();
        for (i, w) in weights.iter().enumerate() {
            if !(w.c > 0.0) {
                return Err(CoreError::InvalidIntegrand(format!(
                    "c_{} = {} must be positive",
                    i + 1,
                    w.c
                )));
            }
            if w.kappa < 0.0 {
                return Err(CoreError::InvalidIntegrand(format!(
                    "kappa_{} = {} must be nonnegative",
                    i + 1,
                    w.kappa
                )));
            }
            let limit = n as f64 / p[i];
            if !(0.0..limit).contains(&w.alpha) {
                return Err(CoreError::InvalidIntegrand(format!(
                    "alpha_{} = {} not in [0, n/p_{}) = [0, {limit})",
                    i + 1,
                    w.alpha,
                    i + 1
                )));
            }
        }
        let alpha_p: Vec<f64> = weights.iter().zip(&p).map(|(w, pi)| w.alpha * pi).collect();
        let q = profile.q.to_f64().expect("q fits f64");
        let tau = profile.tau.to_f64().expect("tau fits f64");
        let c0 = weights.iter().map(|w| w.c).fold(0.0, f64::max);
        let k0 = weights.iter().map(|w| w.kappa).fold(0.0, f64::max);
        let smooth = p.iter().all(|&pi| pi >= 2.0);
        Ok(Integrand { profile, weights, beta, p, alpha_p, q, tau, c0, k0, smooth })
    }

    pub fn profile(&self) -> &AnisotropyProfile {
        &self.profile
    }

    pub fn weights(&self) -> &[WeightSpec] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.profile.n
    }

    pub fn m(&self) -> usize {
        self.profile.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p_f64(&self) -> &[f64] {
        &self.p
    }

    pub fn q_f64(&self) -> f64 {
        self.q
    }

    pub fn tau_f64(&self) -> f64 {
        self.tau
    }

    /// True when `kappa_i > 0` for some `i` and `beta > 0`: the density blows
    /// up at the origin and the domain must exclude it.
    pub fn singular_at_origin(&self) -> bool {
        self.k0 > 0.0 && self.beta > 0.0
    }

    fn check_point(&self, radius: f64) -> Result<()> {
        if self.singular_at_origin() && radius == 0.0 {
            return Err(CoreError::SingularPoint);
        }
        Ok(())
    }

    fn radius(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Monomial weight `lambda_i(x) = c_i |x|^{alpha_i p_i}` (no singular part).
    pub fn eval_weight(&self, i: usize, x: &[f64]) -> f64 {
        let r = Self::radius(x);
        self.weights[i].c * r.powf(self.alpha_p[i])
    }

    /// Full coefficient of `|xi_i|^{p_i}`: monomial weight plus singular term.
    pub fn full_weight(&self, i: usize, x: &[f64]) -> Result<f64> {
        let r = Self::radius(x);
        self.check_point(r)?;
        let mut w = self.weights[i].c * r.powf(self.alpha_p[i]);
        if self.weights[i].kappa > 0.0 && self.beta > 0.0 {
            w += self.weights[i].kappa * r.powf(-self.beta);
        } else {
            w += self.weights[i].kappa;
        }
        Ok(w)
    }

    /// Density `f(x, xi)`.
    pub fn eval_density(&self, pt: &MatrixPoint) -> Result<f64> {
        let m = self.m();
        let mut total = 0.0;
        for i in 0..self.n() {
            let w = self.full_weight(i, &pt.x)?;
            let s2: f64 = pt.column(m, i).iter().map(|v| v * v).sum();
            total += w * pow_half(s2, self.p[i]);
        }
        Ok(total)
    }

    /// Column gradient `df/dxi_i^alpha = w_i(x) p_i |xi_i|^{p_i - 2} xi_i^alpha`,
    /// stored like `xi`. Zero columns give zero gradients. Requires every
    /// `p_i >= 2`; smaller exponents make the density non-C1 at `xi_i = 0`.
    pub fn eval_gradient(&self, pt: &MatrixPoint) -> Result<Vec<f64>> {
        if !self.smooth {
            let (index, &p) = self
                .p
                .iter()
                .enumerate()
                .find(|(_, &p)| p < 2.0)
                .expect("some p below 2");
            return Err(CoreError::NonSmoothGradient { index: index + 1, p });
        }
        let m = self.m();
        let mut grad = vec![0.0; m * self.n()];
        for i in 0..self.n() {
            let w = self.full_weight(i, &pt.x)?;
            let col = pt.column(m, i);
            let s2: f64 = col.iter().map(|v| v * v).sum();
            if s2 == 0.0 {
                continue;
            }
            let factor = w * self.p[i] * pow_half_minus_one(s2, self.p[i]);
            for alpha in 0..m {
                grad[i * m + alpha] = factor * col[alpha];
            }
        }
        Ok(grad)
    }

    /// The growth majorant `mu(x) = 2^{q-1} n { C0 max_j |x|^{a_j p_j} + K0 |x|^{-beta} }`.
    pub fn mu_majorant(&self, x: &[f64]) -> Result<f64> {
        let r = Self::radius(x);
        self.check_point(r)?;
        let monomial_max = self
            .alpha_p
            .iter()
            .map(|&e| r.powf(e))
            .fold(0.0, f64::max);
        let singular = if self.k0 > 0.0 && self.beta > 0.0 {
            self.k0 * r.powf(-self.beta)
        } else {
            self.k0
        };
        Ok(2f64.powf(self.q - 1.0) * self.n() as f64 * (self.c0 * monomial_max + singular))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn unit_x(n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        x
    }

    #[test]
    fn weight_examples() {
        let f1 = presets::f1(2).unwrap();
        // (c=1, alpha=4/5, p=2) at |x| = 1
        assert!((f1.integrand.eval_weight(0, &unit_x(2)) - 1.0).abs() < 1e-15);
        // monomial vanishes at the degenerate point
        assert_eq!(f1.integrand.eval_weight(0, &[0.0, 0.0]), 0.0);
        // alpha = 0 gives a constant weight
        let profile = f1.integrand.profile().clone();
        let flat = Integrand::new(
            profile,
            vec![
                WeightSpec { c: 3.0, alpha: 0.0, kappa: 0.0 },
                WeightSpec { c: 3.0, alpha: 0.0, kappa: 0.0 },
            ],
            0.0,
        )
        .unwrap();
        assert_eq!(flat.eval_weight(1, &[0.37, -0.9]), 3.0);
        assert_eq!(flat.eval_weight(1, &[0.0, 0.0]), 3.0);
    }

    #[test]
    fn density_examples() {
        let f1 = presets::f1(2).unwrap();
        // |x| = 1, both columns unit: 1 * 1 + 1 * 1 = 2
        let pt = MatrixPoint::new(unit_x(2), vec![1.0, 0.0, 0.0, 1.0]);
        assert!((f1.integrand.eval_density(&pt).unwrap() - 2.0).abs() < 1e-12);
        // f(x, 0) = 0
        let pt = MatrixPoint::new(vec![0.3, 0.4], vec![0.0; 4]);
        assert_eq!(f1.integrand.eval_density(&pt).unwrap(), 0.0);

        let f2 = presets::f2(2).unwrap();
        let pt = MatrixPoint::new(unit_x(2), vec![1.0, 0.0, 0.0, 1.0]);
        assert!((f2.integrand.eval_density(&pt).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singularity_rules() {
        let f2 = presets::f2(2).unwrap();
        let origin = MatrixPoint::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            f2.integrand.eval_density(&origin),
            Err(CoreError::SingularPoint)
        ));
        assert!(matches!(f2.integrand.mu_majorant(&[0.0, 0.0]), Err(CoreError::SingularPoint)));
        // F1 has no singular part; the origin is just the degenerate point
        let f1 = presets::f1(2).unwrap();
        let origin = MatrixPoint::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f1.integrand.eval_density(&origin).unwrap(), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let f1 = presets::f1(2).unwrap();
        // zero matrix point has zero gradient
        let pt = MatrixPoint::new(unit_x(2), vec![0.0; 4]);
        assert_eq!(f1.integrand.eval_gradient(&pt).unwrap(), vec![0.0; 4]);
        // column 2 = (1, 0): gradient column 2 is p2 |xi_2|^{p2-2} xi_2 = (4, 0)
        let pt = MatrixPoint::new(unit_x(2), vec![0.0, 0.0, 1.0, 0.0]);
        let g = f1.integrand.eval_gradient(&pt).unwrap();
        assert!((g[2] - 4.0).abs() < 1e-12);
        assert_eq!(g[3], 0.0);
    }

    #[test]
    fn quadratic_gradient_is_two_xi() {
        // m = 1, n = 2, constant unit weights, p = (2, 2)
        use crate::exponents::AnisotropyProfile;
        use crate::rational::{rat_int, ExtRational};
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat_int(2), rat_int(2)],
            rat_int(2),
            vec![ExtRational::Infinity, ExtRational::Infinity],
            ExtRational::Infinity,
            rat_int(2),
            None,
        )
        .unwrap();
        let f = Integrand::new(
            profile,
            vec![
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
            ],
            0.0,
        )
        .unwrap();
        let pt = MatrixPoint::new(vec![0.2, 0.8], vec![3.0, 4.0]);
        assert_eq!(f.eval_gradient(&pt).unwrap(), vec![6.0, 8.0]);
    }

    #[test]
    fn mu_majorant_examples() {
        let f1 = presets::f1(2).unwrap();
        assert!((f1.integrand.mu_majorant(&unit_x(2)).unwrap() - 16.0).abs() < 1e-12);
        let f2 = presets::f2(2).unwrap();
        assert!((f2.integrand.mu_majorant(&unit_x(2)).unwrap() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn subquadratic_gradient_is_refused() {
        use crate::exponents::AnisotropyProfile;
        use crate::rational::{rat, rat_int, ExtRational};
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat(3, 2), rat_int(2)],
            rat_int(2),
            vec![ExtRational::Finite(rat_int(2)), ExtRational::Infinity],
            ExtRational::Infinity,
            rat_int(2),
            None,
        )
        .unwrap();
        let f = Integrand::new(
            profile,
            vec![
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
                WeightSpec { c: 1.0, alpha: 0.0, kappa: 0.0 },
            ],
            0.0,
        )
        .unwrap();
        // energy still evaluates
        let pt = MatrixPoint::new(vec![0.5, 0.5], vec![1.0, 1.0]);
        assert!(f.eval_density(&pt).is_ok());
        // gradient refuses
        assert!(matches!(
            f.eval_gradient(&pt),
            Err(CoreError::NonSmoothGradient { index: 1, .. })
        ));
    }
}
