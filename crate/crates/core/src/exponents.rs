//! Exact exponent calculus for anisotropic growth hypotheses.
//!
//! Everything here is computed over arbitrary-precision rationals: the
//! effective integrability exponents `sigma_i`, the harmonic averages, the
//! anisotropic Sobolev conjugate, the conjugate exponent `s'`, the
//! integrability restriction, and the three exponents `theta_1..theta_3`
//! entering the sup-norm bounds. Hypothesis checks are strict or non-strict
//! exactly as written; no tolerance is involved anywhere in this module.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{CoreError, Result};
use crate::rational::{rat_int, ExtRational, RationalJson};

/// Raw exponent data of an anisotropic problem.
///
/// Construction validates only type-level constraints (`p_i > 1`, `r_i >= 1`,
/// `s > 1`, `tau >= 1`, matching lengths). The growth ordering `p_i <= q` and
/// the lower bound `sigma_i >= 1` are regularity hypotheses, checked by
/// [`check_admissibility`], so that deliberately inadmissible profiles remain
/// constructible for negative controls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnisotropyProfile {
    pub n: usize,
    pub m: usize,
    pub p: Vec<BigRational>,
    pub q: BigRational,
    pub r: Vec<ExtRational>,
    pub s: ExtRational,
    pub tau: BigRational,
    /// Value for the Sobolev conjugate when `sigma_bar >= n`; unused otherwise.
    pub sigma_star_choice: Option<BigRational>,
}

impl AnisotropyProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        p: Vec<BigRational>,
        q: BigRational,
        r: Vec<ExtRational>,
        s: ExtRational,
        tau: BigRational,
        sigma_star_choice: Option<BigRational>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::InvalidProfile(format!("n = {n} must be >= 2")));
        }
        if m < 1 {
            return Err(CoreError::InvalidProfile("m must be >= 1".into()));
        }
        if p.len() != n {
            return Err(CoreError::InvalidProfile(format!(
                "p has {} entries, expected n = {n}",
                p.len()
            )));
        }
        if r.len() != n {
            return Err(CoreError::InvalidProfile(format!(
                "r has {} entries, expected n = {n}",
                r.len()
            )));
        }
        let one = BigRational::one();
        for (i, pi) in p.iter().enumerate() {
            if *pi <= one {
                return Err(CoreError::InvalidProfile(format!("p_{} = {pi} must be > 1", i + 1)));
            }
        }
        if q <= one {
            return Err(CoreError::InvalidProfile(format!("q = {q} must be > 1")));
        }
        for (i, ri) in r.iter().enumerate() {
            if let ExtRational::Finite(v) = ri {
                if *v < one {
                    return Err(CoreError::InvalidProfile(format!("r_{} = {v} must be >= 1", i + 1)));
                }
            }
        }
        if let ExtRational::Finite(v) = &s {
            if *v <= one {
                return Err(CoreError::InvalidProfile(format!("s = {v} must be > 1")));
            }
        }
        if tau < one {
            return Err(CoreError::InvalidProfile(format!("tau = {tau} must be >= 1")));
        }
        if let Some(c) = &sigma_star_choice {
            if !c.is_positive() {
                return Err(CoreError::InvalidProfile(format!(
                    "sigma_star_choice = {c} must be positive"
                )));
            }
        }
        Ok(AnisotropyProfile { n, m, p, q, r, s, tau, sigma_star_choice })
    }

    pub fn p_max(&self) -> &BigRational {
        self.p.iter().max().expect("p nonempty")
    }

    pub fn p_min(&self) -> &BigRational {
        self.p.iter().min().expect("p nonempty")
    }
}

/// Effective integrability exponent of one gradient direction:
/// `p r / (r + 1)` for finite `r`, and `p` itself when `r = inf`.
pub fn sigma_component(p_i: &BigRational, r_i: &ExtRational) -> Result<BigRational> {
    let one = BigRational::one();
    if *p_i <= one {
        return Err(CoreError::ExponentDomain(format!("p = {p_i} must be > 1")));
    }
    match r_i {
        ExtRational::Infinity => Ok(p_i.clone()),
        ExtRational::Finite(r) => {
            if *r < one {
                return Err(CoreError::ExponentDomain(format!("r = {r} must be >= 1")));
            }
            Ok(p_i * r / (r + &one))
        }
    }
}

/// Harmonic average `h` with `1/h = (1/n) sum 1/v_i`, using `1/inf = 0`.
/// Returns `inf` exactly when every entry is `inf`.
pub fn harmonic_mean(values: &[ExtRational]) -> Result<ExtRational> {
    if values.is_empty() {
        return Err(CoreError::ExponentDomain("harmonic mean of empty list".into()));
    }
    let one = BigRational::one();
    let mut recip_sum = BigRational::zero();
    for v in values {
        if let ExtRational::Finite(f) = v {
            if *f < one {
                return Err(CoreError::ExponentDomain(format!(
                    "harmonic mean entry {f} must be >= 1"
                )));
            }
        }
        recip_sum += v.recip_or_zero();
    }
    if recip_sum.is_zero() {
        return Ok(ExtRational::Infinity);
    }
    let n = rat_int(values.len() as i64);
    Ok(ExtRational::Finite(n / recip_sum))
}

/// Harmonic average of finite values, returned as a finite rational.
pub fn harmonic_mean_finite(values: &[BigRational]) -> Result<BigRational> {
    let ext: Vec<ExtRational> = values.iter().cloned().map(ExtRational::Finite).collect();
    match harmonic_mean(&ext)? {
        ExtRational::Finite(v) => Ok(v),
        ExtRational::Infinity => unreachable!("finite inputs"),
    }
}

/// Sobolev conjugate `l* = n l / (n - l)` for `l < n`; for `l >= n` the
/// conjugate is any value in `(l, oo)` and must be supplied by the caller.
pub fn sobolev_conjugate(
    ell: &BigRational,
    n: usize,
    choice: Option<&BigRational>,
) -> Result<BigRational> {
    if *ell < BigRational::one() {
        return Err(CoreError::ExponentDomain(format!("l = {ell} must be >= 1")));
    }
    let n_rat = rat_int(n as i64);
    if *ell < n_rat {
        return Ok(&n_rat * ell / (&n_rat - ell));
    }
    match choice {
        Some(c) if c > ell => Ok(c.clone()),
        Some(c) => Err(CoreError::ExponentDomain(format!(
            "Sobolev exponent choice {c} must exceed l = {ell}"
        ))),
        None => Err(CoreError::MissingSigmaStarChoice),
    }
}

/// Conjugate exponent: `s' = s/(s-1)` for finite `s > 1`, and `s' = 1` for
/// `s = inf`. Always finite on the admitted range.
pub fn conjugate_exponent(s: &ExtRational) -> Result<BigRational> {
    match s {
        ExtRational::Infinity => Ok(BigRational::one()),
        ExtRational::Finite(v) => {
            let one = BigRational::one();
            if *v <= one {
                return Err(CoreError::ExponentDomain(format!(
                    "conjugate exponent needs s > 1, got {v}"
                )));
            }
            Ok(v / (v - &one))
        }
    }
}

/// Everything the main theorem computes from a profile, all exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedExponents {
    pub sigma: Vec<BigRational>,
    pub p_bar: BigRational,
    pub pr_bar: ExtRational,
    pub sigma_bar: BigRational,
    pub sigma_star: BigRational,
    pub s_prime: ExtRational,
    pub qs_prime: BigRational,
    pub p_min: BigRational,
    pub theta1: BigRational,
    pub theta2: BigRational,
    pub theta3: BigRational,
    /// Left side of the integrability restriction
    /// `1/pr_bar + 1/(qs) + 1/p_bar - 1/q`.
    pub restriction_lhs: BigRational,
}

impl DerivedExponents {
    pub fn to_json(&self) -> Value {
        json!({
            "sigma": self.sigma.iter().map(RationalJson::from).collect::<Vec<_>>(),
            "p_bar": RationalJson::from(&self.p_bar),
            "pr_bar": RationalJson::from(&self.pr_bar),
            "sigma_bar": RationalJson::from(&self.sigma_bar),
            "sigma_star": RationalJson::from(&self.sigma_star),
            "s_prime": RationalJson::from(&self.s_prime),
            "qs_prime": RationalJson::from(&self.qs_prime),
            "p_min": RationalJson::from(&self.p_min),
            "theta1": RationalJson::from(&self.theta1),
            "theta2": RationalJson::from(&self.theta2),
            "theta3": RationalJson::from(&self.theta3),
            "restriction_lhs": RationalJson::from(&self.restriction_lhs),
        })
    }

    pub fn q(&self) -> BigRational {
        let sp = self.s_prime.as_finite().expect("s' is finite on the admitted range");
        &self.qs_prime / sp
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    /// Moser exponent ratio `sigma_bar_star / (q s')`, the per-step
    /// integrability gain of the iteration.
    pub fn moser_ratio(&self) -> BigRational {
        &self.sigma_star / &self.qs_prime
    }
}

fn thetas_from_parts(
    n: usize,
    q: &BigRational,
    p_bar: &BigRational,
    s_prime: &BigRational,
    sigma_star: &BigRational,
    qs_prime: &BigRational,
) -> Result<(BigRational, BigRational, BigRational)> {
    if qs_prime >= sigma_star {
        return Err(CoreError::ThetaUndefined {
            qs_prime: qs_prime.to_string(),
            sigma_star: sigma_star.to_string(),
        });
    }
    let one = BigRational::one();
    let n_rat = rat_int(n as i64);
    let gap = sigma_star - qs_prime;

    let theta1 = sigma_star / &gap;
    let theta2 = q * (sigma_star - p_bar * s_prime) / (p_bar * &gap);
    let theta3 = sigma_star * (q * q * s_prime + &n_rat * (q - p_bar)) / (p_bar * q * s_prime * &gap);

    // closed forms must agree with the factored forms used mid-proof
    let ratio = q / p_bar - &one;
    let theta2_factored = &theta1 * &ratio + &one;
    let theta3_factored = &theta1 * (q / p_bar + &n_rat / qs_prime * &ratio);
    assert_eq!(theta2, theta2_factored, "theta2 closed/factored forms disagree");
    assert_eq!(theta3, theta3_factored, "theta3 closed/factored forms disagree");

    Ok((theta1, theta2, theta3))
}

/// Recompute `(theta1, theta2, theta3)` from already-derived exponents,
/// asserting the factored identities along the way.
pub fn compute_thetas(d: &DerivedExponents) -> Result<(BigRational, BigRational, BigRational)> {
    let s_prime = d.s_prime.as_finite().expect("s' is finite on the admitted range");
    thetas_from_parts(d.n(), &d.q(), &d.p_bar, s_prime, &d.sigma_star, &d.qs_prime)
}

/// Derive every exponent of the regularity theorem from a profile.
///
/// Fails if the Sobolev conjugate needs a choice that is missing or invalid,
/// or if `qs' >= sigma_bar_star` (the thetas are undefined there; use
/// [`check_admissibility`] to obtain a report instead of an error).
pub fn derive_exponents(profile: &AnisotropyProfile) -> Result<DerivedExponents> {
    let sigma: Vec<BigRational> = profile
        .p
        .iter()
        .zip(&profile.r)
        .map(|(p, r)| sigma_component(p, r))
        .collect::<Result<_>>()?;

    let p_bar = harmonic_mean_finite(&profile.p)?;
    let pr: Vec<ExtRational> = profile
        .p
        .iter()
        .zip(&profile.r)
        .map(|(p, r)| r.scale(p))
        .collect();
    let pr_bar = harmonic_mean(&pr)?;
    let sigma_bar = harmonic_mean_finite(&sigma)?;

    let s_prime = conjugate_exponent(&profile.s)?;
    let qs_prime = &profile.q * &s_prime;

    let sigma_star = sobolev_conjugate(&sigma_bar, profile.n, profile.sigma_star_choice.as_ref())?;

    // 1/(qs) reads as 0 when s = inf
    let inv_qs = profile.s.recip_or_zero() / &profile.q;
    let restriction_lhs =
        pr_bar.recip_or_zero() + inv_qs + p_bar.recip() - profile.q.recip();

    let (theta1, theta2, theta3) =
        thetas_from_parts(profile.n, &profile.q, &p_bar, &s_prime, &sigma_star, &qs_prime)?;

    Ok(DerivedExponents {
        sigma,
        p_bar,
        pr_bar,
        sigma_bar,
        sigma_star,
        s_prime: ExtRational::Finite(s_prime),
        qs_prime,
        p_min: profile.p_min().clone(),
        theta1,
        theta2,
        theta3,
        restriction_lhs,
    })
}

/// One named hypothesis check with its exact witness values.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub label: &'static str,
    pub pass: bool,
    pub witness: Vec<(String, ExtRational)>,
    pub note: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, label: &'static str, pass: bool) -> Self {
        CheckResult { name, label, pass, witness: Vec::new(), note: None }
    }

    fn with(mut self, key: &str, value: ExtRational) -> Self {
        self.witness.push((key.to_string(), value));
        self
    }

    fn with_rat(self, key: &str, value: &BigRational) -> Self {
        self.with(key, ExtRational::Finite(value.clone()))
    }

    fn noted(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

/// The conjunction of the named hypothesis checks C1-C5.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub checks: Vec<CheckResult>,
    pub admissible: bool,
}

impl AdmissibilityReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "label": c.label,
                "pass": c.pass,
                "witness": c.witness.iter().map(|(k, v)| json!({
                    "name": k,
                    "value": RationalJson::from(v),
                })).collect::<Vec<_>>(),
                "note": c.note,
            })).collect::<Vec<_>>(),
            "admissible": self.admissible,
        })
    }
}

/// Run the hypothesis checks of the regularity theorem on a profile.
///
/// Never fails: every defect is a report entry. Strict inequalities fail on
/// equality; non-strict ones pass.
pub fn check_admissibility(profile: &AnisotropyProfile) -> AdmissibilityReport {
    let one = BigRational::one();
    let mut checks = Vec::with_capacity(5);

    // C1: growth ordering 1 < p_i <= q
    {
        let pass = profile.p.iter().all(|p| *p > one && *p <= profile.q);
        checks.push(
            CheckResult::new("C1", "growth ordering 1 < p_i <= q", pass)
                .with_rat("p_min", profile.p_min())
                .with_rat("p_max", profile.p_max())
                .with_rat("q", &profile.q),
        );
    }

    // sigma_i are well defined whenever the profile passed construction
    let sigma: Vec<BigRational> = profile
        .p
        .iter()
        .zip(&profile.r)
        .map(|(p, r)| sigma_component(p, r).expect("profile construction validated p, r"))
        .collect();
    let sigma_max = sigma.iter().max().expect("n >= 2").clone();
    let sigma_min = sigma.iter().min().expect("n >= 2").clone();

    // C2: sigma_i >= 1
    checks.push(
        CheckResult::new("C2", "effective exponents sigma_i >= 1", sigma_min >= one)
            .with_rat("sigma_min", &sigma_min),
    );

    let sigma_bar = harmonic_mean_finite(&sigma).expect("sigma nonempty");
    let sigma_star = sobolev_conjugate(&sigma_bar, profile.n, profile.sigma_star_choice.as_ref());

    // C3: max sigma_i < sigma_bar_star (strict)
    match &sigma_star {
        Ok(star) => {
            checks.push(
                CheckResult::new("C3", "max sigma_i < sigma_bar_star", sigma_max < *star)
                    .with_rat("sigma_max", &sigma_max)
                    .with_rat("sigma_bar_star", star),
            );
        }
        Err(e) => {
            checks.push(
                CheckResult::new("C3", "max sigma_i < sigma_bar_star", false)
                    .with_rat("sigma_bar", &sigma_bar)
                    .noted(e.to_string()),
            );
        }
    }

    // C4: integrability restriction, strict, in both forms
    {
        let p_bar = harmonic_mean_finite(&profile.p).expect("p nonempty");
        let pr: Vec<ExtRational> =
            profile.p.iter().zip(&profile.r).map(|(p, r)| r.scale(p)).collect();
        let pr_bar = harmonic_mean(&pr).expect("pr nonempty");
        let s_prime = conjugate_exponent(&profile.s).expect("s > 1 validated");
        let qs_prime = &profile.q * &s_prime;
        let inv_qs = profile.s.recip_or_zero() / &profile.q;
        let lhs = pr_bar.recip_or_zero() + inv_qs + p_bar.recip() - profile.q.recip();
        let inv_n = rat_int(profile.n as i64).recip();
        let restriction_ok = lhs < inv_n;

        match &sigma_star {
            Ok(star) => {
                let gain_ok = qs_prime < *star;
                if sigma_bar < rat_int(profile.n as i64) {
                    // the two forms are provably equivalent below dimension
                    assert_eq!(
                        restriction_ok, gain_ok,
                        "restriction and qs' < sigma_bar_star must agree when sigma_bar < n"
                    );
                }
                checks.push(
                    CheckResult::new(
                        "C4",
                        "restriction lhs < 1/n and qs' < sigma_bar_star",
                        restriction_ok && gain_ok,
                    )
                    .with_rat("restriction_lhs", &lhs)
                    .with_rat("one_over_n", &inv_n)
                    .with_rat("qs_prime", &qs_prime)
                    .with_rat("sigma_bar_star", star),
                );
            }
            Err(e) => {
                checks.push(
                    CheckResult::new("C4", "restriction lhs < 1/n and qs' < sigma_bar_star", false)
                        .with_rat("restriction_lhs", &lhs)
                        .with_rat("one_over_n", &inv_n)
                        .with_rat("qs_prime", &qs_prime)
                        .noted(e.to_string()),
                );
            }
        }
    }

    // C5: summability ranges s > 1, r_i >= 1
    {
        let s_ok = match &profile.s {
            ExtRational::Infinity => true,
            ExtRational::Finite(v) => *v > one,
        };
        let r_ok = profile.r.iter().all(|r| match r {
            ExtRational::Infinity => true,
            ExtRational::Finite(v) => *v >= one,
        });
        let r_min = profile.r.iter().min().expect("n >= 2").clone();
        checks.push(
            CheckResult::new("C5", "summability ranges s > 1 and r_i >= 1", s_ok && r_ok)
                .with("s", profile.s.clone())
                .with("r_min", r_min),
        );
    }

    let admissible = checks.iter().all(|c| c.pass);
    AdmissibilityReport { checks, admissible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn profile_f1() -> AnisotropyProfile {
        AnisotropyProfile::new(
            2,
            2,
            vec![rat_int(2), rat_int(4)],
            rat_int(4),
            vec![ExtRational::Finite(rat(6, 5)), ExtRational::Finite(rat(11, 10))],
            ExtRational::Infinity,
            rat_int(4),
            None,
        )
        .unwrap()
    }

    fn profile_f2() -> AnisotropyProfile {
        AnisotropyProfile::new(
            2,
            2,
            vec![rat_int(2), rat_int(4)],
            rat_int(4),
            vec![ExtRational::Finite(rat(6, 5)), ExtRational::Finite(rat(11, 10))],
            ExtRational::Finite(rat_int(5)),
            rat_int(4),
            None,
        )
        .unwrap()
    }

    #[test]
    fn sigma_component_examples() {
        assert_eq!(
            sigma_component(&rat_int(2), &ExtRational::Finite(rat(6, 5))).unwrap(),
            rat(12, 11)
        );
        assert_eq!(
            sigma_component(&rat_int(4), &ExtRational::Finite(rat(11, 10))).unwrap(),
            rat(44, 21)
        );
        assert_eq!(
            sigma_component(&rat(7, 2), &ExtRational::Infinity).unwrap(),
            rat(7, 2)
        );
        assert!(sigma_component(&rat_int(1), &ExtRational::Infinity).is_err());
        assert!(sigma_component(&rat_int(2), &ExtRational::Finite(rat(1, 2))).is_err());
    }

    #[test]
    fn harmonic_mean_examples() {
        let h = harmonic_mean(&[
            ExtRational::Finite(rat(12, 11)),
            ExtRational::Finite(rat(44, 21)),
        ])
        .unwrap();
        assert_eq!(h, ExtRational::Finite(rat(33, 23)));

        let h = harmonic_mean(&[ExtRational::from_int(2), ExtRational::from_int(4)]).unwrap();
        assert_eq!(h, ExtRational::Finite(rat(8, 3)));

        let p = rat(9, 4);
        let h = harmonic_mean(&vec![ExtRational::Finite(p.clone()); 5]).unwrap();
        assert_eq!(h, ExtRational::Finite(p));

        assert_eq!(
            harmonic_mean(&[ExtRational::Infinity, ExtRational::Infinity]).unwrap(),
            ExtRational::Infinity
        );
        assert!(harmonic_mean(&[]).is_err());
        assert!(harmonic_mean(&[ExtRational::Finite(rat(1, 2))]).is_err());
    }

    #[test]
    fn sobolev_conjugate_examples() {
        assert_eq!(sobolev_conjugate(&rat(33, 23), 2, None).unwrap(), rat(66, 13));
        assert_eq!(sobolev_conjugate(&rat_int(1), 2, None).unwrap(), rat_int(2));
        assert_eq!(
            sobolev_conjugate(&rat_int(3), 2, Some(&rat_int(100))).unwrap(),
            rat_int(100)
        );
        assert!(matches!(
            sobolev_conjugate(&rat_int(3), 2, None),
            Err(CoreError::MissingSigmaStarChoice)
        ));
        assert!(sobolev_conjugate(&rat_int(3), 2, Some(&rat_int(2))).is_err());
    }

    #[test]
    fn derives_first_parameter_set() {
        let d = derive_exponents(&profile_f1()).unwrap();
        assert_eq!(d.sigma, vec![rat(12, 11), rat(44, 21)]);
        assert_eq!(d.sigma_bar, rat(33, 23));
        assert_eq!(d.sigma_star, rat(66, 13));
        assert_eq!(d.p_bar, rat(8, 3));
        assert_eq!(d.pr_bar, ExtRational::Finite(rat(264, 85)));
        assert_eq!(d.s_prime, ExtRational::Finite(rat_int(1)));
        assert_eq!(d.qs_prime, rat_int(4));
        assert_eq!(d.restriction_lhs, rat(59, 132));
        assert_eq!(d.theta1, rat(33, 7));
        assert_eq!(d.theta2, rat(47, 14));
        assert_eq!(d.theta3, rat(33, 4));
        assert_eq!(d.p_min, rat_int(2));
        assert_eq!(d.moser_ratio(), rat(33, 26));
    }

    #[test]
    fn derives_second_parameter_set() {
        let d = derive_exponents(&profile_f2()).unwrap();
        assert_eq!(d.s_prime, ExtRational::Finite(rat(5, 4)));
        assert_eq!(d.qs_prime, rat_int(5));
        assert_eq!(d.restriction_lhs, rat(82, 165));
        assert_eq!(d.theta1, rat_int(66));
        assert_eq!(d.theta2, rat_int(34));
        assert_eq!(d.theta3, rat(561, 5));
    }

    #[test]
    fn isotropic_profile_collapses_thetas() {
        // all p_i = q, r_i = inf, s = inf: theta2 = 1 and theta3 = theta1
        // (q below n so that sigma_bar < n and no conjugate choice is needed)
        let q = rat(5, 2);
        let profile = AnisotropyProfile::new(
            3,
            1,
            vec![q.clone(), q.clone(), q.clone()],
            q.clone(),
            vec![ExtRational::Infinity; 3],
            ExtRational::Infinity,
            q.clone(),
            None,
        )
        .unwrap();
        let d = derive_exponents(&profile).unwrap();
        assert_eq!(d.theta2, rat_int(1));
        assert_eq!(d.theta3, d.theta1);
        let (t1, t2, t3) = compute_thetas(&d).unwrap();
        assert_eq!((t1, t2, t3), (d.theta1, d.theta2, d.theta3));
    }

    #[test]
    fn admissibility_of_both_parameter_sets() {
        let rep = check_admissibility(&profile_f1());
        assert!(rep.admissible, "{rep:?}");
        let rep = check_admissibility(&profile_f2());
        assert!(rep.admissible, "{rep:?}");
        // near-boundary margins of the second set: 1/330 and 1/13
        let d = derive_exponents(&profile_f2()).unwrap();
        assert_eq!(rat(1, 2) - &d.restriction_lhs, rat(1, 330));
        assert_eq!(&d.sigma_star - &d.qs_prime, rat(1, 13));
    }

    #[test]
    fn shrinking_s_breaks_the_restriction() {
        let mut profile = profile_f1();
        profile.s = ExtRational::Finite(rat(5, 4));
        let rep = check_admissibility(&profile);
        assert!(!rep.admissible);
        let c4 = rep.check("C4").unwrap();
        assert!(!c4.pass);
        // qs' = 20 exceeds sigma_bar_star = 66/13
        let qs = c4.witness.iter().find(|(k, _)| k == "qs_prime").unwrap();
        assert_eq!(qs.1, ExtRational::Finite(rat_int(20)));
        for name in ["C1", "C2", "C3", "C5"] {
            assert!(rep.check(name).unwrap().pass, "{name} should still pass");
        }
        assert!(derive_exponents(&profile).is_err());
    }

    #[test]
    fn missing_choice_is_reported_not_fatal() {
        // p_i large enough that sigma_bar >= n, with no choice supplied
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat_int(5), rat_int(5)],
            rat_int(5),
            vec![ExtRational::Infinity, ExtRational::Infinity],
            ExtRational::Infinity,
            rat_int(5),
            None,
        )
        .unwrap();
        let rep = check_admissibility(&profile);
        assert!(!rep.admissible);
        assert!(!rep.check("C3").unwrap().pass);
        assert!(!rep.check("C4").unwrap().pass);
        assert!(rep.check("C3").unwrap().note.is_some());

        // supplying a large choice restores admissibility
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat_int(5), rat_int(5)],
            rat_int(5),
            vec![ExtRational::Infinity, ExtRational::Infinity],
            ExtRational::Infinity,
            rat_int(5),
            Some(rat_int(100)),
        )
        .unwrap();
        let rep = check_admissibility(&profile);
        assert!(rep.admissible, "{rep:?}");
        let d = derive_exponents(&profile).unwrap();
        assert_eq!(d.sigma_star, rat_int(100));
    }

    #[test]
    fn equality_fails_strict_checks() {
        // choose sigma_star_choice exactly qs' on a sigma_bar >= n profile:
        // the strict gain check must fail
        let profile = AnisotropyProfile::new(
            2,
            1,
            vec![rat_int(5), rat_int(5)],
            rat_int(5),
            vec![ExtRational::Infinity, ExtRational::Infinity],
            ExtRational::Finite(rat_int(5)),
            rat_int(5),
            Some(rat(25, 4)), // equals q s' = 5 * 5/4
        )
        .unwrap();
        let rep = check_admissibility(&profile);
        assert!(!rep.check("C4").unwrap().pass);
        assert!(matches!(
            derive_exponents(&profile),
            Err(CoreError::ThetaUndefined { .. })
        ));
    }
}
