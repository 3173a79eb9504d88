//! Built-in integrand presets.
//!
//! `F1`: degenerate monomial weights only, `s = inf`, domain `[0, 1]^n` (the
//! degenerate point sits in the closure). `F2`: adds a shared singular factor
//! `|x|^{-1/5}` with `s = 5`, so the domain `[0.1, 1.1]^n` excludes the origin.

use crate::error::{CoreError, Result};
use crate::exponents::AnisotropyProfile;
use crate::grid::BoxDomain;
use crate::integrand::{Integrand, WeightSpec};
use crate::rational::{rat, rat_int, ExtRational};

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub integrand: Integrand,
    pub domain: BoxDomain,
    pub singular_at_origin: bool,
}

fn base_profile(m: usize, s: ExtRational) -> Result<AnisotropyProfile> {
    AnisotropyProfile::new(
        2,
        m,
        vec![rat_int(2), rat_int(4)],
        rat_int(4),
        vec![ExtRational::Finite(rat(6, 5)), ExtRational::Finite(rat(11, 10))],
        s,
        rat_int(4), // tau = max{p_i}
        None,
    )
}

pub fn f1(m: usize) -> Result<Preset> {
    let profile = base_profile(m, ExtRational::Infinity)?;
    let weights = vec![
        WeightSpec { c: 1.0, alpha: 4.0 / 5.0, kappa: 0.0 },
        WeightSpec { c: 1.0, alpha: 161.0 / 400.0, kappa: 0.0 },
    ];
    let integrand = Integrand::new(profile, weights, 0.0)?;
    Ok(Preset {
        name: "F1",
        integrand,
        domain: BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0])?,
        singular_at_origin: false,
    })
}

pub fn f2(m: usize) -> Result<Preset> {
    let profile = base_profile(m, ExtRational::Finite(rat_int(5)))?;
    let weights = vec![
        WeightSpec { c: 1.0, alpha: 4.0 / 5.0, kappa: 1.0 },
        WeightSpec { c: 1.0, alpha: 161.0 / 400.0, kappa: 1.0 },
    ];
    let integrand = Integrand::new(profile, weights, 0.2)?;
    Ok(Preset {
        name: "F2",
        integrand,
        domain: BoxDomain::new(vec![0.1, 0.1], vec![1.1, 1.1])?,
        singular_at_origin: true,
    })
}

pub fn by_name(name: &str, m: usize) -> Result<Preset> {
    match name {
        "F1" | "f1" => f1(m),
        "F2" | "f2" => f2(m),
        other => Err(CoreError::InvalidIntegrand(format!(
            "unknown preset {other:?}; expected \"F1\" or \"F2\""
        ))),
    }
}
