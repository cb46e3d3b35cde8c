//! Builtin equation corpus: the viscous advection (burgers) equation and
//! the equivalent equation of a dispersion-relation-preserving scheme (drp).

use crate::error::{Error, Result};
use crate::parser::{parse_equation, PdeEquation};
use crate::symbol::{rat, rat_int, rat_to_string, Rational, Symbol};
use num_traits::Zero;

pub const BURGERS_SOURCE: &str = "param nu;\ndt(u) + u*dx(u) - nu*dx(dx(u)) = 0";

/// The scheme's equivalent advection equation with the effective advection
/// constant collapsed into the single parameter K:
/// `u_t - (sigma/2) u_tt + K u_x = 0` with `K = 2 sigma / (mu Re_h) * sum_k k gamma_k`.
pub const DRP_SOURCE: &str = "param sigma;\nparam K;\ndt(u) - (sigma/2)*dt(dt(u)) + K*dx(u) = 0";

/// Scheme configuration: stencil weights and mesh constants that expand the
/// collapsed advection parameter K.
#[derive(Debug, Clone, PartialEq)]
pub struct DrpConfig {
    pub m: u32,
    pub gamma: Vec<Rational>,
    pub sigma: Rational,
    pub mu: Rational,
    pub re_h: Rational,
}

impl Default for DrpConfig {
    fn default() -> Self {
        DrpConfig {
            m: 1,
            gamma: vec![rat_int(1)],
            sigma: rat(1, 2),
            mu: rat_int(1),
            re_h: rat_int(10),
        }
    }
}

impl DrpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::Internal("drp: m must be at least 1".into()));
        }
        if self.gamma.len() != self.m as usize {
            return Err(Error::Internal(format!(
                "drp: expected {} stencil weights, got {}",
                self.m,
                self.gamma.len()
            )));
        }
        if self.mu.is_zero() || self.re_h.is_zero() {
            return Err(Error::Internal("drp: mu and re_h must be nonzero".into()));
        }
        Ok(())
    }

    /// The effective advection constant `2 sigma / (mu Re_h) * sum_k k gamma_k`.
    pub fn k_value(&self) -> Rational {
        let mut weighted = Rational::zero();
        for (i, g) in self.gamma.iter().enumerate() {
            weighted += Rational::from_integer(((i + 1) as i64).into()) * g;
        }
        rat_int(2) * &self.sigma / (&self.mu * &self.re_h) * weighted
    }

    /// Human-readable expanded form of K.
    pub fn expanded_k(&self) -> String {
        let terms: Vec<String> = self
            .gamma
            .iter()
            .enumerate()
            .map(|(i, g)| format!("{}*{}", i + 1, rat_to_string(g)))
            .collect();
        format!(
            "2*{}/({}*{}) * ({}) = {}",
            rat_to_string(&self.sigma),
            rat_to_string(&self.mu),
            rat_to_string(&self.re_h),
            terms.join(" + "),
            rat_to_string(&self.k_value())
        )
    }
}

/// A claimed closed-form solution shipped for auditing: the widely quoted
/// kink branch for the drp equation, `u = V0 + U1 tanh(C1 xi)` with
/// `v = K` and `U1 = -C / (2 C1 v^2 sigma)`. The residual checker rejects
/// it; see the README findings section.
pub const DRP_CLAIMED_PROFILE: &str = "V0 - C/(2*C1*v^2*sigma)*tanh(C1*xi)";

/// Reference instantiation for the audit: C = 1, C1 = 1, V0 = 0 and the
/// default scheme configuration.
pub fn drp_claimed_audit_env(config: &DrpConfig) -> Vec<(String, f64)> {
    let k = crate::symbol::rat_to_f64(&config.k_value());
    vec![
        ("sigma".to_string(), crate::symbol::rat_to_f64(&config.sigma)),
        ("K".to_string(), k),
        ("v".to_string(), k),
        ("C".to_string(), 1.0),
        ("C1".to_string(), 1.0),
        ("V0".to_string(), 0.0),
    ]
}

/// Builds a builtin equation. For `drp`, the optional config binds numeric
/// defaults for `sigma` and the collapsed `K`.
pub fn builtin_equation(name: &str, drp: Option<&DrpConfig>) -> Result<PdeEquation> {
    match name {
        "burgers" => parse_equation(BURGERS_SOURCE),
        "drp" => {
            let mut eq = parse_equation(DRP_SOURCE)?;
            if let Some(config) = drp {
                config.validate()?;
                eq.param_values
                    .insert(Symbol::param("sigma"), config.sigma.clone());
                eq.param_values.insert(Symbol::param("K"), config.k_value());
            }
            Ok(eq)
        }
        other => Err(Error::Internal(format!(
            "unknown builtin `{other}`; available: burgers, drp"
        ))),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["burgers", "drp"]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        assert!(builtin_equation("burgers", None).is_ok());
        assert!(builtin_equation("drp", None).is_ok());
        assert!(builtin_equation("kdv", None).is_err());
    }

    #[test]
    fn k_value_matches_reference_config() {
        // m=1, gamma=[1], sigma=1/2, mu=1, re_h=10 -> K = 1/10
        let config = DrpConfig::default();
        assert_eq!(config.k_value(), rat(1, 10));
    }

    #[test]
    fn k_value_weights_by_index() {
        let config = DrpConfig {
            m: 3,
            gamma: vec![rat_int(1), rat(1, 2), rat(-1, 3)],
            sigma: rat_int(1),
            mu: rat_int(2),
            re_h: rat_int(1),
        };
        // 2*1/(2*1) * (1*1 + 2*(1/2) + 3*(-1/3)) = 1 * 1 = 1
        assert_eq!(config.k_value(), rat_int(1));
    }

    #[test]
    fn config_validation() {
        let bad = DrpConfig { gamma: vec![], ..DrpConfig::default() };
        assert!(bad.validate().is_err());
        let bad2 = DrpConfig { mu: rat_int(0), ..DrpConfig::default() };
        assert!(bad2.validate().is_err());
    }

    #[test]
    fn drp_defaults_bound_when_configured() {
        let eq = builtin_equation("drp", Some(&DrpConfig::default())).unwrap();
        assert_eq!(eq.param_values[&Symbol::param("K")], rat(1, 10));
    }
}
