use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial norms entering the lower bound on the lifespan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifespanInputs {
    /// `‖u_0‖_{L^p} + max(‖ω_0‖_{L^q}, ‖ω_0‖_{L^∞})`.
    pub l0: f64,
    /// `‖∇ρ_0‖_{L^∞}`.
    pub a0: f64,
    /// Striated norm of `ω_0` along `X_0`.
    pub s0: f64,
    /// `max_λ ~‖X_{0,λ}‖_{C^ε}`.
    pub gamma0: f64,
    /// `max_λ ‖∂_{X_{0,λ}} ∇ρ_0‖_{C^{ε−1}}`.
    pub r0: f64,
    pub delta: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl LifespanInputs {
    pub fn validate(&self) -> Result<()> {
        let norms = [self.l0, self.a0, self.s0, self.gamma0, self.r0, self.c];
        if norms.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("lifespan inputs must be finite and nonnegative: {self:?}")));
        }
        if !(self.delta > 1.0) {
            return Err(Error::InvalidParameter(format!("delta = {} must exceed 1", self.delta)));
        }
        if !(self.p > 2.0) {
            return Err(Error::InvalidParameter(format!("p = {} must lie in ]2, inf]", self.p)));
        }
        if !(self.q >= 2.0 && self.q.is_finite()) {
            return Err(Error::InvalidParameter(format!("q = {} must lie in [2, inf[", self.q)));
        }
        if 1.0 / self.p + 1.0 / self.q < 0.5 {
            return Err(Error::InvalidParameter(format!(
                "need 1/p + 1/q >= 1/2, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// `T = C min{L0, S0} / (L0 log(e + S0/L0)) / [(1+L0+S0)² (1+A0^{δ+3}) (1+Γ0³+R0)]`.
pub fn lifespan_bound(inp: &LifespanInputs) -> Result<f64> {
    if !(inp.l0 > 0.0) {
        return Err(Error::UndefinedLifespan(inp.l0));
    }
    inp.validate()?;
    let LifespanInputs {
        l0,
        a0,
        s0,
        gamma0,
        r0,
        delta,
        c,
        ..
    } = *inp;
    let lead = l0.min(s0) / (l0 * (E + s0 / l0).ln());
    let size = (1.0 + l0 + s0).powi(2);
    let density = 1.0 + a0.powf(delta + 3.0);
    let family = 1.0 + gamma0.powi(3) + r0;
    Ok(c * lead / (size * density * family))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> LifespanInputs {
        LifespanInputs {
            l0: 1.0,
            a0: 0.0,
            s0: 1.0,
            gamma0: 0.0,
            r0: 0.0,
            delta: 1.01,
            c: 1.0,
            p: 4.0,
            q: 4.0,
        }
    }

    #[test]
    fn worked_value() {
        let t = lifespan_bound(&base()).unwrap();
        assert!((t - 0.08460).abs() < 1e-5);
        assert!((t - 1.0 / (9.0 * (E + 1.0).ln())).abs() < 1e-15);
    }

    #[test]
    fn undefined_and_invalid() {
        let mut i = base();
        i.l0 = 0.0;
        assert_eq!(lifespan_bound(&i), Err(Error::UndefinedLifespan(0.0)));
        let mut i = base();
        i.delta = 1.0;
        assert!(lifespan_bound(&i).is_err());
        let mut i = base();
        i.p = 8.0;
        i.q = 8.0;
        assert!(lifespan_bound(&i).is_err());
    }

    #[test]
    fn doubling_a0_decreases() {
        let mut i = base();
        i.a0 = 0.7;
        let t1 = lifespan_bound(&i).unwrap();
        i.a0 = 1.4;
        assert!(lifespan_bound(&i).unwrap() < t1);
    }
}
