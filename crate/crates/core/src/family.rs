use crate::error::{Error, Result};
use crate::grid::{GridSpec, VectorField};

/// A family `X = (X_λ)` of vector fields together with the Hölder index ε
/// used to measure them.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldFamily {
    members: Vec<VectorField>,
    epsilon: f64,
}

impl VectorFieldFamily {
    pub fn new(members: Vec<VectorField>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {epsilon} must lie in ]0,1["
            )));
        }
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidParameter("family needs at least one member".into()))?;
        if members.iter().any(|m| m.grid() != first.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { members, epsilon })
    }

    pub fn members(&self) -> &[VectorField] {
        &self.members
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &GridSpec {
        self.members[0].grid()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub(crate) fn with_members(&self, members: Vec<VectorField>) -> Self {
        Self {
            members,
            epsilon: self.epsilon,
        }
    }
}
