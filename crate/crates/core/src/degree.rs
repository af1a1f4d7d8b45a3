//! The symbolic degree grading.
//!
//! A degree is an integer combination `a·α + b·β + c` where α is the noise
//! regularity and β the kernel gain. Keeping the combination symbolic lets
//! every structural operation stay independent of the concrete exponents;
//! comparisons are only made after exact rational evaluation at a spec's
//! `(α, β)`.

use crate::{rat_int, Rat};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

/// Evaluation parameters shared by every degree computation.
///
/// Serialized through [`crate::serial`], which renders the rationals as
/// strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Params {
    /// Noise regularity, `α < 0`.
    pub alpha: Rat,
    /// Kernel regularity gain, `β > 0`.
    pub beta: Rat,
    /// Ambient dimension `d ≥ 1`.
    pub dim: usize,
}

impl Params {
    pub fn new(alpha: Rat, beta: Rat, dim: usize) -> Self {
        Params { alpha, beta, dim }
    }
}

/// Symbolic degree value `a·α + b·β + c`.
///
/// The derived ordering is the structural one used for canonical sorting; it
/// has no relation to the evaluated degree.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Degree {
    pub alpha_coef: i64,
    pub beta_coef: i64,
    pub int_part: i64,
}

impl Degree {
    pub const ZERO: Degree = Degree {
        alpha_coef: 0,
        beta_coef: 0,
        int_part: 0,
    };

    pub fn new(alpha_coef: i64, beta_coef: i64, int_part: i64) -> Self {
        Degree {
            alpha_coef,
            beta_coef,
            int_part,
        }
    }

    /// One noise contribution, α.
    pub fn alpha() -> Self {
        Degree::new(1, 0, 0)
    }

    /// One kernel edge with derivative order `|a|`: contributes β − |a|.
    pub fn kernel(deriv_total: u32) -> Self {
        Degree::new(0, 1, -(deriv_total as i64))
    }

    /// Pure integer degree (polynomial orders).
    pub fn int(n: i64) -> Self {
        Degree::new(0, 0, n)
    }

    pub fn is_zero(&self) -> bool {
        *self == Degree::ZERO
    }

    /// Exact evaluation at the spec's `(α, β)`.
    pub fn eval(&self, params: &Params) -> Rat {
        &params.alpha * rat_int(self.alpha_coef)
            + &params.beta * rat_int(self.beta_coef)
            + rat_int(self.int_part)
    }

    pub fn scaled(&self, n: i64) -> Self {
        Degree::new(self.alpha_coef * n, self.beta_coef * n, self.int_part * n)
    }
}

impl Add for Degree {
    type Output = Degree;
    fn add(self, o: Degree) -> Degree {
        Degree::new(
            self.alpha_coef + o.alpha_coef,
            self.beta_coef + o.beta_coef,
            self.int_part + o.int_part,
        )
    }
}

impl AddAssign for Degree {
    fn add_assign(&mut self, o: Degree) {
        *self = *self + o;
    }
}

impl Sub for Degree {
    type Output = Degree;
    fn sub(self, o: Degree) -> Degree {
        self + (-o)
    }
}

impl Neg for Degree {
    type Output = Degree;
    fn neg(self) -> Degree {
        self.scaled(-1)
    }
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}a+{}b+{}",
            self.alpha_coef, self.beta_coef, self.int_part
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn evaluation_is_exact() {
        let p = Params::new(rat(-3, 2), rat(2, 1), 1);
        // deg I_{e1}(Xi) = alpha + beta - 1 = -1/2.
        let d = Degree::alpha() + Degree::kernel(1);
        assert_eq!(d.eval(&p), rat(-1, 2));
    }

    #[test]
    fn arithmetic() {
        let d = Degree::new(2, 1, -3);
        assert_eq!(d + (-d), Degree::ZERO);
        assert_eq!(d.scaled(2), Degree::new(4, 2, -6));
    }
}
