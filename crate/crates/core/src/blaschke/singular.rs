use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::DiscPoint;
use crate::scalar::Real;

/// Atomic singular inner function `S(z) = exp(c (z + σ)/(z - σ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularAtom<T: Real> {
    sigma: Complex<T>,
    mass: T,
}

impl<T: Real> SingularAtom<T> {
    const GUARD: f64 = 1e-12;

    pub fn new(sigma: Complex<T>, mass: T) -> Result<Self> {
        if (sigma.norm() - T::one()).abs() > T::lit(1e3) * T::epsilon() {
            return Err(Error::InvalidParameter("atom must sit on the unit circle".into()));
        }
        if !(mass > T::zero()) {
            return Err(Error::InvalidParameter("atom mass must be positive".into()));
        }
        Ok(Self { sigma, mass })
    }

    pub fn sigma(&self) -> Complex<T> {
        self.sigma
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    fn guard(&self, z: Complex<T>) -> Result<Complex<T>> {
        let gap = z - self.sigma;
        if gap.norm() < T::lit(Self::GUARD) {
            return Err(Error::IllConditioned { distance: gap.norm().as_f64() });
        }
        Ok(gap)
    }

    pub fn eval_raw(&self, z: Complex<T>) -> Result<Complex<T>> {
        let gap = self.guard(z)?;
        Ok(((z + self.sigma) / gap * self.mass).exp())
    }

    /// `S'(z) = S(z)·(-2cσ)/(z - σ)²`.
    pub fn derivative_raw(&self, z: Complex<T>) -> Result<Complex<T>> {
        let gap = self.guard(z)?;
        let s = ((z + self.sigma) / gap * self.mass).exp();
        Ok(s * self.sigma * (-T::lit(2.0) * self.mass) / (gap * gap))
    }

    pub fn eval(&self, z: &DiscPoint<T>) -> Result<Complex<T>> {
        self.eval_raw(z.value())
    }

    pub fn derivative(&self, z: &DiscPoint<T>) -> Result<Complex<T>> {
        self.derivative_raw(z.value())
    }
}
