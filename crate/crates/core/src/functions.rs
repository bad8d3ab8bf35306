//! Holomorphic test functions on the disc, evaluable in polar form.

use num_complex::Complex;

use crate::blaschke::{BlaschkeEvaluator, SingularAtom, ZeroSequence};
use crate::error::{Error, Result};
use crate::geometry::DiscPoint;
use crate::scalar::Real;

/// A point near which a function varies on the scale of its distance to it.
/// `depth = 0` marks a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hotspot<T: Real> {
    pub depth: T,
    pub angle: T,
}

/// A function on the open disc that the measure and norm engines can sample.
pub trait DiscFunction<T: Real>: Sync {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>>;

    /// `|f((1 - depth) e^{iθ})|`; implementations override this when the polar
    /// form is more accurate near the boundary.
    fn modulus_polar(&self, depth: T, angle: T) -> Result<T> {
        Ok(self.eval(Complex::from_polar(T::one() - depth, angle))?.norm())
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        Vec::new()
    }

    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct Constant<T: Real>(pub Complex<T>);

impl<T: Real> Constant<T> {
    pub fn real(c: T) -> Self {
        Self(Complex::new(c, T::zero()))
    }
}

impl<T: Real> DiscFunction<T> for Constant<T> {
    fn eval(&self, _: Complex<T>) -> Result<Complex<T>> {
        Ok(self.0)
    }

    fn modulus_polar(&self, _: T, _: T) -> Result<T> {
        Ok(self.0.norm())
    }

    fn name(&self) -> String {
        format!("constant({})", self.0.norm())
    }
}

/// `f(z) = z`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl<T: Real> DiscFunction<T> for Identity {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(z)
    }

    fn modulus_polar(&self, depth: T, _: T) -> Result<T> {
        Ok(T::one() - depth)
    }

    fn name(&self) -> String {
        "identity".into()
    }
}

/// `f(z) = (1 - z)^{-a}` on the principal branch.
#[derive(Debug, Clone, Copy)]
pub struct PolePower<T: Real> {
    pub exponent: T,
}

impl<T: Real> PolePower<T> {
    pub fn new(exponent: T) -> Self {
        Self { exponent }
    }
}

impl<T: Real> DiscFunction<T> for PolePower<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        let w = Complex::new(T::one(), T::zero()) - z;
        if w.norm() == T::zero() {
            return Err(Error::Evaluation("pole at z = 1".into()));
        }
        Ok(w.powf(-self.exponent))
    }

    fn modulus_polar(&self, depth: T, angle: T) -> Result<T> {
        let s = (angle / T::lit(2.0)).sin();
        let dist2 = depth * depth + T::lit(4.0) * (T::one() - depth) * s * s;
        if dist2 == T::zero() {
            return Err(Error::Evaluation("pole at z = 1".into()));
        }
        Ok(dist2.powf(-self.exponent / T::lit(2.0)))
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        vec![Hotspot { depth: T::zero(), angle: T::zero() }]
    }

    fn name(&self) -> String {
        format!("(1-z)^-{}", self.exponent)
    }
}

/// Truncated lacunary series `Σ_{n<N} z^{2^n}`.
#[derive(Debug, Clone, Copy)]
pub struct Lacunary {
    pub terms: u32,
}

impl Default for Lacunary {
    fn default() -> Self {
        Self { terms: 50 }
    }
}

impl Lacunary {
    /// Upper bound for the omitted tail `Σ_{n>=N} r^{2^n}` at radius `r`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        let mut pow = r.powf(2f64.powi(self.terms as i32));
        for _ in 0..64 {
            if pow == 0.0 {
                break;
            }
            acc += pow;
            pow *= pow;
        }
        if pow > 0.0 {
            f64::INFINITY
        } else {
            acc
        }
    }
}

impl<T: Real> DiscFunction<T> for Lacunary {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        let mut w = z;
        let mut sum = Complex::new(T::zero(), T::zero());
        for _ in 0..self.terms {
            sum = sum + w;
            w = w * w;
            if w.re == T::zero() && w.im == T::zero() {
                break;
            }
        }
        Ok(sum)
    }

    fn name(&self) -> String {
        format!("lacunary({})", self.terms)
    }
}

/// `B'` for a Blaschke product; the zeros are reported as hotspots.
#[derive(Debug, Clone)]
pub struct BlaschkeDerivative<T: Real> {
    evaluator: BlaschkeEvaluator<T>,
}

impl<T: Real> BlaschkeDerivative<T> {
    pub fn new(evaluator: BlaschkeEvaluator<T>) -> Self {
        Self { evaluator }
    }

    /// The finite product over the materialised zeros, ignoring any tail.
    pub fn truncated(seq: &ZeroSequence<T>) -> Self {
        Self::new(BlaschkeEvaluator::finite(ZeroSequence::finite(seq.zeros().to_vec())))
    }

    pub fn evaluator(&self) -> &BlaschkeEvaluator<T> {
        &self.evaluator
    }
}

impl<T: Real> DiscFunction<T> for BlaschkeDerivative<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.evaluator.derivative(&DiscPoint::new(z)?)?.value)
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        zero_hotspots(self.evaluator.zeros())
    }

    fn name(&self) -> String {
        format!("blaschke_derivative({} zeros)", self.evaluator.zeros().count_with_multiplicity())
    }
}

/// `B` itself.
#[derive(Debug, Clone)]
pub struct BlaschkeValue<T: Real> {
    evaluator: BlaschkeEvaluator<T>,
}

impl<T: Real> BlaschkeValue<T> {
    pub fn new(evaluator: BlaschkeEvaluator<T>) -> Self {
        Self { evaluator }
    }
}

impl<T: Real> DiscFunction<T> for BlaschkeValue<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.evaluator.evaluate(&DiscPoint::new(z)?)?.value)
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        zero_hotspots(self.evaluator.zeros())
    }

    fn name(&self) -> String {
        format!("blaschke({} zeros)", self.evaluator.zeros().count_with_multiplicity())
    }
}

fn zero_hotspots<T: Real>(seq: &ZeroSequence<T>) -> Vec<Hotspot<T>> {
    seq.zeros()
        .iter()
        .map(|z| Hotspot { depth: z.position.depth(), angle: z.position.angle() })
        .collect()
}

/// `S'` for an atomic singular inner function.
#[derive(Debug, Clone, Copy)]
pub struct SingularAtomDerivative<T: Real>(pub SingularAtom<T>);

impl<T: Real> DiscFunction<T> for SingularAtomDerivative<T> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.0.derivative_raw(z)
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        let s = self.0.sigma();
        vec![Hotspot { depth: T::zero(), angle: s.im.atan2(s.re) }]
    }

    fn name(&self) -> String {
        format!("singular_atom_derivative(mass={})", self.0.mass())
    }
}

/// Wraps a closure as a [`DiscFunction`].
pub struct FromFn<T: Real, F> {
    f: F,
    name: String,
    hotspots: Vec<Hotspot<T>>,
}

impl<T: Real, F> FromFn<T, F>
where
    F: Fn(Complex<T>) -> Complex<T> + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self { f, name: name.into(), hotspots: Vec::new() }
    }

    pub fn with_hotspots(mut self, hotspots: Vec<Hotspot<T>>) -> Self {
        self.hotspots = hotspots;
        self
    }
}

impl<T: Real, F> DiscFunction<T> for FromFn<T, F>
where
    F: Fn(Complex<T>) -> Complex<T> + Sync,
{
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        let v = (self.f)(z);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("{} is not finite at {z}", self.name)))
        }
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        self.hotspots.clone()
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

impl<T: Real, G: DiscFunction<T> + ?Sized> DiscFunction<T> for &G {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        (**self).eval(z)
    }

    fn modulus_polar(&self, depth: T, angle: T) -> Result<T> {
        (**self).modulus_polar(depth, angle)
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        (**self).hotspots()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: Real> DiscFunction<T> for Box<dyn DiscFunction<T> + Send> {
    fn eval(&self, z: Complex<T>) -> Result<Complex<T>> {
        (**self).eval(z)
    }

    fn modulus_polar(&self, depth: T, angle: T) -> Result<T> {
        (**self).modulus_polar(depth, angle)
    }

    fn hotspots(&self) -> Vec<Hotspot<T>> {
        (**self).hotspots()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}
