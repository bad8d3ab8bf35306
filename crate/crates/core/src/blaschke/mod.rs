//! Finite and truncated-infinite Blaschke products.
//!
//! Factors use the normalisation `b_a(z) = (|a|/a)(a - z)/(1 - āz)` with
//! `b_0(z) = z`, so a product without a zero at the origin is positive there.

mod generators;
pub mod io;
mod singular;

pub use generators::{gen_exponential, gen_growing_density, gen_stacked_carleson, Placement};
pub use singular::SingularAtom;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{annulus_index, DiscPoint};
use crate::scalar::Real;
use crate::sum::CompensatedSum;

/// A zero of a Blaschke product together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero<T: Real> {
    pub position: DiscPoint<T>,
    pub multiplicity: u32,
}

impl<T: Real> Zero<T> {
    pub fn new(position: DiscPoint<T>, multiplicity: u32) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::InvalidParameter("zero multiplicity must be at least 1".into()));
        }
        Ok(Self { position, multiplicity })
    }

    pub fn simple(position: DiscPoint<T>) -> Self {
        Self { position, multiplicity: 1 }
    }
}

/// Descriptor of the (possibly infinite) law a materialised zero list truncates.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorTag {
    /// `m` zeros in every annulus; `depth` annuli are materialised.
    Exponential { m: u32, depth: u32, placement: Placement, seed: u64 },
    /// `⌈j^s⌉` zeros in annulus `j`; `depth` annuli are materialised.
    GrowingDensity { s: f64, depth: u32 },
    /// `k` zeros stacked on one circle inside a single Carleson box (finite).
    StackedCarleson { k: u32, j: u32 },
    /// Free-form tag read from a file; treated as a finite construction.
    Other(String),
}

impl GeneratorTag {
    /// Whether the tag describes an infinite zero law.
    pub fn is_infinite(&self) -> bool {
        matches!(self, GeneratorTag::Exponential { .. } | GeneratorTag::GrowingDensity { .. })
    }

    /// Upper bound for `Σ m_k (1 - |z_k|)` over the zeros the law places beyond
    /// the materialised depth.
    pub fn tail_mass(&self) -> f64 {
        match *self {
            GeneratorTag::Exponential { m, depth, placement, .. } => {
                let per_annulus = match placement {
                    Placement::Radial => 1.5,
                    Placement::Jittered => 2.0,
                };
                m as f64 * per_annulus * 2f64.powi(-(depth as i32))
            }
            GeneratorTag::GrowingDensity { s, depth } => {
                let mut acc = CompensatedSum::new();
                for j in (depth + 1)..4000 {
                    let term = (j as f64).powf(s).ceil() * 1.5 * 2f64.powi(-(j as i32));
                    acc.add(term);
                    if term < 1e-300 || (j > depth + 64 && term < acc.value() * 1e-18) {
                        break;
                    }
                }
                acc.value()
            }
            GeneratorTag::StackedCarleson { .. } | GeneratorTag::Other(_) => 0.0,
        }
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorTag::Exponential { m, depth, placement, seed } => {
                write!(f, "exponential:m={m}:depth={depth}:placement={placement}:seed={seed}")
            }
            GeneratorTag::GrowingDensity { s, depth } => write!(f, "growing_density:s={s}:depth={depth}"),
            GeneratorTag::StackedCarleson { k, j } => write!(f, "stacked_carleson:k={k}:j={j}"),
            GeneratorTag::Other(s) => f.write_str(s),
        }
    }
}

impl FromStr for GeneratorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let fields: Vec<(&str, &str)> = parts.filter_map(|p| p.split_once('=')).collect();
        let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let bad = || Error::Format(format!("malformed generator tag `{s}`"));
        let int = |key: &str| -> Result<u64> { get(key).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        Ok(match kind {
            "exponential" => GeneratorTag::Exponential {
                m: int("m")? as u32,
                depth: int("depth")? as u32,
                placement: get("placement").ok_or_else(bad)?.parse()?,
                seed: int("seed")?,
            },
            "growing_density" => GeneratorTag::GrowingDensity {
                s: get("s").ok_or_else(bad)?.parse().map_err(|_| bad())?,
                depth: int("depth")? as u32,
            },
            "stacked_carleson" => GeneratorTag::StackedCarleson { k: int("k")? as u32, j: int("j")? as u32 },
            _ => GeneratorTag::Other(s.to_string()),
        })
    }
}

/// Ordered, materialised list of zeros, optionally tagged with the law it truncates.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSequence<T: Real> {
    zeros: Vec<Zero<T>>,
    generator: Option<GeneratorTag>,
    tail_mass: T,
}

impl<T: Real> ZeroSequence<T> {
    /// A finite sequence (no unmaterialised tail).
    pub fn finite(zeros: Vec<Zero<T>>) -> Self {
        Self { zeros, generator: None, tail_mass: T::zero() }
    }

    pub fn empty() -> Self {
        Self::finite(Vec::new())
    }

    /// Simple zeros at the given points.
    pub fn from_points(points: &[Complex<T>]) -> Result<Self> {
        let zeros = points
            .iter()
            .map(|&z| DiscPoint::new(z).map(Zero::simple))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::finite(zeros))
    }

    /// A tagged sequence; the unmaterialised tail mass is taken from the tag.
    pub fn tagged(zeros: Vec<Zero<T>>, generator: GeneratorTag) -> Self {
        let tail_mass = T::lit(generator.tail_mass());
        Self { zeros, generator: Some(generator), tail_mass }
    }

    /// A sequence truncating an infinite law whose unmaterialised tail has
    /// Blaschke mass at most `tail_mass`.
    pub fn with_tail(zeros: Vec<Zero<T>>, generator: GeneratorTag, tail_mass: T) -> Self {
        Self { zeros, generator: Some(generator), tail_mass }
    }

    pub fn zeros(&self) -> &[Zero<T>] {
        &self.zeros
    }

    pub fn generator(&self) -> Option<&GeneratorTag> {
        self.generator.as_ref()
    }

    pub fn tail_mass(&self) -> T {
        self.tail_mass
    }

    /// True when the sequence truncates an infinite zero law.
    pub fn is_infinite(&self) -> bool {
        self.generator.as_ref().is_some_and(GeneratorTag::is_infinite)
    }

    /// Number of materialised list entries.
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Number of materialised zeros counted with multiplicity.
    pub fn count_with_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity as usize).sum()
    }

    /// `Σ m_k (1 - |z_k|)` over the materialised zeros.
    pub fn blaschke_sum(&self) -> T {
        let mut acc = CompensatedSum::new();
        for z in &self.zeros {
            acc.add(T::from_u32(z.multiplicity).unwrap() * z.position.depth());
        }
        acc.value()
    }
}

/// Single Blaschke factor `(|a|/a)(a - z)/(1 - āz)`, or `z` when `a = 0`.
pub fn blaschke_factor<T: Real>(a: &DiscPoint<T>, z: Complex<T>) -> Complex<T> {
    factor_raw(a.value(), z)
}

#[inline]
fn factor_raw<T: Real>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    let m = a.norm();
    if m == T::zero() {
        return z;
    }
    let one = Complex::new(T::one(), T::zero());
    (a - z) / (one - a.conj() * z) * (Complex::new(m, T::zero()) / a)
}

/// Derivative of the factor: `(|a|/a)(|a|² - 1)/(1 - āz)²`, or `1` when `a = 0`.
#[inline]
fn factor_derivative_raw<T: Real>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    let m = a.norm();
    if m == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let one = Complex::new(T::one(), T::zero());
    let d = one - a.conj() * z;
    (Complex::new(m, T::zero()) / a) * (m * m - T::one()) / (d * d)
}

/// Smallest number of leading list entries `N` whose remaining tail satisfies
/// `Σ_{k>N} m_k 2(1-|z_k|)/(1-|z|) <= ε`, the unmaterialised tail included.
/// Finite sequences always use every entry.
pub fn truncation_depth<T: Real>(seq: &ZeroSequence<T>, z: &DiscPoint<T>, eps: T) -> Result<usize> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter("tail budget must be positive".into()));
    }
    if !seq.is_infinite() {
        return Ok(seq.len());
    }
    let scale = T::lit(2.0) / z.depth();
    let suffix = suffix_masses(seq);
    for (n, tail) in suffix.iter().enumerate() {
        if scale * *tail <= eps {
            return Ok(n);
        }
    }
    let bound = scale * suffix[seq.len()];
    Err(Error::TailBudgetExceeded { bound: bound.as_f64(), budget: eps.as_f64() })
}

/// `suffix[n] = Σ_{k>=n} m_k (1 - |z_k|) + tail_mass`, for `n = 0..=len`.
fn suffix_masses<T: Real>(seq: &ZeroSequence<T>) -> Vec<T> {
    let mut out = vec![T::zero(); seq.len() + 1];
    let mut acc = CompensatedSum::new();
    acc.add(seq.tail_mass());
    out[seq.len()] = acc.value();
    for (k, z) in seq.zeros().iter().enumerate().rev() {
        acc.add(T::from_u32(z.multiplicity).unwrap() * z.position.depth());
        out[k] = acc.value();
    }
    out
}

/// A value together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T: Real> {
    pub value: Complex<T>,
    pub error_bound: T,
}

/// Zero sequence plus truncation policy.
#[derive(Debug, Clone)]
pub struct BlaschkeEvaluator<T: Real> {
    seq: ZeroSequence<T>,
    tail_budget: T,
    suffix: Vec<T>,
    /// Entry order by ascending annulus index, for boundary sums.
    annulus_order: Vec<usize>,
}

impl<T: Real> BlaschkeEvaluator<T> {
    pub fn new(seq: ZeroSequence<T>, tail_budget: T) -> Result<Self> {
        if !(tail_budget > T::zero()) {
            return Err(Error::InvalidParameter("tail budget must be positive".into()));
        }
        let suffix = suffix_masses(&seq);
        let mut annulus_order: Vec<usize> = (0..seq.len()).collect();
        annulus_order.sort_by_key(|&k| annulus_index(&seq.zeros()[k].position));
        Ok(Self { seq, tail_budget, suffix, annulus_order })
    }

    /// Evaluator for a finite sequence, where the budget is never consulted.
    pub fn finite(seq: ZeroSequence<T>) -> Self {
        Self::new(seq, T::lit(1e-12)).expect("positive budget")
    }

    pub fn zeros(&self) -> &ZeroSequence<T> {
        &self.seq
    }

    pub fn tail_budget(&self) -> T {
        self.tail_budget
    }

    fn depth_for(&self, z: &DiscPoint<T>) -> Result<usize> {
        if !self.seq.is_infinite() {
            return Ok(self.seq.len());
        }
        let scale = T::lit(2.0) / z.depth();
        match self.suffix.iter().position(|tail| scale * *tail <= self.tail_budget) {
            Some(n) => Ok(n),
            None => Err(Error::TailBudgetExceeded {
                bound: (scale * self.suffix[self.seq.len()]).as_f64(),
                budget: self.tail_budget.as_f64(),
            }),
        }
    }

    fn tail_at(&self, n: usize) -> T {
        if self.seq.is_infinite() {
            self.suffix[n]
        } else {
            T::zero()
        }
    }

    /// `B(z)` from the truncated product, with `|B_∞(z) - B_N(z)| <= error_bound`.
    pub fn evaluate(&self, z: &DiscPoint<T>) -> Result<Evaluation<T>> {
        let n = self.depth_for(z)?;
        let (value, _) = product_and_derivative(&self.seq.zeros()[..n], z.value());
        let error_bound = T::lit(2.0) * self.tail_at(n) / z.depth();
        Ok(Evaluation { value, error_bound })
    }

    /// `B'(z)` via the leave-one-out product rule; exact at zeros of `B`.
    pub fn derivative(&self, z: &DiscPoint<T>) -> Result<Evaluation<T>> {
        Ok(self.evaluate_with_derivative(z)?.1)
    }

    /// `(B(z), B'(z))` in a single pass.
    pub fn evaluate_with_derivative(&self, z: &DiscPoint<T>) -> Result<(Evaluation<T>, Evaluation<T>)> {
        let n = self.depth_for(z)?;
        let (value, deriv) = product_and_derivative(&self.seq.zeros()[..n], z.value());
        let t = z.depth();
        let tail = self.tail_at(n);
        // Cauchy estimate on the circle of radius (1-|z|)/2
        Ok((
            Evaluation { value, error_bound: T::lit(2.0) * tail / t },
            Evaluation { value: deriv, error_bound: T::lit(8.0) * tail / (t * t) },
        ))
    }

    /// `B'` at a point of the closed disc, using every materialised zero.
    /// Used for boundary limits of finite products.
    pub fn derivative_closed(&self, z: Complex<T>) -> Complex<T> {
        product_and_derivative(self.seq.zeros(), z).1
    }

    /// `log 1/|B(z)|` over the materialised zeros; stays finite when `|B(z)|`
    /// underflows.
    pub fn log_inverse_modulus(&self, z: &DiscPoint<T>) -> T {
        let mut acc = CompensatedSum::new();
        for zero in self.seq.zeros() {
            let b = factor_raw(zero.position.value(), z.value()).norm();
            acc.add(-T::from_u32(zero.multiplicity).unwrap() * b.ln());
        }
        acc.value()
    }

    /// `|B'(ξ)| = Σ m_k (1 - |z_k|²)/|ξ - z_k|²` on the unit circle, summed in
    /// ascending annulus order with compensation.
    pub fn boundary_derivative_modulus(&self, xi: Complex<T>) -> Result<T> {
        if (xi.norm() - T::one()).abs() > T::lit(1e3) * T::epsilon() {
            return Err(Error::InvalidParameter(format!("boundary point must have unit modulus, got |ξ| = {}", xi.norm())));
        }
        // beyond 1/ε the zero sits within rounding distance of ξ
        let limit = T::one() / T::epsilon();
        let mut acc = CompensatedSum::new();
        for &k in &self.annulus_order {
            let zero = &self.seq.zeros()[k];
            let a = zero.position.value();
            let d2 = (xi - a).norm_sqr();
            let term = T::from_u32(zero.multiplicity).unwrap() * (T::one() - a.norm_sqr()) / d2;
            if !term.is_finite() || term > limit {
                return Err(Error::ZeroOnRay { index: k });
            }
            acc.add(term);
        }
        Ok(acc.value())
    }

    /// `(1/2π)∮|B'(e^{iθ})| dθ` by the periodic trapezoid rule, doubling the
    /// node count from 256 until successive values agree to relative `tol`.
    pub fn boundary_derivative_mean(&self, tol: T) -> Result<T> {
        let mean = |n: usize| -> Result<T> {
            let h = T::TAU() / T::from_usize_lossy(n);
            let vals: Vec<T> = (0..n)
                .into_par_iter()
                .map(|k| self.boundary_derivative_modulus(Complex::from_polar(T::one(), h * T::from_usize_lossy(k))))
                .collect::<Result<_>>()?;
            let mut acc = CompensatedSum::new();
            for v in vals {
                acc.add(v);
            }
            Ok(acc.value() / T::from_usize_lossy(n))
        };
        let mut n = 256;
        let mut prev = mean(n)?;
        loop {
            n *= 2;
            let next = mean(n)?;
            let change = (next - prev).abs();
            if change <= tol * next.abs() {
                return Ok(next);
            }
            if n >= 1 << 22 {
                return Err(Error::QuadratureStall { points: n, change: (change / next.abs()).as_f64() });
            }
            prev = next;
        }
    }
}

/// Product and derivative over the given zeros by the forward product rule
/// `D ← D·F_k + P·F'_k`, `P ← P·F_k`; this is the leave-one-out sum
/// `Σ_k F'_k Π_{n≠k} F_n` accumulated without division.
fn product_and_derivative<T: Real>(zeros: &[Zero<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::one(), T::zero());
    let mut d = Complex::new(T::zero(), T::zero());
    for zero in zeros {
        let a = zero.position.value();
        let b = factor_raw(a, z);
        let db = factor_derivative_raw(a, z);
        let m = zero.multiplicity as i32;
        let (f, df) = if m == 1 {
            (b, db)
        } else {
            let bm1 = b.powi(m - 1);
            (bm1 * b, bm1 * db * T::from_i32(m).unwrap())
        };
        d = d * f + p * df;
        p = p * f;
    }
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn pt(re: f64, im: f64) -> DiscPoint<f64> {
        DiscPoint::from_parts(re, im).unwrap()
    }

    #[test]
    fn factor_examples() {
        let z = c(0.3, -0.4);
        assert_eq!(blaschke_factor(&DiscPoint::origin(), z), z);
        assert_eq!(blaschke_factor(&pt(0.5, 0.0), c(0.5, 0.0)).norm(), 0.0);
        let v = blaschke_factor(&pt(0.5, 0.0), c(0.0, 0.0));
        assert!((v - c(0.5, 0.0)).norm() < 1e-16);
        // normalisation makes b_a(0) = |a| for complex a too
        let v = blaschke_factor(&pt(0.3, 0.4), c(0.0, 0.0));
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        // unimodular on the circle
        let v = blaschke_factor(&pt(0.3, 0.4), Complex::from_polar(1.0, 2.0));
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_product_is_one() {
        let b = BlaschkeEvaluator::finite(ZeroSequence::<f64>::empty());
        let e = b.evaluate(&pt(0.7, 0.1)).unwrap();
        assert_eq!(e.value, c(1.0, 0.0));
        assert_eq!(b.derivative(&pt(0.7, 0.1)).unwrap().value, c(0.0, 0.0));
    }

    #[test]
    fn two_zero_examples() {
        let seq = ZeroSequence::from_points(&[c(0.5, 0.0), c(-0.5, 0.0)]).unwrap();
        let b = BlaschkeEvaluator::finite(seq);
        let v = b.evaluate(&DiscPoint::origin()).unwrap().value;
        assert!((v - c(0.25, 0.0)).norm() < 1e-15);
        for a in [0.5, -0.5] {
            let d = b.derivative(&pt(a, 0.0)).unwrap().value.norm();
            // (1-|a|²)|B'(a)| equals the cross pseudo-distance 0.8
            assert!(((1.0 - a * a) * d - 0.8).abs() < 1e-14);
        }
    }

    #[test]
    fn single_zero_derivatives() {
        let b = BlaschkeEvaluator::finite(ZeroSequence::from_points(&[c(0.5, 0.0)]).unwrap());
        assert!((b.derivative(&DiscPoint::origin()).unwrap().value.norm() - 0.75).abs() < 1e-15);
        let a = pt(0.3, 0.6);
        let b = BlaschkeEvaluator::finite(ZeroSequence::from_points(&[a.value()]).unwrap());
        let d = b.derivative(&a).unwrap().value.norm();
        assert!((d - 1.0 / (1.0 - a.value().norm_sqr())).abs() < 1e-13);
    }

    #[test]
    fn multiplicity_matches_repeated_factor() {
        let a = pt(0.4, 0.2);
        let double = ZeroSequence::finite(vec![Zero::new(a, 2).unwrap()]);
        let repeated = ZeroSequence::from_points(&[a.value(), a.value()]).unwrap();
        let z = pt(-0.1, 0.6);
        let (v1, d1) = BlaschkeEvaluator::finite(double).evaluate_with_derivative(&z).unwrap();
        let (v2, d2) = BlaschkeEvaluator::finite(repeated).evaluate_with_derivative(&z).unwrap();
        assert!((v1.value - v2.value).norm() < 1e-15);
        assert!((d1.value - d2.value).norm() < 1e-14);
        assert!(Zero::new(a, 0).is_err());
    }

    #[test]
    fn boundary_derivative_examples() {
        let b = BlaschkeEvaluator::finite(ZeroSequence::from_points(&[c(0.5, 0.0)]).unwrap());
        assert!((b.boundary_derivative_modulus(c(1.0, 0.0)).unwrap() - 3.0).abs() < 1e-14);
        assert!((b.boundary_derivative_modulus(c(-1.0, 0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(b.boundary_derivative_modulus(c(0.5, 0.0)).is_err());
        // circle mean via a dense trapezoid rule
        let n = 4096;
        let mean: f64 = (0..n)
            .map(|k| {
                let xi = Complex::from_polar(1.0, k as f64 * std::f64::consts::TAU / n as f64);
                b.boundary_derivative_modulus(xi).unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_mean_counts_zeros() {
        let seq = ZeroSequence::from_points(&[c(0.9, 0.1), c(-0.3, 0.5), c(0.0, -0.95)]).unwrap();
        let mean = BlaschkeEvaluator::finite(seq).boundary_derivative_mean(1e-12).unwrap();
        assert!((mean - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_on_ray_is_reported() {
        // a zero a few ulps from the circle, on the ray of ξ
        let near = ZeroSequence::from_points(&[c(1.0 - 2f64.powi(-52), 0.0)]).unwrap();
        let b = BlaschkeEvaluator::finite(near);
        assert!(matches!(b.boundary_derivative_modulus(c(1.0, 0.0)), Err(Error::ZeroOnRay { index: 0 })));
        assert!(b.boundary_derivative_modulus(c(-1.0, 0.0)).is_ok());
    }

    #[test]
    fn truncation_depth_examples() {
        let seq = ZeroSequence::from_points(&[c(0.5, 0.0), c(0.0, 0.9)]).unwrap();
        assert_eq!(truncation_depth(&seq, &pt(0.99, 0.0), 1e-30).unwrap(), 2);

        // zeros with 1-|z_k| = 2^{-k}, tail of the law beyond k = 20 included
        let zeros: Vec<_> = (1..=20)
            .map(|k| Zero::simple(pt(1.0 - 2f64.powi(-k), 0.0)))
            .collect();
        let seq = ZeroSequence::with_tail(zeros, GeneratorTag::GrowingDensity { s: 0.0, depth: 20 }, 2f64.powi(-20));
        // tail after N entries: 2·2^{-N}; N = 0 gives 2 > 1, N = 1 gives 1 <= 1
        assert_eq!(truncation_depth(&seq, &DiscPoint::origin(), 1.0).unwrap(), 1);
        assert_eq!(truncation_depth(&seq, &DiscPoint::origin(), 0.25).unwrap(), 3);
        assert!(matches!(
            truncation_depth(&seq, &DiscPoint::origin(), 1e-9),
            Err(Error::TailBudgetExceeded { .. })
        ));
    }

    #[test]
    fn evaluator_error_bound_covers_truncation() {
        let full = gen_exponential::<f64>(1, 30, Placement::Radial, 0);
        let short = gen_exponential::<f64>(1, 12, Placement::Radial, 0);
        let ev = BlaschkeEvaluator::new(short, 1e-2).unwrap();
        let reference = BlaschkeEvaluator::finite(ZeroSequence::finite(full.zeros().to_vec()));
        for z in [pt(0.1, 0.2), pt(-0.5, 0.3), pt(0.0, 0.0)] {
            let e = ev.evaluate(&z).unwrap();
            let r = reference.evaluate(&z).unwrap();
            assert!((e.value - r.value).norm() <= e.error_bound + 1e-15);
            assert!(e.error_bound <= 1e-2);
        }
        assert!(matches!(ev.evaluate(&pt(0.999, 0.0)), Err(Error::TailBudgetExceeded { .. })));
    }

    #[test]
    fn generator_tags_round_trip() {
        for tag in [
            GeneratorTag::Exponential { m: 2, depth: 7, placement: Placement::Jittered, seed: 9 },
            GeneratorTag::GrowingDensity { s: 1.5, depth: 4 },
            GeneratorTag::StackedCarleson { k: 100, j: 6 },
            GeneratorTag::Other("hand made".into()),
        ] {
            assert_eq!(tag.to_string().parse::<GeneratorTag>().unwrap(), tag);
        }
    }

    #[test]
    fn log_inverse_modulus_survives_underflow() {
        let seq = gen_stacked_carleson::<f64>(2000, 6);
        let b = BlaschkeEvaluator::finite(seq);
        let z = pt(1.0 - 2f64.powi(-6), 0.0);
        assert!(b.log_inverse_modulus(&z) > 745.0);
        assert_eq!(b.evaluate(&z).unwrap().value.norm(), 0.0);
    }
}
