//! Structured zero-sequence families.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GeneratorTag, Zero, ZeroSequence};
use crate::error::Error;
use crate::geometry::{depth_annulus_index, DiscPoint};
use crate::scalar::{pow2_neg, Real};

/// Placement of the zeros inside each annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// On `1 - |z| = 1.5·2^{-j}`, equally rotated starting at angle 0.
    #[default]
    Radial,
    /// Uniform in the annulus, driven by the seed.
    Jittered,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Radial => "radial",
            Placement::Jittered => "jittered",
        })
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "radial" => Ok(Placement::Radial),
            "jittered" => Ok(Placement::Jittered),
            other => Err(Error::InvalidParameter(format!("unknown placement `{other}`"))),
        }
    }
}

fn point_at<T: Real>(depth: T, angle: T) -> DiscPoint<T> {
    DiscPoint::new(Complex::from_polar(T::one() - depth, angle)).expect("generator depth is positive")
}

/// `count` zeros equally rotated on `1 - |z| = 1.5·2^{-j}`.
fn ring<T: Real>(j: u32, count: u32, out: &mut Vec<Zero<T>>) {
    let depth = T::lit(1.5) * pow2_neg::<T>(j as i32);
    for i in 0..count {
        let angle = T::TAU() * T::from_u32(i).unwrap() / T::from_u32(count).unwrap();
        out.push(Zero::simple(point_at(depth, angle)));
    }
}

/// Exactly `m` zeros in each annulus `𝒜_1, …, 𝒜_J`.
pub fn gen_exponential<T: Real>(m: u32, depth: u32, placement: Placement, seed: u64) -> ZeroSequence<T> {
    let mut zeros = Vec::with_capacity((m * depth) as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 1..=depth {
        match placement {
            Placement::Radial => ring(j, m, &mut zeros),
            Placement::Jittered => {
                let lo = pow2_neg::<T>(j as i32);
                for _ in 0..m {
                    // keep a margin from the annulus edges so rounding in |z| cannot move it
                    let u: f64 = rng.gen_range(1e-6..(1.0 - 1e-6));
                    let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let z = point_at(lo * (T::one() + T::lit(u)), T::lit(angle));
                    debug_assert_eq!(depth_annulus_index(z.depth()), j);
                    zeros.push(Zero::simple(z));
                }
            }
        }
    }
    ZeroSequence::tagged(zeros, GeneratorTag::Exponential { m, depth, placement, seed })
}

/// `⌈j^s⌉` zeros in annulus `j`, equally rotated on `1 - |z| = 1.5·2^{-j}`.
pub fn gen_growing_density<T: Real>(s: f64, depth: u32) -> ZeroSequence<T> {
    assert!(s >= 1.0, "growth exponent must be at least 1");
    let mut zeros = Vec::new();
    for j in 1..=depth {
        ring(j, (j as f64).powf(s).ceil() as u32, &mut zeros);
    }
    ZeroSequence::tagged(zeros, GeneratorTag::GrowingDensity { s, depth })
}

/// `k` zeros equally spaced in angle on `|z| = 1 - 2^{-j}` inside the Carleson
/// box over the arc of length `2^{-j}` centred at angle 0.
pub fn gen_stacked_carleson<T: Real>(k: u32, j: u32) -> ZeroSequence<T> {
    assert!(k >= 1, "at least one zero");
    let side = pow2_neg::<T>(j as i32);
    let half = side / T::lit(2.0);
    let mut zeros = Vec::with_capacity(k as usize);
    for i in 0..k {
        let angle = -half + side * (T::from_u32(i).unwrap() + T::lit(0.5)) / T::from_u32(k).unwrap();
        let mut radius = T::one() - side;
        let mut z = Complex::from_polar(radius, angle);
        // the computed modulus must not round above 1 - 2^{-j}
        while T::one() - z.norm() > side {
            radius = radius + T::epsilon();
            z = Complex::from_polar(radius, angle);
        }
        zeros.push(Zero::simple(DiscPoint::new(z).expect("inside the disc")));
    }
    ZeroSequence::tagged(zeros, GeneratorTag::StackedCarleson { k, j })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::annulus_index;

    #[test]
    fn exponential_radial_positions() {
        let seq = gen_exponential::<f64>(1, 3, Placement::Radial, 0);
        let radii: Vec<f64> = seq.zeros().iter().map(|z| z.position.modulus()).collect();
        for (r, expect) in radii.iter().zip([0.25, 0.625, 0.8125]) {
            assert!((r - expect).abs() < 1e-15);
        }
        let seq = gen_exponential::<f64>(2, 1, Placement::Radial, 0);
        assert_eq!(seq.len(), 2);
        let angles: Vec<f64> = seq.zeros().iter().map(|z| z.position.angle()).collect();
        assert!(angles[0].abs() < 1e-15);
        assert!((angles[1].abs() - std::f64::consts::PI).abs() < 1e-12);
        assert!(seq.zeros().iter().all(|z| (z.position.modulus() - 0.25).abs() < 1e-15));
    }

    #[test]
    fn jittered_is_seeded_and_stays_in_annuli() {
        let a = gen_exponential::<f64>(3, 12, Placement::Jittered, 42);
        let b = gen_exponential::<f64>(3, 12, Placement::Jittered, 42);
        let c = gen_exponential::<f64>(3, 12, Placement::Jittered, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for (i, z) in a.zeros().iter().enumerate() {
            assert_eq!(annulus_index(&z.position) as usize, i / 3 + 1);
        }
    }

    #[test]
    fn growing_density_counts_and_sum() {
        let seq = gen_growing_density::<f64>(1.0, 4);
        assert_eq!(seq.len(), 1 + 2 + 3 + 4);
        // materialised plus tail Blaschke mass tends to Σ 1.5 j 2^{-j} = 3
        let long = gen_growing_density::<f64>(1.0, 40);
        assert!((long.blaschke_sum() + long.tail_mass() - 3.0).abs() < 1e-12);
        assert!((seq.blaschke_sum() + seq.tail_mass() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stacked_zeros_stay_inside_box_depth() {
        for j in [3, 6, 8, 12] {
            let seq = gen_stacked_carleson::<f64>(500, j);
            let side = 2f64.powi(-(j as i32));
            for z in seq.zeros() {
                assert!(z.position.depth() <= side);
                assert!((z.position.depth() - side).abs() < 1e-13);
                assert!(z.position.angle().abs() <= side / 2.0);
            }
        }
        assert_eq!(gen_stacked_carleson::<f64>(1, 5).len(), 1);
    }

    #[test]
    fn tails_are_declared() {
        assert!(gen_exponential::<f64>(1, 5, Placement::Radial, 0).is_infinite());
        assert!(gen_growing_density::<f64>(1.0, 5).is_infinite());
        assert!(!gen_stacked_carleson::<f64>(4, 5).is_infinite());
        let seq = gen_exponential::<f64>(2, 10, Placement::Radial, 0);
        assert!((seq.tail_mass() - 2.0 * 1.5 * 2f64.powi(-10)).abs() < 1e-18);
    }
}
