//! Annulus occupancy, separation, Carleson ratios and classification of zero sequences.

use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::blaschke::ZeroSequence;
use crate::error::{Error, Result};
use crate::geometry::{annulus_index, pseudo_distance_raw, wrap_tau, Arc, CarlesonBox, LengthConvention};
use crate::scalar::Real;
use crate::sum::CompensatedSum;

/// Zeros per dyadic annulus, counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccupancyProfile {
    /// `counts[j - 1]` is the occupancy of `𝒜_j`.
    pub counts: Vec<u64>,
    /// Zeros lying deeper than the examined depth.
    pub beyond: u64,
}

impl OccupancyProfile {
    pub fn depth(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn count(&self, j: u32) -> u64 {
        self.counts[(j - 1) as usize]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.beyond
    }
}

pub fn annuli_counts<T: Real>(seq: &ZeroSequence<T>, depth: u32) -> Result<OccupancyProfile> {
    if depth == 0 {
        return Err(Error::InvalidParameter("examined depth must be at least 1".into()));
    }
    let mut counts = vec![0u64; depth as usize];
    let mut beyond = 0;
    for z in seq.zeros() {
        let j = annulus_index(&z.position);
        if j <= depth {
            counts[(j - 1) as usize] += z.multiplicity as u64;
        } else {
            beyond += z.multiplicity as u64;
        }
    }
    Ok(OccupancyProfile { counts, beyond })
}

/// Largest annulus occupancy over the examined depth.
pub fn exponential_constant(profile: &OccupancyProfile) -> u64 {
    profile.counts.iter().copied().max().unwrap_or(0)
}

/// `inf_k Π_{n ≠ k} ρ(z_k, z_n)` over the materialised zeros.
pub fn separation_delta<T: Real>(seq: &ZeroSequence<T>) -> T {
    let zeros = seq.zeros();
    if zeros.iter().any(|z| z.multiplicity > 1) {
        return T::zero();
    }
    let points: Vec<_> = zeros.iter().map(|z| z.position.value()).collect();
    // products of many factors near 1 are formed as sums of logarithms
    let logs: Vec<T> = (0..points.len())
        .into_par_iter()
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (n, &w) in points.iter().enumerate() {
                if n != k {
                    acc.add(pseudo_distance_raw(points[k], w).ln());
                }
            }
            acc.value()
        })
        .collect();
    let min = logs.into_iter().fold(T::zero(), |m, v| if v < m { v } else { m });
    min.exp()
}

/// The default dyadic family: at level `i = 0..=depth` the `2^i` boxes over the
/// arcs `[2π k 2^{-i}, 2π (k + 1) 2^{-i}]`.
pub fn dyadic_boxes<T: Real>(depth: u32, convention: LengthConvention) -> Vec<CarlesonBox<T>> {
    let mut out = Vec::new();
    for i in 0..=depth.min(24) {
        let n = 1u64 << i;
        let len = T::TAU() / T::from_u64(n).unwrap();
        for k in 0..n {
            let center = len * (T::from_u64(k).unwrap() + T::lit(0.5));
            out.push(CarlesonBox::with_convention(Arc::new(center, len).expect("valid arc"), convention));
        }
    }
    out
}

fn box_mass<T: Real>(seq: &ZeroSequence<T>, q: &CarlesonBox<T>) -> T {
    let mut acc = CompensatedSum::new();
    for z in seq.zeros() {
        if q.contains(&z.position) {
            acc.add(T::from_u32(z.multiplicity).unwrap() * z.position.depth());
        }
    }
    acc.value()
}

/// `sup_Q Σ_{z_k ∈ Q} m_k (1 - |z_k|) / l(Q)` over the given boxes.
pub fn carleson_ratio<T: Real>(seq: &ZeroSequence<T>, boxes: &[CarlesonBox<T>]) -> Result<T> {
    if boxes.is_empty() {
        return Err(Error::InvalidParameter("box family must not be empty".into()));
    }
    let ratios: Vec<T> = boxes.par_iter().map(|q| box_mass(seq, q) / q.side()).collect();
    Ok(ratios.into_iter().fold(T::zero(), |m, v| if v > m { v } else { m }))
}

/// [`carleson_ratio`] over the default dyadic family, binning zeros per level.
pub fn dyadic_carleson_sup<T: Real>(seq: &ZeroSequence<T>, depth: u32, convention: LengthConvention) -> T {
    let levels: Vec<T> = (0..=depth.min(40))
        .into_par_iter()
        .map(|i| {
            let len = T::TAU() * crate::scalar::pow2_neg::<T>(i as i32);
            let side = convention.measure(len);
            let mut bins: std::collections::BTreeMap<u64, CompensatedSum<T>> = Default::default();
            for z in seq.zeros() {
                let d = z.position.depth();
                if d > side {
                    continue;
                }
                let theta = wrap_tau(z.position.angle());
                let k = (theta / len).floor().to_u64().unwrap_or(0);
                bins.entry(k)
                    .or_insert_with(CompensatedSum::new)
                    .add(T::from_u32(z.multiplicity).unwrap() * d);
            }
            bins.values().map(|s| s.value() / side).fold(T::zero(), |m, v| if v > m { v } else { m })
        })
        .collect();
    levels.into_iter().fold(T::zero(), |m, v| if v > m { v } else { m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Finite,
    Exponential(u64),
    NonExponential,
}

impl VerdictKind {
    pub fn label(&self) -> &'static str {
        match self {
            VerdictKind::Finite => "finite",
            VerdictKind::Exponential(_) => "exponential",
            VerdictKind::NonExponential => "non_exponential",
        }
    }
}

/// Finite-depth evidence about a zero sequence; never a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationVerdict<T: Real> {
    pub kind: VerdictKind,
    pub max_count: u64,
    pub delta: T,
    pub carleson_sup: T,
    pub depth: u32,
    pub profile: OccupancyProfile,
}

impl<T: Real> Serialize for ClassificationVerdict<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        map.serialize_entry("kind", self.kind.label())?;
        map.serialize_entry("M", &self.max_count)?;
        map.serialize_entry("delta", &self.delta.as_f64())?;
        map.serialize_entry("carleson_sup", &self.carleson_sup.as_f64())?;
        map.serialize_entry("depth", &self.depth)?;
        map.end()
    }
}

/// Which boxes enter the Carleson evidence of [`classify`].
#[derive(Debug, Clone, Default)]
pub enum BoxFamily<T: Real> {
    #[default]
    Dyadic,
    DyadicWith(LengthConvention),
    Explicit(Vec<CarlesonBox<T>>),
}

/// Number of trailing annuli that must be occupied for a bounded verdict.
const TRAILING: usize = 3;

pub fn classify<T: Real>(seq: &ZeroSequence<T>, depth: u32, family: &BoxFamily<T>) -> Result<ClassificationVerdict<T>> {
    let profile = annuli_counts(seq, depth)?;
    let max_count = exponential_constant(&profile);
    let carleson_sup = match family {
        BoxFamily::Dyadic => dyadic_carleson_sup(seq, depth, LengthConvention::Radians),
        BoxFamily::DyadicWith(c) => dyadic_carleson_sup(seq, depth, *c),
        BoxFamily::Explicit(boxes) => carleson_ratio(seq, boxes)?,
    };
    let delta = separation_delta(seq);
    let kind = if !seq.is_infinite() {
        VerdictKind::Finite
    } else {
        let c = &profile.counts;
        if c.len() < TRAILING {
            return Err(Error::InconclusiveDepth { depth: depth as usize });
        }
        let tail = &c[c.len() - TRAILING..];
        let head_max = c[..c.len() / 2].iter().copied().max().unwrap_or(0);
        if tail.windows(2).all(|w| w[1] > w[0]) && tail[TRAILING - 1] > head_max {
            VerdictKind::NonExponential
        } else if tail.iter().all(|&n| n > 0 && n <= max_count) {
            VerdictKind::Exponential(max_count)
        } else {
            return Err(Error::InconclusiveDepth { depth: depth as usize });
        }
    };
    Ok(ClassificationVerdict { kind, max_count, delta, carleson_sup, depth, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blaschke::{gen_exponential, gen_growing_density, gen_stacked_carleson, Placement, Zero};
    use crate::geometry::DiscPoint;
    use num_complex::Complex;

    #[test]
    fn occupancy_examples() {
        let p = annuli_counts(&gen_exponential::<f64>(2, 5, Placement::Radial, 0), 5).unwrap();
        assert_eq!(p.counts, vec![2; 5]);
        assert_eq!(annuli_counts(&ZeroSequence::<f64>::empty(), 4).unwrap().counts, vec![0; 4]);
        let g = annuli_counts(&gen_growing_density::<f64>(1.0, 6), 6).unwrap();
        assert_eq!(g.counts, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(exponential_constant(&g), 6);
        let g10 = annuli_counts(&gen_growing_density::<f64>(1.0, 10), 10).unwrap();
        assert_eq!(exponential_constant(&g10), 10);
        assert!(annuli_counts(&ZeroSequence::<f64>::empty(), 0).is_err());
        let short = annuli_counts(&gen_growing_density::<f64>(1.0, 6), 3).unwrap();
        assert_eq!(short.beyond, 4 + 5 + 6);
        assert_eq!(short.total(), 21);
    }

    #[test]
    fn separation_examples() {
        let seq = ZeroSequence::<f64>::from_points(&[Complex::new(0.5, 0.0), Complex::new(-0.5, 0.0)]).unwrap();
        assert!((separation_delta(&seq) - 0.8).abs() < 1e-15);
        let one = ZeroSequence::from_points(&[Complex::new(0.3, 0.1)]).unwrap();
        assert_eq!(separation_delta(&one), 1.0);
        let double = ZeroSequence::finite(vec![
            Zero::new(DiscPoint::from_parts(0.1, 0.2).unwrap(), 2).unwrap(),
            Zero::simple(DiscPoint::from_parts(-0.4, 0.0).unwrap()),
        ]);
        assert_eq!(separation_delta(&double), 0.0);
    }

    #[test]
    fn carleson_examples() {
        for (k, j) in [(10, 4), (100, 8), (1000, 8)] {
            let seq = gen_stacked_carleson::<f64>(k, j);
            let arc = Arc::new(0.0, 2f64.powi(-(j as i32))).unwrap();
            let r = carleson_ratio(&seq, &[CarlesonBox::new(arc)]).unwrap();
            assert!((r - k as f64).abs() < 1e-9 * k as f64, "{r}");
        }
        let empty = CarlesonBox::new(Arc::new(3.0, 0.1).unwrap());
        let seq = gen_stacked_carleson::<f64>(5, 4);
        assert_eq!(carleson_ratio(&seq, &[empty]).unwrap(), 0.0);
        let z0 = DiscPoint::from_polar(0.9, 1.0).unwrap();
        let single = ZeroSequence::<f64>::finite(vec![Zero::simple(z0)]);
        let q = CarlesonBox::new(Arc::new(1.0, z0.depth()).unwrap());
        assert!((carleson_ratio(&single, &[q]).unwrap() - 1.0).abs() < 1e-14);
        assert!(carleson_ratio(&single, &[]).is_err());
    }

    #[test]
    fn dyadic_binning_matches_brute_force() {
        let seq = gen_exponential::<f64>(3, 10, Placement::Jittered, 5);
        for conv in [LengthConvention::Radians, LengthConvention::Normalized] {
            let fast = dyadic_carleson_sup(&seq, 10, conv);
            let slow = carleson_ratio(&seq, &dyadic_boxes(10, conv)).unwrap();
            assert!((fast - slow).abs() < 1e-12 * slow.max(1.0), "{fast} {slow}");
        }
    }

    #[test]
    fn classification_examples() {
        let e = classify(&gen_exponential::<f64>(1, 30, Placement::Radial, 0), 30, &BoxFamily::Dyadic).unwrap();
        assert_eq!(e.kind, VerdictKind::Exponential(1));
        let g = classify(&gen_growing_density::<f64>(1.0, 30), 30, &BoxFamily::Dyadic).unwrap();
        assert_eq!(g.kind, VerdictKind::NonExponential);
        let pts: Vec<_> = (0..5).map(|i| Complex::from_polar(0.5, i as f64)).collect();
        let f = classify(&ZeroSequence::from_points(&pts).unwrap(), 10, &BoxFamily::Dyadic).unwrap();
        assert_eq!(f.kind, VerdictKind::Finite);
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["kind"], "exponential");
        assert_eq!(json["M"], 1);
        assert_eq!(json["depth"], 30);
        assert!(matches!(
            classify(&gen_exponential::<f64>(1, 2, Placement::Radial, 0), 2, &BoxFamily::Dyadic),
            Err(Error::InconclusiveDepth { depth: 2 })
        ));
    }

    #[test]
    fn jittered_keeps_constant() {
        for seed in 0..5 {
            let v = classify(&gen_exponential::<f64>(4, 16, Placement::Jittered, seed), 16, &BoxFamily::Dyadic).unwrap();
            assert_eq!(v.kind, VerdictKind::Exponential(4));
        }
    }
}
