//! Function-space membership diagnostics and convergence verdicts.

use num_complex::Complex;
use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeTuple};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::functions::DiscFunction;
use crate::geometry::{
    check_p, Annulus, Arc, CarlesonBox, DiscPoint, PseudoDisc, Region, StolzAngle,
};
use crate::measure::{CellField, MeasureEstimate, PolarGrid};
use crate::scalar::{pow2_neg, Real};
use crate::sum::CompensatedSum;

/// Relative change below which a trace is declared settled.
pub const SETTLE_TOLERANCE: f64 = 0.02;
/// Per-step growth that, sustained three times, signals divergence.
pub const GROWTH_FACTOR: f64 = 0.25;
/// Smallest ratio of consecutive increments that still counts as sustained growth.
pub const SUSTAINED_RATIO: f64 = 0.75;

/// Levels are kept below the field's resolution limit divided by this factor,
/// so that every examined level set spans several cells.
pub const RESOLUTION_MARGIN: f64 = 4.0;

fn usable_range<T: Real>(field: &CellField<T>, lambdas: &LambdaGrid<T>) -> (LambdaGrid<T>, bool) {
    lambdas.capped(field.resolution_limit() / T::lit(RESOLUTION_MARGIN))
}

/// Logarithmically spaced levels `λ_min·10^{i/k}` up to `λ_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaGrid<T: Real> {
    pub min: T,
    pub max: T,
    pub per_decade: u32,
}

impl<T: Real> Default for LambdaGrid<T> {
    fn default() -> Self {
        Self { min: T::lit(0.1), max: T::lit(1e6), per_decade: 16 }
    }
}

impl<T: Real> LambdaGrid<T> {
    pub fn new(min: T, max: T, per_decade: u32) -> Result<Self> {
        if !(min > T::zero() && max > min && max.is_finite()) || per_decade == 0 {
            return Err(Error::InvalidParameter(format!(
                "level grid needs 0 < λ_min < λ_max and a positive density, got [{min}, {max}] at {per_decade}/decade"
            )));
        }
        Ok(Self { min, max, per_decade })
    }

    pub fn points(&self) -> Vec<T> {
        let steps = ((self.max / self.min).log10() * T::from_u32(self.per_decade).unwrap() - T::lit(1e-9)).ceil();
        let n = steps.to_usize().unwrap_or(0);
        let step = T::lit(10.0).powf(T::one() / T::from_u32(self.per_decade).unwrap());
        let mut out: Vec<T> = (0..n).map(|i| self.min * step.powi(i as i32)).collect();
        out.push(self.max);
        out
    }

    /// Same lattice with `λ_max` multiplied by `factor`.
    pub fn extended(&self, factor: T) -> Self {
        Self { max: self.max * factor, ..*self }
    }

    /// Restriction to `λ <= cap`, when the cap lies inside the range.
    pub fn capped(&self, cap: T) -> (Self, bool) {
        if cap < self.max && cap > self.min {
            (Self { max: cap, ..*self }, true)
        } else {
            (*self, false)
        }
    }
}

/// Outcome of a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Diverging,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Finite => "finite",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Verdict of a trace of estimates, with `pinned[i]` telling whether step `i`
/// attained its sup at the edge of its range.
///
/// Diverging: three consecutive relative growths of at least
/// [`GROWTH_FACTOR`], or the last three steps pinned with positive increments,
/// each at least [`SUSTAINED_RATIO`] times the previous one. Finite: the last
/// two steps moved the value by at most [`SETTLE_TOLERANCE`] relative.
pub fn classify_trace(values: &[f64], pinned: &[bool]) -> Verdict {
    let n = values.len();
    if n >= 4 {
        let tail = &values[n - 4..];
        let growth = tail.windows(2).all(|w| w[0] > 0.0 && w[1] >= (1.0 + GROWTH_FACTOR) * w[0]);
        let inc: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        let sustained = inc.iter().all(|&d| d > 0.0)
            && inc.windows(2).all(|w| w[1] >= SUSTAINED_RATIO * w[0])
            && pinned.len() >= 3
            && pinned[pinned.len() - 3..].iter().all(|&p| p);
        if growth || sustained {
            return Verdict::Diverging;
        }
    }
    if n >= 3 {
        let (a, b) = (values[n - 3], values[n - 1]);
        let scale = a.abs().max(b.abs());
        if scale == 0.0 || (b - a).abs() <= SETTLE_TOLERANCE * scale {
            return Verdict::Finite;
        }
    }
    Verdict::Inconclusive
}

/// Sup of `λ·m(λ)^q` over a level range, for the three brackets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSup<T: Real> {
    pub upper: T,
    pub center: T,
    pub lower: T,
    pub lambda_star: T,
    /// The upper sup sits at the top of the examined range.
    pub pinned: bool,
    /// Largest level examined.
    pub lambda_max: T,
}

impl<T: Real> LevelSup<T> {
    /// Turns a sup at the top of the range into [`Error::RangeTooNarrow`].
    pub fn checked(self) -> Result<Self> {
        if self.pinned {
            Err(Error::RangeTooNarrow { lambda_max: self.lambda_max.as_f64() })
        } else {
            Ok(self)
        }
    }
}

fn is_pinned<T: Real>(lambda_star: T, lambda_max: T) -> bool {
    lambda_star >= lambda_max * T::lit(1.0 - 1e-12)
}

/// `sup_λ λ·μ_p({|f| > λ})^{1/p}` over `[λ_min, λ_max]` on one cell field,
/// with `λ_max` cut back below the field's resolution limit.
pub fn weak_quasinorm_on<T: Real>(field: &CellField<T>, p: T, lambdas: &LambdaGrid<T>) -> Result<LevelSup<T>> {
    let (range, capped) = usable_range(field, lambdas);
    let dist = field.distribution(p)?;
    let [lower, center, upper] = dist.sup_scaled(range.min, range.max, T::one() / p);
    Ok(LevelSup {
        upper: upper.0,
        center: center.0,
        lower: lower.0,
        lambda_star: upper.1,
        pinned: (capped || upper.0 > T::zero()) && is_pinned(upper.1, range.max),
        lambda_max: range.max,
    })
}

/// `sup_λ λ·Area({|f| > λ(1 - |z|)})` over the level grid on one cell field.
pub fn tilde_l1w_on<T: Real>(field: &CellField<T>, lambdas: &LambdaGrid<T>) -> Result<LevelSup<T>> {
    let (range, _) = usable_range(field, lambdas);
    let points = range.points();
    let rows = field.weighted_area_profile(&points)?;
    let best = |key: fn(&MeasureEstimate<T>) -> T| {
        points.iter().zip(&rows).fold((T::zero(), points[0]), |acc, (&l, m)| {
            let v = l * key(m);
            if v > acc.0 {
                (v, l)
            } else {
                acc
            }
        })
    };
    let upper = best(|m| m.upper);
    Ok(LevelSup {
        upper: upper.0,
        center: best(|m| m.value).0,
        lower: best(|m| m.lower).0,
        lambda_star: upper.1,
        pinned: upper.0 > T::zero() && is_pinned(upper.1, range.max),
        lambda_max: range.max,
    })
}

/// Refinement schedule shared by the norm estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSchedule<T: Real> {
    pub grid: PolarGrid<T>,
    pub lambdas: LambdaGrid<T>,
    /// Number of grids examined; each one refines the previous and extends `λ_max`.
    pub steps: usize,
    pub lambda_extension: T,
    /// Layers added per step; the density always doubles.
    pub depth_stride: u32,
}

impl<T: Real> NormSchedule<T> {
    pub fn new(grid: PolarGrid<T>) -> Self {
        Self { grid, lambdas: LambdaGrid::default(), steps: 4, lambda_extension: T::lit(100.0), depth_stride: 1 }
    }

    pub fn with_lambdas(mut self, lambdas: LambdaGrid<T>) -> Self {
        self.lambdas = lambdas;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_extension(mut self, factor: T) -> Self {
        self.lambda_extension = factor;
        self
    }

    pub fn with_depth_stride(mut self, stride: u32) -> Self {
        self.depth_stride = stride.max(1);
        self
    }

    /// Grid and level range of step `s`.
    pub fn step(&self, s: usize) -> Result<(PolarGrid<T>, LambdaGrid<T>)> {
        let grid = self.grid.refined(s)?.deepened((self.depth_stride - 1) * s as u32)?;
        Ok((grid, self.lambdas.extended(self.lambda_extension.powi(s as i32))))
    }
}

/// A norm value with its refinement history.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate<T: Real> {
    /// Sup computed from the upper brackets on the finest grid.
    pub value: T,
    pub value_center: T,
    pub value_lower: T,
    pub lambda_star: T,
    pub verdict: Verdict,
    /// `(grid depth, value)` for every step.
    pub trace: Vec<(u32, T)>,
    pub pinned: Vec<bool>,
    pub saturated: bool,
}

impl<T: Real> NormEstimate<T> {
    pub fn from_steps(steps: Vec<(u32, LevelSup<T>)>, saturated: bool) -> Self {
        let (_, last) = *steps.last().expect("at least one step");
        let values: Vec<f64> = steps.iter().map(|(_, s)| s.upper.as_f64()).collect();
        let pinned: Vec<bool> = steps.iter().map(|(_, s)| s.pinned).collect();
        Self {
            value: last.upper,
            value_center: last.center,
            value_lower: last.lower,
            lambda_star: last.lambda_star,
            verdict: classify_trace(&values, &pinned),
            trace: steps.iter().map(|(d, s)| (*d, s.upper)).collect(),
            pinned,
            saturated,
        }
    }

    pub fn range_pinned(&self) -> bool {
        self.pinned.last().copied().unwrap_or(false)
    }
}

impl<T: Real> Serialize for NormEstimate<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Pair(u32, f64);
        impl Serialize for Pair {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                let mut t = serializer.serialize_tuple(2)?;
                t.serialize_element(&self.0)?;
                t.serialize_element(&self.1)?;
                t.end()
            }
        }
        let mut map = serializer.serialize_map(Some(8))?;
        map.serialize_entry("value", &self.value.as_f64())?;
        map.serialize_entry("lambda_star", &self.lambda_star.as_f64())?;
        map.serialize_entry("verdict", self.verdict.label())?;
        let trace: Vec<Pair> = self.trace.iter().map(|&(d, v)| Pair(d, v.as_f64())).collect();
        map.serialize_entry("trace", &trace)?;
        map.serialize_entry("value_center", &self.value_center.as_f64())?;
        map.serialize_entry("value_lower", &self.value_lower.as_f64())?;
        map.serialize_entry("pinned", &self.pinned)?;
        map.serialize_entry("saturated", &self.saturated)?;
        map.end()
    }
}

fn run_schedule<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    schedule: &NormSchedule<T>,
    sup: impl Fn(&CellField<T>, &LambdaGrid<T>) -> Result<LevelSup<T>>,
) -> Result<(NormEstimate<T>, CellField<T>, LambdaGrid<T>)> {
    if schedule.steps == 0 {
        return Err(Error::InvalidParameter("a norm schedule needs at least one step".into()));
    }
    let mut steps = Vec::with_capacity(schedule.steps);
    let mut saturated = false;
    let mut last = None;
    for s in 0..schedule.steps {
        let (grid, lambdas) = schedule.step(s)?;
        let field = CellField::build(f, &grid)?;
        saturated |= field.saturated();
        steps.push((grid.depth(), sup(&field, &lambdas)?));
        last = Some((field, lambdas));
    }
    let (field, lambdas) = last.expect("at least one step");
    Ok((NormEstimate::from_steps(steps, saturated), field, lambdas))
}

/// Weak quasi-norm `sup_λ λ·μ_p({|f| > λ})^{1/p}` with its refinement verdict.
pub fn weak_quasinorm_mu_p<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    p: T,
    schedule: &NormSchedule<T>,
) -> Result<NormEstimate<T>> {
    Ok(weak_quasinorm_with_profile(f, p, schedule)?.0)
}

/// [`weak_quasinorm_mu_p`] together with the CSV profile on the finest grid.
pub fn weak_quasinorm_with_profile<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    p: T,
    schedule: &NormSchedule<T>,
) -> Result<(NormEstimate<T>, String)> {
    check_p(p)?;
    let (estimate, field, lambdas) = run_schedule(f, schedule, |field, lambdas| weak_quasinorm_on(field, p, lambdas))?;
    Ok((estimate, weak_profile_csv(&field, p, &lambdas)?))
}

/// `sup_λ λ·Area({|f(z)| > λ(1 - |z|)})` with its refinement verdict.
pub fn tilde_l1w_norm<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, schedule: &NormSchedule<T>) -> Result<NormEstimate<T>> {
    Ok(tilde_l1w_with_profile(f, schedule)?.0)
}

/// [`tilde_l1w_norm`] together with the CSV profile on the finest grid.
pub fn tilde_l1w_with_profile<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    schedule: &NormSchedule<T>,
) -> Result<(NormEstimate<T>, String)> {
    let (estimate, field, lambdas) = run_schedule(f, schedule, tilde_l1w_on)?;
    Ok((estimate, tilde_profile_csv(&field, &lambdas)?))
}

fn check_radius<T: Real>(p: T, r: T) -> Result<()> {
    if !(p > T::zero()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent must be positive and finite, got {p}")));
    }
    if !(r >= T::zero() && r < T::one()) {
        return Err(Error::InvalidParameter(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

fn circle_modulus<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, r: T, angles: &[T]) -> Result<Vec<T>> {
    let t = T::one() - r;
    angles.par_iter().map(|&a| f.modulus_polar(t, a)).collect()
}

/// Largest number of trapezoid nodes tried by [`hp_integral_mean`].
pub const MEAN_POINT_CAP: usize = 1 << 22;

/// `(1/2π)∫|f(re^{iθ})|^p dθ` by the periodic trapezoid rule, doubling the
/// node count until successive values agree to relative `1e-8`.
pub fn hp_integral_mean<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, r: T) -> Result<T> {
    check_radius(p, r)?;
    let tol = T::lit(1e-8);
    let mut n = 64usize;
    let angles = |n: usize, odd: bool| -> Vec<T> {
        let h = T::TAU() / T::from_usize_lossy(n);
        if odd {
            (0..n / 2).map(|i| h * T::from_usize_lossy(2 * i + 1)).collect()
        } else {
            (0..n).map(|i| h * T::from_usize_lossy(i)).collect()
        }
    };
    let powered = |v: Vec<T>| v.into_iter().map(|x| x.powf(p));
    let mut acc = CompensatedSum::new();
    for v in powered(circle_modulus(f, r, &angles(n, false))?) {
        acc.add(v);
    }
    let mut mean = acc.value() / T::from_usize_lossy(n);
    loop {
        n *= 2;
        if n > MEAN_POINT_CAP {
            return Err(Error::QuadratureStall { points: n / 2, change: f64::NAN });
        }
        for v in powered(circle_modulus(f, r, &angles(n, true))?) {
            acc.add(v);
        }
        let next = acc.value() / T::from_usize_lossy(n);
        let change = (next - mean).abs();
        let scale = next.abs().max(mean.abs());
        if change <= tol * scale || scale == T::zero() {
            return Ok(next);
        }
        if n * 2 > MEAN_POINT_CAP {
            return Err(Error::QuadratureStall { points: n, change: (change / scale).as_f64() });
        }
        mean = next;
    }
}

/// Largest number of arcs in the adaptive circle partition.
pub const ARC_BUDGET: usize = 1 << 21;

#[derive(Debug, Clone, Copy)]
struct CircleArc<T: Real> {
    lo: T,
    width: T,
    f_min: T,
    f_center: T,
    f_max: T,
}

/// Adaptive partition of the circle of radius `r` into arcs on which `|f|`
/// varies by at most relative `tol`.
fn circle_partition<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, r: T, tol: T) -> Result<Vec<CircleArc<T>>> {
    let t = T::one() - r;
    let floor = T::lit(1e-3);
    let sample = |lo: T, width: T| -> Result<CircleArc<T>> {
        let q = T::lit(0.25);
        let vals = [
            f.modulus_polar(t, lo + q * width)?,
            f.modulus_polar(t, lo + T::lit(0.5) * width)?,
            f.modulus_polar(t, lo + (T::one() - q) * width)?,
            f.modulus_polar(t, lo)?,
            f.modulus_polar(t, lo + width)?,
        ];
        let lo_v = vals.iter().fold(T::infinity(), |m, &v| m.min(v));
        let hi_v = vals.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        Ok(CircleArc { lo, width, f_min: lo_v, f_center: vals[1], f_max: hi_v })
    };
    let start = 256usize;
    let w0 = T::TAU() / T::from_usize_lossy(start);
    let mut pending: Vec<CircleArc<T>> = (0..start)
        .into_par_iter()
        .map(|i| sample(-T::PI() + w0 * T::from_usize_lossy(i), w0))
        .collect::<Result<_>>()?;
    let mut done = Vec::new();
    while !pending.is_empty() {
        let mut split = Vec::new();
        for a in pending {
            let flat = a.f_max - a.f_min <= tol * a.f_max.max(floor);
            if !flat && done.len() + 2 * (split.len() + 1) <= ARC_BUDGET && a.width > T::epsilon() {
                split.push(a);
            } else {
                done.push(a);
            }
        }
        pending = split
            .par_iter()
            .flat_map_iter(|a| {
                let h = a.width / T::lit(2.0);
                [(a.lo, h), (a.lo + h, h)]
            })
            .map(|(lo, w)| sample(lo, w))
            .collect::<Result<_>>()?;
    }
    Ok(done)
}

/// `sup_λ λ·|{θ : |f(re^{iθ})| > λ}|^{1/p}` over `[λ_min, λ_max]`, with `|·|`
/// the arclength measure; returns the upper-bracket value.
pub fn hp_weak_norm<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, r: T, lambdas: &LambdaGrid<T>) -> Result<T> {
    Ok(hp_weak_sup(f, p, r, lambdas)?.upper)
}

/// [`hp_weak_norm`] with all three brackets.
pub fn hp_weak_sup<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, r: T, lambdas: &LambdaGrid<T>) -> Result<LevelSup<T>> {
    check_radius(p, r)?;
    let arcs = circle_partition(f, r, T::lit(0.01))?;
    let q = T::one() / p;
    let sup = |key: fn(&CircleArc<T>) -> T| -> (T, T) {
        let mut entries: Vec<(T, T)> = arcs.iter().map(|a| (key(a), a.width)).collect();
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut suffix = vec![T::zero(); entries.len() + 1];
        let mut acc = CompensatedSum::new();
        for i in (0..entries.len()).rev() {
            acc.add(entries[i].1);
            suffix[i] = acc.value();
        }
        let above = |l: T| suffix[entries.partition_point(|e| e.0 <= l)];
        let score = |l: T, m: T| if m > T::zero() { l * m.powf(q) } else { T::zero() };
        let mut best = (score(lambdas.min, above(lambdas.min)), lambdas.min);
        for (i, e) in entries.iter().enumerate() {
            if e.0 > lambdas.min && e.0 <= lambdas.max {
                let v = score(e.0, suffix[i]);
                if v > best.0 {
                    best = (v, e.0);
                }
            }
        }
        let top = score(lambdas.max, above(lambdas.max));
        if top > best.0 {
            best = (top, lambdas.max);
        }
        best
    };
    let upper = sup(|a| a.f_max);
    Ok(LevelSup {
        upper: upper.0,
        center: sup(|a| a.f_center).0,
        lower: sup(|a| a.f_min).0,
        lambda_star: upper.1,
        pinned: upper.0 > T::zero() && is_pinned(upper.1, lambdas.max),
        lambda_max: lambdas.max,
    })
}

/// Radii `r_k = 1 - 2^{-k}` examined by the Hardy-type diagnostics, grouped
/// into cumulative steps ending at each entry of `depths`.
fn hardy_estimate<T: Real>(
    depths: &[u32],
    per_radius: impl Fn(T) -> Result<T> + Sync,
) -> Result<NormEstimate<T>> {
    if depths.is_empty() {
        return Err(Error::InvalidParameter("at least one radius depth is required".into()));
    }
    let kmax = *depths.iter().max().unwrap();
    let values: Vec<T> = (0..=kmax)
        .map(|k| per_radius(T::one() - pow2_neg::<T>(k as i32)))
        .collect::<Result<_>>()?;
    let mut steps = Vec::new();
    for &end in depths {
        let (arg, best) = values[..=end as usize]
            .iter()
            .enumerate()
            .fold((0, T::zero()), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let sup = LevelSup {
            upper: best,
            center: best,
            lower: best,
            lambda_star: T::from_usize_lossy(arg),
            pinned: arg == end as usize && best > T::zero(),
            lambda_max: T::from_u32(end).unwrap(),
        };
        steps.push((end, sup));
    }
    Ok(NormEstimate::from_steps(steps, false))
}

/// `sup_k ‖f_{r_k}‖_{H^p}` with `r_k = 1 - 2^{-k}`; `lambda_star` holds the
/// maximising `k`.
pub fn hardy_norm_estimate<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, depths: &[u32]) -> Result<NormEstimate<T>> {
    hardy_estimate(depths, |r| Ok(hp_integral_mean(f, p, r)?.powf(T::one() / p)))
}

/// `sup_k ‖f_{r_k}‖_{L^p_w(∂𝔻)}` with `r_k = 1 - 2^{-k}`.
pub fn weak_hardy_estimate<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    p: T,
    depths: &[u32],
    lambdas: &LambdaGrid<T>,
) -> Result<NormEstimate<T>> {
    hardy_estimate(depths, |r| hp_weak_norm(f, p, r, lambdas))
}

/// Named region of a Kolmogorov family.
#[derive(Debug, Clone)]
pub struct NamedRegion<T: Real> {
    pub name: String,
    pub region: Region<T>,
}

/// The default test family: the disc, dyadic Carleson boxes of the first four
/// levels, the annuli `𝒜_1..𝒜_8`, and pseudo-hyperbolic discs of radii
/// `1/4, 1/2, 3/4` centred at `0, 0.5, 0.9, 0.99`.
pub fn default_family<T: Real>() -> Vec<NamedRegion<T>> {
    let mut out = vec![NamedRegion { name: "disc".into(), region: Region::FullDisc }];
    for i in 1..=4u32 {
        let n = 1u32 << i;
        let len = T::TAU() / T::from_u32(n).unwrap();
        for k in 0..n {
            let center = -T::PI() + len * (T::from_u32(k).unwrap() + T::lit(0.5));
            let arc = Arc::new(center, len).expect("valid arc");
            out.push(NamedRegion { name: format!("box:{i}:{k}"), region: Region::CarlesonBox(CarlesonBox::new(arc)) });
        }
    }
    for j in 1..=8 {
        out.push(NamedRegion { name: format!("annulus:{j}"), region: Region::Annulus(Annulus::new(j).expect("j >= 1")) });
    }
    for c in [0.0, 0.5, 0.9, 0.99] {
        for rho in [0.25, 0.5, 0.75] {
            let center = DiscPoint::from_parts(T::lit(c), T::zero()).expect("inside the disc");
            let region = Region::PseudoDisc(PseudoDisc::new(center, T::lit(rho)).expect("radius in (0,1)"));
            out.push(NamedRegion { name: format!("pseudo_disc:{c}:{rho}"), region });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KolmogorovEstimate<T: Real> {
    pub value: T,
    pub argmax: String,
    /// Regions skipped because their measured mass was zero.
    pub skipped: Vec<String>,
    pub depth: u32,
}

/// `sup_E (∫_E |f|^r dμ_p)^{1/r} / μ_p(E)^{1/r - 1/p}` over a region family.
pub fn kolmogorov_constant<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    p: T,
    r: T,
    family: &[NamedRegion<T>],
    grid: &PolarGrid<T>,
) -> Result<KolmogorovEstimate<T>> {
    check_p(p)?;
    if !(r > T::zero() && r < p) {
        return Err(Error::InvalidParameter(format!("need 0 < r < p, got r = {r}, p = {p}")));
    }
    let field = CellField::build(f, grid)?;
    let mut best = (T::zero(), String::new());
    let mut skipped = Vec::new();
    for e in family {
        let mass = match e.region.mu_p_closed_form(p)? {
            Some(m) => m,
            None => field.region_mass(&e.region, p)?.value,
        };
        if !(mass > T::zero()) {
            skipped.push(e.name.clone());
            continue;
        }
        let integral = field.integrate_over(&e.region, r, p)?.value;
        let ratio = integral.powf(T::one() / r) / mass.powf(T::one() / r - T::one() / p);
        if ratio > best.0 || best.1.is_empty() {
            best = (ratio, e.name.clone());
        }
    }
    Ok(KolmogorovEstimate { value: best.0, argmax: best.1, skipped, depth: grid.depth() })
}

/// Angular samples per row of the non-tangential approach region.
pub const STOLZ_ROW_SAMPLES: usize = 16;

/// `max |f|` over rows `1 - |z| = 2^{-k}`, `k = 0..=depth`, of the Stolz angle
/// with vertex `e^{iθ}`; each row is sampled at fixed fractions of its
/// cross-section, so the value is non-decreasing in `depth`.
pub fn nontangential_max<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, theta: T, alpha: T, depth: u32) -> Result<T> {
    let stolz = StolzAngle::new(theta, alpha)?;
    let mut best = f.modulus_polar(T::one(), T::zero())?;
    for k in 0..=depth {
        let t = pow2_neg::<T>(k as i32);
        let Some(half) = stolz.half_width_at_depth(t) else { continue };
        let vals: Vec<T> = (0..STOLZ_ROW_SAMPLES)
            .into_par_iter()
            .map(|i| {
                let s = T::from_usize_lossy(2 * i + 1) / T::from_usize_lossy(2 * STOLZ_ROW_SAMPLES) * T::lit(2.0) - T::one();
                f.modulus_polar(t, theta + s * half)
            })
            .collect::<Result<_>>()?;
        best = vals.into_iter().fold(best, |m, v| m.max(v));
        if t < T::one() {
            best = best.max(f.modulus_polar(t, theta)?);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate<T: Real> {
    pub value: T,
    pub depth: u32,
}

/// `max (1 - |z|)^p |f(z)|` over the origin, the cell sample centres, and the
/// inner edge of every cell clamped at `1 - |z| = 2^{-depth}`.
pub fn growth_norm<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, grid: &PolarGrid<T>) -> Result<GrowthEstimate<T>> {
    growth_on(&CellField::build(f, grid)?, f, p)
}

/// [`growth_norm`] on a field already built for `f`.
pub fn growth_on<T: Real, F: DiscFunction<T> + ?Sized>(field: &CellField<T>, f: &F, p: T) -> Result<GrowthEstimate<T>> {
    if !(p >= T::zero()) {
        return Err(Error::InvalidParameter(format!("growth exponent must be non-negative, got {p}")));
    }
    let depth = field.grid().depth();
    let origin = f.eval(Complex::new(T::zero(), T::zero()))?.norm();
    let floor = pow2_neg::<T>(depth as i32);
    let edges: Vec<T> = field
        .cells()
        .par_iter()
        .map(|c| {
            let t = c.rect.t_lo.max(floor);
            let v = f.modulus_polar(t, c.rect.theta_lo + c.rect.width / T::lit(2.0))?;
            Ok(t.powf(p) * v)
        })
        .collect::<Result<_>>()?;
    let value = field
        .cells()
        .iter()
        .map(|c| c.sample_depth.powf(p) * c.f_center)
        .chain(edges)
        .fold(origin, |m, v| m.max(v));
    Ok(GrowthEstimate { value, depth })
}

/// [`growth_norm`] across the refinement schedule, with a verdict.
pub fn growth_estimate<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, p: T, schedule: &NormSchedule<T>) -> Result<NormEstimate<T>> {
    let mut steps = Vec::new();
    for s in 0..schedule.steps.max(1) {
        let (grid, _) = schedule.step(s)?;
        let g = growth_norm(f, p, &grid)?;
        let sup = LevelSup { upper: g.value, center: g.value, lower: g.value, lambda_star: T::zero(), pinned: false, lambda_max: T::zero() };
        steps.push((grid.depth(), sup));
    }
    Ok(NormEstimate::from_steps(steps, false))
}

/// CSV `lambda,value` of `λ·μ_p({|f| > λ})^{1/p}` (upper bracket) on a cell
/// field, over the resolved part of the level grid.
pub fn weak_profile_csv<T: Real>(field: &CellField<T>, p: T, lambdas: &LambdaGrid<T>) -> Result<String> {
    let (range, _) = usable_range(field, lambdas);
    let dist = field.distribution(p)?;
    let mut out = String::from("lambda,value\n");
    for l in range.points() {
        let m = dist.at(l).upper;
        out.push_str(&format!("{:e},{:e}\n", l.as_f64(), (l * m.powf(T::one() / p)).as_f64()));
    }
    Ok(out)
}

/// CSV `lambda,value` of `λ·Area({|f| > λ(1 - |z|)})` (upper bracket) on a cell
/// field, over the resolved part of the level grid.
pub fn tilde_profile_csv<T: Real>(field: &CellField<T>, lambdas: &LambdaGrid<T>) -> Result<String> {
    let (range, _) = usable_range(field, lambdas);
    let points = range.points();
    let rows = field.weighted_area_profile(&points)?;
    let mut out = String::from("lambda,value\n");
    for (l, m) in points.iter().zip(rows) {
        out.push_str(&format!("{:e},{:e}\n", l.as_f64(), (*l * m.upper).as_f64()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Constant, FromFn, Identity, PolePower};
    use std::f64::consts::PI;

    fn schedule(depth: u32, density: u32) -> NormSchedule<f64> {
        NormSchedule::new(PolarGrid::new(depth, density).unwrap())
    }

    #[test]
    fn lambda_grid_is_geometric_and_closed() {
        let g = LambdaGrid::new(0.1, 1e6, 16).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 7 * 16 + 1);
        assert_eq!(pts[0], 0.1);
        assert_eq!(*pts.last().unwrap(), 1e6);
        for w in pts.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(1.0 / 16.0)).abs() < 1e-9);
        }
        assert!(LambdaGrid::new(1.0, 1.0, 4).is_err());
        assert!(LambdaGrid::new(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn trace_verdicts() {
        assert_eq!(classify_trace(&[1.3, 1.005, 1.01, 1.0], &[false; 4]), Verdict::Finite);
        assert_eq!(classify_trace(&[0.0, 0.0, 0.0], &[false; 3]), Verdict::Finite);
        assert_eq!(classify_trace(&[1.0, 1.3, 1.7, 2.2], &[false; 4]), Verdict::Diverging);
        assert_eq!(classify_trace(&[10.0, 10.7, 11.4, 12.1], &[true; 4]), Verdict::Diverging);
        assert_eq!(classify_trace(&[10.0, 10.7, 11.4, 12.1], &[false; 4]), Verdict::Inconclusive);
        assert_eq!(classify_trace(&[10.0, 11.0, 11.5, 11.6], &[true; 4]), Verdict::Inconclusive);
        assert_eq!(classify_trace(&[1.0, 2.0], &[false; 2]), Verdict::Inconclusive);
    }

    #[test]
    fn constant_weak_norm_is_exact() {
        let e = weak_quasinorm_mu_p(&Constant::real(2.0), 2.0, &schedule(6, 2)).unwrap();
        assert!((e.value - 2.0 * PI.sqrt()).abs() < 1e-10);
        assert_eq!(e.value, e.value_lower);
        assert!(e.lambda_star <= 2.0 && e.lambda_star > 1.99);
        assert_eq!(e.verdict, Verdict::Finite);
    }

    #[test]
    fn zero_function_is_finite_zero() {
        let zero = Constant::real(0.0);
        let e = weak_quasinorm_mu_p(&zero, 2.0, &schedule(6, 2)).unwrap();
        assert_eq!((e.value, e.verdict), (0.0, Verdict::Finite));
        let e = tilde_l1w_norm(&zero, &schedule(6, 2)).unwrap();
        assert_eq!((e.value, e.verdict), (0.0, Verdict::Finite));
        assert_eq!(hp_weak_norm(&zero, 2.0, 0.5, &LambdaGrid::default()).unwrap(), 0.0);
    }

    #[test]
    fn constant_tilde_norm_approaches_two_pi() {
        let e = tilde_l1w_norm(&Constant::real(1.0), &schedule(8, 2)).unwrap();
        let lmax = e.lambda_star;
        let oracle = PI * (2.0 - 1.0 / lmax);
        assert!((e.value - oracle).abs() < 1e-6 * oracle, "{} vs {}", e.value, oracle);
        assert_eq!(e.verdict, Verdict::Finite);
    }

    #[test]
    fn pole_tail_weak_norm() {
        let s = schedule(15, 4).with_lambdas(LambdaGrid::new(1e2, 1e4, 16).unwrap()).with_extension(1.0).with_steps(3);
        let e = weak_quasinorm_mu_p(&PolePower::new(1.0), 2.0, &s).unwrap();
        let oracle = (PI / 2.0).sqrt();
        assert!((e.value - oracle).abs() < 0.1 * oracle, "{}", e.value);
        assert!(e.value_lower <= oracle * 1.01);
    }

    #[test]
    fn range_too_narrow_is_reported() {
        let field = CellField::build(&Identity, &PolarGrid::new(6, 2).unwrap()).unwrap();
        let sup = weak_quasinorm_on(&field, 2.0, &LambdaGrid::new(0.01, 0.1, 8).unwrap()).unwrap();
        assert!(matches!(sup.checked(), Err(Error::RangeTooNarrow { .. })));
        let sup = weak_quasinorm_on(&field, 2.0, &LambdaGrid::default()).unwrap();
        assert!(sup.checked().is_ok());
    }

    #[test]
    fn integral_means() {
        let c = Constant::real(3.0);
        assert!((hp_integral_mean(&c, 2.5, 0.9).unwrap() - 3f64.powf(2.5)).abs() < 1e-9);
        for r in [0.0f64, 0.3, 0.99] {
            assert!((hp_integral_mean(&Identity, 2.0, r).unwrap() - r * r).abs() < 1e-12);
        }
        assert!(hp_integral_mean(&Identity, 2.0, 1.0).is_err());
        assert!(hp_integral_mean(&Identity, 0.0, 0.5).is_err());
    }

    #[test]
    fn integral_mean_monotone_in_radius() {
        let f = PolePower::new(0.5);
        let mut prev = 0.0;
        for k in 0..10 {
            let m = hp_integral_mean(&f, 1.5, 1.0 - 0.5f64.powi(k)).unwrap();
            assert!(m >= prev * (1.0 - 1e-6));
            prev = m;
        }
    }

    #[test]
    fn weak_hardy_norms() {
        let g = LambdaGrid::default();
        let v = hp_weak_norm(&Constant::real(2.0), 2.0, 0.5, &g).unwrap();
        assert!((v - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-9);
        let v = hp_weak_norm(&PolePower::new(1.0), 1.0, 1.0 - 2f64.powi(-16), &g).unwrap();
        assert!(v > 0.2 && v < 20.0, "{v}");
    }

    #[test]
    fn kolmogorov_constant_for_constants() {
        let p = 2.0;
        let grid = PolarGrid::new(6, 2).unwrap();
        let k = kolmogorov_constant(&Constant::real(3.0), p, 1.0, &default_family(), &grid).unwrap();
        let oracle = 3.0 * (2.0 * PI / (p * (p - 1.0))).powf(1.0 / p);
        assert!((k.value - oracle).abs() < 1e-3 * oracle, "{} vs {}", k.value, oracle);
        assert_eq!(k.argmax, "disc");
        let k = kolmogorov_constant(&Constant::real(0.0), p, 1.0, &default_family(), &grid).unwrap();
        assert_eq!(k.value, 0.0);
        assert!(kolmogorov_constant(&Identity, p, 2.0, &default_family(), &grid).is_err());
    }

    #[test]
    fn nontangential_maxima() {
        assert_eq!(nontangential_max(&Constant::real(1.5), 0.3, 2.0, 10).unwrap(), 1.5);
        for d in [4, 8, 12] {
            let v = nontangential_max(&Identity, 1.0, 2.0, d).unwrap();
            let edge = 1.0 - 2f64.powi(-(d as i32));
            assert!(v <= 1.0 && (v - edge).abs() <= 2f64.powi(-(d as i32)));
        }
        let pole = PolePower::new(1.0);
        let a = nontangential_max(&pole, 0.0, 2.0, 8).unwrap();
        let b = nontangential_max(&pole, 0.0, 2.0, 12).unwrap();
        assert!(b > 10.0 * a && b >= 2f64.powi(12) * 0.99);
        assert!(nontangential_max(&pole, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn growth_norms() {
        let grid = PolarGrid::new(10, 2).unwrap();
        assert_eq!(growth_norm(&Constant::real(2.0), 1.0, &grid).unwrap().value, 2.0);
        let g = growth_norm(&PolePower::new(1.0), 1.0, &grid).unwrap().value;
        assert!(g <= 1.0 + 1e-12 && g > 0.9, "{g}");
        let g = growth_norm(&Identity, 0.0, &grid).unwrap().value;
        assert!(g > 1.0 - 2f64.powi(-8) && g < 1.0);
    }

    #[test]
    fn chebyshev_bound_for_bounded_function() {
        let f = FromFn::new("shifted", |z: Complex<f64>| z * z + Complex::new(0.5, 0.0));
        let s = schedule(10, 2).with_steps(1);
        let weak = weak_quasinorm_mu_p(&f, 2.0, &s).unwrap();
        let field = CellField::build(&f, &PolarGrid::new(10, 2).unwrap()).unwrap();
        let strong = field.integrate(2.0, 2.0).unwrap().upper.sqrt();
        assert!(weak.value_lower <= strong * 1.0001);
    }

    #[test]
    fn estimate_serializes_core_keys() {
        let e = weak_quasinorm_mu_p(&Constant::real(1.0), 2.0, &schedule(4, 1).with_steps(2)).unwrap();
        let v = serde_json::to_value(&e).unwrap();
        for key in ["value", "lambda_star", "verdict", "trace"] {
            assert!(v.get(key).is_some());
        }
        assert_eq!(v["trace"][0][0], 4);
    }
}
