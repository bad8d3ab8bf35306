//! Level-set measures and integrals on the disc over an adaptive polar cell tree.
//!
//! The disc is covered by Carleson boxes `{1 - |z| <= 2^{-l}, arg z ∈ I}` whose
//! angular width halves with every layer. A box is either kept whole, down to
//! the boundary, or split into its top Whitney cell and two child boxes. Top
//! cells are further split in both directions while the sampled modulus varies
//! by more than the grid tolerance. Every cell's `μ_p` mass is exact.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{DiscFunction, Hotspot};
use crate::geometry::{check_p, radial_mass, wrap_pi, Arc, PolarRect, RectRelation, Region, SectorT};
use crate::scalar::{pow2_neg, Real};
use crate::sum::CompensatedSum;

/// Refinement cap used when `BLASCHKE_MAX_DEPTH` is not set.
pub const DEFAULT_MAX_DEPTH: u32 = 40;

/// Environment variable overriding [`DEFAULT_MAX_DEPTH`].
pub const MAX_DEPTH_ENV: &str = "BLASCHKE_MAX_DEPTH";

pub fn max_depth_cap() -> u32 {
    std::env::var(MAX_DEPTH_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DEPTH)
}

/// Resolution parameters of the cell tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarGrid<T: Real> {
    depth: u32,
    density: u32,
    base_tolerance: T,
    modulus_floor: T,
    max_cells: usize,
    subdivision_cap: u32,
    depth_cap: u32,
}

impl<T: Real> PolarGrid<T> {
    pub const DEFAULT_TOLERANCE: f64 = 0.1;
    pub const DEFAULT_FLOOR: f64 = 1e-3;
    pub const DEFAULT_MAX_CELLS: usize = 4_000_000;
    pub const DEFAULT_SUBDIVISION_CAP: u32 = 16;

    /// Grid with boxes down to `1 - |z| = 2^{-depth}` and `8·density` root sectors.
    pub fn new(depth: u32, density: u32) -> Result<Self> {
        Self::with_cap(depth, density, max_depth_cap())
    }

    pub fn with_cap(depth: u32, density: u32, depth_cap: u32) -> Result<Self> {
        if density == 0 {
            return Err(Error::InvalidParameter("grid density must be at least 1".into()));
        }
        if depth > depth_cap {
            return Err(Error::DepthLimit { limit: depth_cap });
        }
        Ok(Self {
            depth,
            density,
            base_tolerance: T::lit(Self::DEFAULT_TOLERANCE),
            modulus_floor: T::lit(Self::DEFAULT_FLOOR),
            max_cells: Self::DEFAULT_MAX_CELLS,
            subdivision_cap: Self::DEFAULT_SUBDIVISION_CAP,
            depth_cap,
        })
    }

    /// Relative variation allowed across a cell at density 1.
    pub fn with_tolerance(mut self, base_tolerance: T) -> Self {
        self.base_tolerance = base_tolerance;
        self
    }

    /// Moduli below this value are compared in absolute rather than relative terms.
    pub fn with_floor(mut self, floor: T) -> Self {
        self.modulus_floor = floor;
        self
    }

    pub fn with_max_cells(mut self, max_cells: usize) -> Self {
        self.max_cells = max_cells;
        self
    }

    pub fn with_subdivision_cap(mut self, cap: u32) -> Self {
        self.subdivision_cap = cap;
        self
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn density(&self) -> u32 {
        self.density
    }

    pub fn max_cells(&self) -> usize {
        self.max_cells
    }

    pub fn flat_tolerance(&self) -> T {
        self.base_tolerance / T::from_u32(self.density).unwrap()
    }

    pub fn root_sectors(&self) -> u32 {
        8 * self.density
    }

    /// Doubles the density and adds one layer.
    pub fn refine(&self) -> Result<Self> {
        if self.depth + 1 > self.depth_cap {
            return Err(Error::DepthLimit { limit: self.depth_cap });
        }
        let density = self.density.checked_mul(2).ok_or(Error::DepthLimit { limit: self.depth_cap })?;
        Ok(Self { depth: self.depth + 1, density, ..*self })
    }

    /// Adds `layers` layers without changing the density.
    pub fn deepened(&self, layers: u32) -> Result<Self> {
        let depth = self.depth.checked_add(layers).filter(|&d| d <= self.depth_cap);
        let depth = depth.ok_or(Error::DepthLimit { limit: self.depth_cap })?;
        Ok(Self { depth, ..*self })
    }

    /// `self` refined `steps` times.
    pub fn refined(&self, steps: usize) -> Result<Self> {
        (0..steps).try_fold(*self, |g, _| g.refine())
    }

    fn is_flat(&self, samples: &[T]) -> bool {
        let (lo, hi) = min_max(samples);
        hi - lo <= self.flat_tolerance() * hi.max(self.modulus_floor)
    }
}

/// A leaf of the cell tree with its sampled modulus range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T: Real> {
    pub rect: PolarRect<T>,
    /// Depth `1 - |z|` of the centre sample.
    pub sample_depth: T,
    pub f_min: T,
    pub f_center: T,
    pub f_max: T,
    pub relation: RectRelation,
    /// Share of the cell's sample points inside the region.
    pub inside_fraction: T,
    /// Set on deepest-layer cells next to a hotspot, where `|f|` is not resolved.
    pub unresolved: bool,
}

impl<T: Real> Cell<T> {
    /// Exact `μ_p` mass.
    pub fn mass(&self, p: T) -> T {
        self.rect.width * radial_mass(self.rect.t_lo, self.rect.t_hi, p)
    }

    /// Exact area.
    pub fn area(&self) -> T {
        self.rect.width * area_band(self.rect.t_lo, self.rect.t_hi)
    }
}

/// `∫_{a}^{b} (1 - t) dt`.
#[inline]
fn area_band<T: Real>(a: T, b: T) -> T {
    if b <= a {
        return T::zero();
    }
    (b - a) * (T::one() - (a + b) / T::lit(2.0))
}

fn min_max<T: Real>(values: &[T]) -> (T, T) {
    values.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Inset sample points of a rectangle: its four quarter points and its centre
/// (last).
fn cell_points<T: Real>(rect: &PolarRect<T>) -> [(T, T); 5] {
    let q = T::lit(0.25);
    let dt = rect.t_hi - rect.t_lo;
    let (t1, t2) = (rect.t_lo + q * dt, rect.t_hi - q * dt);
    let (a1, a2) = (rect.theta_lo + q * rect.width, rect.theta_lo + (T::one() - q) * rect.width);
    let half = T::lit(0.5);
    [(t1, a1), (t1, a2), (t2, a1), (t2, a2), (rect.t_lo + half * dt, rect.theta_lo + half * rect.width)]
}

/// Evaluated cell tree for one function.
#[derive(Debug, Clone)]
pub struct CellField<T: Real> {
    cells: Vec<Cell<T>>,
    grid: PolarGrid<T>,
    saturated: bool,
}

#[derive(Debug, Clone, Copy)]
struct BoxNode<T: Real> {
    layer: u32,
    theta_lo: T,
    width: T,
}

impl<T: Real> BoxNode<T> {
    fn top(&self) -> T {
        pow2_neg::<T>(self.layer as i32)
    }

    fn rect(&self) -> PolarRect<T> {
        PolarRect { t_lo: T::zero(), t_hi: self.top(), theta_lo: self.theta_lo, width: self.width }
    }

    fn top_cell(&self) -> PolarRect<T> {
        let top = self.top();
        PolarRect { t_lo: top / T::lit(2.0), t_hi: top, theta_lo: self.theta_lo, width: self.width }
    }

    fn children(&self) -> [BoxNode<T>; 2] {
        let half = self.width / T::lit(2.0);
        [
            BoxNode { layer: self.layer + 1, theta_lo: self.theta_lo, width: half },
            BoxNode { layer: self.layer + 1, theta_lo: self.theta_lo + half, width: half },
        ]
    }

    /// Top-cell points followed by three rows reaching towards the boundary.
    fn sample_points(&self, depth: u32) -> Vec<(T, T)> {
        let mut pts: Vec<(T, T)> = cell_points(&self.top_cell()).to_vec();
        let top = self.top();
        let floor = pow2_neg::<T>(depth as i32 + 2);
        let near = top / T::lit(4.0);
        let rows = [near, (near * floor).sqrt(), floor];
        let q = T::lit(0.25);
        for t in rows {
            for a in [q, T::lit(0.5), T::one() - q] {
                pts.push((t.min(near), self.theta_lo + a * self.width));
            }
        }
        pts
    }

    fn near(&self, h: &Hotspot<T>) -> bool {
        if h.depth > T::lit(8.0) * self.top() {
            return false;
        }
        let half = self.width / T::lit(2.0);
        let offset = wrap_pi(h.angle - (self.theta_lo + half)).abs();
        offset - half <= self.width
    }
}

fn eval_points<T: Real, F: DiscFunction<T> + ?Sized>(f: &F, pts: &[(T, T)]) -> Result<Vec<T>> {
    pts.iter()
        .map(|&(t, a)| {
            let v = f.modulus_polar(t, a)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation(format!("{} is not finite at depth {t}, angle {a}", f.name())))
            }
        })
        .collect()
}

fn fraction_inside<T: Real>(region: &Region<T>, pts: &[(T, T)]) -> T {
    let inside = pts.iter().filter(|&&(t, a)| region.contains_polar(t, a)).count();
    T::from_usize_lossy(inside) / T::from_usize_lossy(pts.len())
}

struct Pending<T: Real> {
    rect: PolarRect<T>,
    samples: [T; 5],
    relation: RectRelation,
    level: u32,
}

impl<T: Real> CellField<T> {
    /// Samples `|f|` over the whole disc.
    pub fn build<F: DiscFunction<T> + ?Sized>(f: &F, grid: &PolarGrid<T>) -> Result<Self> {
        Self::build_in(f, grid, &Region::FullDisc)
    }

    /// Samples `|f|`, refining along the boundary of `region` and skipping
    /// cells outside it.
    pub fn build_in<F: DiscFunction<T> + ?Sized>(f: &F, grid: &PolarGrid<T>, region: &Region<T>) -> Result<Self> {
        let hotspots = f.hotspots();
        let roots = grid.root_sectors();
        let sector = T::TAU() / T::from_u32(roots).unwrap();
        let mut frontier: Vec<BoxNode<T>> = (0..roots)
            .map(|k| BoxNode { layer: 0, theta_lo: -T::PI() + sector * T::from_u32(k).unwrap(), width: sector })
            .collect();
        let mut cells = Vec::new();
        let mut pending: Vec<Pending<T>> = Vec::new();
        let mut saturated = false;

        while !frontier.is_empty() {
            let relations: Vec<RectRelation> = frontier.iter().map(|b| region.relate(&b.rect())).collect();
            let samples: Vec<Option<(Vec<(T, T)>, Vec<T>)>> = frontier
                .par_iter()
                .zip(relations.par_iter())
                .map(|(b, rel)| {
                    if *rel == RectRelation::Outside {
                        return Ok(None);
                    }
                    let pts = b.sample_points(grid.depth);
                    let vals = eval_points(f, &pts)?;
                    Ok(Some((pts, vals)))
                })
                .collect::<Result<_>>()?;

            let mut next = Vec::new();
            for ((node, rel), sampled) in frontier.iter().zip(relations).zip(samples) {
                let Some((pts, vals)) = sampled else {
                    cells.push(outside_cell(node.rect()));
                    continue;
                };
                let forced = rel == RectRelation::Unknown || hotspots.iter().any(|h| node.near(h));
                let wants_split = node.layer < grid.depth && (forced || !grid.is_flat(&vals));
                let budget = cells.len() + pending.len() + next.len() + frontier.len() + 2 <= grid.max_cells;
                if wants_split && budget {
                    let top = node.top_cell();
                    let top_rel = if rel == RectRelation::Inside { rel } else { region.relate(&top) };
                    pending.push(Pending {
                        rect: top,
                        samples: [vals[0], vals[1], vals[2], vals[3], vals[4]],
                        relation: top_rel,
                        level: 0,
                    });
                    next.extend(node.children());
                } else {
                    saturated |= wants_split;
                    let (lo, hi) = min_max(&vals);
                    let inside_fraction = match rel {
                        RectRelation::Inside => T::one(),
                        _ => fraction_inside(region, &pts),
                    };
                    cells.push(Cell {
                        rect: node.rect(),
                        sample_depth: pts[4].0,
                        f_min: lo,
                        f_center: vals[4],
                        f_max: hi,
                        relation: rel,
                        inside_fraction,
                        unresolved: node.layer == grid.depth && hotspots.iter().any(|h| node.near(h)),
                    });
                }
            }
            frontier = next;
        }

        while !pending.is_empty() {
            let mut splits = Vec::new();
            for item in pending {
                let wants_split = item.level < grid.subdivision_cap
                    && (item.relation == RectRelation::Unknown || !grid.is_flat(&item.samples));
                let budget = cells.len() + 4 * (splits.len() + 1) <= grid.max_cells;
                if wants_split && budget {
                    splits.push(item);
                } else {
                    saturated |= wants_split;
                    cells.push(leaf_cell(region, item));
                }
            }
            let children: Vec<(PolarRect<T>, RectRelation, u32)> = splits
                .iter()
                .flat_map(|item| {
                    split_cell(&item.rect, &item.samples, item.relation).into_iter().map(|r| {
                        let rel = if item.relation == RectRelation::Inside { item.relation } else { region.relate(&r) };
                        (r, rel, item.level + 1)
                    })
                })
                .collect();
            pending = children
                .into_par_iter()
                .map(|(rect, relation, level)| {
                    let samples = if relation == RectRelation::Outside {
                        [T::zero(); 5]
                    } else {
                        let v = eval_points(f, &cell_points(&rect))?;
                        [v[0], v[1], v[2], v[3], v[4]]
                    };
                    Ok(Pending { rect, samples, relation, level })
                })
                .collect::<Result<Vec<_>>>()?;
            // outside children need no further work
            let (outside, rest): (Vec<_>, Vec<_>) =
                pending.into_iter().partition(|p| p.relation == RectRelation::Outside);
            cells.extend(outside.into_iter().map(|p| outside_cell(p.rect)));
            pending = rest;
        }
        Ok(Self { cells, grid: *grid, saturated })
    }

    pub fn cells(&self) -> &[Cell<T>] {
        &self.cells
    }

    pub fn grid(&self) -> &PolarGrid<T> {
        &self.grid
    }

    /// True when the cell budget stopped a requested refinement.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    fn estimate(&self, lower: T, value: T, upper: T) -> MeasureEstimate<T> {
        MeasureEstimate { value, lower, upper, depth: self.grid.depth, density: self.grid.density }
    }

    /// Largest level at which `{|f| > λ}` is resolved: the smallest modulus
    /// sampled in an unresolved cell, or infinity.
    pub fn resolution_limit(&self) -> T {
        self.cells
            .iter()
            .filter(|c| c.unresolved)
            .fold(T::infinity(), |m, c| m.min(c.f_min))
    }

    /// Total `μ_p` mass of the cells, which tile the disc.
    pub fn total_mass(&self, p: T) -> Result<T> {
        check_p(p)?;
        let mut acc = CompensatedSum::new();
        for c in &self.cells {
            acc.add(c.mass(p));
        }
        Ok(acc.value())
    }

    /// `μ_p({|f| > λ})` over the region the field was built for.
    pub fn level_set(&self, lambda: T, p: T) -> Result<MeasureEstimate<T>> {
        check_p(p)?;
        check_lambda(lambda)?;
        let (mut lo, mut mid, mut hi) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for c in self.cells.iter().filter(|c| c.relation != RectRelation::Outside) {
            let m = c.mass(p);
            if c.f_min > lambda {
                lo.add(m);
            }
            if c.f_center > lambda {
                mid.add(m);
            }
            if c.f_max > lambda {
                hi.add(m);
            }
        }
        Ok(self.estimate(lo.value(), mid.value(), hi.value()))
    }

    /// Distribution function `λ ↦ μ_p({|f| > λ})`, answering queries in
    /// logarithmic time.
    pub fn distribution(&self, p: T) -> Result<Distribution<T>> {
        check_p(p)?;
        let live: Vec<&Cell<T>> = self.cells.iter().filter(|c| c.relation != RectRelation::Outside).collect();
        let masses: Vec<T> = live.iter().map(|c| c.mass(p)).collect();
        let column = |key: fn(&Cell<T>) -> T| SortedMass::new(live.iter().zip(&masses).map(|(c, &m)| (key(c), m)).collect());
        Ok(Distribution {
            lower: column(|c| c.f_min),
            value: column(|c| c.f_center),
            upper: column(|c| c.f_max),
            depth: self.grid.depth,
            density: self.grid.density,
        })
    }

    /// `Area({|f(z)| > λ (1 - |z|)})`, with the radial threshold resolved
    /// exactly inside every cell.
    pub fn weighted_area_level_set(&self, lambda: T) -> Result<MeasureEstimate<T>> {
        check_lambda(lambda)?;
        let (mut lo, mut mid, mut hi) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for c in self.cells.iter().filter(|c| c.relation != RectRelation::Outside) {
            let r = &c.rect;
            if c.f_max / lambda <= r.t_lo {
                continue;
            }
            let part = |f: T| r.width * area_band(r.t_lo, r.t_hi.min(f / lambda));
            lo.add(part(c.f_min));
            mid.add(part(c.f_center));
            hi.add(part(c.f_max));
        }
        Ok(self.estimate(lo.value(), mid.value(), hi.value()))
    }

    /// [`Self::weighted_area_level_set`] at many levels; cells entirely below
    /// the threshold come from sorted suffix sums and only cells that can
    /// straddle it are visited.
    pub fn weighted_area_profile(&self, lambdas: &[T]) -> Result<Vec<MeasureEstimate<T>>> {
        for &l in lambdas {
            check_lambda(l)?;
        }
        let live: Vec<&Cell<T>> = self.cells.iter().filter(|c| c.relation != RectRelation::Outside).collect();
        let keys: [fn(&Cell<T>) -> T; 3] = [|c| c.f_min, |c| c.f_center, |c| c.f_max];
        let full: Vec<SortedMass<T>> = keys
            .iter()
            .map(|key| SortedMass::new(live.iter().map(|c| (key(c) / c.rect.t_hi, c.area())).collect()))
            .collect();
        let mut straddle: Vec<(T, &Cell<T>)> = live
            .iter()
            .map(|c| (if c.f_max > T::zero() { c.f_max / c.rect.t_lo } else { T::zero() }, *c))
            .collect();
        straddle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        lambdas
            .par_iter()
            .map(|&lambda| {
                let end = straddle.partition_point(|e| e.0 > lambda);
                let mut out = [T::zero(); 3];
                for (b, key) in keys.iter().enumerate() {
                    let mut acc = CompensatedSum::new();
                    acc.add(full[b].at_least(lambda));
                    for &(_, c) in &straddle[..end] {
                        let f = key(c);
                        let r = &c.rect;
                        if f / r.t_hi < lambda && f / lambda > r.t_lo {
                            acc.add(r.width * area_band(r.t_lo, f / lambda));
                        }
                    }
                    out[b] = acc.value();
                }
                Ok(self.estimate(out[0], out[1], out[2]))
            })
            .collect()
    }

    /// `∫_E |f|^r dμ_p` where `E` is the region the field was built for.
    pub fn integrate(&self, r: T, p: T) -> Result<MeasureEstimate<T>> {
        check_p(p)?;
        let (mut lo, mut mid, mut hi) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for c in &self.cells {
            let m = c.mass(p);
            let g = |v: T| if v == T::zero() { T::zero() } else { v.powf(r) };
            match c.relation {
                RectRelation::Outside => {}
                RectRelation::Inside => {
                    lo.add(m * g(c.f_min));
                    mid.add(m * g(c.f_center));
                    hi.add(m * g(c.f_max));
                }
                RectRelation::Unknown => {
                    mid.add(m * c.inside_fraction * g(c.f_center));
                    hi.add(m * g(c.f_max));
                }
            }
        }
        Ok(self.estimate(lo.value(), mid.value(), hi.value()))
    }

    /// `∫_E |f|^r dμ_p` for a region the field was not refined for; cells
    /// straddling `E` are split by their sample points.
    pub fn integrate_over(&self, region: &Region<T>, r: T, p: T) -> Result<MeasureEstimate<T>> {
        let relabelled = Self {
            cells: self
                .cells
                .iter()
                .map(|c| {
                    let relation = region.relate(&c.rect);
                    let inside_fraction = match relation {
                        RectRelation::Inside => T::one(),
                        RectRelation::Outside => T::zero(),
                        RectRelation::Unknown => fraction_inside(region, &cell_points(&c.rect)),
                    };
                    Cell { relation, inside_fraction, ..*c }
                })
                .collect(),
            grid: self.grid,
            saturated: self.saturated,
        };
        relabelled.integrate(r, p)
    }

    /// `μ_p(E)` bracket from the same relabelling as [`Self::integrate_over`].
    pub fn region_mass(&self, region: &Region<T>, p: T) -> Result<MeasureEstimate<T>> {
        check_p(p)?;
        let (mut lo, mut mid, mut hi) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
        for c in &self.cells {
            let m = c.mass(p);
            match region.relate(&c.rect) {
                RectRelation::Outside => {}
                RectRelation::Inside => {
                    lo.add(m);
                    mid.add(m);
                    hi.add(m);
                }
                RectRelation::Unknown => {
                    mid.add(m * fraction_inside(region, &cell_points(&c.rect)));
                    hi.add(m);
                }
            }
        }
        Ok(self.estimate(lo.value(), mid.value(), hi.value()))
    }
}

fn outside_cell<T: Real>(rect: PolarRect<T>) -> Cell<T> {
    Cell {
        rect,
        sample_depth: (rect.t_lo + rect.t_hi) / T::lit(2.0),
        f_min: T::zero(),
        f_center: T::zero(),
        f_max: T::zero(),
        relation: RectRelation::Outside,
        inside_fraction: T::zero(),
        unresolved: false,
    }
}

fn leaf_cell<T: Real>(region: &Region<T>, item: Pending<T>) -> Cell<T> {
    let (lo, hi) = min_max(&item.samples);
    let pts = cell_points(&item.rect);
    let inside_fraction = match item.relation {
        RectRelation::Inside => T::one(),
        RectRelation::Outside => T::zero(),
        RectRelation::Unknown => fraction_inside(region, &pts),
    };
    Cell {
        rect: item.rect,
        sample_depth: pts[4].0,
        f_min: lo,
        f_center: item.samples[4],
        f_max: hi,
        relation: item.relation,
        inside_fraction,
        unresolved: false,
    }
}

/// Splits a cell across the direction(s) in which its samples vary: radially,
/// angularly, or both.
fn split_cell<T: Real>(r: &PolarRect<T>, samples: &[T; 5], relation: RectRelation) -> Vec<PolarRect<T>> {
    // sample layout: (t1,a1), (t1,a2), (t2,a1), (t2,a2), centre
    let radial = (samples[0] - samples[2]).abs().max((samples[1] - samples[3]).abs());
    let angular = (samples[0] - samples[1]).abs().max((samples[2] - samples[3]).abs());
    let half = T::lit(0.5);
    let (cut_t, cut_a) = if relation == RectRelation::Unknown || (radial == T::zero() && angular == T::zero()) {
        (true, true)
    } else {
        (radial >= half * angular, angular >= half * radial)
    };
    let tm = (r.t_lo + r.t_hi) * half;
    let ts: Vec<(T, T)> = if cut_t { vec![(r.t_lo, tm), (tm, r.t_hi)] } else { vec![(r.t_lo, r.t_hi)] };
    let w = if cut_a { r.width * half } else { r.width };
    let thetas: Vec<T> = if cut_a { vec![r.theta_lo, r.theta_lo + w] } else { vec![r.theta_lo] };
    let mut out = Vec::with_capacity(4);
    for &(t_lo, t_hi) in &ts {
        for &theta_lo in &thetas {
            out.push(PolarRect { t_lo, t_hi, theta_lo, width: w });
        }
    }
    out
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("level λ must be positive and finite, got {lambda}")));
    }
    Ok(())
}

/// Measure estimate with a two-sided bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureEstimate<T: Real> {
    pub value: T,
    pub lower: T,
    pub upper: T,
    pub depth: u32,
    pub density: u32,
}

impl<T: Real> MeasureEstimate<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone)]
struct SortedMass<T: Real> {
    keys: Vec<T>,
    /// `suffix[i]` is the mass of entries `i..`.
    suffix: Vec<T>,
}

impl<T: Real> SortedMass<T> {
    fn new(mut entries: Vec<(T, T)>) -> Self {
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut suffix = vec![T::zero(); entries.len() + 1];
        let mut acc = CompensatedSum::new();
        for i in (0..entries.len()).rev() {
            acc.add(entries[i].1);
            suffix[i] = acc.value();
        }
        Self { keys: entries.into_iter().map(|e| e.0).collect(), suffix }
    }

    fn above(&self, lambda: T) -> T {
        self.suffix[self.keys.partition_point(|&k| k <= lambda)]
    }

    fn at_least(&self, lambda: T) -> T {
        self.suffix[self.keys.partition_point(|&k| k < lambda)]
    }

    /// `sup λ·D(λ)^q` over `λ ∈ [lo, hi]`, where `D` is this right-continuous
    /// distribution; besides the end points the sup can only be approached at
    /// a jump from the left.
    fn sup_scaled(&self, lo: T, hi: T, q: T) -> (T, T) {
        let score = |lambda: T, mass: T| if mass > T::zero() { lambda * mass.powf(q) } else { T::zero() };
        let mut best = (score(lo, self.above(lo)), lo);
        let start = self.keys.partition_point(|&k| k <= lo);
        let end = self.keys.partition_point(|&k| k <= hi);
        for i in start..end {
            let v = score(self.keys[i], self.suffix[i]);
            if v > best.0 {
                best = (v, self.keys[i]);
            }
        }
        let tail = score(hi, self.above(hi));
        if tail > best.0 {
            best = (tail, hi);
        }
        best
    }
}

/// Tabulated distribution function of `|f|` under `μ_p`.
#[derive(Debug, Clone)]
pub struct Distribution<T: Real> {
    lower: SortedMass<T>,
    value: SortedMass<T>,
    upper: SortedMass<T>,
    depth: u32,
    density: u32,
}

impl<T: Real> Distribution<T> {
    /// `sup_{λ ∈ [lo, hi]} λ·μ_p({|f| > λ})^q` for the lower, central and upper
    /// distributions, each with the level where it is attained.
    pub fn sup_scaled(&self, lo: T, hi: T, q: T) -> [(T, T); 3] {
        [self.lower.sup_scaled(lo, hi, q), self.value.sup_scaled(lo, hi, q), self.upper.sup_scaled(lo, hi, q)]
    }

    pub fn at(&self, lambda: T) -> MeasureEstimate<T> {
        MeasureEstimate {
            value: self.value.above(lambda),
            lower: self.lower.above(lambda),
            upper: self.upper.above(lambda),
            depth: self.depth,
            density: self.density,
        }
    }
}

/// `μ_p({z : |f(z)| > λ})`.
pub fn level_set_measure<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    lambda: T,
    p: T,
    grid: &PolarGrid<T>,
) -> Result<MeasureEstimate<T>> {
    CellField::build(f, grid)?.level_set(lambda, p)
}

/// `Area({z : |f(z)| > λ (1 - |z|)})`.
pub fn weighted_area_level_set<T: Real, F: DiscFunction<T> + ?Sized>(
    f: &F,
    lambda: T,
    grid: &PolarGrid<T>,
) -> Result<MeasureEstimate<T>> {
    CellField::build(f, grid)?.weighted_area_level_set(lambda)
}

/// Largest observed `μ_p(T(I)) / |I|^p` over arcs of length `2π 2^{-k}`,
/// `k = 0..=levels`, with the sector masses in closed form.
pub fn sector_constant<T: Real>(aperture: T, p: T, levels: u32) -> Result<T> {
    let mut best = T::zero();
    for k in 0..=levels {
        let length = T::TAU() * pow2_neg::<T>(k as i32);
        let sector = SectorT::new(Arc::new(T::zero(), length)?, aperture)?;
        let mass = Region::SectorT(sector).mu_p_closed_form(p)?.expect("sectors have a closed form");
        best = best.max(mass / length.powf(p));
    }
    Ok(best)
}

/// `∫_E |g| dμ_p`.
pub fn integrate_region<T: Real, F: DiscFunction<T> + ?Sized>(
    g: &F,
    region: &Region<T>,
    p: T,
    grid: &PolarGrid<T>,
) -> Result<MeasureEstimate<T>> {
    CellField::build_in(g, grid, region)?.integrate(T::one(), p)
}

/// Writes a distribution tabulation as CSV.
pub fn distribution_csv<T: Real>(rows: &[(T, MeasureEstimate<T>)]) -> String {
    let mut out = String::from("lambda,measure_lower,measure,measure_upper\n");
    for (lambda, m) in rows {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", lambda.as_f64(), m.lower.as_f64(), m.value.as_f64(), m.upper.as_f64()));
    }
    out
}
