//! Geometry of the unit disc: pseudo-hyperbolic distance, dyadic annuli, and the
//! regions used by the measure engine (Stolz angles, Carleson boxes,
//! pseudo-hyperbolic discs, and the sectors `T(I)`).
//!
//! Boundary ties follow each defining inequality literally: annuli are
//! half-open in `1 - |z|`, pseudo-hyperbolic discs are open, and Stolz angles,
//! Carleson boxes and sectors are closed.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{pow2_neg, Real};

/// A point of the open unit disc. Construction never clamps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscPoint<T: Real> {
    z: Complex<T>,
}

impl<T: Real> DiscPoint<T> {
    pub fn new(z: Complex<T>) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm_sqr() >= T::one() {
            return Err(Error::OutsideDisc { re: z.re.as_f64(), im: z.im.as_f64() });
        }
        Ok(Self { z })
    }

    pub fn from_parts(re: T, im: T) -> Result<Self> {
        Self::new(Complex::new(re, im))
    }

    pub fn from_polar(radius: T, angle: T) -> Result<Self> {
        if radius < T::zero() {
            return Err(Error::InvalidParameter("negative radius".into()));
        }
        Self::new(Complex::from_polar(radius, angle))
    }

    pub fn origin() -> Self {
        Self { z: Complex::new(T::zero(), T::zero()) }
    }

    #[inline]
    pub fn value(&self) -> Complex<T> {
        self.z
    }

    #[inline]
    pub fn modulus(&self) -> T {
        self.z.norm()
    }

    /// Distance to the boundary, `1 - |z|`.
    #[inline]
    pub fn depth(&self) -> T {
        T::one() - self.modulus()
    }

    #[inline]
    pub fn angle(&self) -> T {
        self.z.im.atan2(self.z.re)
    }
}

/// How the length of a boundary arc is measured when it is compared with
/// `1 - |z|` or used as a normalising length `l(Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LengthConvention {
    /// Arclength in radians.
    #[default]
    Radians,
    /// Arclength divided by `2π` (the circle has length one).
    Normalized,
}

impl LengthConvention {
    pub fn measure<T: Real>(self, radians: T) -> T {
        match self {
            Self::Radians => radians,
            Self::Normalized => radians / T::TAU(),
        }
    }
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_pi<T: Real>(angle: T) -> T {
    let tau = T::TAU();
    let mut a = angle % tau;
    if a > T::PI() {
        a = a - tau;
    } else if a <= -T::PI() {
        a = a + tau;
    }
    a
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_tau<T: Real>(angle: T) -> T {
    let tau = T::TAU();
    let a = angle % tau;
    let a = if a < T::zero() { a + tau } else { a };
    if a >= tau {
        T::zero()
    } else {
        a
    }
}

/// Closed arc of the unit circle, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc<T: Real> {
    center: T,
    length: T,
}

impl<T: Real> Arc<T> {
    pub fn new(center_angle: T, length: T) -> Result<Self> {
        if !(length > T::zero() && length <= T::TAU()) {
            return Err(Error::InvalidParameter(format!(
                "arc length must lie in (0, 2π], got {length}"
            )));
        }
        Ok(Self { center: wrap_tau(center_angle), length })
    }

    pub fn center(&self) -> T {
        self.center
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn contains_angle(&self, angle: T) -> bool {
        if self.length >= T::TAU() {
            return true;
        }
        wrap_pi(angle - self.center).abs() <= self.length / T::lit(2.0)
    }

    /// Relation of the angular interval `[lo, lo + width]` to this arc.
    fn relate_interval(&self, lo: T, width: T) -> RectRelation {
        if self.length >= T::TAU() {
            return RectRelation::Inside;
        }
        let start = self.center - self.length / T::lit(2.0);
        let offset = wrap_tau(lo - start);
        if offset + width <= self.length {
            RectRelation::Inside
        } else if offset >= self.length && offset + width <= T::TAU() {
            RectRelation::Outside
        } else {
            RectRelation::Unknown
        }
    }
}

/// Dyadic annulus `𝒜_j = {2^{-j} < 1 - |z| <= 2^{-j+1}}`, `j >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Annulus {
    index: u32,
}

impl Annulus {
    pub fn new(index: u32) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidParameter("annulus index starts at 1".into()));
        }
        Ok(Self { index })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Bounds `(2^{-j}, 2^{-j+1}]` of `1 - |z|`.
    pub fn depth_bounds<T: Real>(&self) -> (T, T) {
        let j = self.index as i32;
        (pow2_neg(j), pow2_neg(j - 1))
    }

    pub fn contains_depth<T: Real>(&self, depth: T) -> bool {
        let (lo, hi) = self.depth_bounds::<T>();
        lo < depth && depth <= hi
    }
}

/// Index `j` of the dyadic annulus containing `z`.
pub fn annulus_index<T: Real>(z: &DiscPoint<T>) -> u32 {
    depth_annulus_index(z.depth())
}

/// Annulus index for a given `1 - |z|` in `(0, 1]`.
pub fn depth_annulus_index<T: Real>(depth: T) -> u32 {
    debug_assert!(depth > T::zero() && depth <= T::one());
    let guess = (-depth.log2()).floor().to_i64().unwrap_or(0).max(0) + 1;
    let mut j = guess.clamp(1, 4000) as i32;
    // settle on exact powers of two
    while j > 1 && depth > pow2_neg::<T>(j - 1) {
        j -= 1;
    }
    while depth <= pow2_neg::<T>(j) {
        j += 1;
    }
    j as u32
}

/// Stolz angle `Γ_α(e^{iθ}) = {z : |z - e^{iθ}| <= α(1 - |z|)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StolzAngle<T: Real> {
    vertex_angle: T,
    aperture: T,
}

impl<T: Real> StolzAngle<T> {
    pub const DEFAULT_APERTURE: f64 = 2.0;

    pub fn new(vertex_angle: T, aperture: T) -> Result<Self> {
        if !(aperture > T::one()) || !aperture.is_finite() {
            return Err(Error::InvalidParameter(format!("Stolz aperture must exceed 1, got {aperture}")));
        }
        Ok(Self { vertex_angle, aperture })
    }

    pub fn vertex_angle(&self) -> T {
        self.vertex_angle
    }

    pub fn aperture(&self) -> T {
        self.aperture
    }

    pub fn vertex(&self) -> Complex<T> {
        Complex::from_polar(T::one(), self.vertex_angle)
    }

    pub fn contains(&self, z: &DiscPoint<T>) -> bool {
        (z.value() - self.vertex()).norm() <= self.aperture * z.depth()
    }

    /// Half-width of the angular cross-section at `1 - |z| = depth`, or `None`
    /// when that circle misses the angle.
    pub fn half_width_at_depth(&self, depth: T) -> Option<T> {
        let r = T::one() - depth;
        if r <= T::zero() {
            return Some(T::PI());
        }
        // |r e^{iφ} - 1|^2 <= α² t²  <=>  cos φ >= (r² + 1 - α² t²) / (2r)
        let c = (r * r + T::one() - self.aperture * self.aperture * depth * depth) / (T::lit(2.0) * r);
        if c > T::one() {
            None
        } else if c <= -T::one() {
            Some(T::PI())
        } else {
            Some(c.acos())
        }
    }
}

/// Open pseudo-hyperbolic disc `Δ(ζ, m) = {z : |z - ζ| < m |1 - z̄ζ|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoDisc<T: Real> {
    center: DiscPoint<T>,
    radius: T,
}

impl<T: Real> PseudoDisc<T> {
    pub fn new(center: DiscPoint<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero() && radius < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "pseudo-hyperbolic radius must lie in (0,1), got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn center(&self) -> DiscPoint<T> {
        self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn contains(&self, z: &DiscPoint<T>) -> bool {
        let zeta = self.center.value();
        let w = z.value();
        (w - zeta).norm() < self.radius * (Complex::new(T::one(), T::zero()) - w.conj() * zeta).norm()
    }

    /// The pseudo-hyperbolic disc is a Euclidean disc; returns its centre and radius.
    pub fn euclidean(&self) -> (Complex<T>, T) {
        let zeta = self.center.value();
        let s = zeta.norm_sqr();
        let m2 = self.radius * self.radius;
        let denom = T::one() - m2 * s;
        (zeta * ((T::one() - m2) / denom), self.radius * (T::one() - s) / denom)
    }

    /// Image of `w`, `|w| < m`, under the automorphism sending 0 to the centre.
    pub fn transport(&self, w: Complex<T>) -> Complex<T> {
        let zeta = self.center.value();
        (zeta + w) / (Complex::new(T::one(), T::zero()) + zeta.conj() * w)
    }
}

/// Carleson box `{z : z/|z| ∈ I, 1 - |z| <= l(I)}` with `l` measured in the
/// chosen convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonBox<T: Real> {
    arc: Arc<T>,
    convention: LengthConvention,
}

impl<T: Real> CarlesonBox<T> {
    pub fn new(arc: Arc<T>) -> Self {
        Self { arc, convention: LengthConvention::Radians }
    }

    pub fn with_convention(arc: Arc<T>, convention: LengthConvention) -> Self {
        Self { arc, convention }
    }

    pub fn arc(&self) -> Arc<T> {
        self.arc
    }

    /// `l(Q)` in the box's convention.
    pub fn side(&self) -> T {
        self.convention.measure(self.arc.length())
    }

    pub fn contains(&self, z: &DiscPoint<T>) -> bool {
        self.contains_polar(z.depth(), z.angle())
    }

    pub fn contains_polar(&self, depth: T, angle: T) -> bool {
        depth <= self.side() && self.arc.contains_angle(angle)
    }

    /// The point `z(Q)` with `|z(Q)| = 1 - l(Q)` over the centre of the arc.
    pub fn top_point(&self) -> Result<DiscPoint<T>> {
        DiscPoint::from_polar(T::one() - self.side(), self.arc.center())
    }
}

/// Sectorial domain `T(I) = {z : z/|z| ∈ I, 1 - |z| <= |I| / (2√(α² - 1))}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorT<T: Real> {
    arc: Arc<T>,
    aperture: T,
}

impl<T: Real> SectorT<T> {
    pub fn new(arc: Arc<T>, aperture: T) -> Result<Self> {
        if !(aperture > T::one()) {
            return Err(Error::InvalidParameter(format!("aperture must exceed 1, got {aperture}")));
        }
        Ok(Self { arc, aperture })
    }

    pub fn height(&self) -> T {
        self.arc.length() / (T::lit(2.0) * (self.aperture * self.aperture - T::one()).sqrt())
    }

    pub fn contains_polar(&self, depth: T, angle: T) -> bool {
        depth <= self.height() && self.arc.contains_angle(angle)
    }

    pub fn contains(&self, z: &DiscPoint<T>) -> bool {
        self.contains_polar(z.depth(), z.angle())
    }
}

/// Polar rectangle `{1 - |z| ∈ [t_lo, t_hi], arg z ∈ [θ_lo, θ_lo + width]}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRect<T: Real> {
    pub t_lo: T,
    pub t_hi: T,
    pub theta_lo: T,
    pub width: T,
}

impl<T: Real> PolarRect<T> {
    /// Smallest and largest Euclidean distance from `c` to the rectangle.
    pub fn distance_range(&self, c: Complex<T>) -> (T, T) {
        let (r_lo, r_hi) = (T::one() - self.t_hi, T::one() - self.t_lo);
        let (cr, cphi) = (c.norm(), c.im.atan2(c.re));
        let dist = |r: T, phi: T| (Complex::from_polar(r, phi) - c).norm();
        let in_range = |phi: T| wrap_tau(phi - self.theta_lo) <= self.width;
        let edges = [self.theta_lo, self.theta_lo + self.width];
        let mut near = T::infinity();
        let mut far = T::zero();
        for &phi in &edges {
            for r in [r_lo, r_hi] {
                let d = dist(r, phi);
                near = near.min(d);
                far = far.max(d);
            }
            let foot = (cr * (phi - cphi).cos()).max(r_lo).min(r_hi);
            near = near.min(dist(foot, phi));
        }
        if in_range(cphi) {
            near = near.min((cr.max(r_lo).min(r_hi) - cr).abs());
        }
        if in_range(cphi + T::PI()) {
            far = far.max(r_hi + cr);
        }
        (near, far)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RectRelation {
    Inside,
    Outside,
    Unknown,
}

/// Subsets of the disc the measure engine can integrate over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region<T: Real> {
    FullDisc,
    Annulus(Annulus),
    Stolz(StolzAngle<T>),
    PseudoDisc(PseudoDisc<T>),
    CarlesonBox(CarlesonBox<T>),
    SectorT(SectorT<T>),
}

impl<T: Real> Region<T> {
    pub fn contains(&self, z: &DiscPoint<T>) -> bool {
        match self {
            Region::FullDisc => true,
            Region::Annulus(a) => a.contains_depth(z.depth()),
            Region::Stolz(s) => s.contains(z),
            Region::PseudoDisc(d) => d.contains(z),
            Region::CarlesonBox(b) => b.contains(z),
            Region::SectorT(s) => s.contains(z),
        }
    }

    /// Membership from polar coordinates, keeping `1 - |z|` exact.
    pub fn contains_polar(&self, depth: T, angle: T) -> bool {
        match self {
            Region::FullDisc => true,
            Region::Annulus(a) => a.contains_depth(depth),
            Region::CarlesonBox(b) => b.contains_polar(depth, angle),
            Region::SectorT(s) => s.contains_polar(depth, angle),
            Region::Stolz(_) | Region::PseudoDisc(_) => match DiscPoint::from_polar(T::one() - depth, angle) {
                Ok(p) => self.contains(&p),
                Err(_) => false,
            },
        }
    }

    /// Relation of a polar rectangle to the region; `Unknown` whenever the
    /// answer is not certain.
    pub fn relate(&self, rect: &PolarRect<T>) -> RectRelation {
        let radial = |lo: T, hi: T| {
            if rect.t_lo >= lo && rect.t_hi <= hi {
                RectRelation::Inside
            } else if rect.t_hi <= lo || rect.t_lo >= hi {
                RectRelation::Outside
            } else {
                RectRelation::Unknown
            }
        };
        let combine = |a: RectRelation, b: RectRelation| match (a, b) {
            (RectRelation::Outside, _) | (_, RectRelation::Outside) => RectRelation::Outside,
            (RectRelation::Inside, RectRelation::Inside) => RectRelation::Inside,
            _ => RectRelation::Unknown,
        };
        match self {
            Region::FullDisc => RectRelation::Inside,
            Region::Annulus(a) => {
                let (lo, hi) = a.depth_bounds::<T>();
                radial(lo, hi)
            }
            Region::CarlesonBox(b) => combine(
                radial(-T::one(), b.side()),
                b.arc().relate_interval(rect.theta_lo, rect.width),
            ),
            Region::SectorT(s) => combine(
                radial(-T::one(), s.height()),
                s.arc.relate_interval(rect.theta_lo, rect.width),
            ),
            Region::PseudoDisc(d) => {
                let (c, rad) = d.euclidean();
                let (near, far) = rect.distance_range(c);
                if far < rad {
                    RectRelation::Inside
                } else if near >= rad {
                    RectRelation::Outside
                } else {
                    RectRelation::Unknown
                }
            }
            Region::Stolz(s) => {
                let (near, far) = rect.distance_range(s.vertex());
                if far < s.aperture() * rect.t_lo {
                    RectRelation::Inside
                } else if near >= s.aperture() * rect.t_hi {
                    RectRelation::Outside
                } else {
                    RectRelation::Unknown
                }
            }
        }
    }

    /// Closed-form `μ_p(region)` where the region is a polar rectangle.
    pub fn mu_p_closed_form(&self, p: T) -> Result<Option<T>> {
        check_p(p)?;
        let two_pi = T::TAU();
        Ok(match self {
            Region::FullDisc => Some(two_pi * radial_mass(T::zero(), T::one(), p)),
            Region::Annulus(a) => {
                let (lo, hi) = a.depth_bounds::<T>();
                Some(two_pi * radial_mass(lo, hi.min(T::one()), p))
            }
            Region::CarlesonBox(b) => {
                Some(b.arc().length() * radial_mass(T::zero(), b.side().min(T::one()), p))
            }
            Region::SectorT(s) => Some(s.arc.length() * radial_mass(T::zero(), s.height().min(T::one()), p)),
            Region::Stolz(_) | Region::PseudoDisc(_) => None,
        })
    }
}

pub(crate) fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("weight exponent p must exceed 1, got {p}")));
    }
    Ok(())
}

/// `∫_{t_lo}^{t_hi} t^{p-2} (1 - t) dt`, the radial factor of the `μ_p` mass of
/// the band `1 - |z| ∈ [t_lo, t_hi]` (per unit angle).
pub fn radial_mass<T: Real>(t_lo: T, t_hi: T, p: T) -> T {
    if t_hi <= t_lo {
        return T::zero();
    }
    let antideriv = |t: T| {
        if t <= T::zero() {
            T::zero()
        } else {
            t.powf(p - T::one()) / (p - T::one()) - t.powf(p) / p
        }
    };
    antideriv(t_hi) - antideriv(t_lo)
}

/// `μ_p(𝔻) = 2π / (p (p - 1))` or the mass of an annulus, in closed form.
pub fn mu_p_closed_form<T: Real>(region: &Region<T>, p: T) -> Result<T> {
    match region {
        Region::FullDisc | Region::Annulus(_) => Ok(region.mu_p_closed_form(p)?.expect("polar region")),
        _ => Err(Error::InvalidParameter("closed form available for the full disc and annuli".into())),
    }
}

/// Pseudo-hyperbolic distance `|a - b| / |1 - ā b|`.
pub fn pseudo_distance<T: Real>(a: &DiscPoint<T>, b: &DiscPoint<T>) -> T {
    pseudo_distance_raw(a.value(), b.value())
}

#[inline]
pub(crate) fn pseudo_distance_raw<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let num = (a - b).norm();
    if num == T::zero() {
        return T::zero();
    }
    num / (Complex::new(T::one(), T::zero()) - a.conj() * b).norm()
}

/// Disc automorphism `φ_c(z) = (c - z) / (1 - c̄ z)`.
pub fn mobius<T: Real>(c: Complex<T>, z: Complex<T>) -> Complex<T> {
    (c - z) / (Complex::new(T::one(), T::zero()) - c.conj() * z)
}
