//! Material constants, layer scaling laws, and the scaled load field.
//!
//! The rod layer is parametrised by a period `epsilon`; the rod radius and
//! the layer thickness follow the power laws `r = kappa0 * epsilon^eta0` and
//! `delta = kappa1 * epsilon^eta1`.  Only exponent pairs inside the triangle
//! `2 + 3*eta1 - 4*eta0 >= 0` are supported, and the two critical families on
//! its boundary are the ones that produce a spring-type interface in the
//! limit; everything else below critical produces perfect bonding.

use crate::error::Error;
use crate::lattice::{cell_frac2, cell_index2};
use crate::Result;
use std::sync::Arc;

/// Tolerance for exponent equality tests; exponents arrive from config
/// arithmetic such as `(4*eta0 - 2)/3` and carry rounding noise.
pub const EXPONENT_TOL: f64 = 1e-12;

/// Default admissible bound for the slenderness ratio `r/delta`.
pub const DEFAULT_ASPECT_BOUND: f64 = 2.0;

/// Isotropic material: Lamé pair with the derived engineering constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
}

impl MaterialParams {
    /// Build from the Lamé pair, validating positivity of `mu` and of the
    /// bulk combination `3*lambda + 2*mu`.
    pub fn from_lame(lambda: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidMaterial(format!(
                "shear modulus must be positive and finite, got mu = {mu}"
            )));
        }
        if !(3.0 * lambda + 2.0 * mu > 0.0) {
            return Err(Error::InvalidMaterial(format!(
                "3*lambda + 2*mu must be positive, got {}",
                3.0 * lambda + 2.0 * mu
            )));
        }
        Ok(Self { lambda, mu })
    }

    /// Build from Young's modulus and Poisson ratio (standard inversion).
    pub fn from_engineering(young: f64, poisson: f64) -> Result<Self> {
        if !(young > 0.0) || !young.is_finite() {
            return Err(Error::InvalidMaterial(format!(
                "Young's modulus must be positive, got {young}"
            )));
        }
        if !(-1.0 < poisson && poisson < 0.5) {
            return Err(Error::InvalidMaterial(format!(
                "Poisson ratio must lie in (-1, 1/2), got {poisson}"
            )));
        }
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mu = young / (2.0 * (1.0 + poisson));
        Self::from_lame(lambda, mu)
    }

    /// Young's modulus `E = mu (3 lambda + 2 mu) / (lambda + mu)`.
    pub fn young(&self) -> f64 {
        self.mu * (3.0 * self.lambda + 2.0 * self.mu) / (self.lambda + self.mu)
    }

    /// Poisson ratio `nu = lambda / (2 (lambda + mu))`.
    pub fn poisson(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }
}

/// Engineering constants from a Lamé pair.
pub fn engineering_constants(lambda: f64, mu: f64) -> Result<(f64, f64)> {
    let m = MaterialParams::from_lame(lambda, mu)?;
    Ok((m.young(), m.poisson()))
}

/// Scaling regime of the layer.
///
/// The two critical families sit on the line `4*eta0 - 3*eta1 - 2 = 0`; in
/// both the layer survives in the limit as an interface spring.  Anywhere
/// else inside the admissible triangle the layer is asymptotically rigid and
/// the limit interface is perfectly bonded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `eta0 = 1` (with `kappa0 < 1/2`) and `eta1 = 2/3`.
    CaseI,
    /// `1 < eta0 < 2` and `eta1 = (4*eta0 - 2)/3`.
    CaseII,
    /// Inside the triangle but off the critical line.
    Subcritical,
}

/// Period, prefactors, exponents, and the derived rod radius / layer
/// thickness.  Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerScaling {
    pub epsilon: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub eta0: f64,
    pub eta1: f64,
    /// Rod radius (half-width of the rod section), `kappa0 * epsilon^eta0`.
    pub r: f64,
    /// Layer thickness, `kappa1 * epsilon^eta1`.
    pub delta: f64,
    pub regime: Regime,
}

/// Classify the regime from exponents and prefactors alone.
pub fn classify_regime(kappa0: f64, eta0: f64, eta1: f64) -> Regime {
    let near = |a: f64, b: f64| (a - b).abs() <= EXPONENT_TOL;
    if near(eta0, 1.0) && near(eta1, 2.0 / 3.0) && kappa0 < 0.5 {
        Regime::CaseI
    } else if eta0 > 1.0 + EXPONENT_TOL
        && eta0 < 2.0 - EXPONENT_TOL
        && near(eta1, (4.0 * eta0 - 2.0) / 3.0)
    {
        Regime::CaseII
    } else {
        Regime::Subcritical
    }
}

/// Derive the layer geometry with the default slenderness bound.
pub fn derive_geometry(
    epsilon: f64,
    kappa0: f64,
    kappa1: f64,
    eta0: f64,
    eta1: f64,
) -> Result<LayerScaling> {
    derive_geometry_with_bound(epsilon, kappa0, kappa1, eta0, eta1, DEFAULT_ASPECT_BOUND)
}

/// Derive the layer geometry, checking `r/delta` against `aspect_bound`.
pub fn derive_geometry_with_bound(
    epsilon: f64,
    kappa0: f64,
    kappa1: f64,
    eta0: f64,
    eta1: f64,
    aspect_bound: f64,
) -> Result<LayerScaling> {
    if !(epsilon > 0.0 && kappa0 > 0.0 && kappa1 > 0.0) {
        return Err(Error::UnsupportedScaling(format!(
            "epsilon, kappa0, kappa1 must be positive (got {epsilon}, {kappa0}, {kappa1})"
        )));
    }
    if eta0 < 1.0 - EXPONENT_TOL {
        return Err(Error::UnsupportedScaling(format!(
            "eta0 must be >= 1, got {eta0}"
        )));
    }
    if (eta0 - 1.0).abs() <= EXPONENT_TOL && kappa0 >= 0.5 {
        return Err(Error::UnsupportedScaling(format!(
            "eta0 = 1 requires kappa0 < 1/2, got kappa0 = {kappa0}"
        )));
    }
    if eta1 > eta0 + EXPONENT_TOL {
        return Err(Error::UnsupportedScaling(format!(
            "eta1 must not exceed eta0 (got eta1 = {eta1}, eta0 = {eta0})"
        )));
    }
    if 2.0 + 3.0 * eta1 - 4.0 * eta0 < -EXPONENT_TOL {
        return Err(Error::UnsupportedScaling(format!(
            "exponents outside the admissible triangle: 2 + 3*eta1 - 4*eta0 = {}",
            2.0 + 3.0 * eta1 - 4.0 * eta0
        )));
    }
    let r = kappa0 * epsilon.powf(eta0);
    let delta = kappa1 * epsilon.powf(eta1);
    if r >= epsilon / 2.0 {
        return Err(Error::Penetration { r, epsilon });
    }
    if r / delta > aspect_bound {
        return Err(Error::UnsupportedScaling(format!(
            "r/delta = {} exceeds the configured bound {aspect_bound}",
            r / delta
        )));
    }
    Ok(LayerScaling {
        epsilon,
        kappa0,
        kappa1,
        eta0,
        eta1,
        r,
        delta,
        regime: classify_regime(kappa0, eta0, eta1),
    })
}

/// Axis-aligned rectangle, used for the in-plane domain `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect2 {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect2 {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x1 > x0 && y1 > y0, "degenerate rectangle");
        Self { x0, x1, y0, y1 }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }

    /// Whether the closed cell of side `eps` centred at `eps * xi` lies
    /// inside the rectangle.  A tolerance of `1e-12 * eps` absorbs float
    /// noise at exact fits.
    pub fn contains_cell(&self, xi: [i64; 2], eps: f64) -> bool {
        let tol = 1e-12 * eps;
        let cx = eps * xi[0] as f64;
        let cy = eps * xi[1] as f64;
        cx - eps / 2.0 >= self.x0 - tol
            && cx + eps / 2.0 <= self.x1 + tol
            && cy - eps / 2.0 >= self.y0 - tol
            && cy + eps / 2.0 <= self.y1 + tol
    }
}

type BeamLoadFn = dyn Fn([f64; 2], [f64; 3]) -> [f64; 3] + Send + Sync;
type BulkLoadFn = dyn Fn([f64; 3]) -> [f64; 3] + Send + Sync;

/// Applied force densities: `f_beam` lives on the reference rod
/// `B1 = D1 x (0,1)` and is indexed by the in-plane cell centre, `f_bulk`
/// lives on the physical blocks.
#[derive(Clone)]
pub struct LoadSpec {
    pub f_beam: Arc<BeamLoadFn>,
    pub f_bulk: Arc<BulkLoadFn>,
}

impl LoadSpec {
    pub fn new(
        f_beam: impl Fn([f64; 2], [f64; 3]) -> [f64; 3] + Send + Sync + 'static,
        f_bulk: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Self {
            f_beam: Arc::new(f_beam),
            f_bulk: Arc::new(f_bulk),
        }
    }

    /// Constant densities on rods and bulk.
    pub fn constant(beam: [f64; 3], bulk: [f64; 3]) -> Self {
        Self::new(move |_, _| beam, move |_| bulk)
    }
}

impl std::fmt::Debug for LoadSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LoadSpec {{ f_beam, f_bulk }}")
    }
}

/// Geometry of the three-dimensional structure: in-plane domain, block height
/// on each side, and the layer scaling.
#[derive(Debug, Clone, Copy)]
pub struct StructureGeometry {
    pub omega: Rect2,
    /// Blocks span `(-height, 0)` and `(delta, height)` in the axial
    /// direction.
    pub height: f64,
}

/// The amplitude applied to the rod load density, `epsilon^2 / (r^2 delta)`.
pub fn load_amplitude(s: &LayerScaling) -> f64 {
    s.epsilon * s.epsilon / (s.r * s.r * s.delta)
}

/// Evaluate the applied force density at a physical point of the
/// `epsilon`-geometry.
///
/// Inside a rod the density is the reference rod load, re-indexed to the cell
/// and amplified by `epsilon^2 / (r^2 delta)`; inside either block it is the
/// bulk density; anywhere else (the void between rods, or outside the
/// structure) the point is rejected.
pub fn scaled_load(
    load: &LoadSpec,
    s: &LayerScaling,
    geom: &StructureGeometry,
    x: [f64; 3],
) -> Result<[f64; 3]> {
    let xp = [x[0], x[1]];
    let x3 = x[2];
    let in_plane = geom.omega.contains(xp);
    if in_plane && (-geom.height < x3 && x3 < 0.0 || s.delta < x3 && x3 < geom.height) {
        return Ok((load.f_bulk)(x));
    }
    if 0.0 <= x3 && x3 <= s.delta {
        let xi = cell_index2([xp[0] / s.epsilon, xp[1] / s.epsilon]);
        let frac = cell_frac2([xp[0] / s.epsilon, xp[1] / s.epsilon]);
        let local = [s.epsilon / s.r * frac[0], s.epsilon / s.r * frac[1]];
        let inside_rod = local[0] * local[0] + local[1] * local[1] <= 1.0;
        if geom.omega.contains_cell(xi, s.epsilon) && inside_rod {
            let centre = [s.epsilon * xi[0] as f64, s.epsilon * xi[1] as f64];
            let amp = load_amplitude(s);
            let f = (load.f_beam)(centre, [local[0], local[1], x3 / s.delta]);
            return Ok([amp * f[0], amp * f[1], amp * f[2]]);
        }
        return Err(Error::Domain(format!(
            "({}, {}, {}) lies in the layer band but not inside a rod",
            x[0], x[1], x[2]
        )));
    }
    Err(Error::Domain(format!(
        "({}, {}, {}) lies outside the structure",
        x[0], x[1], x[2]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineering_constants_closed_forms() {
        let (e, nu) = engineering_constants(0.0, 1.0).unwrap();
        assert_eq!(e, 2.0);
        assert_eq!(nu, 0.0);
        let (e, nu) = engineering_constants(1.0, 1.0).unwrap();
        assert!((e - 2.5).abs() < 1e-15);
        assert!((nu - 0.25).abs() < 1e-15);
    }

    #[test]
    fn lame_inversion_matches_reference_values() {
        let m = MaterialParams::from_engineering(2e11, 0.3).unwrap();
        assert!((m.lambda - 1.1538461538461538e11).abs() / 1e11 < 1e-12);
        assert!((m.mu - 7.692307692307692e10).abs() / 1e10 < 1e-12);
        assert!((m.young() - 2e11).abs() / 2e11 < 1e-13);
        assert!((m.poisson() - 0.3).abs() < 1e-13);
    }

    #[test]
    fn invalid_materials_are_rejected() {
        assert!(MaterialParams::from_lame(0.0, 0.0).is_err());
        assert!(MaterialParams::from_lame(-1.0, 1.0).is_err());
        assert!(MaterialParams::from_engineering(1.0, 0.5).is_err());
        assert!(MaterialParams::from_engineering(-1.0, 0.2).is_err());
    }

    #[test]
    fn geometry_reference_case() {
        let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
        assert!((s.r - 0.0316227766).abs() < 1e-9);
        assert!((s.delta - 0.0464158883).abs() < 1e-9);
        assert_eq!(s.regime, Regime::CaseII);
    }

    #[test]
    fn geometry_first_critical_family() {
        let s = derive_geometry(0.1, 0.25, 1.0, 1.0, 2.0 / 3.0).unwrap();
        assert_eq!(s.regime, Regime::CaseI);
        assert!(s.r < s.epsilon / 2.0);
    }

    #[test]
    fn triangle_violation_rejected() {
        let e = derive_geometry(0.1, 1.0, 1.0, 2.0, 1.0).unwrap_err();
        assert!(matches!(e, Error::UnsupportedScaling(_)));
    }

    #[test]
    fn penetration_rejected() {
        // eta0 = 1 with kappa0 >= 1/2 touches the neighbour.
        let e = derive_geometry(0.1, 0.6, 1.0, 1.0, 2.0 / 3.0).unwrap_err();
        assert!(matches!(e, Error::UnsupportedScaling(_) | Error::Penetration { .. }));
    }

    #[test]
    fn subcritical_flagged() {
        let s = derive_geometry(0.1, 0.25, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(s.regime, Regime::Subcritical);
    }

    #[test]
    fn regime_ignores_epsilon() {
        for eps in [0.2, 0.1, 0.05, 0.01, 0.004] {
            let s = derive_geometry(eps, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
            assert_eq!(s.regime, Regime::CaseII);
        }
    }

    #[test]
    fn load_amplitude_reference_value() {
        let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
        assert!((load_amplitude(&s) - 215.443469).abs() < 1e-5);
    }

    fn demo_geometry() -> (LayerScaling, StructureGeometry) {
        let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
        let geom = StructureGeometry {
            omega: Rect2::new(0.0, 1.0, 0.0, 1.0),
            height: 1.0,
        };
        (s, geom)
    }

    #[test]
    fn bulk_points_see_bulk_density() {
        let (s, geom) = demo_geometry();
        let load = LoadSpec::constant([0.0; 3], [1e3, 1e3, 0.0]);
        let f = scaled_load(&load, &s, &geom, [0.5, 0.5, -0.3]).unwrap();
        assert_eq!(f, [1e3, 1e3, 0.0]);
        let f = scaled_load(&load, &s, &geom, [0.5, 0.5, 0.5]).unwrap();
        assert_eq!(f, [1e3, 1e3, 0.0]);
    }

    #[test]
    fn rod_points_see_amplified_density() {
        let (s, geom) = demo_geometry();
        let load = LoadSpec::constant([1.0, 1.0, 1.0], [0.0; 3]);
        // Centre of the rod of cell (5, 5).
        let f = scaled_load(&load, &s, &geom, [0.5, 0.5, 0.5 * s.delta]).unwrap();
        let amp = load_amplitude(&s);
        for c in f {
            assert!((c - amp).abs() / amp < 1e-12);
        }
        // Zero rod load stays zero.
        let z = LoadSpec::constant([0.0; 3], [7.0, 0.0, 0.0]);
        let f = scaled_load(&z, &s, &geom, [0.5, 0.5, 0.5 * s.delta]).unwrap();
        assert_eq!(f, [0.0; 3]);
    }

    #[test]
    fn void_and_outside_points_rejected() {
        let (s, geom) = demo_geometry();
        let load = LoadSpec::constant([1.0; 3], [1.0; 3]);
        // Between rods: offset by half a period from a cell centre.
        let gap = [0.5 + s.epsilon / 2.0, 0.5, 0.5 * s.delta];
        assert!(matches!(
            scaled_load(&load, &s, &geom, gap),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            scaled_load(&load, &s, &geom, [0.5, 0.5, 5.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rod_load_integral_change_of_variables() {
        // Integrating the scaled density over one physical rod must equal
        // epsilon^2 times the reference-rod integral of the density.
        let (s, geom) = demo_geometry();
        let load = LoadSpec::new(
            |_c, x| {
                let p = 1.0 + x[0] + 0.5 * x[1] * x[1] + x[2] * x[0];
                [p, 2.0 * p, 0.25 * p]
            },
            |_| [0.0; 3],
        );
        // Reference integral over B1 by polar quadrature.
        let (rad_n, rad_w) = crate::quadrature::gauss_legendre_on(8, 0.0, 1.0);
        let ntheta = 32;
        let (ax_n, ax_w) = crate::quadrature::gauss_legendre_on(8, 0.0, 1.0);
        let mut reference = [0.0; 3];
        let mut physical = [0.0; 3];
        let centre = [0.5, 0.5];
        for (&rho, &wr) in rad_n.iter().zip(&rad_w) {
            for it in 0..ntheta {
                let th = 2.0 * std::f64::consts::PI * it as f64 / ntheta as f64;
                let wq = wr * rho * 2.0 * std::f64::consts::PI / ntheta as f64;
                for (&t, &wt) in ax_n.iter().zip(&ax_w) {
                    let xref = [rho * th.cos(), rho * th.sin(), t];
                    let f = (load.f_beam)(centre, xref);
                    for k in 0..3 {
                        reference[k] += wq * wt * f[k];
                    }
                    // Matching physical point in the rod at cell (5,5).
                    let phys = [
                        centre[0] + s.r * xref[0],
                        centre[1] + s.r * xref[1],
                        s.delta * t,
                    ];
                    let f = scaled_load(&load, &s, &geom, phys).unwrap();
                    // Physical measure: r^2 delta times the reference one.
                    let wphys = wq * wt * s.r * s.r * s.delta;
                    for k in 0..3 {
                        physical[k] += wphys * f[k];
                    }
                }
            }
        }
        let eps2 = s.epsilon * s.epsilon;
        for k in 0..3 {
            assert!(
                (physical[k] - eps2 * reference[k]).abs() <= 1e-10 * reference[k].abs().max(1.0),
                "component {k}: {} vs {}",
                physical[k],
                eps2 * reference[k]
            );
        }
    }
}
