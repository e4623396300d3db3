//! Discrete unfolding operators for the periodic rod layer, and the cutoff
//! construction used to localise macroscopic test functions around the rod
//! anchors.
//!
//! Three rescalings appear:
//! * the axial unfolding `(s, X3) -> phi(s, delta * X3)` mapping the physical
//!   layer `omega x (0, delta)` to `omega x (0, 1)`;
//! * the rod unfolding `(s, X) -> phi(s, r X1, r X2, delta X3)` mapping local
//!   rod coordinates to the reference rod `B_1 = D_1 x (0, 1)`;
//! * the cell unfolding `(s, y) -> phi(eps [s/eps] + eps y)` mapping `omega`
//!   to `omega x Y` with `Y = (-1/2, 1/2)^2` the centred reference cell.
//!
//! All three extend by zero on the boundary layer `Lambda_eps`, the part of
//! `omega` not covered by whole cells.  Their exact calculus identities
//! (integral rescalings, derivative commutation, product rule) are frozen in
//! the tests.

use crate::beam::{BeamField, BeamFrame, SectionQuadrature};
use crate::error::Error;
use crate::lattice::{cell_frac2, cell_index2};
use crate::quadrature::gauss_legendre_on;
use crate::scaling::{LayerScaling, Rect2};
use crate::Result;
use std::collections::HashSet;

/// The periodicity cells of size `epsilon` wholly contained in `omega`,
/// plus the membership tests for the boundary layer.
#[derive(Debug, Clone)]
pub struct CellGrid {
    pub omega: Rect2,
    pub epsilon: f64,
    cells: Vec<[i64; 2]>,
    set: HashSet<[i64; 2]>,
}

impl CellGrid {
    /// Enumerate the interior cells `eps (xi + Y) ⊂ omega`.
    pub fn build(omega: Rect2, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!(
                "cell size must be positive, got {epsilon}"
            )));
        }
        let i0 = (omega.x0 / epsilon).floor() as i64 - 1;
        let i1 = (omega.x1 / epsilon).ceil() as i64 + 1;
        let j0 = (omega.y0 / epsilon).floor() as i64 - 1;
        let j1 = (omega.y1 / epsilon).ceil() as i64 + 1;
        let mut cells = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                if omega.contains_cell([i, j], epsilon) {
                    cells.push([i, j]);
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyLayer);
        }
        let set = cells.iter().copied().collect();
        Ok(Self {
            omega,
            epsilon,
            cells,
            set,
        })
    }

    pub fn interior_cells(&self) -> &[[i64; 2]] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_interior_cell(&self, xi: [i64; 2]) -> bool {
        self.set.contains(&xi)
    }

    /// Lattice index `[s/eps]` of the cell containing a point.
    pub fn cell_of_point(&self, s: [f64; 2]) -> [i64; 2] {
        cell_index2([s[0] / self.epsilon, s[1] / self.epsilon])
    }

    /// Centre `eps * xi` of a cell.
    pub fn cell_center(&self, xi: [i64; 2]) -> [f64; 2] {
        [self.epsilon * xi[0] as f64, self.epsilon * xi[1] as f64]
    }

    /// Whether a point lies in the whole-cell region (not in the boundary
    /// layer).
    pub fn is_interior_point(&self, s: [f64; 2]) -> bool {
        self.omega.contains(s) && self.is_interior_cell(self.cell_of_point(s))
    }

    /// Area covered by whole cells.
    pub fn interior_area(&self) -> f64 {
        self.cells.len() as f64 * self.epsilon * self.epsilon
    }

    /// Per-cell tensor Gauss rule over every cell meeting `omega`, with the
    /// interior flag marking whole cells.  Boundary-layer points are kept so
    /// zero-extension can be observed; their weights are only used for
    /// qualitative checks, the exact identities integrate over whole cells.
    pub fn macro_quadrature(&self, m: usize) -> Result<MacroGrid> {
        if m < 1 {
            return Err(Error::Resolution("macro rule needs at least 1 point".into()));
        }
        let eps = self.epsilon;
        let (gx, gw) = gauss_legendre_on(m, -0.5 * eps, 0.5 * eps);
        let i0 = (self.omega.x0 / eps).floor() as i64 - 1;
        let i1 = (self.omega.x1 / eps).ceil() as i64 + 1;
        let j0 = (self.omega.y0 / eps).floor() as i64 - 1;
        let j1 = (self.omega.y1 / eps).ceil() as i64 + 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut interior = Vec::new();
        let mut cells = Vec::new();
        for i in i0..=i1 {
            for j in j0..=j1 {
                let is_in = self.is_interior_cell([i, j]);
                let c = self.cell_center([i, j]);
                for a in 0..m {
                    for b in 0..m {
                        let p = [c[0] + gx[a], c[1] + gx[b]];
                        if !self.omega.contains(p) {
                            continue;
                        }
                        points.push(p);
                        weights.push(gw[a] * gw[b]);
                        interior.push(is_in);
                        cells.push([i, j]);
                    }
                }
            }
        }
        Ok(MacroGrid {
            points,
            weights,
            interior,
            cells,
        })
    }
}

/// Macroscopic sample set over `omega`: per-cell Gauss points with weights,
/// owning cell indices, and whole-cell flags.
#[derive(Debug, Clone)]
pub struct MacroGrid {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub interior: Vec<bool>,
    pub cells: Vec<[i64; 2]>,
}

/// An unfolded field sampled on macro points x reference-domain points,
/// zero on boundary-layer macro samples.  The micro point type is `f64` for
/// the axial reference interval, `[f64; 3]` for the reference rod, and
/// `[f64; 2]` for the reference cell.
#[derive(Debug, Clone)]
pub struct UnfoldedField<P> {
    pub macro_points: Vec<[f64; 2]>,
    pub macro_weights: Vec<f64>,
    pub macro_interior: Vec<bool>,
    pub micro_points: Vec<P>,
    pub micro_weights: Vec<f64>,
    /// `values[macro][micro]`.
    pub values: Vec<Vec<f64>>,
}

impl<P> UnfoldedField<P> {
    /// Tensor quadrature of the field over macro x micro.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for (k, row) in self.values.iter().enumerate() {
            let mut inner = 0.0;
            for (i, v) in row.iter().enumerate() {
                inner += self.micro_weights[i] * v;
            }
            total += self.macro_weights[k] * inner;
        }
        total
    }

    /// Tensor quadrature of the squared field.
    pub fn l2_norm(&self) -> f64 {
        let mut total = 0.0;
        for (k, row) in self.values.iter().enumerate() {
            let mut inner = 0.0;
            for (i, v) in row.iter().enumerate() {
                inner += self.micro_weights[i] * v * v;
            }
            total += self.macro_weights[k] * inner;
        }
        total.sqrt()
    }

    /// Largest |value| on boundary-layer macro samples (must be zero).
    pub fn max_abs_on_boundary_layer(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (k, row) in self.values.iter().enumerate() {
            if !self.macro_interior[k] {
                for v in row {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Axial unfolding: `(s, X3) -> phi(s, delta X3)` on whole cells, zero on the
/// boundary layer.  Micro samples are a Gauss rule on `(0, 1)`.
pub fn unfold_t(
    grid: &CellGrid,
    mg: &MacroGrid,
    delta: f64,
    n_axial: usize,
    phi: impl Fn([f64; 2], f64) -> f64,
) -> UnfoldedField<f64> {
    let (x3, w3) = gauss_legendre_on(n_axial, 0.0, 1.0);
    let values = mg
        .points
        .iter()
        .zip(&mg.interior)
        .map(|(&s, &inside)| {
            x3.iter()
                .map(|&t| {
                    if inside && grid.omega.contains(s) {
                        phi(s, delta * t)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    UnfoldedField {
        macro_points: mg.points.clone(),
        macro_weights: mg.weights.clone(),
        macro_interior: mg.interior.clone(),
        micro_points: x3,
        micro_weights: w3,
        values,
    }
}

/// Reference-rod quadrature `D_1 x (0, 1)` (unit disc section x axial Gauss).
#[derive(Debug, Clone)]
pub struct RodRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl RodRule {
    pub fn new(n_radial: usize, n_angular: usize, n_axial: usize) -> Result<Self> {
        let section = SectionQuadrature::disc(1.0, n_radial, n_angular)?;
        let (x3, w3) = gauss_legendre_on(n_axial, 0.0, 1.0);
        let mut points = Vec::with_capacity(section.len() * n_axial);
        let mut weights = Vec::with_capacity(section.len() * n_axial);
        for (i, node) in section.nodes.iter().enumerate() {
            for k in 0..n_axial {
                points.push([node[0], node[1], x3[k]]);
                weights.push(section.weights[i] * w3[k]);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn default_rule() -> Result<Self> {
        Self::new(4, 16, 6)
    }
}

/// Rod unfolding: `(s, X) -> phi(s, (r X1, r X2, delta X3))`, zero on the
/// boundary layer.  `phi` takes the macro point and the local rod coordinate.
pub fn unfold_tprime(
    grid: &CellGrid,
    mg: &MacroGrid,
    r: f64,
    delta: f64,
    rule: &RodRule,
    phi: impl Fn([f64; 2], [f64; 3]) -> f64,
) -> UnfoldedField<[f64; 3]> {
    let values = mg
        .points
        .iter()
        .zip(&mg.interior)
        .map(|(&s, &inside)| {
            rule.points
                .iter()
                .map(|&x| {
                    if inside && grid.omega.contains(s) {
                        phi(s, [r * x[0], r * x[1], delta * x[2]])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    UnfoldedField {
        macro_points: mg.points.clone(),
        macro_weights: mg.weights.clone(),
        macro_interior: mg.interior.clone(),
        micro_points: rule.points.clone(),
        micro_weights: rule.weights.clone(),
        values,
    }
}

/// Cell unfolding: `(s, y) -> phi(eps [s/eps] + eps y)`, zero on the boundary
/// layer.  Micro samples are an `m x m` Gauss rule on the centred unit cell.
pub fn unfold_tsecond(
    grid: &CellGrid,
    mg: &MacroGrid,
    m: usize,
    phi: impl Fn([f64; 2]) -> f64,
) -> UnfoldedField<[f64; 2]> {
    let (gy, gw) = gauss_legendre_on(m, -0.5, 0.5);
    let mut micro_points = Vec::with_capacity(m * m);
    let mut micro_weights = Vec::with_capacity(m * m);
    for a in 0..m {
        for b in 0..m {
            micro_points.push([gy[a], gy[b]]);
            micro_weights.push(gw[a] * gw[b]);
        }
    }
    let eps = grid.epsilon;
    let values = mg
        .points
        .iter()
        .zip(&mg.interior)
        .map(|(&s, &inside)| {
            let xi = grid.cell_of_point(s);
            micro_points
                .iter()
                .map(|&y| {
                    if inside && grid.omega.contains(s) {
                        phi([
                            eps * (xi[0] as f64 + y[0]),
                            eps * (xi[1] as f64 + y[1]),
                        ])
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    UnfoldedField {
        macro_points: mg.points.clone(),
        macro_weights: mg.weights.clone(),
        macro_interior: mg.interior.clone(),
        micro_points,
        micro_weights,
        values,
    }
}

/// Fourth-order five-point finite-difference derivative on a uniform grid
/// (exact for polynomials of degree <= 4); needs at least 5 samples.
pub(crate) fn derivative5(h: f64, v: &[f64]) -> Result<Vec<f64>> {
    let n = v.len();
    if n < 5 {
        return Err(Error::Resolution(format!(
            "five-point derivative needs >= 5 samples, got {n}"
        )));
    }
    let mut d = vec![0.0; n];
    d[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
    d[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
    for k in 2..n - 2 {
        d[k] = (v[k - 2] - 8.0 * v[k - 1] + 8.0 * v[k + 1] - v[k + 2]) / (12.0 * h);
    }
    d[n - 2] =
        (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5])
            / (12.0 * h);
    d[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
        + 3.0 * v[n - 5])
        / (12.0 * h);
    Ok(d)
}

/// The six unfolded strain components of one rod, sampled on the reference
/// tensor grid section nodes x axial samples; component order
/// `(11, 22, 33, 12, 13, 23)`.
#[derive(Debug, Clone)]
pub struct UnfoldedStrain {
    /// Reference axial samples `X3` in `[0, 1]`.
    pub x3_grid: Vec<f64>,
    /// Reference section nodes (unit disc).
    pub section_nodes: Vec<[f64; 2]>,
    /// `e[c][axial][node]` with `c` indexing `(11, 22, 33, 12, 13, 23)`.
    pub e: [Vec<Vec<f64>>; 6],
}

impl UnfoldedStrain {
    pub fn component(&self, i: usize, j: usize) -> &Vec<Vec<f64>> {
        match (i.min(j), i.max(j)) {
            (1, 1) => &self.e[0],
            (2, 2) => &self.e[1],
            (3, 3) => &self.e[2],
            (1, 2) => &self.e[3],
            (1, 3) => &self.e[4],
            (2, 3) => &self.e[5],
            _ => panic!("strain indices must be in 1..=3"),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.e
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Physical symmetric gradient of a sampled rod field, on the sample grid.
/// Transverse derivatives are exact polynomial/spectral differentiation on
/// the section rule; axial derivatives are five-point finite differences.
fn symmetric_gradient(field: &BeamField, q: &SectionQuadrature) -> Result<[Vec<Vec<f64>>; 6]> {
    let n3 = field.axial_grid.len();
    let nn = q.len();
    let h = field.d / (n3 - 1) as f64;
    // Axial derivatives of every component at every node.
    let mut du3 = vec![vec![[0.0; 3]; nn]; n3];
    let mut line = vec![0.0; n3];
    for i in 0..nn {
        for c in 0..3 {
            for k in 0..n3 {
                line[k] = field.values[k][i][c];
            }
            let d = derivative5(h, &line)?;
            for k in 0..n3 {
                du3[k][i][c] = d[k];
            }
        }
    }
    let mut e: [Vec<Vec<f64>>; 6] = Default::default();
    for comp in e.iter_mut() {
        *comp = vec![vec![0.0; nn]; n3];
    }
    let mut comp_vals = vec![0.0; nn];
    for k in 0..n3 {
        let mut grads: Vec<Vec<[f64; 2]>> = Vec::with_capacity(3);
        for c in 0..3 {
            for i in 0..nn {
                comp_vals[i] = field.values[k][i][c];
            }
            grads.push(q.transverse_gradient(&comp_vals)?);
        }
        for i in 0..nn {
            let g = [
                [grads[0][i][0], grads[0][i][1], du3[k][i][0]],
                [grads[1][i][0], grads[1][i][1], du3[k][i][1]],
                [grads[2][i][0], grads[2][i][1], du3[k][i][2]],
            ];
            e[0][k][i] = g[0][0];
            e[1][k][i] = g[1][1];
            e[2][k][i] = g[2][2];
            e[3][k][i] = 0.5 * (g[0][1] + g[1][0]);
            e[4][k][i] = 0.5 * (g[0][2] + g[2][0]);
            e[5][k][i] = 0.5 * (g[1][2] + g[2][1]);
        }
    }
    Ok(e)
}

/// Assemble the unfolded strain of one rod from its frame and warping.
///
/// The elementary part contributes only to the `(1,3)`, `(2,3)` and `(3,3)`
/// components:
///
/// ```text
/// e13 = 1/2 ((1/delta) dT(U1)/dX3 - T(R2) - (r/delta) dT(R3)/dX3 * X2) + T'(e(warp))_13
/// e23 = 1/2 ((1/delta) dT(U2)/dX3 + T(R1) + (r/delta) dT(R3)/dX3 * X1) + T'(e(warp))_23
/// e33 = (1/delta) dT(U3)/dX3 + (r/delta)(dT(R1)/dX3 * X2 - dT(R2)/dX3 * X1) + T'(e(warp))_33
/// ```
///
/// while the in-plane components are pure warping strain.
pub fn unfolded_strain(
    frame: &BeamFrame,
    warp: &BeamField,
    q: &SectionQuadrature,
    s: &LayerScaling,
) -> Result<UnfoldedStrain> {
    if (q.r() - s.r).abs() > 1e-9 * s.r {
        return Err(Error::Shape(format!(
            "section radius {} does not match the layer radius {}",
            q.r(),
            s.r
        )));
    }
    if (frame.d - s.delta).abs() > 1e-9 * s.delta {
        return Err(Error::Shape(format!(
            "rod height {} does not match the layer height {}",
            frame.d, s.delta
        )));
    }
    if warp.axial_grid.len() != frame.axial_grid.len() {
        return Err(Error::Shape(
            "warping and frame must share the axial grid; run the decomposition first".into(),
        ));
    }
    let n3 = frame.axial_grid.len();
    let nn = q.len();
    let h = frame.d / (n3 - 1) as f64;
    // Physical derivatives of the frame along the axis, five-point stencils.
    let mut dmean = vec![[0.0; 3]; n3];
    let mut drot = vec![[0.0; 3]; n3];
    let mut line = vec![0.0; n3];
    for c in 0..3 {
        for k in 0..n3 {
            line[k] = frame.u_mean[k][c];
        }
        let d = derivative5(h, &line)?;
        for k in 0..n3 {
            dmean[k][c] = d[k];
        }
        for k in 0..n3 {
            line[k] = frame.rot[k][c];
        }
        let d = derivative5(h, &line)?;
        for k in 0..n3 {
            drot[k][c] = d[k];
        }
    }
    let warp_strain = symmetric_gradient(warp, q)?;
    let mut e: [Vec<Vec<f64>>; 6] = Default::default();
    for (c, comp) in e.iter_mut().enumerate() {
        *comp = warp_strain[c].clone();
    }
    for k in 0..n3 {
        let r_vec = frame.rot[k];
        for i in 0..nn {
            let [x1, x2] = q.nodes[i];
            e[4][k][i] += 0.5 * (dmean[k][0] - r_vec[1] - drot[k][2] * x2);
            e[5][k][i] += 0.5 * (dmean[k][1] + r_vec[0] + drot[k][2] * x1);
            e[2][k][i] += dmean[k][2] + drot[k][0] * x2 - drot[k][1] * x1;
        }
    }
    let x3_grid = frame.axial_grid.iter().map(|&t| t / frame.d).collect();
    let section_nodes = q
        .nodes
        .iter()
        .map(|&[a, b]| [a / q.r(), b / q.r()])
        .collect();
    Ok(UnfoldedStrain {
        x3_grid,
        section_nodes,
        e,
    })
}

// ---------------------------------------------------------------------------
// Cutoff construction.
// ---------------------------------------------------------------------------

/// Radial bump profile: 1 on `t <= 1`, quintic decay to 0 at `t = support`,
/// C2 at both seams.
#[derive(Debug, Clone, Copy)]
pub struct Bump {
    support: f64,
}

impl Bump {
    /// `support` is the outer radius (default construction uses 2).
    pub fn new(support: f64) -> Result<Self> {
        if !(support > 1.0) || !support.is_finite() {
            return Err(Error::InvalidCutoff(format!(
                "bump support radius must exceed 1, got {support}"
            )));
        }
        Ok(Self { support })
    }

    pub fn standard() -> Self {
        Self { support: 2.0 }
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// Radial profile value.
    pub fn profile(&self, t: f64) -> f64 {
        if t <= 1.0 {
            1.0
        } else if t >= self.support {
            0.0
        } else {
            let s = (t - 1.0) / (self.support - 1.0);
            1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }

    /// Radial profile derivative.
    pub fn profile_derivative(&self, t: f64) -> f64 {
        if t <= 1.0 || t >= self.support {
            0.0
        } else {
            let w = self.support - 1.0;
            let s = (t - 1.0) / w;
            -30.0 * s * s * (1.0 - s) * (1.0 - s) / w
        }
    }

    /// Planar bump value.
    pub fn value(&self, y: [f64; 2]) -> f64 {
        self.profile((y[0] * y[0] + y[1] * y[1]).sqrt())
    }

    /// Planar bump gradient.
    pub fn gradient(&self, y: [f64; 2]) -> [f64; 2] {
        let t = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if t <= 1.0 || t >= self.support {
            return [0.0, 0.0];
        }
        let dp = self.profile_derivative(t);
        [dp * y[0] / t, dp * y[1] / t]
    }
}

/// A macroscopic function replaced, near every cell centre, by its value at
/// the centre: `chi((eps/r) {x/eps}) phi(eps [x/eps]) + (1 - chi) phi(x)`.
pub struct Cutoff<F, G>
where
    F: Fn([f64; 2]) -> f64,
    G: Fn([f64; 2]) -> [f64; 2],
{
    grid: CellGrid,
    r: f64,
    bump: Bump,
    phi: F,
    grad_phi: G,
}

/// Gradient norms of the cutoff difference for one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradNorm {
    pub p: f64,
    pub value: f64,
}

/// Norm report of the cutoff difference `phi_{eps,r} - phi`.
#[derive(Debug, Clone)]
pub struct CutoffReport {
    /// Sup of |difference| over the sampled support discs.
    pub linf_diff: f64,
    /// `L^p(omega)` norms of the difference gradient.
    pub grad_norms: Vec<GradNorm>,
    /// The ratio `r / eps` the construction was built with.
    pub r_over_eps: f64,
}

impl CutoffReport {
    /// CSV row set (`p,norm` lines preceded by the sup-norm line).
    pub fn write_csv(&self, out: &mut dyn std::io::Write) -> Result<()> {
        writeln!(out, "quantity,p,value")?;
        writeln!(out, "linf_diff,,{:.12e}", self.linf_diff)?;
        for gn in &self.grad_norms {
            writeln!(out, "grad_lp,{},{:.12e}", gn.p, gn.value)?;
        }
        Ok(())
    }
}

/// Build the cutoff; fails when the scaled bump support would leave the cell
/// (`r * support / eps` must stay below 1/2).
pub fn cutoff_phi<F, G>(
    grid: &CellGrid,
    r: f64,
    bump: Bump,
    phi: F,
    grad_phi: G,
) -> Result<Cutoff<F, G>>
where
    F: Fn([f64; 2]) -> f64,
    G: Fn([f64; 2]) -> [f64; 2],
{
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("anchor radius must be positive, got {r}")));
    }
    let reach = r * bump.support() / grid.epsilon;
    if reach >= 0.5 {
        return Err(Error::InvalidCutoff(format!(
            "scaled bump support {reach:.4} of the cell exceeds 1/2; the modification would leak into neighbouring cells"
        )));
    }
    Ok(Cutoff {
        grid: grid.clone(),
        r,
        bump,
        phi,
        grad_phi,
    })
}

impl<F, G> Cutoff<F, G>
where
    F: Fn([f64; 2]) -> f64,
    G: Fn([f64; 2]) -> [f64; 2],
{
    /// The bump evaluated in cell-local coordinates, zero when the point's
    /// cell is not interior.
    fn chi_at(&self, x: [f64; 2]) -> (f64, [f64; 2], [i64; 2]) {
        let eps = self.grid.epsilon;
        let xi = self.grid.cell_of_point(x);
        if !self.grid.is_interior_cell(xi) {
            return (0.0, [0.0, 0.0], xi);
        }
        let frac = cell_frac2([x[0] / eps, x[1] / eps]);
        let z = [eps / self.r * frac[0], eps / self.r * frac[1]];
        (self.bump.value(z), self.bump.gradient(z), xi)
    }

    /// Value of the modified function.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let (chi, _, xi) = self.chi_at(x);
        if chi == 0.0 {
            return (self.phi)(x);
        }
        let center = self.grid.cell_center(xi);
        chi * (self.phi)(center) + (1.0 - chi) * (self.phi)(x)
    }

    /// Difference to the original function.
    pub fn difference(&self, x: [f64; 2]) -> f64 {
        let (chi, _, xi) = self.chi_at(x);
        if chi == 0.0 {
            return 0.0;
        }
        let center = self.grid.cell_center(xi);
        chi * ((self.phi)(center) - (self.phi)(x))
    }

    /// Analytic gradient of the difference:
    /// `(1/r)(phi(center) - phi(x)) grad_chi(z) - chi(z) grad_phi(x)`.
    pub fn gradient_difference(&self, x: [f64; 2]) -> [f64; 2] {
        let (chi, gchi, xi) = self.chi_at(x);
        if chi == 0.0 && gchi == [0.0, 0.0] {
            return [0.0, 0.0];
        }
        let center = self.grid.cell_center(xi);
        let dphi = (self.phi)(center) - (self.phi)(x);
        let g = (self.grad_phi)(x);
        [
            dphi * gchi[0] / self.r - chi * g[0],
            dphi * gchi[1] / self.r - chi * g[1],
        ]
    }

    /// Norm report over the modified discs: sup of the difference and
    /// `L^p` norms of its gradient for the requested exponents.
    ///
    /// The integrands are supported in the scaled bump discs, so the
    /// quadrature is polar per cell with radial panels split at the bump
    /// seams.
    pub fn report(&self, ps: &[f64]) -> Result<CutoffReport> {
        let eps = self.grid.epsilon;
        let outer = self.r * self.bump.support();
        let n_ang = 32;
        let n_rad = 8;
        let (t_in, w_in) = gauss_legendre_on(n_rad, 0.0, self.r);
        let (t_out, w_out) = gauss_legendre_on(n_rad, self.r, outer);
        let mut linf: f64 = 0.0;
        let mut sums = vec![0.0; ps.len()];
        for &cell in self.grid.interior_cells() {
            let c = self.grid.cell_center(cell);
            for j in 0..n_ang {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n_ang as f64;
                let (cs, sn) = (th.cos(), th.sin());
                for (ts, ws) in [(&t_in, &w_in), (&t_out, &w_out)] {
                    for (&rho, &w) in ts.iter().zip(ws.iter()) {
                        let x = [c[0] + rho * cs, c[1] + rho * sn];
                        let wq = w * rho * 2.0 * std::f64::consts::PI / n_ang as f64;
                        linf = linf.max(self.difference(x).abs());
                        let g = self.gradient_difference(x);
                        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
                        for (slot, &p) in ps.iter().enumerate() {
                            sums[slot] += wq * gn.powf(p);
                        }
                    }
                }
            }
        }
        let grad_norms = ps
            .iter()
            .zip(&sums)
            .map(|(&p, &s)| GradNorm {
                p,
                value: s.powf(1.0 / p),
            })
            .collect();
        Ok(CutoffReport {
            linf_diff: linf,
            grad_norms,
            r_over_eps: self.r / eps,
        })
    }
}
