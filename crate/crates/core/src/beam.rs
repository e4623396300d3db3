//! Decomposition of a displacement field on a slender circular rod into a
//! mean-line displacement, a cross-section rotation, and a residual warping,
//! together with the quadrature and the testable identities that
//! characterise the decomposition.
//!
//! The rod is `B_{r,d} = D_r x (0,d)` with `D_r` the disc of radius `r`
//! centred on the axis `x3`.  A displacement `u` splits as
//! `u = Ue + warp` where the elementary part
//! `Ue(x) = U(x3) + R(x3) ^ (x1 e1 + x2 e2)` collects the section means
//!
//! ```text
//! U  = 1/(pi r^2) * int_{D_r} u
//! R3 = 2/(pi r^4) * int_{D_r} (x1 u2 - x2 u1)
//! R1 = 4/(pi r^4) * int_{D_r} x2 u3,   R2 = -4/(pi r^4) * int_{D_r} x1 u3
//! ```
//!
//! and the warping carries no section mean, no twist moment and no tilt
//! moments.  The module also provides the planar analogue used by the
//! two-dimensional solver, where the section is the interval `(-r, r)` and a
//! single rotation component remains.

use crate::error::Error;
use crate::quadrature::gauss_legendre_on;
use crate::Result;
use std::f64::consts::PI;

/// Tensor-product quadrature on the disc `D_r`: Gauss–Legendre in radius,
/// equispaced trapezoid in angle.
///
/// Exact for polynomial integrands whose radial degree (including the polar
/// Jacobian) is at most `2 n_radial - 1` and whose angular frequency is below
/// `n_angular / 2`.
#[derive(Debug, Clone)]
pub struct SectionQuadrature {
    /// Node coordinates `(x1, x2)`, radial-major ordering.
    pub nodes: Vec<[f64; 2]>,
    /// Positive weights summing to `pi r^2`.
    pub weights: Vec<f64>,
    r: f64,
    radii: Vec<f64>,
    n_angular: usize,
    /// Row-major `n_radial x n_radial` differentiation matrix on the radii.
    radial_diff: Vec<f64>,
    /// Row-major `n_angular x n_angular` spectral differentiation matrix.
    angular_diff: Vec<f64>,
}

/// Row-major polynomial differentiation matrix on arbitrary distinct nodes
/// (barycentric form): `(D v)_i = p'(t_i)` for the interpolant `p` of `v`.
fn lagrange_diff_matrix(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] /= t[i] - t[j];
            }
        }
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (t[i] - t[j]);
                d[i * n + j] = v;
                diag -= v;
            }
        }
        d[i * n + i] = diag;
    }
    d
}

impl SectionQuadrature {
    /// Build the disc rule; `n_angular` must be even and at least 4.
    pub fn disc(r: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("section radius must be positive, got {r}")));
        }
        if n_radial < 2 {
            return Err(Error::Resolution(format!(
                "need at least 2 radial nodes, got {n_radial}"
            )));
        }
        if n_angular < 4 || n_angular % 2 != 0 {
            return Err(Error::Resolution(format!(
                "need an even number >= 4 of angular nodes, got {n_angular}"
            )));
        }
        let (radii, wr) = gauss_legendre_on(n_radial, 0.0, r);
        let dtheta = 2.0 * PI / n_angular as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_angular);
        let mut weights = Vec::with_capacity(n_radial * n_angular);
        for i in 0..n_radial {
            for j in 0..n_angular {
                let theta = dtheta * j as f64;
                nodes.push([radii[i] * theta.cos(), radii[i] * theta.sin()]);
                weights.push(wr[i] * radii[i] * dtheta);
            }
        }
        // Spectral differentiation on the periodic equispaced angles.
        let mut angular_diff = vec![0.0; n_angular * n_angular];
        for i in 0..n_angular {
            for j in 0..n_angular {
                if i != j {
                    let s = if (i + j) % 2 == 0 { 0.5 } else { -0.5 };
                    angular_diff[i * n_angular + j] =
                        s / (0.5 * dtheta * (i as f64 - j as f64)).tan();
                }
            }
        }
        let radial_diff = lagrange_diff_matrix(&radii);
        Ok(Self {
            nodes,
            weights,
            r,
            radii,
            n_angular,
            radial_diff,
            angular_diff,
        })
    }

    /// Default rule: 4 radial x 16 angular nodes.
    pub fn default_disc(r: f64) -> Result<Self> {
        Self::disc(r, 4, 16)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of the weights (the section area, `pi r^2` to machine precision).
    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Quadrature of a scalar function of the section coordinates.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    /// Cartesian transverse gradient `(d/dx1, d/dx2)` of nodal values, by
    /// polynomial differentiation along radii and spectral differentiation
    /// along angles; exact when the values are a polynomial of radial degree
    /// `< n_radial` and angular frequency `< n_angular / 2`.
    pub fn transverse_gradient(&self, values: &[f64]) -> Result<Vec<[f64; 2]>> {
        if values.len() != self.nodes.len() {
            return Err(Error::Shape(format!(
                "expected {} nodal values, got {}",
                self.nodes.len(),
                values.len()
            )));
        }
        let nr = self.radii.len();
        let na = self.n_angular;
        let mut out = vec![[0.0; 2]; values.len()];
        for i in 0..nr {
            for j in 0..na {
                let mut d_rho = 0.0;
                for k in 0..nr {
                    d_rho += self.radial_diff[i * nr + k] * values[k * na + j];
                }
                let mut d_theta = 0.0;
                for k in 0..na {
                    d_theta += self.angular_diff[j * na + k] * values[i * na + k];
                }
                let rho = self.radii[i];
                let [x1, x2] = self.nodes[i * na + j];
                let (c, s) = (x1 / rho, x2 / rho);
                out[i * na + j] = [c * d_rho - s / rho * d_theta, s * d_rho + c / rho * d_theta];
            }
        }
        Ok(out)
    }
}

/// A 3-component displacement field sampled on the tensor grid
/// section-quadrature nodes x uniform axial samples spanning `[0, d]`.
#[derive(Debug, Clone)]
pub struct BeamField {
    /// Uniform axial samples, `axial_grid[0] = 0`, last `= d`.
    pub axial_grid: Vec<f64>,
    /// `values[k][i]`: displacement at axial sample `k`, section node `i`.
    pub values: Vec<Vec<[f64; 3]>>,
    /// Rod height.
    pub d: f64,
}

impl BeamField {
    /// Sample a closure on the tensor grid (`n3 >= 2` axial samples).
    pub fn sample(
        q: &SectionQuadrature,
        d: f64,
        n3: usize,
        f: impl Fn([f64; 3]) -> [f64; 3],
    ) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("rod height must be positive, got {d}")));
        }
        if n3 < 2 {
            return Err(Error::Resolution(format!(
                "need at least 2 axial samples, got {n3}"
            )));
        }
        let axial_grid: Vec<f64> = (0..n3).map(|k| d * k as f64 / (n3 - 1) as f64).collect();
        let mut values = Vec::with_capacity(n3);
        for &x3 in &axial_grid {
            let mut layer = Vec::with_capacity(q.len());
            for node in &q.nodes {
                let v = f([node[0], node[1], x3]);
                if v.iter().any(|t| !t.is_finite()) {
                    return Err(Error::Shape("non-finite displacement sample".into()));
                }
                layer.push(v);
            }
            values.push(layer);
        }
        Ok(Self {
            axial_grid,
            values,
            d,
        })
    }

    fn check_shape(&self, q: &SectionQuadrature) -> Result<()> {
        if self.values.len() != self.axial_grid.len() {
            return Err(Error::Shape(format!(
                "{} axial layers vs {} grid samples",
                self.values.len(),
                self.axial_grid.len()
            )));
        }
        for layer in &self.values {
            if layer.len() != q.len() {
                return Err(Error::Shape(format!(
                    "layer with {} samples vs {} quadrature nodes",
                    layer.len(),
                    q.len()
                )));
            }
        }
        Ok(())
    }
}

/// Mean-line displacement and section rotation of a rod displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamFrame {
    /// Axial sample points.
    pub axial_grid: Vec<f64>,
    /// Mean-line displacement per sample.
    pub u_mean: Vec<[f64; 3]>,
    /// Section rotation vector per sample.
    pub rot: Vec<[f64; 3]>,
    /// Section radius.
    pub r: f64,
    /// Rod height.
    pub d: f64,
}

impl BeamFrame {
    /// Write the frame as CSV (`x3,U1,U2,U3,R1,R2,R3`).
    pub fn write_csv(&self, out: &mut dyn std::io::Write) -> Result<()> {
        writeln!(out, "x3,U1,U2,U3,R1,R2,R3")?;
        for k in 0..self.axial_grid.len() {
            let u = self.u_mean[k];
            let r = self.rot[k];
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.axial_grid[k], u[0], u[1], u[2], r[0], r[1], r[2]
            )?;
        }
        Ok(())
    }
}

/// Split a sampled displacement into its mean-line/rotation frame.
pub fn decompose(field: &BeamField, q: &SectionQuadrature) -> Result<BeamFrame> {
    field.check_shape(q)?;
    let area = PI * q.r * q.r;
    let inertia = PI * q.r.powi(4);
    let mut u_mean = Vec::with_capacity(field.values.len());
    let mut rot = Vec::with_capacity(field.values.len());
    for layer in &field.values {
        let mut mean = [0.0; 3];
        let mut twist = 0.0;
        let mut tilt = [0.0; 2];
        for (i, u) in layer.iter().enumerate() {
            let w = q.weights[i];
            let [x1, x2] = q.nodes[i];
            for c in 0..3 {
                mean[c] += w * u[c];
            }
            twist += w * (x1 * u[1] - x2 * u[0]);
            tilt[0] += w * x2 * u[2];
            tilt[1] += w * x1 * u[2];
        }
        u_mean.push([mean[0] / area, mean[1] / area, mean[2] / area]);
        rot.push([
            4.0 * tilt[0] / inertia,
            -4.0 * tilt[1] / inertia,
            2.0 * twist / inertia,
        ]);
    }
    Ok(BeamFrame {
        axial_grid: field.axial_grid.clone(),
        u_mean,
        rot,
        r: q.r,
        d: field.d,
    })
}

/// `U + R ^ (x1 e1 + x2 e2)` for given mean/rotation values.
fn elementary_at(u: [f64; 3], r: [f64; 3], x1: f64, x2: f64) -> [f64; 3] {
    [
        u[0] - r[2] * x2,
        u[1] + r[2] * x1,
        u[2] + r[0] * x2 - r[1] * x1,
    ]
}

/// Evaluate the elementary displacement of a frame at a point of the rod,
/// interpolating the frame linearly along the axis.
pub fn elementary_displacement(frame: &BeamFrame, x: [f64; 3]) -> Result<[f64; 3]> {
    let grid = &frame.axial_grid;
    let n = grid.len();
    let x3 = x[2];
    if x3 < grid[0] - 1e-12 * frame.d || x3 > grid[n - 1] + 1e-12 * frame.d {
        return Err(Error::Domain(format!(
            "axial coordinate {x3} outside [{}, {}]",
            grid[0],
            grid[n - 1]
        )));
    }
    let i = match grid.binary_search_by(|p| p.partial_cmp(&x3).unwrap()) {
        Ok(i) => {
            return Ok(elementary_at(frame.u_mean[i], frame.rot[i], x[0], x[1]));
        }
        Err(i) => i.clamp(1, n - 1),
    };
    let (a, b) = (grid[i - 1], grid[i]);
    let s = ((x3 - a) / (b - a)).clamp(0.0, 1.0);
    let mut u = [0.0; 3];
    let mut r = [0.0; 3];
    for c in 0..3 {
        u[c] = frame.u_mean[i - 1][c] * (1.0 - s) + frame.u_mean[i][c] * s;
        r[c] = frame.rot[i - 1][c] * (1.0 - s) + frame.rot[i][c] * s;
    }
    Ok(elementary_at(u, r, x[0], x[1]))
}

/// Pointwise residual `u - Ue` on the sample grid.
pub fn warping(field: &BeamField, frame: &BeamFrame, q: &SectionQuadrature) -> Result<BeamField> {
    field.check_shape(q)?;
    if frame.axial_grid.len() != field.axial_grid.len() {
        return Err(Error::Shape(format!(
            "frame with {} axial samples vs field with {}",
            frame.axial_grid.len(),
            field.axial_grid.len()
        )));
    }
    let mut values = Vec::with_capacity(field.values.len());
    for (k, layer) in field.values.iter().enumerate() {
        let mut out = Vec::with_capacity(layer.len());
        for (i, u) in layer.iter().enumerate() {
            let [x1, x2] = q.nodes[i];
            let e = elementary_at(frame.u_mean[k], frame.rot[k], x1, x2);
            out.push([u[0] - e[0], u[1] - e[1], u[2] - e[2]]);
        }
        values.push(out);
    }
    Ok(BeamField {
        axial_grid: field.axial_grid.clone(),
        values,
        d: field.d,
    })
}

/// Section moments of a warping field at one axial sample: all three must
/// vanish for a warping produced by [`warping`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResidual {
    /// Section mean of the warping (3 components).
    pub mean: [f64; 3],
    /// Twist moment `int (x1 w2 - x2 w1)`.
    pub twist: f64,
    /// Tilt moments `(int x1 w3, int x2 w3)`.
    pub tilt: [f64; 2],
}

impl MomentResidual {
    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mean
            .iter()
            .chain(self.tilt.iter())
            .chain(std::iter::once(&self.twist))
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Per-axial-sample section moments of a (warping) field.
pub fn check_moments(field: &BeamField, q: &SectionQuadrature) -> Result<Vec<MomentResidual>> {
    field.check_shape(q)?;
    let mut out = Vec::with_capacity(field.values.len());
    for layer in &field.values {
        let mut mean = [0.0; 3];
        let mut twist = 0.0;
        let mut tilt = [0.0; 2];
        for (i, w) in layer.iter().enumerate() {
            let wt = q.weights[i];
            let [x1, x2] = q.nodes[i];
            for c in 0..3 {
                mean[c] += wt * w[c];
            }
            twist += wt * (x1 * w[1] - x2 * w[0]);
            tilt[0] += wt * x1 * w[2];
            tilt[1] += wt * x2 * w[2];
        }
        out.push(MomentResidual { mean, twist, tilt });
    }
    Ok(out)
}

/// The five decomposition seminorms controlling the slender-rod estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seminorms {
    /// `L2(B)` norm of the warping.
    pub warp_l2: f64,
    /// `L2(B)` norm of the full warping gradient.
    pub warp_grad_l2: f64,
    /// `L2(0,d)` norm of `dR/dx3`.
    pub d_rot_l2: f64,
    /// `L2(0,d)` norm of `dU/dx3 - R ^ e3`.
    pub d_mean_minus_rot_e3_l2: f64,
    /// `L2(B)` norm of the symmetric gradient of `u`.
    pub strain_l2: f64,
}

/// Second-order axial finite-difference derivative on a uniform grid
/// (central inside, one-sided three-point at the ends).
fn axial_derivative(h: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    if n == 2 {
        let s = (v[1] - v[0]) / h;
        return vec![s, s];
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for k in 1..n - 1 {
        d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    }
    d
}

/// Trapezoid weights of the uniform axial grid.
fn axial_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Compute the decomposition seminorms of a sampled field.
///
/// Transverse derivatives are exact on the quadrature tensor grid for
/// low-degree polynomial data; axial derivatives are second-order finite
/// differences on the uniform axial grid.
pub fn seminorms(field: &BeamField, frame: &BeamFrame, q: &SectionQuadrature) -> Result<Seminorms> {
    field.check_shape(q)?;
    let n3 = field.axial_grid.len();
    if n3 < 3 {
        return Err(Error::Resolution(format!(
            "seminorms need at least 3 axial samples, got {n3}"
        )));
    }
    let warp = warping(field, frame, q)?;
    let h = field.d / (n3 - 1) as f64;
    let tw = axial_weights(&field.axial_grid);
    let nn = q.len();

    // Axial derivatives of u and of the warping at every section node.
    let mut du3 = vec![vec![[0.0; 3]; nn]; n3];
    let mut dw3 = vec![vec![[0.0; 3]; nn]; n3];
    let mut line = vec![0.0; n3];
    for i in 0..nn {
        for c in 0..3 {
            for k in 0..n3 {
                line[k] = field.values[k][i][c];
            }
            for (k, v) in axial_derivative(h, &line).into_iter().enumerate() {
                du3[k][i][c] = v;
            }
            for k in 0..n3 {
                line[k] = warp.values[k][i][c];
            }
            for (k, v) in axial_derivative(h, &line).into_iter().enumerate() {
                dw3[k][i][c] = v;
            }
        }
    }

    let mut warp_sq = 0.0;
    let mut warp_grad_sq = 0.0;
    let mut strain_sq = 0.0;
    let mut comp = vec![0.0; nn];
    for k in 0..n3 {
        // Transverse gradients per component, for u and for the warping.
        let mut grad_u: Vec<Vec<[f64; 2]>> = Vec::with_capacity(3);
        let mut grad_w: Vec<Vec<[f64; 2]>> = Vec::with_capacity(3);
        for c in 0..3 {
            for i in 0..nn {
                comp[i] = field.values[k][i][c];
            }
            grad_u.push(q.transverse_gradient(&comp)?);
            for i in 0..nn {
                comp[i] = warp.values[k][i][c];
            }
            grad_w.push(q.transverse_gradient(&comp)?);
        }
        for i in 0..nn {
            let wt = tw[k] * q.weights[i];
            let w = warp.values[k][i];
            warp_sq += wt * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
            // Full gradients: columns are (d/dx1, d/dx2, d/dx3).
            let mut gu = [[0.0; 3]; 3];
            let mut gw = [[0.0; 3]; 3];
            for c in 0..3 {
                gu[c] = [grad_u[c][i][0], grad_u[c][i][1], du3[k][i][c]];
                gw[c] = [grad_w[c][i][0], grad_w[c][i][1], dw3[k][i][c]];
            }
            for c in 0..3 {
                for dix in 0..3 {
                    warp_grad_sq += wt * gw[c][dix] * gw[c][dix];
                    let e = 0.5 * (gu[c][dix] + gu[dix][c]);
                    strain_sq += wt * e * e;
                }
            }
        }
    }

    // Frame-only seminorms (1D axial integrals).
    let mut d_rot_sq = 0.0;
    let mut defect_sq = 0.0;
    let mut dmean = vec![[0.0; 3]; n3];
    let mut drot = vec![[0.0; 3]; n3];
    for c in 0..3 {
        for k in 0..n3 {
            line[k] = frame.u_mean[k][c];
        }
        for (k, v) in axial_derivative(h, &line).into_iter().enumerate() {
            dmean[k][c] = v;
        }
        for k in 0..n3 {
            line[k] = frame.rot[k][c];
        }
        for (k, v) in axial_derivative(h, &line).into_iter().enumerate() {
            drot[k][c] = v;
        }
    }
    for k in 0..n3 {
        let r = frame.rot[k];
        // R ^ e3 = (R2, -R1, 0).
        let defect = [
            dmean[k][0] - r[1],
            dmean[k][1] + r[0],
            dmean[k][2],
        ];
        d_rot_sq += tw[k] * (drot[k][0].powi(2) + drot[k][1].powi(2) + drot[k][2].powi(2));
        defect_sq += tw[k] * (defect[0].powi(2) + defect[1].powi(2) + defect[2].powi(2));
    }

    Ok(Seminorms {
        warp_l2: warp_sq.sqrt(),
        warp_grad_l2: warp_grad_sq.sqrt(),
        d_rot_l2: d_rot_sq.sqrt(),
        d_mean_minus_rot_e3_l2: defect_sq.sqrt(),
        strain_l2: strain_sq.sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Planar analogue: section = interval (-r, r), one rotation component.
// ---------------------------------------------------------------------------

/// Gauss–Legendre rule on the planar section `(-r, r)`.
#[derive(Debug, Clone)]
pub struct LineQuadrature {
    /// Transverse node coordinates.
    pub nodes: Vec<f64>,
    /// Weights summing to `2 r`.
    pub weights: Vec<f64>,
    r: f64,
}

impl LineQuadrature {
    pub fn new(r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("section half-width must be positive, got {r}")));
        }
        if n < 2 {
            return Err(Error::Resolution(format!("need at least 2 nodes, got {n}")));
        }
        let (nodes, weights) = gauss_legendre_on(n, -r, r);
        Ok(Self { nodes, weights, r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Planar mean-line/rotation frame: displacement components are
/// `(transverse, axial)` and the single rotation couples them through
/// `Ue_axial = U_axial - rot * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFrame {
    pub axial_grid: Vec<f64>,
    /// Mean `(transverse, axial)` displacement per sample.
    pub mean: Vec<[f64; 2]>,
    /// Section rotation per sample, `rot = -3/(2 r^3) * int t * u_axial dt`.
    pub rot: Vec<f64>,
    pub r: f64,
}

/// Planar decomposition of samples `values[k][i]` at section node `i`,
/// axial sample `k`; the normalisation uses `int t^2 dt = 2 r^3 / 3`.
pub fn decompose_plane(
    axial_grid: &[f64],
    values: &[Vec<[f64; 2]>],
    q: &LineQuadrature,
) -> Result<PlaneFrame> {
    if values.len() != axial_grid.len() {
        return Err(Error::Shape(format!(
            "{} layers vs {} axial samples",
            values.len(),
            axial_grid.len()
        )));
    }
    let width = 2.0 * q.r;
    let second_moment = 2.0 * q.r.powi(3) / 3.0;
    let mut mean = Vec::with_capacity(values.len());
    let mut rot = Vec::with_capacity(values.len());
    for layer in values {
        if layer.len() != q.nodes.len() {
            return Err(Error::Shape(format!(
                "layer with {} samples vs {} quadrature nodes",
                layer.len(),
                q.nodes.len()
            )));
        }
        let mut m = [0.0; 2];
        let mut tilt = 0.0;
        for (i, u) in layer.iter().enumerate() {
            let w = q.weights[i];
            m[0] += w * u[0];
            m[1] += w * u[1];
            tilt += w * q.nodes[i] * u[1];
        }
        mean.push([m[0] / width, m[1] / width]);
        rot.push(-tilt / second_moment);
    }
    Ok(PlaneFrame {
        axial_grid: axial_grid.to_vec(),
        mean,
        rot,
        r: q.r,
    })
}

/// Planar elementary displacement at section coordinate `t`, axial sample `k`.
pub fn plane_elementary(frame: &PlaneFrame, k: usize, t: f64) -> [f64; 2] {
    [frame.mean[k][0], frame.mean[k][1] - frame.rot[k] * t]
}

/// Planar warping `u - Ue` on the sample grid.
pub fn plane_warping(
    frame: &PlaneFrame,
    values: &[Vec<[f64; 2]>],
    q: &LineQuadrature,
) -> Result<Vec<Vec<[f64; 2]>>> {
    if values.len() != frame.axial_grid.len() {
        return Err(Error::Shape("layer count mismatch".into()));
    }
    let mut out = Vec::with_capacity(values.len());
    for (k, layer) in values.iter().enumerate() {
        if layer.len() != q.nodes.len() {
            return Err(Error::Shape("nodal count mismatch".into()));
        }
        let mut row = Vec::with_capacity(layer.len());
        for (i, u) in layer.iter().enumerate() {
            let e = plane_elementary(frame, k, q.nodes[i]);
            row.push([u[0] - e[0], u[1] - e[1]]);
        }
        out.push(row);
    }
    Ok(out)
}
