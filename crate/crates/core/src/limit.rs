//! Homogenised limit of the layered structure: plane elasticity in two
//! blocks that share an interface line, coupled by a spring-type
//! transmission condition.  The normal displacement is continuous across
//! the interface (one shared unknown); the tangential components may jump,
//! and the jump is penalised by the spring coefficient while carrying its
//! own load term.  The in-layer displacement profile is reconstructed per
//! interface sample from the clamped-end bending solutions.

use std::sync::Arc;

use crate::bending::{solve_bending, BeamStiffness, BendingSolution, LoadProfile};
use crate::error::Error;
use crate::fem::{
    constrain_system, element_load, element_stiffness, piecewise_linear_l2, stress_at, d_matrix,
    DirichletBc,
};
use crate::mesh::{build_tensor_block, graded_lines, mirrored_lines, uniform_lines, QuadMesh};
use crate::scaling::{LayerScaling, MaterialParams, Regime};
use crate::sparse::{solve_spd, CsrMatrix, SolveStats, TripletMatrix};
use crate::Result;

/// Interface transmission model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceModel {
    /// Elastic coupling of the tangential jump with coefficient `k`.
    Spring(f64),
    /// Perfect bonding (tangential displacement continuous as well).
    Bonded,
}

impl InterfaceModel {
    /// Validated spring model; the coefficient must be positive and finite.
    pub fn spring(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 {
            Ok(InterfaceModel::Spring(k))
        } else {
            Err(Error::Config(format!(
                "spring coefficient must be positive and finite, got {k}"
            )))
        }
    }

    /// Model selected by the scaling regime: critical regimes couple through
    /// the spring coefficient of the beam layer (or an explicit override);
    /// the subcritical regime bonds the blocks.
    pub fn for_scaling(
        s: &LayerScaling,
        beam_young: f64,
        override_k: Option<f64>,
    ) -> Result<Self> {
        match s.regime {
            Regime::Subcritical => Ok(InterfaceModel::Bonded),
            _ => {
                let k = match override_k {
                    Some(v) => v,
                    None => crate::bending::spring_coefficient(s, beam_young)?,
                };
                InterfaceModel::spring(k)
            }
        }
    }
}

/// Resolution of the limit mesh: `nx` uniform intervals across the
/// interface, geometric grading away from it.
#[derive(Debug, Clone)]
pub struct LimitResolution {
    pub nx: usize,
    /// Element height at the interface.
    pub h_fine: f64,
    /// Far-field cap.
    pub h_max: f64,
    pub grading_ratio: f64,
}

impl Default for LimitResolution {
    fn default() -> Self {
        Self {
            nx: 64,
            h_fine: 0.01,
            h_max: 0.125,
            grading_ratio: 1.5,
        }
    }
}

/// Two blocks sharing the interface grid; tangential interface unknowns are
/// duplicated per side, normal ones shared.
pub struct LimitMesh {
    pub lower: QuadMesh,
    pub upper: QuadMesh,
    /// Per lower-mesh node: global dof of `(u1, u2)`.
    pub dof_l: Vec<[usize; 2]>,
    pub dof_u: Vec<[usize; 2]>,
    pub n_dofs: usize,
    /// Lower-mesh node ids on the interface, sorted by x.
    pub iface_l: Vec<usize>,
    pub iface_u: Vec<usize>,
    pub interface_x: Vec<f64>,
    pub bonded: bool,
}

/// Build the two-block mesh over `omega x (-depth, 0)` and
/// `omega x (0, depth)` with a shared interface grid at `y = 0`.
pub fn build_limit_mesh(
    omega: (f64, f64),
    depth: f64,
    res: &LimitResolution,
    model: &InterfaceModel,
) -> Result<LimitMesh> {
    if !(omega.1 > omega.0) || !(depth > 0.0) {
        return Err(Error::Domain("degenerate limit domain".into()));
    }
    if res.nx == 0 || !(res.h_fine > 0.0) {
        return Err(Error::Resolution("limit mesh resolution must be positive".into()));
    }
    let xs = uniform_lines(omega.0, omega.1, res.nx);
    let ys_up = graded_lines(0.0, depth, res.h_fine, res.h_max, res.grading_ratio);
    let ys_lo = mirrored_lines(&ys_up, -depth, 0.0);
    let lower = build_tensor_block(xs.clone(), ys_lo)?;
    let upper = build_tensor_block(xs.clone(), ys_up)?;
    let nvx = xs.len();
    let ny_l = lower.ys.len() - 1;
    let iface_l: Vec<usize> = (0..nvx).map(|ix| ix + ny_l * nvx).collect();
    let iface_u: Vec<usize> = (0..nvx).collect();
    let bonded = matches!(model, InterfaceModel::Bonded);

    let mut c = 0usize;
    let dof_l: Vec<[usize; 2]> = (0..lower.n_nodes())
        .map(|_| {
            let d = [c, c + 1];
            c += 2;
            d
        })
        .collect();
    let mut dof_u = vec![[usize::MAX; 2]; upper.n_nodes()];
    for i in 0..upper.n_nodes() {
        if i < nvx {
            // Interface row: normal shared, tangential per model.
            let pair = dof_l[iface_l[i]];
            let u1 = if bonded {
                pair[0]
            } else {
                let d = c;
                c += 1;
                d
            };
            dof_u[i] = [u1, pair[1]];
        } else {
            dof_u[i] = [c, c + 1];
            c += 2;
        }
    }
    Ok(LimitMesh {
        lower,
        upper,
        dof_l,
        dof_u,
        n_dofs: c,
        iface_l,
        iface_u,
        interface_x: xs,
        bonded,
    })
}

/// Loads entering through the interface: an effective surface load on the
/// minus-side tangential trace and the shared normal trace, and a load
/// paired with the tangential jump.  All are functions of x, integrated as
/// piecewise-linear data.
#[derive(Clone)]
pub struct InterfaceLoad {
    pub fbar_t: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub fbar_n: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl InterfaceLoad {
    pub fn zero() -> Self {
        Self::constant(0.0, 0.0, 0.0)
    }

    pub fn constant(fbar_t: f64, fbar_n: f64, g: f64) -> Self {
        Self {
            fbar_t: Arc::new(move |_| fbar_t),
            fbar_n: Arc::new(move |_| fbar_n),
            g: Arc::new(move |_| g),
        }
    }
}

/// Assembled limit system, kept in parts so interface and block
/// contributions can be probed separately.
pub struct LimitSystem {
    pub n_dofs: usize,
    k_lower: TripletMatrix,
    k_upper: TripletMatrix,
    k_iface: TripletMatrix,
    pub f_lower: Vec<f64>,
    pub f_upper: Vec<f64>,
    pub f_iface: Vec<f64>,
    pub model: InterfaceModel,
}

impl LimitSystem {
    pub fn k_lower(&self) -> CsrMatrix {
        self.k_lower.to_csr()
    }

    pub fn k_upper(&self) -> CsrMatrix {
        self.k_upper.to_csr()
    }

    pub fn k_interface(&self) -> CsrMatrix {
        self.k_iface.to_csr()
    }

    /// Combined stiffness.
    pub fn matrix(&self) -> CsrMatrix {
        let mut all = TripletMatrix::new(self.n_dofs);
        for part in [&self.k_lower, &self.k_upper, &self.k_iface] {
            all.extend_from(part);
        }
        all.to_csr()
    }

    /// Combined load vector.
    pub fn load(&self) -> Vec<f64> {
        (0..self.n_dofs)
            .map(|i| self.f_lower[i] + self.f_upper[i] + self.f_iface[i])
            .collect()
    }
}

/// Consistent nodal loads of piecewise-linear data on one interface
/// segment: `h/6 (2 f_i + f_j)` and `h/6 (f_i + 2 f_j)`.
fn segment_load(h: f64, fi: f64, fj: f64) -> (f64, f64) {
    (h / 6.0 * (2.0 * fi + fj), h / 6.0 * (fi + 2.0 * fj))
}

/// Assemble the limit problem: block elasticity, the spring term on the
/// tangential jump, and all load contributions.
pub fn assemble_limit(
    lm: &LimitMesh,
    mat: &MaterialParams,
    model: &InterfaceModel,
    bulk_load: &dyn Fn([f64; 2]) -> [f64; 2],
    iload: &InterfaceLoad,
) -> Result<LimitSystem> {
    if let InterfaceModel::Spring(k) = model {
        if !(k.is_finite() && *k > 0.0) {
            return Err(Error::Config(format!("invalid spring coefficient {k}")));
        }
        if lm.bonded {
            return Err(Error::Config(
                "spring model on a mesh built with bonded interface dofs".into(),
            ));
        }
    }
    let n = lm.n_dofs;
    let d = d_matrix(mat);
    let mut k_lower = TripletMatrix::new(n);
    let mut k_upper = TripletMatrix::new(n);
    let mut k_iface = TripletMatrix::new(n);
    let mut f_lower = vec![0.0; n];
    let mut f_upper = vec![0.0; n];
    let mut f_iface = vec![0.0; n];

    for (mesh, dofs, kk, ff) in [
        (&lm.lower, &lm.dof_l, &mut k_lower, &mut f_lower),
        (&lm.upper, &lm.dof_u, &mut k_upper, &mut f_upper),
    ] {
        for e in 0..mesh.n_elems() {
            let coords = mesh.elem_coords(e);
            let ke = element_stiffness(&coords, &d)?;
            let fe = element_load(&coords, &bulk_load);
            let ids = mesh.elems[e];
            let edofs: Vec<usize> = ids
                .iter()
                .flat_map(|&nid| [dofs[nid][0], dofs[nid][1]])
                .collect();
            for i in 0..8 {
                ff[edofs[i]] += fe[i];
                for j in 0..8 {
                    kk.push(edofs[i], edofs[j], ke[i][j]);
                }
            }
        }
    }

    // Interface terms on the shared grid.
    let xs = &lm.interface_x;
    for w in 0..xs.len() - 1 {
        let (xi, xj) = (xs[w], xs[w + 1]);
        let h = xj - xi;
        let (li, lj) = (lm.iface_l[w], lm.iface_l[w + 1]);
        let (ui, uj) = (lm.iface_u[w], lm.iface_u[w + 1]);
        // Minus-side tangential effective load.
        let (a, b) = segment_load(h, (iload.fbar_t)(xi), (iload.fbar_t)(xj));
        f_iface[lm.dof_l[li][0]] += a;
        f_iface[lm.dof_l[lj][0]] += b;
        // Shared normal effective load.
        let (a, b) = segment_load(h, (iload.fbar_n)(xi), (iload.fbar_n)(xj));
        f_iface[lm.dof_l[li][1]] += a;
        f_iface[lm.dof_l[lj][1]] += b;
        // Jump load: +g on the plus side, -g on the minus side.
        if !lm.bonded {
            let (a, b) = segment_load(h, (iload.g)(xi), (iload.g)(xj));
            f_iface[lm.dof_u[ui][0]] += a;
            f_iface[lm.dof_u[uj][0]] += b;
            f_iface[lm.dof_l[li][0]] -= a;
            f_iface[lm.dof_l[lj][0]] -= b;
        }
        if let InterfaceModel::Spring(k) = model {
            // h/6 [[2,1],[1,2]] on the jump pair.
            let m = [[2.0 * h / 6.0, h / 6.0], [h / 6.0, 2.0 * h / 6.0]];
            let plus = [lm.dof_u[ui][0], lm.dof_u[uj][0]];
            let minus = [lm.dof_l[li][0], lm.dof_l[lj][0]];
            for a in 0..2 {
                for b in 0..2 {
                    let v = k * m[a][b];
                    k_iface.push(plus[a], plus[b], v);
                    k_iface.push(minus[a], minus[b], v);
                    k_iface.push(plus[a], minus[b], -v);
                    k_iface.push(minus[a], plus[b], -v);
                }
            }
        }
    }
    Ok(LimitSystem {
        n_dofs: n,
        k_lower,
        k_upper,
        k_iface,
        f_lower,
        f_upper,
        f_iface,
        model: *model,
    })
}

/// Limit solution: both block fields and the tangential interface data.
pub struct LimitSolution {
    pub u_lower: Vec<[f64; 2]>,
    pub u_upper: Vec<[f64; 2]>,
    pub interface_x: Vec<f64>,
    /// Minus-side tangential trace.
    pub trace_u1_minus: Vec<f64>,
    /// Plus-side tangential trace.
    pub trace_u1_plus: Vec<f64>,
    /// Shared normal trace.
    pub trace_u2: Vec<f64>,
    /// Tangential jump `u1(plus) - u1(minus)` per interface sample.
    pub jump_u1: Vec<f64>,
    pub work: f64,
    pub stats: SolveStats,
    /// Raw dof vector (for weak-residual probes).
    pub x: Vec<f64>,
}

impl LimitSolution {
    /// Linear interpolation of the tangential jump at abscissa `x`.
    pub fn jump_at(&self, x: f64) -> f64 {
        interp_linear(&self.interface_x, &self.jump_u1, x)
    }

    /// Exact L2 norm of the piecewise-linear jump.
    pub fn jump_l2(&self) -> f64 {
        piecewise_linear_l2(&self.interface_x, &self.jump_u1)
    }

    /// Exact integral of the piecewise-linear jump.
    pub fn jump_integral(&self) -> f64 {
        let mut acc = 0.0;
        for w in 0..self.interface_x.len() - 1 {
            let h = self.interface_x[w + 1] - self.interface_x[w];
            acc += 0.5 * h * (self.jump_u1[w] + self.jump_u1[w + 1]);
        }
        acc
    }
}

pub(crate) fn interp_linear(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return vs[0];
    }
    if x >= *xs.last().unwrap() {
        return *vs.last().unwrap();
    }
    let k = match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
        Ok(k) => return vs[k],
        Err(k) => k - 1,
    };
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    vs[k] + t * (vs[k + 1] - vs[k])
}

/// Solve the limit problem with the bottom edge of the lower block clamped.
pub fn solve_limit(lm: &LimitMesh, sys: &LimitSystem, tol: f64) -> Result<LimitSolution> {
    let full = sys.matrix();
    let load = sys.load();
    let mut bc = DirichletBc::new(lm.n_dofs);
    for &nid in &lm.lower.gamma {
        bc.fix_dof(lm.dof_l[nid][0], 0.0);
        bc.fix_dof(lm.dof_l[nid][1], 0.0);
    }
    let (k, rhs) = constrain_system(&full, &load, &bc);
    let (x, stats) = solve_spd(&k, &rhs, tol)?;
    let work = x.iter().zip(&load).map(|(a, b)| a * b).sum();
    let u_lower: Vec<[f64; 2]> = lm.dof_l.iter().map(|d| [x[d[0]], x[d[1]]]).collect();
    let u_upper: Vec<[f64; 2]> = lm.dof_u.iter().map(|d| [x[d[0]], x[d[1]]]).collect();
    let trace_u1_minus: Vec<f64> = lm.iface_l.iter().map(|&n| u_lower[n][0]).collect();
    let trace_u1_plus: Vec<f64> = lm.iface_u.iter().map(|&n| u_upper[n][0]).collect();
    let trace_u2: Vec<f64> = lm.iface_l.iter().map(|&n| u_lower[n][1]).collect();
    let jump_u1: Vec<f64> = trace_u1_plus
        .iter()
        .zip(&trace_u1_minus)
        .map(|(p, m)| p - m)
        .collect();
    Ok(LimitSolution {
        u_lower,
        u_upper,
        interface_x: lm.interface_x.clone(),
        trace_u1_minus,
        trace_u1_plus,
        trace_u2,
        jump_u1,
        work,
        stats,
        x,
    })
}

/// Stress at a point of the limit solution (lower block for `y <= 0`).
pub fn limit_stress_at(
    lm: &LimitMesh,
    mat: &MaterialParams,
    sol: &LimitSolution,
    p: [f64; 2],
) -> Option<[f64; 3]> {
    if p[1] <= 0.0 {
        stress_at(&lm.lower, mat, mat, &sol.u_lower, p)
    } else {
        stress_at(&lm.upper, mat, mat, &sol.u_upper, p)
    }
}

/// In-layer displacement profiles reconstructed per interface sample from
/// the clamped-end bending problem with the interface traces as end data.
pub fn reconstruct_layer(
    sol: &LimitSolution,
    load: &LoadProfile,
    stiffness: &BeamStiffness,
    n_grid: usize,
) -> Result<Vec<BendingSolution>> {
    sol.interface_x
        .iter()
        .enumerate()
        .map(|(k, _)| {
            solve_bending(
                load,
                sol.trace_u1_minus[k],
                sol.trace_u1_plus[k],
                stiffness,
                n_grid,
            )
        })
        .collect()
}
