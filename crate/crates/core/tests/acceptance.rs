//! Acceptance gate: one test per advertised capability of the toolkit.
//!
//! Every tolerance is pinned in the assertion that enforces it, and each
//! test prints a single `PASS <capability>: ...` line with the measured
//! numbers once its checks hold.  Wall-clock budgets are printed in every
//! build and enforced in release builds, where timings are meaningful.
//!
//! Oracles are kept independent of the library internals: the rod Green
//! function is checked against a pentadiagonal finite-difference solver
//! written here, L2 errors use a local quadrature over the public mesh
//! data, and the unfolding measure identities compare against closed-form
//! integrals computed by hand in this file.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use layerbeam::beam::{
    check_moments, decompose, elementary_displacement, seminorms, warping, BeamField,
    SectionQuadrature,
};
use layerbeam::bending::{
    green_xi, hermite_extension_printed, hermite_interface_energy, kernel_k_signed,
    kernel_sign_report, solve_bending, spring_coefficient, spring_coefficient_hermite,
    BeamStiffness, KernelSign, LoadProfile,
};
use layerbeam::experiment::{run_convergence, ConvergenceReport, StudyConfig};
use layerbeam::fem::{assemble, solve, strain_energy, DirichletBc, PlaneLoad};
use layerbeam::limit::{
    assemble_limit, build_limit_mesh, solve_limit, InterfaceLoad, InterfaceModel, LimitResolution,
};
use layerbeam::mesh::{build_block_mesh, build_structure_mesh, LayerFill, MeshResolution, QuadMesh};
use layerbeam::scaling::{derive_geometry, MaterialParams, Rect2};
use layerbeam::unfolding::{
    cutoff_phi, unfold_t, unfold_tprime, unfolded_strain, Bump, CellGrid, RodRule,
};

// ---------------------------------------------------------------------------
// Shared helpers.
// ---------------------------------------------------------------------------

/// Print the elapsed wall time; enforce the budget only in release builds.
fn enforce_budget(name: &str, t0: Instant, budget_seconds: f64) {
    let elapsed = t0.elapsed().as_secs_f64();
    println!("[{name}] wall time {elapsed:.2} s (budget {budget_seconds:.0} s)");
    if !cfg!(debug_assertions) {
        assert!(
            elapsed <= budget_seconds,
            "{name}: {elapsed:.2} s exceeded the {budget_seconds:.0} s budget"
        );
    }
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_86,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_86,
];

/// Composite 4-point Gauss quadrature with `panels` uniform panels.
fn gauss4(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL4_X.iter().zip(GL4_W.iter()) {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    acc * 0.5 * h
}

/// Least-squares slope of `ys` against `xs`.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Gaussian elimination for a pentadiagonal system stored as
/// `band[i][k]` = entry in column `i + k - 2`.  No pivoting: the
/// fourth-order clamped-rod stencil assembled below eliminates stably.
fn solve_pentadiagonal(mut band: Vec<[f64; 5]>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = band.len();
    for i in 0..n {
        let piv = band[i][2];
        assert!(piv.abs() > 1e-300, "pentadiagonal pivot vanished at row {i}");
        for r in 1..=2usize {
            let row = i + r;
            if row >= n {
                break;
            }
            let factor = band[row][2 - r] / piv;
            if factor != 0.0 {
                for c in 0..=2usize {
                    band[row][2 - r + c] -= factor * band[i][2 + c];
                }
                rhs[row] -= factor * rhs[i];
            }
            band[row][2 - r] = 0.0;
        }
    }
    let mut u = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for c in 1..=2usize {
            if i + c < n {
                s -= band[i][2 + c] * u[i + c];
            }
        }
        u[i] = s / band[i][2];
    }
    u
}

/// Finite-difference Green function of `w'''' = delta_{x_j}` with clamped
/// ends, on `n` uniform nodes: interior rows use the five-point fourth
/// difference, the end rows impose zero value and a second-order one-sided
/// zero slope.  The unit point load becomes `1/h` at node `j`.
fn fd_clamped_green(n: usize, j: usize) -> Vec<f64> {
    assert!(j >= 2 && j <= n - 3, "source must be interior");
    let h = 1.0 / (n - 1) as f64;
    let mut band = vec![[0.0f64; 5]; n];
    let mut rhs = vec![0.0f64; n];
    band[0][2] = 1.0;
    band[1] = [0.0, -3.0, 4.0, -1.0, 0.0];
    for row in band.iter_mut().take(n - 2).skip(2) {
        *row = [1.0, -4.0, 6.0, -4.0, 1.0];
    }
    band[n - 2] = [0.0, 1.0, -4.0, 3.0, 0.0];
    band[n - 1][2] = 1.0;
    rhs[j] = h * h * h; // h^4 * (1/h)
    solve_pentadiagonal(band, rhs)
}

/// Random polynomial of total degree <= 3 in the scale-free coordinates
/// `(x1/r, x2/r, x3/d)`; 20 monomials per component.
fn eval_cubic(coef: &[[f64; 20]; 3], x: [f64; 3], r: f64, d: f64) -> [f64; 3] {
    let sx = [x[0] / r, x[1] / r, x[2] / d];
    let mut u = [0.0; 3];
    for (c, row) in coef.iter().enumerate() {
        let mut idx = 0;
        for a in 0..4_i32 {
            for b in 0..4 - a {
                for g in 0..4 - a - b {
                    u[c] += row[idx] * sx[0].powi(a) * sx[1].powi(b) * sx[2].powi(g);
                    idx += 1;
                }
            }
        }
    }
    u
}

fn random_cubic(rng: &mut ChaCha8Rng) -> [[f64; 20]; 3] {
    let mut coef = [[0.0f64; 20]; 3];
    for row in coef.iter_mut() {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    coef
}

/// Boundary node ids of a tensor-product block mesh.
fn boundary_nodes(mesh: &QuadMesh) -> Vec<usize> {
    let nvx = mesh.xs.len();
    let nvy = mesh.ys.len();
    let mut out = Vec::new();
    for iy in 0..nvy {
        for ix in 0..nvx {
            if ix == 0 || ix + 1 == nvx || iy == 0 || iy + 1 == nvy {
                out.push(ix + iy * nvx);
            }
        }
    }
    out
}

/// L2 error of a nodal displacement field against an exact solution, by
/// 2x2 Gauss quadrature of the bilinear interpolant on each element.
fn l2_error_bilinear(mesh: &QuadMesh, u: &[[f64; 2]], exact: &dyn Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let g = 1.0 / 3.0f64.sqrt();
    let pts = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let mut acc = 0.0;
    for e in 0..mesh.n_elems() {
        let ids = mesh.elems[e];
        let xy = mesh.elem_coords(e);
        let area = ((xy[1][0] - xy[0][0]) * (xy[3][1] - xy[0][1])).abs();
        for &(xi, eta) in &pts {
            let nsh = [
                0.25 * (1.0 - xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 + eta),
                0.25 * (1.0 - xi) * (1.0 + eta),
            ];
            let mut xg = [0.0; 2];
            let mut ug = [0.0; 2];
            for a in 0..4 {
                for c in 0..2 {
                    xg[c] += nsh[a] * xy[a][c];
                    ug[c] += nsh[a] * u[ids[a]][c];
                }
            }
            let ue = exact(xg);
            acc += 0.25 * area * ((ug[0] - ue[0]).powi(2) + (ug[1] - ue[1]).powi(2));
        }
    }
    acc.sqrt()
}

fn zero_plane_load() -> PlaneLoad {
    PlaneLoad {
        bulk: Arc::new(|_| [0.0, 0.0]),
        beam: Arc::new(|_| [0.0, 0.0]),
    }
}

// ---------------------------------------------------------------------------
// Rod Green function.
// ---------------------------------------------------------------------------

#[test]
fn green_function_closed_form_symmetry_and_fd_oracle() {
    let t0 = Instant::now();
    let mid_err = (green_xi(0.5, 0.5).unwrap() - 1.0 / 192.0).abs();
    assert!(mid_err <= 1e-12, "midpoint value off by {mid_err:.3e}");
    // Clamped end values must come out as exact zeros.
    for k in 0..=40 {
        let y = k as f64 / 40.0;
        assert_eq!(green_xi(0.0, y).unwrap(), 0.0, "left end at y={y}");
        assert_eq!(green_xi(1.0, y).unwrap(), 0.0, "right end at y={y}");
    }
    // Symmetry in the two arguments over random pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(0x51AB_2201);
    let mut worst_sym: f64 = 0.0;
    for _ in 0..10_000 {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        worst_sym = worst_sym.max((green_xi(a, b).unwrap() - green_xi(b, a).unwrap()).abs());
    }
    assert!(worst_sym <= 1e-12, "symmetry defect {worst_sym:.3e}");
    // Independent finite-difference oracle on 2001 nodes, five sources.
    let n = 2001;
    let mut worst_fd: f64 = 0.0;
    for &j in &[300usize, 600, 1000, 1240, 1700] {
        let w = fd_clamped_green(n, j);
        let y = j as f64 / (n - 1) as f64;
        for (i, &wi) in w.iter().enumerate() {
            let x = i as f64 / (n - 1) as f64;
            worst_fd = worst_fd.max((wi - green_xi(x, y).unwrap()).abs());
        }
    }
    assert!(worst_fd <= 1e-6, "finite-difference oracle defect {worst_fd:.3e}");
    println!(
        "PASS rod Green function: midpoint {mid_err:.1e}, ends exact, \
         symmetry {worst_sym:.1e} over 1e4 pairs, fd oracle {worst_fd:.1e}"
    );
    enforce_budget("rod Green function", t0, 1.0);
}

// ---------------------------------------------------------------------------
// Interface kernel.
// ---------------------------------------------------------------------------

#[test]
fn interface_kernel_smooth_part_identity_and_sign_report() {
    let t0 = Instant::now();
    // Own expansion of the second derivative of the Green function:
    // ramp plus the polynomial part differentiated by hand.
    let d2_mine = |x: f64, y: f64| {
        let ramp = if x > y { x - y } else { 0.0 };
        let omy = 1.0 - y;
        ramp + omy * omy * (y - 2.0 * y * x - x)
    };
    let mut worst_alg: f64 = 0.0;
    let mut worst_neg: f64 = 0.0;
    for ix in 0..=80 {
        let x = ix as f64 / 80.0;
        for iy in 0..=80 {
            let y = iy as f64 / 80.0;
            let (delta_w, smooth) = kernel_k_signed(x, y, KernelSign::WeakForm).unwrap();
            assert!(
                (delta_w - x * x * (3.0 - 2.0 * x)).abs() <= 1e-15,
                "delta weight at ({x},{y})"
            );
            let expect = -6.0 * (1.0 - 2.0 * x) * d2_mine(x, y);
            worst_alg = worst_alg.max((smooth - expect).abs());
            let (_, flipped) = kernel_k_signed(x, y, KernelSign::Flipped).unwrap();
            worst_neg = worst_neg.max((flipped + smooth).abs());
        }
    }
    assert!(worst_alg <= 1e-12, "smooth-part expansion defect {worst_alg:.3e}");
    assert_eq!(worst_neg, 0.0, "sign variants must be exact negatives");
    // Second finite differences of the Green function, away from the kink.
    let h = 1e-4;
    let mut worst_fd: f64 = 0.0;
    for ix in 1..200 {
        let x = ix as f64 / 200.0;
        for iy in 0..=200 {
            let y = iy as f64 / 200.0;
            if (x - y).abs() <= 2.0 * h {
                continue;
            }
            let fd2 = (green_xi(x + h, y).unwrap() - 2.0 * green_xi(x, y).unwrap()
                + green_xi(x - h, y).unwrap())
                / (h * h);
            let (_, smooth) = kernel_k_signed(x, y, KernelSign::WeakForm).unwrap();
            worst_fd = worst_fd.max((smooth + 6.0 * (1.0 - 2.0 * x) * fd2).abs());
        }
    }
    assert!(worst_fd <= 1e-6, "kernel vs second differences {worst_fd:.3e}");
    // Emit the sign-discrepancy report and pin its conclusions: the two
    // conventions disagree pointwise at full scale, are exact negatives,
    // and the disagreement integrates to zero in the axial variable, so
    // the interface weak form closes under both.
    let report = kernel_sign_report();
    println!("{report}");
    assert!(report.smooth_scale > 0.1, "smooth part is O(1), got {}", report.smooth_scale);
    assert!(
        report.variants_negate_defect <= 1e-12 * report.smooth_scale,
        "negation defect {:.3e}",
        report.variants_negate_defect
    );
    assert!(
        report.smooth_x3_integral_max <= 1e-10 * report.smooth_scale,
        "axial integral of the smooth part {:.3e}",
        report.smooth_x3_integral_max
    );
    assert!(report.weakform_residual <= 1e-8, "weak-form residual {:.3e}", report.weakform_residual);
    assert!(report.flipped_residual <= 1e-8, "flipped residual {:.3e}", report.flipped_residual);
    println!(
        "PASS interface kernel: expansion {worst_alg:.1e}, fd check {worst_fd:.1e}, \
         report residuals ({:.1e}, {:.1e})",
        report.weakform_residual, report.flipped_residual
    );
    enforce_budget("interface kernel", t0, 10.0);
}

// ---------------------------------------------------------------------------
// Interface spring constant.
// ---------------------------------------------------------------------------

#[test]
fn spring_constant_hermite_energy_and_sign_discrepancy() {
    let t0 = Instant::now();
    // Energy assembly reproduces 3 pi kappa0^4 / kappa1^3 * E for two
    // independent parameter sets.
    for &(k0, k1, em) in &[(1.0, 1.0, 2.0e11), (1.3, 0.8, 7.0e10)] {
        let st = BeamStiffness::new(k0, k1, em);
        let expect = 3.0 * PI * k0.powi(4) / k1.powi(3) * em;
        let k_energy = hermite_interface_energy((0.0, 1.0), (0.0, 1.0), &st, false);
        assert!(
            (k_energy - expect).abs() <= 1e-12 * expect,
            "energy route for ({k0},{k1},{em:.1e}): {k_energy:.6e} vs {expect:.6e}"
        );
    }
    // The moment of the lift curvature shape that drives the closed form.
    let third = gauss4(|x| (1.0 - 2.0 * x) * (1.0 - 2.0 * x), 0.0, 1.0, 8);
    assert!((third - 1.0 / 3.0).abs() <= 1e-15, "curvature-shape moment {third:.16}");
    // Closed form and energy route agree on a derived layer geometry.
    let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
    let em = 2.0e11;
    let k_closed = spring_coefficient(&s, em).unwrap();
    let k_herm = spring_coefficient_hermite(&s, em).unwrap();
    let expect = 3.0 * PI * em;
    assert!((k_closed - expect).abs() <= 1e-12 * expect);
    assert!((k_herm - k_closed).abs() <= 1e-12 * k_closed);
    // Bilinear interface form on the end-data basis (1,0), (0,1): the
    // corrected lift couples through the jump, k * [[1,-1],[-1,1]].
    let st = BeamStiffness::new(1.0, 1.0, em);
    let k = expect;
    let basis = [(1.0, 0.0), (0.0, 1.0)];
    let mut corrected = [[0.0f64; 2]; 2];
    let mut flipped = [[0.0f64; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            corrected[a][b] = hermite_interface_energy(basis[a], basis[b], &st, false);
            flipped[a][b] = hermite_interface_energy(basis[a], basis[b], &st, true);
        }
    }
    let jump_form = [[k, -k], [-k, k]];
    let mut worst_good: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            worst_good = worst_good.max((corrected[a][b] - jump_form[a][b]).abs());
        }
    }
    assert!(worst_good <= 1e-12 * k, "corrected lift vs jump form {worst_good:.3e}");
    // The sign-flipped lift FAILS the jump form: its off-diagonal comes out
    // +k instead of -k (it couples the trace sums), and it violates the end
    // condition it is supposed to interpolate.
    let off_defect = (flipped[0][1] - jump_form[0][1]).abs();
    assert!(
        off_defect >= 1.9 * k,
        "flipped lift unexpectedly matches the jump form (defect {off_defect:.3e})"
    );
    assert!(
        (flipped[0][1] - k).abs() <= 1e-12 * k,
        "flipped off-diagonal couples sums: {:.6e}",
        flipped[0][1]
    );
    let bad = hermite_extension_printed(0.0, 1.0);
    assert_eq!(bad.value(1.0), -1.0, "flipped lift must miss the end value 1");
    println!(
        "PASS interface spring constant: k = {k_closed:.6e} (both routes, defect {:.1e}); \
         sign-flipped assembly fails the jump form by {off_defect:.2e} as required",
        (k_herm - k_closed).abs()
    );
    enforce_budget("interface spring constant", t0, 10.0);
}

// ---------------------------------------------------------------------------
// Clamped bending solver.
// ---------------------------------------------------------------------------

#[test]
fn clamped_bending_uniform_load_and_weak_residual() {
    let t0 = Instant::now();
    let st = BeamStiffness::new(1.0, 1.0, 1.0); // rigidity pi/4
    let load = LoadProfile::constant(1.0);
    let sol = solve_bending(&load, 0.0, 0.0, &st, 201).unwrap();
    let expect_mid = (4.0 / PI) / 384.0;
    let mid_err = (sol.value(0.5) - expect_mid).abs();
    assert!(mid_err <= 1e-10, "uniform-load midpoint error {mid_err:.3e}");
    let s0 = sol.slope(0.0).abs();
    let s1 = sol.slope(1.0).abs();
    assert!(s0 <= 1e-8 && s1 <= 1e-8, "end slopes ({s0:.3e}, {s1:.3e})");
    // Boundary traces are reproduced exactly, including under load.
    let sol2 = solve_bending(&load, 0.3, -0.7, &st, 101).unwrap();
    assert_eq!(sol2.value(0.0), 0.3);
    assert_eq!(sol2.value(1.0), -0.7);
    // Weak form over a 50-dimensional clamped test basis
    // phi_k = (x (1-x))^2 cos(k pi x), with analytic second derivatives.
    let rigidity = PI / 4.0;
    let mut worst: f64 = 0.0;
    for k in 0..50u32 {
        let kf = k as f64 * PI;
        let w = |x: f64| {
            let t = x * (1.0 - x);
            t * t
        };
        let wp = |x: f64| 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
        let wpp = |x: f64| {
            let a = 1.0 - 2.0 * x;
            2.0 * (a * a - 2.0 * x * (1.0 - x))
        };
        let c = |x: f64| (kf * x).cos();
        let cp = |x: f64| -kf * (kf * x).sin();
        let cpp = |x: f64| -kf * kf * (kf * x).cos();
        let phidd = |x: f64| wpp(x) * c(x) + 2.0 * wp(x) * cp(x) + w(x) * cpp(x);
        let a_term = rigidity * gauss4(|x| sol.curvature_at(x) * phidd(x), 0.0, 1.0, 400);
        let f_term = gauss4(|x| w(x) * c(x), 0.0, 1.0, 400);
        worst = worst.max((a_term - f_term).abs());
    }
    assert!(worst <= 1e-8, "weak-form residual {worst:.3e} over 50 test functions");
    println!(
        "PASS clamped bending: midpoint {mid_err:.1e}, end slopes ({s0:.1e}, {s1:.1e}), \
         exact traces, weak residual {worst:.1e}"
    );
    enforce_budget("clamped bending", t0, 1.0);
}

// ---------------------------------------------------------------------------
// Rod decomposition.
// ---------------------------------------------------------------------------

#[test]
fn rod_decomposition_identities_and_scaling_slopes() {
    let t0 = Instant::now();
    let q = SectionQuadrature::default_disc(0.3).unwrap();
    // Rigid motion a + b x x: zero warping, rotation recovered exactly.
    let a = [0.4, -0.2, 0.7];
    let b = [0.3, -0.5, 0.2];
    let rigid = BeamField::sample(&q, 2.0, 9, |x| {
        [
            a[0] + b[1] * x[2] - b[2] * x[1],
            a[1] + b[2] * x[0] - b[0] * x[2],
            a[2] + b[0] * x[1] - b[1] * x[0],
        ]
    })
    .unwrap();
    let frame = decompose(&rigid, &q).unwrap();
    let warp = warping(&rigid, &frame, &q).unwrap();
    let warp_max = warp
        .values
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(warp_max <= 1e-13, "rigid motion left warping {warp_max:.3e}");
    let mut rot_err: f64 = 0.0;
    for rk in &frame.rot {
        for c in 0..3 {
            rot_err = rot_err.max((rk[c] - b[c]).abs());
        }
    }
    assert!(rot_err <= 1e-13, "recovered rotation off by {rot_err:.3e}");
    // Moment identities and exact reconstruction for 200 random fields of
    // total degree <= 3.
    let mut rng = ChaCha8Rng::seed_from_u64(0xDEC0_5EED);
    let mut worst_mom: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for _ in 0..200 {
        let coef = random_cubic(&mut rng);
        let field = BeamField::sample(&q, 1.5, 7, |x| eval_cubic(&coef, x, 0.3, 1.5)).unwrap();
        let fr = decompose(&field, &q).unwrap();
        let wp = warping(&field, &fr, &q).unwrap();
        let scale = field
            .values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        for res in check_moments(&wp, &q).unwrap() {
            worst_mom = worst_mom.max(res.max_abs() / scale);
        }
        for (k, layer) in field.values.iter().enumerate() {
            let x3 = field.axial_grid[k];
            for (i, u) in layer.iter().enumerate() {
                let e =
                    elementary_displacement(&fr, [q.nodes[i][0], q.nodes[i][1], x3]).unwrap();
                for c in 0..3 {
                    worst_rec = worst_rec.max(((e[c] + wp.values[k][i][c]) - u[c]).abs() / scale);
                }
            }
        }
    }
    assert!(worst_mom <= 1e-12, "warping moments {worst_mom:.3e} of field scale");
    assert!(worst_rec <= 1e-14, "reconstruction defect {worst_rec:.3e} of field scale");
    // Slenderness scaling of the seminorm ratios: reusing fixed shape
    // coefficients across geometric scales with d = 10 r, the log-log
    // slopes of max(warp/strain) and max(rot-rate r^2/strain) must come
    // out 1 and 0.
    let shapes: Vec<[[f64; 20]; 3]> = (0..200).map(|_| random_cubic(&mut rng)).collect();
    let scales: Vec<f64> = (0..5).map(|k| 1e-2 * 10f64.powf(-0.5 * k as f64)).collect();
    let mut log_r = Vec::new();
    let mut log_warp = Vec::new();
    let mut log_rot = Vec::new();
    for &r in &scales {
        let d = 10.0 * r;
        let qs = SectionQuadrature::default_disc(r).unwrap();
        let mut mw: f64 = 0.0;
        let mut mr: f64 = 0.0;
        for coef in &shapes {
            let field = BeamField::sample(&qs, d, 9, |x| eval_cubic(coef, x, r, d)).unwrap();
            let fr = decompose(&field, &qs).unwrap();
            let sm = seminorms(&field, &fr, &qs).unwrap();
            if sm.strain_l2 < 1e-300 {
                continue;
            }
            mw = mw.max(sm.warp_l2 / sm.strain_l2);
            mr = mr.max(sm.d_rot_l2 * r * r / sm.strain_l2);
        }
        log_r.push(r.ln());
        log_warp.push(mw.ln());
        log_rot.push(mr.ln());
    }
    let warp_slope = fit_slope(&log_r, &log_warp);
    let rot_slope = fit_slope(&log_r, &log_rot);
    assert!(
        (warp_slope - 1.0).abs() <= 0.15,
        "warp/strain ratio slope {warp_slope:.3} (want 1 +- 0.15)"
    );
    assert!(
        rot_slope.abs() <= 0.15,
        "rot-rate ratio slope {rot_slope:.3} (want 0 +- 0.15)"
    );
    println!(
        "PASS rod decomposition: rigid warp {warp_max:.1e}, moments {worst_mom:.1e}, \
         reconstruction {worst_rec:.1e}, scaling slopes ({warp_slope:.2}, {rot_slope:.2})"
    );
    enforce_budget("rod decomposition", t0, 10.0);
}

// ---------------------------------------------------------------------------
// Periodic unfolding.
// ---------------------------------------------------------------------------

#[test]
fn unfolding_integral_commutation_strain_and_cutoff() {
    let t0 = Instant::now();
    // Measure identity of the rod unfolding against integrals computed by
    // hand: interior cells of the 0.25-periodic grid on the unit square
    // cover [1/8, 7/8]^2.
    let grid = CellGrid::build(Rect2::new(0.0, 1.0, 0.0, 1.0), 0.25).unwrap();
    let mg = grid.macro_quadrature(3).unwrap();
    let (r, delta) = (0.02, 0.1);
    let rule = RodRule::default_rule().unwrap();
    let phi = |s: [f64; 2], x: [f64; 3]| s[0] * s[1] * s[1] * (x[0] * x[0] + x[2]);
    let unf = unfold_tprime(&grid, &mg, r, delta, &rule, phi);
    assert_eq!(unf.max_abs_on_boundary_layer(), 0.0);
    let lhs = r * r * delta * unf.integral();
    let (lo, hi) = (0.125f64, 0.875f64);
    let m0 = (hi * hi - lo * lo) / 2.0; // int s0 ds0
    let m1 = (hi * hi * hi - lo * lo * lo) / 3.0; // int s1^2 ds1
    let micro = PI / 4.0 * r * r + PI / 2.0 * delta; // int_{D x (0,1)} (x1^2 + x3), physical local coords
    let rhs = m0 * m1 * r * r * delta * micro;
    let rod_defect = ((lhs - rhs) / rhs).abs();
    assert!(rod_defect <= 1e-12, "rod measure identity off by {rod_defect:.3e}");
    // Same for the axial unfolding.
    let phi_t = |s: [f64; 2], t: f64| (1.0 + s[1]) * t * t;
    let unf_t = unfold_t(&grid, &mg, delta, 4, phi_t);
    let lhs_t = delta * unf_t.integral();
    let side = hi - lo;
    let rhs_t = (side * side + side * m0) * delta * delta * delta / 3.0;
    let axial_defect = ((lhs_t - rhs_t) / rhs_t).abs();
    assert!(axial_defect <= 1e-12, "axial measure identity off by {axial_defect:.3e}");
    // The axial derivative commutes with unfolding at second order in the
    // step: for a cubic profile the error ratio between steps h and h/2 is
    // exactly 4.
    let delta_c = 0.5;
    let cubic = |s: [f64; 2], t: f64| (1.0 + 0.5 * s[0]) * t * t * t;
    let dcubic = |s: [f64; 2], t: f64| (1.0 + 0.5 * s[0]) * 3.0 * t * t;
    let dref = unfold_t(&grid, &mg, delta_c, 5, dcubic);
    let mut errs = Vec::new();
    for &h in &[0.02f64, 0.01] {
        let plus = unfold_t(&grid, &mg, delta_c, 5, |s, t| cubic(s, t + delta_c * h));
        let minus = unfold_t(&grid, &mg, delta_c, 5, |s, t| cubic(s, t - delta_c * h));
        let mut worst: f64 = 0.0;
        for k in 0..plus.values.len() {
            if !plus.macro_interior[k] {
                continue;
            }
            for i in 0..plus.values[k].len() {
                let fd = (plus.values[k][i] - minus.values[k][i]) / (2.0 * h);
                worst = worst.max((fd - delta_c * dref.values[k][i]).abs());
            }
        }
        errs.push(worst);
    }
    let ratio = errs[0] / errs[1];
    assert!(
        (ratio - 4.0).abs() <= 0.05,
        "commutation error ratio {ratio:.4} (want 4, second order)"
    );
    // Unfolded strain of a decomposed rod against hand-computed strains.
    let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
    let q = SectionQuadrature::default_disc(s.r).unwrap();
    let amat = [
        [0.31, -0.44, 0.25],
        [0.12, 0.08, -0.37],
        [-0.29, 0.41, 0.16],
    ];
    let field = BeamField::sample(&q, s.delta, 7, |x| {
        [
            amat[0][0] * x[0] + amat[0][1] * x[1] + amat[0][2] * x[2],
            amat[1][0] * x[0] + amat[1][1] * x[1] + amat[1][2] * x[2],
            amat[2][0] * x[0] + amat[2][1] * x[1] + amat[2][2] * x[2],
        ]
    })
    .unwrap();
    let fr = decompose(&field, &q).unwrap();
    let wp = warping(&field, &fr, &q).unwrap();
    let es = unfolded_strain(&fr, &wp, &q, &s).unwrap();
    let sym = |i: usize, j: usize| 0.5 * (amat[i][j] + amat[j][i]);
    let expect = [sym(0, 0), sym(1, 1), sym(2, 2), sym(0, 1), sym(0, 2), sym(1, 2)];
    let mut worst_aff: f64 = 0.0;
    for (c, comp) in es.e.iter().enumerate() {
        for row in comp {
            for &v in row {
                worst_aff = worst_aff.max((v - expect[c]).abs());
            }
        }
    }
    assert!(worst_aff <= 1e-10, "affine unfolded strain off by {worst_aff:.3e}");
    let field2 = BeamField::sample(&q, s.delta, 7, |x| {
        [x[2] * x[2], x[0] * x[2], x[0] * x[0]]
    })
    .unwrap();
    let fr2 = decompose(&field2, &q).unwrap();
    let wp2 = warping(&field2, &fr2, &q).unwrap();
    let es2 = unfolded_strain(&fr2, &wp2, &q, &s).unwrap();
    let mut worst_quad: f64 = 0.0;
    for k in 0..es2.x3_grid.len() {
        let x3 = es2.x3_grid[k] * s.delta;
        for i in 0..es2.section_nodes.len() {
            let x1 = es2.section_nodes[i][0] * s.r;
            let hand = [0.0, 0.0, 0.0, 0.5 * x3, x3 + x1, 0.5 * x1];
            for c in 0..6 {
                worst_quad = worst_quad.max((es2.e[c][k][i] - hand[c]).abs());
            }
        }
    }
    assert!(worst_quad <= 1e-10, "quadratic unfolded strain off by {worst_quad:.3e}");
    // Cutoff: sup bound for phi = x1, and the gradient-norm exponents.
    let cgrid = CellGrid::build(Rect2::new(0.0, 1.0, 0.0, 1.0), 0.2).unwrap();
    let eps = 0.2;
    let cut = cutoff_phi(&cgrid, 0.1 * eps, Bump::standard(), |x| x[0], |_| [1.0, 0.0]).unwrap();
    let rep = cut.report(&[2.0]).unwrap();
    assert!(
        rep.linf_diff > 0.0 && rep.linf_diff <= eps,
        "sup bound eps * |grad phi| violated: {:.3e} vs {eps}",
        rep.linf_diff
    );
    let ratios = [0.2f64, 0.1, 0.05];
    let ps = [2.0f64, 4.0];
    let mut logs: Vec<Vec<f64>> = vec![Vec::new(); ps.len()];
    for &ratio in &ratios {
        let c = cutoff_phi(
            &cgrid,
            ratio * eps,
            Bump::standard(),
            |x| x[0] + 0.7 * x[1],
            |_| [1.0, 0.7],
        )
        .unwrap();
        let rp = c.report(&ps).unwrap();
        for (slot, gn) in rp.grad_norms.iter().enumerate() {
            logs[slot].push(gn.value.ln());
        }
    }
    let lr: Vec<f64> = ratios.iter().map(|t| t.ln()).collect();
    let mut fitted = [0.0f64; 2];
    for (slot, &p) in ps.iter().enumerate() {
        let slope = fit_slope(&lr, &logs[slot]);
        let expect = 2.0 / p;
        assert!(
            (slope - expect).abs() <= 0.15 * expect,
            "gradient-norm exponent for p={p}: {slope:.3} vs {expect}"
        );
        fitted[slot] = slope;
    }
    println!(
        "PASS unfolding: measure identities ({rod_defect:.1e}, {axial_defect:.1e}), \
         commutation ratio {ratio:.3}, strain block ({worst_aff:.1e}, {worst_quad:.1e}), \
         cutoff sup {:.2e} <= eps, exponents ({:.2}, {:.2})",
        rep.linf_diff, fitted[0], fitted[1]
    );
    enforce_budget("unfolding", t0, 10.0);
}

// ---------------------------------------------------------------------------
// Plane-strain finite elements.
// ---------------------------------------------------------------------------

#[test]
fn plane_strain_patch_convergence_and_energy_identity() {
    let t0 = Instant::now();
    let s_dummy = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
    // Patch test: affine Dirichlet data is reproduced exactly.
    let mesh = build_block_mesh(0.0, 2.0, -1.0, 0.5, 7, 5).unwrap();
    let mat = MaterialParams::from_lame(1.3, 0.8).unwrap();
    let aff = |x: [f64; 2]| {
        [
            0.3 + 0.2 * x[0] - 0.7 * x[1],
            -0.1 + 0.4 * x[0] + 0.5 * x[1],
        ]
    };
    let sys = assemble(&mesh, &mat, &mat, &zero_plane_load(), &s_dummy).unwrap();
    let mut bc = DirichletBc::new(sys.n_dofs);
    for nid in boundary_nodes(&mesh) {
        bc.fix_node(nid, aff(mesh.nodes[nid]));
    }
    let fem = solve(&sys, &bc, 1e-13)
        .or_else(|_| solve(&sys, &bc, 1e-12))
        .unwrap();
    let mut worst_patch: f64 = 0.0;
    for (nid, u) in fem.u.iter().enumerate() {
        let ue = aff(mesh.nodes[nid]);
        worst_patch = worst_patch.max((u[0] - ue[0]).abs().max((u[1] - ue[1]).abs()));
    }
    assert!(worst_patch <= 1e-10, "patch test defect {worst_patch:.3e}");
    // Manufactured solution u = (sin pi x sin pi y, 0) with the body load
    // derived by hand; the L2 error must drop at second order.
    let (lam, mu) = (1.3, 0.8);
    let exact = |x: [f64; 2]| [(PI * x[0]).sin() * (PI * x[1]).sin(), 0.0];
    let body = move |x: [f64; 2]| {
        let sx = (PI * x[0]).sin();
        let cx = (PI * x[0]).cos();
        let sy = (PI * x[1]).sin();
        let cy = (PI * x[1]).cos();
        [
            (lam + 3.0 * mu) * PI * PI * sx * sy,
            -(lam + mu) * PI * PI * cx * cy,
        ]
    };
    let mut errs = Vec::new();
    for &n in &[8usize, 16, 32] {
        let m = build_block_mesh(0.0, 1.0, 0.0, 1.0, n, n).unwrap();
        let pl = PlaneLoad {
            bulk: Arc::new(body),
            beam: Arc::new(|_| [0.0, 0.0]),
        };
        let sysm = assemble(&m, &mat, &mat, &pl, &s_dummy).unwrap();
        let mut bcm = DirichletBc::new(sysm.n_dofs);
        bcm.clamp(&boundary_nodes(&m));
        let um = solve(&sysm, &bcm, 1e-12).unwrap();
        errs.push(l2_error_bilinear(&m, &um.u, &exact));
    }
    let rate1 = (errs[0] / errs[1]).log2();
    let rate2 = (errs[1] / errs[2]).log2();
    assert!(
        rate1 >= 1.9 && rate2 >= 1.9,
        "manufactured-solution rates ({rate1:.3}, {rate2:.3}) below 1.9; errors {errs:?}"
    );
    // Energy identity on the resolved structure at the largest study
    // period: strain energy equals the work of the loads.
    let cfg = StudyConfig::default();
    let s = cfg.scaling_for(0.1).unwrap();
    let smat = cfg.material().unwrap();
    let res = MeshResolution {
        beam_nx: cfg.beam_nx,
        beam_ny: cfg.beam_ny,
        grading_ratio: cfg.grading_ratio,
        max_elem_size: cfg.max_elem_size,
        min_elem_size: 0.0,
        scale: 1.0,
    };
    let smesh = build_structure_mesh(
        &s,
        (cfg.omega[0], cfg.omega[1]),
        cfg.depth,
        &res,
        LayerFill::Beams,
    )
    .unwrap();
    let load = cfg.load;
    let pl = PlaneLoad {
        bulk: Arc::new(move |_| load),
        beam: Arc::new(|_| [0.0, 0.0]),
    };
    let ssys = assemble(&smesh, &smat, &smat, &pl, &s).unwrap();
    let mut sbc = DirichletBc::new(ssys.n_dofs);
    sbc.clamp(&smesh.gamma);
    let fsol = solve(&ssys, &sbc, 1e-11).unwrap();
    let energy = strain_energy(&smesh, &smat, &smat, &fsol.u);
    let rel_gap = ((energy - fsol.work) / fsol.work).abs();
    assert!(
        rel_gap <= 1e-8,
        "energy identity violated: energy {energy:.12e} vs work {:.12e} ({rel_gap:.3e} rel)",
        fsol.work
    );
    println!(
        "PASS plane-strain fem: patch {worst_patch:.1e}, L2 rates ({rate1:.2}, {rate2:.2}), \
         energy identity {rel_gap:.1e} rel on {} dofs",
        ssys.n_dofs
    );
    enforce_budget("plane-strain fem", t0, 60.0);
}

// ---------------------------------------------------------------------------
// Spring-interface limit solver.
// ---------------------------------------------------------------------------

#[test]
fn limit_interface_sandwich_energy_and_penalty_bond() {
    let t0 = Instant::now();
    let mat = MaterialParams::from_engineering(2.0e11, 0.3).unwrap();
    let s = derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap();
    let k = spring_coefficient(&s, 2.0e11).unwrap();
    // Sandwich strip under a constant tangential interface load: the
    // tangential equilibrium of the floating upper block forces the mean
    // tangential jump to equal g / k.
    let model = InterfaceModel::spring(k).unwrap();
    let res = LimitResolution {
        nx: 8,
        h_fine: 0.05,
        h_max: 0.2,
        grading_ratio: 1.4,
    };
    let width = 0.2;
    let lm = build_limit_mesh((0.0, width), 0.4, &res, &model).unwrap();
    let g = 1.0e9;
    let iload = InterfaceLoad::constant(0.0, 0.0, g);
    let sys = assemble_limit(&lm, &mat, &model, &|_| [0.0, 0.0], &iload).unwrap();
    let sol = solve_limit(&lm, &sys, 1e-12).unwrap();
    let jump_mean = sol.jump_integral() / width;
    let sandwich_err = ((jump_mean - g / k) / (g / k)).abs();
    assert!(
        sandwich_err <= 1e-8,
        "sandwich mean jump {jump_mean:.9e} vs g/k {:.9e} ({sandwich_err:.3e} rel)",
        g / k
    );
    // The interface normal trace is one shared unknown: the normal jump is
    // identically zero, not merely small.
    for i in 0..lm.interface_x.len() {
        assert_eq!(
            lm.dof_l[lm.iface_l[i]][1],
            lm.dof_u[lm.iface_u[i]][1],
            "normal dof not shared at interface column {i}"
        );
        let jump_n = sol.u_upper[lm.iface_u[i]][1] - sol.u_lower[lm.iface_l[i]][1];
        assert_eq!(jump_n, 0.0, "normal jump at column {i}");
    }
    // The interface stiffness block evaluates to k * ||[v1]||^2 exactly on
    // piecewise-linear jump data.
    let xs = lm.interface_x.clone();
    let mut v = vec![0.0f64; lm.n_dofs];
    let mut jumps = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        let p = 0.3 + 0.2 * (3.0 * x).sin();
        let mval = -0.1 + 0.05 * x;
        v[lm.dof_u[lm.iface_u[i]][0]] = p;
        v[lm.dof_l[lm.iface_l[i]][0]] = mval;
        jumps.push(p - mval);
    }
    let kif = sys.k_interface();
    let mut kv = vec![0.0f64; lm.n_dofs];
    kif.matvec(&v, &mut kv);
    let vtkv: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
    let mut exact = 0.0;
    for i in 0..xs.len() - 1 {
        let (a, b) = (jumps[i], jumps[i + 1]);
        exact += (xs[i + 1] - xs[i]) * (a * a + a * b + b * b) / 3.0;
    }
    exact *= k;
    let energy_defect = ((vtkv - exact) / exact).abs();
    assert!(
        energy_defect <= 1e-12,
        "interface energy {vtkv:.12e} vs k ||jump||^2 {exact:.12e}"
    );
    // Penalty-rigid limit: a spring 1e8 times stiffer reproduces the
    // bonded bilayer.
    let res2 = LimitResolution {
        nx: 16,
        h_fine: 0.05,
        h_max: 0.25,
        grading_ratio: 1.5,
    };
    let bulk_load = |_: [f64; 2]| [1.0e3, 1.0e3];
    let bonded = InterfaceModel::Bonded;
    let lm_b = build_limit_mesh((0.0, 1.0), 1.0, &res2, &bonded).unwrap();
    let sys_b = assemble_limit(&lm_b, &mat, &bonded, &bulk_load, &InterfaceLoad::zero()).unwrap();
    let sol_b = solve_limit(&lm_b, &sys_b, 1e-12).unwrap();
    let pen = InterfaceModel::spring(1.0e8 * k).unwrap();
    let lm_p = build_limit_mesh((0.0, 1.0), 1.0, &res2, &pen).unwrap();
    let sys_p = assemble_limit(&lm_p, &mat, &pen, &bulk_load, &InterfaceLoad::zero()).unwrap();
    let sol_p = solve_limit(&lm_p, &sys_p, 1e-12)
        .or_else(|_| solve_limit(&lm_p, &sys_p, 1e-10))
        .unwrap();
    let scale = sol_b
        .u_lower
        .iter()
        .chain(sol_b.u_upper.iter())
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst_pen: f64 = 0.0;
    for (up, ub) in sol_p
        .u_lower
        .iter()
        .chain(sol_p.u_upper.iter())
        .zip(sol_b.u_lower.iter().chain(sol_b.u_upper.iter()))
    {
        worst_pen = worst_pen.max((up[0] - ub[0]).abs().max((up[1] - ub[1]).abs()));
    }
    assert!(
        worst_pen <= 1e-6 * scale,
        "penalty-rigid vs bonded: {worst_pen:.3e} vs scale {scale:.3e}"
    );
    println!(
        "PASS limit interface: sandwich {sandwich_err:.1e} rel, normal jump exact, \
         interface energy {energy_defect:.1e} rel, penalty-vs-bonded {:.1e} of scale",
        worst_pen / scale
    );
    enforce_budget("limit interface", t0, 60.0);
}

// ---------------------------------------------------------------------------
// Fine-versus-limit study.
// ---------------------------------------------------------------------------

static STUDY: OnceLock<ConvergenceReport> = OnceLock::new();

/// The full default study, shared by the trend and magnitude-band tests.
fn study() -> &'static ConvergenceReport {
    STUDY.get_or_init(|| {
        let t0 = Instant::now();
        let rep = run_convergence(&StudyConfig::default()).expect("default study must run");
        println!("[study] total wall time {:.1} s", t0.elapsed().as_secs_f64());
        rep
    })
}

fn print_study_table(rep: &ConvergenceReport) {
    println!(
        "{:>8} {:>13} {:>13} {:>13} {:>13} {:>13}",
        "eps", "jump_u1_err", "jump_u2", "stress12_err", "stress22_err", "energy_gap"
    );
    for r in &rep.rows {
        println!(
            "{:>8} {:>13.4e} {:>13.4e} {:>13.4e} {:>13.4e} {:>13.4e}",
            r.epsilon, r.jump_u1_err, r.jump_u2, r.stress12_err, r.stress22_err, r.energy_gap
        );
    }
}

#[test]
fn study_norm_trends_energy_gap_and_refinement_control() {
    let t0 = Instant::now();
    let rep = study();
    print_study_table(rep);
    assert!(
        rep.failures.is_empty(),
        "study case failures: {:?}",
        rep.failures
            .iter()
            .map(|f| format!("eps={}: {}", f.epsilon, f.message))
            .collect::<Vec<_>>()
    );
    assert_eq!(rep.rows.len(), 3, "expected the three-period ladder");
    for w in rep.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(a.epsilon > b.epsilon, "ladder must be sorted by decreasing period");
        assert!(
            b.jump_u1_err < a.jump_u1_err,
            "tangential jump error must decrease: {:.4e} -> {:.4e}",
            a.jump_u1_err,
            b.jump_u1_err
        );
        assert!(
            b.jump_u2 < a.jump_u2,
            "normal jump norm must decrease: {:.4e} -> {:.4e}",
            a.jump_u2,
            b.jump_u2
        );
        assert!(
            b.stress12_err < a.stress12_err,
            "shear traction error must decrease: {:.4e} -> {:.4e}",
            a.stress12_err,
            b.stress12_err
        );
        assert!(
            b.stress22_err < a.stress22_err,
            "normal traction error must decrease: {:.4e} -> {:.4e}",
            a.stress22_err,
            b.stress22_err
        );
        assert!(
            b.energy_gap < a.energy_gap,
            "energy gap must decrease: {:.4e} -> {:.4e}",
            a.energy_gap,
            b.energy_gap
        );
    }
    let rc = rep
        .refinement
        .as_ref()
        .expect("refinement control must run at the largest period");
    let names = ["jump_u1_err", "jump_u2", "stress12_err", "stress22_err"];
    for (name, &c) in names.iter().zip(rc.changes.iter()) {
        assert!(
            c < 0.05,
            "doubling the layer resolution at eps={} moves {name} by {:.1}% (>= 5%)",
            rc.epsilon,
            c * 100.0
        );
    }
    println!(
        "PASS study trends: all four norms and the energy gap decrease strictly over the \
         ladder; doubled-resolution changes {:?} below 5%",
        rc.changes.map(|c| format!("{:.2}%", c * 100.0))
    );
    enforce_budget("study trends", t0, 1800.0);
}

#[test]
fn study_jump_error_magnitude_band() {
    let rep = study();
    print_study_table(rep);
    let errs: Vec<f64> = rep.rows.iter().map(|r| r.jump_u1_err).collect();
    for r in &rep.rows {
        assert!(
            (1.0e-6..=1.0e-4).contains(&r.jump_u1_err),
            "tangential-jump error at eps={} is {:.4e}, outside the required magnitude \
             band [1e-6, 1e-4]; measured errors over the ladder: {errs:?}. The resolved \
             fine model follows the spring-interface prediction to a few 1e-9 at these \
             periods, so the band is unreachable without degrading one of the two models.",
            r.epsilon,
            r.jump_u1_err
        );
    }
    println!("PASS study magnitude band: jump errors {errs:?} within [1e-6, 1e-4]");
}
