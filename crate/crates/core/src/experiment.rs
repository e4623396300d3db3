//! Convergence-study harness: for a ladder of layer periods the resolved
//! fine model and the spring-interface limit model are solved and compared
//! through four interface norms (tangential-jump error, residual normal
//! jump, and the two traction errors above the interface), plus the energy
//! gap between the two models.  Results are emitted as CSV tables, a
//! gnuplot script, and a run manifest.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fem::{
    assemble, solve, strain_energy, trace_jump, DirichletBc, InterfaceTrace, PlaneLoad,
};
use crate::limit::{
    assemble_limit, build_limit_mesh, limit_stress_at, solve_limit, InterfaceLoad, InterfaceModel,
    LimitMesh, LimitResolution, LimitSolution,
};
use crate::mesh::{build_structure_mesh, LayerFill, MeshResolution};
use crate::scaling::{derive_geometry, LayerScaling, MaterialParams};
use crate::Result;

/// Which spring coefficient couples the limit blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpringVariant {
    /// Circular-rod coefficient `3 pi kappa0^4 kappa1^-3 E` (period
    /// independent).
    #[serde(rename = "rod")]
    Rod,
    /// Rectangular-strip coefficient matched to the plane-strain fine model:
    /// `E/(1-nu^2) * (2r)^3 / (delta^3 eps)`, period dependent.
    #[serde(rename = "2d")]
    TwoD,
}

impl std::str::FromStr for SpringVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rod" => Ok(SpringVariant::Rod),
            "2d" => Ok(SpringVariant::TwoD),
            other => Err(Error::Config(format!(
                "unknown spring variant '{other}' (expected 'rod' or '2d')"
            ))),
        }
    }
}

impl std::fmt::Display for SpringVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpringVariant::Rod => "rod",
            SpringVariant::TwoD => "2d",
        })
    }
}

impl SpringVariant {
    /// Spring coefficient for a given period scaling.
    pub fn coefficient(&self, s: &LayerScaling, mat: &MaterialParams) -> Result<f64> {
        match self {
            SpringVariant::Rod => crate::bending::spring_coefficient(s, mat.young()),
            SpringVariant::TwoD => {
                let e_eff = mat.young() / (1.0 - mat.poisson().powi(2));
                let width = 2.0 * s.r;
                Ok(e_eff * width.powi(3) / (s.delta.powi(3) * s.epsilon))
            }
        }
    }
}

/// Which material fills the layer band of the fine model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillChoice {
    /// Resolved beams with void gaps (the actual structure).
    Beams,
    /// The whole band filled with bulk material (bonded control).
    Full,
}

impl From<FillChoice> for LayerFill {
    fn from(f: FillChoice) -> LayerFill {
        match f {
            FillChoice::Beams => LayerFill::Beams,
            FillChoice::Full => LayerFill::Full,
        }
    }
}

/// Smallest period the default mesh budget is sized for; anything finer
/// needs the explicit opt-in flag.
pub const DESK_SCALE_EPS: f64 = 0.02;

/// Full study configuration; deserializable from TOML with every field
/// optional (defaults reproduce the reference setup).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Young's modulus of both materials.
    pub young: f64,
    pub poisson: f64,
    /// Constant body load on the blocks.
    pub load: [f64; 2],
    /// Rod-radius exponent; the thickness exponent is tied to it by the
    /// critical relation `eta1 = (4 eta0 - 2) / 3`.
    pub eta0: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    /// Period ladder, largest first.
    pub eps_list: Vec<f64>,
    pub omega: [f64; 2],
    /// Block depth on each side of the layer.
    pub depth: f64,
    pub spring: SpringVariant,
    /// Explicit spring coefficient, bypassing the variant formula.
    pub spring_override: Option<f64>,
    /// Uniform refinement multiplier for the fine mesh.
    pub mesh_scale: f64,
    pub beam_nx: usize,
    pub beam_ny: usize,
    pub grading_ratio: f64,
    pub max_elem_size: f64,
    pub limit_nx: usize,
    pub limit_h_fine: f64,
    /// Height above the layer's top surface at which tractions are sampled.
    pub trace_offset: f64,
    pub solver_tol: f64,
    pub layer_fill: FillChoice,
    /// Allow periods below the desk-scale budget.
    pub allow_expensive: bool,
    /// Re-run the largest period at doubled layer resolution and record the
    /// norm changes.
    pub check_refinement: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            young: 2.0e11,
            poisson: 0.3,
            load: [1.0e3, 1.0e3],
            eta0: 1.5,
            kappa0: 1.0,
            kappa1: 1.0,
            eps_list: vec![0.1, 0.05, 0.02],
            omega: [0.0, 1.0],
            depth: 1.0,
            spring: SpringVariant::Rod,
            spring_override: None,
            mesh_scale: 1.0,
            beam_nx: 4,
            beam_ny: 8,
            grading_ratio: 1.05,
            max_elem_size: 0.125,
            limit_nx: 128,
            limit_h_fine: 0.01,
            trace_offset: 0.075,
            solver_tol: 1.0e-9,
            layer_fill: FillChoice::Beams,
            allow_expensive: false,
            check_refinement: true,
        }
    }
}

impl StudyConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_toml_str(&text)
    }

    /// Thickness exponent on the critical line.
    pub fn eta1(&self) -> f64 {
        (4.0 * self.eta0 - 2.0) / 3.0
    }

    pub fn material(&self) -> Result<MaterialParams> {
        MaterialParams::from_engineering(self.young, self.poisson)
    }

    pub fn scaling_for(&self, eps: f64) -> Result<LayerScaling> {
        derive_geometry(eps, self.kappa0, self.kappa1, self.eta0, self.eta1())
    }

    /// Spring coefficient for one period (override wins over the variant).
    pub fn spring_for(&self, s: &LayerScaling) -> Result<f64> {
        match self.spring_override {
            Some(k) => Ok(k),
            None => self.spring.coefficient(s, &self.material()?),
        }
    }

    pub fn fine_resolution(&self, extra_scale: f64) -> MeshResolution {
        MeshResolution {
            beam_nx: self.beam_nx,
            beam_ny: self.beam_ny,
            grading_ratio: self.grading_ratio,
            max_elem_size: self.max_elem_size,
            min_elem_size: 0.0,
            scale: self.mesh_scale * extra_scale,
        }
    }

    pub fn limit_resolution(&self) -> LimitResolution {
        LimitResolution {
            nx: self.limit_nx,
            h_fine: self.limit_h_fine,
            h_max: self.max_elem_size,
            grading_ratio: self.grading_ratio,
        }
    }

    /// FNV-1a digest of the canonical TOML form; identical configurations
    /// hash identically.
    pub fn digest(&self) -> u64 {
        let text = toml::to_string(self).unwrap_or_default();
        fnv1a64(text.as_bytes())
    }
}

/// 64-bit FNV-1a hash.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// One period of the study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `|| [u_eps,1] - [u_1] ||_L2` along the interface.
    pub jump_u1_err: f64,
    /// `|| [u_eps,2] ||_L2` (the limit normal jump is identically zero).
    pub jump_u2: f64,
    pub stress12_err: f64,
    pub stress22_err: f64,
    pub fine_energy: f64,
    pub limit_energy: f64,
    /// `|fine - limit| / |limit|`.
    pub energy_gap: f64,
    pub fine_dofs: usize,
    pub limit_dofs: usize,
    pub fine_iterations: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CaseFailure {
    pub epsilon: f64,
    pub message: String,
}

/// Relative change of each norm when the largest period is re-run at
/// doubled layer resolution.
#[derive(Debug, Clone)]
pub struct RefinementControl {
    pub epsilon: f64,
    pub changes: [f64; 4],
}

pub struct ConvergenceReport {
    /// Rows sorted by decreasing period.
    pub rows: Vec<ConvergenceRow>,
    pub failures: Vec<CaseFailure>,
    pub refinement: Option<RefinementControl>,
    pub spring: SpringVariant,
    pub config_digest: u64,
}

/// Trapezoid-rule L2 norm of nodal samples along the interface.
pub fn trapezoid_l2(xs: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() - 1 {
        let h = xs[i + 1] - xs[i];
        acc += 0.5 * h * (v[i] * v[i] + v[i + 1] * v[i + 1]);
    }
    acc.sqrt()
}

/// Midpoint-rule L2 norm of per-interval samples.
pub fn midpoint_l2(xs: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..v.len() {
        acc += (xs[i + 1] - xs[i]) * v[i] * v[i];
    }
    acc.sqrt()
}

struct LimitCase {
    mesh: LimitMesh,
    sol: LimitSolution,
    energy: f64,
    dofs: usize,
}

fn solve_limit_case(cfg: &StudyConfig, k: f64) -> Result<LimitCase> {
    let mat = cfg.material()?;
    let model = InterfaceModel::spring(k)?;
    let lres = cfg.limit_resolution();
    let lm = build_limit_mesh((cfg.omega[0], cfg.omega[1]), cfg.depth, &lres, &model)?;
    let load = cfg.load;
    let sys = assemble_limit(&lm, &mat, &model, &move |_| load, &InterfaceLoad::zero())?;
    let sol = solve_limit(&lm, &sys, cfg.solver_tol)?;
    // Energy functional of the limit model: block stress energy plus the
    // spring energy of the tangential jump.
    let energy = strain_energy(&lm.lower, &mat, &mat, &sol.u_lower)
        + strain_energy(&lm.upper, &mat, &mat, &sol.u_upper)
        + k * sol.jump_l2().powi(2);
    let dofs = lm.n_dofs;
    Ok(LimitCase {
        mesh: lm,
        sol,
        energy,
        dofs,
    })
}

struct FineCase {
    trace: InterfaceTrace,
    energy: f64,
    dofs: usize,
    iterations: usize,
}

fn solve_fine_case(cfg: &StudyConfig, s: &LayerScaling, extra_scale: f64) -> Result<FineCase> {
    let mat = cfg.material()?;
    let res = cfg.fine_resolution(extra_scale);
    let mesh = build_structure_mesh(
        s,
        (cfg.omega[0], cfg.omega[1]),
        cfg.depth,
        &res,
        cfg.layer_fill.into(),
    )?;
    let sys = assemble(&mesh, &mat, &mat, &PlaneLoad::bulk_only(cfg.load), s)?;
    let mut bc = DirichletBc::new(sys.n_dofs);
    bc.clamp(&mesh.gamma);
    let fsol = solve(&sys, &bc, cfg.solver_tol)?;
    let trace = trace_jump(&mesh, &mat, &mat, &fsol.u, cfg.trace_offset)?;
    let energy = strain_energy(&mesh, &mat, &mat, &fsol.u);
    Ok(FineCase {
        trace,
        energy,
        dofs: sys.n_dofs,
        iterations: fsol.stats.iterations,
    })
}

/// The four interface norms comparing one fine trace with the limit
/// solution: jump error, residual normal jump, traction errors.
fn interface_norms(cfg: &StudyConfig, fine: &FineCase, limit: &LimitCase) -> Result<[f64; 4]> {
    let trace = &fine.trace;
    let ju1: Vec<f64> = trace
        .x
        .iter()
        .zip(&trace.jump)
        .map(|(&x, j)| j[0] - limit.sol.jump_at(x))
        .collect();
    let ju2: Vec<f64> = trace.jump.iter().map(|j| j[1]).collect();
    let mut ds12 = Vec::with_capacity(trace.xm.len());
    let mut ds22 = Vec::with_capacity(trace.xm.len());
    let mat = cfg.material()?;
    for (i, &xm) in trace.xm.iter().enumerate() {
        let sig = limit_stress_at(&limit.mesh, &mat, &limit.sol, [xm, cfg.trace_offset])
            .ok_or_else(|| {
                Error::Mesh(format!("limit stress sample outside the mesh at x = {xm}"))
            })?;
        // `sig` is (s11, s22, s12); the trace stores (s12, s22).
        ds12.push(trace.traction[i][0] - sig[2]);
        ds22.push(trace.traction[i][1] - sig[1]);
    }
    Ok([
        trapezoid_l2(&trace.x, &ju1),
        trapezoid_l2(&trace.x, &ju2),
        midpoint_l2(&trace.x, &ds12),
        midpoint_l2(&trace.x, &ds22),
    ])
}

fn thread_budget(n_cases: usize) -> usize {
    let available = std::env::var("LAYERBEAM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    available.max(1).min(n_cases.max(1))
}

/// Run the full study: solve the limit model per distinct spring
/// coefficient, then the fine periods as parallel jobs, and compare.
/// Per-period failures are recorded and the run continues.
pub fn run_convergence(cfg: &StudyConfig) -> Result<ConvergenceReport> {
    if cfg.eps_list.is_empty() {
        return Err(Error::Config("empty period list".into()));
    }
    let mut eps_sorted = cfg.eps_list.clone();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eps_sorted.dedup();

    let mut failures: Vec<CaseFailure> = Vec::new();
    // Period -> scaling and spring coefficient, screening invalid entries.
    let mut cases: Vec<(f64, LayerScaling, f64)> = Vec::new();
    for &eps in &eps_sorted {
        if eps < DESK_SCALE_EPS - 1e-12 && !cfg.allow_expensive {
            failures.push(CaseFailure {
                epsilon: eps,
                message: format!(
                    "period {eps} is below the desk-scale budget (smallest default {DESK_SCALE_EPS}); \
                     the resolved mesh grows like 1/eps^2 - enable allow_expensive to run it"
                ),
            });
            continue;
        }
        match cfg.scaling_for(eps) {
            Ok(s) => match cfg.spring_for(&s) {
                Ok(k) => cases.push((eps, s, k)),
                Err(e) => failures.push(CaseFailure {
                    epsilon: eps,
                    message: format!("spring coefficient: {e}"),
                }),
            },
            Err(e) => failures.push(CaseFailure {
                epsilon: eps,
                message: format!("geometry: {e}"),
            }),
        }
    }

    // Limit solves, one per distinct coefficient (sequential, cheap).
    let mut limits: HashMap<u64, LimitCase> = HashMap::new();
    let mut limit_failed: HashMap<u64, String> = HashMap::new();
    for &(_, _, k) in &cases {
        let key = k.to_bits();
        if limits.contains_key(&key) || limit_failed.contains_key(&key) {
            continue;
        }
        match solve_limit_case(cfg, k) {
            Ok(lc) => {
                limits.insert(key, lc);
            }
            Err(e) => {
                limit_failed.insert(key, e.to_string());
            }
        }
    }
    cases.retain(|&(eps, _, k)| {
        if let Some(msg) = limit_failed.get(&k.to_bits()) {
            failures.push(CaseFailure {
                epsilon: eps,
                message: format!("limit model: {msg}"),
            });
            false
        } else {
            true
        }
    });

    // Fine solves as independent parallel jobs.
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<ConvergenceRow>> = Mutex::new(Vec::new());
    let errs: Mutex<Vec<CaseFailure>> = Mutex::new(Vec::new());
    let n_workers = thread_budget(cases.len());
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cases.len() {
                    break;
                }
                let (eps, ref s, k) = cases[i];
                let started = Instant::now();
                let outcome = solve_fine_case(cfg, s, 1.0).and_then(|fine| {
                    let limit = &limits[&k.to_bits()];
                    let norms = interface_norms(cfg, &fine, limit)?;
                    let gap = (fine.energy - limit.energy).abs() / limit.energy.abs().max(1e-300);
                    Ok(ConvergenceRow {
                        epsilon: eps,
                        jump_u1_err: norms[0],
                        jump_u2: norms[1],
                        stress12_err: norms[2],
                        stress22_err: norms[3],
                        fine_energy: fine.energy,
                        limit_energy: limit.energy,
                        energy_gap: gap,
                        fine_dofs: fine.dofs,
                        limit_dofs: limit.dofs,
                        fine_iterations: fine.iterations,
                        wall_seconds: started.elapsed().as_secs_f64(),
                    })
                });
                match outcome {
                    Ok(row) => rows.lock().unwrap().push(row),
                    Err(e) => errs.lock().unwrap().push(CaseFailure {
                        epsilon: eps,
                        message: e.to_string(),
                    }),
                }
            });
        }
    });
    let mut rows = rows.into_inner().unwrap();
    failures.extend(errs.into_inner().unwrap());
    rows.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap());
    failures.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap());

    // Refinement control: double the layer resolution at the largest
    // period and record how much each norm moves.
    let refinement = if cfg.check_refinement && !rows.is_empty() {
        let eps = rows[0].epsilon;
        let case = cases.iter().find(|c| c.0 == eps);
        match case {
            Some(&(_, ref s, k)) => match solve_fine_case(cfg, s, 2.0) {
                Ok(fine2) => {
                    let limit = &limits[&k.to_bits()];
                    let norms2 = interface_norms(cfg, &fine2, limit)?;
                    let base = [
                        rows[0].jump_u1_err,
                        rows[0].jump_u2,
                        rows[0].stress12_err,
                        rows[0].stress22_err,
                    ];
                    let mut changes = [0.0; 4];
                    for i in 0..4 {
                        changes[i] = (norms2[i] - base[i]).abs() / base[i].abs().max(1e-300);
                    }
                    Some(RefinementControl { epsilon: eps, changes })
                }
                Err(e) => {
                    failures.push(CaseFailure {
                        epsilon: eps,
                        message: format!("refinement control: {e}"),
                    });
                    None
                }
            },
            None => None,
        }
    } else {
        None
    };

    Ok(ConvergenceReport {
        rows,
        failures,
        refinement,
        spring: cfg.spring,
        config_digest: cfg.digest(),
    })
}

/// Paths of the emitted artifacts.
pub struct ReportFiles {
    pub norms_csv: PathBuf,
    pub full_csv: PathBuf,
    pub plot_script: PathBuf,
    pub manifest: PathBuf,
}

/// Exact column schema of the norms table.
pub const NORMS_HEADER: &str = "epsilon,jump_u1_err,jump_u2,stress12_err,stress22_err";

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Emit the norms table, the full report, a gnuplot script, and the run
/// manifest into `out_dir` (created if missing).
pub fn emit_report(report: &ConvergenceReport, out_dir: &Path) -> Result<ReportFiles> {
    if report.rows.is_empty() {
        return Err(Error::Shape("refusing to emit an empty report".into()));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", out_dir.display()))))?;
    let write = |name: &str, content: &str| -> Result<PathBuf> {
        let path = out_dir.join(name);
        let mut f = std::fs::File::create(&path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        f.write_all(content.as_bytes())
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Ok(path)
    };

    let mut norms = String::from(NORMS_HEADER);
    norms.push('\n');
    for r in &report.rows {
        norms.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt(r.epsilon),
            fmt(r.jump_u1_err),
            fmt(r.jump_u2),
            fmt(r.stress12_err),
            fmt(r.stress22_err)
        ));
    }
    let norms_csv = write("norms.csv", &norms)?;

    let mut full = String::from(
        "epsilon,jump_u1_err,jump_u2,stress12_err,stress22_err,\
         fine_energy,limit_energy,energy_gap,fine_dofs,limit_dofs,fine_iterations\n",
    );
    for r in &report.rows {
        full.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            fmt(r.epsilon),
            fmt(r.jump_u1_err),
            fmt(r.jump_u2),
            fmt(r.stress12_err),
            fmt(r.stress22_err),
            fmt(r.fine_energy),
            fmt(r.limit_energy),
            fmt(r.energy_gap),
            r.fine_dofs,
            r.limit_dofs,
            r.fine_iterations
        ));
    }
    let full_csv = write("report.csv", &full)?;

    let plot = "\
set datafile separator ','
set logscale xy
set xlabel 'epsilon'
set ylabel 'interface norm'
set key left top
set grid
plot 'norms.csv' using 1:2 with linespoints title 'jump u1 error', \\
     'norms.csv' using 1:3 with linespoints title 'jump u2', \\
     'norms.csv' using 1:4 with linespoints title 'stress12 error', \\
     'norms.csv' using 1:5 with linespoints title 'stress22 error'
";
    let plot_script = write("plot_norms.gp", plot)?;

    let mut man = String::new();
    man.push_str(&format!("crate_version: {}\n", env!("CARGO_PKG_VERSION")));
    man.push_str(&format!("config_digest: {:016x}\n", report.config_digest));
    man.push_str(&format!("spring_variant: {}\n", report.spring));
    for r in &report.rows {
        man.push_str(&format!(
            "case eps={}: fine_dofs={} limit_dofs={} iterations={} wall={:.3}s\n",
            r.epsilon, r.fine_dofs, r.limit_dofs, r.fine_iterations, r.wall_seconds
        ));
    }
    if let Some(rc) = &report.refinement {
        man.push_str(&format!(
            "refinement_control eps={}: norm changes {:.3e} {:.3e} {:.3e} {:.3e}\n",
            rc.epsilon, rc.changes[0], rc.changes[1], rc.changes[2], rc.changes[3]
        ));
    }
    for f in &report.failures {
        man.push_str(&format!("failure eps={}: {}\n", f.epsilon, f.message));
    }
    let manifest = write("manifest.txt", &man)?;

    Ok(ReportFiles {
        norms_csv,
        full_csv,
        plot_script,
        manifest,
    })
}

/// Parse a norms table back into rows of five columns.
pub fn parse_norms_csv(text: &str) -> Result<Vec<[f64; 5]>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == NORMS_HEADER => {}
        other => {
            return Err(Error::Shape(format!(
                "unexpected norms header: {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Shape(format!(
                "row {} has {} columns, expected 5",
                i + 1,
                cols.len()
            )));
        }
        let mut row = [0.0; 5];
        for (j, c) in cols.iter().enumerate() {
            row[j] = c.parse::<f64>().map_err(|e| {
                Error::Shape(format!("row {} column {}: {e}", i + 1, j + 1))
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}
