//! Structured quadrilateral meshes for the fine-scale plane model: two bulk
//! blocks separated by a thin band that is empty except for periodically
//! spaced thin beam columns.  The mesh is a tensor grid with voids, so the
//! block/beam junctions are conforming by construction; element sizes grade
//! geometrically away from the thin features.

use crate::error::Error;
use crate::scaling::LayerScaling;
use crate::Result;

/// Element material tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElemTag {
    Bulk,
    Beam,
}

/// What to do with the band between the blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerFill {
    /// Only the beam columns are meshed; the gaps are void.
    Beams,
    /// The whole band is meshed (gap cells carry the `Bulk` tag); used for
    /// bonded-reference checks.
    Full,
}

///// Resolution controls.  `scale` is a uniform refinement knob: it multiplies
/// the element counts across the thin features and divides the far-field cap.
#[derive(Debug, Clone)]
pub struct MeshResolution {
    /// Elements across a beam width (width `2 r`).
    pub beam_nx: usize,
    /// Elements through the band height (height `delta`).
    pub beam_ny: usize,
    /// Geometric coarsening ratio away from the band and the beam edges.
    pub grading_ratio: f64,
    /// Cap on element size far from the thin features.
    pub max_elem_size: f64,
    /// Lower bound on element size; `0` disables the guard.  When resolving
    /// the beams would need smaller elements the build fails with a
    /// refinement error carrying the required size.
    pub min_elem_size: f64,
    /// Uniform refinement multiplier.
    pub scale: f64,
}

impl Default for MeshResolution {
    fn default() -> Self {
        Self {
            beam_nx: 4,
            beam_ny: 8,
            grading_ratio: 1.5,
            max_elem_size: 0.125,
            min_elem_size: 0.0,
            scale: 1.0,
        }
    }
}

impl MeshResolution {
    fn effective(&self) -> (usize, usize, f64) {
        let nx = ((self.beam_nx as f64) * self.scale).round().max(1.0) as usize;
        let ny = ((self.beam_ny as f64) * self.scale).round().max(1.0) as usize;
        (nx, ny, self.max_elem_size / self.scale)
    }
}

/// Tensor-product quadrilateral mesh with voids.
#[derive(Debug, Clone)]
pub struct QuadMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counter-clockwise corner node ids.
    pub elems: Vec<[usize; 4]>,
    pub tags: Vec<ElemTag>,
    /// Grid lines the mesh was built from.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Clamped boundary nodes (bottom edge), sorted by x.
    pub gamma: Vec<usize>,
    /// Nodes on the lower interface line (block top, y = 0), sorted by x.
    pub sigma_minus: Vec<usize>,
    /// Nodes on the upper interface line (block bottom, y = delta), sorted by x.
    pub sigma_plus: Vec<usize>,
    /// Beam centre abscissae, ascending.
    pub beam_centers: Vec<f64>,
    /// Beam half-width.
    pub r: f64,
    /// Band height.
    pub delta: f64,
    /// Grid cell (ix + iy * (xs.len()-1)) to element index.
    cell_elem: Vec<Option<usize>>,
}

/// Mesh quality summary.
#[derive(Debug, Clone)]
pub struct MeshQuality {
    pub max_aspect: f64,
    pub min_area: f64,
    /// Largest size ratio of neighbouring grid intervals.
    pub max_neighbor_ratio: f64,
}

impl QuadMesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elems(&self) -> usize {
        self.elems.len()
    }

    pub fn elem_coords(&self, e: usize) -> [[f64; 2]; 4] {
        let ids = self.elems[e];
        [
            self.nodes[ids[0]],
            self.nodes[ids[1]],
            self.nodes[ids[2]],
            self.nodes[ids[3]],
        ]
    }

    /// Beam centre whose column contains abscissa `x`, if any.
    pub fn beam_center_for(&self, x: f64) -> Option<f64> {
        let tol = 1e-12 * self.r.max(1.0);
        match self
            .beam_centers
            .binary_search_by(|c| c.partial_cmp(&x).unwrap())
        {
            Ok(k) => Some(self.beam_centers[k]),
            Err(k) => {
                if k > 0 && (x - self.beam_centers[k - 1]).abs() <= self.r + tol {
                    Some(self.beam_centers[k - 1])
                } else if k < self.beam_centers.len()
                    && (self.beam_centers[k] - x).abs() <= self.r + tol
                {
                    Some(self.beam_centers[k])
                } else {
                    None
                }
            }
        }
    }

    /// Element containing `p` together with its reference coordinates in
    /// `[-1, 1]^2`; `None` in voids or outside the grid.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let find = |lines: &[f64], v: f64| -> Option<usize> {
            if v < lines[0] - 1e-12 || v > *lines.last().unwrap() + 1e-12 {
                return None;
            }
            let k = match lines.binary_search_by(|x| x.partial_cmp(&v).unwrap()) {
                Ok(k) => k,
                Err(k) => k.saturating_sub(1),
            };
            Some(k.min(lines.len() - 2))
        };
        let ix = find(&self.xs, p[0])?;
        let iy = find(&self.ys, p[1])?;
        let ncx = self.xs.len() - 1;
        let e = self.cell_elem[ix + iy * ncx]?;
        let (x0, x1) = (self.xs[ix], self.xs[ix + 1]);
        let (y0, y1) = (self.ys[iy], self.ys[iy + 1]);
        let xi = 2.0 * (p[0] - x0) / (x1 - x0) - 1.0;
        let eta = 2.0 * (p[1] - y0) / (y1 - y0) - 1.0;
        Some((e, [xi, eta]))
    }

    pub fn quality(&self) -> MeshQuality {
        let mut max_aspect: f64 = 0.0;
        let mut min_area = f64::INFINITY;
        for e in 0..self.n_elems() {
            let c = self.elem_coords(e);
            let dx = c[1][0] - c[0][0];
            let dy = c[3][1] - c[0][1];
            max_aspect = max_aspect.max((dx / dy).max(dy / dx));
            min_area = min_area.min(dx * dy);
        }
        let mut max_ratio: f64 = 1.0;
        for lines in [&self.xs, &self.ys] {
            for w in lines.windows(3) {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                max_ratio = max_ratio.max((a / b).max(b / a));
            }
        }
        MeshQuality {
            max_aspect,
            min_area,
            max_neighbor_ratio: max_ratio,
        }
    }
}

/// Centres of the beams whose periodicity cells fit inside the open
/// interval `(a, b)`.
pub fn interior_beam_centers(omega: (f64, f64), epsilon: f64) -> Vec<f64> {
    let tol = 1e-12;
    let lo = (omega.0 / epsilon + 0.5 - tol).ceil() as i64;
    let hi = (omega.1 / epsilon - 0.5 + tol).floor() as i64;
    (lo..=hi).map(|k| k as f64 * epsilon).collect()
}

/// One-dimensional geometric grading from `a` to `b` with the fine size at
/// the `a` end; sizes grow geometrically up to `h_max`, with the growth
/// factor fitted (at most `ratio`) so the last breakpoint lands exactly on
/// `b` while the fine size stays `h_fine`.  Returns all breakpoints
/// including both endpoints.
fn graded_one_sided(a: f64, b: f64, h_fine: f64, h_max: f64, ratio: f64) -> Vec<f64> {
    let span = b - a;
    debug_assert!(span > 0.0 && h_fine > 0.0 && ratio >= 1.0);
    let h = h_fine.min(h_max);
    if span <= 1.5 * h {
        return vec![a, b];
    }
    let total = |n: usize, rho: f64| -> f64 {
        let mut s = 0.0;
        let mut hk = h;
        for _ in 0..n {
            s += hk.min(h_max);
            hk *= rho;
        }
        s
    };
    let mut n = 1usize;
    while total(n, ratio) < span {
        n += 1;
    }
    let rho_lo = 1.0 / ratio;
    let sizes: Vec<f64> = if total(n, rho_lo) > span {
        // Even shrinking cannot fit n steps: fall back to uniform.
        let m = ((span / h).round() as usize).max(1);
        vec![span / m as f64; m]
    } else {
        let (mut lo, mut hi) = (rho_lo, ratio);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if total(n, mid) < span {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let rho = 0.5 * (lo + hi);
        let mut hk = h;
        (0..n)
            .map(|_| {
                let s = hk.min(h_max);
                hk *= rho;
                s
            })
            .collect()
    };
    let correction = span / sizes.iter().sum::<f64>();
    let mut pts = Vec::with_capacity(sizes.len() + 1);
    pts.push(a);
    let mut x = a;
    for (k, s) in sizes.iter().enumerate() {
        x += s * correction;
        if k + 1 == sizes.len() {
            pts.push(b);
        } else {
            pts.push(x);
        }
    }
    pts
}

/// Reverse `seg` onto `[a, b]` with exact endpoints: the fine end of the
/// grading swaps sides.
fn mirrored(seg: &[f64], a: f64, b: f64) -> Vec<f64> {
    let (p, q) = (seg[0], *seg.last().unwrap());
    let mut out: Vec<f64> = seg.iter().rev().map(|&x| a + (q - x) / (q - p) * (b - a)).collect();
    out[0] = a;
    *out.last_mut().unwrap() = b;
    out
}

/// Grading fine at both ends, coarse in the middle.
fn graded_two_sided(a: f64, b: f64, h_fine: f64, h_max: f64, ratio: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    if mid - a <= h_fine {
        // Too narrow to grade; one or two uniform elements.
        if b - a <= 1.5 * h_fine {
            return vec![a, b];
        }
        return vec![a, mid, b];
    }
    let left = graded_one_sided(a, mid, h_fine, h_max, ratio);
    let mut pts = left.clone();
    let right = mirrored(&left, mid, b);
    pts.extend_from_slice(&right[1..]);
    pts
}

/// Uniform breakpoints.
fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k == n {
            pts.push(b);
        } else {
            pts.push(a + (b - a) * k as f64 / n as f64);
        }
    }
    pts
}

/// Append `seg` to `lines`, checking the shared joint matches exactly.
fn append_segment(lines: &mut Vec<f64>, seg: &[f64]) {
    if let Some(&last) = lines.last() {
        debug_assert!(last == seg[0], "segment joint mismatch: {last} vs {}", seg[0]);
        lines.extend_from_slice(&seg[1..]);
    } else {
        lines.extend_from_slice(seg);
    }
}

/// Build the fine-scale structure mesh.  The bottom block occupies
/// `omega x (-depth, 0)`, the band `omega x (0, delta)`, and the top block
/// `omega x (delta, depth)`.
pub fn build_structure_mesh(
    s: &LayerScaling,
    omega: (f64, f64),
    depth: f64,
    res: &MeshResolution,
    fill: LayerFill,
) -> Result<QuadMesh> {
    if !(omega.1 > omega.0) {
        return Err(Error::Domain(format!(
            "empty interface interval ({}, {})",
            omega.0, omega.1
        )));
    }
    if !(depth > s.delta) {
        return Err(Error::Domain(format!(
            "block depth {} must exceed the band height {}",
            depth, s.delta
        )));
    }
    if res.beam_nx == 0 || res.beam_ny == 0 || !(res.scale > 0.0) {
        return Err(Error::Resolution(
            "beam element counts and scale must be positive".into(),
        ));
    }
    if !(res.grading_ratio >= 1.0) || !(res.max_elem_size > 0.0) {
        return Err(Error::Resolution(
            "grading ratio must be >= 1 and the size cap positive".into(),
        ));
    }
    let centers = interior_beam_centers(omega, s.epsilon);
    if centers.is_empty() {
        return Err(Error::EmptyLayer);
    }
    let (nx_beam, ny_beam, h_max) = res.effective();
    let hx_fine = 2.0 * s.r / nx_beam as f64;
    let hy_fine = s.delta / ny_beam as f64;
    if res.min_elem_size > 0.0 && (hx_fine < res.min_elem_size || hy_fine < res.min_elem_size) {
        return Err(Error::Refinement {
            required: hx_fine.min(hy_fine),
            actual: res.min_elem_size,
        });
    }
    let ratio = res.grading_ratio;

    // x grid: margin, then alternating beams and gaps, then margin.
    let mut xs: Vec<f64> = Vec::new();
    let first_left = centers[0] - s.r;
    if first_left > omega.0 + 1e-14 {
        // Fine end must sit at the beam edge: mirror the grading.
        let seg = graded_one_sided(omega.0, first_left, hx_fine, h_max, ratio);
        append_segment(&mut xs, &mirrored(&seg, omega.0, first_left));
    } else {
        xs.push(first_left);
    }
    for (k, &c) in centers.iter().enumerate() {
        append_segment(&mut xs, &uniform(c - s.r, c + s.r, nx_beam));
        let right = c + s.r;
        let next_left = if k + 1 < centers.len() {
            Some(centers[k + 1] - s.r)
        } else {
            None
        };
        match next_left {
            Some(nl) => append_segment(&mut xs, &graded_two_sided(right, nl, hx_fine, h_max, ratio)),
            None => {
                if omega.1 > right + 1e-14 {
                    append_segment(
                        &mut xs,
                        &graded_one_sided(right, omega.1, hx_fine, h_max, ratio),
                    );
                }
            }
        }
    }

    // y grid: graded block below, uniform band, graded block above.
    let mut ys: Vec<f64> = Vec::new();
    {
        let seg = graded_one_sided(0.0, depth, hy_fine.min(h_max), h_max, ratio);
        append_segment(&mut ys, &mirrored(&seg, -depth, 0.0));
    }
    append_segment(&mut ys, &uniform(0.0, s.delta, ny_beam));
    append_segment(
        &mut ys,
        &graded_one_sided(s.delta, depth, hy_fine.min(h_max), h_max, ratio),
    );

    let ncx = xs.len() - 1;
    let ncy = ys.len() - 1;
    let nvx = xs.len();

    // Activity and tags per grid cell.
    let in_beam = |x: f64| -> bool {
        centers
            .iter()
            .any(|&c| x > c - s.r - 1e-14 && x < c + s.r + 1e-14)
    };
    let mut cell_elem = vec![None; ncx * ncy];
    let mut active = Vec::new(); // (ix, iy, tag)
    for iy in 0..ncy {
        let ymid = 0.5 * (ys[iy] + ys[iy + 1]);
        for ix in 0..ncx {
            let xmid = 0.5 * (xs[ix] + xs[ix + 1]);
            if ymid < 0.0 || ymid > s.delta {
                active.push((ix, iy, ElemTag::Bulk));
            } else {
                let beam = in_beam(xmid);
                if beam {
                    active.push((ix, iy, ElemTag::Beam));
                } else if fill == LayerFill::Full {
                    active.push((ix, iy, ElemTag::Bulk));
                }
            }
        }
    }

    // Compact node numbering over used grid vertices.
    let mut node_id = vec![usize::MAX; nvx * ys.len()];
    let mut nodes = Vec::new();
    let mut elems = Vec::new();
    let mut tags = Vec::new();
    for &(ix, iy, tag) in &active {
        let corners = [
            (ix, iy),
            (ix + 1, iy),
            (ix + 1, iy + 1),
            (ix, iy + 1),
        ];
        let mut ids = [0usize; 4];
        for (k, &(gx, gy)) in corners.iter().enumerate() {
            let g = gx + gy * nvx;
            if node_id[g] == usize::MAX {
                node_id[g] = nodes.len();
                nodes.push([xs[gx], ys[gy]]);
            }
            ids[k] = node_id[g];
        }
        cell_elem[ix + iy * ncx] = Some(elems.len());
        elems.push(ids);
        tags.push(tag);
    }

    let line_nodes = |ys_line: f64, node_id: &[usize], nodes: &[[f64; 2]]| -> Vec<usize> {
        let iy = ys
            .iter()
            .position(|&y| y == ys_line)
            .expect("grid line present");
        let mut out = Vec::new();
        for ix in 0..nvx {
            let g = ix + iy * nvx;
            if node_id[g] != usize::MAX {
                out.push(node_id[g]);
            }
        }
        out.sort_by(|&a, &b| nodes[a][0].partial_cmp(&nodes[b][0]).unwrap());
        out
    };
    let gamma = line_nodes(-depth, &node_id, &nodes);
    let sigma_minus = line_nodes(0.0, &node_id, &nodes);
    let sigma_plus = line_nodes(s.delta, &node_id, &nodes);

    Ok(QuadMesh {
        nodes,
        elems,
        tags,
        xs,
        ys,
        gamma,
        sigma_minus,
        sigma_plus,
        beam_centers: centers,
        r: s.r,
        delta: s.delta,
        cell_elem,
    })
}

/// Full tensor-product rectangle mesh (all `Bulk`) over explicit grid
/// lines; nodes are numbered row-major with x fastest, the clamped set is
/// the bottom row.
pub fn build_tensor_block(xs: Vec<f64>, ys: Vec<f64>) -> Result<QuadMesh> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::Domain("degenerate block".into()));
    }
    for lines in [&xs, &ys] {
        if lines.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("grid lines must be strictly increasing".into()));
        }
    }
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let nvx = xs.len();
    let mut nodes = Vec::with_capacity(nvx * ys.len());
    for &y in &ys {
        for &x in &xs {
            nodes.push([x, y]);
        }
    }
    let mut elems = Vec::with_capacity(nx * ny);
    let mut cell_elem = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let n0 = ix + iy * nvx;
            cell_elem.push(Some(elems.len()));
            elems.push([n0, n0 + 1, n0 + 1 + nvx, n0 + nvx]);
        }
    }
    let tags = vec![ElemTag::Bulk; elems.len()];
    let gamma: Vec<usize> = (0..nvx).collect();
    Ok(QuadMesh {
        nodes,
        elems,
        tags,
        xs,
        ys,
        gamma,
        sigma_minus: Vec::new(),
        sigma_plus: Vec::new(),
        beam_centers: Vec::new(),
        r: 0.0,
        delta: 0.0,
        cell_elem,
    })
}

/// Plain uniform rectangle mesh (all `Bulk`), used by verification tests
/// and the homogenised block solver.
pub fn build_block_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<QuadMesh> {
    if !(x1 > x0 && y1 > y0) || nx == 0 || ny == 0 {
        return Err(Error::Domain("degenerate block".into()));
    }
    build_tensor_block(uniform(x0, x1, nx), uniform(y0, y1, ny))
}

/// Geometrically graded breakpoints with the fine size at the `a` end,
/// exposed for solvers that build their own tensor blocks.
pub fn graded_lines(a: f64, b: f64, h_fine: f64, h_max: f64, ratio: f64) -> Vec<f64> {
    graded_one_sided(a, b, h_fine, h_max, ratio)
}

/// Reverse a graded segment onto `[a, b]` (fine end swaps sides).
pub fn mirrored_lines(seg: &[f64], a: f64, b: f64) -> Vec<f64> {
    mirrored(seg, a, b)
}

/// Uniform breakpoints from `a` to `b`, exposed for tensor-block callers.
pub fn uniform_lines(a: f64, b: f64, n: usize) -> Vec<f64> {
    uniform(a, b, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::derive_geometry;

    fn example_scaling() -> LayerScaling {
        derive_geometry(0.1, 1.0, 1.0, 1.5, 4.0 / 3.0).unwrap()
    }

    #[test]
    fn nine_interior_beams_in_unit_interval() {
        let c = interior_beam_centers((0.0, 1.0), 0.1);
        assert_eq!(c.len(), 9);
        assert!((c[0] - 0.1).abs() < 1e-12);
        assert!((c[8] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn boundary_cells_are_excluded() {
        // Shifted window cuts the outermost cells: cell k spans
        // (0.1 k - 0.05, 0.1 k + 0.05) and must fit inside the window.
        let c = interior_beam_centers((0.06, 0.96), 0.1);
        assert!((c.first().unwrap() - 0.2).abs() < 1e-12);
        assert!((c.last().unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(c.len(), 8);
        // Cells touching the window boundary still count.
        let c2 = interior_beam_centers((0.05, 0.95), 0.1);
        assert_eq!(c2.len(), 9);
        let c3 = interior_beam_centers((0.0, 0.14), 0.1);
        assert!(c3.is_empty());
    }

    #[test]
    fn empty_layer_is_an_error() {
        let s = example_scaling();
        let err = build_structure_mesh(&s, (0.0, 0.05), 1.0, &MeshResolution::default(), LayerFill::Beams)
            .unwrap_err();
        assert!(matches!(err, Error::EmptyLayer));
    }

    #[test]
    fn structure_mesh_resolves_beam_columns() {
        let s = example_scaling();
        let mesh =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Beams)
                .unwrap();
        assert_eq!(mesh.beam_centers.len(), 9);
        let beam_cells = mesh.tags.iter().filter(|t| **t == ElemTag::Beam).count();
        assert_eq!(beam_cells, 9 * 4 * 8);
        // Interface node lines share the x grid.
        assert_eq!(mesh.sigma_minus.len(), mesh.sigma_plus.len());
        for (&a, &b) in mesh.sigma_minus.iter().zip(&mesh.sigma_plus) {
            assert!((mesh.nodes[a][0] - mesh.nodes[b][0]).abs() < 1e-14);
            assert_eq!(mesh.nodes[a][1], 0.0);
            assert!((mesh.nodes[b][1] - s.delta).abs() < 1e-15);
        }
        assert!(!mesh.gamma.is_empty());
        for &g in &mesh.gamma {
            assert_eq!(mesh.nodes[g][1], -1.0);
        }
    }

    #[test]
    fn mesh_quality_is_sane() {
        let s = example_scaling();
        let mesh =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Beams)
                .unwrap();
        let q = mesh.quality();
        assert!(q.min_area > 0.0);
        // Rescaling after grading can push neighbour ratios slightly past the
        // nominal 1.5.
        assert!(q.max_neighbor_ratio < 1.75, "ratio {}", q.max_neighbor_ratio);
        assert!(q.max_aspect < 500.0, "aspect {}", q.max_aspect);
    }

    #[test]
    fn full_fill_covers_the_band() {
        let s = example_scaling();
        let mesh =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Full)
                .unwrap();
        let band_area: f64 = (0..mesh.n_elems())
            .filter(|&e| {
                let c = mesh.elem_coords(e);
                c[0][1] >= 0.0 && c[2][1] <= s.delta + 1e-15
            })
            .map(|e| {
                let c = mesh.elem_coords(e);
                (c[1][0] - c[0][0]) * (c[3][1] - c[0][1])
            })
            .sum();
        assert!((band_area - s.delta).abs() < 1e-12 * s.delta.max(1.0));
    }

    #[test]
    fn refinement_guard_reports_required_size() {
        let s = example_scaling();
        let res = MeshResolution {
            min_elem_size: 1.0,
            ..MeshResolution::default()
        };
        match build_structure_mesh(&s, (0.0, 1.0), 1.0, &res, LayerFill::Beams) {
            Err(Error::Refinement { required, actual }) => {
                assert!(required < actual);
                assert!(required > 0.0);
            }
            other => panic!("expected refinement error, got {other:?}"),
        }
    }

    #[test]
    fn locate_finds_elements_and_voids() {
        let s = example_scaling();
        let mesh =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Beams)
                .unwrap();
        // Bulk point.
        let (e, [xi, eta]) = mesh.locate([0.43, -0.5]).unwrap();
        let c = mesh.elem_coords(e);
        assert!(c[0][0] <= 0.43 && 0.43 <= c[1][0]);
        assert!(c[0][1] <= -0.5 && -0.5 <= c[3][1]);
        assert!(xi.abs() <= 1.0 + 1e-12 && eta.abs() <= 1.0 + 1e-12);
        // Mid-gap band point is void.
        assert!(mesh.locate([0.15, 0.5 * s.delta]).is_none());
        // Beam interior point is meshed and tagged.
        let (e2, _) = mesh.locate([0.1, 0.5 * s.delta]).unwrap();
        assert_eq!(mesh.tags[e2], ElemTag::Beam);
        // Outside the grid.
        assert!(mesh.locate([-0.2, 0.0]).is_none());
        assert!(mesh.locate([0.5, 2.0]).is_none());
    }

    #[test]
    fn beam_center_lookup() {
        let s = example_scaling();
        let mesh =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Beams)
                .unwrap();
        assert_eq!(mesh.beam_center_for(0.1), Some(0.1));
        assert_eq!(mesh.beam_center_for(0.1 + 0.5 * s.r), Some(0.1));
        assert_eq!(mesh.beam_center_for(0.15), None);
    }

    #[test]
    fn block_mesh_is_uniform_and_complete() {
        let mesh = build_block_mesh(0.0, 2.0, -1.0, 0.0, 4, 2).unwrap();
        assert_eq!(mesh.n_nodes(), 5 * 3);
        assert_eq!(mesh.n_elems(), 8);
        let q = mesh.quality();
        assert!((q.min_area - 0.25).abs() < 1e-14);
        assert_eq!(mesh.gamma.len(), 5);
    }

    #[test]
    fn graded_segment_lands_exactly_and_respects_ratio() {
        let pts = graded_one_sided(0.0, 1.0, 0.01, 0.2, 1.5);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 1.0);
        for w in pts.windows(3) {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            assert!(b / a < 1.5 + 1e-9);
        }
        let two = graded_two_sided(0.0, 1.0, 0.05, 0.3, 1.5);
        // Symmetric about the midpoint.
        for (i, &x) in two.iter().enumerate() {
            let mirror = two[two.len() - 1 - i];
            assert!((x + mirror - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refinement_scale_refines_everywhere() {
        let s = example_scaling();
        let base =
            build_structure_mesh(&s, (0.0, 1.0), 1.0, &MeshResolution::default(), LayerFill::Beams)
                .unwrap();
        let res2 = MeshResolution {
            scale: 2.0,
            ..MeshResolution::default()
        };
        let fine = build_structure_mesh(&s, (0.0, 1.0), 1.0, &res2, LayerFill::Beams).unwrap();
        // Fine directions double exactly; graded directions gain log-many
        // lines, so the total grows by well over 2x but less than 4x.
        assert!(fine.n_elems() > 2 * base.n_elems());
        let beam_cells = fine.tags.iter().filter(|t| **t == ElemTag::Beam).count();
        assert_eq!(beam_cells, 9 * 8 * 16);
    }
}
