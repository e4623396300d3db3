//! Legacy ASCII VTK export of the quad meshes with nodal and per-element
//! data, for inspecting solutions in ParaView-compatible viewers.

use std::io::Write as _;
use std::path::Path;

use crate::error::Error;
use crate::fem::recover_stress;
use crate::mesh::{ElemTag, QuadMesh};
use crate::scaling::MaterialParams;
use crate::Result;

/// One nodal field attached to the export.
pub enum PointField<'a> {
    Scalar(&'a str, &'a [f64]),
    /// 2D vectors are padded with a zero third component.
    Vector(&'a str, &'a [[f64; 2]]),
}

/// One per-element field attached to the export.
pub enum CellField<'a> {
    Scalar(&'a str, &'a [f64]),
}

/// Render the mesh and fields as a legacy ASCII VTK unstructured grid.
pub fn vtk_string(
    mesh: &QuadMesh,
    points: &[PointField<'_>],
    cells: &[CellField<'_>],
) -> Result<String> {
    for f in points {
        let (name, len) = match f {
            PointField::Scalar(n, d) => (*n, d.len()),
            PointField::Vector(n, d) => (*n, d.len()),
        };
        if len != mesh.n_nodes() {
            return Err(Error::Shape(format!(
                "point field '{name}' has {len} values for {} nodes",
                mesh.n_nodes()
            )));
        }
    }
    for CellField::Scalar(name, d) in cells {
        if d.len() != mesh.n_elems() {
            return Err(Error::Shape(format!(
                "cell field '{name}' has {} values for {} elements",
                d.len(),
                mesh.n_elems()
            )));
        }
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("layerbeam export\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    out.push_str(&format!("POINTS {} double\n", mesh.n_nodes()));
    for p in &mesh.nodes {
        out.push_str(&format!("{:.12e} {:.12e} 0.0\n", p[0], p[1]));
    }
    out.push_str(&format!(
        "CELLS {} {}\n",
        mesh.n_elems(),
        5 * mesh.n_elems()
    ));
    for e in &mesh.elems {
        out.push_str(&format!("4 {} {} {} {}\n", e[0], e[1], e[2], e[3]));
    }
    out.push_str(&format!("CELL_TYPES {}\n", mesh.n_elems()));
    for _ in 0..mesh.n_elems() {
        out.push_str("9\n");
    }

    if !points.is_empty() {
        out.push_str(&format!("POINT_DATA {}\n", mesh.n_nodes()));
        for f in points {
            match f {
                PointField::Scalar(name, data) => {
                    out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
                    for v in *data {
                        out.push_str(&format!("{v:.12e}\n"));
                    }
                }
                PointField::Vector(name, data) => {
                    out.push_str(&format!("VECTORS {name} double\n"));
                    for v in *data {
                        out.push_str(&format!("{:.12e} {:.12e} 0.0\n", v[0], v[1]));
                    }
                }
            }
        }
    }
    if !cells.is_empty() {
        out.push_str(&format!("CELL_DATA {}\n", mesh.n_elems()));
        for CellField::Scalar(name, data) in cells {
            out.push_str(&format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"));
            for v in *data {
                out.push_str(&format!("{v:.12e}\n"));
            }
        }
    }
    Ok(out)
}

/// Write the VTK rendering to a file.
pub fn write_vtk(
    mesh: &QuadMesh,
    points: &[PointField<'_>],
    cells: &[CellField<'_>],
    path: &Path,
) -> Result<()> {
    let text = vtk_string(mesh, points, cells)?;
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(())
}

/// Export a displacement solution with per-element von Mises stress and
/// material tag.
pub fn write_solution_vtk(
    mesh: &QuadMesh,
    bulk: &MaterialParams,
    beam: &MaterialParams,
    u: &[[f64; 2]],
    path: &Path,
) -> Result<()> {
    let samples = recover_stress(mesh, bulk, beam, u);
    let von_mises: Vec<f64> = samples.iter().map(|s| s.von_mises).collect();
    let tags: Vec<f64> = mesh
        .tags
        .iter()
        .map(|t| match t {
            ElemTag::Bulk => 0.0,
            ElemTag::Beam => 1.0,
        })
        .collect();
    write_vtk(
        mesh,
        &[PointField::Vector("displacement", u)],
        &[
            CellField::Scalar("von_mises", &von_mises),
            CellField::Scalar("material", &tags),
        ],
        path,
    )
}
