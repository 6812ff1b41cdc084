//! CSV field files: header `x1[,x2],value`, one row per active cell in
//! lexicographic cell order, coordinates at cell centers.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Result, VarlexError};
use crate::grid::{Domain, GridFunction};

pub fn write_function_csv<W: Write>(f: &GridFunction, out: W) -> Result<()> {
    let domain = f.domain();
    let mut writer = csv::Writer::from_writer(out);
    let header: &[&str] = if domain.dim() == 1 {
        &["x1", "value"]
    } else {
        &["x1", "x2", "value"]
    };
    writer.write_record(header)?;
    for &c in domain.active_cells() {
        let x = domain.center(c);
        let mut row: Vec<String> = x[..domain.dim()].iter().map(|v| v.to_string()).collect();
        row.push(f.get(c).to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn function_to_csv_string(f: &GridFunction) -> Result<String> {
    let mut buf = Vec::new();
    write_function_csv(f, &mut buf)?;
    String::from_utf8(buf).map_err(|e| VarlexError::Parse(e.to_string()))
}

/// Parsed rows of a field file: coordinates and values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRows {
    pub dim: usize,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

pub fn read_rows<R: Read>(input: R) -> Result<FieldRows> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let dim = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x1", "value"] => 1,
        ["x1", "x2", "value"] => 2,
        _ => {
            return Err(VarlexError::Parse(format!(
                "expected header `x1,value` or `x1,x2,value`, got `{}`",
                header.join(",")
            )))
        }
    };
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let nums: Vec<f64> = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| VarlexError::Parse(format!("row {}: `{s}`: {e}", line + 1)))
            })
            .collect::<Result<_>>()?;
        if nums.len() != dim + 1 {
            return Err(VarlexError::Parse(format!(
                "row {}: expected {} columns, got {}",
                line + 1,
                dim + 1,
                nums.len()
            )));
        }
        let mut p = [0.0; 2];
        p[..dim].copy_from_slice(&nums[..dim]);
        points.push(p);
        values.push(nums[dim]);
    }
    if points.is_empty() {
        return Err(VarlexError::Parse("field file has no rows".into()));
    }
    Ok(FieldRows { dim, points, values })
}

/// Cell containing point `x`, if it falls inside the box.
fn locate(domain: &Domain, x: &[f64; 2]) -> Option<usize> {
    let h = domain.spacing();
    let mut idx = [0usize; 2];
    for axis in 0..domain.dim() {
        let (lo, _) = domain.bounds()[axis];
        let t = ((x[axis] - lo) / h).floor();
        if t < 0.0 || t >= domain.shape()[axis] as f64 {
            return None;
        }
        idx[axis] = t as usize;
    }
    Some(match domain.dim() {
        1 => idx[0],
        _ => idx[0] * domain.shape()[1] + idx[1],
    })
}

/// Places rows on an existing domain. Cells without a row are zero; rows
/// outside the active cells or repeating a cell are rejected.
pub fn rows_to_function(rows: &FieldRows, domain: &Arc<Domain>) -> Result<GridFunction> {
    if rows.dim != domain.dim() {
        return Err(VarlexError::Parse(format!(
            "field file is {}-dimensional, domain is {}-dimensional",
            rows.dim,
            domain.dim()
        )));
    }
    let mut values = vec![0.0; domain.cell_count()];
    let mut seen = vec![false; domain.cell_count()];
    for (row, (x, &v)) in rows.points.iter().zip(&rows.values).enumerate() {
        let cell = locate(domain, x)
            .filter(|&c| domain.is_active(c))
            .ok_or_else(|| VarlexError::Parse(format!("row {}: {:?} is not an active cell", row + 1, x)))?;
        if std::mem::replace(&mut seen[cell], true) {
            return Err(VarlexError::Parse(format!("row {}: cell {cell} listed twice", row + 1)));
        }
        values[cell] = v;
    }
    GridFunction::new(domain, values)
}

/// Recovers the grid from the cell centers listed in a field file: spacing
/// from the smallest gap between distinct coordinates, box from the extreme
/// centers, and the mask from the rows present.
pub fn infer_domain(rows: &FieldRows) -> Result<Arc<Domain>> {
    let dim = rows.dim;
    let mut bounds = Vec::with_capacity(dim);
    let mut resolution = Vec::with_capacity(dim);
    let mut spacing = f64::INFINITY;
    let mut extents = Vec::with_capacity(dim);
    for axis in 0..dim {
        let mut sorted: Vec<f64> = rows.points.iter().map(|p| p[axis]).collect();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        for w in sorted.windows(2) {
            spacing = spacing.min(w[1] - w[0]);
        }
        extents.push((sorted[0], sorted[sorted.len() - 1]));
    }
    if !spacing.is_finite() {
        // a single center on every axis: one cell of unit side
        spacing = 1.0;
    }
    for &(lo, hi) in &extents {
        let cells = ((hi - lo) / spacing).round() as usize + 1;
        let start = lo - 0.5 * spacing;
        bounds.push((start, start + cells as f64 * spacing));
        resolution.push(cells);
    }
    let domain = Domain::with_mask(&bounds, &resolution, vec![true; resolution.iter().product()])?;
    let mut mask = vec![false; domain.cell_count()];
    for x in &rows.points {
        let cell = locate(&domain, x)
            .ok_or_else(|| VarlexError::Parse(format!("{x:?} does not sit on a uniform grid")))?;
        mask[cell] = true;
    }
    Ok(Arc::new(Domain::with_mask(&bounds, &resolution, mask)?))
}

pub fn read_function_csv<R: Read>(input: R, domain: Option<&Arc<Domain>>) -> Result<GridFunction> {
    let rows = read_rows(input)?;
    match domain {
        Some(d) => rows_to_function(&rows, d),
        None => {
            let d = infer_domain(&rows)?;
            rows_to_function(&rows, &d)
        }
    }
}

pub fn read_function_file(path: &Path, domain: Option<&Arc<Domain>>) -> Result<GridFunction> {
    let file = std::fs::File::open(path).map_err(|e| VarlexError::Io(format!("{}: {e}", path.display())))?;
    read_function_csv(file, domain)
}
