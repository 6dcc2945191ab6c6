//! Finite metric spaces: point clouds, full and partial distance matrices.
//!
//! The central object for the subsampled estimators is the
//! [`PartialDistanceMatrix`], the `k x n` array of distances `d(s, x)` for a
//! subset `S` of size `k` inside a space of size `n`. Everything downstream
//! works off rows of this array, so memory stays `O(k*n)` rather than
//! `O(n^2)`.

use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A finite set of points in Euclidean space, one coordinate vector per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    n_points: usize,
    ambient_dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("point cloud has no points".into()));
        }
        let ambient_dim = points[0].len();
        if ambient_dim == 0 {
            return Err(Error::Shape("points must have at least one coordinate".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * ambient_dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(Error::Shape(format!(
                    "point {} has {} coordinates, expected {}",
                    i,
                    p.len(),
                    ambient_dim
                )));
            }
            for &c in p {
                if !c.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite coordinate in point {}",
                        i
                    )));
                }
                coords.push(c);
            }
        }
        Ok(Self {
            coords,
            n_points: points.len(),
            ambient_dim,
        })
    }

    /// Construct from a flat row-major coordinate buffer.
    pub fn from_flat(coords: Vec<f64>, n_points: usize, ambient_dim: usize) -> Result<Self> {
        if n_points == 0 || ambient_dim == 0 {
            return Err(Error::InvalidArgument("n_points and ambient_dim must be positive".into()));
        }
        if coords.len() != n_points * ambient_dim {
            return Err(Error::Shape("coordinate buffer length mismatch".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Self {
            coords,
            n_points,
            ambient_dim,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    /// Distances from point `i` to every point, written into `out` (length n).
    pub fn distance_row(&self, i: usize, out: &mut [f64]) {
        let p = self.point(i);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = euclidean(p, self.point(j));
        }
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Validated full `n x n` distance matrix: symmetric, zero diagonal,
/// nonnegative finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    /// Wrap a row-major buffer that already satisfies the invariants exactly.
    pub fn new(values: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("distance matrix must be nonempty".into()));
        }
        if values.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries, got {}", n * n, values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::MetricViolation(format!("nonzero diagonal at {}", i)));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::MetricViolation(format!(
                        "entry ({}, {}) = {} is not a valid distance",
                        i, j, v
                    )));
                }
                if values[j * n + i] != v {
                    return Err(Error::MetricViolation(format!("asymmetry at ({}, {})", i, j)));
                }
            }
        }
        Ok(Self { values, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// A strictly increasing list of indices selecting the subset `S` out of a
/// space of `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetIndex {
    indices: Vec<usize>,
    n: usize,
}

impl SubsetIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("subset must be nonempty".into()));
        }
        for w in indices.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(
                    "subset indices must be strictly increasing".into(),
                ));
            }
        }
        if *indices.last().unwrap() >= n {
            return Err(Error::IndexOutOfRange(format!(
                "subset index {} >= n = {}",
                indices.last().unwrap(),
                n
            )));
        }
        Ok(Self { indices, n })
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::new((0..n).collect(), n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// The `k x n` array of distances from each subset element to every point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDistanceMatrix {
    values: Vec<f64>,
    subset: SubsetIndex,
    n: usize,
}

impl PartialDistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.subset.len()
    }

    pub fn subset(&self) -> &SubsetIndex {
        &self.subset
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n)
    }
}

/// Compute the partial distance matrix for `subset` against the whole cloud.
///
/// Allocates `k*n` values only; rows are independent and computed in
/// parallel, written into fixed slots so the result does not depend on the
/// worker count.
pub fn partial_distances(cloud: &PointCloud, subset: &SubsetIndex) -> Result<PartialDistanceMatrix> {
    let n = cloud.n_points();
    if subset.n() != n {
        return Err(Error::IndexOutOfRange(format!(
            "subset built for n = {}, cloud has {} points",
            subset.n(),
            n
        )));
    }
    let k = subset.len();
    let mut values = vec![0.0; k * n];
    values
        .par_chunks_exact_mut(n)
        .zip(subset.indices().par_iter())
        .for_each(|(row, &s)| cloud.distance_row(s, row));
    Ok(PartialDistanceMatrix {
        values,
        subset: subset.clone(),
        n,
    })
}

/// Subset rows of an already-validated distance matrix.
pub fn partial_from_matrix(dm: &DistanceMatrix, subset: &SubsetIndex) -> Result<PartialDistanceMatrix> {
    let n = dm.n();
    if subset.n() != n {
        return Err(Error::IndexOutOfRange(format!(
            "subset built for n = {}, matrix has {} points",
            subset.n(),
            n
        )));
    }
    let mut values = Vec::with_capacity(subset.len() * n);
    for &s in subset.indices() {
        values.extend_from_slice(dm.row(s));
    }
    Ok(PartialDistanceMatrix {
        values,
        subset: subset.clone(),
        n,
    })
}

/// Full pairwise Euclidean distance matrix of a cloud.
pub fn euclidean_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n_points();
    let mut values = vec![0.0; n * n];
    values
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(i, row)| cloud.distance_row(i, row));
    DistanceMatrix { values, n }
}

/// Either representation of a finite metric space accepted by the drivers.
#[derive(Debug, Clone)]
pub enum MetricSpace {
    Points(PointCloud),
    Matrix(DistanceMatrix),
}

impl MetricSpace {
    pub fn n_points(&self) -> usize {
        match self {
            MetricSpace::Points(c) => c.n_points(),
            MetricSpace::Matrix(m) => m.n(),
        }
    }

    pub fn partial(&self, subset: &SubsetIndex) -> Result<PartialDistanceMatrix> {
        match self {
            MetricSpace::Points(c) => partial_distances(c, subset),
            MetricSpace::Matrix(m) => partial_from_matrix(m, subset),
        }
    }

    /// Distances from point `i` to every point, without materialising `n x n`.
    pub fn distance_row(&self, i: usize, out: &mut [f64]) {
        match self {
            MetricSpace::Points(c) => c.distance_row(i, out),
            MetricSpace::Matrix(m) => out.copy_from_slice(m.row(i)),
        }
    }
}

// --- file I/O ---------------------------------------------------------------

/// Parse a delimiter-separated numeric table (comma or whitespace). A single
/// non-numeric first row is treated as a header and skipped. Returns rows and
/// the 1-based line numbers they came from.
fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    let mut first_data_line = true;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let cells: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let parsed: std::result::Result<Vec<f64>, _> =
            cells.iter().map(|c| c.parse::<f64>()).collect();
        match parsed {
            Ok(vals) => {
                if let Some(w) = width {
                    if vals.len() != w {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("expected {} columns, found {}", w, vals.len()),
                        });
                    }
                } else {
                    width = Some(vals.len());
                }
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "non-finite value".into(),
                    });
                }
                rows.push(vals);
                first_data_line = false;
            }
            Err(_) => {
                if first_data_line {
                    // header row
                    first_data_line = false;
                    continue;
                }
                let bad = cells
                    .iter()
                    .find(|c| c.parse::<f64>().is_err())
                    .copied()
                    .unwrap_or("");
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-numeric cell {:?}", bad),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!("{} contains no data rows", path.display())));
    }
    Ok(rows)
}

/// Load a point cloud from a delimiter-separated numeric file, one point per
/// row. An optional header row is auto-detected and skipped.
pub fn load_points(path: &Path) -> Result<PointCloud> {
    PointCloud::new(read_table(path)?)
}

/// Load and validate a square distance matrix from a numeric file.
///
/// Asymmetry is tolerated up to `1e-9` relative to the largest entry and then
/// averaged away so the stored matrix is exactly symmetric; diagonal entries
/// up to `1e-12` are snapped to zero. Anything worse is rejected.
pub fn load_distance_matrix(path: &Path) -> Result<DistanceMatrix> {
    let rows = read_table(path)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(Error::Shape(format!(
            "distance matrix must be square, got {} x {}",
            n,
            rows[0].len()
        )));
    }
    let max_entry = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let sym_tol = 1e-9 * max_entry.max(1.0);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            if v < 0.0 {
                return Err(Error::MetricViolation(format!(
                    "negative entry {} at ({}, {})",
                    v, i, j
                )));
            }
            if i == j && v.abs() > 1e-12 {
                return Err(Error::MetricViolation(format!(
                    "nonzero diagonal {} at ({}, {})",
                    v, i, i
                )));
            }
            let w = rows[j][i];
            if (v - w).abs() > sym_tol {
                return Err(Error::MetricViolation(format!(
                    "asymmetry at ({}, {}): {} vs {}",
                    i, j, v, w
                )));
            }
            values[i * n + j] = if i == j { 0.0 } else { 0.5 * (v + w) };
        }
    }
    DistanceMatrix::new(values, n)
}

/// Write a point cloud as comma-separated text with full-precision floats.
pub fn write_points(cloud: &PointCloud, path: &Path) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for i in 0..cloud.n_points() {
        let row: Vec<String> = cloud.point(i).iter().map(|v| format!("{:.16e}", v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
