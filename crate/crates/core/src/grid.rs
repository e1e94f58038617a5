//! Truncated box grids, grid functions, differencing and quadrature.
//!
//! The box `[-R, R]^N` carries `n` nodes per axis with spacing `h = 2R/(n-1)`.
//! Fields representing elements of the energy space live on the interior
//! nodes; boundary nodes are implicitly zero, which realizes the zero
//! extension of a compactly supported function to all of `R^N`. Forward
//! differences produce one gradient per cell, where a cell is anchored at its
//! lowest-index corner node.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the box. Only the first `dim` coordinates are meaningful; the
/// rest stay zero so that Euclidean norms can use all entries.
pub type Point = [f64; 2];

/// Which lattice a sampled field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Every node of the box, boundary included (`n^N` points).
    Nodes,
    /// Interior nodes only (`(n-2)^N` points).
    Interior,
    /// Cell centers (`(n-1)^N` points).
    Cells,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    radius: f64,
    nodes_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, radius: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if nodes_per_axis < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes per axis, got {nodes_per_axis}")));
        }
        Ok(Grid {
            dim,
            radius,
            nodes_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.nodes_per_axis - 1) as f64
    }

    /// Quadrature weight `h^N` of one node or cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Points per axis of the given layout.
    pub fn axis_len(&self, layout: Layout) -> usize {
        match layout {
            Layout::Nodes => self.nodes_per_axis,
            Layout::Interior => self.nodes_per_axis - 2,
            Layout::Cells => self.nodes_per_axis - 1,
        }
    }

    pub fn len(&self, layout: Layout) -> usize {
        self.axis_len(layout).pow(self.dim as u32)
    }

    fn axis_offset(&self, layout: Layout) -> f64 {
        let h = self.spacing();
        match layout {
            Layout::Nodes => -self.radius,
            Layout::Interior => -self.radius + h,
            Layout::Cells => -self.radius + 0.5 * h,
        }
    }

    /// Lexicographic multi-index of a flat index (first axis slowest).
    pub fn multi_index(&self, layout: Layout, index: usize) -> [usize; 2] {
        let m = self.axis_len(layout);
        if self.dim == 1 {
            [index, 0]
        } else {
            [index / m, index % m]
        }
    }

    pub fn flat_index(&self, layout: Layout, multi: [usize; 2]) -> usize {
        if self.dim == 1 {
            multi[0]
        } else {
            multi[0] * self.axis_len(layout) + multi[1]
        }
    }

    pub fn point(&self, layout: Layout, index: usize) -> Point {
        let h = self.spacing();
        let off = self.axis_offset(layout);
        let mi = self.multi_index(layout, index);
        let mut x = [0.0; 2];
        for k in 0..self.dim {
            x[k] = off + mi[k] as f64 * h;
        }
        x
    }

    pub fn points(&self, layout: Layout) -> impl Iterator<Item = Point> + '_ {
        (0..self.len(layout)).map(move |i| self.point(layout, i))
    }

    /// Interior-node value at a node multi-index, with zero on the boundary.
    pub(crate) fn node_value(&self, interior: &[f64], node: [usize; 2]) -> f64 {
        let last = self.nodes_per_axis - 1;
        for k in 0..self.dim {
            if node[k] == 0 || node[k] == last {
                return 0.0;
            }
        }
        let inner = [node[0].saturating_sub(1), node[1].saturating_sub(1)];
        interior[self.flat_index(Layout::Interior, inner)]
    }

    /// Same box, `2n - 1` nodes per axis (spacing halved, old nodes kept).
    pub fn refined(&self) -> Grid {
        Grid {
            nodes_per_axis: 2 * self.nodes_per_axis - 1,
            ..*self
        }
    }
}

/// Nodal values of a scalar or vector field on one layout of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    layout: Layout,
    components: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, layout: Layout, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidArgument("a field needs at least one component".into()));
        }
        let expected = grid.len(layout) * components;
        if values.len() != expected {
            return Err(Error::GridMismatch(format!(
                "expected {expected} values for {layout:?} x {components}, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction {
            grid,
            layout,
            components,
            values,
        })
    }

    /// A scalar field on the interior nodes (an element of the energy space).
    pub fn interior(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, Layout::Interior, 1, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            layout: Layout::Interior,
            components: 1,
            values: vec![0.0; grid.len(Layout::Interior)],
        }
    }

    pub fn from_fn(grid: Grid, layout: Layout, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = grid.points(layout).map(|x| f(&x[..dim])).collect();
        Self::new(grid, layout, 1, values)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, layout: Layout, components: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len(layout) * components);
        GridFunction {
            grid,
            layout,
            components,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Number of sample points (not counting components).
    pub fn len(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// Pointwise Euclidean magnitude; scalar fields map to `|u|`.
    pub fn magnitude(&self) -> GridFunction {
        let c = self.components;
        let values = self
            .values
            .chunks(c)
            .map(|v| {
                if c == 1 {
                    v[0].abs()
                } else {
                    v.iter().map(|x| x * x).sum::<f64>().sqrt()
                }
            })
            .collect();
        GridFunction::from_parts_unchecked(self.grid, self.layout, 1, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_parts_unchecked(self.grid, self.layout, self.components, self.values.iter().map(|v| f(*v)).collect())
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &GridFunction, b: f64) -> Result<GridFunction> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(GridFunction::from_parts_unchecked(self.grid, self.layout, self.components, values))
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.axpby(1.0, other, -1.0)
    }

    /// Pointwise product of two scalar fields.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Ok(GridFunction::from_parts_unchecked(self.grid, self.layout, self.components, values))
    }

    pub fn check_same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid || self.layout != other.layout || self.components != other.components {
            return Err(Error::GridMismatch(format!(
                "{:?}/{:?}x{} vs {:?}/{:?}x{}",
                self.grid, self.layout, self.components, other.grid, other.layout, other.components
            )));
        }
        Ok(())
    }

    /// Discrete `L²` inner product `h^N Σ u·v`.
    pub fn dot(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut acc = CompensatedSum::default();
        for (x, y) in self.values.iter().zip(&other.values) {
            acc.add(x * y);
        }
        Ok(acc.total() * self.grid.cell_volume())
    }

    /// Discrete `L²` norm `sqrt(h^N Σ |u|²)`.
    pub fn l2_norm(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in &self.values {
            acc.add(v * v);
        }
        (acc.total() * self.grid.cell_volume()).sqrt()
    }

    /// Zero-extends an interior field onto a larger box with the same spacing.
    pub fn extend_to(&self, target: Grid) -> Result<GridFunction> {
        if self.layout != Layout::Interior || self.components != 1 {
            return Err(Error::InvalidArgument("only scalar interior fields can be extended".into()));
        }
        let extra = target.nodes_per_axis().checked_sub(self.grid.nodes_per_axis());
        let same_h = (target.spacing() - self.grid.spacing()).abs() <= 1e-12 * self.grid.spacing();
        match extra {
            Some(e) if e % 2 == 0 && same_h && target.dim() == self.grid.dim() => {
                let shift = e / 2;
                let mut out = vec![0.0; target.len(Layout::Interior)];
                for (i, v) in self.values.iter().enumerate() {
                    let mi = self.grid.multi_index(Layout::Interior, i);
                    let mut ti = [0usize; 2];
                    for k in 0..self.grid.dim() {
                        ti[k] = mi[k] + shift;
                    }
                    out[target.flat_index(Layout::Interior, ti)] = *v;
                }
                Ok(GridFunction::from_parts_unchecked(target, Layout::Interior, 1, out))
            }
            _ => Err(Error::GridMismatch(
                "target box must share spacing and be symmetrically larger".into(),
            )),
        }
    }

    /// Samples a coarse interior field onto the refined grid by linear
    /// interpolation (exact at the shared nodes).
    pub fn prolongate(&self) -> Result<GridFunction> {
        if self.layout != Layout::Interior || self.components != 1 {
            return Err(Error::InvalidArgument("only scalar interior fields can be prolongated".into()));
        }
        let coarse = self.grid;
        let fine = coarse.refined();
        let n = fine.axis_len(Layout::Nodes);
        let dim = coarse.dim();
        let mut out = vec![0.0; fine.len(Layout::Interior)];
        for (i, slot) in out.iter_mut().enumerate() {
            let mi = fine.multi_index(Layout::Interior, i);
            // fine node index = mi + 1; coarse node = fine node / 2
            let mut lo = [0usize; 2];
            let mut odd = [false; 2];
            for k in 0..dim {
                let fnode = mi[k] + 1;
                lo[k] = fnode / 2;
                odd[k] = fnode % 2 == 1;
            }
            let mut acc = 0.0;
            let corners = 1usize << dim;
            for c in 0..corners {
                let mut node = lo;
                let mut wgt = 1.0;
                for k in 0..dim {
                    if odd[k] {
                        wgt *= 0.5;
                        if c >> k & 1 == 1 {
                            node[k] += 1;
                        }
                    } else if c >> k & 1 == 1 {
                        wgt = 0.0;
                    }
                }
                if wgt > 0.0 && node.iter().take(dim).all(|&v| v < n.div_ceil(2)) {
                    acc += wgt * coarse.node_value(&self.values, node);
                }
            }
            *slot = acc;
        }
        Ok(GridFunction::from_parts_unchecked(fine, Layout::Interior, 1, out))
    }
}

/// Neumaier-compensated accumulator; additions happen in call order so the
/// result is reproducible bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Forward-difference gradient of an interior scalar field, one vector per
/// cell. Boundary nodes contribute their implicit zero.
pub fn gradient(u: &GridFunction) -> Result<GridFunction> {
    if u.layout != Layout::Interior || u.components != 1 {
        return Err(Error::InvalidArgument("gradient expects a scalar interior field".into()));
    }
    let grid = u.grid;
    let dim = grid.dim();
    let h = grid.spacing();
    let ncell = grid.len(Layout::Cells);
    let mut out = Vec::with_capacity(ncell * dim);
    for c in 0..ncell {
        let anchor = grid.multi_index(Layout::Cells, c);
        let base = grid.node_value(&u.values, anchor);
        for k in 0..dim {
            let mut next = anchor;
            next[k] += 1;
            out.push((grid.node_value(&u.values, next) - base) / h);
        }
    }
    Ok(GridFunction::from_parts_unchecked(grid, Layout::Cells, dim, out))
}

/// Rectangle rule `Σ f(x) h^N` with compensated, lexicographic summation.
pub fn integrate(f: &GridFunction) -> Result<f64> {
    if f.components != 1 {
        return Err(Error::InvalidArgument("integrate expects a scalar field".into()));
    }
    let acc: CompensatedSum = f.values.iter().copied().collect();
    Ok(acc.total() * f.grid.cell_volume())
}

/// The cone `max(0, eps0 - |x - center|)` sampled on the interior nodes.
pub fn cone_function(center: &[f64], eps0: f64, grid: &Grid) -> Result<GridFunction> {
    let dim = grid.dim();
    if center.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "center has {} coordinates, grid is {dim}-dimensional",
            center.len()
        )));
    }
    if !(eps0.is_finite() && eps0 > 0.0) {
        return Err(Error::InvalidArgument(format!("eps0 must be positive, got {eps0}")));
    }
    if center.iter().any(|c| c.abs() + eps0 > grid.radius()) {
        return Err(Error::InvalidArgument(format!(
            "ball of radius {eps0} around {center:?} leaves the box [-{r}, {r}]^{dim}",
            r = grid.radius()
        )));
    }
    GridFunction::from_fn(*grid, Layout::Interior, |x| {
        let d: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        (eps0 - d).max(0.0)
    })
}

/// Serialized form of a scalar interior field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunctionRecord {
    pub dim: usize,
    pub radius: f64,
    pub nodes_per_axis: usize,
    pub values: Vec<f64>,
}

impl GridFunction {
    fn require_scalar_interior(&self) -> Result<()> {
        if self.layout != Layout::Interior || self.components != 1 {
            return Err(Error::InvalidArgument("only scalar interior fields are serialized".into()));
        }
        Ok(())
    }

    pub fn to_record(&self) -> Result<GridFunctionRecord> {
        self.require_scalar_interior()?;
        Ok(GridFunctionRecord {
            dim: self.grid.dim(),
            radius: self.grid.radius(),
            nodes_per_axis: self.grid.nodes_per_axis(),
            values: self.values.clone(),
        })
    }

    pub fn from_record(rec: GridFunctionRecord) -> Result<Self> {
        let grid = Grid::new(rec.dim, rec.radius, rec.nodes_per_axis)?;
        Self::interior(grid, rec.values)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record()?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: GridFunctionRecord = serde_json::from_str(s)?;
        Self::from_record(rec)
    }

    /// CSV with a `# dim=.. radius=.. nodes_per_axis=..` header line, a column
    /// header, then one row per interior node in lexicographic order. The
    /// coordinate columns are informational; the last column is the value.
    pub fn to_csv(&self) -> Result<String> {
        self.require_scalar_interior()?;
        let g = &self.grid;
        let mut s = String::new();
        writeln!(s, "# dim={} radius={} nodes_per_axis={}", g.dim(), g.radius(), g.nodes_per_axis()).unwrap();
        if g.dim() == 1 {
            s.push_str("x,value\n");
        } else {
            s.push_str("x,y,value\n");
        }
        for (i, v) in self.values.iter().enumerate() {
            let x = g.point(Layout::Interior, i);
            if g.dim() == 1 {
                writeln!(s, "{},{}", x[0], v).unwrap();
            } else {
                writeln!(s, "{},{},{}", x[0], x[1], v).unwrap();
            }
        }
        Ok(s)
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse("line 1: empty file".into()))?;
        let header = header
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("line 1: expected '# dim=.. radius=.. nodes_per_axis=..'".into()))?;
        let (mut dim, mut radius, mut n) = (None, None, None);
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line 1: malformed header token '{tok}'")))?;
            let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("line 1: {k}: {e}"));
            match k {
                "dim" => dim = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                "radius" => radius = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
                "nodes_per_axis" => n = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
                _ => return Err(Error::Parse(format!("line 1: unknown header key '{k}'"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("line 1: missing '{k}'"));
        let grid = Grid::new(
            dim.ok_or_else(|| missing("dim"))?,
            radius.ok_or_else(|| missing("radius"))?,
            n.ok_or_else(|| missing("nodes_per_axis"))?,
        )?;
        lines.next(); // column names
        let mut values = Vec::with_capacity(grid.len(Layout::Interior));
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let last = line.rsplit(',').next().unwrap_or("").trim();
            let v = last.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            values.push(v);
        }
        Self::interior(grid, values)
    }
}
