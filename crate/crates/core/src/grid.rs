//! Cell-centered rectangular meshes in one or two dimensions.
//!
//! Zero-flux boundaries are imposed with mirrored ghost cells: the ghost value
//! outside a boundary face equals the adjacent interior value, so every
//! boundary face carries exactly zero flux. With this choice the discrete
//! Laplacian and the chemotactic divergence are sums of face-flux differences
//! and integrate to zero over the domain up to round-off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n_x: usize,
    n_y: usize,
    l_x: f64,
    l_y: f64,
}

impl Grid {
    pub fn new_1d(n_x: usize, l_x: f64) -> Result<Self> {
        Self::build(1, n_x, 1, l_x, 1.0)
    }

    pub fn new_2d(n_x: usize, n_y: usize, l_x: f64, l_y: f64) -> Result<Self> {
        Self::build(2, n_x, n_y, l_x, l_y)
    }

    /// Generic constructor; `n_y` and `l_y` are ignored in 1D.
    pub fn new(dim: usize, n_x: usize, n_y: usize, l_x: f64, l_y: f64) -> Result<Self> {
        match dim {
            1 => Self::new_1d(n_x, l_x),
            2 => Self::new_2d(n_x, n_y, l_x, l_y),
            _ => Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}"))),
        }
    }

    fn build(dim: usize, n_x: usize, n_y: usize, l_x: f64, l_y: f64) -> Result<Self> {
        if n_x < 3 {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} < 3")));
        }
        if dim == 2 && n_y < 3 {
            return Err(Error::InvalidGrid(format!("n_y = {n_y} < 3")));
        }
        if !(l_x > 0.0 && l_x.is_finite()) || !(l_y > 0.0 && l_y.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "side lengths must be positive, got ({l_x}, {l_y})"
            )));
        }
        Ok(Self { dim, n_x, n_y, l_x, l_y })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    pub fn l_y(&self) -> f64 {
        self.l_y
    }

    pub fn h_x(&self) -> f64 {
        self.l_x / self.n_x as f64
    }

    pub fn h_y(&self) -> f64 {
        self.l_y / self.n_y as f64
    }

    pub fn h_min(&self) -> f64 {
        if self.dim == 1 {
            self.h_x()
        } else {
            self.h_x().min(self.h_y())
        }
    }

    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.h_x()
        } else {
            self.h_x() * self.h_y()
        }
    }

    /// |Ω|
    pub fn measure(&self) -> f64 {
        if self.dim == 1 {
            self.l_x
        } else {
            self.l_x * self.l_y
        }
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    /// Cell-center coordinates. In 1D `y` is reported as 0.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let x = (i as f64 + 0.5) * self.h_x();
        let y = if self.dim == 1 { 0.0 } else { (j as f64 + 0.5) * self.h_y() };
        (x, y)
    }
}

/// A scalar per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite value {} at cell {pos}",
                values[pos]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee it.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `g(x, y)` at the cell centers.
    pub fn from_fn(grid: Grid, mut g: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n_y {
            for i in 0..grid.n_x {
                let (x, y) = grid.center(i, j);
                values.push(g(x, y));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise map; errors if the result is not finite.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&x| g(x)).collect())
    }

    /// max |self - c|
    pub fn linf_dev(&self, c: f64) -> f64 {
        self.values.iter().fold(0.0, |m, &x| m.max((x - c).abs()))
    }

    /// sqrt(∫ (self - c)²)
    pub fn l2_dev(&self, c: f64) -> f64 {
        let s: f64 = self.values.iter().map(|&x| (x - c) * (x - c)).sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// Mean over cells.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Population variance over cells.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / self.values.len() as f64
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(pos) => Err(Error::InvalidField(format!(
                "non-finite value {} at cell {pos}",
                self.values[pos]
            ))),
            None => Ok(()),
        }
    }
}

fn same_grid(a: &Field, b: &Field) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// Discrete Laplacian with zero-flux boundaries.
pub fn laplacian_neumann(f: &Field) -> Result<Field> {
    f.check_finite()?;
    let mut out = vec![0.0; f.grid.len()];
    laplacian_into(&f.grid, &f.values, &mut out);
    Ok(Field::from_raw(f.grid, out))
}

/// `χ ∇·(u ∇v)` in conservative face-flux form.
pub fn chemotaxis_divergence(u: &Field, v: &Field, chi: f64) -> Result<Field> {
    same_grid(u, v)?;
    u.check_finite()?;
    v.check_finite()?;
    let mut out = vec![0.0; u.grid.len()];
    chemotaxis_into(&u.grid, &u.values, &v.values, chi, &mut out);
    Ok(Field::from_raw(u.grid, out))
}

/// Midpoint quadrature: cell volume times the sum of values.
pub fn integrate(f: &Field) -> Result<f64> {
    f.check_finite()?;
    Ok(integrate_raw(&f.grid, &f.values))
}

/// |∇f|² per cell from central differences with mirrored ghosts.
pub fn gradient_magnitude_sq(f: &Field) -> Result<Field> {
    f.check_finite()?;
    let g = &f.grid;
    let vals = &f.values;
    let (nx, ny) = (g.n_x, g.n_y);
    let inv2hx = 0.5 / g.h_x();
    let inv2hy = 0.5 / g.h_y();
    let mut out = vec![0.0; g.len()];
    for j in 0..ny {
        for i in 0..nx {
            let c = g.index(i, j);
            let east = if i + 1 < nx { vals[c + 1] } else { vals[c] };
            let west = if i > 0 { vals[c - 1] } else { vals[c] };
            let gx = (east - west) * inv2hx;
            let mut s = gx * gx;
            if g.dim == 2 {
                let north = if j + 1 < ny { vals[c + nx] } else { vals[c] };
                let south = if j > 0 { vals[c - nx] } else { vals[c] };
                let gy = (north - south) * inv2hy;
                s += gy * gy;
            }
            out[c] = s;
        }
    }
    Ok(Field::from_raw(*g, out))
}

pub(crate) fn integrate_raw(g: &Grid, vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() * g.cell_volume()
}

pub(crate) fn laplacian_into(g: &Grid, f: &[f64], out: &mut [f64]) {
    let (nx, ny) = (g.n_x, g.n_y);
    let ihx2 = 1.0 / (g.h_x() * g.h_x());
    let ihy2 = 1.0 / (g.h_y() * g.h_y());
    for j in 0..ny {
        for i in 0..nx {
            let c = g.index(i, j);
            let fc = f[c];
            // Face differences; boundary faces contribute nothing.
            let east = if i + 1 < nx { f[c + 1] - fc } else { 0.0 };
            let west = if i > 0 { fc - f[c - 1] } else { 0.0 };
            let mut s = (east - west) * ihx2;
            if g.dim == 2 {
                let north = if j + 1 < ny { f[c + nx] - fc } else { 0.0 };
                let south = if j > 0 { fc - f[c - nx] } else { 0.0 };
                s += (north - south) * ihy2;
            }
            out[c] = s;
        }
    }
}

pub(crate) fn chemotaxis_into(g: &Grid, u: &[f64], v: &[f64], chi: f64, out: &mut [f64]) {
    let (nx, ny) = (g.n_x, g.n_y);
    let (hx, hy) = (g.h_x(), g.h_y());
    // Flux through the face between cells a and b (b on the positive side).
    let flux = |a: usize, b: usize, h: f64| chi * 0.5 * (u[a] + u[b]) * (v[b] - v[a]) / h;
    for j in 0..ny {
        for i in 0..nx {
            let c = g.index(i, j);
            let east = if i + 1 < nx { flux(c, c + 1, hx) } else { 0.0 };
            let west = if i > 0 { flux(c - 1, c, hx) } else { 0.0 };
            let mut s = (east - west) / hx;
            if g.dim == 2 {
                let north = if j + 1 < ny { flux(c, c + nx, hy) } else { 0.0 };
                let south = if j > 0 { flux(c - nx, c, hy) } else { 0.0 };
                s += (north - south) / hy;
            }
            out[c] = s;
        }
    }
}
