//! Periodic Cartesian sampling of the cube [-L, L)^3 together with the
//! complex fields living on it.
//!
//! Samples are cell-centered: `x_i = -L + (i + 1/2) h` with `h = 2L/N`, so no
//! sample sits exactly at the origin and the |x|^-1, |x|^-2 weights used by
//! the estimates stay finite on the grid. The discrete frequencies are
//! `xi_k = pi k / L` for `k in {-N/2, ..., N/2 - 1}`, stored in FFT order.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Discretization substrate: an even number of cell-centered samples per axis
/// on the periodic box [-L, L)^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    points_per_axis: usize,
    box_half_width: f64,
}

impl Grid {
    /// Build a grid. `dim` must be 3 (gridded fields are three-dimensional;
    /// the closed-form radial constructions carry their own dimension), `n`
    /// even and at least 8, `box_half_width` positive.
    pub fn new(dim: usize, box_half_width: f64, points_per_axis: usize) -> Result<Grid> {
        if dim != 3 {
            return Err(Error::parameter("dim", "gridded fields require dim = 3"));
        }
        if points_per_axis % 2 != 0 || points_per_axis < 8 {
            return Err(Error::parameter(
                "points_per_axis",
                format!("must be even and >= 8, got {points_per_axis}"),
            ));
        }
        if !(box_half_width > 0.0) || !box_half_width.is_finite() {
            return Err(Error::parameter(
                "box_half_width",
                format!("must be positive and finite, got {box_half_width}"),
            ));
        }
        Ok(Grid {
            dim,
            points_per_axis,
            box_half_width,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_half_width(&self) -> f64 {
        self.box_half_width
    }

    /// Cell width h = 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.box_half_width / self.points_per_axis as f64
    }

    /// Total number of cells N^3.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell-centered coordinate of index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.box_half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Frequency of FFT-ordered index `k` along one axis: pi k / L with
    /// k interpreted in {-N/2, ..., N/2 - 1}.
    pub fn frequency(&self, k: usize) -> f64 {
        let n = self.points_per_axis;
        let k_signed = if k < n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        };
        std::f64::consts::PI * k_signed as f64 / self.box_half_width
    }

    /// Per-axis frequency list in FFT order (0, 1, ..., N/2-1, -N/2, ..., -1),
    /// scaled by pi/L. Exactly N entries, the zero frequency first.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|k| self.frequency(k)).collect()
    }

    /// Largest frequency magnitude per axis, pi (N/2) / L.
    pub fn max_frequency(&self) -> f64 {
        std::f64::consts::PI * (self.points_per_axis / 2) as f64 / self.box_half_width
    }

    /// Volume element of one cell, h^3.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Volume element of one frequency cell, (pi/L)^3.
    pub fn freq_cell_volume(&self) -> f64 {
        (std::f64::consts::PI / self.box_half_width).powi(3)
    }

    /// Row-major flat index of the cell (ix, iy, iz).
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.points_per_axis + iy) * self.points_per_axis + iz
    }

    /// Cell coordinates of flat index `idx`.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let n = self.points_per_axis;
        let iz = idx % n;
        let iy = (idx / n) % n;
        let ix = idx / (n * n);
        [self.coord(ix), self.coord(iy), self.coord(iz)]
    }

    /// |x| of the cell at flat index `idx`.
    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y, z] = self.position(idx);
        (x * x + y * y + z * z).sqrt()
    }
}

/// Which side of the Fourier transform a field's samples live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Position,
    Frequency,
}

/// A complex scalar field sampled on a [`Grid`] at one instant. Frequency-side
/// fields index their values by the FFT-ordered frequencies of the same grid.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Grid,
    pub time: f64,
    pub space: Space,
    pub values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, time: f64) -> Field {
        Field {
            grid,
            time,
            space: Space::Position,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Sample a position-space field from a function of the cell coordinates.
    pub fn from_fn(grid: Grid, time: f64, mut f: impl FnMut([f64; 3]) -> Complex64) -> Field {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Field {
            grid,
            time,
            space: Space::Position,
            values,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Mass of the field, i.e. the squared L^2 norm with the measure of its
    /// current side of the transform.
    pub fn mass(&self) -> f64 {
        let w = match self.space {
            Space::Position => self.grid.cell_volume(),
            Space::Frequency => self.grid.freq_cell_volume(),
        };
        w * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Fraction of the mass carried by cells with |x| > radius. Used by the
    /// outer-shell validity gate (the estimates are posed on R^3; a periodic
    /// box is only trustworthy while the solution stays away from its faces).
    pub fn mass_fraction_outside(&self, radius: f64) -> f64 {
        assert_eq!(self.space, Space::Position);
        let mut outside = 0.0;
        let mut total = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let m = v.norm_sqr();
            total += m;
            if self.grid.radius(idx) > radius {
                outside += m;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    pub fn require_position(&self) -> Result<()> {
        if self.space != Space::Position {
            return Err(Error::Grid(
                "operation requires a position-space field".into(),
            ));
        }
        Ok(())
    }

    pub fn require_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        Ok(())
    }
}
