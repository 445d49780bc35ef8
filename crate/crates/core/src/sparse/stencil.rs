//! Finite-difference test problems on regular grids with homogeneous Dirichlet truncation.
//!
//! Grid nodes sit at `(i + 1) h` for `i in 0..nx`, `h = 1 / (nx + 1)`, numbered with
//! `x` fastest. All operators are scaled by `h^2` so the pure Laplacians have the
//! familiar integer stencils.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_UNIFLOW_DIFFUSION: f64 = 1.0;
pub const DEFAULT_BENTPIPE_CONVECTION: f64 = 100.0;
pub const DEFAULT_STRETCH: f64 = 50.0;

/// Named stencil problem and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset")]
pub enum ProblemSpec {
    /// 5-point Laplacian, centre 4, neighbours -1.
    Laplace2D { nx: usize },
    /// 7-point Laplacian, centre 6, neighbours -1.
    Laplace3D { nx: usize },
    /// Constant-velocity convection-diffusion, central differences.
    UniFlow2D {
        nx: usize,
        diffusion: f64,
        velocity: (f64, f64),
    },
    /// Unit diffusion plus first-order upwind convection by the recirculating field
    /// `c (2y(1 - x^2), -2x(1 - y^2))`.
    BentPipe2D { nx: usize, convection: f64 },
    /// Bilinear (9-point) Laplacian on cells stretched by `stretch` in `x`.
    Stretched2D { nx: usize, stretch: f64 },
}

impl ProblemSpec {
    pub fn laplace2d(nx: usize) -> Self {
        ProblemSpec::Laplace2D { nx }
    }

    pub fn laplace3d(nx: usize) -> Self {
        ProblemSpec::Laplace3D { nx }
    }

    pub fn uniflow2d(nx: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ProblemSpec::UniFlow2D {
            nx,
            diffusion: DEFAULT_UNIFLOW_DIFFUSION,
            velocity: (s, s),
        }
    }

    pub fn bentpipe2d(nx: usize) -> Self {
        ProblemSpec::BentPipe2D {
            nx,
            convection: DEFAULT_BENTPIPE_CONVECTION,
        }
    }

    pub fn stretched2d(nx: usize) -> Self {
        ProblemSpec::Stretched2D {
            nx,
            stretch: DEFAULT_STRETCH,
        }
    }

    /// Preset by name with default parameters. Accepts names with a trailing grid size
    /// (`BentPipe2D1500`) when `nx` is `None`.
    pub fn from_name(name: &str, nx: Option<usize>) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let split = lower
            .char_indices()
            .rev()
            .take_while(|(_, c)| c.is_ascii_digit())
            .last()
            .map(|(i, _)| i);
        // "laplace2d" ends in a digit that belongs to the name, so only strip a suffix
        // when the remainder is still a known preset.
        let (base, suffix_nx) = match split {
            Some(i) if preset_ctor(&lower[..i]).is_some() => {
                (&lower[..i], lower[i..].parse::<usize>().ok())
            }
            _ => (lower.as_str(), None),
        };
        let ctor = preset_ctor(base).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown preset `{name}` (expected Laplace2D, Laplace3D, UniFlow2D, BentPipe2D, Stretched2D)"
            ))
        })?;
        let nx = nx.or(suffix_nx).ok_or_else(|| {
            Error::InvalidConfig(format!("preset `{name}` needs a grid size"))
        })?;
        Ok(ctor(nx))
    }

    pub fn nx(&self) -> usize {
        match *self {
            ProblemSpec::Laplace2D { nx }
            | ProblemSpec::Laplace3D { nx }
            | ProblemSpec::UniFlow2D { nx, .. }
            | ProblemSpec::BentPipe2D { nx, .. }
            | ProblemSpec::Stretched2D { nx, .. } => nx,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Laplace2D { .. } => "Laplace2D",
            ProblemSpec::Laplace3D { .. } => "Laplace3D",
            ProblemSpec::UniFlow2D { .. } => "UniFlow2D",
            ProblemSpec::BentPipe2D { .. } => "BentPipe2D",
            ProblemSpec::Stretched2D { .. } => "Stretched2D",
        }
    }

    /// Number of unknowns.
    pub fn n(&self) -> u64 {
        let nx = self.nx() as u64;
        match self {
            ProblemSpec::Laplace3D { .. } => nx * nx * nx,
            _ => nx * nx,
        }
    }

    /// Closed-form count of stored entries.
    pub fn expected_nnz(&self) -> u64 {
        let nx = self.nx() as u64;
        match self {
            ProblemSpec::Laplace2D { .. }
            | ProblemSpec::UniFlow2D { .. }
            | ProblemSpec::BentPipe2D { .. } => 5 * nx * nx - 4 * nx,
            ProblemSpec::Laplace3D { .. } => 7 * nx * nx * nx - 6 * nx * nx,
            ProblemSpec::Stretched2D { .. } => (3 * nx - 2) * (3 * nx - 2),
        }
    }

    fn check(&self) -> Result<()> {
        if self.nx() < 2 {
            Err(Error::GridTooSmall(self.nx()))
        } else {
            Ok(())
        }
    }
}

fn preset_ctor(base: &str) -> Option<fn(usize) -> ProblemSpec> {
    Some(match base {
        "laplace2d" => ProblemSpec::laplace2d,
        "laplace3d" => ProblemSpec::laplace3d,
        "uniflow2d" => ProblemSpec::uniflow2d,
        "bentpipe2d" => ProblemSpec::bentpipe2d,
        "stretched2d" => ProblemSpec::stretched2d,
        _ => return None,
    })
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name(), self.nx())
    }
}

impl FromStr for ProblemSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemSpec::from_name(s, None)
    }
}

/// Offsets `(dx, dy, dz)` of a stencil, listed in increasing column order.
fn offsets(spec: &ProblemSpec) -> &'static [(i64, i64, i64)] {
    match spec {
        ProblemSpec::Laplace3D { .. } => &[
            (0, 0, -1),
            (0, -1, 0),
            (-1, 0, 0),
            (0, 0, 0),
            (1, 0, 0),
            (0, 1, 0),
            (0, 0, 1),
        ],
        ProblemSpec::Stretched2D { .. } => &[
            (-1, -1, 0),
            (0, -1, 0),
            (1, -1, 0),
            (-1, 0, 0),
            (0, 0, 0),
            (1, 0, 0),
            (-1, 1, 0),
            (0, 1, 0),
            (1, 1, 0),
        ],
        _ => &[(0, -1, 0), (-1, 0, 0), (0, 0, 0), (1, 0, 0), (0, 1, 0)],
    }
}

/// Stencil weights at node `(i, j)`, aligned with [`offsets`]. Untouched slots stay zero.
fn weights(spec: &ProblemSpec, i: usize, j: usize, out: &mut [f64; 9]) {
    let h = 1.0 / (spec.nx() as f64 + 1.0);
    match *spec {
        ProblemSpec::Laplace2D { .. } => {
            out[..5].copy_from_slice(&[-1.0, -1.0, 4.0, -1.0, -1.0]);
        }
        ProblemSpec::Laplace3D { .. } => {
            out[..7].copy_from_slice(&[-1.0, -1.0, -1.0, 6.0, -1.0, -1.0, -1.0]);
        }
        ProblemSpec::UniFlow2D {
            diffusion,
            velocity: (vx, vy),
            ..
        } => {
            let (cx, cy) = (0.5 * h * vx, 0.5 * h * vy);
            out[..5].copy_from_slice(&[
                -diffusion - cy,
                -diffusion - cx,
                4.0 * diffusion,
                -diffusion + cx,
                -diffusion + cy,
            ]);
        }
        ProblemSpec::BentPipe2D { convection, .. } => {
            let x = (i as f64 + 1.0) * h;
            let y = (j as f64 + 1.0) * h;
            let vx = convection * 2.0 * y * (1.0 - x * x);
            let vy = -convection * 2.0 * x * (1.0 - y * y);
            out[..5].copy_from_slice(&[
                -1.0 - h * vy.max(0.0),
                -1.0 - h * vx.max(0.0),
                4.0 + h * (vx.abs() + vy.abs()),
                -1.0 - h * (-vx).max(0.0),
                -1.0 - h * (-vy).max(0.0),
            ]);
        }
        ProblemSpec::Stretched2D { stretch, .. } => {
            // bilinear element stiffness on hx = stretch * hy cells
            let a = 1.0 / stretch;
            let b = stretch;
            let corner = -(a + b) / 6.0;
            let ew = -2.0 * a / 3.0 + b / 3.0;
            let ns = a / 3.0 - 2.0 * b / 3.0;
            let centre = 4.0 * (a + b) / 3.0;
            *out = [corner, ns, corner, ew, centre, ew, corner, ns, corner];
        }
    }
}

fn for_each_row(spec: &ProblemSpec, mut visit: impl FnMut(usize, &[(usize, f64)])) {
    let nx = spec.nx();
    let nz = if matches!(spec, ProblemSpec::Laplace3D { .. }) { nx } else { 1 };
    let offs = offsets(spec);
    let mut w = [0.0; 9];
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(9);
    let mut r = 0;
    for k in 0..nz {
        for j in 0..nx {
            for i in 0..nx {
                weights(spec, i, j, &mut w);
                row.clear();
                for (slot, &(dx, dy, dz)) in offs.iter().enumerate() {
                    let (ii, jj, kk) = (i as i64 + dx, j as i64 + dy, k as i64 + dz);
                    let n = nx as i64;
                    if ii < 0 || jj < 0 || kk < 0 || ii >= n || jj >= n || kk >= nz as i64 {
                        continue;
                    }
                    let col = (kk as usize * nx + jj as usize) * nx + ii as usize;
                    row.push((col, w[slot]));
                }
                visit(r, &row);
                r += 1;
            }
        }
    }
}

/// Assemble the stencil matrix in binary64.
pub fn generate_stencil(spec: &ProblemSpec) -> Result<CsrMatrix<f64>> {
    spec.check()?;
    let n = spec.n() as usize;
    let nnz = spec.expected_nnz() as usize;
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_ptr.push(0);
    for_each_row(spec, |_, row| {
        for &(c, v) in row {
            col_idx.push(c);
            values.push(v);
        }
        row_ptr.push(col_idx.len());
    });
    CsrMatrix::from_raw_parts(n, row_ptr, col_idx, values)
}

/// Count stored entries by walking the grid, without assembling the matrix.
pub fn count_stencil_nnz(spec: &ProblemSpec) -> Result<u64> {
    spec.check()?;
    let nx = spec.nx() as u64;
    let nz = if matches!(spec, ProblemSpec::Laplace3D { .. }) { nx } else { 1 };
    let offs = offsets(spec);
    let mut total = 0u64;
    let inside = |p: u64, d: i64, len: u64| {
        let q = p as i64 + d;
        q >= 0 && (q as u64) < len
    };
    for k in 0..nz {
        for j in 0..nx {
            for i in 0..nx {
                total += offs
                    .iter()
                    .filter(|&&(dx, dy, dz)| {
                        inside(i, dx, nx) && inside(j, dy, nx) && inside(k, dz, nz)
                    })
                    .count() as u64;
            }
        }
    }
    Ok(total)
}
