//! Connectivity of `T^{-1}([-1, 1])`: the critical-point criterion, and an
//! independent brute-force grid oracle.

use std::fmt::Write as _;

use num_complex::Complex64;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::poly::{dist_to_interval, ComplexPoly, PolyError};

/// Multiplier on the local Lipschitz bound `h * max|T'|` in the grid
/// membership test.
pub const LIPSCHITZ_FACTOR: f64 = 1.0;
pub const MIN_RESOLUTION: usize = 64;

/// Criterion tolerance `1e-7 * (1 + max|T_k|)`.
pub fn default_tolerance(t: &ComplexPoly) -> f64 {
    1e-7 * (1.0 + t.max_coeff_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipParams {
    pub tol_member: f64,
}

impl MembershipParams {
    pub fn new(tol_member: f64) -> Option<Self> {
        (tol_member > 0.0).then_some(Self { tol_member })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalWitness {
    pub point: Complex64,
    pub image: Complex64,
    /// Distance from `image` to `[-1, 1]`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityVerdict {
    pub connected: bool,
    pub tolerance: f64,
    pub witnesses: Vec<CriticalWitness>,
}

/// The inverse image is connected iff every zero of `T'` maps into
/// `[-1, 1]`.
pub fn is_connected(t: &ComplexPoly, tol: f64) -> Result<ConnectivityVerdict, PolyError> {
    let dt = t.derivative();
    let critical = if dt.degree() == 0 { Vec::new() } else { dt.find_roots()? };
    let witnesses: Vec<CriticalWitness> = critical
        .into_iter()
        .map(|z| {
            let image = t.eval(z);
            CriticalWitness {
                point: z,
                image,
                margin: dist_to_interval(image),
            }
        })
        .collect();
    Ok(ConnectivityVerdict {
        connected: witnesses.iter().all(|w| w.margin < tol),
        tolerance: tol,
        witnesses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub bbox: BoundingBox,
    pub resolution: usize,
    /// Row-major membership, row 0 at `y0`.
    pub member: Vec<bool>,
    pub component_count: usize,
    /// Component label per member cell, `None` for non-members.
    pub component_of_cell: Vec<Option<u32>>,
    /// Non-member cells not reachable from the border through non-members.
    pub enclosed_cells: usize,
}

impl GridReport {
    pub fn cell_width(&self) -> f64 {
        (self.bbox.x1 - self.bbox.x0) / self.resolution as f64
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Complex64 {
        let h = self.cell_width();
        Complex64::new(
            self.bbox.x0 + (ix as f64 + 0.5) * h,
            self.bbox.y0 + (iy as f64 + 0.5) * h,
        )
    }

    /// Cell containing `z`, if inside the box.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let h = self.cell_width();
        let fx = (z.re - self.bbox.x0) / h;
        let fy = (z.im - self.bbox.y0) / h;
        let n = self.resolution as f64;
        if !(0.0..n).contains(&fx) || !(0.0..n).contains(&fy) {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    pub fn is_member(&self, ix: usize, iy: usize) -> bool {
        self.member[iy * self.resolution + ix]
    }

    pub fn member_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    /// Text dump: a `P-GRID nx ny x0 y0 x1 y1` header, then one line per row
    /// from the top of the box down, `#` for members and `.` otherwise.
    pub fn to_pgrid(&self) -> String {
        let n = self.resolution;
        let b = self.bbox;
        let mut out = String::with_capacity((n + 1) * (n + 1) + 64);
        let _ = writeln!(out, "P-GRID {n} {n} {} {} {} {}", b.x0, b.y0, b.x1, b.y1);
        for iy in (0..n).rev() {
            out.extend((0..n).map(|ix| if self.is_member(ix, iy) { '#' } else { '.' }));
            out.push('\n');
        }
        out
    }
}

/// Square box around the zeros of `T^2 - 1`, inflated by 20% of its
/// largest side.
fn zero_bbox(t: &ComplexPoly) -> Result<BoundingBox, PolyError> {
    let one = ComplexPoly::one();
    let mut pts = (t - &one).find_roots()?;
    pts.extend((t + &one).find_roots()?);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let side = (x1 - x0).max(y1 - y0).max(1e-3) * 1.2;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    Ok(BoundingBox {
        x0: cx - 0.5 * side,
        y0: cy - 0.5 * side,
        x1: cx + 0.5 * side,
        y1: cy + 0.5 * side,
    })
}

const NEIGHBORS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Brute-force membership grid with 8-neighbour components.
///
/// A cell is a member when `dist(T(center), [-1, 1])` is below
/// `max(tol_member, LIPSCHITZ_FACTOR * h * max|T'|)`, the maximum taken over
/// the cell corners, so an arc crossing the cell cannot be missed.
pub fn grid_oracle(t: &ComplexPoly, params: MembershipParams, resolution: usize) -> Result<GridReport, PolyError> {
    let n = resolution.max(MIN_RESOLUTION);
    let bbox = zero_bbox(t)?;
    let h = (bbox.x1 - bbox.x0) / n as f64;
    let dt = t.derivative();

    let corner_slope: Vec<f64> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let dt = &dt;
            (0..=n).map(move |ix| {
                dt.eval(Complex64::new(bbox.x0 + ix as f64 * h, bbox.y0 + iy as f64 * h))
                    .norm()
            })
        })
        .collect();

    let member: Vec<bool> = (0..n)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let corner_slope = &corner_slope;
            (0..n).map(move |ix| {
                let z = Complex64::new(bbox.x0 + (ix as f64 + 0.5) * h, bbox.y0 + (iy as f64 + 0.5) * h);
                let slope = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(dx, dy)| corner_slope[(iy + dy) * (n + 1) + ix + dx])
                    .fold(0.0, f64::max);
                let threshold = params.tol_member.max(LIPSCHITZ_FACTOR * h * slope);
                dist_to_interval(t.eval(z)) < threshold
            })
        })
        .collect();

    let idx = |ix: usize, iy: usize| iy * n + ix;
    let neighbors = |ix: usize, iy: usize| {
        NEIGHBORS.iter().filter_map(move |&(dx, dy)| {
            let jx = ix as isize + dx;
            let jy = iy as isize + dy;
            (jx >= 0 && jy >= 0 && (jx as usize) < n && (jy as usize) < n).then_some((jx as usize, jy as usize))
        })
    };

    let mut uf = UnionFind::<usize>::new(n * n);
    for iy in 0..n {
        for ix in 0..n {
            if !member[idx(ix, iy)] {
                continue;
            }
            for (jx, jy) in neighbors(ix, iy) {
                if member[idx(jx, jy)] {
                    uf.union(idx(ix, iy), idx(jx, jy));
                }
            }
        }
    }
    let mut label_of_root = std::collections::HashMap::new();
    let mut component_of_cell = vec![None; n * n];
    for (i, cell) in component_of_cell.iter_mut().enumerate() {
        if member[i] {
            let root = uf.find(i);
            let next = label_of_root.len() as u32;
            *cell = Some(*label_of_root.entry(root).or_insert(next));
        }
    }

    // Flood the complement from the border.
    let mut reached = vec![false; n * n];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for k in 0..n {
        for (ix, iy) in [(k, 0), (k, n - 1), (0, k), (n - 1, k)] {
            if !member[idx(ix, iy)] && !reached[idx(ix, iy)] {
                reached[idx(ix, iy)] = true;
                stack.push((ix, iy));
            }
        }
    }
    while let Some((ix, iy)) = stack.pop() {
        for (jx, jy) in neighbors(ix, iy) {
            let j = idx(jx, jy);
            if !member[j] && !reached[j] {
                reached[j] = true;
                stack.push((jx, jy));
            }
        }
    }
    let enclosed_cells = (0..n * n).filter(|&i| !member[i] && !reached[i]).count();

    Ok(GridReport {
        bbox,
        resolution: n,
        member,
        component_count: label_of_root.len(),
        component_of_cell,
        enclosed_cells,
    })
}
