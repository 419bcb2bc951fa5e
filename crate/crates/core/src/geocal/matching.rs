//! Dense normalized-cross-correlation matching.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use super::stats::median;
use crate::tdi::ProductGrid;

/// Row-major image with `NaN` marking missing samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(domain(format!("raster of {rows}x{cols} given {} samples", data.len())));
        }
        Ok(Raster { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let data = (0..rows * cols).into_par_iter().map(|k| f(k / cols, k % cols)).collect();
        Raster { rows, cols, data }
    }

    /// One band of a product, unfilled pixels as `NaN`.
    pub fn from_product(product: &ProductGrid, band: u8) -> Result<Self> {
        let bi = product.band_or_err(band)?;
        Ok(Raster { rows: product.rows, cols: product.cols, data: product.band_f64(bi) })
    }

    /// A reference image resampled at the product's own geolocation.
    pub fn resample_at(product: &ProductGrid, sample: impl Fn(f64, f64) -> Option<f64> + Sync) -> Self {
        Raster::from_fn(product.rows, product.cols, |i, j| {
            let k = i * product.cols + j;
            product.ground(k).and_then(|g| sample(g.lat, g.lon)).unwrap_or(f64::NAN)
        })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Sub-window `(row0, col0, rows, cols)`.
    pub fn window(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Self> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(domain("window exceeds raster"));
        }
        Ok(Raster::from_fn(rows, cols, |i, j| self.at(r0 + i, c0 + j)))
    }
}

/// A matched pair of locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiePoint {
    pub ref_row: f64,
    pub ref_col: f64,
    pub target_row: f64,
    pub target_col: f64,
    /// Peak normalized cross-correlation.
    pub score: f64,
    /// `target - reference`, rows (along-track) and columns (across-track).
    pub d_along: f64,
    pub d_across: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchOptions {
    /// Grid-node spacing (px).
    pub spacing: usize,
    /// Odd patch side (px), at least 9.
    pub patch: usize,
    /// Integer search radius around the prior (px).
    pub search: usize,
    pub min_score: f64,
    /// Expected offset `(along, across)` the search is centred on.
    pub prior: (f64, f64),
    pub min_points: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { spacing: 8, patch: 15, search: 3, min_score: 0.8, prior: (0.0, 0.0), min_points: 10 }
    }
}

impl MatchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.patch < 9 || self.patch % 2 == 0 {
            return Err(domain(format!("patch size must be odd and at least 9, got {}", self.patch)));
        }
        if self.spacing == 0 {
            return Err(domain("node spacing must be positive"));
        }
        if !(self.min_score > 0.0 && self.min_score <= 1.0) {
            return Err(domain("score threshold must lie in (0, 1]"));
        }
        if !(self.prior.0.is_finite() && self.prior.1.is_finite()) {
            return Err(domain("prior offset must be finite"));
        }
        Ok(())
    }
}

struct Patch {
    values: Vec<f64>,
    norm: f64,
}

/// Mean-removed patch centred on `(r, c)`; `None` if incomplete or flat.
fn patch(img: &Raster, r: isize, c: isize, h: isize) -> Option<Patch> {
    if r - h < 0 || c - h < 0 || r + h >= img.rows as isize || c + h >= img.cols as isize {
        return None;
    }
    let side = (2 * h + 1) as usize;
    let mut values = Vec::with_capacity(side * side);
    for i in (r - h)..=(r + h) {
        let row = &img.data[i as usize * img.cols..][(c - h) as usize..=(c + h) as usize];
        values.extend_from_slice(row);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 1e-12 * (1.0 + mean.abs()) * side as f64).then_some(Patch { values, norm })
}

fn ncc(a: &Patch, b: &Patch) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum::<f64>() / (a.norm * b.norm)
}

/// Vertex of the parabola through three equally spaced samples.
fn parabolic(minus: f64, centre: f64, plus: f64) -> Option<f64> {
    let denom = minus - 2.0 * centre + plus;
    if !(denom < 0.0) {
        return None;
    }
    let d = 0.5 * (minus - plus) / denom;
    (d.abs() <= 0.5).then_some(d)
}

/// Keys cubic convolution weights (a = -1/2) for fractional offset `t`.
fn keys(t: f64) -> [f64; 4] {
    let w = |x: f64| {
        let x = x.abs();
        if x < 1.0 {
            (1.5 * x - 2.5) * x * x + 1.0
        } else if x < 2.0 {
            ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
        } else {
            0.0
        }
    };
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}

fn bicubic(img: &Raster, r: f64, c: f64) -> Option<f64> {
    let (r0, c0) = (r.floor(), c.floor());
    let (i0, j0) = (r0 as isize - 1, c0 as isize - 1);
    if i0 < 0 || j0 < 0 || i0 + 3 >= img.rows as isize || j0 + 3 >= img.cols as isize {
        return None;
    }
    let (wr, wc) = (keys(r - r0), keys(c - c0));
    let mut v = 0.0;
    for (a, wa) in wr.iter().enumerate() {
        let row = &img.data[(i0 as usize + a) * img.cols + j0 as usize..][..4];
        v += wa * row.iter().zip(&wc).map(|(x, w)| x * w).sum::<f64>();
    }
    v.is_finite().then_some(v)
}

/// Gauss-Newton refinement of a sub-pixel offset (inverse compositional,
/// gain and offset normalized), removing the peak-locking bias of the
/// parabolic estimate. `None` if the patch lacks support or the iteration
/// does not settle within a pixel of the start.
fn refine(reference: &Raster, target: &Raster, r: usize, c: usize, h: isize, start: (f64, f64)) -> Option<(f64, f64)> {
    const MAX_ITER: usize = 20;
    const TOL: f64 = 1e-6;
    let (r, c) = (r as isize, c as isize);
    let side = (2 * h + 1) as usize;
    let n = side * side;
    let mut tmpl = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    for i in -h..=h {
        for j in -h..=h {
            let at = |di: isize, dj: isize| {
                let (y, x) = (r + i + di, c + j + dj);
                if y < 0 || x < 0 || y >= reference.rows as isize || x >= reference.cols as isize {
                    f64::NAN
                } else {
                    reference.at(y as usize, x as usize)
                }
            };
            tmpl.push(at(0, 0));
            grad.push((0.5 * (at(1, 0) - at(-1, 0)), 0.5 * (at(0, 1) - at(0, -1))));
        }
    }
    if grad.iter().any(|g| !(g.0.is_finite() && g.1.is_finite())) {
        return None;
    }
    let mean = tmpl.iter().sum::<f64>() / n as f64;
    tmpl.iter_mut().for_each(|v| *v -= mean);
    let norm = tmpl.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0);
    for g in &grad {
        haa += g.0 * g.0;
        hab += g.0 * g.1;
        hbb += g.1 * g.1;
    }
    let det = haa * hbb - hab * hab;
    if !(det > 1e-12 * (haa + hbb).powi(2)) {
        return None;
    }
    let mut d = start;
    let mut warped = vec![0.0; n];
    for _ in 0..MAX_ITER {
        for (k, w) in warped.iter_mut().enumerate() {
            let (i, j) = ((k / side) as isize - h, (k % side) as isize - h);
            *w = bicubic(target, (r + i) as f64 + d.0, (c + j) as f64 + d.1)?;
        }
        let wm = warped.iter().sum::<f64>() / n as f64;
        let wn = warped.iter().map(|v| (v - wm).powi(2)).sum::<f64>().sqrt();
        if !(wn > 0.0) {
            return None;
        }
        let (mut ba, mut bb) = (0.0, 0.0);
        for k in 0..n {
            let e = (warped[k] - wm) * norm / wn - tmpl[k];
            ba += grad[k].0 * e;
            bb += grad[k].1 * e;
        }
        let step = ((hbb * ba - hab * bb) / det, (haa * bb - hab * ba) / det);
        d = (d.0 - step.0, d.1 - step.1);
        if (d.0 - start.0).abs() > 1.0 || (d.1 - start.1).abs() > 1.0 {
            return None;
        }
        if step.0.hypot(step.1) < TOL {
            return Some(d);
        }
    }
    None
}

fn match_node(reference: &Raster, target: &Raster, r: usize, c: usize, prior: (f64, f64), opts: &MatchOptions) -> Option<TiePoint> {
    let h = (opts.patch / 2) as isize;
    let p = patch(reference, r as isize, c as isize, h)?;
    let s = opts.search as isize;
    let (pr, pc) = (prior.0.round() as isize, prior.1.round() as isize);
    let w = (2 * s + 1) as usize;
    let mut surface = vec![f64::NAN; w * w];
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for a in 0..w {
        for b in 0..w {
            let tr = r as isize + pr + a as isize - s;
            let tc = c as isize + pc + b as isize - s;
            if let Some(q) = patch(target, tr, tc, h) {
                let v = ncc(&p, &q);
                surface[a * w + b] = v;
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
    }
    let (score, a, b) = best;
    if !(score >= opts.min_score) || a == 0 || b == 0 || a == w - 1 || b == w - 1 {
        return None;
    }
    let at = |a: usize, b: usize| surface[a * w + b];
    let da = parabolic(at(a - 1, b), score, at(a + 1, b))?;
    let db = parabolic(at(a, b - 1), score, at(a, b + 1))?;
    let coarse = ((pr + a as isize - s) as f64 + da, (pc + b as isize - s) as f64 + db);
    let (d_along, d_across) = refine(reference, target, r, c, h, coarse)?;
    Some(TiePoint {
        ref_row: r as f64,
        ref_col: c as f64,
        target_row: r as f64 + d_along,
        target_col: c as f64 + d_across,
        score,
        d_along,
        d_across,
    })
}

fn node_grid(reference: &Raster, opts: &MatchOptions) -> Vec<(usize, usize)> {
    let h = opts.patch / 2;
    let nodes = |n: usize| -> Vec<usize> {
        if n <= 2 * h {
            return Vec::new();
        }
        let span = n - 1 - 2 * h;
        let first = h + (span % opts.spacing) / 2;
        (first..n - h).step_by(opts.spacing).collect()
    };
    let rows = nodes(reference.rows);
    let cols = nodes(reference.cols);
    rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect()
}

fn run(
    reference: &Raster,
    target: &Raster,
    opts: &MatchOptions,
    prior: impl Fn(usize, usize) -> (f64, f64) + Sync,
) -> Result<Vec<TiePoint>> {
    opts.validate()?;
    if reference.rows != target.rows || reference.cols != target.cols {
        return Err(domain(format!(
            "rasters differ in size: {}x{} vs {}x{}",
            reference.rows, reference.cols, target.rows, target.cols
        )));
    }
    let points: Vec<TiePoint> = node_grid(reference, opts)
        .par_iter()
        .filter_map(|&(r, c)| match_node(reference, target, r, c, prior(r, c), opts))
        .collect();
    if points.len() < opts.min_points {
        return Err(Error::InsufficientTiePoints { found: points.len(), required: opts.min_points });
    }
    Ok(points)
}

/// Tie points on a regular grid of reference nodes. Each offset satisfies
/// `target(x + d) ≈ reference(x)` to sub-pixel precision.
pub fn dense_match(reference: &Raster, target: &Raster, opts: &MatchOptions) -> Result<Vec<TiePoint>> {
    run(reference, target, opts, |_, _| opts.prior)
}

/// Matching with an unknown, possibly large offset that varies slowly across
/// the columns: a sparse wide search seeds each dense node with the median
/// offset of its nearest coarse neighbours in column.
pub fn dense_match_coarse_fine(reference: &Raster, target: &Raster, radius: usize, opts: &MatchOptions) -> Result<Vec<TiePoint>> {
    if radius <= opts.search {
        return dense_match(reference, target, opts);
    }
    let coarse_opts = MatchOptions { spacing: opts.spacing * 4, search: radius, min_points: 3, ..*opts };
    let mut coarse = dense_match(reference, target, &coarse_opts)?;
    coarse.sort_by(|a, b| a.ref_col.total_cmp(&b.ref_col).then(a.ref_row.total_cmp(&b.ref_row)));
    const NEIGHBOURS: usize = 7;
    run(reference, target, opts, |_, c| {
        let mut near: Vec<&TiePoint> = coarse.iter().collect();
        near.sort_by(|a, b| (a.ref_col - c as f64).abs().total_cmp(&(b.ref_col - c as f64).abs()));
        near.truncate(NEIGHBOURS);
        let along: Vec<f64> = near.iter().map(|p| p.d_along).collect();
        let across: Vec<f64> = near.iter().map(|p| p.d_across).collect();
        (median(&along), median(&across))
    })
}
