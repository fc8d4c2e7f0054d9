//! Exact enumeration of lattice points in a ball.
//!
//! Points n in Z^d with ||n g|| < T are walked by recursive coordinate
//! bounds on the Cholesky factor of the Gram matrix, last coordinate first.
//! Per-level intervals carry a small relative safety margin and every leaf
//! is re-checked against the exact norm, so rounding never drops a point.
//! Points are never materialized; consumers are fold-style visitors.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;

/// Relative width of the boundary band: points with ||n g|| within
/// (1 +/- 1e-9) T of the sphere are reported as boundary hits.
pub const BOUNDARY_REL: f64 = 1e-9;

/// Estimated point count above which the outermost coordinate is split
/// across threads.
const PARALLEL_THRESHOLD: f64 = 20_000.0;

struct Walk {
    dim: usize,
    chol: DMatrix<f64>, // lower-triangular L with g g^T = L L^T
    t_sq: f64,
    t_eff_sq: f64,
    band_lo: f64,
    band_hi: f64,
}

impl Walk {
    fn new(basis: &LatticeBasis, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        let gram = basis.gram();
        let chol = nalgebra::Cholesky::new(gram)
            .ok_or(Error::SingularBasis { det: basis.det(), threshold: 0.0 })?
            .l();
        let t_eff = radius * (1.0 + BOUNDARY_REL);
        let t_lo = radius * (1.0 - BOUNDARY_REL);
        Ok(Walk {
            dim: basis.dim(),
            chol,
            t_sq: radius * radius,
            t_eff_sq: t_eff * t_eff,
            band_lo: t_lo * t_lo,
            band_hi: t_eff * t_eff,
        })
    }

    /// Offset contributed to column `level` by the already-fixed
    /// coordinates above it.
    fn center(&self, level: usize, coords: &[i64]) -> f64 {
        let mut c = 0.0;
        for i in (level + 1)..self.dim {
            c += coords[i] as f64 * self.chol[(i, level)];
        }
        c
    }

    fn level_range(&self, level: usize, coords: &[i64], partial: f64) -> (i64, i64, f64) {
        let c = self.center(level, coords);
        let rem = self.t_eff_sq - partial;
        if rem <= 0.0 {
            return (1, 0, c);
        }
        let s = rem.sqrt();
        let ljj = self.chol[(level, level)];
        let lo = ((-s - c) / ljj).ceil() as i64;
        let hi = ((s - c) / ljj).floor() as i64;
        (lo, hi, c)
    }

    fn descend<F: FnMut(&[i64], f64)>(
        &self,
        level: usize,
        coords: &mut [i64],
        partial: f64,
        visit: &mut F,
        boundary_hits: &mut usize,
    ) {
        let (lo, hi, c) = self.level_range(level, coords, partial);
        for n in lo..=hi {
            let y = n as f64 * self.chol[(level, level)] + c;
            let q = partial + y * y;
            coords[level] = n;
            if level == 0 {
                if q < self.t_sq {
                    if q > self.band_lo {
                        *boundary_hits += 1;
                    }
                    visit(coords, q);
                } else if q < self.band_hi {
                    *boundary_hits += 1;
                }
            } else if q < self.t_eff_sq {
                self.descend(level - 1, coords, q, visit, boundary_hits);
            }
        }
    }
}

/// Serial walk over every lattice point with ||n g|| < T.
/// Returns the number of boundary hits (points within the relative band
/// around the sphere, inside or outside).
pub fn for_each_point<F: FnMut(&[i64], f64)>(
    basis: &LatticeBasis,
    radius: f64,
    mut visit: F,
) -> Result<usize> {
    let walk = Walk::new(basis, radius)?;
    let mut coords = vec![0i64; walk.dim];
    let mut hits = 0;
    walk.descend(walk.dim - 1, &mut coords, 0.0, &mut visit, &mut hits);
    Ok(hits)
}

/// Fold an associative-commutative accumulator over the enumeration,
/// splitting the outermost coordinate across threads when the ball is
/// large. The reduction order is fixed, so results are reproducible for a
/// given basis and radius regardless of thread count.
pub fn fold_points<A, FI, FL, FC>(
    basis: &LatticeBasis,
    radius: f64,
    init: FI,
    leaf: FL,
    combine: FC,
) -> Result<(A, usize)>
where
    A: Send,
    FI: Fn() -> A + Sync,
    FL: Fn(&mut A, &[i64], f64) + Sync,
    FC: Fn(A, A) -> A,
{
    let walk = Walk::new(basis, radius)?;
    let d = walk.dim;
    let expected = crate::counting::ball_volume(d, radius) / basis.covolume();
    if d == 1 || expected < PARALLEL_THRESHOLD {
        let mut acc = init();
        let mut coords = vec![0i64; d];
        let mut hits = 0;
        walk.descend(d - 1, &mut coords, 0.0, &mut |n: &[i64], q| leaf(&mut acc, n, q), &mut hits);
        return Ok((acc, hits));
    }

    let top = d - 1;
    let coords = vec![0i64; d];
    let (lo, hi, _) = walk.level_range(top, &coords, 0.0);
    let chunks: Vec<(A, usize)> = (lo..=hi)
        .into_par_iter()
        .map(|n_top| {
            let mut acc = init();
            let mut coords = vec![0i64; d];
            coords[top] = n_top;
            let y = n_top as f64 * walk.chol[(top, top)];
            let q = y * y;
            let mut hits = 0;
            if q < walk.t_eff_sq {
                walk.descend(top - 1, &mut coords, q, &mut |n: &[i64], qq| leaf(&mut acc, n, qq), &mut hits);
            }
            (acc, hits)
        })
        .collect();

    let mut hits = 0;
    let mut acc = init();
    for (a, h) in chunks {
        acc = combine(acc, a);
        hits += h;
    }
    Ok((acc, hits))
}
