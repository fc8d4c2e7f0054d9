//! Monte-Carlo experiments over shear families: mean squares of the lattice
//! remainder, averaged remainders against their predicted value, compact-set
//! aggregation, and growth-rate fits.

use rayon::prelude::*;
use serde::Serialize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::counting::{ball_volume, count_points};
use crate::decomp::c_constants;
use crate::error::{Error, Result};
use crate::lattice::{apply_shear, iwasawa_chain, LatticeBasis, ShearParameter};
use crate::specfun::sum2int::sum2int_1d;

/// Moments of the remainder R_T over N sheared lattices, with the ratio
/// against the T^{d-1} log^2 T envelope.
#[derive(Debug, Clone, Serialize)]
pub struct MeanSquareEstimate {
    pub radius: f64,
    pub samples: usize,
    pub mean: f64,
    pub mean_square: f64,
    pub std_error: f64,
    pub bound_ratio: f64,
    pub family_d: usize,
    pub family_l: usize,
}

/// Least-squares fit of log mean_square against log T.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Measured and predicted torus average of R_T at one radius.
#[derive(Debug, Clone, Serialize)]
pub struct AverageEstimate {
    pub radius: f64,
    pub average: f64,
    pub std_error: f64,
    pub predicted: f64,
}

fn envelope(radius: f64, d: usize) -> f64 {
    let l = radius.max(std::f64::consts::E).ln();
    radius.powi(d as i32 - 1) * l * l
}

/// Remainders of N uniformly sheared copies of g at one radius, one RNG
/// stream per sample so results are reproducible regardless of thread count.
fn sample_remainders(
    g: &LatticeBasis,
    l: usize,
    radius: f64,
    n: usize,
    seed: u64,
    t_index: usize,
) -> Result<Vec<f64>> {
    let d = g.dim();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((t_index as u64) << 32) | i as u64);
            let u = ShearParameter::random(d, l, &mut rng)?;
            let sheared = apply_shear(&u, g)?;
            Ok(count_points(&sheared, radius)?.remainder)
        })
        .collect()
}

fn moments(radius: f64, remainders: &[f64], d: usize, l: usize) -> MeanSquareEstimate {
    let n = remainders.len();
    let mean = remainders.iter().sum::<f64>() / n as f64;
    let squares: Vec<f64> = remainders.iter().map(|r| r * r).collect();
    let mean_square = squares.iter().sum::<f64>() / n as f64;
    let var_sq = squares.iter().map(|s| (s - mean_square).powi(2)).sum::<f64>()
        / (n as f64 - 1.0).max(1.0);
    MeanSquareEstimate {
        radius,
        samples: n,
        mean,
        mean_square,
        std_error: (var_sq / n as f64).sqrt(),
        bound_ratio: mean_square / envelope(radius, d),
        family_d: d,
        family_l: l,
    }
}

/// Mean square of R_T over the shear family U_{d,l}, one estimate per
/// radius. With `strict`, families outside the supported range are
/// rejected: l >= 2 needs d >= 4 and l <= d/2.
pub fn shear_mean_square(
    g: &LatticeBasis,
    l: usize,
    radii: &[f64],
    n: usize,
    seed: u64,
    strict: bool,
) -> Result<Vec<MeanSquareEstimate>> {
    let d = g.dim();
    if l < 1 || l > d - 1 {
        return Err(Error::FamilyOutOfRange { d, l });
    }
    if strict && l >= 2 && (d < 4 || l > d / 2) {
        return Err(Error::FamilyOutOfRange { d, l });
    }
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    radii
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let rem = sample_remainders(g, l, t, n, seed, ti)?;
            Ok(moments(t, &rem, d, l))
        })
        .collect()
}

/// Torus average of R_T over full shears (l = 1), next to its predicted
/// value: the 1D smoothed sum along the lambda_1 axis minus the volume term.
pub fn shear_average(
    g: &LatticeBasis,
    radii: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<AverageEstimate>> {
    let d = g.dim();
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let chain = iwasawa_chain(g)?;
    let lambda1 = chain.lambda(1);
    let scale = lambda1.powi(d as i32 - 1) * c_constants(&chain, (d - 1) as u32)?
        / (d as f64 - 1.0);
    radii
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let rem = sample_remainders(g, 1, t, n, seed, ti)?;
            let nn = rem.len() as f64;
            let average = rem.iter().sum::<f64>() / nn;
            let var = rem.iter().map(|r| (r - average).powi(2)).sum::<f64>() / (nn - 1.0);
            let smoothed = sum2int_1d(t / lambda1, (d - 1) as u32)?.sum;
            let predicted = scale * smoothed - ball_volume(d, t) / g.covolume();
            Ok(AverageEstimate {
                radius: t,
                average,
                std_error: (var / nn).sqrt(),
                predicted,
            })
        })
        .collect()
}

/// Mean squares over a finite set of unimodular diagonal slices a, each run
/// through the l = 1 shear family, with the per-radius maximum bound ratio.
pub struct CompactSummary {
    pub per_slice: Vec<Vec<MeanSquareEstimate>>,
    /// (radius, max over slices of bound_ratio)
    pub max_bound_ratio: Vec<(f64, f64)>,
}

pub fn compact_set_mean_square(
    d: usize,
    a_samples: &[Vec<f64>],
    radii: &[f64],
    n: usize,
    seed: u64,
) -> Result<CompactSummary> {
    let mut per_slice = Vec::with_capacity(a_samples.len());
    for a in a_samples {
        if a.len() != d {
            return Err(Error::DimMismatch { expected: d, got: a.len() });
        }
        let product: f64 = a.iter().product();
        if (product - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnimodular { product });
        }
        let g = LatticeBasis::diagonal(a)?;
        per_slice.push(shear_mean_square(&g, 1, radii, n, seed, false)?);
    }
    let max_bound_ratio = radii
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let m = per_slice
                .iter()
                .map(|s| s[i].bound_ratio)
                .fold(f64::NEG_INFINITY, f64::max);
            (t, m)
        })
        .collect();
    Ok(CompactSummary { per_slice, max_bound_ratio })
}

/// Least-squares slope of log mean_square against log T.
pub fn growth_fit(estimates: &[MeanSquareEstimate]) -> Result<ExponentFit> {
    let mut points: Vec<(f64, f64)> = estimates
        .iter()
        .filter(|e| e.mean_square > 0.0)
        .map(|e| (e.radius.ln(), e.mean_square.ln()))
        .collect();
    points.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
    if points.len() < 4 {
        return Err(Error::InsufficientPoints { needed: 4, got: points.len() });
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(ExponentFit { points, slope, intercept, r2 })
}
