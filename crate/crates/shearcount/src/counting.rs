//! Exact lattice point counts in balls and the derived quantities:
//! the remainder R_T, the fiber sum P_T, and smoothed lattice sums.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::enumerate::fold_points;
use crate::error::Result;
use crate::lattice::LatticeBasis;
use crate::specfun::gamma::gamma;
use crate::specfun::quad::KahanSum;

/// Count of Z^d g inside the open ball of radius T, with the volume main
/// term and the remainder between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub radius: f64,
    pub count: u64,
    pub main_term: f64,
    pub remainder: f64,
    pub covolume: f64,
    /// Number of points within the relative boundary band around the
    /// sphere; nonzero values warn that the caller may want to perturb T.
    pub boundary_hits: u64,
}

/// Volume of the d-ball of radius T: pi^{d/2} T^d / Gamma(d/2 + 1).
pub fn ball_volume(d: usize, radius: f64) -> f64 {
    assert!(d >= 1);
    assert!(radius >= 0.0);
    PI.powf(d as f64 / 2.0) * radius.powi(d as i32) / gamma(d as f64 / 2.0 + 1.0)
}

/// Exact number of n in Z^d with ||n g|| < T.
pub fn count_points(g: &LatticeBasis, radius: f64) -> Result<CountResult> {
    let (count, hits) = fold_points(g, radius, || 0u64, |acc, _, _| *acc += 1, |a, b| a + b)?;
    let covolume = g.covolume();
    let main_term = ball_volume(g.dim(), radius) / covolume;
    Ok(CountResult {
        radius,
        count,
        main_term,
        remainder: count as f64 - main_term,
        covolume,
        boundary_hits: hits as u64,
    })
}

/// P_T as the exact finite sum `sum_{||n g|| < T} sqrt(T^2 - ||n g||^2)`.
pub fn p_sum(g: &LatticeBasis, radius: f64) -> Result<f64> {
    let t_sq = radius * radius;
    let (acc, _) = fold_points(
        g,
        radius,
        KahanSum::new,
        |acc, _, norm_sq| acc.add((t_sq - norm_sq).max(0.0).sqrt()),
        |mut a, b| {
            a.add(b.value());
            a
        },
    )?;
    Ok(acc.value())
}

/// `sum_{||v|| < T, v in Z^d g} (T^2 - ||v||^2)^{k/2}`.
pub fn smoothed_sum(g: &LatticeBasis, radius: f64, k: u32) -> Result<f64> {
    let t_sq = radius * radius;
    let (acc, _) = fold_points(
        g,
        radius,
        KahanSum::new,
        |acc, _, norm_sq| {
            let w = (t_sq - norm_sq).max(0.0);
            let v = if k % 2 == 0 {
                w.powi(k as i32 / 2)
            } else {
                w.powi(k as i32 / 2) * w.sqrt()
            };
            acc.add(v);
        },
        |mut a, b| {
            a.add(b.value());
            a
        },
    )?;
    Ok(acc.value())
}

/// Poisson main term `c_{k,d} T^{k+d} / covol` with
/// `c_{k,d} = pi^{d/2} Gamma(k/2 + 1) / Gamma((k + d)/2 + 1)`.
pub fn poisson_main_term(g: &LatticeBasis, radius: f64, k: u32) -> f64 {
    let d = g.dim();
    poisson_constant(k, d) * radius.powi((k as i32) + (d as i32)) / g.covolume()
}

/// The constant c_{k,d} via the Beta/Gamma route.
pub fn poisson_constant(k: u32, d: usize) -> f64 {
    let df = d as f64;
    let kf = k as f64;
    PI.powf(df / 2.0) * gamma(kf / 2.0 + 1.0) / gamma((kf + df) / 2.0 + 1.0)
}

/// Scaled size of the Poisson remainder, used by the boundedness checks:
/// |smoothed_sum - main| / T^{(d+k-1)/2}.
pub fn poisson_scaled_error(g: &LatticeBasis, radius: f64, k: u32) -> Result<f64> {
    let s = smoothed_sum(g, radius, k)?;
    let m = poisson_main_term(g, radius, k);
    let d = g.dim() as f64;
    Ok((s - m).abs() / radius.powf((d + k as f64 - 1.0) / 2.0))
}

impl CountResult {
    pub fn has_boundary_warning(&self) -> bool {
        self.boundary_hits > 0
    }
}

/// Brute-force count over the integer box |n_i| <= box_radius; test oracle.
pub fn brute_force_count(g: &LatticeBasis, radius: f64, box_radius: i64) -> u64 {
    let d = g.dim();
    let m = g.matrix();
    let mut count = 0u64;
    let mut n = vec![-box_radius; d];
    loop {
        let mut norm_sq = 0.0;
        for j in 0..d {
            let mut x = 0.0;
            for (i, &ni) in n.iter().enumerate() {
                x += ni as f64 * m[(i, j)];
            }
            norm_sq += x * x;
        }
        if norm_sq < radius * radius {
            count += 1;
        }
        // odometer increment
        let mut level = 0;
        loop {
            if level == d {
                return count;
            }
            n[level] += 1;
            if n[level] > box_radius {
                n[level] = -box_radius;
                level += 1;
            } else {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volume_known_values() {
        assert!((ball_volume(2, 1.0) - PI).abs() < 1e-14);
        assert!((ball_volume(3, 2.0) - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
        assert!((ball_volume(1, 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn count_origin_only() {
        let r = count_points(&LatticeBasis::identity(3), 0.5).unwrap();
        assert_eq!(r.count, 1);
        assert!((r.remainder - (1.0 - r.main_term)).abs() < 1e-12);
    }

    #[test]
    fn count_z2_small_radii() {
        let g = LatticeBasis::identity(2);
        assert_eq!(count_points(&g, 1.5).unwrap().count, 9);
        // T = 10: boundary points at distance exactly 10 are excluded
        let r = count_points(&g, 10.0).unwrap();
        assert_eq!(r.count, brute_force_count(&g, 10.0, 10));
        assert!(r.boundary_hits > 0); // (6,8) etc. lie on the sphere
    }

    #[test]
    fn p_sum_hand_values() {
        // 1D lattice (1), T = 1.5: terms n = 0, +-1
        let g = LatticeBasis::identity(1);
        let got = p_sum(&g, 1.5).unwrap();
        let want = 1.5 + 2.0 * (1.25f64).sqrt();
        assert!((got - want).abs() < 1e-12);

        // T below the shortest vector: only the origin term sqrt(T^2)
        let g = LatticeBasis::identity(2);
        assert!((p_sum(&g, 0.5).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn smoothed_sum_hand_values() {
        let g = LatticeBasis::identity(2);
        assert!((smoothed_sum(&g, 0.5, 2).unwrap() - 0.25).abs() < 1e-14);
        // T = 1.5, k = 2: 2.25 + 4 * 1.25 + 4 * 0.25
        assert!((smoothed_sum(&g, 1.5, 2).unwrap() - 8.25).abs() < 1e-12);
    }

    #[test]
    fn smoothed_sum_matches_sum2int_for_1d() {
        let g = LatticeBasis::identity(1);
        for &t in &[2.5, 7.3, 20.1] {
            for k in 1..=4u32 {
                let a = smoothed_sum(&g, t, k).unwrap();
                let b = crate::specfun::sum2int_1d(t, k).unwrap().sum;
                assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "T = {t}, k = {k}");
            }
        }
    }

    #[test]
    fn poisson_constant_reduces_to_volume_at_k0() {
        for d in 1..=6 {
            let c = poisson_constant(0, d);
            assert!((c - ball_volume(d, 1.0)).abs() < 1e-13, "d = {d}");
        }
        // c_{2,2} = pi/2
        assert!((poisson_constant(2, 2) - PI / 2.0).abs() < 1e-14);
    }
}
