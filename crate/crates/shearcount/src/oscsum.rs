//! The sawtooth lattice sums H_T(g, lambda, x), their radially smoothed
//! versions H_T^(j), and torus averages / mean squares.
//!
//! The smoothed sums have two independent routes: a per-point piecewise
//! evaluation that integrates the sawtooth in closed form on each linearity
//! interval, and a truncated Fourier series through the oscillatory
//! integrals I_j. The series serves as oracle for the exact route.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::for_each_point;
use crate::error::{Error, Result};
use crate::lattice::LatticeBasis;
use crate::specfun::oscint::osc_integral_i;
use crate::specfun::quad::{KahanSum, GL32};

/// The odd sawtooth s(t) = 1/2 - {t}; s(n) = 1/2 at integers.
pub fn sawtooth(t: f64) -> f64 {
    0.5 - t.rem_euclid(1.0)
}

/// One H_T evaluation request: base lattice of dimension d-1, fiber scale
/// lambda, torus point x, radius, and smoothing order j.
#[derive(Debug, Clone)]
pub struct OscSumQuery {
    pub base: LatticeBasis,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub radius: f64,
    pub smooth_order: u32,
}

impl OscSumQuery {
    pub fn new(
        base: LatticeBasis,
        lambda: f64,
        x: Vec<f64>,
        radius: f64,
        smooth_order: u32,
    ) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!("radius must be positive, got {radius}")));
        }
        if x.len() != base.dim() {
            return Err(Error::DimMismatch { expected: base.dim(), got: x.len() });
        }
        Ok(OscSumQuery { base, lambda, x, radius, smooth_order })
    }
}

/// Enumerated points of the base lattice inside the ball: for each point,
/// the fiber height R = sqrt(T^2 - ||n g||^2) and the integer coordinates.
pub struct PointSet {
    pub points: Vec<(f64, Vec<i64>)>,
    pub boundary_hits: usize,
}

impl PointSet {
    pub fn collect(base: &LatticeBasis, radius: f64) -> Result<Self> {
        let t_sq = radius * radius;
        let mut points = Vec::new();
        let boundary_hits = for_each_point(base, radius, |n, norm_sq| {
            points.push(((t_sq - norm_sq).max(0.0).sqrt(), n.to_vec()));
        })?;
        Ok(PointSet { points, boundary_hits })
    }

    fn dot(n: &[i64], x: &[f64]) -> f64 {
        n.iter().zip(x).map(|(&ni, &xi)| ni as f64 * xi).sum()
    }

    /// H_T at the torus point x.
    pub fn h_value(&self, lambda: f64, x: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for (r, n) in &self.points {
            let a = Self::dot(n, x);
            acc.add(sawtooth(r / lambda - a) + sawtooth(r / lambda + a));
        }
        acc.value()
    }

    /// H_T^(j) at x via the per-point piecewise-exact route (j >= 1).
    pub fn h_smoothed_value(&self, lambda: f64, x: &[f64], j: u32) -> f64 {
        let mut acc = KahanSum::new();
        for (r, n) in &self.points {
            let a = Self::dot(n, x);
            acc.add(sawtooth_kernel_integral(*r, lambda, a, j));
            acc.add(sawtooth_kernel_integral(*r, lambda, -a, j));
        }
        acc.value()
    }
}

/// `int_0^R s(u/lambda - b) (R^2 - u^2)^{(j-2)/2} u du`, integrating the
/// piecewise-linear sawtooth exactly on each linearity interval. Even j
/// pieces are polynomial-exact; odd j pieces use Gauss order 32 after the
/// u = R sin(phi) substitution that removes the endpoint weight.
fn sawtooth_kernel_integral(r: f64, lambda: f64, b: f64, j: u32) -> f64 {
    assert!(j >= 1);
    // breakpoints: u = lambda (m + b) in (0, R)
    let m_lo = (-b).floor() as i64 + 1; // smallest m with lambda(m+b) > 0
    let mut cuts = vec![0.0];
    let mut m = m_lo;
    loop {
        let u = lambda * (m as f64 + b);
        if u >= r {
            break;
        }
        if u > 0.0 {
            cuts.push(u);
        }
        m += 1;
    }
    cuts.push(r);

    let mut acc = KahanSum::new();
    for w in cuts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        if u1 - u0 <= 0.0 {
            continue;
        }
        let mid = 0.5 * (u0 + u1);
        let floor_mid = (mid / lambda - b).floor();
        // s(u/lambda - b) = c0 - u/lambda on this piece
        let c0 = 0.5 + b + floor_mid;
        acc.add(linear_kernel_piece(r, lambda, c0, u0, u1, j));
    }
    acc.value()
}

/// `int_{u0}^{u1} (c0 - u/lambda) (R^2 - u^2)^{(j-2)/2} u du`.
fn linear_kernel_piece(r: f64, lambda: f64, c0: f64, u0: f64, u1: f64, j: u32) -> f64 {
    if j % 2 == 0 {
        let h = (j as i32 - 2) / 2;
        // A1 = int (R^2-u^2)^h u du
        let a1 = (pow_int(r * r - u0 * u0, h + 1) - pow_int(r * r - u1 * u1, h + 1))
            / (2.0 * (h + 1) as f64);
        // A2 = int (R^2-u^2)^h u^2 du, binomial expansion
        let mut a2 = 0.0;
        let mut binom = 1.0;
        for i in 0..=h {
            let p = 2 * i + 3;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            a2 += sign * binom * pow_int(r * r, h - i) * (pow_int(u1, p) - pow_int(u0, p))
                / p as f64;
            binom *= (h - i) as f64 / (i + 1) as f64;
        }
        c0 * a1 - a2 / lambda
    } else {
        let phi0 = (u0 / r).min(1.0).asin();
        let phi1 = (u1 / r).min(1.0).asin();
        let scale = r.powi(j as i32);
        GL32.integrate(phi0, phi1, |phi| {
            let (s, c) = phi.sin_cos();
            scale * (c0 - r * s / lambda) * c.powi(j as i32 - 1) * s
        })
    }
}

fn pow_int(x: f64, p: i32) -> f64 {
    x.powi(p)
}

/// H_T(g, lambda, x), the exact sawtooth sum (j = 0).
pub fn h_sum(q: &OscSumQuery) -> Result<f64> {
    let pts = PointSet::collect(&q.base, q.radius)?;
    Ok(pts.h_value(q.lambda, &q.x))
}

/// Truncated Fourier form of H_T: partial sum over m <= m_terms of
/// `(2/pi) (1/m) sum_n sin(2 pi m R/lambda) cos(2 pi m n.x)`.
pub fn h_sum_series(q: &OscSumQuery, m_terms: usize) -> Result<f64> {
    if m_terms < 1 {
        return Err(Error::domain("series needs at least one term".to_string()));
    }
    let pts = PointSet::collect(&q.base, q.radius)?;
    let mut acc = KahanSum::new();
    for (r, n) in &pts.points {
        let a = PointSet::dot(n, &q.x);
        let mut point_acc = KahanSum::new();
        for m in 1..=m_terms {
            let mf = m as f64;
            point_acc
                .add((2.0 * PI * mf * r / q.lambda).sin() * (2.0 * PI * mf * a).cos() / mf);
        }
        acc.add(2.0 / PI * point_acc.value());
    }
    Ok(acc.value())
}

/// H_T^(j) via the piecewise-exact route; j = 0 falls back to `h_sum`.
pub fn h_smoothed(q: &OscSumQuery) -> Result<f64> {
    if q.smooth_order == 0 {
        return h_sum(q);
    }
    let pts = PointSet::collect(&q.base, q.radius)?;
    Ok(pts.h_smoothed_value(q.lambda, &q.x, q.smooth_order))
}

/// Series route for H_T^(j):
/// `(2 lambda^j / pi) sum_m m^{-(1+j)} sum_n I_j(m R / lambda) cos(2 pi m n.x)`.
pub fn h_smoothed_series(q: &OscSumQuery, m_terms: usize) -> Result<f64> {
    let j = q.smooth_order;
    if j == 0 {
        return h_sum_series(q, m_terms);
    }
    let pts = PointSet::collect(&q.base, q.radius)?;
    let terms: Vec<f64> = (1..=m_terms)
        .into_par_iter()
        .map(|m| {
            let mf = m as f64;
            let mut inner = KahanSum::new();
            for (r, n) in &pts.points {
                let a = PointSet::dot(n, &q.x);
                let i_j = osc_integral_i(j, mf * r / q.lambda).expect("validated args");
                inner.add(i_j * (2.0 * PI * mf * a).cos());
            }
            inner.value() / mf.powi(1 + j as i32)
        })
        .collect();
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t);
    }
    Ok(2.0 * q.lambda.powi(j as i32) / PI * acc.value())
}

/// Rigorous bound on the tail dropped by `h_smoothed_series`, given a
/// constant c_j with |I_j(X)| <= c_j X^{j/2}:
/// tail <= (2 lambda^{j/2} / pi) c_j (sum_n R^{j/2}) (2/j) M^{-j/2}.
pub fn h_series_tail_bound(q: &OscSumQuery, m_terms: usize, c_j: f64) -> Result<f64> {
    let j = q.smooth_order;
    if j == 0 {
        // per-point tail of the sawtooth series is O(1/(pi M))
        let pts = PointSet::collect(&q.base, q.radius)?;
        return Ok(2.0 * pts.points.len() as f64 / (PI * m_terms as f64));
    }
    let pts = PointSet::collect(&q.base, q.radius)?;
    let jf = j as f64;
    let r_sum: f64 = pts.points.iter().map(|(r, _)| (r / q.lambda).powf(jf / 2.0)).sum();
    let zeta_tail = (2.0 / jf) * (m_terms as f64).powf(-jf / 2.0);
    Ok(2.0 * q.lambda.powi(j as i32) / PI * c_j * r_sum * zeta_tail * 2.0)
}

/// Average of H_T^(j) over the torus. Exact closed form for j = 0;
/// tensor-grid quadrature of the smoothed sum for j >= 1.
pub fn h_average(base: &LatticeBasis, lambda: f64, radius: f64, j: u32, grid: usize) -> Result<f64> {
    if j == 0 {
        return Ok(1.0 - 2.0 * (radius / lambda).rem_euclid(1.0));
    }
    let pts = PointSet::collect(base, radius)?;
    let d = base.dim();
    let values = grid_values(&pts, lambda, d, grid, |pts, x| pts.h_smoothed_value(lambda, x, j));
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Tensor-grid quadrature of the j = 0 sum; grid oracle for the exact
/// average formula.
pub fn h_average_grid(base: &LatticeBasis, lambda: f64, radius: f64, grid: usize) -> Result<f64> {
    let pts = PointSet::collect(base, radius)?;
    let d = base.dim();
    let values = grid_values(&pts, lambda, d, grid, |pts, x| pts.h_value(lambda, x));
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

fn grid_values<F: Fn(&PointSet, &[f64]) -> f64 + Sync>(
    pts: &PointSet,
    _lambda: f64,
    d: usize,
    grid: usize,
    eval: F,
) -> Vec<f64> {
    let total = grid.pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![0.0; d];
            let mut rest = idx;
            for xi in x.iter_mut() {
                *xi = (rest % grid) as f64 / grid as f64 + 0.5 / grid as f64;
                rest /= grid;
            }
            eval(pts, &x)
        })
        .collect()
}

/// How the torus integral in a mean-square estimate is sampled.
#[derive(Debug, Clone, Copy)]
pub enum TorusSampling {
    /// Midpoint tensor grid with the given points per dimension.
    Grid(usize),
    /// Monte-Carlo with independent per-sample RNG streams.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct MeanSquareValue {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Estimate `int |H_T^(j)|^2 dx` over the torus.
pub fn h_mean_square(
    base: &LatticeBasis,
    lambda: f64,
    radius: f64,
    j: u32,
    sampling: TorusSampling,
) -> Result<MeanSquareValue> {
    let pts = PointSet::collect(base, radius)?;
    let d = base.dim();
    let eval = |x: &[f64]| -> f64 {
        let h = if j == 0 {
            pts.h_value(lambda, x)
        } else {
            pts.h_smoothed_value(lambda, x, j)
        };
        h * h
    };
    let values: Vec<f64> = match sampling {
        TorusSampling::Grid(grid) => grid_values(&pts, lambda, d, grid, |p, x| {
            let h = if j == 0 { p.h_value(lambda, x) } else { p.h_smoothed_value(lambda, x, j) };
            h * h
        }),
        TorusSampling::MonteCarlo { samples, seed } => (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
                eval(&x)
            })
            .collect(),
    };
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
    Ok(MeanSquareValue {
        value: mean,
        std_error: (var / n as f64).sqrt(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sawtooth_values() {
        assert!((sawtooth(0.25) - 0.25).abs() < 1e-15);
        assert!((sawtooth(0.9) + 0.4).abs() < 1e-15);
        assert_eq!(sawtooth(3.0), 0.5);
        for i in 0..100 {
            let t = -7.3 + 0.141 * i as f64;
            assert!((sawtooth(t + 1.0) - sawtooth(t)).abs() < 1e-12);
        }
    }

    fn query_1d(lambda: f64, x: f64, radius: f64, j: u32) -> OscSumQuery {
        OscSumQuery::new(LatticeBasis::identity(1), lambda, vec![x], radius, j).unwrap()
    }

    #[test]
    fn single_term_hand_value() {
        // only n = 0 survives: 2 s(0.9) = -0.8
        let q = query_1d(1.0, 0.0, 0.9, 0);
        assert!((h_sum(&q).unwrap() + 0.8).abs() < 1e-14);
    }

    #[test]
    fn below_shortest_vector_only_origin() {
        let q = OscSumQuery::new(
            LatticeBasis::identity(2),
            0.7,
            vec![0.3, 0.9],
            0.45,
            0,
        )
        .unwrap();
        let want = 2.0 * sawtooth(0.45 / 0.7);
        assert!((h_sum(&q).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn parity_in_x() {
        let q = OscSumQuery::new(
            LatticeBasis::from_rows(&[vec![1.1, 0.2], vec![-0.1, 0.8]]).unwrap(),
            0.9,
            vec![0.31, 0.77],
            3.1,
            0,
        )
        .unwrap();
        let mut qneg = q.clone();
        qneg.x = q.x.iter().map(|v| -v).collect();
        assert_eq!(h_sum(&q).unwrap(), h_sum(&qneg).unwrap());
    }

    #[test]
    fn trivial_bound() {
        let base = LatticeBasis::from_rows(&[vec![0.9, 0.1], vec![0.0, 1.2]]).unwrap();
        let n = crate::counting::count_points(&base, 4.2).unwrap().count as f64;
        let q = OscSumQuery::new(base, 1.3, vec![0.21, 0.48], 4.2, 0).unwrap();
        assert!(h_sum(&q).unwrap().abs() <= n + 1e-12);
    }

    #[test]
    fn series_converges_to_exact() {
        let q = query_1d(1.0, 0.37, 2.3, 0);
        let exact = h_sum(&q).unwrap();
        let s = h_sum_series(&q, 100_000).unwrap();
        assert!((s - exact).abs() < 2e-3, "{s} vs {exact}");
    }

    #[test]
    fn smoothed_single_point_vs_quadrature() {
        // T below shortest vector: H^(j) = int_0^T 2 s(t/lambda) (T^2-t^2)^{(j-2)/2} t dt
        let lambda = 0.8;
        let t = 0.6;
        for j in 1..=3u32 {
            let q = OscSumQuery::new(LatticeBasis::identity(1), lambda, vec![0.0], t, j).unwrap();
            let got = h_smoothed(&q).unwrap();
            // dense panel quadrature with the sin substitution
            let want = GL32.integrate_panels(0.0, std::f64::consts::FRAC_PI_2, 200, |phi| {
                let (s, c) = phi.sin_cos();
                let u = t * s;
                2.0 * sawtooth(u / lambda) * (t * c).powi(j as i32 - 2) * u * t * c
            });
            assert!((got - want).abs() < 1e-8, "j = {j}: {got} vs {want}");
        }
    }

    #[test]
    fn smoothed_periodic_in_x() {
        let base = LatticeBasis::identity(1);
        let q1 = OscSumQuery::new(base.clone(), 1.0, vec![0.3], 1.2, 2).unwrap();
        let q2 = OscSumQuery::new(base, 1.0, vec![1.3], 1.2, 2).unwrap();
        assert!((h_smoothed(&q1).unwrap() - h_smoothed(&q2).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn smoothed_exact_vs_series_j2() {
        let q = query_1d(1.0, 0.3, 1.2, 2);
        let exact = h_smoothed(&q).unwrap();
        let series = h_smoothed_series(&q, 10_000).unwrap();
        let bound = h_series_tail_bound(&q, 10_000, 1.0).unwrap();
        assert!((exact - series).abs() <= bound.max(1e-8), "{exact} vs {series}, bound {bound}");
    }

    #[test]
    fn average_exact_formula() {
        // lambda = 1, T = 2.25: 1 - 2 * 0.25 = 0.5
        let got = h_average(&LatticeBasis::identity(1), 1.0, 2.25, 0, 1).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn average_grid_matches_exact_1d() {
        let base = LatticeBasis::identity(1);
        let exact = h_average(&base, 1.0, 2.6, 0, 1).unwrap();
        let grid = h_average_grid(&base, 1.0, 2.6, 512).unwrap();
        assert!((grid - exact).abs() < 5e-2, "{grid} vs {exact}");
    }

    #[test]
    fn mean_square_constant_integrand() {
        // T below shortest vector, j = 0: integrand is 4 s(T/lambda)^2 for all x
        let base = LatticeBasis::identity(2);
        let (lambda, t) = (1.0, 0.45);
        let ms = h_mean_square(&base, lambda, t, 0, TorusSampling::Grid(4)).unwrap();
        let want = 4.0 * sawtooth(t / lambda).powi(2);
        assert!((ms.value - want).abs() < 1e-13);
        assert!(ms.std_error < 1e-13);
    }

    #[test]
    fn mean_square_seed_reproducible() {
        let base = LatticeBasis::identity(2);
        let s = TorusSampling::MonteCarlo { samples: 50, seed: 42 };
        let a = h_mean_square(&base, 1.0, 3.3, 0, s).unwrap();
        let b = h_mean_square(&base, 1.0, 3.3, 0, s).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.std_error, b.std_error);
    }
}
