//! The inductive reduction machinery: the constants alpha_k and c_k(g),
//! the one-step reduction identity, and the depth-k inductive formula with
//! residual reporting.
//!
//! The integral term is always evaluated through the finite smoothed
//! lattice sum (Abel summation), never by quadrature of the count, so the
//! only tolerance sources left are the smoothed sawtooth pieces.

use serde::Serialize;

use crate::counting::{ball_volume, count_points, smoothed_sum};
use crate::error::{Error, Result};
use crate::lattice::{iwasawa_chain, IwasawaChain, LatticeBasis};
use crate::oscsum::{h_smoothed, h_sum, OscSumQuery};
use crate::specfun::gamma::{beta, unit_moment};

/// One verification of the depth-k decomposition of the count:
/// lhs = main_piece + sum(h_pieces) + residual, by construction.
#[derive(Debug, Clone, Serialize)]
pub struct InductiveReport {
    pub depth: u32,
    pub lhs: f64,
    pub main_piece: f64,
    pub h_pieces: Vec<f64>,
    pub residual: f64,
}

/// `alpha_k = int_0^1 (1 - u^2)^{(k-3)/2} u^2 du = B(3/2, (k-1)/2) / 2`.
pub fn alpha_k(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!("alpha_k needs k >= 2, got {k}")));
    }
    Ok(beta(1.5, (k as f64 - 1.0) / 2.0) / 2.0)
}

/// The constant c_k(g) in closed form:
/// `vol(B_1^d) |det g^(d-k)| / (vol(B_1^{d-k}) |det g| int_0^1 (1-t^2)^{(k-2)/2} t^{d-k+1} dt)`.
pub fn c_constants(chain: &IwasawaChain, k: u32) -> Result<f64> {
    let d = chain.dim();
    let k = k as usize;
    if k < 1 || k > d - 1 {
        return Err(Error::domain(format!("c_k needs 1 <= k <= d-1 = {}, got {k}", d - 1)));
    }
    let sub_det: f64 = chain.sub_basis(d - k).det().abs();
    let moment = unit_moment((k as f64 - 2.0) / 2.0, (d - k + 1) as f64);
    Ok(ball_volume(d, 1.0) * sub_det
        / (ball_volume(d - k, 1.0) * chain.sub_basis(d).det().abs() * moment))
}

/// The same constant through the recursion
/// `c_0 = 1, c_1 = 2 / lambda_d, c_k = 2k lambda_{d-k+1}^{-1} alpha_k c_{k-1}`;
/// cross-check route for `c_constants`.
pub fn c_constants_recursive(chain: &IwasawaChain, k: u32) -> Result<f64> {
    let d = chain.dim();
    let k = k as usize;
    if k < 1 || k > d - 1 {
        return Err(Error::domain(format!("c_k needs 1 <= k <= d-1 = {}, got {k}", d - 1)));
    }
    let mut c = 2.0 / chain.lambda(d);
    for j in 2..=k {
        c *= 2.0 * j as f64 * alpha_k(j as u32)? / chain.lambda(d - j + 1);
    }
    Ok(c)
}

/// Verify the one-step reduction identity
/// `N_T(g) = 2 lambda_d^{-1} P_T(g^(d-1)) + H_T(g^(d-1), lambda_d, x^(d-1))`.
pub fn verify_reduction(g: &LatticeBasis, radius: f64) -> Result<InductiveReport> {
    verify_inductive(g, radius, 1)
}

/// Verify the depth-k formula
/// `N_T(g) = c_k smoothed_sum(g^(d-k), T, k)/k + sum_{j<k} c_j H_T^(j)`,
/// with every piece computed independently.
pub fn verify_inductive(g: &LatticeBasis, radius: f64, k: u32) -> Result<InductiveReport> {
    let d = g.dim();
    if d < 2 || k < 1 || k as usize > d - 1 {
        return Err(Error::domain(format!(
            "depth must satisfy 1 <= k <= d-1 = {}, got {k}",
            d.saturating_sub(1)
        )));
    }
    let ku = k as usize;
    let chain = iwasawa_chain(g)?;
    let lhs = count_points(g, radius)?.count as f64;

    let c_k = if ku == 1 { 2.0 / chain.lambda(d) } else { c_constants(&chain, k)? };
    let main_piece = c_k * smoothed_sum(chain.sub_basis(d - ku), radius, k)? / k as f64;

    let mut h_pieces = Vec::with_capacity(ku);
    for j in 0..ku {
        let c_j = if j == 0 { 1.0 } else { c_constants(&chain, j as u32)? };
        let base = chain.sub_basis(d - j - 1).clone();
        let lambda = chain.lambda(d - j);
        let x = chain.shear_vector(d - j - 1).to_vec();
        let q = OscSumQuery::new(base, lambda, x, radius, j as u32)?;
        let h = if j == 0 { h_sum(&q)? } else { h_smoothed(&q)? };
        h_pieces.push(c_j * h);
    }

    let residual = lhs - main_piece - h_pieces.iter().sum::<f64>();
    Ok(InductiveReport { depth: k, lhs, main_piece, h_pieces, residual })
}
