//! Lattice bases, Iwasawa coordinate chains, duals, shears, and the
//! shortest-vector length.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// An invertible d x d real matrix whose integer row span is the lattice
/// Z^d g. Row i is the i-th basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    dim: usize,
    matrix: DMatrix<f64>,
    det: f64,
}

impl LatticeBasis {
    /// Build a basis from its rows, rejecting near-singular input.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim {
            return Err(Error::DimMismatch {
                expected: dim.max(1),
                got: matrix.ncols(),
            });
        }
        let det = matrix.clone().lu().determinant();
        let max_row_norm = (0..dim)
            .map(|i| matrix.row(i).norm())
            .fold(0.0f64, f64::max);
        let threshold = 1e-12 * max_row_norm.powi(dim as i32);
        if det.abs() < threshold || !det.is_finite() {
            return Err(Error::SingularBasis {
                det,
                threshold,
            });
        }
        Ok(LatticeBasis { dim, matrix, det })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(Error::DimMismatch { expected: d, got: r.len() });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(d, d, &flat))
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is nonsingular")
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) * scale)
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let d = entries.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// |det g|, the volume of a fundamental domain.
    pub fn covolume(&self) -> f64 {
        self.det.abs()
    }

    /// Gram matrix g g^T.
    pub fn gram(&self) -> DMatrix<f64> {
        &self.matrix * self.matrix.transpose()
    }

    /// Canonical byte encoding (dim + little-endian row-major entries);
    /// used for cache keys.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.dim * self.dim);
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.extend_from_slice(&self.matrix[(i, j)].to_le_bytes());
            }
        }
        out
    }

    /// Plain-text format: first line "d", then d rows of d decimals.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let d: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty basis file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        if d == 0 {
            return Err(Error::Parse("dimension must be >= 1".into()));
        }
        let mut entries = Vec::with_capacity(d * d);
        for tok in tokens.by_ref().take(d * d) {
            entries.push(
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad entry '{tok}': {e}")))?,
            );
        }
        if entries.len() != d * d {
            return Err(Error::Parse(format!(
                "expected {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(d, d, &entries))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                if j > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{:.17e}", self.matrix[(i, j)]);
            }
            s.push('\n');
        }
        s
    }
}

/// The nested coordinates (g^(l), lambda_l, x^(l), k^(l)) obtained by
/// peeling the last row of the basis repeatedly.
#[derive(Debug, Clone)]
pub struct IwasawaChain {
    /// lambda_1 .. lambda_d, all positive.
    pub lambdas: Vec<f64>,
    /// x^(1) .. x^(d-1); x^(l) has length l.
    pub shear_vectors: Vec<Vec<f64>>,
    /// g^(1) .. g^(d); g^(d) is the input (orientation-fixed).
    pub sub_bases: Vec<LatticeBasis>,
    /// k^(1) .. k^(d); with the Gram-Schmidt representative only k^(d) is
    /// nontrivial.
    pub rotations: Vec<DMatrix<f64>>,
    /// True when the input had det < 0 and the first row was negated.
    pub orientation_flipped: bool,
}

impl IwasawaChain {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, l: usize) -> f64 {
        self.lambdas[l - 1]
    }

    pub fn sub_basis(&self, l: usize) -> &LatticeBasis {
        &self.sub_bases[l - 1]
    }

    pub fn shear_vector(&self, l: usize) -> &[f64] {
        &self.shear_vectors[l - 1]
    }

    /// Rebuild g^(l) from the level-(l-1) data; used by the reconstruction
    /// invariant tests.
    pub fn reconstruct_level(&self, l: usize) -> DMatrix<f64> {
        assert!(l >= 2 && l <= self.dim());
        let lower = self.sub_bases[l - 2].matrix();
        let lam = self.lambdas[l - 1];
        let x = &self.shear_vectors[l - 2];
        let mut block = DMatrix::zeros(l, l);
        block.view_mut((0, 0), (l - 1, l - 1)).copy_from(lower);
        for i in 0..l - 1 {
            block[(i, l - 1)] = lam * x[i];
        }
        block[(l - 1, l - 1)] = lam;
        block * &self.rotations[l - 1]
    }
}

/// Decompose g into the Iwasawa chain by Gram-Schmidt on the rows from the
/// bottom up. Inputs with det < 0 have their first row negated first.
pub fn iwasawa_chain(g: &LatticeBasis) -> Result<IwasawaChain> {
    let d = g.dim();
    let (m, flipped) = if g.det() < 0.0 {
        let mut m = g.matrix().clone();
        for j in 0..d {
            m[(0, j)] = -m[(0, j)];
        }
        (m, true)
    } else {
        (g.matrix().clone(), false)
    };

    // Orthonormalize rows r_d, r_{d-1}, ..., r_1; the change of basis
    // B = m q^T is upper triangular with positive diagonal and g = B q.
    let mut q = DMatrix::<f64>::zeros(d, d);
    for i in (0..d).rev() {
        let mut v = m.row(i).transpose();
        for j in (i + 1)..d {
            let proj = m.row(i).transpose().dot(&q.row(j).transpose());
            v -= q.row(j).transpose() * proj;
        }
        let norm = v.norm();
        if norm < 1e-12 * m.row(i).norm().max(1.0) {
            return Err(Error::SingularBasis { det: g.det(), threshold: 1e-12 });
        }
        q.row_mut(i).copy_from(&(v / norm).transpose());
    }
    let b = &m * q.transpose();

    let lambdas: Vec<f64> = (0..d).map(|l| b[(l, l)]).collect();
    let mut shear_vectors = Vec::with_capacity(d.saturating_sub(1));
    for l in 1..d {
        let x: Vec<f64> = (0..l).map(|i| b[(i, l)] / lambdas[l]).collect();
        shear_vectors.push(x);
    }
    let mut sub_bases = Vec::with_capacity(d);
    for l in 1..=d {
        if l == d {
            sub_bases.push(LatticeBasis::new(m.clone())?);
        } else {
            sub_bases.push(LatticeBasis::new(b.view((0, 0), (l, l)).into_owned())?);
        }
    }
    let mut rotations: Vec<DMatrix<f64>> = (1..d).map(|l| DMatrix::identity(l, l)).collect();
    rotations.push(q);

    Ok(IwasawaChain {
        lambdas,
        shear_vectors,
        sub_bases,
        rotations,
        orientation_flipped: flipped,
    })
}

/// Basis of the dual lattice: rows biorthogonal to the rows of g.
pub fn dual_basis(g: &LatticeBasis) -> Result<LatticeBasis> {
    let inv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBasis { det: g.det(), threshold: 0.0 })?;
    LatticeBasis::new(inv.transpose())
}

/// Length of the shortest nonzero lattice vector, by enumeration after
/// pairwise size reduction.
pub fn shortest_vector_length(g: &LatticeBasis) -> Result<f64> {
    let d = g.dim();
    let mut m = g.matrix().clone();
    // pairwise (Lagrange-style) size reduction to shrink the search radius
    for _ in 0..1000 {
        let mut changed = false;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let denom = m.row(j).norm_squared();
                let mu = (m.row(i).dot(&m.row(j)) / denom).round();
                if mu != 0.0 {
                    let rj = m.row(j).into_owned();
                    let mut ri = m.row_mut(i);
                    ri -= rj * mu;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let reduced = LatticeBasis::new(m)?;
    let radius = (0..d)
        .map(|i| reduced.matrix().row(i).norm())
        .fold(f64::INFINITY, f64::min);

    let mut best = radius * radius;
    crate::enumerate::for_each_point(&reduced, radius * (1.0 + 1e-6), |n, norm_sq| {
        if n.iter().any(|&c| c != 0) && norm_sq < best {
            best = norm_sq;
        }
    })?;
    Ok(best.sqrt())
}

/// A point of U_{d,l}(Z) \ U_{d,l}(R): strictly-upper-triangular entries
/// modulo 1, with columns 0..l-1 forced to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearParameter {
    dim: usize,
    zero_cols: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl ShearParameter {
    /// Positions (i, j) with i < j that may carry a nonzero entry, in
    /// row-major order. Columns are 0-based; the family U_{d,l} zeroes the
    /// first l columns, so free positions have j >= l.
    pub fn free_positions(dim: usize, zero_cols: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                if j >= zero_cols {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn zero(dim: usize, zero_cols: usize) -> Result<Self> {
        if zero_cols == 0 || zero_cols > dim {
            return Err(Error::domain(format!(
                "zero_cols must be in 1..={dim}, got {zero_cols}"
            )));
        }
        Ok(ShearParameter { dim, zero_cols, entries: BTreeMap::new() })
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= j || j >= self.dim {
            return Err(Error::domain(format!("({i}, {j}) is not strictly upper triangular")));
        }
        if j < self.zero_cols {
            return Err(Error::domain(format!(
                "column {j} lies in the zeroed block of U_{{{},{}}}",
                self.dim, self.zero_cols
            )));
        }
        self.entries.insert((i, j), value.rem_euclid(1.0));
        Ok(())
    }

    /// Build from values listed row-major over the free positions.
    pub fn from_row_major(dim: usize, zero_cols: usize, values: &[f64]) -> Result<Self> {
        let positions = Self::free_positions(dim, zero_cols);
        if values.len() != positions.len() {
            return Err(Error::Parse(format!(
                "expected {} shear entries, got {}",
                positions.len(),
                values.len()
            )));
        }
        let mut s = Self::zero(dim, zero_cols)?;
        for (&(i, j), &v) in positions.iter().zip(values) {
            s.set(i, j, v)?;
        }
        Ok(s)
    }

    /// Uniform sample on the fundamental torus of U_{d,l}.
    pub fn random<R: Rng>(dim: usize, zero_cols: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::zero(dim, zero_cols)?;
        for (i, j) in Self::free_positions(dim, zero_cols) {
            s.set(i, j, rng.gen::<f64>())?;
        }
        Ok(s)
    }

    /// Shear input format: "d l" then the nonzero upper-triangular entries
    /// row-major.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let d: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty shear file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension: {e}")))?;
        let l: usize = tokens
            .next()
            .ok_or_else(|| Error::Parse("missing zero-column count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad zero-column count: {e}")))?;
        let values: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry '{t}': {e}"))))
            .collect::<Result<_>>()?;
        Self::from_row_major(d, l, &values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn zero_cols(&self) -> usize {
        self.zero_cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// The unit upper-triangular matrix carrying the shear entries.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut u = DMatrix::identity(self.dim, self.dim);
        for (&(i, j), &v) in &self.entries {
            u[(i, j)] = v;
        }
        u
    }
}

/// The sheared basis u g.
pub fn apply_shear(u: &ShearParameter, g: &LatticeBasis) -> Result<LatticeBasis> {
    if u.dim() != g.dim() {
        return Err(Error::DimMismatch { expected: g.dim(), got: u.dim() });
    }
    LatticeBasis::new(u.to_matrix() * g.matrix())
}
