//! Generator matrices: the Vandermonde construction from a root set, numeric
//! validation of the lattice conditions, and scaled/dilated realizations.
//!
//! A valid generator matrix B is invertible, keeps |prod_j (Bm)_j| >= 1 for
//! every nonzero integer vector m (its lattice avoids the open hyperbolic
//! cross), and its lattice puts at most V+1 points into any axis-parallel box
//! of volume V. The algebraic-norm argument guarantees both properties for
//! Vandermonde matrices of the polynomial constructions; `validate` is the
//! finite operational check that catches implementation bugs.

use crate::error::{Error, Result};
use crate::polynomial::RootSet;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Which polynomial family produced the roots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    FrolovPoly,
    Chebyshev,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::FrolovPoly => "frolov-poly",
            Construction::Chebyshev => "chebyshev",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frolov-poly" => Ok(Construction::FrolovPoly),
            "chebyshev" => Ok(Construction::Chebyshev),
            other => Err(Error::BadCache(format!(
                "unknown construction '{other}' (expected frolov-poly or chebyshev)"
            ))),
        }
    }
}

/// Outcome of the finite validation sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Exhaustive search radius for the product condition.
    pub search_radius: i64,
    /// min over 0 < ||m||_inf <= R of |prod_j (Bm)_j|.
    pub min_product: f64,
    /// Number of random boxes tested for the point-count condition.
    pub box_trials: u32,
    /// max over trials of (lattice count - volume - 1); <= 0 when valid.
    pub max_excess: f64,
}

impl ValidationReport {
    /// Both conditions hold up to the documented float slack.
    pub fn is_valid(&self) -> bool {
        self.min_product >= 1.0 - 1e-9 && self.max_excess <= 0.0
    }
}

/// Validated generator matrix with provenance.
#[derive(Clone, Debug)]
pub struct FrolovMatrix {
    dim: usize,
    entries: DMatrix<f64>,
    inv_transpose: DMatrix<f64>,
    det_abs: f64,
    col_norm1: f64,
    construction: Option<Construction>,
    roots: Vec<f64>,
    validation: Option<ValidationReport>,
}

/// Invert with one or two Newton refinement passes so the round-trip residual
/// stays near machine precision even for the wider-spread root sets.
fn refined_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    let hadamard: f64 = (0..d)
        .map(|j| m.column(j).norm())
        .product();
    let lu = m.clone().lu();
    let det = lu.determinant();
    if det.abs() <= 1e-12 * hadamard.max(1e-300) {
        return Err(Error::SingularMatrix { det_abs: det.abs() });
    }
    let mut inv = lu
        .try_inverse()
        .ok_or(Error::SingularMatrix { det_abs: det.abs() })?;
    let identity = DMatrix::<f64>::identity(d, d);
    for _ in 0..2 {
        let residual = &identity - m * &inv;
        if residual.amax() < 1e-15 {
            break;
        }
        inv = &inv + &inv * residual;
    }
    Ok(inv)
}

impl FrolovMatrix {
    /// Vandermonde matrix with entries root_i^j for j = 0..d-1.
    pub fn build(roots: &RootSet) -> Result<Self> {
        let d = roots.dim();
        let mut entries = DMatrix::<f64>::zeros(d, d);
        for (i, &root) in roots.roots().iter().enumerate() {
            let mut power = 1.0;
            for j in 0..d {
                entries[(i, j)] = power;
                power *= root;
            }
        }
        let inv = refined_inverse(&entries)?;
        let det_abs = entries.clone().lu().determinant().abs();
        let col_norm1 = (0..d)
            .map(|j| entries.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        Ok(Self {
            dim: d,
            inv_transpose: inv.transpose(),
            entries,
            det_abs,
            col_norm1,
            construction: None,
            roots: roots.roots().to_vec(),
            validation: None,
        })
    }

    /// Build from one of the named constructions.
    pub fn from_construction(construction: Construction, dim: usize) -> Result<Self> {
        let roots = match construction {
            Construction::FrolovPoly => {
                crate::polynomial::real_roots(&crate::polynomial::frolov_poly(dim)?)?
            }
            Construction::Chebyshev => crate::polynomial::chebyshev_roots(dim)?,
        };
        let mut matrix = Self::build(&roots)?;
        matrix.construction = Some(construction);
        Ok(matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn col_norm1(&self) -> f64 {
        self.col_norm1
    }

    pub fn construction(&self) -> Option<Construction> {
        self.construction
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn validation(&self) -> Option<&ValidationReport> {
        self.validation.as_ref()
    }

    /// Image of the integer vector m under B.
    pub fn image(&self, m: &[i64]) -> Vec<f64> {
        let mv = DVector::from_iterator(self.dim, m.iter().map(|&v| v as f64));
        (&self.entries * mv).iter().copied().collect()
    }

    /// |prod_j (Bm)_j| for an integer vector m.
    pub fn lattice_product(&self, m: &[i64]) -> f64 {
        let mut product = 1.0;
        for i in 0..self.dim {
            let mut coord = 0.0;
            for j in 0..self.dim {
                coord += self.entries[(i, j)] * m[j] as f64;
            }
            product *= coord;
        }
        product.abs()
    }

    /// Finite check of both lattice conditions.
    ///
    /// The product condition is swept exhaustively over 0 < ||m||_inf <= radius.
    /// The box condition is spot-checked on `box_trials` random axis-parallel
    /// boxes with volumes log-uniform in [0.1, 10 * radius^d]; points exactly
    /// on a box face count as inside, with 1e-12 absolute slack so measure-zero
    /// boundary cases cannot flip the verdict.
    pub fn validate<R: Rng + ?Sized>(
        &mut self,
        radius: i64,
        box_trials: u32,
        rng: &mut R,
    ) -> ValidationReport {
        assert!(radius >= 1);
        let d = self.dim;
        let mut min_product = f64::INFINITY;
        let mut m = vec![-radius; d];
        'sweep: loop {
            if m.iter().any(|&v| v != 0) {
                let p = self.lattice_product(&m);
                if p < min_product {
                    min_product = p;
                }
            }
            let mut axis = d;
            while axis > 0 {
                m[axis - 1] += 1;
                if m[axis - 1] <= radius {
                    break;
                }
                m[axis - 1] = -radius;
                axis -= 1;
            }
            if axis == 0 {
                break 'sweep;
            }
        }

        let mut max_excess = f64::NEG_INFINITY;
        let vol_lo = 0.1f64;
        let vol_hi = 10.0 * (radius as f64).powi(d as i32);
        for _ in 0..box_trials {
            let volume = vol_lo * (vol_hi / vol_lo).powf(rng.random::<f64>());
            // random aspect ratios in [1/3, 3], renormalized to the volume
            let raw: Vec<f64> = (0..d)
                .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * 3f64.ln())
                .collect();
            let mean = raw.iter().sum::<f64>() / d as f64;
            let side = volume.powf(1.0 / d as f64);
            let edges: Vec<f64> = raw.iter().map(|g| side * (g - mean).exp()).collect();
            let center: Vec<f64> =
                (0..d).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * radius as f64).collect();
            let lo: Vec<f64> = center.iter().zip(&edges).map(|(c, e)| c - 0.5 * e).collect();
            let hi: Vec<f64> = center.iter().zip(&edges).map(|(c, e)| c + 0.5 * e).collect();
            let count = self.count_lattice_points_in_box(&lo, &hi);
            let true_volume: f64 = edges.iter().product();
            let excess = count as f64 - true_volume - 1.0;
            if excess > max_excess {
                max_excess = excess;
            }
        }

        let report = ValidationReport {
            search_radius: radius,
            min_product,
            box_trials,
            max_excess,
        };
        self.validation = Some(report);
        report
    }

    /// Exhaustive count of lattice points Bm inside the closed box [lo, hi],
    /// scanning the integer bounding box of the preimage.
    fn count_lattice_points_in_box(&self, lo: &[f64], hi: &[f64]) -> u64 {
        let d = self.dim;
        let inv = self.inv_transpose.transpose(); // B^{-1}
        let mut mlo = vec![0i64; d];
        let mut mhi = vec![0i64; d];
        for i in 0..d {
            let mut acc_lo = 0.0;
            let mut acc_hi = 0.0;
            for j in 0..d {
                let c = inv[(i, j)];
                if c >= 0.0 {
                    acc_lo += c * lo[j];
                    acc_hi += c * hi[j];
                } else {
                    acc_lo += c * hi[j];
                    acc_hi += c * lo[j];
                }
            }
            mlo[i] = acc_lo.floor() as i64 - 1;
            mhi[i] = acc_hi.ceil() as i64 + 1;
        }
        let mut count = 0u64;
        let mut m = mlo.clone();
        loop {
            let mut inside = true;
            for i in 0..d {
                let mut coord = 0.0;
                for j in 0..d {
                    coord += self.entries[(i, j)] * m[j] as f64;
                }
                if coord < lo[i] - 1e-12 || coord > hi[i] + 1e-12 {
                    inside = false;
                    break;
                }
            }
            if inside {
                count += 1;
            }
            let mut axis = d;
            while axis > 0 {
                m[axis - 1] += 1;
                if m[axis - 1] <= mhi[axis - 1] {
                    break;
                }
                m[axis - 1] = mlo[axis - 1];
                axis -= 1;
            }
            if axis == 0 {
                return count;
            }
        }
    }

    /// Scaled realization S = n^{1/d} diag(u) B.
    ///
    /// `n` may be any positive real; the dilation `u` must be positive
    /// componentwise (the randomized samplers keep it in [1, 2^{1/d}], while
    /// diagnostics may pass anything positive).
    pub fn scale(&self, n: f64, dilation: &[f64]) -> Result<ScaledMatrix> {
        let d = self.dim;
        if dilation.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: dilation.len(),
            });
        }
        if !(n > 0.0) || dilation.iter().any(|&u| !(u > 0.0)) {
            return Err(Error::NonPositiveScale);
        }
        let a = n.powf(1.0 / d as f64);
        let mut matrix = self.entries.clone();
        for i in 0..d {
            let factor = a * dilation[i];
            for j in 0..d {
                matrix[(i, j)] *= factor;
            }
        }
        // S^{-T} = a^{-1} diag(1/u) B^{-T}
        let mut inv_transpose = self.inv_transpose.clone();
        for i in 0..d {
            let factor = 1.0 / (a * dilation[i]);
            for j in 0..d {
                inv_transpose[(i, j)] *= factor;
            }
        }
        let det_abs = matrix.clone().lu().determinant().abs();
        let inv_transpose_rows: Vec<f64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| inv_transpose[(i, j)])
            .collect();
        let hyperbolic_floor = self.validation.and_then(|v| {
            if v.is_valid() {
                Some(n * dilation.iter().product::<f64>() * v.min_product.min(1.0))
            } else {
                None
            }
        });
        Ok(ScaledMatrix {
            dim: d,
            matrix,
            inv_transpose,
            inv_transpose_rows,
            det_abs,
            scale_n: n,
            dilation: dilation.to_vec(),
            hyperbolic_floor,
        })
    }

    /// Write the matrix (with its validation report) to the JSON cache format.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let validation = self.validation.ok_or_else(|| {
            Error::BadCache("matrix must be validated before caching".into())
        })?;
        let cache = MatrixCache {
            dimension: self.dim,
            construction: self
                .construction
                .map(|c| c.as_str().to_string())
                .unwrap_or_else(|| "custom".into()),
            roots: self.roots.iter().map(|&v| decimal17(v)).collect(),
            matrix: (0..self.dim)
                .map(|i| (0..self.dim).map(|j| decimal17(self.entries[(i, j)])).collect())
                .collect(),
            det_abs: decimal17(self.det_abs),
            col_norm1: decimal17(self.col_norm1),
            validation: ValidationCache {
                search_radius: validation.search_radius,
                min_product: decimal17(validation.min_product),
                box_trials: validation.box_trials,
                max_excess: decimal17(validation.max_excess),
            },
        };
        let text = serde_json::to_string_pretty(&cache)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Load a matrix from the JSON cache format.
    pub fn load_cache(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cache: MatrixCache = serde_json::from_str(&text)?;
        let d = cache.dimension;
        if cache.matrix.len() != d || cache.matrix.iter().any(|row| row.len() != d) {
            return Err(Error::BadCache("matrix shape does not match dimension".into()));
        }
        let mut entries = DMatrix::<f64>::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                entries[(i, j)] = parse_decimal(&cache.matrix[i][j])?;
            }
        }
        let roots = cache
            .roots
            .iter()
            .map(|s| parse_decimal(s))
            .collect::<Result<Vec<f64>>>()?;
        let inv = refined_inverse(&entries)?;
        let det_abs = entries.clone().lu().determinant().abs();
        let col_norm1 = (0..d)
            .map(|j| entries.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max);
        let construction = match cache.construction.as_str() {
            "custom" => None,
            s => Some(s.parse()?),
        };
        Ok(Self {
            dim: d,
            inv_transpose: inv.transpose(),
            entries,
            det_abs,
            col_norm1,
            construction,
            roots,
            validation: Some(ValidationReport {
                search_radius: cache.validation.search_radius,
                min_product: parse_decimal(&cache.validation.min_product)?,
                box_trials: cache.validation.box_trials,
                max_excess: parse_decimal(&cache.validation.max_excess)?,
            }),
        })
    }
}

/// Default exhaustive radius for validation: the sweep is O((2R+1)^d), so the
/// radius backs off in higher dimension.
pub fn default_validation_radius(dim: usize) -> i64 {
    if dim <= 3 {
        50
    } else {
        10
    }
}

/// S = n^{1/d} diag(u) B with its cached inverse transpose.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    dim: usize,
    matrix: DMatrix<f64>,
    inv_transpose: DMatrix<f64>,
    inv_transpose_rows: Vec<f64>,
    det_abs: f64,
    scale_n: f64,
    dilation: Vec<f64>,
    hyperbolic_floor: Option<f64>,
}

impl ScaledMatrix {
    /// Wrap an arbitrary invertible matrix as a rule realization (scale 1,
    /// unit dilation). Used for diagnostics and generic node-count checks;
    /// series tail bounds that need the lattice conditions stay unavailable.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        let d = entries.nrows();
        if d == 0 || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d.max(1),
                got: entries.ncols(),
            });
        }
        let inv = refined_inverse(&entries)?;
        let det_abs = entries.clone().lu().determinant().abs();
        let inv_transpose = inv.transpose();
        let inv_transpose_rows: Vec<f64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| inv_transpose[(i, j)])
            .collect();
        Ok(Self {
            dim: d,
            matrix: entries,
            inv_transpose,
            inv_transpose_rows,
            det_abs,
            scale_n: 1.0,
            dilation: vec![1.0; d],
            hyperbolic_floor: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inv_transpose(&self) -> &DMatrix<f64> {
        &self.inv_transpose
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    pub fn scale_n(&self) -> f64 {
        self.scale_n
    }

    pub fn dilation(&self) -> &[f64] {
        &self.dilation
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Lower bound on |prod_j (Sm)_j| over nonzero m, available when the base
    /// matrix was validated; used by series tail bounds.
    pub fn hyperbolic_floor(&self) -> Option<f64> {
        self.hyperbolic_floor
    }

    /// Node coordinates S^{-T}(m + v), written into `out`.
    #[inline]
    pub fn node(&self, m: &[i64], shift: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let row = &self.inv_transpose_rows[i * d..(i + 1) * d];
            let mut acc = 0.0;
            for j in 0..d {
                acc += row[j] * (m[j] as f64 + shift[j]);
            }
            out[i] = acc;
        }
    }

    /// Image Sm of an integer vector.
    pub fn image(&self, m: &[i64]) -> Vec<f64> {
        let mv = DVector::from_iterator(self.dim, m.iter().map(|&v| v as f64));
        (&self.matrix * mv).iter().copied().collect()
    }

    /// Flattened row-major S^{-T}, for hot loops.
    pub fn inv_transpose_rows(&self) -> &[f64] {
        &self.inv_transpose_rows
    }

    /// Max-norm of I - S * S^{-T}^T, the round-trip defect.
    pub fn round_trip_defect(&self) -> f64 {
        let identity = DMatrix::<f64>::identity(self.dim, self.dim);
        (&identity - &self.matrix * self.inv_transpose.transpose()).amax()
    }
}

#[derive(Serialize, Deserialize)]
struct ValidationCache {
    #[serde(rename = "R")]
    search_radius: i64,
    min_product: String,
    box_trials: u32,
    max_excess: String,
}

#[derive(Serialize, Deserialize)]
struct MatrixCache {
    dimension: usize,
    construction: String,
    roots: Vec<String>,
    matrix: Vec<Vec<String>>,
    det_abs: String,
    col_norm1: String,
    validation: ValidationCache,
}

/// 17 significant decimal digits: enough for a bit-faithful binary64 round trip.
fn decimal17(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_decimal(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::BadCache(format!("bad decimal '{s}': {e}")))
}
