//! Exact enumeration of the lattice nodes S^{-T}(m + v) inside a support box,
//! plus the closed-form bound on how many there can be.
//!
//! The candidate set is the integer bounding box of S^T box - v, computed by
//! interval arithmetic over the matrix columns and widened by one unit in
//! each direction so floating-point rounding can never lose a node.
//! Candidates are walked in lexicographic order of m and filtered by exact
//! membership, so the output order is deterministic.

use crate::error::{Error, Result};
use crate::matrix::ScaledMatrix;

/// Default cap on the candidate count; exceeding it signals an unintentionally
/// huge request rather than a legitimate study.
pub const DEFAULT_CANDIDATE_CAP: u128 = 1_000_000_000;

/// Closed axis-parallel box, nonempty by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SupportBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::EmptyBox);
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l <= h) {
                return Err(Error::EmptyBox);
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn unit_cube(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Longest edge, the `l` of the node-count bound.
    pub fn max_edge(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0f64, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }
}

/// Enumerated nodes: lattice indices m and coordinates x, flat row-major, with
/// the shared quadrature weight 1/|det S|.
#[derive(Clone, Debug)]
pub struct NodeSet {
    dim: usize,
    indices: Vec<i64>,
    coords: Vec<f64>,
    weight: f64,
}

impl NodeSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.indices.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Shared weight 1/|det S|.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn index(&self, i: usize) -> &[i64] {
        &self.indices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &[f64])> {
        (0..self.len()).map(move |i| (self.index(i), self.coord(i)))
    }
}

/// Integer candidate ranges: bounding box of S^T box - v, widened outward by
/// one unit per direction.
fn candidate_ranges(
    s: &ScaledMatrix,
    shift: &[f64],
    support: &SupportBox,
) -> Result<(Vec<i64>, Vec<i64>, u128)> {
    let d = s.dim();
    if shift.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: shift.len(),
        });
    }
    if support.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: support.dim(),
        });
    }
    let mut lo = vec![0i64; d];
    let mut hi = vec![0i64; d];
    let mut count: u128 = 1;
    for i in 0..d {
        // (S^T x)_i = sum_j S[j][i] x_j over x in the box
        let mut acc_lo = 0.0;
        let mut acc_hi = 0.0;
        for j in 0..d {
            let c = s.entry(j, i);
            if c >= 0.0 {
                acc_lo += c * support.lo()[j];
                acc_hi += c * support.hi()[j];
            } else {
                acc_lo += c * support.hi()[j];
                acc_hi += c * support.lo()[j];
            }
        }
        lo[i] = (acc_lo - shift[i]).floor() as i64 - 1;
        hi[i] = (acc_hi - shift[i]).ceil() as i64 + 1;
        count = count.saturating_mul((hi[i] - lo[i] + 1) as u128);
    }
    Ok((lo, hi, count))
}

/// Stream every node S^{-T}(m+v) inside the support box, in lexicographic
/// order of m. Returns the node count.
pub fn for_each_node<F>(
    s: &ScaledMatrix,
    shift: &[f64],
    support: &SupportBox,
    cap: u128,
    mut visit: F,
) -> Result<u64>
where
    F: FnMut(&[i64], &[f64]),
{
    let d = s.dim();
    let (mlo, mhi, candidates) = candidate_ranges(s, shift, support)?;
    if candidates > cap {
        return Err(Error::CandidateCap { candidates, cap });
    }

    // Partial prefews of S^{-T}(m+v) per axis let the innermost axis advance
    // with d additions per candidate; accepted nodes are recomputed by the
    // full matvec so boundary decisions do not depend on accumulated drift.
    let rows = s.inv_transpose_rows();
    let mut m = mlo.clone();
    let mut prefix = vec![0.0; (d + 1) * d];
    let rebuild = |prefix: &mut Vec<f64>, m: &[i64], from_axis: usize| {
        for axis in from_axis..d {
            let (head, tail) = prefix.split_at_mut((axis + 1) * d);
            let prev = &head[axis * d..(axis + 1) * d];
            let next = &mut tail[..d];
            let t = m[axis] as f64 + shift[axis];
            for i in 0..d {
                next[i] = prev[i] + rows[i * d + axis] * t;
            }
        }
    };
    rebuild(&mut prefix, &m, 0);

    let mut exact = vec![0.0; d];
    let mut count = 0u64;
    loop {
        // fast filter with slack, then exact decision
        let x = &prefix[d * d..(d + 1) * d];
        let mut plausible = true;
        for i in 0..d {
            if x[i] < support.lo()[i] - 1e-9 || x[i] > support.hi()[i] + 1e-9 {
                plausible = false;
                break;
            }
        }
        if plausible {
            s.node(&m, shift, &mut exact);
            if support.contains(&exact) {
                visit(&m, &exact);
                count += 1;
            }
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
            return Ok(count);
        }
        rebuild(&mut prefix, &m, axis - 1);
    }
}

/// Materialize the node set (the streaming walk plus storage).
pub fn enumerate(
    s: &ScaledMatrix,
    shift: &[f64],
    support: &SupportBox,
    cap: u128,
) -> Result<NodeSet> {
    let d = s.dim();
    let mut indices = Vec::new();
    let mut coords = Vec::new();
    for_each_node(s, shift, support, cap, |m, x| {
        indices.extend_from_slice(m);
        coords.extend_from_slice(x);
    })?;
    Ok(NodeSet {
        dim: d,
        indices,
        coords,
        weight: 1.0 / s.det_abs(),
    })
}

/// Upper bound ceil((l * norm1 + 1)^d * a^d) on the node count of the rule
/// scaled by a >= 1, for supports inside a cube of edge l.
pub fn node_bound(edge: f64, norm1: f64, scale: f64, dim: usize) -> u128 {
    assert!(edge >= 0.0 && scale >= 1.0 && dim >= 1);
    let value = (edge * norm1 + 1.0).powi(dim as i32) * scale.powi(dim as i32);
    if value >= u128::MAX as f64 {
        u128::MAX
    } else {
        value.ceil() as u128
    }
}
