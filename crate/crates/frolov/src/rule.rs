//! The quadrature engine: the basic shifted lattice rule, the deterministic
//! rule, the randomly dilated and dilated+shifted unbiased rules, and their
//! transformed counterparts.
//!
//! Randomness contract: all sampling uses ChaCha8, a counter-based 64-bit
//! generator. `trial_rng(master_seed, t)` returns stream `t` of the
//! master-seeded generator, so trial-level results are reproducible
//! independent of execution order. In dilated+shifted mode the dilation is
//! drawn before the shift.

use crate::corpus::TestFunction;
use crate::error::{Error, Result};
use crate::lattice::{self, SupportBox, DEFAULT_CANDIDATE_CAP};
use crate::matrix::FrolovMatrix;
use crate::transform::PsiTable;
use crate::accum::Accumulator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One fully determined rule realization: scale, dilation, shift, transform.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n: f64,
    pub dilation: Vec<f64>,
    pub shift: Vec<f64>,
    pub transformed: bool,
}

impl QuadratureSpec {
    /// The deterministic special case: unit dilation, zero shift.
    pub fn deterministic(dim: usize, n: f64) -> Self {
        Self {
            n,
            dilation: vec![1.0; dim],
            shift: vec![0.0; dim],
            transformed: false,
        }
    }
}

/// A computed estimate together with the realized spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub node_count: u64,
    pub spec: QuadratureSpec,
}

/// Randomization mode of `randomized_estimate`.
#[derive(Clone, Debug)]
pub enum RandomizedMode {
    /// Random dilation with a caller-fixed shift (zero recovers the
    /// deterministic rule's node layout under dilation).
    DilationOnly { shift: Vec<f64> },
    /// Independent random dilation and random shift; unbiased on L^1.
    DilationShift,
}

/// Derive the reproducible generator for trial `t`: stream `t` of the
/// master-seeded ChaCha8 state.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// d independent coordinates, each uniform on [1, 2^{1/d}].
pub fn sample_dilation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let cap = 2f64.powf(1.0 / dim as f64);
    (0..dim).map(|_| 1.0 + rng.random::<f64>() * (cap - 1.0)).collect()
}

/// d independent coordinates, each uniform on [0, 1).
pub fn sample_shift<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

fn check_dims(matrix: &FrolovMatrix, spec: &QuadratureSpec, f: &TestFunction) -> Result<()> {
    let d = matrix.dim();
    if f.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim });
    }
    if spec.dilation.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: spec.dilation.len() });
    }
    if spec.shift.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: spec.shift.len() });
    }
    Ok(())
}

/// The basic rule: (1/|det S|) sum over nodes in supp f of f(node), with
/// S = n^{1/d} diag(u) B. Summation runs in lexicographic node order with
/// compensated accumulation.
pub fn q_value(matrix: &FrolovMatrix, spec: &QuadratureSpec, f: &TestFunction) -> Result<EstimateResult> {
    check_dims(matrix, spec, f)?;
    if f.smoothness.boundary_nonvanishing {
        return Err(Error::BoundaryFunction(f.name.clone()));
    }
    let s = matrix.scale(spec.n, &spec.dilation)?;
    let mut acc = Accumulator::new();
    let count = lattice::for_each_node(&s, &spec.shift, &f.support, DEFAULT_CANDIDATE_CAP, |_, x| {
        acc.add(f.value(x));
    })?;
    Ok(EstimateResult {
        value: acc.value() / s.det_abs(),
        node_count: count,
        spec: spec.clone(),
    })
}

/// The transformed rule: nodes are enumerated in the unit cube, mapped through
/// the warp, and weighted by its Jacobian; boundary nodes get weight zero.
pub fn q_transformed(
    matrix: &FrolovMatrix,
    spec: &QuadratureSpec,
    psi: &PsiTable,
    f: &TestFunction,
) -> Result<EstimateResult> {
    check_dims(matrix, spec, f)?;
    let d = matrix.dim();
    let s = matrix.scale(spec.n, &spec.dilation)?;
    let cube = SupportBox::unit_cube(d);
    let mut acc = Accumulator::new();
    let mut warped = vec![0.0; d];
    let count = lattice::for_each_node(&s, &spec.shift, &cube, DEFAULT_CANDIDATE_CAP, |_, x| {
        let jacobian = psi.jacobian_det(x);
        if jacobian != 0.0 {
            psi.map(x, &mut warped);
            acc.add(f.value(&warped) * jacobian);
        }
    })?;
    Ok(EstimateResult {
        value: acc.value() / s.det_abs(),
        node_count: count,
        spec: spec.clone(),
    })
}

/// Dispatch on the realization's `transformed` flag.
pub fn estimate(
    matrix: &FrolovMatrix,
    spec: &QuadratureSpec,
    psi: &PsiTable,
    f: &TestFunction,
) -> Result<EstimateResult> {
    if spec.transformed {
        q_transformed(matrix, spec, psi, f)
    } else {
        q_value(matrix, spec, f)
    }
}

/// The deterministic rule: unit dilation, zero shift.
pub fn frolov_deterministic(matrix: &FrolovMatrix, n: f64, f: &TestFunction) -> Result<EstimateResult> {
    q_value(matrix, &QuadratureSpec::deterministic(matrix.dim(), n), f)
}

/// Sample the randomization, then evaluate; realized parameters are recorded
/// in the result.
pub fn randomized_estimate<R: Rng + ?Sized>(
    matrix: &FrolovMatrix,
    n: f64,
    f: &TestFunction,
    rng: &mut R,
    mode: &RandomizedMode,
    transformed: bool,
    psi: &PsiTable,
) -> Result<EstimateResult> {
    let d = matrix.dim();
    let dilation = sample_dilation(d, rng);
    let shift = match mode {
        RandomizedMode::DilationOnly { shift } => shift.clone(),
        RandomizedMode::DilationShift => sample_shift(d, rng),
    };
    let spec = QuadratureSpec { n, dilation, shift, transformed };
    estimate(matrix, &spec, psi, f)
}
