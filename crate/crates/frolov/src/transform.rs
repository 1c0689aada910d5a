//! The smooth change of variables that maps rules for compactly supported
//! integrands to rules for arbitrary integrands on the cube.
//!
//! psi is the normalized antiderivative of the C-infinity bump
//! h(x) = exp(1/((2x-1)^2 - 1)) on (0,1); it rises from 0 to 1 with every
//! derivative vanishing at the endpoints. There is no closed form, so point
//! values are served from per-panel Gauss-Legendre integration over a
//! precomputed prefix table. Queries on (1/2, 1] are answered by the
//! reflection 1 - psi(1 - x), which pins psi(1/2) = 1/2 exactly and makes
//! increments on the flat right tail mirror the left one.
//!
//! On the left half the partial-panel quadrature is a sum of terms that are
//! individually increasing in x (h is nonnegative and increasing there, and
//! the panel width factor grows), so the computed psi is monotone on any
//! grid that stays clear of the subnormal underflow region near the ends.

use crate::quadrature::GaussLegendre;

const PANELS_PER_HALF: usize = 32; // width 1/64 over [0, 1/2]
const POINTS_PER_PANEL: usize = 16;

/// The bump h(x) = exp(1/((2x-1)^2 - 1)) on (0,1), exactly 0 elsewhere.
///
/// Near the endpoints (2x-1)^2 - 1 can round to 0 from below; the sign guard
/// returns the exact limit 0 instead of overflowing through 1/0.
pub fn bump(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let s = 2.0 * x - 1.0;
    let t = s * s - 1.0;
    if t >= 0.0 {
        return 0.0;
    }
    (1.0 / t).exp()
}

/// Precomputed data serving psi, psi', and their tensor forms.
#[derive(Clone, Debug)]
pub struct PsiTable {
    gl: GaussLegendre,
    /// prefix[k] = integral of h over [0, k/64], k = 0..=32.
    prefix: Vec<f64>,
    /// Normalizer c_h = integral of h over [0,1] = 2 * prefix[32].
    normalizer: f64,
    /// Measured bound on |psi_computed - psi_exact| from panel refinement.
    accuracy_bound: f64,
}

impl Default for PsiTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PsiTable {
    pub fn new() -> Self {
        let gl = GaussLegendre::new(POINTS_PER_PANEL);
        let width = 0.5 / PANELS_PER_HALF as f64;
        let mut prefix = Vec::with_capacity(PANELS_PER_HALF + 1);
        prefix.push(0.0);
        for k in 0..PANELS_PER_HALF {
            let lo = k as f64 * width;
            let panel = gl.integrate(lo, lo + width, bump);
            prefix.push(prefix[k] + panel);
        }
        let normalizer = 2.0 * prefix[PANELS_PER_HALF];

        // Accuracy audit: compare each panel against its split-in-two
        // refinement; the prefix error is the accumulated discrepancy.
        let mut accumulated = 0.0;
        let mut worst_panel = 0.0f64;
        for k in 0..PANELS_PER_HALF {
            let lo = k as f64 * width;
            let whole = gl.integrate(lo, lo + width, bump);
            let split = gl.integrate(lo, lo + 0.5 * width, bump)
                + gl.integrate(lo + 0.5 * width, lo + width, bump);
            let diff = (whole - split).abs();
            accumulated += diff;
            worst_panel = worst_panel.max(diff);
        }
        let accuracy_bound = (accumulated + worst_panel) / normalizer + 4e-16;

        Self {
            gl,
            prefix,
            normalizer,
            accuracy_bound,
        }
    }

    /// c_h, the mass of the bump.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Guaranteed bound on the pointwise psi error.
    pub fn accuracy_bound(&self) -> f64 {
        self.accuracy_bound
    }

    /// Integral of h over [0, x] for x in [0, 1/2], via prefix + partial panel.
    fn mass_left(&self, x: f64) -> f64 {
        let width = 0.5 / PANELS_PER_HALF as f64;
        let k = ((x / width) as usize).min(PANELS_PER_HALF - 1);
        let lo = k as f64 * width;
        self.prefix[k] + self.gl.integrate(lo, x, bump)
    }

    /// The warp map on the unit interval, clamped to 0 below and 1 above.
    pub fn psi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        if x <= 0.5 {
            self.mass_left(x) / self.normalizer
        } else {
            1.0 - self.mass_left(1.0 - x) / self.normalizer
        }
    }

    /// psi'(x) = h(x) / c_h, zero outside (0,1).
    pub fn psi_prime(&self, x: f64) -> f64 {
        bump(x) / self.normalizer
    }

    /// Componentwise warp of a point in the cube.
    pub fn map(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = self.psi(v);
        }
    }

    /// Jacobian determinant prod_i psi'(x_i); zero on every cube face.
    pub fn jacobian_det(&self, x: &[f64]) -> f64 {
        let mut det = 1.0;
        for &v in x {
            det *= self.psi_prime(v);
            if det == 0.0 {
                return 0.0;
            }
        }
        det
    }
}
