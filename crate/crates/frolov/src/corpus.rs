//! Test functions with known exact integrals, smoothness tags, and (where a
//! closed form exists) analytic Fourier transforms with rigorous decay
//! envelopes.
//!
//! Every corpus entry is a tensor product of one-dimensional factors on the
//! unit cube, so exact integrals and transforms factor per axis. The decay
//! model attached to a transform is a proven envelope, not a fit: the series
//! tail bounds downstream lean on it.

use crate::error::{Error, Result};
use crate::lattice::SupportBox;
use crate::quadrature::CompositeRule;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Smoothness-class membership tags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SmoothnessTags {
    /// Member of the dominating-mixed-smoothness class of this order.
    pub mixed_order: Option<u32>,
    /// Member of the isotropic class of this order.
    pub isotropic_order: Option<u32>,
    /// Infinitely differentiable with compact support.
    pub infinitely_smooth: bool,
    /// Nonzero somewhere on the cube boundary (needs the transformed rule).
    pub boundary_nonvanishing: bool,
}

/// Proven envelope |Ff(y)| <= amplitude * prod_j (1 + |y_j|)^(-exponent).
#[derive(Clone, Copy, Debug)]
pub struct DecayModel {
    pub amplitude: f64,
    pub exponent: f64,
}

/// Identifies axis factors with a specialized fast evaluation path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisKind {
    /// 0.5 e^{-i pi y} sinc^2(pi y / 2); supports incremental row sampling.
    Tent,
    /// No specialized path.
    Generic,
}

type FtEval = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// Analytic Fourier transform evaluator plus its decay envelope.
#[derive(Clone)]
pub struct FourierTransform {
    eval: Arc<FtEval>,
    pub decay: DecayModel,
    pub axis_kind: AxisKind,
}

impl FourierTransform {
    pub fn value(&self, y: &[f64]) -> Complex64 {
        (self.eval)(y)
    }
}

impl fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierTransform")
            .field("decay", &self.decay)
            .field("axis_kind", &self.axis_kind)
            .finish()
    }
}

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A benchmark integrand: evaluator, support, exact integral, tags.
#[derive(Clone)]
pub struct TestFunction {
    pub name: String,
    pub dim: usize,
    eval: Arc<Eval>,
    pub support: SupportBox,
    pub exact_integral: f64,
    pub smoothness: SmoothnessTags,
    pub fourier: Option<FourierTransform>,
}

impl TestFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn fourier(&self) -> Result<&FourierTransform> {
        self.fourier
            .as_ref()
            .ok_or_else(|| Error::MissingFourierTransform(self.name.clone()))
    }

    /// Build an ad-hoc function (used by tests and the transformed-rule
    /// consistency checks).
    pub fn custom(
        name: &str,
        dim: usize,
        support: SupportBox,
        exact_integral: f64,
        smoothness: SmoothnessTags,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            eval: Arc::new(eval),
            support,
            exact_integral,
            smoothness,
            fourier: None,
        }
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("exact_integral", &self.exact_integral)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

#[inline]
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// One axis factor of the tent transform: 0.5 e^{-i pi y} sinc^2(pi y / 2).
#[inline]
pub fn tent_axis_transform(y: f64) -> Complex64 {
    let s = sinc(0.5 * PI * y);
    Complex64::from_polar(0.5 * s * s, -PI * y)
}

/// Tent product function prod_j (1 - |2 x_j - 1|)_+ with integral 2^{-d}.
///
/// The sharp mixed-smoothness order-1 witness; its transform decays exactly
/// quadratically per axis, amplitude 1.35 (the envelope max of
/// min(1/2, 2/(pi y)^2) * (1+|y|)^2 is ~1.339 at the crossover y ~ 0.64).
pub fn tent(dim: usize) -> TestFunction {
    TestFunction {
        name: "tent".into(),
        dim,
        eval: Arc::new(move |x: &[f64]| {
            let mut value = 1.0;
            for &v in x {
                let factor = 1.0 - (2.0 * v - 1.0).abs();
                if factor <= 0.0 {
                    return 0.0;
                }
                value *= factor;
            }
            value
        }),
        support: SupportBox::unit_cube(dim),
        exact_integral: 0.5f64.powi(dim as i32),
        smoothness: SmoothnessTags {
            mixed_order: Some(1),
            ..Default::default()
        },
        fourier: Some(FourierTransform {
            eval: Arc::new(move |y: &[f64]| {
                let mut value = Complex64::new(1.0, 0.0);
                for &v in y {
                    value *= tent_axis_transform(v);
                }
                value
            }),
            decay: DecayModel {
                amplitude: 1.35f64.powi(dim as i32),
                exponent: 2.0,
            },
            axis_kind: AxisKind::Tent,
        }),
    }
}

/// I_k(w) = integral over [0,1] of x^k e^{w x} dx for complex w.
///
/// Series for small |w| (the recurrence cancels there), forward recurrence
/// otherwise. The series loses ~e^{|w|} eps to cancellation and the
/// recurrence damps its own error once |w| exceeds k, so the crossover at 10
/// keeps both branches at ~1e-12 relative for every k that arises (k <= 2r).
fn exp_moment(k: usize, w: Complex64) -> Complex64 {
    if w.norm() < 10.0 {
        let mut term = Complex64::new(1.0, 0.0); // w^t / t!
        let mut sum = Complex64::new(0.0, 0.0);
        for t in 0..500 {
            let contribution = term / (k as f64 + t as f64 + 1.0);
            sum += contribution;
            if contribution.norm() < 1e-20 * sum.norm().max(1e-300) {
                break;
            }
            term = term * w / (t as f64 + 1.0);
        }
        sum
    } else {
        let ew = w.exp();
        let mut moment = (ew - 1.0) / w;
        for j in 1..=k {
            moment = (ew - j as f64 * moment) / w;
        }
        moment
    }
}

/// One axis of the poly-bump transform: integral of (x(1-x))^r e^{-2 pi i x y}.
fn poly_bump_axis_transform(r: u32, y: f64) -> Complex64 {
    let w = Complex64::new(0.0, -2.0 * PI * y);
    let mut value = Complex64::new(0.0, 0.0);
    let mut sign = 1.0;
    let mut binom = 1.0;
    for j in 0..=r {
        value += sign * binom * exp_moment((r + j) as usize, w);
        sign = -sign;
        binom = binom * (r - j) as f64 / (j + 1) as f64;
    }
    value
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).map(|v| v as f64).product()
}

/// Decay amplitude for one poly-bump axis: |F| <= min(M0, M/(2 pi |y|)^{r+1})
/// with M0 the axis integral and M = |f^{(r)}(0)| + |f^{(r)}(1)| + sum of
/// |coefficients of f^{(r+1)}| (integration by parts r+1 times; the last step
/// picks up the boundary values of f^{(r)}).
fn poly_bump_axis_amplitude(r: u32) -> f64 {
    let m0 = factorial(r).powi(2) / factorial(2 * r + 1);
    // coefficients of (x(1-x))^r: c_{r+j} = (-1)^j binom(r, j)
    let mut m = 2.0 * factorial(r); // |f^{(r)}(0)| + |f^{(r)}(1)|
    for j in 1..=r {
        let mut binom = 1.0;
        for i in 0..j {
            binom = binom * (r - i) as f64 / (i + 1) as f64;
        }
        // |d^{r+1}/dx^{r+1} x^{r+j}| coefficient: (r+j)!/(j-1)!
        let mut fall = 1.0;
        for v in j..=(r + j) {
            fall *= v as f64;
        }
        m += binom * fall;
    }
    let rho = (r + 1) as f64;
    let crossover = (m / m0).powf(1.0 / rho) / (2.0 * PI);
    m0 * (1.0 + crossover).powf(rho)
}

/// Polynomial bump prod_j (x_j (1 - x_j))^r with integral beta(r+1, r+1)^d.
pub fn poly_bump(dim: usize, r: u32) -> Result<TestFunction> {
    if r < 1 {
        return Err(Error::DimensionRange { got: 0, max: 0 });
    }
    let beta = factorial(r).powi(2) / factorial(2 * r + 1);
    let amplitude = poly_bump_axis_amplitude(r).powi(dim as i32);
    Ok(TestFunction {
        name: format!("poly-bump:r={r}"),
        dim,
        eval: Arc::new(move |x: &[f64]| {
            let mut value = 1.0;
            for &v in x {
                if !(0.0..=1.0).contains(&v) {
                    return 0.0;
                }
                value *= (v * (1.0 - v)).powi(r as i32);
            }
            value
        }),
        support: SupportBox::unit_cube(dim),
        exact_integral: beta.powi(dim as i32),
        smoothness: SmoothnessTags {
            mixed_order: Some(r),
            ..Default::default()
        },
        fourier: Some(FourierTransform {
            eval: Arc::new(move |y: &[f64]| {
                let mut value = Complex64::new(1.0, 0.0);
                for &v in y {
                    value *= poly_bump_axis_transform(r, v);
                }
                value
            }),
            decay: DecayModel {
                amplitude,
                exponent: (r + 1) as f64,
            },
            axis_kind: AxisKind::Generic,
        }),
    })
}

/// C-infinity bump prod_j h(x_j) with integral c_h^d; no closed-form
/// transform is attached.
pub fn smooth_bump(dim: usize) -> TestFunction {
    // c_h by the same composite quadrature the transform table uses; the
    // oracle suite cross-checks it independently.
    let c_h = CompositeRule::new(64, 16).integrate_1d(0.0, 1.0, crate::transform::bump);
    TestFunction {
        name: "smooth-bump".into(),
        dim,
        eval: Arc::new(move |x: &[f64]| {
            let mut value = 1.0;
            for &v in x {
                let factor = crate::transform::bump(v);
                if factor == 0.0 {
                    return 0.0;
                }
                value *= factor;
            }
            value
        }),
        support: SupportBox::unit_cube(dim),
        exact_integral: c_h.powi(dim as i32),
        smoothness: SmoothnessTags {
            infinitely_smooth: true,
            ..Default::default()
        },
        fourier: None,
    }
}

/// Boundary-nonvanishing product prod_j (1 + x_j) with integral (3/2)^d;
/// only meaningful under the transformed rule.
pub fn boundary_poly(dim: usize) -> TestFunction {
    TestFunction {
        name: "boundary-poly".into(),
        dim,
        eval: Arc::new(move |x: &[f64]| {
            let mut value = 1.0;
            for &v in x {
                if !(0.0..=1.0).contains(&v) {
                    return 0.0;
                }
                value *= 1.0 + v;
            }
            value
        }),
        support: SupportBox::unit_cube(dim),
        exact_integral: 1.5f64.powi(dim as i32),
        smoothness: SmoothnessTags {
            infinitely_smooth: true,
            boundary_nonvanishing: true,
            ..Default::default()
        },
        fourier: None,
    }
}

/// Resolve a CLI-style name: `tent`, `poly-bump:r=K`, `smooth-bump`,
/// `boundary-poly`.
pub fn by_name(name: &str, dim: usize) -> Result<TestFunction> {
    match name {
        "tent" => Ok(tent(dim)),
        "smooth-bump" => Ok(smooth_bump(dim)),
        "boundary-poly" => Ok(boundary_poly(dim)),
        other => {
            if let Some(rest) = other.strip_prefix("poly-bump:r=") {
                let r: u32 = rest
                    .parse()
                    .map_err(|_| Error::UnknownFunction(other.into()))?;
                poly_bump(dim, r)
            } else if other == "poly-bump" {
                poly_bump(dim, 1)
            } else {
                Err(Error::UnknownFunction(other.into()))
            }
        }
    }
}
