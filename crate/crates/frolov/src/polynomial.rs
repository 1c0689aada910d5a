//! Integer polynomials whose roots generate the lattice matrices, and real
//! root isolation for them.
//!
//! Two constructions are supported: the shifted factorial polynomial
//! (x-1)(x-3)...(x-2d+1) - 1 for any dimension, and 2*T_d(x/2) built from the
//! Chebyshev polynomial when d is a power of two. Coefficients are expanded in
//! exact integer arithmetic; floating point enters only during root
//! refinement.

use crate::error::{Error, Result};

/// Largest supported dimension. The expanded coefficients of the shifted
/// factorial polynomial stay below 2^53 up to d = 10, so they convert to f64
/// without rounding; larger d is rejected.
pub const MAX_DIMENSION: usize = 10;

/// Monic polynomial with exact integer coefficients, ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<i128>,
}

impl IntPolynomial {
    pub fn from_coeffs(coeffs: Vec<i128>) -> Self {
        assert!(
            matches!(coeffs.last(), Some(1)),
            "polynomial must be monic with ascending coefficients"
        );
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    /// Exact Horner evaluation; None on overflow.
    pub fn eval_exact(&self, x: i128) -> Option<i128> {
        let mut value: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            value = value.checked_mul(x)?.checked_add(c)?;
        }
        Some(value)
    }

    /// Horner evaluation in f64.
    pub fn eval(&self, x: f64) -> f64 {
        let mut value = 0.0;
        for &c in self.coeffs.iter().rev() {
            value = value * x + c as f64;
        }
        value
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut derivative = 0.0;
        for &c in self.coeffs.iter().rev() {
            derivative = derivative * x + value;
            value = value * x + c as f64;
        }
        (value, derivative)
    }
}

/// Distinct real roots, strictly increasing, with the worst residual |p(root)|.
#[derive(Clone, Debug)]
pub struct RootSet {
    roots: Vec<f64>,
    residual_bound: f64,
}

impl RootSet {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn dim(&self) -> usize {
        self.roots.len()
    }

    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    fn validate(roots: Vec<f64>, residual: f64) -> Result<Self> {
        let d = roots.len();
        for pair in roots.windows(2) {
            if pair[1] - pair[0] <= 1e-9 {
                return Err(Error::RootIsolation {
                    found: d - 1,
                    expected: d,
                });
            }
        }
        let max_abs = roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let bound = 1e-12 * (1.0 + max_abs).powi(d as i32);
        if residual > bound {
            return Err(Error::RootResidual {
                residual,
                bound,
            });
        }
        Ok(Self {
            roots,
            residual_bound: residual,
        })
    }

    /// Build from externally computed roots, measuring residuals against `p`.
    pub fn from_roots(p: &IntPolynomial, mut roots: Vec<f64>) -> Result<Self> {
        roots.sort_by(|a, b| a.total_cmp(b));
        let residual = roots.iter().fold(0.0f64, |m, &r| m.max(p.eval(r).abs()));
        Self::validate(roots, residual)
    }
}

/// The shifted factorial construction: (x-1)(x-3)...(x-2d+1) - 1.
pub fn frolov_poly(d: usize) -> Result<IntPolynomial> {
    if d < 1 || d > MAX_DIMENSION {
        return Err(Error::DimensionRange {
            got: d,
            max: MAX_DIMENSION,
        });
    }
    let mut coeffs: Vec<i128> = vec![1];
    for k in 1..=d {
        let root = 2 * k as i128 - 1;
        // multiply by (x - root)
        let mut next = vec![0i128; coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i + 1] = next[i + 1]
                .checked_add(c)
                .ok_or(Error::CoefficientOverflow(d))?;
            next[i] = next[i]
                .checked_sub(c.checked_mul(root).ok_or(Error::CoefficientOverflow(d))?)
                .ok_or(Error::CoefficientOverflow(d))?;
        }
        coeffs = next;
    }
    coeffs[0] = coeffs[0].checked_sub(1).ok_or(Error::CoefficientOverflow(d))?;
    Ok(IntPolynomial::from_coeffs(coeffs))
}

/// 2*T_d(x/2) as a monic integer polynomial (d a power of two), via the
/// recurrence q_0 = 2, q_1 = x, q_k = x q_{k-1} - q_{k-2}.
pub fn chebyshev_poly(d: usize) -> Result<IntPolynomial> {
    if d < 1 || d > MAX_DIMENSION {
        return Err(Error::DimensionRange {
            got: d,
            max: MAX_DIMENSION,
        });
    }
    if !d.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(d));
    }
    let mut prev: Vec<i128> = vec![2]; // q_0
    let mut cur: Vec<i128> = vec![0, 1]; // q_1 = x
    if d == 1 {
        return Ok(IntPolynomial::from_coeffs(cur));
    }
    for _ in 2..=d {
        let mut next = vec![0i128; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    Ok(IntPolynomial::from_coeffs(cur))
}

/// Closed-form roots 2 cos((2j-1) pi / (2d)) of 2*T_d(x/2), ascending.
pub fn chebyshev_roots(d: usize) -> Result<RootSet> {
    let p = chebyshev_poly(d)?;
    let roots: Vec<f64> = (1..=d)
        .map(|j| 2.0 * ((2 * j - 1) as f64 * std::f64::consts::PI / (2 * d) as f64).cos())
        .collect();
    RootSet::from_roots(&p, roots)
}

/// Isolate and refine all real roots of `p`.
///
/// Sign-change bracketing on [-2d, 2d] with step 1/4 (the shifted factorial
/// roots are perturbations of the odd integers 1..2d-1; the Chebyshev roots
/// lie in [-2, 2]), bisection to width 1e-8, then Newton polishing.
pub fn real_roots(p: &IntPolynomial) -> Result<RootSet> {
    let d = p.degree();
    if d == 0 {
        return Err(Error::RootIsolation {
            found: 0,
            expected: 0,
        });
    }
    let span = 2.0 * d as f64;
    let steps = (16 * d) as i64; // step 1/4 over [-2d, 2d]
    let grid = |i: i64| -span + 0.25 * i as f64;

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    let mut exact: Vec<f64> = Vec::new();
    let mut prev_x = grid(0);
    let mut prev_v = p.eval(prev_x);
    if prev_v == 0.0 {
        exact.push(prev_x);
    }
    for i in 1..=2 * steps {
        let x = grid(i);
        let v = p.eval(x);
        if v == 0.0 {
            exact.push(x);
        } else if prev_v != 0.0 && (prev_v < 0.0) != (v < 0.0) {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }
    let found = brackets.len() + exact.len();
    if found != d {
        return Err(Error::RootIsolation { found, expected: d });
    }

    let mut roots = exact;
    for (mut lo, mut hi) in brackets {
        let mut flo = p.eval(lo);
        // bisect to width 1e-8
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            let fmid = p.eval(mid);
            if fmid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (flo < 0.0) == (fmid < 0.0) {
                lo = mid;
                flo = fmid;
            } else {
                hi = mid;
            }
        }
        // Newton polish, guarded to the bracket
        let mut x = 0.5 * (lo + hi);
        for _ in 0..40 {
            let (v, dv) = p.eval_with_derivative(x);
            if dv == 0.0 {
                break;
            }
            let step = v / dv;
            let next = x - step;
            if !(lo - 0.25..=hi + 0.25).contains(&next) {
                break;
            }
            x = next;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        roots.push(x);
    }
    RootSet::from_roots(p, roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frolov_poly_d1_is_x_minus_two() {
        let p = frolov_poly(1).unwrap();
        assert_eq!(p.coeffs(), &[-2, 1]);
    }

    #[test]
    fn frolov_poly_d2_expansion() {
        let p = frolov_poly(2).unwrap();
        assert_eq!(p.coeffs(), &[2, -4, 1]);
    }

    #[test]
    fn frolov_poly_monic_all_dims() {
        for d in 1..=MAX_DIMENSION {
            let p = frolov_poly(d).unwrap();
            assert_eq!(p.degree(), d);
            assert_eq!(*p.coeffs().last().unwrap(), 1);
        }
    }

    #[test]
    fn frolov_poly_is_minus_one_at_odd_integers() {
        for d in 1..=MAX_DIMENSION {
            let p = frolov_poly(d).unwrap();
            for k in 1..=d {
                let x = 2 * k as i128 - 1;
                assert_eq!(p.eval_exact(x), Some(-1), "d={d}, x={x}");
            }
        }
    }

    #[test]
    fn frolov_poly_rejects_out_of_range() {
        assert!(frolov_poly(0).is_err());
        assert!(frolov_poly(MAX_DIMENSION + 1).is_err());
    }

    #[test]
    fn chebyshev_roots_d2() {
        let rs = chebyshev_roots(2).unwrap();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((rs.roots()[0] + sqrt2).abs() < 1e-14);
        assert!((rs.roots()[1] - sqrt2).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_roots_d1_is_zero() {
        let rs = chebyshev_roots(1).unwrap();
        assert_eq!(rs.roots().len(), 1);
        assert!(rs.roots()[0].abs() < 1e-15);
    }

    #[test]
    fn chebyshev_roots_d4_symmetric() {
        let rs = chebyshev_roots(4).unwrap();
        let r = rs.roots();
        assert_eq!(r.len(), 4);
        for i in 0..4 {
            assert!((r[i] + r[3 - i]).abs() < 1e-14, "not symmetric about 0");
        }
    }

    #[test]
    fn chebyshev_rejects_non_power_of_two() {
        assert!(matches!(chebyshev_roots(3), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(chebyshev_roots(6), Err(Error::NotPowerOfTwo(6))));
    }

    #[test]
    fn real_roots_quadratic() {
        let p = IntPolynomial::from_coeffs(vec![2, -4, 1]); // x^2 - 4x + 2
        let rs = real_roots(&p).unwrap();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((rs.roots()[0] - (2.0 - sqrt2)).abs() < 1e-12);
        assert!((rs.roots()[1] - (2.0 + sqrt2)).abs() < 1e-12);
    }

    #[test]
    fn real_roots_linear_exact_gridpoint() {
        let p = IntPolynomial::from_coeffs(vec![-2, 1]); // x - 2
        let rs = real_roots(&p).unwrap();
        assert_eq!(rs.roots(), &[2.0]);
    }

    #[test]
    fn real_roots_d3_near_odd_integers() {
        let p = frolov_poly(3).unwrap();
        let rs = real_roots(&p).unwrap();
        assert_eq!(rs.roots().len(), 3);
        for (root, odd) in rs.roots().iter().zip([1.0, 3.0, 5.0]) {
            assert!((root - odd).abs() < 1.0, "root {root} too far from {odd}");
        }
    }

    /// Independent bisection oracle: scan at step 1e-3 and refine by plain
    /// interval halving, no Newton, no shared code path.
    fn bisection_oracle(p: &IntPolynomial, lo: f64, hi: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        let steps = ((hi - lo) / 1e-3) as usize;
        let mut x0 = lo;
        let mut f0 = p.eval(x0);
        for i in 1..=steps {
            let x1 = lo + (hi - lo) * i as f64 / steps as f64;
            let f1 = p.eval(x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if (f0 < 0.0) != (f1 < 0.0) {
                let (mut a, mut b, mut fa) = (x0, x1, f0);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let fm = p.eval(m);
                    if (fa < 0.0) == (fm < 0.0) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn roots_match_bisection_oracle() {
        for d in [2usize, 3, 5, 8] {
            let p = frolov_poly(d).unwrap();
            let got = real_roots(&p).unwrap();
            let oracle = bisection_oracle(&p, -2.0 * d as f64, 2.0 * d as f64);
            assert_eq!(oracle.len(), d, "oracle disagrees on root count at d={d}");
            for (a, b) in got.roots().iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9, "d={d}: {a} vs oracle {b}");
            }
        }
    }

    #[test]
    fn residuals_and_separation_up_to_max_dim() {
        for d in 1..=MAX_DIMENSION {
            let p = frolov_poly(d).unwrap();
            let rs = real_roots(&p).unwrap();
            assert_eq!(rs.roots().len(), d);
            let max_abs = rs.roots().iter().fold(0.0f64, |m, r| m.max(r.abs()));
            let bound = 1e-12 * (1.0 + max_abs).powi(d as i32);
            assert!(rs.residual_bound() <= bound);
            for w in rs.roots().windows(2) {
                assert!(w[1] - w[0] > 1e-9);
            }
        }
    }

    #[test]
    fn chebyshev_poly_roots_recoverable_by_isolation() {
        // the isolation path also works for the Chebyshev construction
        for d in [2usize, 4, 8] {
            let p = chebyshev_poly(d).unwrap();
            let via_isolation = real_roots(&p).unwrap();
            let closed_form = chebyshev_roots(d).unwrap();
            for (a, b) in via_isolation.roots().iter().zip(closed_form.roots()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
