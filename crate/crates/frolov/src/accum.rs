//! Compensated (Neumaier) accumulation.
//!
//! Quadrature sums and lattice series add up to millions of terms; the
//! compensated accumulator keeps the summation error near one ulp of the
//! result independent of the term count, so rounding stays far below the
//! truncation errors under study.

/// Neumaier variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated accumulator for complex terms (independent real/imag lanes).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexAccumulator {
    pub re: Accumulator,
    pub im: Accumulator,
}

impl ComplexAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, re: f64, im: f64) {
        self.re.add(re);
        self.im.add(im);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        let mut acc = Accumulator::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn many_small_terms() {
        let mut acc = Accumulator::new();
        let n = 1_000_000;
        for _ in 0..n {
            acc.add(0.1);
        }
        let err = (acc.value() - n as f64 * 0.1).abs();
        assert!(err < 1e-8, "compensated error {err}");
    }
}
