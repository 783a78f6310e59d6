//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson).

/// Shape-preserving cubic interpolant through `(xs, ys)`; values outside the
/// sampled range are clamped to the end samples.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` must be strictly increasing with at least two points.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2, "need at least two samples");
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            if a * b <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // weighted harmonic mean (Fritsch–Butland form)
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[i] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        Self { xs, ys, slopes }
    }

    /// Interpolant on a uniform grid of spacing `h` starting at `x0`.
    pub fn uniform(x0: f64, h: f64, ys: Vec<f64>) -> Self {
        let xs = (0..ys.len()).map(|i| x0 + i as f64 * h).collect();
        Self::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    /// Derivative of the interpolant; zero outside the sampled range.
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let i = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[i] + d10 * self.slopes[i] + d01 * self.ys[i + 1] + d11 * self.slopes[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_samples_and_clamps() {
        let ip = MonotoneCubic::uniform(0.0, 1.0, vec![3.0, 2.0, 0.0, -1.0]);
        assert_eq!(ip.eval(0.0), 3.0);
        assert_eq!(ip.eval(2.0), 0.0);
        assert_eq!(ip.eval(-5.0), 3.0);
        assert_eq!(ip.eval(9.0), -1.0);
    }

    #[test]
    fn exact_for_lines() {
        let ip = MonotoneCubic::uniform(-1.0, 0.25, (0..9).map(|i| 2.0 * i as f64).collect());
        for k in 0..50 {
            let x = -1.0 + 2.0 * k as f64 / 50.0;
            assert!((ip.eval(x) - 8.0 * (x + 1.0)).abs() < 1e-12);
            assert!((ip.derivative(x) - 8.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn preserves_monotonicity(steps in prop::collection::vec(0.0f64..1.0, 3..30), x in 0.0f64..1.0) {
            let mut ys = vec![0.0];
            for s in &steps { let last = *ys.last().unwrap(); ys.push(last - s); }
            let n = ys.len();
            let ip = MonotoneCubic::uniform(0.0, 1.0, ys);
            let span = (n - 1) as f64;
            let a = x * span;
            let b = (a + 0.013).min(span);
            prop_assert!(ip.eval(b) <= ip.eval(a) + 1e-12);
            prop_assert!(ip.derivative(a) <= 1e-12);
        }
    }
}
