//! Small statistics helpers shared by the fitting code.

/// Inverse-variance weighted mean and its standard error.
///
/// Entries with zero standard error are exact: if any exist, the result is
/// their plain mean with zero error and the noisy entries are ignored.
pub fn weighted_mean(values: &[f64], stderrs: &[f64]) -> (f64, f64) {
    assert_eq!(values.len(), stderrs.len());
    assert!(!values.is_empty(), "weighted mean of nothing");
    let exact: Vec<f64> = values
        .iter()
        .zip(stderrs)
        .filter(|(_, s)| **s == 0.0)
        .map(|(v, _)| *v)
        .collect();
    if !exact.is_empty() {
        return (exact.iter().sum::<f64>() / exact.len() as f64, 0.0);
    }
    let mut sw = 0.0;
    let mut swx = 0.0;
    for (v, s) in values.iter().zip(stderrs) {
        let w = 1.0 / (s * s);
        sw += w;
        swx += w * v;
    }
    (swx / sw, (1.0 / sw).sqrt())
}

/// Result of a weighted straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope under the supplied weights.
    pub slope_stderr: f64,
}

/// Weighted least squares line. Needs at least two distinct abscissae.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    assert!(x.len() == y.len() && y.len() == w.len());
    if x.len() < 2 {
        return None;
    }
    let sw: f64 = w.iter().sum();
    if !(sw > 0.0) || !sw.is_finite() {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        slope_stderr: (1.0 / sxx).sqrt(),
    })
}

/// Unweighted log-log fit `|y| ~ C x^q`; returns `(q, C)`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let w = vec![1.0; x.len()];
    weighted_line_fit(&lx, &ly, &w).map(|f| (f.slope, f.intercept.exp()))
}

/// Running mean/variance (Welford) with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_entries_dominate() {
        let (m, s) = weighted_mean(&[1.0, 5.0, 3.0], &[0.0, 1.0, 0.0]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 0.0);
    }

    #[test]
    fn inverse_variance_weights() {
        let (m, s) = weighted_mean(&[1.0, 2.0], &[1.0, 2.0]);
        // weights 1 and 1/4
        assert_relative_eq!(m, (1.0 + 0.5) / 1.25, epsilon = 1e-15);
        assert_relative_eq!(s, (1.0f64 / 1.25).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn recovers_power_law() {
        let x = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(4.0)).collect();
        let (q, c) = power_law_fit(&x, &y).unwrap();
        assert_relative_eq!(q, 4.0, epsilon = 1e-12);
        assert_relative_eq!(c, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 17) as f64 * 0.3 - 1.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|x| all.push(*x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..40].iter().for_each(|x| a.push(*x));
        xs[40..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        assert_eq!(a.count, all.count);
        assert_relative_eq!(a.mean, all.mean, epsilon = 1e-13);
        assert_relative_eq!(a.variance(), all.variance(), epsilon = 1e-12);
    }
}
