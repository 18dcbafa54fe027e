/// Step-size objective for one candidate base learner:
/// `g(w) = log sum_r exp(-(ρ_r + w h_r)) + v w`, convex in `w`.
#[derive(Debug, Clone, Copy)]
pub struct LineObjective<'a> {
    margins: &'a [f64],
    gains: &'a [f64],
    regularizer: f64,
}

const MAX_BISECTIONS: usize = 400;

impl<'a> LineObjective<'a> {
    /// `margins` are the current `ρ_r`, `gains` the `h_r = <A_r, zzᵀ>` of the
    /// candidate direction.
    pub fn new(margins: &'a [f64], gains: &'a [f64], regularizer: f64) -> Self {
        assert_eq!(margins.len(), gains.len());
        LineObjective {
            margins,
            gains,
            regularizer,
        }
    }

    fn exponents(&self, w: f64) -> impl Iterator<Item = f64> + Clone + '_ {
        self.margins
            .iter()
            .zip(self.gains)
            .map(move |(r, h)| -(r + w * h))
    }

    pub fn value(&self, w: f64) -> f64 {
        log_sum_exp(self.exponents(w)) + self.regularizer * w
    }

    /// `g'(w) = v - sum_r softmax_r(w) h_r`.
    pub fn derivative(&self, w: f64) -> f64 {
        let peak = self.exponents(w).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for (e, h) in self.exponents(w).zip(self.gains) {
            let p = (e - peak).exp();
            num += p * h;
            den += p;
        }
        self.regularizer - num / den
    }

    /// Minimizer over `[0, max_step]`.
    ///
    /// Returns 0 when `g'(0) >= 0`. Otherwise the upper end is doubled from 1
    /// until `g'` turns positive (or `max_step` is reached, in which case
    /// `max_step` is returned), then the bracket is bisected until its width
    /// is at most `tol` relative to its upper end. The lower end, where
    /// `g' <= 0`, is returned, so `g(w) <= g(0)`.
    pub fn minimize(&self, tol: f64, max_step: f64) -> f64 {
        if self.derivative(0.0) >= 0.0 {
            return 0.0;
        }
        let mut lo = 0.0;
        let mut hi = 1.0f64.min(max_step);
        while self.derivative(hi) < 0.0 {
            if hi >= max_step {
                return max_step;
            }
            lo = hi;
            hi = (hi * 2.0).min(max_step);
        }
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.derivative(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// `log sum exp(x)` with max-subtraction.
pub(crate) fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let peak = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    peak + xs.map(|x| (x - peak).exp()).sum::<f64>().ln()
}
