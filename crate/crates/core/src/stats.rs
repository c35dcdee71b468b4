/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error of `values`, summed in iteration order.
    ///
    /// A single observation has standard error zero.
    pub fn from_samples<I>(values: I) -> Estimate
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let iter = values.into_iter();
        let (n, sum) = iter.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
        if n == 0 {
            return Estimate::default();
        }
        let mean = sum / n as f64;
        if n == 1 {
            return Estimate {
                mean,
                std_error: 0.0,
            };
        }
        let ss: f64 = iter.map(|v| (v - mean) * (v - mean)).sum();
        let variance = ss / (n - 1) as f64;
        Estimate {
            mean,
            std_error: (variance / n as f64).sqrt(),
        }
    }

    /// Whether the mean is separated from zero by more than `k` standard errors.
    /// A zero standard error counts as decided.
    pub fn decided(&self, k: f64) -> bool {
        self.std_error == 0.0 || self.mean.abs() > k * self.std_error
    }
}
