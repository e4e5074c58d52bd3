//! Summary statistics of pointwise residuals over a grid.

use ndarray::Array2;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub rms: f64,
    /// Largest residual divided by the local magnitude of its terms.
    pub max_rel: f64,
    /// Largest residual divided by `max(scale, 1)`: absolute where the
    /// terms are small, relative where they are large.
    pub max_scaled: f64,
    pub node_count: usize,
    /// Nodes excluded from the statistics (for example ill-conditioned
    /// Jacobians).
    pub dropped: usize,
    pub worst_node: (usize, usize),
}

impl ResidualReport {
    /// Statistics of `(node, |residual|, scale)` samples; the relative
    /// residual is `|residual| / max(scale, tiny)`.
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator<Item = ((usize, usize), f64, f64)>,
    {
        let mut r = ResidualReport::default();
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for (node, abs, scale) in samples {
            if r.node_count == 0 || abs > r.max_abs {
                r.max_abs = abs;
                r.worst_node = node;
            }
            r.max_rel = r.max_rel.max(abs / scale.max(f64::MIN_POSITIVE));
            r.max_scaled = r.max_scaled.max(abs / scale.max(1.0));
            sum += abs;
            sum2 += abs * abs;
            r.node_count += 1;
        }
        if r.node_count > 0 {
            r.mean_abs = sum / r.node_count as f64;
            r.rms = (sum2 / r.node_count as f64).sqrt();
        }
        r
    }

    /// Statistics of the moduli of a complex array, with unit scale.
    pub fn from_array(a: &Array2<Complex64>) -> Self {
        Self::from_samples(a.indexed_iter().map(|(n, z)| (n, z.norm(), 1.0)))
    }

    /// Statistics of `|a - b|`, relative to `|b|`.
    pub fn from_difference(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Self {
        Self::from_samples(
            a.indexed_iter()
                .zip(b.iter())
                .map(|((n, x), y)| (n, (x - y).norm(), y.norm())),
        )
    }

    pub fn with_dropped(mut self, dropped: usize) -> Self {
        self.dropped = dropped;
        self
    }

    /// Componentwise worst case of two reports over the same nodes.
    pub fn merge(&self, other: &ResidualReport) -> ResidualReport {
        let n = self.node_count + other.node_count;
        let (max_abs, worst_node) = if other.max_abs > self.max_abs {
            (other.max_abs, other.worst_node)
        } else {
            (self.max_abs, self.worst_node)
        };
        let mean = |a: f64, b: f64| {
            if n == 0 {
                0.0
            } else {
                (a * self.node_count as f64 + b * other.node_count as f64) / n as f64
            }
        };
        ResidualReport {
            max_abs,
            mean_abs: mean(self.mean_abs, other.mean_abs),
            rms: mean(self.rms * self.rms, other.rms * other.rms).sqrt(),
            max_rel: self.max_rel.max(other.max_rel),
            max_scaled: self.max_scaled.max(other.max_scaled),
            node_count: n,
            dropped: self.dropped + other.dropped,
            worst_node,
        }
    }
}
