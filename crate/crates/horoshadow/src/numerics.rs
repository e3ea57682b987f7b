//! Compensated summation and least-squares fits.

/// Neumaier (improved Kahan) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of the items, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Ordinary least squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero when only two points are fitted.
    pub slope_stderr: f64,
    pub n: usize,
}

/// Fits a line through `(xs[i], ys[i])`. Returns `None` with fewer than two
/// points or when all abscissae coincide.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = compensated_sum(xs[..n].iter().copied()) / nf;
    let my = compensated_sum(ys[..n].iter().copied()) / nf;
    let sxx = compensated_sum(xs[..n].iter().map(|x| (x - mx) * (x - mx)));
    if sxx <= 0.0 {
        return None;
    }
    let sxy = compensated_sum(
        xs[..n]
            .iter()
            .zip(&ys[..n])
            .map(|(x, y)| (x - mx) * (y - my)),
    );
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let ssr = compensated_sum(
            xs[..n]
                .iter()
                .zip(&ys[..n])
                .map(|(x, y)| (y - intercept - slope * x).powi(2)),
        );
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        n,
    })
}
