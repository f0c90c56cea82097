//! Summary statistics, box-plot numbers and the two-sample t-test.

use statrs::function::beta::beta_reg;

/// Two-tailed significance level.
pub const ALPHA: f64 = 0.05;

/// McGill notch constant: the notch spans `median ± 1.57 · IQR / √n`.
pub const NOTCH_FACTOR: f64 = 1.57;

pub const WHISKER_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Describe {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 divisor); 0 when `degenerate`.
    pub std: f64,
    /// Fewer than two observations.
    pub degenerate: bool,
}

pub fn describe(xs: &[f64]) -> Describe {
    let n = xs.len();
    if n == 0 {
        return Describe {
            n,
            mean: f64::NAN,
            std: 0.0,
            degenerate: true,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Describe {
            n,
            mean,
            std: 0.0,
            degenerate: true,
        };
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    Describe {
        n,
        mean,
        std: (ss / (n - 1) as f64).sqrt(),
        degenerate: false,
    }
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `(n − 1)·q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxPlot {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub notch_half_width: f64,
    /// Most extreme observations within 1.5 IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Observations beyond the whiskers, ascending.
    pub outliers: Vec<f64>,
}

pub fn box_plot(xs: &[f64]) -> BoxPlot {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - WHISKER_FACTOR * iqr;
    let hi_fence = q3 + WHISKER_FACTOR * iqr;
    let inside = || {
        sorted
            .iter()
            .copied()
            .filter(|&x| x >= lo_fence && x <= hi_fence)
    };
    BoxPlot {
        median,
        q1,
        q3,
        notch_half_width: NOTCH_FACTOR * iqr / (sorted.len() as f64).sqrt(),
        whisker_low: inside().next().unwrap_or(q1),
        whisker_high: inside().next_back().unwrap_or(q3),
        outliers: sorted
            .iter()
            .copied()
            .filter(|&x| x < lo_fence || x > hi_fence)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

impl TTest {
    pub fn significant(&self) -> bool {
        self.p < ALPHA
    }
}

/// Two-tailed p-value of Student's t with `df` degrees of freedom:
/// `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn t_two_tailed_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Pooled-variance two-sample Student's t-test. `None` when either sample
/// has fewer than two observations.
///
/// With zero pooled variance the statistic is 0 (p = 1) for equal means and
/// ±∞ (p = 0) otherwise.
pub fn t_test(a: &[f64], b: &[f64]) -> Option<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let da = describe(a);
    let db = describe(b);
    let df = a.len() + b.len() - 2;
    let pooled = ((a.len() - 1) as f64 * da.std * da.std + (b.len() - 1) as f64 * db.std * db.std)
        / df as f64;
    let se = (pooled * (1.0 / a.len() as f64 + 1.0 / b.len() as f64)).sqrt();
    let diff = da.mean - db.mean;
    let t = if se == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / se
    };
    Some(TTest {
        t,
        p: t_two_tailed_p(t, df as f64),
        df,
    })
}
