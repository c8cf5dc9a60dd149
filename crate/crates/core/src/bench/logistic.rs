use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-8;

/// Result of a one-dimensional logistic regression `p(x) = 1 / (1 + e^-(b0 + b1 x))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogisticFit {
    Fitted {
        intercept: f64,
        slope: f64,
        /// `-intercept / slope`, where the fitted probability is 1/2.
        midpoint: f64,
        iterations: usize,
        converged: bool,
    },
    /// The classes are (quasi-)separable along x, so the likelihood has no
    /// finite maximiser and the slope runs off to infinity.
    Separated {
        /// Point between the two classes; `None` when only one class occurs.
        boundary: Option<f64>,
        /// True when successes sit at larger x.
        increasing: bool,
    },
}

impl LogisticFit {
    pub fn midpoint(&self) -> Option<f64> {
        match *self {
            LogisticFit::Fitted { midpoint, .. } => Some(midpoint),
            LogisticFit::Separated { boundary, .. } => boundary,
        }
    }

    pub fn is_separated(&self) -> bool {
        matches!(self, LogisticFit::Separated { .. })
    }

    /// Fitted probability at `x`. Separated fits give a step function.
    pub fn predict(&self, x: f64) -> f64 {
        match *self {
            LogisticFit::Fitted { intercept, slope, .. } => sigmoid(intercept + slope * x),
            LogisticFit::Separated { boundary: None, .. } => f64::NAN,
            LogisticFit::Separated { boundary: Some(b), increasing } => {
                if x == b {
                    0.5
                } else if (x > b) == increasing {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(points: &[(f64, bool)], b0: f64, b1: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| {
            let z = b0 + b1 * x;
            // log(1 + e^z) without overflow
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            if y {
                z - softplus
            } else {
                -softplus
            }
        })
        .sum()
}

/// Maximum-likelihood logistic fit of success against x by damped Newton.
///
/// Needs at least two distinct x values. A single outcome class or a
/// separable data set comes back as [`LogisticFit::Separated`].
pub fn fit_logistic(points: &[(f64, bool)]) -> Result<LogisticFit> {
    if points.iter().any(|p| !p.0.is_finite()) {
        return Err(Error::InvalidParams("logistic fit: non-finite x".into()));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)));
    if points.is_empty() || lo == hi {
        return Err(Error::InvalidParams(
            "logistic fit needs at least two distinct x values".into(),
        ));
    }

    let extent = |class: bool| {
        points
            .iter()
            .filter(|p| p.1 == class)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.0), h.max(p.0)))
    };
    let (lo1, hi1) = extent(true);
    let (lo0, hi0) = extent(false);
    if lo1 > hi1 || lo0 > hi0 {
        return Ok(LogisticFit::Separated {
            boundary: None,
            increasing: lo1 <= hi1,
        });
    }
    if hi1 <= lo0 {
        return Ok(LogisticFit::Separated {
            boundary: Some((hi1 + lo0) / 2.0),
            increasing: false,
        });
    }
    if hi0 <= lo1 {
        return Ok(LogisticFit::Separated {
            boundary: Some((hi0 + lo1) / 2.0),
            increasing: true,
        });
    }

    // Fit on centred, scaled x for conditioning, then map back.
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = (hi - lo) / 2.0;
    let scaled: Vec<(f64, bool)> = points.iter().map(|&(x, y)| ((x - mean) / scale, y)).collect();

    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut ll = log_likelihood(&scaled, a, b);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in &scaled {
            let p = sigmoid(a + b * x);
            let r = f64::from(u8::from(y)) - p;
            let w = p * (1.0 - p);
            g0 += r;
            g1 += r * x;
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        if (g0 * g0 + g1 * g1).sqrt() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        let mut t = 1.0;
        let mut stepped = false;
        for _ in 0..40 {
            let (na, nb) = (a + t * d0, b + t * d1);
            let nll = log_likelihood(&scaled, na, nb);
            if nll >= ll {
                a = na;
                b = nb;
                ll = nll;
                stepped = true;
                break;
            }
            t /= 2.0;
        }
        if !stepped {
            break;
        }
    }

    let slope = b / scale;
    let intercept = a - slope * mean;
    Ok(LogisticFit::Fitted {
        intercept,
        slope,
        midpoint: -intercept / slope,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(spec: &[(f64, usize, usize)]) -> Vec<(f64, bool)> {
        spec.iter()
            .flat_map(|&(x, ok, fail)| {
                std::iter::repeat((x, true)).take(ok).chain(std::iter::repeat((x, false)).take(fail))
            })
            .collect()
    }

    #[test]
    fn symmetric_step_has_midpoint_between() {
        let data = pts(&[(3.0, 10, 0), (3.5, 10, 0), (4.25, 5, 5), (4.75, 0, 10), (5.5, 0, 10)]);
        let fit = fit_logistic(&data).unwrap();
        let m = fit.midpoint().unwrap();
        assert!((4.0..=4.5).contains(&m), "{fit:?}");
        assert!(fit.predict(3.0) > fit.predict(5.5));
    }

    #[test]
    fn noisy_decreasing_data_fits() {
        let data = pts(&[(2.0, 19, 1), (3.0, 16, 4), (4.0, 11, 9), (4.5, 9, 11), (5.0, 5, 15), (6.0, 1, 19)]);
        let fit = fit_logistic(&data).unwrap();
        let LogisticFit::Fitted { slope, midpoint, converged, .. } = fit else {
            panic!("{fit:?}")
        };
        assert!(converged);
        assert!(slope < 0.0);
        assert!((3.8..=4.8).contains(&midpoint), "{midpoint}");
        let probs: Vec<f64> = (0..=10).map(|i| fit.predict(1.0 + 0.6 * f64::from(i))).collect();
        assert!(probs.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn increasing_data_gives_positive_slope() {
        let data = pts(&[(1.0, 2, 8), (2.0, 5, 5), (3.0, 8, 2)]);
        let LogisticFit::Fitted { slope, midpoint, .. } = fit_logistic(&data).unwrap() else {
            panic!()
        };
        assert!(slope > 0.0);
        assert!((midpoint - 2.0).abs() < 1e-6);
    }

    #[test]
    fn all_successes_is_flagged() {
        let data = pts(&[(1.0, 3, 0), (2.0, 3, 0)]);
        let fit = fit_logistic(&data).unwrap();
        assert!(fit.is_separated());
        assert_eq!(fit.midpoint(), None);
    }

    #[test]
    fn clean_split_is_flagged_with_boundary() {
        let data = pts(&[(1.0, 4, 0), (2.0, 4, 0), (3.0, 0, 4)]);
        assert_eq!(
            fit_logistic(&data).unwrap(),
            LogisticFit::Separated { boundary: Some(2.5), increasing: false }
        );
    }

    #[test]
    fn needs_two_distinct_x() {
        assert!(fit_logistic(&[]).is_err());
        assert!(fit_logistic(&pts(&[(4.0, 3, 3)])).is_err());
    }
}
