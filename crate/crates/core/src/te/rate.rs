//! Least-squares convergence-rate fitting in log–log coordinates.

use crate::error::{Error, Result};

/// Reference used to form the error sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateReference {
    /// Errors |k₁(ε) − k_h| against a known limit.
    Limit(f64),
    /// Successive relative errors |k₁(ε) − k₁(ε/2)| / k₁(ε/2) on a
    /// halving chain; no limit required.
    SuccessiveRelative,
}

/// Result of a log–log fit log(err) = log(C) + p·log(ε).
#[derive(Debug, Clone)]
pub struct RateFit {
    pub epsilons: Vec<f64>,
    pub k1_values: Vec<f64>,
    pub reference: RateReference,
    /// Fitted convergence order. In the successive-relative mode this is
    /// the magnitude of the fitted slope (the error direction of an
    /// ε-halving chain is reported as a positive order).
    pub p: f64,
    /// Fitted intercept log(C) (natural log).
    pub log_c: f64,
    /// Points dropped because their error was exactly zero.
    pub excluded: usize,
}

/// Fits the convergence order of a first-eigenvalue sequence.
///
/// With `k_ref = Some(k_h)` the errors are |k₁(ε) − k_h|; zero errors are
/// excluded with a warning count in the result. With `k_ref = None` the
/// ε list must be a halving chain ε, ε/2, ε/4, ... and successive relative
/// errors are fitted instead.
pub fn fit_rate(epsilons: &[f64], k1s: &[f64], k_ref: Option<f64>) -> Result<RateFit> {
    if epsilons.len() != k1s.len() {
        return Err(Error::InvalidParameter(format!(
            "epsilons ({}) and k1 values ({}) must match",
            epsilons.len(),
            k1s.len()
        )));
    }
    if epsilons.len() < 3 {
        return Err(Error::InvalidParameter(
            "rate fitting needs at least 3 points".into(),
        ));
    }
    if epsilons.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter("epsilons must be positive".into()));
    }
    match k_ref {
        Some(kh) => {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut excluded = 0;
            for (&e, &k) in epsilons.iter().zip(k1s) {
                let err = (k - kh).abs();
                if err == 0.0 {
                    excluded += 1;
                    continue;
                }
                xs.push(e.ln());
                ys.push(err.ln());
            }
            if xs.len() < 2 {
                return Err(Error::InvalidParameter(
                    "too few nonzero errors for a fit".into(),
                ));
            }
            let (p, log_c) = least_squares_line(&xs, &ys);
            Ok(RateFit {
                epsilons: epsilons.to_vec(),
                k1_values: k1s.to_vec(),
                reference: RateReference::Limit(kh),
                p,
                log_c,
                excluded,
            })
        }
        None => {
            // halving chain check
            for w in epsilons.windows(2) {
                if (w[1] - 0.5 * w[0]).abs() > 1e-9 * w[0] {
                    return Err(Error::InvalidParameter(format!(
                        "successive-relative mode needs a halving chain, got {} after {}",
                        w[1], w[0]
                    )));
                }
            }
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut excluded = 0;
            for i in 0..epsilons.len() - 1 {
                let re = (k1s[i] - k1s[i + 1]).abs() / k1s[i + 1].abs();
                if re == 0.0 {
                    excluded += 1;
                    continue;
                }
                xs.push(epsilons[i].ln());
                ys.push(re.ln());
            }
            if xs.len() < 2 {
                return Err(Error::InvalidParameter(
                    "too few nonzero relative errors for a fit".into(),
                ));
            }
            let (slope, log_c) = least_squares_line(&xs, &ys);
            Ok(RateFit {
                epsilons: epsilons.to_vec(),
                k1_values: k1s.to_vec(),
                reference: RateReference::SuccessiveRelative,
                p: slope.abs(),
                log_c,
                excluded,
            })
        }
    }
}

fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_line() {
        let eps = [0.5, 0.25, 0.125, 0.0625];
        let kh = 2.0;
        let ks: Vec<f64> = eps.iter().map(|&e| kh + 3.0 * e * e).collect();
        let fit = fit_rate(&eps, &ks, Some(kh)).unwrap();
        assert!((fit.p - 2.0).abs() < 1e-12);
        assert!((fit.log_c - 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn affine_equivariance() {
        let eps = [0.5_f64, 0.25, 0.125, 0.0625, 0.03125];
        let kh = 1.0;
        let ks: Vec<f64> = eps.iter().map(|&e| kh + 0.7 * e.powf(1.6)).collect();
        let scaled: Vec<f64> = eps.iter().map(|&e| kh + 7.0 * e.powf(1.6)).collect();
        let f1 = fit_rate(&eps, &ks, Some(kh)).unwrap();
        let f2 = fit_rate(&eps, &scaled, Some(kh)).unwrap();
        assert!((f1.p - f2.p).abs() < 1e-10);
        assert!((f2.log_c - f1.log_c - 10.0_f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn zero_error_points_excluded() {
        let eps = [0.5, 0.25, 0.125, 0.0625];
        let ks = [2.9, 2.2, 2.05, 2.0];
        let fit = fit_rate(&eps, &ks, Some(2.0)).unwrap();
        assert_eq!(fit.excluded, 1);
    }

    #[test]
    fn needs_three_points() {
        assert!(fit_rate(&[0.5, 0.25], &[1.0, 1.0], Some(0.5)).is_err());
    }

    #[test]
    fn relative_mode_needs_halving_chain() {
        assert!(fit_rate(&[0.5, 0.3, 0.15], &[1.0, 1.0, 1.0], None).is_err());
    }
}
