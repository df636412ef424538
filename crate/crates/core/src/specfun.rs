//! Real-argument Bessel functions J_m, Y_m and the Hankel combination
//! H¹_m = J_m + i·Y_m.
//!
//! Self-contained: ascending power series at small argument, backward
//! (Miller) recurrence normalized by the even-order sum identity at
//! moderate argument for J, and the Hankel asymptotic expansion for
//! Y_0/Y_1 at large argument with stable upward recurrence in the order.
//! Crossover points are locked by the identity suite (Wronskian and
//! three-term recurrence) in the tests below.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported order. The Miller start index and the series length
/// are sized for this ceiling on x ∈ [0, 50].
pub const MAX_ORDER: u32 = 60;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J_m(x) for integer order 0 ≤ m ≤ [`MAX_ORDER`], x ≥ 0.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if x < 0.0 || !x.is_finite() {
        return Err(Error::DomainError(format!("bessel_j argument {x}")));
    }
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if x <= 10.0 {
        Ok(j_series(order, x))
    } else {
        Ok(j_miller(order, x))
    }
}

/// Y_m(x) for integer order 0 ≤ m ≤ [`MAX_ORDER`], x > 0.
pub fn bessel_y(order: u32, x: f64) -> Result<f64> {
    check_order(order)?;
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::DomainError(format!("bessel_y argument {x}")));
    }
    let (y0, y1) = if x <= 14.0 {
        (y0_series(x), y1_series(x))
    } else {
        (hankel_asymptotic(0, x).1, hankel_asymptotic(1, x).1)
    };
    match order {
        0 => Ok(y0),
        1 => Ok(y1),
        m => {
            // Upward recurrence is stable for Y (the dominant solution).
            let mut prev = y0;
            let mut cur = y1;
            for k in 1..m {
                let next = (2.0 * k as f64 / x) * cur - prev;
                prev = cur;
                cur = next;
            }
            Ok(cur)
        }
    }
}

/// d/dx J_m(x) via J_m' = (J_{m-1} - J_{m+1})/2, with J_0' = -J_1.
pub fn bessel_j_prime(order: u32, x: f64) -> Result<f64> {
    if order == 0 {
        return Ok(-bessel_j(1, x)?);
    }
    Ok(0.5 * (bessel_j(order - 1, x)? - bessel_j(order + 1, x)?))
}

/// d/dx Y_m(x) via the same derivative recurrence as J.
pub fn bessel_y_prime(order: u32, x: f64) -> Result<f64> {
    if order == 0 {
        return Ok(-bessel_y(1, x)?);
    }
    Ok(0.5 * (bessel_y(order - 1, x)? - bessel_y(order + 1, x)?))
}

/// Hankel function of the first kind, H¹_m(x) = J_m(x) + i·Y_m(x).
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j(order, x)?, bessel_y(order, x)?))
}

/// d/dx H¹_m(x).
pub fn hankel1_prime(order: u32, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(
        bessel_j_prime(order, x)?,
        bessel_y_prime(order, x)?,
    ))
}

fn check_order(order: u32) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Ascending power series, accurate to ~1e-13 relative for x ≤ 10.
fn j_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^m / m!
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / k as f64;
    }
    let q = half * half;
    let mut term = lead;
    let mut sum = term;
    let mut comp = 0.0; // compensated summation
    for k in 1..=60u32 {
        term *= -q / (k as f64 * (k as f64 + order as f64));
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Backward (Miller) recurrence for J_0..J_order at once, normalized by
/// J_0 + 2·Σ J_{2k} = 1. Stable for all x; used for x > 10.
fn j_miller(order: u32, x: f64) -> f64 {
    let start = miller_start(order, x);
    let mut jp1 = 0.0_f64; // J_{k+1} candidate (unnormalized)
    let mut j = 1e-300_f64; // J_k
    let mut norm = 0.0_f64;
    let mut wanted = 0.0_f64;
    for k in (0..=start).rev() {
        let jm1 = (2.0 * (k as f64 + 1.0) / x) * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds the unnormalized J_k
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k == order as usize {
            wanted = j;
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            j *= s;
            jp1 *= s;
            norm *= s;
            wanted *= s;
        }
    }
    wanted / norm
}

fn miller_start(order: u32, x: f64) -> usize {
    let base = x + 16.0 * x.cbrt() + 12.0;
    (base as usize).max(order as usize + 18)
}

/// Y_0 by the logarithmic series (A&S 9.1.13), x ≤ 14.
fn y0_series(x: f64) -> f64 {
    let j0 = j_series(0, x);
    let q = 0.25 * x * x;
    let mut term = 1.0_f64; // (x^2/4)^k / (k!)^2, k = 0 -> 1
    let mut hk = 0.0_f64;
    let mut sum = 0.0_f64;
    for k in 1..=80u32 {
        term *= q / ((k * k) as f64);
        hk += 1.0 / k as f64;
        let add = if k % 2 == 1 { term * hk } else { -term * hk };
        sum += add;
        if term * hk < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    (2.0 / std::f64::consts::PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0 + sum)
}

/// Y_1 by the logarithmic series (A&S 9.1.11 with n = 1), x ≤ 14.
fn y1_series(x: f64) -> f64 {
    let j1 = j_series(1, x);
    let pi = std::f64::consts::PI;
    let q = 0.25 * x * x;
    // sum over k of (-1)^k [psi(k+1) + psi(k+2)] (x/2)^{2k+1} / (k! (k+1)!)
    // with psi(1) = -gamma, psi(n+1) = -gamma + H_n.
    let mut term = 0.5 * x; // (x/2)^{2k+1} / (k!(k+1)!) at k = 0
    let mut hk = 0.0_f64; // H_k
    let mut hk1 = 1.0_f64; // H_{k+1}
    let mut sum = term * (-2.0 * EULER_GAMMA + hk + hk1);
    for k in 1..=80u32 {
        term *= -q / (k as f64 * (k as f64 + 1.0));
        hk += 1.0 / k as f64;
        hk1 += 1.0 / (k as f64 + 1.0);
        let add = term * (-2.0 * EULER_GAMMA + hk + hk1);
        sum += add;
        if add.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    (2.0 / pi) * (0.5 * x).ln() * j1 - 2.0 / (pi * x) - sum / pi
}

/// Large-argument Hankel expansion (A&S 9.2.5/9.2.6) for order 0 or 1.
/// Returns (J_m, Y_m). Used for x > 14 where the truncation error of the
/// optimally cut asymptotic series is below 1e-12.
fn hankel_asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0_f64;
    let mut q = 0.0_f64;
    // c_j = prod_{i=1..j} (mu - (2i-1)^2) / (j! (8x)^j); P takes even j with
    // alternating sign, Q odd j with alternating sign.
    let mut c = 1.0_f64;
    let mut last = f64::INFINITY;
    for j in 1..=30u32 {
        let odd = 2.0 * j as f64 - 1.0;
        c *= (mu - odd * odd) / (j as f64 * 8.0 * x);
        if c.abs() > last {
            break; // asymptotic series started diverging
        }
        last = c.abs();
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 0 {
            p += sign * c;
        } else {
            q += sign * c;
        }
        if c.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * std::f64::consts::PI;
    let amp = (2.0 / (std::f64::consts::PI * x)).sqrt();
    let (s, co) = chi.sin_cos();
    (amp * (p * co - q * s), amp * (p * s + q * co))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent brute-force oracle: plain ascending series with
    /// compensated summation, no shared code path with `bessel_j`'s
    /// Miller branch or the asymptotic forms.
    fn j_oracle(order: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut lead = 1.0_f64;
        for k in 1..=order {
            lead *= half / k as f64;
        }
        let q = half * half;
        let mut term = lead;
        let mut sum = term;
        for k in 1..=60u32 {
            term *= -q / (k as f64 * (k as f64 + order as f64));
            sum += term;
        }
        sum
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = f(lo);
        assert!(flo * f(hi) < 0.0, "bisection bracket must change sign");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if flo * fm < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                flo = fm;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_zero_of_j0_from_series_oracle() {
        // Derived oracle: bisection on the independent power series.
        let root = bisect(|x| j_oracle(0, x), 2.0, 3.0);
        assert!((root - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j(0, 2.404825557695773).unwrap().abs() < 1e-10);
    }

    #[test]
    fn first_zero_of_y0() {
        let root = bisect(|x| bessel_y(0, x).unwrap(), 0.5, 1.2);
        assert!((root - 0.893576966279167).abs() < 1e-8);
        assert!(bessel_y(0, 0.893576966279167).unwrap().abs() < 1e-8);
    }

    #[test]
    fn j_matches_series_oracle_small_x() {
        for order in 0..=10u32 {
            let mut x = 0.05;
            while x <= 10.0 {
                let a = bessel_j(order, x).unwrap();
                let b = j_oracle(order, x);
                assert!(
                    (a - b).abs() <= 1e-12 + 1e-12 * b.abs(),
                    "J_{order}({x}): {a} vs oracle {b}"
                );
                x += 0.173;
            }
        }
    }

    #[test]
    fn wronskian_and_recurrence_grid() {
        // Log-spaced grid on [0.05, 50], orders 0..=20, identity residuals <= 1e-9.
        let n = 140;
        for i in 0..=n {
            let x = 0.05 * (50.0_f64 / 0.05).powf(i as f64 / n as f64);
            for m in 0..=20u32 {
                let j = bessel_j(m, x).unwrap();
                let jp = bessel_j_prime(m, x).unwrap();
                let y = bessel_y(m, x).unwrap();
                let yp = bessel_y_prime(m, x).unwrap();
                let wr = j * yp - jp * y;
                let target = 2.0 / (std::f64::consts::PI * x);
                let scale = target.abs().max(j.abs() * yp.abs() + jp.abs() * y.abs());
                assert!(
                    (wr - target).abs() <= 1e-9 * scale.max(1.0),
                    "Wronskian m={m} x={x}: {wr} vs {target}"
                );
                // three-term recurrence for J and Y
                if m >= 1 {
                    let jm1 = bessel_j(m - 1, x).unwrap();
                    let jp1 = bessel_j(m + 1, x).unwrap();
                    let r = jm1 + jp1 - (2.0 * m as f64 / x) * j;
                    let sc = jm1.abs().max(jp1.abs()).max((2.0 * m as f64 / x * j).abs());
                    assert!(r.abs() <= 1e-9 * sc.max(1.0), "J recurrence m={m} x={x}: {r}");
                    let ym1 = bessel_y(m - 1, x).unwrap();
                    let yp1 = bessel_y(m + 1, x).unwrap();
                    let ry = ym1 + yp1 - (2.0 * m as f64 / x) * y;
                    let scy = ym1.abs().max(yp1.abs()).max((2.0 * m as f64 / x * y).abs());
                    assert!(ry.abs() <= 1e-9 * scy.max(1.0), "Y recurrence m={m} x={x}: {ry}");
                }
            }
        }
    }

    #[test]
    fn wronskian_at_one() {
        let j = bessel_j(0, 1.0).unwrap();
        let jp = bessel_j_prime(0, 1.0).unwrap();
        let y = bessel_y(0, 1.0).unwrap();
        let yp = bessel_y_prime(0, 1.0).unwrap();
        assert!((j * yp - jp * y - 2.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn recurrence_residual_x5_m3() {
        let x = 5.0;
        let r = bessel_j(2, x).unwrap() + bessel_j(4, x).unwrap()
            - (6.0 / x) * bessel_j(3, x).unwrap();
        assert!(r.abs() < 1e-10);
    }

    #[test]
    fn hankel_definition_and_asymptotic_magnitude() {
        let h = hankel1(0, 1.0).unwrap();
        assert_eq!(h.re, bessel_j(0, 1.0).unwrap());
        let h12 = hankel1(1, 2.0).unwrap();
        assert_eq!(h12.im, bessel_y(1, 2.0).unwrap());
        // |H1_0(x)| ~ sqrt(2/(pi x)) for large x
        let x = 40.0;
        let mag = hankel1(0, x).unwrap().norm();
        let asy = (2.0 / (std::f64::consts::PI * x)).sqrt();
        assert!((mag - asy).abs() / asy < 1e-2);
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(matches!(
            bessel_j(61, 1.0),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(matches!(bessel_y(0, 0.0), Err(Error::DomainError(_))));
        assert!(matches!(bessel_y(0, -1.0), Err(Error::DomainError(_))));
    }
}
