//! Small statistical helpers shared by the simulation and inference code.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Standard normal quantile `z(u) = Φ⁻¹(u)` for `u ∈ (0, 1)`.
#[inline]
pub fn normal_quantile(u: f64) -> f64 {
    let z = -SQRT_2 * erfc_inv(2.0 * u);
    if !z.is_finite() {
        return z;
    }
    // One Halley step brings the inverse to full double precision.
    let t = (normal_cdf(z) - u) / normal_pdf(z);
    z - t / (1.0 + 0.5 * z * t)
}

/// Standard normal distribution function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Left-continuous empirical quantile `inf{x : F_B(x) ≥ p}` of sorted data.
pub fn quantile_type1(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let b = sorted.len();
    // ceil(p·B) with a small guard against representation error in p·B.
    let k = ((p * b as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[k.min(b) - 1]
}

/// Ordinary least squares fit `y = a + b·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

pub fn ols_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidArgument(
            "line fit needs at least three paired points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidArgument("regressor has no variation".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_se = (rss / (n - 2.0) / sxx).sqrt();
    Ok(LineFit {
        intercept,
        slope,
        slope_se,
    })
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance between empirical laws.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `P(D_n ≥ d)` for the one-sample statistic with a fully specified null.
///
/// Exact for `n ≤ 2000` (Marsaglia, Tsang and Wang's matrix method);
/// asymptotic Kolmogorov tail with the Stephens correction beyond.
pub fn ks_p_value(n: usize, d: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    if d >= 1.0 {
        return 0.0;
    }
    let p = if n <= 2000 && (n as f64) * d * d < 18.0 {
        1.0 - kolmogorov_cdf_exact(n, d)
    } else {
        let sn = (n as f64).sqrt();
        kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
    };
    p.clamp(0.0, 1.0)
}

/// Asymptotic tail `Q_KS(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `P(D_n < d)` by Marsaglia, Tsang and Wang (2003).
fn kolmogorov_cdf_exact(n: usize, d: f64) -> f64 {
    let nd = n as f64 * d;
    let k = nd.floor() as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - nd;

    let mut hm = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                hm[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        hm[i * m] -= h.powi(i as i32 + 1);
        hm[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    hm[(m - 1) * m] += if 2.0 * h - 1.0 > 0.0 {
        (2.0 * h - 1.0).powi(m as i32)
    } else {
        0.0
    };
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                for g in 1..=(i + 1 - j) {
                    hm[i * m + j] /= g as f64;
                }
            }
        }
    }

    let (q, mut e) = matrix_power(&hm, m, n);
    let mut s = q[(k - 1) * m + (k - 1)];
    for i in 1..=n {
        s *= i as f64 / n as f64;
        if s < 1e-140 {
            s *= 1e140;
            e -= 140;
        }
    }
    s * 10f64.powi(e)
}

fn matrix_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for l in 0..m {
            let ail = a[i * m + l];
            if ail == 0.0 {
                continue;
            }
            for j in 0..m {
                c[i * m + j] += ail * b[l * m + j];
            }
        }
    }
    c
}

/// `A^n` with a decimal exponent kept separately to avoid overflow.
fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, he) = matrix_power(a, m, n / 2);
    let mut v = matrix_mul(&half, &half, m);
    let mut e = 2 * he;
    if n % 2 == 1 {
        v = matrix_mul(a, &v, m);
    }
    if v[(m / 2) * m + m / 2] > 1e140 {
        for x in v.iter_mut() {
            *x *= 1e-140;
        }
        e += 140;
    }
    (v, e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &u in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((normal_cdf(normal_quantile(u)) - u).abs() < 1e-12 * u.max(1e-3));
        }
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn quantile_rule_matches_definition() {
        let s = [-2.0, -1.0, 0.0, 1.0, 2.0];
        assert_eq!(quantile_type1(&s, 0.2), -2.0);
        assert_eq!(quantile_type1(&s, 0.21), -1.0);
        assert_eq!(quantile_type1(&s, 0.8), 1.0);
        assert_eq!(quantile_type1(&s, 1.0), 2.0);
        assert_eq!(quantile_type1(&s, 0.0), -2.0);
    }

    #[test]
    fn exact_ks_small_case() {
        // n = 1: D = max(F, 1 − F) ≥ 1/2 and P(D < d) = 2d − 1 on [1/2, 1].
        assert!((kolmogorov_cdf_exact(1, 0.75) - 0.5).abs() < 1e-12);
        // Known value: P(D_10 < 0.274) ≈ 0.6284796154565043.
        assert!((kolmogorov_cdf_exact(10, 0.274) - 0.6284796154565043).abs() < 1e-9);
    }

    #[test]
    fn exact_and_asymptotic_tails_agree_for_large_n() {
        let n = 1500;
        let d = 1.2 / (n as f64).sqrt();
        let exact = 1.0 - kolmogorov_cdf_exact(n, d);
        let sn = (n as f64).sqrt();
        let approx = kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
        assert!((exact - approx).abs() < 2e-3, "{exact} vs {approx}");
    }

    #[test]
    fn two_sample_distance_of_disjoint_samples_is_one() {
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0, 4.0]), 1.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[0.0, 1.0]), 0.0);
        assert!((ks_two_sample(&[0.0, 2.0], &[1.0, 3.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 2.0 * v).collect();
        let fit = ols_line(&x, &y).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-10);
    }
}
