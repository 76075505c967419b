//! Student-t tail probabilities by direct quadrature, plus a direct-formula
//! Pearson oracle built on them.
//!
//! No gamma functions: the two-sided p-value is the ratio of two integrals of
//! the unnormalized density (1 + t^2/df)^{-(df+1)/2}, each mapped onto [0, 1]
//! with t = a + u/(1-u) and evaluated by adaptive Simpson quadrature. Shares
//! nothing with the production incomplete-beta route.

/// Recursive adaptive Simpson with absolute tolerance `tol`.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Integral of (1 + t^2/df)^{-(df+1)/2} over [from, infinity), mapped onto
/// u in [0, 1] by t = from + u/(1-u).
fn tail_integral(from: f64, df: f64) -> f64 {
    let exponent = -(df + 1.0) / 2.0;
    let f = move |u: f64| {
        if u >= 1.0 {
            // Limit value: the integrand decays like (1-u)^{df-1}.
            return if df > 1.0 {
                0.0
            } else {
                // df == 1: (t^2)^{-1} (1-u)^{-2} -> 1 as u -> 1.
                1.0
            };
        }
        let t = from + u / (1.0 - u);
        let jac = 1.0 / ((1.0 - u) * (1.0 - u));
        (1.0 + t * t / df).powf(exponent) * jac
    };
    adaptive_simpson(&f, 0.0, 1.0, 1e-13)
}

/// Two-sided p-value P(|T| >= |t|) for Student's t with `df` degrees of
/// freedom, by quadrature.
///
/// Intended for the panel-scale range df <= ~10^4; far beyond that the
/// near-Gaussian integrand makes the subdivision excruciating.
pub fn t_two_sided_p_oracle(t: f64, df: f64) -> f64 {
    assert!(df >= 1.0, "quadrature oracle needs df >= 1");
    if t == 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let tail = tail_integral(t.abs(), df);
    let half = tail_integral(0.0, df);
    (tail / half).min(1.0)
}

/// Direct-formula Pearson oracle: raw moment sums with Neumaier-compensated
/// accumulation, p-value from the quadrature above. Returns (r, p).
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 3, "need at least 3 pairs");
    let nf = n as f64;
    let sx = compensated_sum(x.iter().copied());
    let sy = compensated_sum(y.iter().copied());
    let sxx = compensated_sum(x.iter().map(|&a| a * a));
    let syy = compensated_sum(y.iter().map(|&a| a * a));
    let sxy = compensated_sum(x.iter().zip(y).map(|(&a, &b)| a * b));
    let num = nf * sxy - sx * sy;
    let den = ((nf * sxx - sx * sx) * (nf * syy - sy * sy)).sqrt();
    let r = (num / den).clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((nf - 2.0) / (1.0 - r * r)).sqrt();
        t_two_sided_p_oracle(t, nf - 2.0)
    };
    (r, p)
}

/// Neumaier-compensated summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn matches_cauchy_closed_form() {
        for t in [0.3f64, 1.0, 2.5, 10.0] {
            let expected = 1.0 - 2.0 / PI * t.atan();
            assert_abs_diff_eq!(t_two_sided_p_oracle(t, 1.0), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn matches_df2_closed_form() {
        for t in [0.5f64, 1.3, 3.0] {
            let expected = 1.0 - t / (2.0 + t * t).sqrt();
            assert_abs_diff_eq!(t_two_sided_p_oracle(t, 2.0), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn matches_df3_closed_form_at_frozen_example() {
        // F(t; 3) = 1/2 + (atan(x) + x/(1+x^2)) / pi with x = t/sqrt(3).
        let t = 2.5;
        let x = t / 3.0f64.sqrt();
        let expected = 2.0 * (0.5 - (x.atan() + x / (1.0 + x * x)) / PI);
        assert_abs_diff_eq!(t_two_sided_p_oracle(t, 3.0), expected, epsilon = 1e-10);
        assert_abs_diff_eq!(expected, 0.08770664700806553, epsilon = 1e-12);
    }

    #[test]
    fn large_df_behaves() {
        // At df -> inf the 95% two-sided point approaches 1.96.
        let p = t_two_sided_p_oracle(1.959963984540054, 1e4);
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-3);
    }

    #[test]
    fn pearson_oracle_frozen_example() {
        let (r, p) = pearson_oracle(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 6.0]);
        assert_abs_diff_eq!(r, 0.8219949365267865, epsilon = 1e-14);
        assert_abs_diff_eq!(p, 0.08770664700806553, epsilon = 1e-10);
    }
}
