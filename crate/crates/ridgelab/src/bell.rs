//! Complete Bell polynomials over complex arguments.
//!
//! The complete Bell polynomial `B_n(c_1, ..., c_n)` collects the Taylor
//! coefficients of an exponentiated series,
//!
//! ```text
//! exp( sum_{n>=1} c_n t^n / n! ) = sum_{n>=0} B_n(c_1,...,c_n) t^n / n!
//! ```
//!
//! with `B_0 = 1`. The crate uses them in two places: to turn log-derivatives
//! of a wavelet's frequency response into ordinary derivatives, and to build
//! the instantaneous modulation functions of an analytic signal from its
//! bandwidth and complex-frequency derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest supported order.
///
/// Binomial coefficients are accumulated as a Pascal row in `f64`; every use
/// in this crate needs `n <= ~10`, so the cap is generous while keeping the
/// coefficients exactly representable.
pub const MAX_ORDER: usize = 32;

/// Evaluates the complete Bell polynomial `B_n(c_1, ..., c_n)` by the
/// binomial recursion
///
/// ```text
/// B_n = sum_{p=0}^{n-1} C(n-1, p) c_{n-p} B_p,    B_0 = 1.
/// ```
///
/// `c` holds `c_1, c_2, ...` in order and must contain at least `n` entries,
/// all finite. The function is pure: identical inputs give bit-identical
/// outputs.
pub fn complete_bell(c: &[Complex64], n: usize) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "Bell polynomial order {n} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if c.len() < n {
        return Err(Error::InvalidArgument(format!(
            "Bell polynomial of order {n} needs {n} arguments, got {}",
            c.len()
        )));
    }
    for (k, ck) in c[..n].iter().enumerate() {
        if !ck.re.is_finite() || !ck.im.is_finite() {
            return Err(Error::Domain(format!(
                "Bell argument c_{} is not finite: {ck}",
                k + 1
            )));
        }
    }

    let mut b = Vec::with_capacity(n + 1);
    b.push(Complex64::new(1.0, 0.0));
    // `row` holds the Pascal row C(q-1, p) while computing B_q.
    let mut row = vec![1.0f64];
    for q in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, &coeff) in row.iter().enumerate() {
            acc += c[q - 1 - p] * b[p] * coeff;
        }
        b.push(acc);

        let mut next = vec![1.0f64; q + 1];
        for p in 1..q {
            next[p] = row[p - 1] + row[p];
        }
        row = next;
    }
    Ok(b[n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_ulps_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Explicit low-order polynomials, kept independent of the recursion.
    fn b1(c: &[Complex64]) -> Complex64 {
        c[0]
    }
    fn b2(c: &[Complex64]) -> Complex64 {
        c[0] * c[0] + c[1]
    }
    fn b3(c: &[Complex64]) -> Complex64 {
        c[0] * c[0] * c[0] + 3.0 * c[0] * c[1] + c[2]
    }
    fn b4(c: &[Complex64]) -> Complex64 {
        c[0] * c[0] * c[0] * c[0]
            + 6.0 * c[0] * c[0] * c[1]
            + 4.0 * c[0] * c[2]
            + 3.0 * c[1] * c[1]
            + c[3]
    }

    fn assert_close_ulps(a: Complex64, b: Complex64, max_ulps: u32) {
        let scale = b.norm().max(1e-300);
        assert_ulps_eq!(a.re, b.re, max_ulps = max_ulps, epsilon = 1e-14 * scale);
        assert_ulps_eq!(a.im, b.im, max_ulps = max_ulps, epsilon = 1e-14 * scale);
    }

    #[test]
    fn order_zero_is_one() {
        assert_eq!(complete_bell(&[], 0).unwrap(), c(1.0, 0.0));
        assert_eq!(complete_bell(&[c(3.0, -2.0)], 0).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn exponential_series_gives_all_ones() {
        // c = (1, 0, 0, ...) generates exp(t), whose coefficients are all 1.
        let args: Vec<Complex64> = std::iter::once(c(1.0, 0.0))
            .chain(std::iter::repeat_n(c(0.0, 0.0), 9))
            .collect();
        for n in 0..=10 {
            let v = complete_bell(&args, n).unwrap();
            assert_ulps_eq!(v.re, 1.0, max_ulps = 2);
            assert_ulps_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn matches_printed_low_orders() {
        let args = [c(2.0, 0.0), c(3.0, 0.0)];
        let v = complete_bell(&args, 2).unwrap();
        assert_ulps_eq!(v.re, 7.0, max_ulps = 2);

        let args = [c(1.0, 0.0); 4];
        let v = complete_bell(&args, 4).unwrap();
        // 1 + 6 + 4 + 3 + 1
        assert_ulps_eq!(v.re, 15.0, max_ulps = 2);
    }

    #[test]
    fn recursion_equals_closed_forms_on_random_tuples() {
        // Poor man's LCG; keeps the tuple set fixed without pulling rand in.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        };
        for _ in 0..100 {
            let args: Vec<Complex64> = (0..4).map(|_| c(next(), next())).collect();
            assert_close_ulps(complete_bell(&args, 1).unwrap(), b1(&args), 8);
            assert_close_ulps(complete_bell(&args, 2).unwrap(), b2(&args), 8);
            assert_close_ulps(complete_bell(&args, 3).unwrap(), b3(&args), 8);
            assert_close_ulps(complete_bell(&args, 4).unwrap(), b4(&args), 8);
        }
    }

    #[test]
    fn order_exceeding_argument_count_is_rejected() {
        let err = complete_bell(&[c(1.0, 0.0)], 2).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn order_above_cap_is_rejected() {
        let args = vec![c(1.0, 0.0); MAX_ORDER + 1];
        let err = complete_bell(&args, MAX_ORDER + 1).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn non_finite_entry_is_rejected() {
        let args = [c(1.0, 0.0), c(f64::NAN, 0.0)];
        let err = complete_bell(&args, 2).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));

        let args = [c(f64::INFINITY, 0.0)];
        let err = complete_bell(&args, 1).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn pure_function_bit_identical() {
        let args = [c(0.3, -1.7), c(-0.2, 0.9), c(1.1, 0.4), c(-0.8, -0.6)];
        let a = complete_bell(&args, 4).unwrap();
        let b = complete_bell(&args, 4).unwrap();
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    proptest! {
        // Scaling c_k -> lambda^k c_k multiplies B_n by lambda^n (substitute
        // t -> lambda t in the generating function).
        #[test]
        fn homogeneity_under_argument_scaling(
            re in proptest::collection::vec(-2.0f64..2.0, 6),
            im in proptest::collection::vec(-2.0f64..2.0, 6),
            lambda in 0.1f64..3.0,
            n in 1usize..=6,
        ) {
            let args: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| c(r, i)).collect();
            let scaled: Vec<Complex64> = args
                .iter()
                .enumerate()
                .map(|(k, &v)| v * lambda.powi(k as i32 + 1))
                .collect();
            let lhs = complete_bell(&scaled, n).unwrap();
            let rhs = complete_bell(&args, n).unwrap() * lambda.powi(n as i32);
            let tol = 1e-12 * rhs.norm().max(1e-9);
            prop_assert!((lhs - rhs).norm() <= tol,
                "lhs={lhs} rhs={rhs} n={n} lambda={lambda}");
        }
    }
}
