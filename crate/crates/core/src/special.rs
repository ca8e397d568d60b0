//! Log rising factorials `ln Γ(a+n) − ln Γ(a)` without catastrophic cancellation.
//!
//! Posterior Dirichlet parameters can be anywhere between `1e-300` and
//! `1e14`, while counts are small integers. Differencing two `ln Γ` values
//! of size `a ln a` loses all precision for large `a`, so large arguments use
//! the difference of Stirling series written in terms of `ln(1 + n/a)`.

/// `ln Γ(a+n) − ln Γ(a) = Σ_{i<n} ln(a+i)` for `a > 0`.
pub fn ln_rising(a: f64, n: u64) -> f64 {
    debug_assert!(a > 0.0);
    if n == 0 {
        return 0.0;
    }
    if a > STIRLING_MIN {
        return stirling_difference(a, n as f64);
    }
    // multiply out the first terms until the argument is large enough
    let mut product = 1.0;
    let mut x = a;
    let mut left = n;
    while left > 0 && x <= STIRLING_MIN {
        product *= x;
        x += 1.0;
        left -= 1;
    }
    let head = product.ln();
    if left == 0 {
        head
    } else {
        head + stirling_difference(x, left as f64)
    }
}

const STIRLING_MIN: f64 = 10.0;

/// `ln Γ(a+n) − ln Γ(a)` for `a > 10` from
/// `ln Γ(x) = (x − ½) ln x − x + ½ ln 2π + Σ_j B_{2j} / (2j(2j−1) x^{2j−1})`.
fn stirling_difference(a: f64, n: f64) -> f64 {
    let b = a + n;
    // (b − ½) ln b − (a − ½) ln a − n, rearranged around ln(1 + n/a)
    let main = (a - 0.5) * (n / a).ln_1p() + n * b.ln() - n;
    main + stirling_tail(b) - stirling_tail(a)
}

fn stirling_tail(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0))))
}
