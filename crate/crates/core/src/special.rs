//! Special functions for the variational updates.

pub use statrs::function::gamma::ln_gamma;

/// Digamma function ψ(x) for x > 0.
///
/// Shifts the argument above 10 with the recurrence ψ(x) = ψ(x+1) − 1/x,
/// then applies the asymptotic expansion.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "digamma is only used on positive arguments");
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number series in 1/x^2.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    shift + x.ln() - 0.5 * inv - series
}
