//! Closed-form analysis of the (2,1) repetition code on the M/M/1 queue
//! channel with exponential erasure profile `p(w) = 1 - exp(-kappa w)`.
//!
//! A message bit is sent twice in consecutive channel uses and is lost only
//! when both copies are erased. Consecutive sojourn times are dependent, so
//! the error probability involves the one-step transition density of the
//! stationary sojourn chain rather than a product of marginals.

use crate::queue::{simulate_sojourns, InitMode, QueueParams};
use crate::rng::{mix, Stream};
use crate::{Error, Estimate, Result};

const TAG_ERASURE: u64 = 0xA1;

/// Parameters of the repetition-code analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepetitionParams {
    pub kappa: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl RepetitionParams {
    pub fn new(kappa: f64, lambda: f64, mu: f64) -> Result<RepetitionParams> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        if !(lambda > 0.0 && lambda < mu) {
            return Err(Error::Unstable { lambda, mu });
        }
        Ok(RepetitionParams { kappa, lambda, mu })
    }
}

/// Transition density of consecutive stationary sojourn times in an M/M/1
/// queue: `f(w_next | w_prev)` for `w_prev, w_next >= 0`.
///
/// The two branches meet continuously at `w_next == w_prev`; the density has
/// no atom.
pub fn conditional_sojourn_density(w_prev: f64, w_next: f64, lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(Error::Unstable { lambda, mu });
    }
    if w_prev < 0.0 || w_next < 0.0 || !w_prev.is_finite() || !w_next.is_finite() {
        return Err(Error::InvalidParam(format!(
            "sojourn times must be finite and >= 0, got ({w_prev}, {w_next})"
        )));
    }
    let g = if w_prev < w_next {
        (-mu * (w_next - w_prev)).exp()
    } else {
        (lambda * (w_next - w_prev)).exp()
    };
    Ok(mu / (lambda + mu) * (mu * (-lambda * w_prev - mu * w_next).exp() + lambda * g))
}

/// Stationary sojourn density, Exp(mu - lambda).
pub fn stationary_sojourn_density(w: f64, lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < mu) {
        return Err(Error::Unstable { lambda, mu });
    }
    if w < 0.0 {
        return Ok(0.0);
    }
    let nu = mu - lambda;
    Ok(nu * (-nu * w).exp())
}

/// Conditional erasure probability of the second copy given the first copy's
/// sojourn time: `E[1 - exp(-kappa W_next) | W_prev = w]` in closed form.
///
/// Undefined at `kappa == lambda` (a removable 0/0); callers should perturb
/// kappa slightly in that case.
pub fn second_copy_erasure_given_sojourn(p: &RepetitionParams, w_prev: f64) -> Result<f64> {
    let RepetitionParams { kappa, lambda, mu } = *p;
    if (kappa - lambda).abs() < 1e-9 {
        return Err(Error::InvalidParam(
            "second_copy_erasure_given_sojourn is indeterminate at kappa == lambda; \
             perturb kappa"
                .into(),
        ));
    }
    if w_prev < 0.0 || !w_prev.is_finite() {
        return Err(Error::InvalidParam(format!(
            "sojourn must be finite and >= 0, got {w_prev}"
        )));
    }
    let num = mu * kappa * (-lambda * w_prev).exp() - lambda * mu * (-kappa * w_prev).exp();
    Ok(1.0 - num / ((kappa + mu) * (kappa - lambda)))
}

/// Probability that both copies of a repeated bit are erased, in closed form:
///
/// ```text
/// kappa^2 (2 kappa^2 - lambda^2 + 2 lambda mu + mu^2 + kappa (lambda + 3 mu))
/// -----------------------------------------------------------------------------
/// (2 kappa + mu - lambda)(kappa + mu - lambda)(kappa + mu)^2
/// ```
pub fn repetition_error_prob(p: &RepetitionParams) -> Result<f64> {
    let RepetitionParams { kappa, lambda, mu } = *p;
    let num = kappa * kappa
        * (2.0 * kappa * kappa - lambda * lambda
            + 2.0 * lambda * mu
            + mu * mu
            + kappa * (lambda + 3.0 * mu));
    let den = (2.0 * kappa + mu - lambda) * (kappa + mu - lambda) * (kappa + mu) * (kappa + mu);
    Ok(num / den)
}

/// Monte Carlo estimate of the same probability from simulated queue traces.
///
/// Each trial uses one disjoint consecutive sojourn pair of a stationary
/// trace; erasures are drawn independently per copy given the sojourns.
pub fn repetition_error_mc(
    p: &RepetitionParams,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    if trials < 1_000 {
        return Err(Error::InvalidParam(format!(
            "repetition_error_mc needs trials >= 1000, got {trials}"
        )));
    }
    let params = QueueParams::mm1(p.lambda, p.mu)?;
    let trace = simulate_sojourns(&params, 2 * trials, seed, InitMode::Stationary)?;
    let mut rng = Stream::new(mix(seed, &[TAG_ERASURE]), &[]);
    let mut both = 0u64;
    for pair in trace.sojourns.chunks_exact(2) {
        let e0 = rng.bernoulli(1.0 - (-p.kappa * pair[0]).exp());
        let e1 = rng.bernoulli(1.0 - (-p.kappa * pair[1]).exp());
        if e0 && e1 {
            both += 1;
        }
    }
    Ok(Estimate::binomial(both, trials as u64))
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`. Intended for the smooth exponential-type integrands in this module.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Upper cutoff beyond which all integrands here are negligible: every factor
/// decays at least as fast as `exp(-rate w)`.
pub fn tail_cutoff(rate: f64) -> f64 {
    // exp(-40) ~ 4e-18, far below the tolerances used.
    40.0 / rate
}

/// [`repetition_error_prob`] evaluated by quadrature over the stationary
/// marginal and the conditional closed form. Exposed as a consistency check
/// on the pieces; agrees with the closed form to the quadrature tolerance.
pub fn repetition_error_quadrature(p: &RepetitionParams, tol: f64) -> Result<f64> {
    let RepetitionParams { kappa, lambda, mu } = *p;
    if !(tol > 0.0) {
        return Err(Error::InvalidParam("tolerance must be positive".into()));
    }
    let cutoff = tail_cutoff((mu - lambda).min(1.0));
    let integrand = |w: f64| -> f64 {
        let first = 1.0 - (-kappa * w).exp();
        let second = second_copy_erasure_given_sojourn(p, w).expect("validated params");
        let pi = stationary_sojourn_density(w, lambda, mu).expect("validated params");
        first * second * pi
    };
    Ok(integrate(&integrand, 0.0, cutoff, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(kappa: f64, lambda: f64, mu: f64) -> RepetitionParams {
        RepetitionParams::new(kappa, lambda, mu).unwrap()
    }

    #[test]
    fn density_normalizes() {
        for &(lambda, mu) in &[(0.5f64, 1.0f64), (0.77, 1.0), (0.2, 2.0)] {
            for &w_prev in &[0.0, 0.1, 0.5, 2.0, 7.0] {
                let cutoff = tail_cutoff((mu - lambda).min(mu).min(1.0));
                let total = integrate(
                    &|w_next| conditional_sojourn_density(w_prev, w_next, lambda, mu).unwrap(),
                    0.0,
                    cutoff,
                    1e-9,
                );
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn branches_agree_on_the_diagonal() {
        // Approaching w_next -> w_prev from both sides gives the same value.
        let (lambda, mu) = (0.5, 1.0);
        for &w in &[0.3, 1.0, 4.0] {
            let below = conditional_sojourn_density(w, w - 1e-9, lambda, mu).unwrap();
            let above = conditional_sojourn_density(w, w + 1e-9, lambda, mu).unwrap();
            assert_abs_diff_eq!(below, above, epsilon = 1e-7);
        }
    }

    #[test]
    fn transition_preserves_stationary_marginal() {
        let (lambda, mu) = (0.5, 1.0);
        let cutoff = tail_cutoff(mu - lambda);
        for &w_next in &[0.2, 1.0, 3.0] {
            let mixed = integrate(
                &|w_prev| {
                    conditional_sojourn_density(w_prev, w_next, lambda, mu).unwrap()
                        * stationary_sojourn_density(w_prev, lambda, mu).unwrap()
                },
                0.0,
                cutoff,
                1e-9,
            );
            let target = stationary_sojourn_density(w_next, lambda, mu).unwrap();
            assert_abs_diff_eq!(mixed, target, epsilon = 1e-5);
        }
    }

    #[test]
    fn conditional_erasure_matches_quadrature() {
        let params = p(0.1, 0.5, 1.0);
        for &w_prev in &[0.1, 1.0, 4.0] {
            let by_integral = integrate(
                &|w_next| {
                    (1.0 - (-params.kappa * w_next).exp())
                        * conditional_sojourn_density(w_prev, w_next, 0.5, 1.0).unwrap()
                },
                0.0,
                tail_cutoff(0.5),
                1e-10,
            );
            let closed = second_copy_erasure_given_sojourn(&params, w_prev).unwrap();
            assert_abs_diff_eq!(by_integral, closed, epsilon = 1e-7);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(kappa, lambda, mu) in &[
            (0.1, 0.5, 1.0),
            (0.1, 0.77, 1.0),
            (0.3, 0.2, 1.0),
            (1.0, 0.9, 2.0),
        ] {
            let params = p(kappa, lambda, mu);
            let cf = repetition_error_prob(&params).unwrap();
            let quad = repetition_error_quadrature(&params, 1e-11).unwrap();
            assert_abs_diff_eq!(cf, quad, epsilon = 1e-8);
        }
    }

    #[test]
    fn anchor_value() {
        // kappa=0.1, lambda=0.5, mu=1: 0.0212 / 0.5082.
        let v = repetition_error_prob(&p(0.1, 0.5, 1.0)).unwrap();
        assert_abs_diff_eq!(v, 0.0212 / 0.5082, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_limits() {
        assert_abs_diff_eq!(repetition_error_prob(&p(0.0, 0.5, 1.0)).unwrap(), 0.0);
        // kappa -> infinity: every bit is erased, repetition cannot help.
        let v = repetition_error_prob(&p(1e9, 0.5, 1.0)).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn monotone_in_kappa_and_lambda() {
        let kappas = [0.01, 0.05, 0.1, 0.5, 1.0, 5.0];
        for w in kappas.windows(2) {
            assert!(
                repetition_error_prob(&p(w[0], 0.5, 1.0)).unwrap()
                    < repetition_error_prob(&p(w[1], 0.5, 1.0)).unwrap()
            );
        }
        let lambdas = [0.1, 0.3, 0.5, 0.7, 0.9];
        for w in lambdas.windows(2) {
            assert!(
                repetition_error_prob(&p(0.1, w[0], 1.0)).unwrap()
                    < repetition_error_prob(&p(0.1, w[1], 1.0)).unwrap()
            );
        }
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        for (i, &(kappa, lambda, mu)) in [
            (0.1, 0.5, 1.0),
            (0.1, 0.77, 1.0),
            (0.3, 0.3, 1.0),
            (0.5, 0.8, 1.0),
            (1.0, 0.5, 2.0),
        ]
        .iter()
        .enumerate()
        {
            let params = p(kappa, lambda, mu);
            let cf = repetition_error_prob(&params).unwrap();
            let est = repetition_error_mc(&params, 200_000, 11 + i as u64).unwrap();
            // Disjoint pairs are dependent through the shared trace; at high
            // load the sojourn correlation time spans several pairs, so the
            // binomial stderr understates the real one. Inflate it.
            let tol = 3.0 * est.stderr.max(1e-4) * 4.0;
            assert!(
                (est.value - cf).abs() <= tol,
                "kappa={kappa} lambda={lambda} mu={mu}: mc {} vs cf {cf}",
                est.value
            );
        }
    }

    #[test]
    fn pair_histogram_matches_density() {
        // Bin consecutive stationary pairs and compare cell masses against
        // the two-dimensional density pi(w1) f(w2|w1).
        let (lambda, mu) = (0.5, 1.0);
        let params = QueueParams::mm1(lambda, mu).unwrap();
        let pairs = 1_000_000usize;
        let trace = simulate_sojourns(&params, 2 * pairs, 9, InitMode::Stationary).unwrap();
        let edges = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, f64::INFINITY];
        let cells = (edges.len() - 1) * (edges.len() - 1);
        let mut counts = vec![0u64; cells];
        let bin = |w: f64| edges.windows(2).position(|e| w >= e[0] && w < e[1]).unwrap();
        for pair in trace.sojourns.chunks_exact(2) {
            counts[bin(pair[0]) * (edges.len() - 1) + bin(pair[1])] += 1;
        }
        for i in 0..edges.len() - 1 {
            for j in 0..edges.len() - 1 {
                let hi_i = edges[i + 1].min(tail_cutoff(mu - lambda));
                let hi_j = edges[j + 1].min(tail_cutoff(mu - lambda));
                let mass = integrate(
                    &|w1| {
                        stationary_sojourn_density(w1, lambda, mu).unwrap()
                            * integrate(
                                &|w2| conditional_sojourn_density(w1, w2, lambda, mu).unwrap(),
                                edges[j],
                                hi_j,
                                1e-10,
                            )
                    },
                    edges[i],
                    hi_i,
                    1e-8,
                );
                let est = Estimate::binomial(counts[i * (edges.len() - 1) + j], pairs as u64);
                let tol = 4.0 * est.stderr.max((mass * (1.0 - mass) / pairs as f64).sqrt());
                assert!(
                    (est.value - mass).abs() <= tol.max(5e-4),
                    "cell ({i},{j}): empirical {} vs analytic {mass}",
                    est.value
                );
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(RepetitionParams::new(-0.1, 0.5, 1.0).is_err());
        assert!(RepetitionParams::new(0.1, 1.0, 1.0).is_err());
        assert!(second_copy_erasure_given_sojourn(&p(0.5, 0.5, 1.0), 1.0).is_err());
    }
}
