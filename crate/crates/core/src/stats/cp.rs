use super::beta::reg_inc_beta;
use super::StatsError;

/// Clopper-Pearson significance of the claim that the success probability
/// lies in `[a, b]`, having observed `t` successes in `n` Bernoulli trials.
///
/// Closed forms cover `t = 0` and `t = n`; otherwise the value is
/// `1 - (I_b(t+1, n-t) - I_a(t, n-t+1))`. The result is clamped to `[0, 1]`.
pub fn cp_significance(a: f64, b: f64, t: u64, n: u64) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::Domain("no samples".into()));
    }
    if t > n {
        return Err(StatsError::Domain(format!("{t} successes out of {n} trials")));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(StatsError::Domain(format!("[{a}, {b}] is not a sub-interval of [0, 1]")));
    }
    let nf = n as f64;
    let value = if t == 0 {
        1.0 - ((1.0 - a).powf(nf) - (1.0 - b).powf(nf))
    } else if t == n {
        1.0 - (b.powf(nf) - a.powf(nf))
    } else {
        let tf = t as f64;
        let upper = if b >= 1.0 { 1.0 } else { reg_inc_beta(b, tf + 1.0, nf - tf)? };
        let lower = if a <= 0.0 { 0.0 } else { reg_inc_beta(a, tf, nf - tf + 1.0)? };
        1.0 - (upper - lower)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Decide `P < p` from `t` of `n` samples.
///
/// Returns the assertion (`t/n < p`) and its significance: the CP value of
/// `[0, p]` when the estimate is below the threshold, of `[p, 1]` when above,
/// and `1` when the estimate sits exactly on `p`.
pub fn cp_for_threshold(t: u64, n: u64, p: f64) -> Result<(bool, f64), StatsError> {
    if n == 0 {
        return Err(StatsError::Domain("no samples".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::Domain(format!("threshold {p} outside [0, 1]")));
    }
    let estimate = t as f64 / n as f64;
    if estimate < p {
        Ok((true, cp_significance(0.0, p, t, n)?))
    } else if estimate > p {
        Ok((false, cp_significance(p, 1.0, t, n)?))
    } else {
        Ok((false, 1.0))
    }
}

/// `P[X <= k]` for `X ~ Binomial(n, p)`, through `I_{1-p}(n - k, k + 1)`.
pub fn binom_cdf(k: u64, n: u64, p: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(StatsError::Domain(format!("probability {p} outside [0, 1]")));
    }
    if k >= n || p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    reg_inc_beta(1.0 - p, (n - k) as f64, k as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_closed_form() {
        assert_eq!(cp_significance(0.0, 0.5, 0, 10).unwrap(), 9.765625e-4);
    }

    #[test]
    fn all_successes_closed_form() {
        let alpha = cp_significance(0.5, 1.0, 10, 10).unwrap();
        assert!((alpha - 0.5f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn threshold_branches() {
        let (below, alpha) = cp_for_threshold(0, 10, 0.5).unwrap();
        assert!(below);
        assert_eq!(alpha, 9.765625e-4);
        let (below, _) = cp_for_threshold(10, 10, 0.5).unwrap();
        assert!(!below);
        assert_eq!(cp_for_threshold(5, 10, 0.5).unwrap(), (false, 1.0));
    }

    #[test]
    fn binomial_edges() {
        assert_eq!(binom_cdf(10, 10, 0.3).unwrap(), 1.0);
        assert_eq!(binom_cdf(3, 10, 0.0).unwrap(), 1.0);
        assert_eq!(binom_cdf(3, 10, 1.0).unwrap(), 0.0);
        assert!((binom_cdf(5, 10, 0.5).unwrap() - 0.623046875).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(cp_significance(0.6, 0.4, 1, 2).is_err());
        assert!(cp_significance(0.0, 1.0, 3, 2).is_err());
        assert!(cp_for_threshold(1, 0, 0.5).is_err());
    }
}
