//! Small summary statistics for per-seed results.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over sqrt(n)); 0 for fewer than two values.
pub fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn ln_choose(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// One-sided sign test: probability of at least `wins` successes in `trials` fair coin flips.
pub fn sign_test_p(wins: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    (wins..=trials)
        .map(|k| (ln_choose(trials, k) - trials as f64 * std::f64::consts::LN_2).exp())
        .sum::<f64>()
        .min(1.0)
}

/// Paired one-sided sign test that `a` tends to be lower than `b`; ties are dropped.
/// Returns `(wins, trials, p)`.
pub fn paired_sign_test_lower(a: &[f64], b: &[f64]) -> (u64, u64, f64) {
    let (mut wins, mut trials) = (0, 0);
    for (x, y) in a.iter().zip(b) {
        if x != y {
            trials += 1;
            wins += (x < y) as u64;
        }
    }
    (wins, trials, sign_test_p(wins, trials))
}
