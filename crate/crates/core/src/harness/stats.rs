//! Summary statistics over per-trial samples.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Percentile by linear interpolation between order statistics: the sample
/// at fractional rank `p (n - 1)`. `p` is in `[0, 1]`.
pub fn percentile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let v = sorted(xs);
    let h = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Sum SE exceeded in 90% of drops.
pub fn ninety_percent_likely(xs: &[f64]) -> f64 {
    percentile(xs, 0.1)
}

/// Empirical CDF as `(value, P[X <= value])` at each distinct sample.
pub fn cdf(xs: &[f64]) -> Vec<(f64, f64)> {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = p,
            _ => out.push((x, p)),
        }
    }
    out
}

/// Evaluates an empirical CDF (as returned by [`cdf`]) at `x`.
pub fn cdf_at(grid: &[(f64, f64)], x: f64) -> f64 {
    match grid.partition_point(|&(v, _)| v <= x) {
        0 => 0.0,
        i => grid[i - 1].1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn median_of_four() {
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 0.5), 2.5);
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 0.0), 1.0);
        assert_eq!(percentile(&[4.0, 1.0, 3.0, 2.0], 1.0), 4.0);
    }

    #[test]
    fn constant_samples_give_one_step() {
        let c = cdf(&[2.0; 5]);
        assert_eq!(c, vec![(2.0, 1.0)]);
        assert_eq!(cdf_at(&c, 1.999), 0.0);
        assert_eq!(cdf_at(&c, 2.0), 1.0);
    }

    #[test]
    fn normal_samples_match_phi() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..50_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c = cdf(&xs);
        let phi = Normal::new(0.0, 1.0).unwrap();
        let sup = c
            .iter()
            .enumerate()
            .map(|(i, &(x, p))| {
                // Both sides of each jump.
                let before = if i == 0 { 0.0 } else { c[i - 1].1 };
                (p - phi.cdf(x)).abs().max((before - phi.cdf(x)).abs())
            })
            .fold(0.0, f64::max);
        assert!(sup < 0.01, "sup-norm {sup}");
    }

    #[test]
    fn tenth_percentile() {
        let xs: Vec<f64> = (1..=11).map(f64::from).collect();
        assert_eq!(ninety_percent_likely(&xs), 2.0);
        assert!(mean(&[]).is_nan());
    }
}
