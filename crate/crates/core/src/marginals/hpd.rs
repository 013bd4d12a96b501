use crate::error::{Error, Result};

/// Shortest window of sorted draws holding `ceil(level * N)` of them.
pub fn hpd_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::input("HPD interval needs at least one sample"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("HPD level must lie in (0,1), got {level}")));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::input("HPD samples contain NaN"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let m = ((level * n as f64).ceil() as usize).clamp(1, n);
    let (mut best, mut lo) = (f64::INFINITY, 0);
    for i in 0..=n - m {
        let w = s[i + m - 1] - s[i];
        if w < best {
            best = w;
            lo = i;
        }
    }
    Ok((s[lo], s[lo + m - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_of_ninety() {
        let s: Vec<f64> = (1..=100).map(f64::from).collect();
        let (lo, hi) = hpd_interval(&s, 0.9).unwrap();
        assert_eq!(hi - lo, 89.0);
        assert_eq!(hpd_interval(&[2.5; 7], 0.5).unwrap(), (2.5, 2.5));
        assert!(hpd_interval(&[], 0.9).is_err());
    }
}
