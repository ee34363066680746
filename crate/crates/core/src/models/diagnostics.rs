//! Sample diagnostics for simulated models.

/// Kendall's tau of two continuous samples (no ties) in `O(n log n)`,
/// counting discordant pairs as inversions.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let discordant = inversions(&mut ys, &mut buf);
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    1.0 - 2.0 * discordant as f64 / pairs
}

fn inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (a, b) = v.split_at_mut(mid);
        let (ba, bb) = buf.split_at_mut(mid);
        inversions(a, ba) + inversions(b, bb)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Empirical `P(F_y(Y) > u | F_x(X) > u)` from ranks.
pub fn upper_tail_dependence(x: &[f64], y: &[f64], u: f64) -> f64 {
    assert_eq!(x.len(), y.len());
    let cut = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[((u * s.len() as f64).floor() as usize).min(s.len() - 1)]
    };
    let (cx, cy) = (cut(x), cut(y));
    let above_x = x.iter().filter(|&&v| v > cx).count();
    let joint = x.iter().zip(y).filter(|(a, b)| **a > cx && **b > cy).count();
    joint as f64 / above_x as f64
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}
