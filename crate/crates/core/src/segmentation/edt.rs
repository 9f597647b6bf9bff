//! Exact squared Euclidean distance transform (Felzenszwalb & Huttenlocher).

const INF: f64 = 1e20;

/// Lower envelope of parabolas for one row/column, in place.
fn transform_1d(f: &mut [f64], v: &mut [usize], z: &mut [f64], d: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let mut k = 0usize;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let p = v[k];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = -INF;
                    z[1] = INF;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = INF;
                break;
            }
        }
    }
    k = 0;
    for (q, dq) in d.iter_mut().enumerate().take(n) {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *dq = (qf - p) * (qf - p) + f[v[k]];
    }
    f.copy_from_slice(&d[..n]);
}

/// Squared distance (in cells²) from every cell to the nearest obstacle cell.
///
/// Cells outside the grid count as obstacles, so the result is always finite.
pub fn squared_distance_transform(obstacle: &[bool], width: usize, height: usize) -> Vec<u32> {
    // One-cell obstacle frame around the grid.
    let (pw, ph) = (width + 2, height + 2);
    let mut g = vec![0.0f64; pw * ph];
    for r in 0..height {
        for c in 0..width {
            if !obstacle[r * width + c] {
                g[(r + 1) * pw + c + 1] = INF;
            }
        }
    }
    let m = pw.max(ph);
    let mut f = vec![0.0; m];
    let mut v = vec![0usize; m];
    let mut z = vec![0.0; m + 1];
    let mut d = vec![0.0; m];

    for c in 0..pw {
        for r in 0..ph {
            f[r] = g[r * pw + c];
        }
        transform_1d(&mut f[..ph], &mut v, &mut z, &mut d);
        for r in 0..ph {
            g[r * pw + c] = f[r];
        }
    }
    for r in 0..ph {
        let row = &mut g[r * pw..(r + 1) * pw];
        f[..pw].copy_from_slice(row);
        transform_1d(&mut f[..pw], &mut v, &mut z, &mut d);
        row.copy_from_slice(&f[..pw]);
    }

    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            out.push(g[(r + 1) * pw + c + 1] as u32);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(obstacle: &[bool], w: usize, h: usize) -> Vec<u32> {
        let mut obs = Vec::new();
        for r in -1..=h as i64 {
            for c in -1..=w as i64 {
                let inside = r >= 0 && c >= 0 && r < h as i64 && c < w as i64;
                if !inside || obstacle[r as usize * w + c as usize] {
                    obs.push((r, c));
                }
            }
        }
        let mut out = Vec::new();
        for r in 0..h as i64 {
            for c in 0..w as i64 {
                let best = obs
                    .iter()
                    .map(|&(orr, oc)| ((orr - r).pow(2) + (oc - c).pow(2)) as u32)
                    .min()
                    .unwrap();
                out.push(best);
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (w, h) = (rng.gen_range(1..25), rng.gen_range(1..25));
            let obstacle: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.08)).collect();
            assert_eq!(squared_distance_transform(&obstacle, w, h), brute(&obstacle, w, h));
        }
    }

    #[test]
    fn open_square() {
        let d = squared_distance_transform(&[false; 25], 5, 5);
        assert_eq!(d[12], 9);
        assert_eq!(d[0], 1);
    }
}
