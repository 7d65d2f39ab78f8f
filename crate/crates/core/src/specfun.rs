//! Special functions: log-factorials, associated Laguerre polynomials and
//! integer-order Bessel functions of the first kind.

use std::f64::consts::PI;

/// `ln Γ(x)` for `x > 0`, via upward shift to `x ≥ 20` and the Stirling series.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut y = x;
    let mut shift = 0.0;
    while y < 20.0 {
        shift += y.ln();
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series - shift
}

/// `ln(n!)`, exact products up to 20! and Stirling beyond.
pub fn log_factorial(n: usize) -> f64 {
    if n <= 20 {
        let mut f: u64 = 1;
        for k in 2..=n as u64 {
            f *= k;
        }
        (f as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Associated Laguerre polynomial `L_n^α(x)` by the three-term recurrence in `n`.
pub fn laguerre_assoc(n: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^α(x), …, L_{n_hi}^α(x)` from a single recurrence pass.
pub fn laguerre_table(n_hi: usize, alpha: usize, x: f64) -> Vec<f64> {
    let a = alpha as f64;
    let mut out = Vec::with_capacity(n_hi + 1);
    out.push(1.0);
    if n_hi == 0 {
        return out;
    }
    out.push(1.0 + a - x);
    for k in 1..n_hi {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * out[k] - (kf + a) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `J_0(x), …, J_{n_hi}(x)` for `x ≥ 0`.
///
/// Power series below `x = 1`, otherwise Miller's downward recurrence
/// normalised with `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j_table(n_hi: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_hi + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1.0 {
        for (n, v) in out.iter_mut().enumerate() {
            *v = bessel_series(n, x);
        }
        return out;
    }
    let top = n_hi.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;
    let (mut jp, mut j) = (0.0_f64, 1e-30_f64);
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        let order = k - 1;
        if order <= n_hi {
            out[order] = j;
        }
        if order > 0 && order % 2 == 0 {
            sum += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            sum *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    sum += j;
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

fn bessel_series(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (n as f64 * half.ln() - log_factorial(n)).exp();
    let mut sum = term;
    let q = half * half;
    for k in 1..200 {
        term *= -q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_μ(x)` for integer order and `x ≥ 0`.
pub fn bessel_j(mu: usize, x: f64) -> f64 {
    bessel_j_table(mu, x)[mu]
}

/// `J_{n}(x)` for signed integer order, `J_{−n} = (−1)^n J_n`.
fn signed_order(table: &[f64], n: i64) -> f64 {
    let v = table[n.unsigned_abs() as usize];
    if n < 0 && n % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `J_μ'(x) = (J_{μ−1} − J_{μ+1}) / 2`.
pub fn bessel_jp(mu: usize, x: f64) -> f64 {
    let t = bessel_j_table(mu + 1, x);
    let m = mu as i64;
    0.5 * (signed_order(&t, m - 1) - signed_order(&t, m + 1))
}

/// `J_μ''(x) = (J_{μ−2} − 2J_μ + J_{μ+2}) / 4`.
pub fn bessel_jpp(mu: usize, x: f64) -> f64 {
    let t = bessel_j_table(mu + 2, x);
    let m = mu as i64;
    0.25 * (signed_order(&t, m - 2) - 2.0 * t[mu] + signed_order(&t, m + 2))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn kth_root(f: impl Fn(f64) -> f64, from: f64, k: usize) -> f64 {
    assert!(k >= 1);
    let step = 0.05;
    let mut found = 0;
    let mut a = from;
    let mut fa = f(a);
    loop {
        let b = a + step;
        let fb = f(b);
        if fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
            found += 1;
            if found == k {
                return bisect(&f, a, b);
            }
        }
        a = b;
        fa = fb;
    }
}

/// `k`-th positive zero of `J_μ` (`k ≥ 1`).
pub fn bessel_zero(mu: usize, k: usize) -> f64 {
    kth_root(|x| bessel_j(mu, x), 1e-3, k)
}

/// `k`-th positive zero of `J_μ'`, i.e. the `k`-th extremum of `J_μ` (`k ≥ 1`).
pub fn bessel_jp_zero(mu: usize, k: usize) -> f64 {
    kth_root(|x| bessel_jp(mu, x), 1e-3, k)
}
