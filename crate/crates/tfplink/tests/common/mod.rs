//! Shared oracles for the integration and acceptance suites. Everything
//! here is independent of the library's own computation paths: direct
//! quadrature for mutual information, dense Cholesky for colored noise,
//! and a Nelder-Mead maximizer for cross-checking the closed-form channel
//! shortener.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use tfplink::sigkit::{derive_rng, Constellation, SeedDomain};

/// i.u.d. QPSK mutual information over complex AWGN with noise variance
/// 2 N0 (unit symbol energy), by Simpson quadrature on the two BPSK
/// quadratures.
pub fn qpsk_awgn_mi(n0: f64) -> f64 {
    let a = (0.5f64).sqrt();
    let sigma = n0.sqrt();
    let steps = 40_000;
    let lo = a - 12.0 * sigma;
    let hi = a + 12.0 * sigma;
    let h = (hi - lo) / steps as f64;
    let integrand = |t: f64| -> f64 {
        let p = (-(t - a) * (t - a) / (2.0 * sigma * sigma)).exp()
            / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let arg = -2.0 * a * t / (sigma * sigma);
        let l = if arg > 30.0 {
            arg / std::f64::consts::LN_2
        } else {
            arg.exp().ln_1p() / std::f64::consts::LN_2
        };
        p * l
    };
    let mut acc = integrand(lo) + integrand(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(lo + i as f64 * h);
    }
    2.0 * (1.0 - acc * h / 3.0)
}

/// Dense lower-Cholesky factorization (row-major symmetric input).
pub fn cholesky(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = matrix.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                assert!(sum > 0.0, "matrix not positive definite at {i}");
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    l
}

/// Simulate the Ungerboeck observation y = Gx + n with exact noise
/// covariance 2 N0 G via dense Cholesky (suitable for moderate lengths).
pub fn ungerboeck_observation(
    x: &[Complex64],
    taps: &[f64],
    n0: f64,
    seed: u64,
) -> Vec<Complex64> {
    let k = x.len();
    let tap = |lag: isize| -> f64 {
        let i = lag.unsigned_abs();
        if i < taps.len() {
            taps[i]
        } else {
            0.0
        }
    };
    // signal part
    let mut y: Vec<Complex64> = (0..k as isize)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..k as isize {
                acc += tap(i - j) * x[j as usize];
            }
            acc
        })
        .collect();
    // colored noise: cov 2 N0 G per complex dimension means each real
    // quadrature has covariance N0 G
    let g: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| n0 * tap(i as isize - j as isize))
                .collect()
        })
        .collect();
    let l = cholesky(&g);
    let mut rng = derive_rng(seed, SeedDomain::Oracle, 99);
    let mut white_re = vec![0.0; k];
    let mut white_im = vec![0.0; k];
    for i in 0..k {
        white_re[i] = rng.sample(StandardNormal);
        white_im[i] = rng.sample(StandardNormal);
    }
    for i in 0..k {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..=i {
            re += l[i][j] * white_re[j];
            im += l[i][j] * white_im[j];
        }
        y[i] += Complex64::new(re, im);
    }
    y
}

/// Random i.u.d. symbols from a constellation.
pub fn random_symbols(c: &Constellation, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = derive_rng(seed, SeedDomain::Oracle, 3);
    (0..n).map(|_| rng.random_range(0..c.size())).collect()
}

pub fn points_of(c: &Constellation, symbols: &[usize]) -> Vec<Complex64> {
    symbols.iter().map(|&s| c.point(s)).collect()
}

/// Nelder-Mead maximization, good enough for the low-dimensional
/// channel-shortening oracle.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    scale: f64,
    iterations: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..iterations {
        // sort descending (maximization)
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let simplex2: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let values2: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = simplex2;
        values = values2;

        let worst = simplex.len() - 1;
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..worst].iter().map(|v| v[d]).sum::<f64>() / worst as f64)
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|d| centroid[d] + (centroid[d] - simplex[worst][d]))
            .collect();
        let fr = f(&reflect);
        if fr > values[0] {
            let expand: Vec<f64> = (0..n)
                .map(|d| centroid[d] + 2.0 * (centroid[d] - simplex[worst][d]))
                .collect();
            let fe = f(&expand);
            if fe > fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr > values[worst - 1] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|d| centroid[d] - 0.5 * (centroid[d] - simplex[worst][d]))
                .collect();
            let fc = f(&contract);
            if fc > values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..simplex.len() {
                    for d in 0..n {
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = values
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    (simplex[best].clone(), values[best])
}

/// Gaussian-input achievable rate of a mismatched target-response pair,
/// evaluated numerically in frequency: with U(w) = 1 + T(w) and the
/// prefilter optimized pointwise,
/// I = 1 + (1/2pi) int [ln U - W U] dw, in bits.
pub fn cs_objective_bits(taps: &[f64], n0: f64, u_coeffs: &[f64]) -> f64 {
    let grid = 2048;
    let two_n0 = 2.0 * n0;
    let mut acc = 0.0;
    for k in 0..grid {
        let w = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        let mut g = taps[0];
        for (i, &t) in taps.iter().enumerate().skip(1) {
            g += 2.0 * t * (w * i as f64).cos();
        }
        let g = g.max(0.0);
        let wfun = two_n0 / (g + two_n0);
        let mut u = u_coeffs[0];
        for (i, &c) in u_coeffs.iter().enumerate().skip(1) {
            u += 2.0 * c * (w * i as f64).cos();
        }
        if u <= 1e-12 {
            return f64::NEG_INFINITY;
        }
        acc += u.ln() - wfun * u;
    }
    (1.0 + acc / grid as f64) / std::f64::consts::LN_2
}
