//! The coded loop: alist-backed LDPC decoding and iterative (turbo)
//! detection/decoding over an ISI-free AWGN channel.
//!
//! Run with: cargo run --example ldpc_turbo

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use tfplink::codedloop::{
    ldpc_decode, measure_ber, turbo_detect_decode, CheckRule, Interleaver, ParityCheck,
    TurboConfig,
};
use tfplink::isidet::{channel_shorten, UngerboeckModel};
use tfplink::sigkit::{bits_to_symbols, derive_rng, make_constellation, ModulationFormat, SeedDomain};

fn main() {
    // the bundled rate-4/5 toy code: n = 5000, regular (3, 15)
    let h = ParityCheck::bundled_toy();
    println!(
        "bundled code: n = {}, checks = {}, rate = {:.2}",
        h.n_vars(),
        h.n_checks(),
        h.rate()
    );

    // plain decoding of a noisy all-zero codeword
    let mut rng = derive_rng(5, SeedDomain::Oracle, 0);
    let snr_db = 4.2;
    let sigma = (0.5 / 10f64.powf(snr_db / 10.0)).sqrt(); // per-bit BPSK noise
    let llrs: Vec<f64> = (0..h.n_vars())
        .map(|_| {
            let n: f64 = rng.sample(StandardNormal);
            2.0 * (1.0 + n * sigma) / (sigma * sigma)
        })
        .collect();
    let out = ldpc_decode(&llrs, &h, 50, CheckRule::SumProduct).unwrap();
    println!(
        "sum-product at {snr_db} dB: converged = {}, iterations = {}, errors = {}",
        out.converged,
        out.iterations,
        out.hard.iter().filter(|&&b| b == 1).count()
    );

    // full turbo loop at a few SNRs, QPSK mapping through the interleaver
    let c = make_constellation(ModulationFormat::Qpsk);
    let il = Interleaver::new(h.n_vars(), 42);
    let enc = h.encoder().unwrap();
    let cfg = TurboConfig {
        max_iterations: 10,
        ..Default::default()
    };
    println!("\nturbo detection/decoding, 20 codewords per point:");
    println!("{:>8} {:>10} {:>12}", "SNR dB", "BER", "converged");
    for snr_db in [3.0, 3.5, 4.0, 4.5] {
        let snr = 10f64.powf(snr_db / 10.0);
        let n0 = 1.0 / (2.0 * snr);
        let model = UngerboeckModel::new(vec![1.0], n0).unwrap();
        let sol = channel_shorten(&model, 0).unwrap();
        let sigma = n0.sqrt();
        let mut errors = 0usize;
        let mut total = 0usize;
        let mut converged = 0usize;
        let mut rng = derive_rng(900 + snr_db as u64, SeedDomain::Oracle, 1);
        for _ in 0..20 {
            let info: Vec<u8> = (0..enc.k()).map(|_| rng.random_range(0..2u8)).collect();
            let cw = enc.encode(&info).unwrap();
            let chan = il.scatter(&cw);
            let symbols = bits_to_symbols(&chan, &c).unwrap();
            let y: Vec<Complex64> = symbols
                .iter()
                .map(|&s| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    c.point(s) + Complex64::new(re * sigma, im * sigma)
                })
                .collect();
            let out = turbo_detect_decode(&y, &sol, &c, &h, &il, &cfg, None, Some(&cw)).unwrap();
            let (ber, n) = measure_ber(&out.bits, &cw).unwrap();
            errors += (ber * n as f64) as usize;
            total += n;
            converged += out.converged as usize;
        }
        println!(
            "{snr_db:>8.1} {:>10.2e} {:>9}/20",
            errors as f64 / total as f64,
            converged
        );
    }
}
