//! Shaping pulses, the Mach-Zehnder transfer curve, and Gaussian optical
//! filters.
//!
//! Run with: cargo run --example pulses_and_filters

use tfplink::txchain::{make_pulse, mz_modulate, OpticalFilterSpec, PulseSpec};

fn main() {
    let t = 1.0;
    let fs = 16.0;
    for spec in [
        PulseSpec::Nrz,
        PulseSpec::Rz50,
        PulseSpec::Rrc { rolloff: 0.2 },
    ] {
        let p = make_pulse(&spec, t, fs).unwrap();
        let energy: f64 = p.samples.iter().map(|v| v * v).sum::<f64>() / fs;
        println!(
            "{spec:?}: {} samples, center at {}, energy {energy:.4}, single-slot: {}",
            p.samples.len(),
            p.center,
            p.single_slot
        );
    }

    // the MZ curve: drive in [-1, 1] maps to sin(pi/2 drive)
    let drives: Vec<f64> = (-4..=4).map(|i| i as f64 / 4.0).collect();
    let zeros = vec![0.0; drives.len()];
    let field = mz_modulate(&drives, &zeros).unwrap();
    println!("\nMZ transfer (I quadrature):");
    for (d, f) in drives.iter().zip(&field) {
        println!("  drive {d:+.2} -> field {:+.4}", f.re);
    }

    // Gaussian filter responses: order 1 vs order 4
    println!("\nGaussian |H(f)| at B = 10 (3-dB bandwidth):");
    let g1 = OpticalFilterSpec::new(1, 10.0).unwrap();
    let g4 = OpticalFilterSpec::new(4, 10.0).unwrap();
    for f in [0.0, 2.5, 5.0, 7.5, 10.0] {
        println!(
            "  f = {f:>4}: order-1 {:.4}, order-4 {:.4}",
            g1.response(f),
            g4.response(f)
        );
    }
    println!("  (|H(B/2)|^2 = {:.6} for both: the 3-dB point)", g4.response(5.0).powi(2));
}
