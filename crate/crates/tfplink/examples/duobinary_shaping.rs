//! Receiver-side duobinary shaping: the two-tap post-filter that forces a
//! memory-1 response so a tiny trellis can absorb tight frequency packing.
//!
//! Run with: cargo run --example duobinary_shaping

use num_complex::Complex64;
use tfplink::exp::config::{load_config_str, Profile};
use tfplink::exp::runner::run_experiment;
use tfplink::rxfront::duobinary_shape;

fn main() {
    // the shaper itself: y'_k = (y_k + y_{k-1}) / 2
    let one = Complex64::new(1.0, 0.0);
    let impulse = [one, 0.0.into(), 0.0.into(), 0.0.into()];
    println!("impulse response: {:?}", duobinary_shape(&impulse));
    let alternating: Vec<Complex64> = (0..6)
        .map(|i| if i % 2 == 0 { one } else { -one })
        .collect();
    println!(
        "alternating +-1 maps to ~zero: {:?}",
        duobinary_shape(&alternating)
            .iter()
            .map(|v| v.norm())
            .collect::<Vec<_>>()
    );

    // an end-to-end run of the duobinary 16-QAM system on a short link
    let text = r#"
        scenario = "duobinary-demo"
        system = "rx-duobinary"
        modulation = "qam16"
        carriers = 3
        baud_gbd = 14.0
        pulse.kind = "rz50"
        f_spacing = 1.0
        tx_bandwidth = 1.0
        rx_bandwidth = 1.0
        link.preset = "uniform100"
        link.span_count = 3
        sequence.data_bits = 180000
        sequence.training_bits = 40000
        sequence.block_bits = 20000
        sweep.power_dbm = [0.0, 3.0]
        seed = 2
    "#;
    let cfg = load_config_str(text).unwrap();
    println!(
        "\nrunning {} (detector memory {} by construction)...",
        cfg.scenario,
        cfg.detector_memory_resolved()
    );
    let rows = run_experiment(&cfg, Profile::Desk).unwrap();
    println!(
        "{:>10} {:>10} {:>10} {:>8}",
        "P (dBm)", "SNR (dB)", "SE", "CI %"
    );
    for r in &rows {
        println!(
            "{:>10.1} {:>10.2} {:>10.3} {:>8.2}",
            r.launch_dbm_per_carrier,
            r.snr_db,
            r.se,
            r.ci_rel * 100.0
        );
    }
}
