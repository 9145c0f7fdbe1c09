//! A small time-frequency-packing sweep: maximize spectral efficiency
//! over (F, B) and launch power on a short nonlinear link, printing the
//! whole surface.
//!
//! Run with: cargo run --example tfp_sweep
//! (a few minutes of split-step simulation)

use tfplink::exp::config::{load_config_str, Profile};
use tfplink::exp::runner::run_experiment;

fn main() {
    let text = r#"
        scenario = "tfp-sweep-demo"
        system = "tfp"
        modulation = "qpsk"
        carriers = 3
        baud_gbd = 28.0
        pulse.kind = "rz50"
        f_spacing = "sweep"
        tx_bandwidth = "sweep"
        rx_bandwidth = "auto"
        detector_memory = 4
        link.preset = "uniform100"
        link.span_count = 3
        sequence.data_bits = 180000
        sequence.training_bits = 40000
        sequence.block_bits = 20000
        sweep.f_values = [0.5, 0.7, 0.9]
        sweep.b_values = [0.35, 0.5]
        sweep.power_dbm = [0.0, 4.0]
        seed = 3
    "#;
    let cfg = load_config_str(text).unwrap();
    println!("sweeping F x B x power on a 3 x 100 km link...\n");
    let rows = run_experiment(&cfg, Profile::Desk).unwrap();

    println!(
        "{:>8} {:>8} {:>8} {:>10} {:>10} {:>10}",
        "F (1/T)", "B (1/T)", "P (dBm)", "SNR (dB)", "IR x+y", "SE b/s/Hz"
    );
    let mut best: Option<&tfplink::exp::ResultRow> = None;
    for r in rows.iter().filter(|r| r.is_ok()) {
        println!(
            "{:>8.2} {:>8.2} {:>8.1} {:>10.2} {:>10.3} {:>10.3}",
            r.f_norm,
            r.b_norm,
            r.launch_dbm_per_carrier,
            r.snr_db,
            r.ir_x + r.ir_y,
            r.se
        );
        if best.map(|b| r.se > b.se).unwrap_or(true) {
            best = Some(r);
        }
    }
    if let Some(b) = best {
        println!(
            "\npeak SE {:.3} b/s/Hz at F = {}/T, B = {}/T, {} dBm per carrier",
            b.se, b.f_norm, b.b_norm, b.launch_dbm_per_carrier
        );
        println!("tighter-than-Nyquist spacing wins once the detector absorbs the ISI/ICI");
    }
}
