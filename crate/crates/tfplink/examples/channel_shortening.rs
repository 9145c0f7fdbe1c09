//! Channel shortening on an ISI channel: the trivial full-memory limit,
//! the MMSE limit at zero memory, and the rate objective in between.
//!
//! Run with: cargo run --example channel_shortening

use tfplink::isidet::{channel_shorten, gaussian_input_rate, UngerboeckModel};

fn main() {
    // a 3-tap ISI channel in Ungerboeck form with moderate noise
    let model = UngerboeckModel::new(vec![1.0, 0.45, 0.15], 0.05).unwrap();
    println!(
        "channel taps g = {:?}, N0 = {}, memory L = {}",
        model.taps(),
        model.n0,
        model.memory()
    );
    println!(
        "full-memory Gaussian-input rate: {:.4} bits/use\n",
        gaussian_input_rate(&model)
    );

    println!("{:>4} {:>12} {:>22}", "L_r", "objective", "target response g^r");
    for l_r in 0..=3 {
        let sol = channel_shorten(&model, l_r).unwrap();
        let target: Vec<String> = sol.target.iter().map(|v| format!("{v:+.3}")).collect();
        println!(
            "{l_r:>4} {:>12.4} [{}]",
            sol.objective_bits,
            target.join(", ")
        );
    }

    // the L_r = 0 prefilter is a scaled MMSE feedforward equalizer
    let mmse = channel_shorten(&model, 0).unwrap();
    println!(
        "\nL_r = 0 shortener has {} taps; center taps: {:?}",
        mmse.shortener.taps.len(),
        &mmse.shortener.taps[mmse.shortener.taps.len() / 2 - 2..mmse.shortener.taps.len() / 2 + 3]
            .iter()
            .map(|v| format!("{v:+.3}"))
            .collect::<Vec<_>>()
    );
    println!("(a Wiener filter against the folded spectrum, up to a positive scale)");

    // objective increases with detector memory and saturates at the
    // full-memory rate once L_r >= L
    let full = channel_shorten(&model, model.memory()).unwrap();
    assert!((full.objective_bits - gaussian_input_rate(&model)).abs() < 1e-9);
    println!("\nat L_r = L the solution is trivial: H^r = I/2N0, G^r = G/2N0");
}
