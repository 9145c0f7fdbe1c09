//! Assemble a three-carrier superchannel and watch the occupied bandwidth
//! shrink as the frequency spacing is packed below the symbol rate.
//!
//! Run with: cargo run --example superchannel_spectrum

use tfplink::dsp::{occupied_bandwidth_3db, periodogram};
use tfplink::sigkit::{make_constellation, random_frame, ModulationFormat};
use tfplink::txchain::{
    assemble_superchannel, make_pulse, shape_carrier, CarrierPlan, OpticalFilterSpec, PulseSpec,
};

fn main() {
    let c = make_constellation(ModulationFormat::Qpsk);
    let t = 1.0 / 28e9; // 28 GBd
    let sps = 16;
    let pulse = make_pulse(&PulseSpec::Rz50, t, sps as f64 / t).unwrap();
    let tx_filter = OpticalFilterSpec::new(4, 0.4 / t).unwrap();

    let mut carriers = Vec::new();
    for seed in 0..3 {
        let frame = random_frame(seed, 1, 4096, 0, &c);
        carriers.push(
            shape_carrier(
                frame.sequence(0, 0),
                frame.sequence(0, 1),
                &c,
                &pulse,
                &tx_filter,
            )
            .unwrap(),
        );
    }

    println!("3 x 28 GBd QPSK carriers, B = 0.4/T transmit filters\n");
    println!("{:>10} {:>16} {:>14}", "F (x 1/T)", "-3dB width (GHz)", "per slot");
    for f_norm in [1.2, 1.0, 0.8, 0.6, 0.43] {
        let plan = CarrierPlan::synchronized(3, f_norm / t, t, 1e-3).unwrap();
        let sup = assemble_superchannel(&carriers, &plan, 0.4 / t).unwrap();
        let (freqs, psd) = periodogram(&sup.x, sup.sample_rate, 4096);
        let bw = occupied_bandwidth_3db(&freqs, &psd);
        println!(
            "{f_norm:>10.2} {:>16.2} {:>14.3}",
            bw / 1e9,
            bw * t / 3.0
        );
    }
    println!("\nPacking the carriers tighter compresses the aggregate spectrum;");
    println!("the detector, not orthogonality, deals with the induced ICI.");
}
