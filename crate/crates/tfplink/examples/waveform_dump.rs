//! The binary waveform debug format: header {sample_rate: f64 LE,
//! n: u64 LE, pols: u8} followed by per-sample interleaved (re, im) f64
//! pairs for each polarization.
//!
//! Run with: cargo run --example waveform_dump

use tfplink::sigkit::{make_constellation, random_frame, ModulationFormat};
use tfplink::txchain::{dump_waveform, load_waveform, make_pulse, shape_carrier, OpticalFilterSpec, PulseSpec};

fn main() {
    let c = make_constellation(ModulationFormat::Qam16);
    let t = 1.0 / 14e9;
    let frame = random_frame(6, 1, 256, 0, &c);
    let pulse = make_pulse(&PulseSpec::Nrz, t, 8.0 / t).unwrap();
    let filt = OpticalFilterSpec::new(4, 1.1 / t).unwrap();
    let w = shape_carrier(
        frame.sequence(0, 0),
        frame.sequence(0, 1),
        &c,
        &pulse,
        &filt,
    )
    .unwrap();

    let path = std::env::temp_dir().join("tfplink_waveform.bin");
    let mut file = std::fs::File::create(&path).unwrap();
    dump_waveform(&w, &mut file).unwrap();
    let bytes = std::fs::metadata(&path).unwrap().len();
    println!(
        "dumped {} samples x 2 polarizations to {} ({} bytes)",
        w.len(),
        path.display(),
        bytes
    );
    println!(
        "expected size: 8 + 8 + 1 + n*2*16 = {}",
        17 + w.len() as u64 * 32
    );

    let mut file = std::fs::File::open(&path).unwrap();
    let back = load_waveform(&mut file).unwrap();
    assert_eq!(back.len(), w.len());
    assert_eq!(back.sample_rate, w.sample_rate);
    let identical = back
        .x
        .iter()
        .zip(&w.x)
        .all(|(a, b)| a == b);
    println!("round trip bit-exact: {identical}");
    std::fs::remove_file(&path).ok();
}
