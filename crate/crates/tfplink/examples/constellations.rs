//! Gray-mapped square constellations: build each format, inspect the
//! per-quadrature alphabets, and round-trip bits through the mapper.
//!
//! Run with: cargo run --example constellations

use tfplink::sigkit::{
    bits_to_symbols, derive_rng, make_constellation, random_bits, split_iq, symbols_to_bits,
    ModulationFormat, SeedDomain,
};

fn main() {
    for format in [
        ModulationFormat::Qpsk,
        ModulationFormat::Qam16,
        ModulationFormat::Qam64,
        ModulationFormat::Qam256,
    ] {
        let c = make_constellation(format);
        let energy: f64 =
            c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / c.points.len() as f64;
        println!(
            "{format:?}: {} points, {} bits/symbol, mean energy {energy:.12}",
            c.points.len(),
            c.bits_per_symbol
        );
        let levels: Vec<String> = c.pam_levels.iter().map(|l| format!("{l:+.4}")).collect();
        println!("  PAM levels: [{}]", levels.join(", "));

        // Gray labels of adjacent I-levels differ in exactly one bit
        let labels: Vec<String> = (0..c.pam_size())
            .map(|i| format!("{:0width$b}", c.pam_label(i), width = c.bits_per_pam()))
            .collect();
        println!("  Gray labels along one axis: [{}]", labels.join(", "));
    }

    // bits -> symbols -> bits is the identity
    let c = make_constellation(ModulationFormat::Qam64);
    let mut rng = derive_rng(1, SeedDomain::DataBits, 0);
    let bits = random_bits(&mut rng, 6000);
    let symbols = bits_to_symbols(&bits, &c).unwrap();
    assert_eq!(symbols_to_bits(&symbols, &c), bits);
    println!("\n64-QAM: 6000 bits round-tripped through the Gray mapper");

    // splitting complex symbols into quadratures and recombining
    let points: Vec<_> = symbols.iter().map(|&s| c.point(s)).collect();
    let (i, q) = split_iq(&points, &c).unwrap();
    println!(
        "split_iq: first symbol {} -> I {:+.4}, Q {:+.4}",
        points[0], i[0], q[0]
    );
}
