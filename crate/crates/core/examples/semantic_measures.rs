//! Entropy bookkeeping for a small ambiguous vocabulary.
//!
//! Four messages share three symbols; "bank" is ambiguous and "car"/"auto"
//! are synonyms in the knowledge base.

use semcomm::language::{logical_probability, MessageSpace, StochasticMapping};
use semcomm::measures::{decomposition, semantic_block_encoder_rate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let messages = ["river-bank", "money-bank", "car", "auto"].map(String::from).to_vec();
    // car and auto share meaning class 2
    let space = MessageSpace::new(messages.clone(), vec![0.2, 0.3, 0.3, 0.2], vec![0, 1, 2, 2])?;
    let mapping = StochasticMapping::new(
        ["bank", "car", "vehicle"].map(String::from).to_vec(),
        vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.8, 0.2],
            vec![0.0, 0.5, 0.5],
        ],
    )?;

    let p = logical_probability(&mapping, &space)?;
    for (x, px) in mapping.alphabet().iter().zip(&p) {
        println!("p_S({x}) = {px:.4}");
    }

    let d = decomposition(&mapping, &space)?;
    println!("H_M      = {:.6} bits", d.h_m);
    println!("H_X      = {:.6} bits", d.h_x);
    println!("H(X|M)   = {:.6} bits (redundancy)", d.redundancy);
    println!("H(M|X)   = {:.6} bits (ambiguity)", d.ambiguity);
    println!("I(M;X)   = {:.6} bits", d.mutual);
    println!("residual = {:.2e}", d.identity_residual());

    let rate = semantic_block_encoder_rate(&mapping, &space)?;
    println!(
        "class entropy {:.4}, class Huffman length {:.4}",
        rate.class_entropy, rate.huffman_avg_length
    );
    Ok(())
}
