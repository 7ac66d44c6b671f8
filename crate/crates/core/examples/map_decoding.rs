//! MAP decoding of messages through a noisy symbol channel.

use semcomm::channel::{bsc, BitLink};
use semcomm::codec::{semantic_map_decode, ChannelCode, SemanticDecoder, SourceCode, SyntacticCodec};
use semcomm::language::{MessageSpace, StochasticMapping};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let space = MessageSpace::new(
        ["yes", "no", "maybe"].map(String::from).to_vec(),
        vec![0.5, 0.3, 0.2],
        vec![0, 1, 2],
    )?;
    // "yes" is said two ways
    let mapping = StochasticMapping::new(
        ["y", "yeah", "n", "mb"].map(String::from).to_vec(),
        vec![
            vec![0.6, 0.4, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ],
    )?;

    // symbol-level: a binary symmetric channel on 2-bit symbol indices is
    // modelled here as a 4x4 channel matrix
    let eps = 0.1;
    let b = bsc(eps)?;
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|x: usize| {
            (0..4)
                .map(|y: usize| b.prob(x >> 1, y >> 1) * b.prob(x & 1, y & 1))
                .collect()
        })
        .collect();
    let channel = semcomm::channel::DiscreteChannel::new(rows)?;
    for y in 0..4 {
        let r = semantic_map_decode(y, &space, &mapping, &channel)?;
        println!(
            "received {:<5} -> {:<6} confidence {:.3}",
            mapping.alphabet()[y],
            space.messages()[r.message_hat],
            r.confidence
        );
    }

    // bit-level with the same decision rule
    let codec = SyntacticCodec::new(SourceCode::fixed_length(4)?, ChannelCode::None)?;
    let decoder = SemanticDecoder::for_mapping(&space, &mapping, &codec)?;
    let r = decoder.decode(&[0, 1], &BitLink::uniform(eps))?;
    println!("bits 01 -> {} posterior {:?}", space.messages()[r.message_hat], r.posterior);
    Ok(())
}
