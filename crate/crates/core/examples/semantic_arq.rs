//! Retransmission requests with and without semantic error detection.

use semcomm::codec::{ChannelCode, SourceCodeKind, SyntacticCodec};
use semcomm::harness::{simulate_arq_at_crossover, LinkExperiment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for code in [ChannelCode::None, ChannelCode::Repetition(3), ChannelCode::Hamming74] {
        let mut exp = LinkExperiment::reference(vec![0.0], 50_000, 5);
        exp.codec = SyntacticCodec::for_language(&exp.language, SourceCodeKind::Fixed, code)?;
        for eps in [0.01, 0.05, 0.1] {
            let m = simulate_arq_at_crossover(&exp, eps, 4)?;
            let (gap, sd) = m.retx_gap();
            println!(
                "{code:<9} eps {eps:<4} retx semantic {:.4} syntactic {:.4} ({:.0} sigma) residual {:.4} goodput {:.3}/{:.3}",
                m.sem_retx_rate,
                m.syn_retx_rate,
                gap / sd,
                m.residual_sem_err,
                m.goodput,
                m.syn_goodput
            );
        }
    }
    Ok(())
}
