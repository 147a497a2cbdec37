//! Topology of manifolds glued from necks, caps and spherical pieces.

use riccilab::topology::{classify, Decomposition, PieceKind::*};

fn main() {
    let cases = [
        Decomposition::chain(&[Cap, Neck, Neck, Cap]),
        Decomposition::cycle(3),
        Decomposition::spherical(),
        Decomposition::chain(&[Cap, Neck]),
        Decomposition::chain(&[Neck, Neck]),
        Decomposition::chain(&[Cap, Cap, Cap]),
    ];
    for d in &cases {
        println!("{:<12} {}", d.text(), classify(d));
    }
}
