//! Benchmark workloads shared by the bench targets.

use bpgd_core::{hypergraph_product, BitMatrix, BitVector, CssCode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random `m × n` matrix with column weight `dv` and row weight `n·dv/m`,
/// from the configuration model with repeated row entries rejected.
pub fn random_regular(m: usize, n: usize, dv: usize, seed: u64) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dc = n * dv / m;
    loop {
        let mut sockets: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, dv)).collect();
        sockets.shuffle(&mut rng);
        let rows: Vec<Vec<usize>> = sockets
            .chunks(dc)
            .map(|c| {
                let mut r = c.to_vec();
                r.sort_unstable();
                r
            })
            .collect();
        if rows.iter().all(|r| r.windows(2).all(|w| w[0] != w[1])) {
            return BitMatrix::from_supports(n, &rows).expect("supports are in range");
        }
    }
}

/// `[[625, 25]]` hypergraph product of a random (3,4)-regular 15×20 matrix.
pub fn hgp_625() -> CssCode {
    let h = random_regular(15, 20, 3, 1);
    hypergraph_product(&h, &h).expect("hypergraph products are valid CSS codes")
}

/// `count` i.i.d. bit-flip errors of rate `p`.
pub fn bit_flip_errors(n: usize, p: f64, count: usize, seed: u64) -> Vec<BitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| BitVector::from_bools((0..n).map(|_| rng.random_bool(p))))
        .collect()
}

pub fn random_matrix(rows: usize, cols: usize, density: f64, seed: u64) -> BitMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<BitVector> = (0..rows)
        .map(|_| BitVector::from_bools((0..cols).map(|_| rng.random_bool(density))))
        .collect();
    BitMatrix::from_rows(cols, &rows).expect("rows have the declared length")
}
